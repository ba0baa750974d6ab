//! Cell value parsing and canonical rendering.
//!
//! Number parsing is locale-fixed: `,` groups thousands and `.` is the
//! decimal point. Dates accept the handful of English layouts that show up
//! in encyclopedia tables.

use std::cmp::Ordering;
use std::fmt;

use chrono::{Months, NaiveDate};
use rust_decimal::Decimal;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("not a number: {0:?}")]
    NotANumber(String),
    #[error("not a date: {0:?}")]
    NotADate(String),
}

const CURRENCY: &[char] = &['$', '€', '£'];

/// Parses a table cell as a decimal number.
///
/// Thousands separators, a leading currency symbol and a trailing percent
/// sign are stripped. Comma groups must be three digits wide.
pub fn parse_number(raw: &str) -> Result<Decimal, ParseError> {
    let fail = || ParseError::NotANumber(raw.to_string());
    let mut s = raw.trim();
    let mut negative = false;
    if let Some(rest) = s.strip_prefix('-').or_else(|| s.strip_prefix('−')) {
        negative = true;
        s = rest;
    } else if let Some(rest) = s.strip_prefix('+') {
        s = rest;
    }
    s = s.trim_start_matches(CURRENCY);
    s = s.strip_suffix('%').unwrap_or(s).trim_end();
    if s.is_empty() {
        return Err(fail());
    }

    let (int_part, frac_part) = match s.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (s, None),
    };
    if int_part.is_empty() || !valid_integer_part(int_part) {
        return Err(fail());
    }
    if let Some(f) = frac_part {
        if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
            return Err(fail());
        }
    }

    let mut digits: String = int_part.chars().filter(|c| *c != ',').collect();
    if let Some(f) = frac_part {
        digits.push('.');
        digits.push_str(f);
    }
    let mut value: Decimal = digits.parse().map_err(|_| fail())?;
    if negative {
        value = -value;
    }
    Ok(value.normalize())
}

fn valid_integer_part(s: &str) -> bool {
    if !s.contains(',') {
        return s.bytes().all(|b| b.is_ascii_digit());
    }
    let mut groups = s.split(',');
    let head = groups.next().unwrap_or("");
    if head.is_empty() || head.len() > 3 || !head.bytes().all(|b| b.is_ascii_digit()) {
        return false;
    }
    groups.all(|g| g.len() == 3 && g.bytes().all(|b| b.is_ascii_digit()))
}

/// Canonical number rendering: no thousands separators, no trailing zeros.
pub fn render_number(value: &Decimal) -> String {
    let v = value.normalize();
    if v.is_zero() {
        return "0".to_string();
    }
    v.to_string()
}

const MONTHS: [&str; 12] = [
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DatePrecision {
    Year,
    Month,
    Day,
}

/// A calendar date that may be known only to the year or month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Date {
    year: i32,
    month: Option<u32>,
    day: Option<u32>,
}

impl Date {
    pub fn ymd(year: i32, month: u32, day: u32) -> Option<Self> {
        NaiveDate::from_ymd_opt(year, month, day)?;
        Some(Self { year, month: Some(month), day: Some(day) })
    }

    pub fn ym(year: i32, month: u32) -> Option<Self> {
        (1..=12).contains(&month).then_some(Self { year, month: Some(month), day: None })
    }

    pub fn year_only(year: i32) -> Self {
        Self { year, month: None, day: None }
    }

    pub fn year(&self) -> i32 {
        self.year
    }

    pub fn month(&self) -> Option<u32> {
        self.month
    }

    pub fn day(&self) -> Option<u32> {
        self.day
    }

    pub fn precision(&self) -> DatePrecision {
        match (self.month, self.day) {
            (Some(_), Some(_)) => DatePrecision::Day,
            (Some(_), None) => DatePrecision::Month,
            _ => DatePrecision::Year,
        }
    }

    /// Orders two dates known to the same precision. Mixed precisions are
    /// incomparable, even when the years alone would decide.
    pub fn cmp_same_precision(&self, other: &Date) -> Option<Ordering> {
        (self.precision() == other.precision()).then(|| {
            (self.year, self.month, self.day).cmp(&(other.year, other.month, other.day))
        })
    }
}

impl fmt::Display for Date {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_date(self))
    }
}

/// Renders `D Month YYYY`, `Month YYYY` or `YYYY` depending on precision.
pub fn render_date(date: &Date) -> String {
    match (date.month, date.day) {
        (Some(m), Some(d)) => format!("{} {} {}", d, MONTHS[m as usize - 1], date.year),
        (Some(m), None) => format!("{} {}", MONTHS[m as usize - 1], date.year),
        _ => date.year.to_string(),
    }
}

fn month_from_name(word: &str) -> Option<u32> {
    let w = word.trim_end_matches('.').to_ascii_lowercase();
    if w.len() < 3 {
        return None;
    }
    MONTHS.iter().position(|m| {
        let m = m.to_ascii_lowercase();
        m == w || (w.len() == 3 && m.starts_with(&w)) || (w == "sept" && m == "september")
    })
    .map(|i| i as u32 + 1)
}

fn parse_year(token: &str) -> Option<i32> {
    if token.len() == 4 && token.bytes().all(|b| b.is_ascii_digit()) {
        token.parse().ok()
    } else {
        None
    }
}

fn parse_day(token: &str) -> Option<u32> {
    let t = token.trim_end_matches(',');
    let t = ["st", "nd", "rd", "th"]
        .iter()
        .find_map(|suffix| t.strip_suffix(suffix))
        .unwrap_or(t);
    if t.is_empty() || t.len() > 2 || !t.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    t.parse().ok()
}

/// Parses a table cell as a calendar date.
///
/// Recognized layouts: `27 February 1991`, `February 27, 1991`,
/// `February 1991`, `1991-02-27`, `1991-02` and a bare four-digit year.
pub fn parse_date(raw: &str) -> Result<Date, ParseError> {
    let fail = || ParseError::NotADate(raw.to_string());
    let s = raw.trim();
    if let Some(y) = parse_year(s) {
        return Ok(Date::year_only(y));
    }
    if let Some(d) = parse_iso(s) {
        return Ok(d);
    }

    let tokens: Vec<&str> = s.split_whitespace().collect();
    let date = match tokens.as_slice() {
        [day, month, year] if parse_day(day).is_some() && month_from_name(month).is_some() => {
            Date::ymd(parse_year(year).ok_or_else(fail)?, month_from_name(month).unwrap(), parse_day(day).unwrap())
        }
        [month, day, year] if month_from_name(month).is_some() && parse_day(day).is_some() => {
            Date::ymd(parse_year(year).ok_or_else(fail)?, month_from_name(month).unwrap(), parse_day(day).unwrap())
        }
        [month, year] if month_from_name(month).is_some() => {
            Date::ym(parse_year(year).ok_or_else(fail)?, month_from_name(month).unwrap())
        }
        _ => None,
    };
    date.ok_or_else(fail)
}

fn parse_iso(s: &str) -> Option<Date> {
    let parts: Vec<&str> = s.split('-').collect();
    let num = |p: &str, len: usize| -> Option<u32> {
        (p.len() == len && p.bytes().all(|b| b.is_ascii_digit())).then(|| p.parse().ok()).flatten()
    };
    match parts.as_slice() {
        [y, m, d] => Date::ymd(num(y, 4)? as i32, num(m, 2)?, num(d, 2)?),
        [y, m] => Date::ym(num(y, 4)? as i32, num(m, 2)?),
        _ => None,
    }
}

/// Elapsed time between two dates of equal precision, in calendar units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CalendarSpan {
    pub years: u32,
    pub months: u32,
    pub days: u32,
}

/// Years, months and days from the earlier to the later date. `None` when
/// precisions differ.
pub fn calendar_span(a: &Date, b: &Date) -> Option<CalendarSpan> {
    let ord = a.cmp_same_precision(b)?;
    let (from, to) = if ord == Ordering::Greater { (b, a) } else { (a, b) };
    match from.precision() {
        DatePrecision::Year => Some(CalendarSpan {
            years: (to.year - from.year) as u32,
            months: 0,
            days: 0,
        }),
        DatePrecision::Month => {
            let total = (to.year - from.year) * 12 + to.month.unwrap() as i32 - from.month.unwrap() as i32;
            Some(CalendarSpan { years: total as u32 / 12, months: total as u32 % 12, days: 0 })
        }
        DatePrecision::Day => {
            let start = NaiveDate::from_ymd_opt(from.year, from.month?, from.day?)?;
            let end = NaiveDate::from_ymd_opt(to.year, to.month?, to.day?)?;
            // whole months first (day clamped to month end), remaining days after
            let mut months = (to.year - from.year) * 12 + to.month? as i32 - from.month? as i32;
            let mut anchor = start.checked_add_months(Months::new(months.max(0) as u32))?;
            if anchor > end {
                months -= 1;
                anchor = start.checked_add_months(Months::new(months.max(0) as u32))?;
            }
            let days = (end - anchor).num_days();
            Some(CalendarSpan { years: months as u32 / 12, months: months as u32 % 12, days: days as u32 })
        }
    }
}

/// `Y years, M months, D days`, largest unit first, zero parts omitted.
pub fn render_span(span: &CalendarSpan) -> String {
    let unit = |n: u32, one: &str, many: &str| {
        if n == 1 {
            format!("1 {one}")
        } else {
            format!("{n} {many}")
        }
    };
    let mut parts = Vec::new();
    if span.years > 0 {
        parts.push(unit(span.years, "year", "years"));
    }
    if span.months > 0 {
        parts.push(unit(span.months, "month", "months"));
    }
    if span.days > 0 {
        parts.push(unit(span.days, "day", "days"));
    }
    if parts.is_empty() {
        "0 days".to_string()
    } else {
        parts.join(", ")
    }
}
