//! Programmatic answers for instantiated questions.
//!
//! Every function here scans the typed table directly; the context
//! builder never feeds back into answer computation.

use std::cmp::Ordering;
use std::collections::HashSet;

use rust_decimal::Decimal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EgKind;
use crate::table::{calendar_span, render_date, render_number, render_span, Date, SemanticType, TypedTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    SpanList,
    YesNo,
    Number,
    Date,
    Duration,
}

impl AnswerKind {
    pub fn name(self) -> &'static str {
        match self {
            AnswerKind::SpanList => "span_list",
            AnswerKind::YesNo => "yes_no",
            AnswerKind::Number => "number",
            AnswerKind::Date => "date",
            AnswerKind::Duration => "duration",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Answer {
    pub kind: AnswerKind,
    pub values: Vec<String>,
}

impl Answer {
    pub fn spans(values: Vec<String>) -> Self {
        Self { kind: AnswerKind::SpanList, values }
    }

    pub fn yes_no(yes: bool) -> Self {
        Self { kind: AnswerKind::YesNo, values: vec![if yes { "yes" } else { "no" }.to_string()] }
    }

    pub fn number(n: Decimal) -> Self {
        Self { kind: AnswerKind::Number, values: vec![render_number(&n)] }
    }

    pub fn date(d: &Date) -> Self {
        Self { kind: AnswerKind::Date, values: vec![render_date(d)] }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnswerError {
    #[error("an intermediate chain value does not identify a single row")]
    AmbiguousChain,
    #[error("an anchor value does not identify a single row")]
    AmbiguousAnchor,
    #[error("no rows match")]
    EmptyResult,
    #[error("compared values are equal")]
    TieDiscarded,
    #[error("a required cell does not parse under the column type")]
    UnparseableCell,
    #[error("not enough values in scope")]
    InsufficientValues,
    #[error("dates are known to different precisions")]
    IncomparablePrecision,
    #[error("a required cell is blank")]
    BlankCell,
    #[error("degenerate instantiation")]
    Degenerate,
}

/// A column pinned to one of its values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Anchor {
    pub col: usize,
    pub value: String,
}

impl Anchor {
    pub fn new(col: usize, value: impl Into<String>) -> Self {
        Self { col, value: value.into() }
    }
}

/// `Greater` covers higher / later / more recently; `Less` the opposite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Greater,
    Less,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Number,
    Temporal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuperlativeFamily {
    Number,
    Temporal,
    Arithmetic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Quantifier {
    Only,
    Most,
    Every,
}

/// The semantic content of an instantiated question.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Query {
    Composition { anchor: Anchor, chain: Vec<usize>, target: usize },
    Conjunction { first: Anchor, second: Anchor, target: usize },
    Quantifier { kind: Quantifier, subject_col: usize, subject: Option<String>, condition: Anchor },
    Comparison { family: Family, boolean: bool, direction: Direction, left: Anchor, right: Anchor, value_col: usize },
    Superlative { family: SuperlativeFamily, direction: Direction, target: usize, value_col: usize, filter: Option<Anchor> },
    Addition { target: usize, filter: Anchor },
    Counting { target: usize, filter: Anchor },
    DateDifference { left: Anchor, right: Anchor, date_col: usize },
}

impl Query {
    pub fn eg(&self) -> EgKind {
        match self {
            Query::Composition { chain, .. } if chain.len() >= 2 => EgKind::Composition3Hop,
            Query::Composition { .. } => EgKind::Composition2Hop,
            Query::Conjunction { .. } => EgKind::Conjunction,
            Query::Quantifier { kind: Quantifier::Only, .. } => EgKind::QuantifierOnly,
            Query::Quantifier { kind: Quantifier::Most, .. } => EgKind::QuantifierMost,
            Query::Quantifier { kind: Quantifier::Every, .. } => EgKind::QuantifierEvery,
            Query::Comparison { family: Family::Number, boolean: false, .. } => EgKind::NumberComparison,
            Query::Comparison { family: Family::Number, boolean: true, .. } => EgKind::NumberBooleanComparison,
            Query::Comparison { family: Family::Temporal, boolean: false, .. } => EgKind::TemporalComparison,
            Query::Comparison { family: Family::Temporal, boolean: true, .. } => EgKind::TemporalBooleanComparison,
            Query::Superlative { family: SuperlativeFamily::Number, .. } => EgKind::NumberSuperlative,
            Query::Superlative { family: SuperlativeFamily::Temporal, .. } => EgKind::TemporalSuperlative,
            Query::Superlative { family: SuperlativeFamily::Arithmetic, .. } => EgKind::ArithmeticSuperlative,
            Query::Addition { .. } => EgKind::ArithmeticAddition,
            Query::Counting { .. } => EgKind::Counting,
            Query::DateDifference { .. } => EgKind::DateDifference,
        }
    }
}

/// Computes the answer to `query` against `table`.
pub fn evaluate(table: &TypedTable, query: &Query) -> Result<Answer, AnswerError> {
    match query {
        Query::Composition { anchor, chain, target } => answer_composition(table, anchor, chain, *target),
        Query::Conjunction { first, second, target } => answer_conjunction(table, first, second, *target),
        Query::Quantifier { kind, subject_col, subject, condition } => {
            answer_quantifier(table, *kind, *subject_col, subject.as_deref(), condition)
        }
        Query::Comparison { family, boolean, direction, left, right, value_col } => {
            answer_comparison(table, *family, *boolean, *direction, left, right, *value_col)
        }
        Query::Superlative { family, direction, target, value_col, filter } => {
            answer_superlative(table, *family, *direction, *target, *value_col, filter.as_ref())
        }
        Query::Addition { target, filter } => answer_addition(table, *target, filter),
        Query::Counting { target, filter } => answer_counting(table, *target, filter),
        Query::DateDifference { left, right, date_col } => answer_date_difference(table, left, right, *date_col),
    }
}

fn distinct_in_order<I: IntoIterator<Item = String>>(items: I) -> Vec<String> {
    let mut seen = HashSet::new();
    items.into_iter().filter(|v| seen.insert(v.clone())).collect()
}

fn all_distinct(cols: &[usize]) -> bool {
    let set: HashSet<_> = cols.iter().collect();
    set.len() == cols.len()
}

fn matching_rows(table: &TypedTable, anchor: &Anchor) -> Result<Vec<usize>, AnswerError> {
    if anchor.value.is_empty() {
        return Err(AnswerError::BlankCell);
    }
    let rows = table.rows_where(anchor.col, &anchor.value);
    if rows.is_empty() {
        Err(AnswerError::EmptyResult)
    } else {
        Ok(rows)
    }
}

fn single_row(table: &TypedTable, anchor: &Anchor) -> Result<usize, AnswerError> {
    match matching_rows(table, anchor)?.as_slice() {
        [r] => Ok(*r),
        _ => Err(AnswerError::AmbiguousAnchor),
    }
}

fn raw_of(table: &TypedTable, row: usize, col: usize) -> Result<String, AnswerError> {
    let cell = table.cell(row, col);
    if cell.is_blank() {
        Err(AnswerError::BlankCell)
    } else {
        Ok(cell.raw.clone())
    }
}

/// Follows a chain of facts from the anchor rows through each chain column
/// to the target column. Each chain value must be unique in its column so
/// the chain reads one way only.
pub fn answer_composition(
    table: &TypedTable,
    anchor: &Anchor,
    chain: &[usize],
    target: usize,
) -> Result<Answer, AnswerError> {
    let mut cols = vec![anchor.col];
    cols.extend_from_slice(chain);
    cols.push(target);
    if chain.is_empty() || chain.len() > 2 || !all_distinct(&cols) {
        return Err(AnswerError::Degenerate);
    }
    let rows = matching_rows(table, anchor)?;
    let mut out = Vec::with_capacity(rows.len());
    for &r in &rows {
        for &c in chain {
            let v = raw_of(table, r, c)?;
            if table.rows_where(c, &v).len() != 1 {
                return Err(AnswerError::AmbiguousChain);
            }
        }
        out.push(raw_of(table, r, target)?);
    }
    Ok(Answer::spans(distinct_in_order(out)))
}

pub fn answer_conjunction(
    table: &TypedTable,
    first: &Anchor,
    second: &Anchor,
    target: usize,
) -> Result<Answer, AnswerError> {
    if !all_distinct(&[first.col, second.col, target]) {
        return Err(AnswerError::Degenerate);
    }
    let a = matching_rows(table, first)?;
    let b: HashSet<usize> = matching_rows(table, second)?.into_iter().collect();
    let rows: Vec<usize> = a.into_iter().filter(|r| b.contains(r)).collect();
    if rows.is_empty() {
        return Err(AnswerError::EmptyResult);
    }
    let values = rows.iter().map(|&r| raw_of(table, r, target)).collect::<Result<Vec<_>, _>>()?;
    Ok(Answer::spans(distinct_in_order(values)))
}

pub fn answer_quantifier(
    table: &TypedTable,
    kind: Quantifier,
    subject_col: usize,
    subject: Option<&str>,
    condition: &Anchor,
) -> Result<Answer, AnswerError> {
    if subject_col == condition.col {
        return Err(AnswerError::Degenerate);
    }
    match kind {
        Quantifier::Only => {
            let subject = subject.ok_or(AnswerError::Degenerate)?;
            if subject.is_empty() {
                return Err(AnswerError::BlankCell);
            }
            if table.rows_where(subject_col, subject).is_empty() {
                return Err(AnswerError::EmptyResult);
            }
            let rows = matching_rows(table, condition)?;
            let holders = rows.iter().map(|&r| raw_of(table, r, subject_col)).collect::<Result<Vec<_>, _>>()?;
            let holders: HashSet<String> = holders.into_iter().collect();
            Ok(Answer::yes_no(holders.len() == 1 && holders.contains(subject)))
        }
        Quantifier::Every | Quantifier::Most => {
            if subject.is_some() {
                return Err(AnswerError::Degenerate);
            }
            matching_rows(table, condition)?;
            for r in 0..table.n_rows() {
                raw_of(table, r, subject_col)?;
                raw_of(table, r, condition.col)?;
            }
            let hits = table.rows_where(condition.col, &condition.value).len();
            let n = table.n_rows();
            let yes = match kind {
                Quantifier::Every => hits == n,
                _ => 2 * hits > n,
            };
            Ok(Answer::yes_no(yes))
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Scalar {
    Number(Decimal),
    Date(Date),
}

impl Scalar {
    fn compare(&self, other: &Scalar) -> Result<Ordering, AnswerError> {
        match (self, other) {
            (Scalar::Number(a), Scalar::Number(b)) => Ok(a.cmp(b)),
            (Scalar::Date(a), Scalar::Date(b)) => a.cmp_same_precision(b).ok_or(AnswerError::IncomparablePrecision),
            _ => Err(AnswerError::Degenerate),
        }
    }
}

fn scalar_at(table: &TypedTable, row: usize, col: usize) -> Result<Scalar, AnswerError> {
    let cell = table.cell(row, col);
    match table.column(col).ty {
        SemanticType::Number => cell.number().map(Scalar::Number).ok_or(AnswerError::UnparseableCell),
        SemanticType::Date => cell.date().map(Scalar::Date).ok_or(AnswerError::UnparseableCell),
        SemanticType::String => Err(AnswerError::Degenerate),
    }
}

fn family_type(family: Family) -> SemanticType {
    match family {
        Family::Number => SemanticType::Number,
        Family::Temporal => SemanticType::Date,
    }
}

pub fn answer_comparison(
    table: &TypedTable,
    family: Family,
    boolean: bool,
    direction: Direction,
    left: &Anchor,
    right: &Anchor,
    value_col: usize,
) -> Result<Answer, AnswerError> {
    if table.column(value_col).ty != family_type(family) || left.col == value_col || right.col == value_col {
        return Err(AnswerError::Degenerate);
    }
    let (lr, rr) = (single_row(table, left)?, single_row(table, right)?);
    if lr == rr {
        return Err(AnswerError::Degenerate);
    }
    let ord = scalar_at(table, lr, value_col)?.compare(&scalar_at(table, rr, value_col)?)?;
    let left_wins = match ord {
        Ordering::Equal => return Err(AnswerError::TieDiscarded),
        Ordering::Greater => direction == Direction::Greater,
        Ordering::Less => direction == Direction::Less,
    };
    if boolean {
        Ok(Answer::yes_no(left_wins))
    } else {
        let winner = if left_wins { left } else { right };
        Ok(Answer::spans(vec![winner.value.clone()]))
    }
}

/// Number and temporal superlatives return every target value attaining
/// the extreme. Arithmetic superlatives return the extreme value itself
/// over the filtered rows.
pub fn answer_superlative(
    table: &TypedTable,
    family: SuperlativeFamily,
    direction: Direction,
    target: usize,
    value_col: usize,
    filter: Option<&Anchor>,
) -> Result<Answer, AnswerError> {
    let value_ty = table.column(value_col).ty;
    let type_ok = match family {
        SuperlativeFamily::Number => value_ty == SemanticType::Number && filter.is_none(),
        SuperlativeFamily::Temporal => value_ty == SemanticType::Date && filter.is_none(),
        SuperlativeFamily::Arithmetic => value_ty != SemanticType::String && filter.is_some(),
    };
    if !type_ok {
        return Err(AnswerError::Degenerate);
    }
    let rows: Vec<usize> = match filter {
        Some(f) => {
            if f.col == value_col {
                return Err(AnswerError::Degenerate);
            }
            matching_rows(table, f)?
        }
        None => {
            if target == value_col {
                return Err(AnswerError::Degenerate);
            }
            (0..table.n_rows()).collect()
        }
    };
    if rows.len() < 2 {
        return Err(AnswerError::InsufficientValues);
    }
    let values = rows.iter().map(|&r| scalar_at(table, r, value_col)).collect::<Result<Vec<_>, _>>()?;

    let mut best = 0;
    for i in 1..values.len() {
        let ord = values[i].compare(&values[best])?;
        let better = match direction {
            Direction::Greater => ord == Ordering::Greater,
            Direction::Less => ord == Ordering::Less,
        };
        if better {
            best = i;
        }
    }
    let extreme = values[best];

    if family == SuperlativeFamily::Arithmetic {
        return Ok(match extreme {
            Scalar::Number(n) => Answer::number(n),
            Scalar::Date(d) => Answer::date(&d),
        });
    }
    let mut winners = Vec::new();
    for (i, &r) in rows.iter().enumerate() {
        if values[i].compare(&extreme)? == Ordering::Equal {
            winners.push(raw_of(table, r, target)?);
        }
    }
    for &r in &rows {
        raw_of(table, r, target)?;
    }
    Ok(Answer::spans(distinct_in_order(winners)))
}

pub fn answer_addition(table: &TypedTable, target: usize, filter: &Anchor) -> Result<Answer, AnswerError> {
    if table.column(target).ty != SemanticType::Number || target == filter.col {
        return Err(AnswerError::Degenerate);
    }
    let rows = matching_rows(table, filter)?;
    if rows.len() < 2 {
        return Err(AnswerError::InsufficientValues);
    }
    let mut total = Decimal::ZERO;
    for r in rows {
        let n = table.cell(r, target).number().ok_or(AnswerError::UnparseableCell)?;
        total = total.checked_add(n).ok_or(AnswerError::UnparseableCell)?;
    }
    Ok(Answer::number(total))
}

/// Counts distinct target values among the filtered rows.
pub fn answer_counting(table: &TypedTable, target: usize, filter: &Anchor) -> Result<Answer, AnswerError> {
    if target == filter.col {
        return Err(AnswerError::Degenerate);
    }
    let rows = matching_rows(table, filter)?;
    let values = rows.iter().map(|&r| raw_of(table, r, target)).collect::<Result<HashSet<_>, _>>()?;
    Ok(Answer::number(Decimal::from(values.len() as u64)))
}

pub fn answer_date_difference(
    table: &TypedTable,
    left: &Anchor,
    right: &Anchor,
    date_col: usize,
) -> Result<Answer, AnswerError> {
    if table.column(date_col).ty != SemanticType::Date || left.col == date_col || right.col == date_col {
        return Err(AnswerError::Degenerate);
    }
    let (lr, rr) = (single_row(table, left)?, single_row(table, right)?);
    if lr == rr {
        return Err(AnswerError::Degenerate);
    }
    let a = table.cell(lr, date_col).date().ok_or(AnswerError::UnparseableCell)?;
    let b = table.cell(rr, date_col).date().ok_or(AnswerError::UnparseableCell)?;
    match a.cmp_same_precision(&b) {
        None => Err(AnswerError::IncomparablePrecision),
        Some(Ordering::Equal) => Err(AnswerError::TieDiscarded),
        Some(_) => {
            let span = calendar_span(&a, &b).ok_or(AnswerError::IncomparablePrecision)?;
            Ok(Answer { kind: AnswerKind::Duration, values: vec![render_span(&span)] })
        }
    }
}
