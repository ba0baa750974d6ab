//! Reference interpreters used to cross-check the generator, plus corpus
//! fixtures shared by the integration tests.
//!
//! Nothing here calls into the library's answer, parsing or rendering
//! code: cells are read as raw strings and interpreted afresh.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rust_decimal::Decimal;

use synthqa::context::{Context, DistractorPool, FactKind, Statement};
use synthqa::eg::{
    generate_capped, Anchor, Answer, AnswerKind, Direction, EgKind, Family, Generated, Quantifier, Query,
    SuperlativeFamily,
};
use synthqa::pipeline::synth::synthetic_table;
use synthqa::pipeline::{derive_seed, example_context, to_record, ExampleRecord, GenerateOptions};
use synthqa::table::{ingest, RawTable, SemanticType, ShapeBounds, TypedTable};

pub fn data_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn raw_tables(name: &str) -> Vec<RawTable> {
    fs::read_to_string(data_path(name))
        .expect("fixture exists")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).expect("fixture parses"))
        .collect()
}

pub fn typed(raw: RawTable) -> TypedTable {
    ingest(raw, &ShapeBounds::default()).expect("fixture is in bounds")
}

pub fn table_named(id: &str) -> TypedTable {
    typed(raw_tables("handbuilt.jsonl").into_iter().find(|t| t.id == id).expect("fixture table"))
}

pub fn chelsea() -> TypedTable {
    typed(raw_tables("chelsea.jsonl").remove(0))
}

pub fn col(table: &TypedTable, name: &str) -> usize {
    table.columns().iter().position(|c| c.name == name).unwrap_or_else(|| panic!("no column {name}"))
}

// ---------------------------------------------------------------------------
// values

const MONTHS: [&str; 12] = [
    "january", "february", "march", "april", "may", "june", "july", "august", "september", "october", "november",
    "december",
];

/// (year, month, day) with unknown parts as `None`.
pub type Ymd = (i32, Option<u32>, Option<u32>);

pub fn number(raw: &str) -> Option<Decimal> {
    let s = raw.trim();
    let s = s.strip_prefix(['$', '€', '£']).unwrap_or(s);
    let s = s.strip_suffix('%').unwrap_or(s);
    let cleaned: String = s.chars().filter(|&c| c != ',').collect();
    Decimal::from_str(&cleaned).ok()
}

fn month_of(word: &str) -> Option<u32> {
    let w = word.trim_end_matches('.').to_lowercase();
    let i = MONTHS.iter().position(|m| *m == w || (w.len() == 3 && m.starts_with(&w)) || (w == "sept" && *m == "september"))?;
    Some(i as u32 + 1)
}

fn four_digit_year(s: &str) -> Option<i32> {
    (s.len() == 4 && s.chars().all(|c| c.is_ascii_digit())).then(|| s.parse().unwrap())
}

pub fn date(raw: &str) -> Option<Ymd> {
    let s = raw.trim();
    if let Some(y) = four_digit_year(s) {
        return Some((y, None, None));
    }
    if s.contains('-') && !s.contains(' ') {
        let p: Vec<&str> = s.split('-').collect();
        let y = four_digit_year(p[0])?;
        return match p.len() {
            2 => Some((y, Some(p[1].parse().ok()?), None)),
            3 => Some((y, Some(p[1].parse().ok()?), Some(p[2].parse().ok()?))),
            _ => None,
        };
    }
    let t: Vec<&str> = s.split_whitespace().collect();
    let day = |w: &str| -> Option<u32> {
        let w = w.trim_end_matches(',');
        let w = w.trim_end_matches(|c: char| c.is_ascii_alphabetic());
        w.parse().ok()
    };
    match t.as_slice() {
        [d, m, y] if day(d).is_some() && month_of(m).is_some() => Some((four_digit_year(y)?, month_of(m), day(d))),
        [m, d, y] => Some((four_digit_year(y)?, Some(month_of(m)?), Some(day(d)?))),
        [m, y] => Some((four_digit_year(y)?, Some(month_of(m)?), None)),
        _ => None,
    }
}

fn precision(d: &Ymd) -> u8 {
    match d {
        (_, None, _) => 0,
        (_, Some(_), None) => 1,
        _ => 2,
    }
}

fn render_ymd(d: &Ymd) -> String {
    let name = |m: u32| {
        let m = MONTHS[m as usize - 1];
        m[..1].to_uppercase() + &m[1..]
    };
    match *d {
        (y, Some(m), Some(day)) => format!("{day} {} {y}", name(m)),
        (y, Some(m), None) => format!("{} {y}", name(m)),
        (y, _, _) => y.to_string(),
    }
}

fn render_decimal(d: Decimal) -> String {
    if d.is_zero() {
        "0".into()
    } else {
        d.normalize().to_string()
    }
}

fn leap(y: i32) -> bool {
    (y % 4 == 0 && y % 100 != 0) || y % 400 == 0
}

fn month_len(y: i32, m: u32) -> u32 {
    match m {
        2 if leap(y) => 29,
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

/// Adds whole months, clamping the day to the end of the month.
fn add_months(d: (i32, u32, u32), n: i32) -> (i32, u32, u32) {
    let idx = d.0 * 12 + d.1 as i32 - 1 + n;
    let (y, m) = (idx.div_euclid(12), idx.rem_euclid(12) as u32 + 1);
    (y, m, d.2.min(month_len(y, m)))
}

fn next_day(d: (i32, u32, u32)) -> (i32, u32, u32) {
    if d.2 < month_len(d.0, d.1) {
        (d.0, d.1, d.2 + 1)
    } else if d.1 < 12 {
        (d.0, d.1 + 1, 1)
    } else {
        (d.0 + 1, 1, 1)
    }
}

fn plural(n: u32, unit: &str) -> String {
    if n == 1 {
        format!("1 {unit}")
    } else {
        format!("{n} {unit}s")
    }
}

/// Elapsed time by counting: whole months while they fit, then single days.
pub fn walk_duration(a: &Ymd, b: &Ymd) -> Option<String> {
    if precision(a) != precision(b) || a == b {
        return None;
    }
    let (from, to) = if ymd_cmp(a, b)? == Ordering::Greater { (b, a) } else { (a, b) };
    let (years, months, days) = match precision(from) {
        0 => ((to.0 - from.0) as u32, 0, 0),
        1 => {
            let total = (to.0 * 12 + to.1? as i32) - (from.0 * 12 + from.1? as i32);
            (total as u32 / 12, total as u32 % 12, 0)
        }
        _ => {
            let start = (from.0, from.1?, from.2?);
            let end = (to.0, to.1?, to.2?);
            let mut months = 0;
            while add_months(start, months + 1) <= end {
                months += 1;
            }
            let mut cur = add_months(start, months);
            let mut days = 0;
            while cur < end {
                cur = next_day(cur);
                days += 1;
            }
            (months as u32 / 12, months as u32 % 12, days)
        }
    };
    let parts: Vec<String> = [(years, "year"), (months, "month"), (days, "day")]
        .iter()
        .filter(|(n, _)| *n > 0)
        .map(|(n, u)| plural(*n, u))
        .collect();
    Some(parts.join(", "))
}

fn ymd_cmp(a: &Ymd, b: &Ymd) -> Option<Ordering> {
    (precision(a) == precision(b)).then(|| a.cmp(b))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Val {
    Num(Decimal),
    Date(Ymd),
}

fn typed_value(ty: SemanticType, raw: &str) -> Option<Val> {
    match ty {
        SemanticType::Number => number(raw).map(Val::Num),
        SemanticType::Date => date(raw).map(Val::Date),
        SemanticType::String => None,
    }
}

fn val_cmp(a: &Val, b: &Val) -> Option<Ordering> {
    match (a, b) {
        (Val::Num(x), Val::Num(y)) => Some(x.cmp(y)),
        (Val::Date(x), Val::Date(y)) => ymd_cmp(x, y),
        _ => None,
    }
}

fn render_val(v: &Val) -> Answer {
    match v {
        Val::Num(n) => Answer { kind: AnswerKind::Number, values: vec![render_decimal(*n)] },
        Val::Date(d) => Answer { kind: AnswerKind::Date, values: vec![render_ymd(d)] },
    }
}

fn spans(values: Vec<String>) -> Answer {
    let mut seen = HashSet::new();
    Answer { kind: AnswerKind::SpanList, values: values.into_iter().filter(|v| seen.insert(v.clone())).collect() }
}

fn yes_no(b: bool) -> Answer {
    Answer { kind: AnswerKind::YesNo, values: vec![if b { "yes" } else { "no" }.into()] }
}

fn count(n: usize) -> Answer {
    Answer { kind: AnswerKind::Number, values: vec![n.to_string()] }
}

fn wins(ord: Ordering, dir: Direction) -> Option<bool> {
    match ord {
        Ordering::Equal => None,
        Ordering::Greater => Some(dir == Direction::Greater),
        Ordering::Less => Some(dir == Direction::Less),
    }
}

fn extreme(values: &[Val], dir: Direction) -> Option<Val> {
    let mut best = *values.first()?;
    for v in &values[1..] {
        if wins(val_cmp(v, &best)?, dir) == Some(true) {
            best = *v;
        }
    }
    Some(best)
}

// ---------------------------------------------------------------------------
// table-level interpreter

/// Answers a query by scanning every row of the table.
pub fn table_answer(t: &TypedTable, q: &Query) -> Option<Answer> {
    let cell = |r: usize, c: usize| t.rows()[r][c].raw.as_str();
    let all_rows = || 0..t.n_rows();
    let matching = |a: &Anchor| -> Vec<usize> { all_rows().filter(|&r| cell(r, a.col) == a.value).collect() };
    let unique = |a: &Anchor| -> Option<usize> {
        let rows = matching(a);
        (rows.len() == 1).then(|| rows[0])
    };
    let value_at = |r: usize, c: usize| typed_value(t.column(c).ty, cell(r, c));

    match q {
        Query::Composition { anchor, chain, target } => {
            let mut out = Vec::new();
            for r in matching(anchor) {
                let mut cur = r;
                for &c in chain {
                    let v = cell(cur, c);
                    let next: Vec<usize> = all_rows().filter(|&x| cell(x, c) == v).collect();
                    if next.len() != 1 {
                        return None;
                    }
                    cur = next[0];
                }
                out.push(cell(cur, *target).to_string());
            }
            (!out.is_empty()).then(|| spans(out))
        }
        Query::Conjunction { first, second, target } => {
            let out: Vec<String> = all_rows()
                .filter(|&r| cell(r, first.col) == first.value && cell(r, second.col) == second.value)
                .map(|r| cell(r, *target).to_string())
                .collect();
            (!out.is_empty()).then(|| spans(out))
        }
        Query::Quantifier { kind, subject_col, subject, condition } => {
            let hits = matching(condition);
            match kind {
                Quantifier::Only => {
                    let holders: HashSet<&str> = hits.iter().map(|&r| cell(r, *subject_col)).collect();
                    let s = subject.as_deref()?;
                    Some(yes_no(holders.len() == 1 && holders.contains(s)))
                }
                Quantifier::Every => Some(yes_no(hits.len() == t.n_rows())),
                Quantifier::Most => Some(yes_no(hits.len() * 2 > t.n_rows())),
            }
        }
        Query::Comparison { boolean, direction, left, right, value_col, .. } => {
            let (l, r) = (unique(left)?, unique(right)?);
            let left_wins = wins(val_cmp(&value_at(l, *value_col)?, &value_at(r, *value_col)?)?, *direction)?;
            Some(if *boolean {
                yes_no(left_wins)
            } else {
                spans(vec![if left_wins { left.value.clone() } else { right.value.clone() }])
            })
        }
        Query::Superlative { family, direction, target, value_col, filter } => {
            let rows: Vec<usize> = match filter {
                Some(f) => matching(f),
                None => all_rows().collect(),
            };
            let values = rows.iter().map(|&r| value_at(r, *value_col)).collect::<Option<Vec<_>>>()?;
            if values.len() < 2 {
                return None;
            }
            let best = extreme(&values, *direction)?;
            if *family == SuperlativeFamily::Arithmetic {
                return Some(render_val(&best));
            }
            let winners = rows
                .iter()
                .zip(&values)
                .filter(|(_, v)| val_cmp(v, &best) == Some(Ordering::Equal))
                .map(|(&r, _)| cell(r, *target).to_string())
                .collect();
            Some(spans(winners))
        }
        Query::Addition { target, filter } => {
            let rows = matching(filter);
            if rows.len() < 2 {
                return None;
            }
            let total = rows.iter().map(|&r| number(cell(r, *target))).sum::<Option<Decimal>>()?;
            Some(render_val(&Val::Num(total)))
        }
        Query::Counting { target, filter } => {
            let distinct: HashSet<&str> = matching(filter).into_iter().map(|r| cell(r, *target)).collect();
            (!distinct.is_empty()).then(|| count(distinct.len()))
        }
        Query::DateDifference { left, right, date_col } => {
            let (l, r) = (unique(left)?, unique(right)?);
            let span = walk_duration(&date(cell(l, *date_col))?, &date(cell(r, *date_col))?)?;
            Some(Answer { kind: AnswerKind::Duration, values: vec![span] })
        }
    }
}

// ---------------------------------------------------------------------------
// fact-level interpreter

/// Answers a query from verbalized facts only. Knows column names and
/// types, nothing about cell contents.
pub struct FactBase<'a> {
    names: Vec<&'a str>,
    types: Vec<SemanticType>,
    facts: Vec<&'a Statement>,
}

impl<'a> FactBase<'a> {
    pub fn new(table: &'a TypedTable, facts: impl IntoIterator<Item = &'a Statement>) -> Self {
        Self {
            names: table.columns().iter().map(|c| c.name.as_str()).collect(),
            types: table.columns().iter().map(|c| c.ty).collect(),
            facts: facts.into_iter().collect(),
        }
    }

    fn lookup(&self, subject: usize, key: usize, value: &str) -> Option<&'a [String]> {
        let mut found = self.facts.iter().filter(|s| {
            s.subject == self.names[subject]
                && s.conditions.len() == 1
                && s.conditions[0].0 == self.names[key]
                && s.conditions[0].1 == value
        });
        let hit = found.next()?;
        found.next().is_none().then_some(hit.values.as_slice())
    }

    fn scan(&self, subject: usize, key: usize) -> Vec<(&'a str, &'a [String])> {
        self.facts
            .iter()
            .filter(|s| s.subject == self.names[subject] && s.conditions.len() == 1 && s.conditions[0].0 == self.names[key])
            .map(|s| (s.conditions[0].1.as_str(), s.values.as_slice()))
            .collect()
    }

    fn single(&self, subject: usize, anchor: &Anchor) -> Option<Val> {
        match self.lookup(subject, anchor.col, &anchor.value)? {
            [v] => typed_value(self.types[subject], v),
            _ => None,
        }
    }

    pub fn answer(&self, q: &Query) -> Option<Answer> {
        match q {
            Query::Composition { anchor, chain, target } => {
                let mut path = vec![anchor.col];
                path.extend(chain);
                path.push(*target);
                let mut out = Vec::new();
                for v in self.lookup(path[1], path[0], &anchor.value)? {
                    let mut cur = v.as_str();
                    for hop in path[1..].windows(2) {
                        match self.lookup(hop[1], hop[0], cur)? {
                            [next] => cur = next,
                            _ => return None,
                        }
                    }
                    out.push(cur.to_string());
                }
                Some(spans(out))
            }
            Query::Conjunction { first, second, target } => {
                let combined = self.facts.iter().find(|s| {
                    s.subject == self.names[*target]
                        && s.conditions
                            == [
                                (self.names[first.col].to_string(), first.value.clone()),
                                (self.names[second.col].to_string(), second.value.clone()),
                            ]
                });
                if let Some(s) = combined {
                    return Some(spans(s.values.clone()));
                }
                let a = self.lookup(*target, first.col, &first.value)?;
                let b: HashSet<&String> = self.lookup(*target, second.col, &second.value)?.iter().collect();
                let both: Vec<String> = a.iter().filter(|v| b.contains(v)).cloned().collect();
                (!both.is_empty()).then(|| spans(both))
            }
            Query::Quantifier { kind: Quantifier::Only, subject_col, subject, condition } => {
                let holders: HashSet<&String> = self.lookup(*subject_col, condition.col, &condition.value)?.iter().collect();
                let s = subject.as_ref()?;
                Some(yes_no(holders.len() == 1 && holders.contains(s)))
            }
            Query::Quantifier { kind, subject_col, condition, .. } => {
                let facts = self.scan(condition.col, *subject_col);
                let total: usize = facts.iter().map(|(_, v)| v.len()).sum();
                let hits = facts.iter().flat_map(|(_, v)| v.iter()).filter(|v| **v == condition.value).count();
                if total == 0 {
                    return None;
                }
                Some(yes_no(if *kind == Quantifier::Every { hits == total } else { 2 * hits > total }))
            }
            Query::Comparison { boolean, direction, left, right, value_col, .. } => {
                let (l, r) = (self.single(*value_col, left)?, self.single(*value_col, right)?);
                let left_wins = wins(val_cmp(&l, &r)?, *direction)?;
                Some(if *boolean {
                    yes_no(left_wins)
                } else {
                    spans(vec![if left_wins { left.value.clone() } else { right.value.clone() }])
                })
            }
            Query::Superlative { family: SuperlativeFamily::Arithmetic, direction, value_col, filter, .. } => {
                let f = filter.as_ref()?;
                let values = self
                    .lookup(*value_col, f.col, &f.value)?
                    .iter()
                    .map(|v| typed_value(self.types[*value_col], v))
                    .collect::<Option<Vec<_>>>()?;
                if values.len() < 2 {
                    return None;
                }
                Some(render_val(&extreme(&values, *direction)?))
            }
            Query::Superlative { direction, target, value_col, .. } => {
                let mut pairs = Vec::new();
                for (key, values) in self.scan(*value_col, *target) {
                    for v in values {
                        pairs.push((key, typed_value(self.types[*value_col], v)?));
                    }
                }
                if pairs.len() < 2 {
                    return None;
                }
                let values: Vec<Val> = pairs.iter().map(|p| p.1).collect();
                let best = extreme(&values, *direction)?;
                let winners =
                    pairs.iter().filter(|(_, v)| val_cmp(v, &best) == Some(Ordering::Equal)).map(|(k, _)| k.to_string());
                Some(spans(winners.collect()))
            }
            Query::Addition { target, filter } => {
                let values = self.lookup(*target, filter.col, &filter.value)?;
                if values.len() < 2 {
                    return None;
                }
                let total = values.iter().map(|v| number(v)).sum::<Option<Decimal>>()?;
                Some(render_val(&Val::Num(total)))
            }
            Query::Counting { target, filter } => {
                let distinct: HashSet<&String> = self.lookup(*target, filter.col, &filter.value)?.iter().collect();
                Some(count(distinct.len()))
            }
            Query::DateDifference { left, right, date_col } => {
                let (Val::Date(l), Val::Date(r)) = (self.single(*date_col, left)?, self.single(*date_col, right)?) else {
                    return None;
                };
                Some(Answer { kind: AnswerKind::Duration, values: vec![walk_duration(&l, &r)?] })
            }
        }
    }
}

/// Superlative winners come from shuffled facts, so their order carries no
/// meaning at fact level; everything else compares exactly.
pub fn fact_answer_matches(q: &Query, expected: &Answer, got: &Option<Answer>) -> bool {
    let Some(got) = got else { return false };
    match q {
        Query::Superlative { family: SuperlativeFamily::Number | SuperlativeFamily::Temporal, .. } => {
            let sorted = |a: &Answer| {
                let mut v = a.values.clone();
                v.sort();
                v
            };
            got.kind == expected.kind && sorted(got) == sorted(expected)
        }
        _ => got == expected,
    }
}

/// Generators whose gold facts are each individually required.
pub fn gold_is_necessary(q: &Query) -> bool {
    matches!(
        q,
        Query::Composition { .. } | Query::Conjunction { .. } | Query::Comparison { .. } | Query::DateDifference { .. }
    )
}

pub fn is_comparison_family(q: &Query, family: Family) -> bool {
    matches!(q, Query::Comparison { family: f, .. } if *f == family)
}

// ---------------------------------------------------------------------------
// desk corpus

pub const DESK_SEED: u64 = 2024;
pub const DESK_SYNTHETIC_TABLES: usize = 100;

pub struct DeskExample {
    pub table: usize,
    pub eg: EgKind,
    pub generated: Generated,
    pub context: Context,
    pub record: ExampleRecord,
}

pub struct DeskCorpus {
    pub tables: Vec<TypedTable>,
    pub examples: Vec<DeskExample>,
}

pub fn desk_tables() -> Vec<TypedTable> {
    let mut tables: Vec<TypedTable> = (0..DESK_SYNTHETIC_TABLES).map(|i| typed(synthetic_table(i, DESK_SEED))).collect();
    tables.extend(raw_tables("handbuilt.jsonl").into_iter().map(typed));
    tables
}

/// Same generation path as the pipeline, keeping the structured pieces.
pub fn desk_corpus() -> DeskCorpus {
    let tables = desk_tables();
    let opts = GenerateOptions { seed: DESK_SEED, ..Default::default() };
    let mut examples = Vec::new();
    for (ti, table) in tables.iter().enumerate() {
        let pool = DistractorPool::new(table);
        for eg in EgKind::ALL {
            let seed = derive_seed(opts.seed, &table.meta.id, eg, "generate");
            for g in generate_capped(table, eg, seed, opts.per_table_cap) {
                let (_, context) = example_context(table, &pool, eg, &g, &opts);
                let record = to_record(table, &pool, eg, &g, &opts);
                examples.push(DeskExample { table: ti, eg, generated: g, context, record });
            }
        }
    }
    DeskCorpus { tables, examples }
}

pub fn per_table_eg_counts(corpus: &DeskCorpus) -> HashMap<(usize, EgKind), usize> {
    let mut counts = HashMap::new();
    for ex in &corpus.examples {
        *counts.entry((ex.table, ex.eg)).or_default() += 1;
    }
    counts
}

pub fn gold_statements(ctx: &Context) -> Vec<&Statement> {
    ctx.facts.iter().filter(|f| f.kind == FactKind::Gold).map(|f| &f.statement).collect()
}
