//! Sampling of instantiations for each example generator.
//!
//! Each generator describes its candidate space as a mixed-radix index
//! over column and row choices. Small spaces are enumerated in a seeded
//! random order; large ones are sampled with replacement under a draw
//! budget. Candidates whose answer cannot be soundly computed are dropped
//! and the first `cap` valid ones are kept.

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::template::{templates_for, Binding, Instantiation};
use super::{evaluate, Anchor, Answer, Direction, EgKind, Family, Quantifier, Query, SuperlativeFamily};
use crate::context::{plan_gold, GoldSpec};
use crate::table::{SemanticType, TypedTable};

/// Most triplets kept per (generator, table).
pub const PER_TABLE_CAP: usize = 10;

const ENUMERATE_LIMIT: u64 = 4096;
const MAX_DRAWS: usize = 2000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generated {
    pub instantiation: Instantiation,
    pub answer: Answer,
    pub gold: GoldSpec,
}

/// Up to [`PER_TABLE_CAP`] triplets for `eg` on `table`. Pure in
/// `(table, eg, seed)`.
pub fn generate(table: &TypedTable, eg: EgKind, seed: u64) -> Vec<Generated> {
    generate_capped(table, eg, seed, PER_TABLE_CAP)
}

pub fn generate_capped(table: &TypedTable, eg: EgKind, seed: u64, cap: usize) -> Vec<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = Space::new(table, eg);
    let total = space.size();
    let mut out = Vec::new();
    if total == 0 || cap == 0 {
        log::debug!("{eg} unsatisfiable on table {}", table.meta.id);
        return out;
    }

    let order: Box<dyn Iterator<Item = u64>> = if total <= ENUMERATE_LIMIT {
        let mut all: Vec<u64> = (0..total).collect();
        all.shuffle(&mut rng);
        Box::new(all.into_iter())
    } else {
        let draws: Vec<u64> = (0..MAX_DRAWS).map(|_| rng.gen_range(0..total)).collect();
        Box::new(draws.into_iter())
    };

    let mut seen: HashSet<Query> = HashSet::new();
    for index in order {
        let Some(candidate) = space.decode(index) else { continue };
        if seen.contains(&candidate.query) {
            continue;
        }
        seen.insert(candidate.query.clone());
        if let Some(g) = realize(table, eg, candidate, &mut rng) {
            out.push(g);
            if out.len() == cap {
                break;
            }
        }
    }
    if out.is_empty() {
        log::debug!("{eg} produced no valid instantiation on table {}", table.meta.id);
    }
    out
}

/// Answers, plans and renders a query outside the sampler. Used for
/// hand-picked questions.
pub fn instantiate(
    table: &TypedTable,
    template_id: &str,
    query: Query,
    operator: Option<&str>,
) -> Option<Generated> {
    let template = super::template::template_by_id(template_id)?;
    let bindings = bindings_for(table, &query, operator.map(str::to_string))?;
    let answer = evaluate(table, &query).ok()?;
    let gold = plan_gold(table, &query)?;
    let instantiation = Instantiation::new(template, table, bindings, query).ok()?;
    Some(Generated { instantiation, answer, gold })
}

struct Candidate {
    query: Query,
    operator: Option<String>,
}

fn realize(table: &TypedTable, eg: EgKind, candidate: Candidate, rng: &mut ChaCha8Rng) -> Option<Generated> {
    let answer = evaluate(table, &candidate.query).ok()?;
    debug_assert!(eg.answer_kinds().contains(&answer.kind));
    let gold = plan_gold(table, &candidate.query)?;
    let templates: Vec<_> = templates_for(eg).collect();
    let template = *templates.choose(rng)?;
    let bindings = bindings_for(table, &candidate.query, candidate.operator)?;
    let instantiation = Instantiation::new(template, table, bindings, candidate.query).ok()?;
    Some(Generated { instantiation, answer, gold })
}

fn bind_col(b: &mut BTreeMap<String, Binding>, slot: &str, col: usize) {
    b.insert(format!("col:{slot}"), Binding::Column { col });
}

fn bind_val(table: &TypedTable, b: &mut BTreeMap<String, Binding>, slot: &str, anchor: &Anchor) -> Option<()> {
    let row = *table.rows_where(anchor.col, &anchor.value).first()?;
    b.insert(
        format!("val:{slot}"),
        Binding::Cell { col: anchor.col, row, value: table.cell(row, anchor.col).clone() },
    );
    Some(())
}

fn bindings_for(table: &TypedTable, query: &Query, operator: Option<String>) -> Option<BTreeMap<String, Binding>> {
    let mut b = BTreeMap::new();
    match query {
        Query::Composition { anchor, chain, target } => {
            bind_col(&mut b, "1", *target);
            bind_col(&mut b, "2", anchor.col);
            bind_val(table, &mut b, "2", anchor)?;
            for (i, &c) in chain.iter().enumerate() {
                bind_col(&mut b, &(3 + i).to_string(), c);
            }
        }
        Query::Conjunction { first, second, target } => {
            bind_col(&mut b, "1", *target);
            bind_col(&mut b, "2", first.col);
            bind_val(table, &mut b, "2", first)?;
            bind_col(&mut b, "3", second.col);
            bind_val(table, &mut b, "3", second)?;
        }
        Query::Quantifier { subject_col, subject, condition, .. } => {
            bind_col(&mut b, "1", *subject_col);
            if let Some(s) = subject {
                bind_val(table, &mut b, "1", &Anchor::new(*subject_col, s.clone()))?;
            }
            bind_col(&mut b, "2", condition.col);
            bind_val(table, &mut b, "2", condition)?;
        }
        Query::Comparison { family: Family::Number, left, right, value_col, .. } => {
            bind_col(&mut b, "1", left.col);
            bind_val(table, &mut b, "1", left)?;
            bind_val(table, &mut b, "1'", right)?;
            bind_col(&mut b, "2", *value_col);
        }
        Query::Comparison { family: Family::Temporal, left, right, value_col, .. }
        | Query::DateDifference { left, right, date_col: value_col } => {
            bind_col(&mut b, "1", left.col);
            bind_val(table, &mut b, "1", left)?;
            bind_col(&mut b, "2", right.col);
            bind_val(table, &mut b, "2", right)?;
            bind_col(&mut b, "3", *value_col);
        }
        Query::Superlative { value_col, filter: Some(filter), .. } => {
            bind_col(&mut b, "1", *value_col);
            bind_col(&mut b, "2", filter.col);
            bind_val(table, &mut b, "2", filter)?;
        }
        Query::Superlative { target, value_col, filter: None, .. } => {
            bind_col(&mut b, "1", *target);
            bind_col(&mut b, "2", *value_col);
        }
        Query::Addition { target, filter } | Query::Counting { target, filter } => {
            bind_col(&mut b, "1", *target);
            bind_col(&mut b, "2", filter.col);
            bind_val(table, &mut b, "2", filter)?;
        }
    }
    if let Some(op) = operator {
        b.insert("op".to_string(), Binding::Operator(op));
    }
    Some(b)
}

/// Surface form to direction, per generator family.
pub fn operator_direction(op: &str) -> Option<Direction> {
    match op {
        "higher" | "later" | "highest" | "latest" | "more recently than when" => Some(Direction::Greater),
        "lower" | "earlier" | "lowest" | "earliest" | "earlier than when" => Some(Direction::Less),
        _ => None,
    }
}

struct Space<'t> {
    table: &'t TypedTable,
    eg: EgKind,
    dims: Vec<u64>,
    all_cols: Vec<usize>,
    anchor_cols: Vec<usize>,
    number_cols: Vec<usize>,
    date_cols: Vec<usize>,
    typed_cols: Vec<usize>,
}

/// STRING columns whose values are all distinct and non-blank, falling
/// back to every STRING column when the table has no such key.
fn anchor_columns(table: &TypedTable) -> Vec<usize> {
    let strings = table.columns_of_type(SemanticType::String);
    let keys: Vec<usize> = strings
        .iter()
        .copied()
        .filter(|&c| {
            let mut seen = HashSet::new();
            (0..table.n_rows()).all(|r| {
                let v = &table.cell(r, c).raw;
                !v.is_empty() && seen.insert(v.as_str())
            })
        })
        .collect();
    if keys.is_empty() {
        strings
    } else {
        keys
    }
}

impl<'t> Space<'t> {
    fn new(table: &'t TypedTable, eg: EgKind) -> Self {
        let n = table.n_cols() as u64;
        let r = table.n_rows() as u64;
        let all_cols: Vec<usize> = (0..table.n_cols()).collect();
        let anchor_cols = anchor_columns(table);
        let number_cols = table.columns_of_type(SemanticType::Number);
        let date_cols = table.columns_of_type(SemanticType::Date);
        let mut typed_cols = number_cols.clone();
        typed_cols.extend(&date_cols);
        let (a, nu, d, ty) =
            (anchor_cols.len() as u64, number_cols.len() as u64, date_cols.len() as u64, typed_cols.len() as u64);
        use EgKind::*;
        let dims = match eg {
            Composition2Hop => vec![n, n, n, r],
            Composition3Hop => vec![n, n, n, n, r],
            Conjunction => vec![n, n, n, r],
            QuantifierOnly => vec![n, n, r, 2, r.saturating_sub(1).max(1)],
            QuantifierMost | QuantifierEvery => vec![n, n, r],
            NumberComparison | NumberBooleanComparison => vec![a, nu, r, r, 2],
            TemporalComparison | TemporalBooleanComparison => vec![a, a, d, r, r, 2],
            NumberSuperlative => vec![n, nu, 2],
            TemporalSuperlative => vec![n, d, 2],
            ArithmeticSuperlative => vec![ty, n, r, 2],
            ArithmeticAddition => vec![nu, n, r],
            Counting => vec![n, n, r],
            DateDifference => vec![a, a, d, r, r],
        };
        Self { table, eg, dims, all_cols, anchor_cols, number_cols, date_cols, typed_cols }
    }

    fn size(&self) -> u64 {
        self.dims.iter().try_fold(1u64, |acc, &d| acc.checked_mul(d)).unwrap_or(u64::MAX)
    }

    fn digits(&self, mut index: u64) -> Vec<usize> {
        self.dims
            .iter()
            .map(|&d| {
                let digit = index % d;
                index /= d;
                digit as usize
            })
            .collect()
    }

    fn anchor(&self, col: usize, row: usize) -> Anchor {
        Anchor::new(col, self.table.cell(row, col).raw.clone())
    }

    fn decode(&self, index: u64) -> Option<Candidate> {
        let d = self.digits(index);
        let t = self.table;
        let distinct = |cols: &[usize]| cols.iter().collect::<HashSet<_>>().len() == cols.len();
        let plain = |query| Some(Candidate { query, operator: None });
        let with_op = |query, op: &str| Some(Candidate { query, operator: Some(op.to_string()) });
        use EgKind::*;
        match self.eg {
            Composition2Hop | Composition3Hop => {
                let hops = if self.eg == Composition2Hop { 1 } else { 2 };
                let cols: Vec<usize> = d[..hops + 2].iter().map(|&i| self.all_cols[i]).collect();
                if !distinct(&cols) {
                    return None;
                }
                let row = d[hops + 2];
                plain(Query::Composition {
                    anchor: self.anchor(cols[0], row),
                    chain: cols[1..=hops].to_vec(),
                    target: cols[hops + 1],
                })
            }
            Conjunction => {
                let (target, c2, c3, row) = (d[0], d[1], d[2], d[3]);
                if !distinct(&[target, c2, c3]) || c2 > c3 {
                    return None;
                }
                plain(Query::Conjunction { first: self.anchor(c2, row), second: self.anchor(c3, row), target })
            }
            QuantifierOnly => {
                let (subject_col, cond, row_c, same, offset) = (d[0], d[1], d[2], d[3], d[4]);
                if subject_col == cond {
                    return None;
                }
                let row_s = if same == 1 { row_c } else { (row_c + 1 + offset) % t.n_rows() };
                plain(Query::Quantifier {
                    kind: Quantifier::Only,
                    subject_col,
                    subject: Some(t.cell(row_s, subject_col).raw.clone()),
                    condition: self.anchor(cond, row_c),
                })
            }
            QuantifierMost | QuantifierEvery => {
                let (subject_col, cond, row) = (d[0], d[1], d[2]);
                if subject_col == cond {
                    return None;
                }
                let (kind, op) =
                    if self.eg == QuantifierMost { (Quantifier::Most, "most") } else { (Quantifier::Every, "every") };
                with_op(Query::Quantifier { kind, subject_col, subject: None, condition: self.anchor(cond, row) }, op)
            }
            NumberComparison | NumberBooleanComparison => {
                let (ac, vc, ra, rb, op) =
                    (self.anchor_cols[d[0]], self.number_cols[d[1]], d[2], d[3], ["higher", "lower"][d[4]]);
                let boolean = self.eg == NumberBooleanComparison;
                if ac == vc || ra == rb || (!boolean && ra > rb) {
                    return None;
                }
                with_op(
                    Query::Comparison {
                        family: Family::Number,
                        boolean,
                        direction: operator_direction(op)?,
                        left: self.anchor(ac, ra),
                        right: self.anchor(ac, rb),
                        value_col: vc,
                    },
                    op,
                )
            }
            TemporalComparison | TemporalBooleanComparison => {
                let boolean = self.eg == TemporalBooleanComparison;
                let ops: [&str; 2] =
                    if boolean { ["more recently than when", "earlier than when"] } else { ["earlier", "later"] };
                let (ca, cb, dc, ra, rb, op) =
                    (self.anchor_cols[d[0]], self.anchor_cols[d[1]], self.date_cols[d[2]], d[3], d[4], ops[d[5]]);
                if ra == rb || (!boolean && ra > rb) {
                    return None;
                }
                with_op(
                    Query::Comparison {
                        family: Family::Temporal,
                        boolean,
                        direction: operator_direction(op)?,
                        left: self.anchor(ca, ra),
                        right: self.anchor(cb, rb),
                        value_col: dc,
                    },
                    op,
                )
            }
            NumberSuperlative | TemporalSuperlative => {
                let (family, value_col, ops) = if self.eg == NumberSuperlative {
                    (SuperlativeFamily::Number, self.number_cols[d[1]], ["highest", "lowest"])
                } else {
                    (SuperlativeFamily::Temporal, self.date_cols[d[1]], ["earliest", "latest"])
                };
                let target = d[0];
                if target == value_col {
                    return None;
                }
                let op = ops[d[2]];
                with_op(
                    Query::Superlative { family, direction: operator_direction(op)?, target, value_col, filter: None },
                    op,
                )
            }
            ArithmeticSuperlative => {
                let (value_col, filter_col, row) = (self.typed_cols[d[0]], d[1], d[2]);
                if value_col == filter_col {
                    return None;
                }
                let ops = if t.column(value_col).ty == SemanticType::Number {
                    ["highest", "lowest"]
                } else {
                    ["earliest", "latest"]
                };
                let op = ops[d[3]];
                with_op(
                    Query::Superlative {
                        family: SuperlativeFamily::Arithmetic,
                        direction: operator_direction(op)?,
                        target: value_col,
                        value_col,
                        filter: Some(self.anchor(filter_col, row)),
                    },
                    op,
                )
            }
            ArithmeticAddition | Counting => {
                let target = if self.eg == ArithmeticAddition { self.number_cols[d[0]] } else { d[0] };
                let (filter_col, row) = (d[1], d[2]);
                if target == filter_col {
                    return None;
                }
                let filter = self.anchor(filter_col, row);
                plain(if self.eg == Counting {
                    Query::Counting { target, filter }
                } else {
                    Query::Addition { target, filter }
                })
            }
            DateDifference => {
                let (ca, cb, dc, ra, rb) =
                    (self.anchor_cols[d[0]], self.anchor_cols[d[1]], self.date_cols[d[2]], d[3], d[4]);
                if ra >= rb {
                    return None;
                }
                plain(Query::DateDifference { left: self.anchor(ca, ra), right: self.anchor(cb, rb), date_col: dc })
            }
        }
    }
}
