//! Pseudo-language contexts: gold facts that answer the question, mixed
//! with distractor facts drawn from cells the question does not touch.

mod fact;

pub use fact::{pluralize, render_fact, render_plan, render_statement, Fact, FactKind, FactPlan, Statement};

use std::collections::{BTreeSet, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::eg::{Anchor, Query};
use crate::table::TypedTable;

/// The cells an example depends on and the facts that verbalize them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldSpec {
    pub cells: BTreeSet<(usize, usize)>,
    pub facts_plan: Vec<FactPlan>,
}

impl GoldSpec {
    fn from_plans(table: &TypedTable, plans: Vec<FactPlan>) -> Option<Self> {
        let mut seen = HashSet::new();
        let plans: Vec<FactPlan> = plans.into_iter().filter(|p| seen.insert(p.clone())).collect();
        if plans.is_empty() || !plans.iter().all(|p| p.is_renderable(table)) {
            return None;
        }
        let cells = plans.iter().flat_map(|p| p.cells()).collect();
        Some(Self { cells, facts_plan: plans })
    }
}

fn distinct_values(table: &TypedTable, col: usize, rows: impl IntoIterator<Item = usize>) -> Vec<String> {
    let mut seen = HashSet::new();
    rows.into_iter()
        .map(|r| table.cell(r, col).raw.clone())
        .filter(|v| seen.insert(v.clone()))
        .collect()
}

fn lookup(table: &TypedTable, subject: usize, anchor: &Anchor) -> FactPlan {
    FactPlan::single(subject, anchor.col, table.rows_where(anchor.col, &anchor.value))
}

/// One fact per distinct value of `key`, covering every row.
fn scan(table: &TypedTable, subject: usize, key: usize) -> Vec<FactPlan> {
    distinct_values(table, key, 0..table.n_rows())
        .into_iter()
        .map(|v| FactPlan::single(subject, key, table.rows_where(key, &v)))
        .collect()
}

/// Plans the gold facts for a query whose answer has already been
/// computed. `None` when a needed cell cannot be verbalized.
pub fn plan_gold(table: &TypedTable, query: &Query) -> Option<GoldSpec> {
    let plans = match query {
        Query::Composition { anchor, chain, target } => {
            let rows = table.rows_where(anchor.col, &anchor.value);
            let mut path = vec![anchor.col];
            path.extend_from_slice(chain);
            path.push(*target);
            let mut plans = vec![FactPlan::single(path[1], path[0], rows.clone())];
            for hop in path.windows(2).skip(1) {
                plans.extend(rows.iter().map(|&r| FactPlan::single(hop[1], hop[0], vec![r])));
            }
            plans
        }
        Query::Conjunction { first, second, target } => {
            let a = table.rows_where(first.col, &first.value);
            let b = table.rows_where(second.col, &second.value);
            let b_set: HashSet<usize> = b.iter().copied().collect();
            let both: Vec<usize> = a.iter().copied().filter(|r| b_set.contains(r)).collect();
            let truth = distinct_values(table, *target, both.iter().copied());
            let b_values: HashSet<String> = distinct_values(table, *target, b.iter().copied()).into_iter().collect();
            let via_single: Vec<String> =
                distinct_values(table, *target, a.iter().copied()).into_iter().filter(|v| b_values.contains(v)).collect();
            if via_single == truth {
                vec![FactPlan::single(*target, first.col, a), FactPlan::single(*target, second.col, b)]
            } else {
                // single-key facts would suggest a wrong intersection
                vec![FactPlan { subject: *target, keys: vec![first.col, second.col], rows: both }]
            }
        }
        Query::Quantifier { subject: Some(_), subject_col, condition, .. } => {
            vec![lookup(table, *subject_col, condition)]
        }
        Query::Quantifier { subject: None, subject_col, condition, .. } => scan(table, condition.col, *subject_col),
        Query::Comparison { left, right, value_col, .. } | Query::DateDifference { left, right, date_col: value_col } => {
            vec![lookup(table, *value_col, left), lookup(table, *value_col, right)]
        }
        Query::Superlative { value_col, filter: Some(filter), .. } => vec![lookup(table, *value_col, filter)],
        Query::Superlative { target, value_col, filter: None, .. } => scan(table, *value_col, *target),
        Query::Addition { target, filter } | Query::Counting { target, filter } => vec![lookup(table, *target, filter)],
    };
    GoldSpec::from_plans(table, plans)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContextConfig {
    pub min_distractors: usize,
    pub max_distractors: usize,
    /// Distractors stop once the context would exceed this many words.
    /// Gold facts are always kept. `0` disables the cap.
    pub word_cap: usize,
}

impl Default for ContextConfig {
    fn default() -> Self {
        Self { min_distractors: 2, max_distractors: 8, word_cap: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub prefix: String,
    pub facts: Vec<Fact>,
    pub rendered: String,
    pub requested_distractors: usize,
}

impl Context {
    pub fn gold_count(&self) -> usize {
        self.facts.iter().filter(|f| f.kind == FactKind::Gold).count()
    }

    pub fn distractor_count(&self) -> usize {
        self.facts.iter().filter(|f| f.kind == FactKind::Distractor).count()
    }
}

pub fn context_prefix(table: &TypedTable) -> String {
    format!("In {} of {}: ", table.meta.table_title, table.meta.page_title)
}

pub fn render_context(prefix: &str, facts: &[Fact]) -> String {
    let body: Vec<&str> = facts.iter().map(|f| f.text.as_str()).collect();
    format!("{prefix}{}.", body.join(". "))
}

fn word_count(s: &str) -> usize {
    s.split_whitespace().count()
}

/// Every single-key fact a table can verbalize, rendered once per table
/// and filtered per example.
#[derive(Debug, Clone)]
pub struct DistractorPool {
    candidates: Vec<(FactPlan, Fact)>,
    words: Vec<usize>,
}

impl DistractorPool {
    pub fn new(table: &TypedTable) -> Self {
        let mut candidates = Vec::new();
        for key in 0..table.n_cols() {
            let groups: Vec<Vec<usize>> = distinct_values(table, key, 0..table.n_rows())
                .into_iter()
                .filter(|v| !v.is_empty())
                .map(|v| table.rows_where(key, &v))
                .collect();
            for subject in (0..table.n_cols()).filter(|&s| s != key) {
                for rows in &groups {
                    let plan = FactPlan::single(subject, key, rows.clone());
                    if plan.is_renderable(table) {
                        let fact = render_plan(table, &plan, FactKind::Distractor);
                        candidates.push((plan, fact));
                    }
                }
            }
        }
        let words = candidates.iter().map(|(_, f)| word_count(&f.text)).collect();
        Self { candidates, words }
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Candidate indices in preference order: same column pair as a gold
    /// fact first, then facts on rows the gold facts touch, then the rest.
    /// None of them verbalizes a gold cell.
    fn tiers(&self, table: &TypedTable, gold: &GoldSpec) -> [Vec<usize>; 3] {
        let n_cols = table.n_cols();
        let mut gold_cell = vec![false; table.n_rows() * n_cols];
        let mut gold_row = vec![false; table.n_rows()];
        for &(r, c) in &gold.cells {
            gold_cell[r * n_cols + c] = true;
            gold_row[r] = true;
        }
        let mut gold_pair = vec![false; n_cols * n_cols];
        for p in gold.facts_plan.iter().filter(|p| p.keys.len() == 1) {
            gold_pair[p.subject * n_cols + p.keys[0]] = true;
        }
        let mut tiers: [Vec<usize>; 3] = Default::default();
        for (i, (plan, _)) in self.candidates.iter().enumerate() {
            if plan.cells().any(|(r, c)| gold_cell[r * n_cols + c]) {
                continue;
            }
            let tier = if gold_pair[plan.subject * n_cols + plan.keys[0]] {
                0
            } else if plan.rows.iter().any(|&r| gold_row[r]) {
                1
            } else {
                2
            };
            tiers[tier].push(i);
        }
        tiers
    }
}

/// Assembles the shuffled context for one example.
///
/// Tables too small to supply the requested distractors yield fewer.
pub fn build_context(table: &TypedTable, gold: &GoldSpec, config: &ContextConfig, seed: u64) -> Context {
    build_context_pooled(table, &DistractorPool::new(table), gold, config, seed)
}

/// [`build_context`] with a pool shared across the examples of one table.
pub fn build_context_pooled(
    table: &TypedTable,
    pool: &DistractorPool,
    gold: &GoldSpec,
    config: &ContextConfig,
    seed: u64,
) -> Context {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prefix = context_prefix(table);
    let mut facts: Vec<Fact> = gold.facts_plan.iter().map(|p| render_plan(table, p, FactKind::Gold)).collect();

    let requested = if config.max_distractors >= config.min_distractors {
        rng.gen_range(config.min_distractors..=config.max_distractors)
    } else {
        config.min_distractors
    };
    let mut words = word_count(&prefix) + facts.iter().map(|f| word_count(&f.text)).sum::<usize>();
    let mut added = 0;
    'tiers: for mut tier in pool.tiers(table, gold) {
        tier.shuffle(&mut rng);
        for i in tier {
            if added == requested {
                break 'tiers;
            }
            let w = pool.words[i];
            if config.word_cap > 0 && words + w > config.word_cap {
                continue;
            }
            words += w;
            added += 1;
            facts.push(pool.candidates[i].1.clone());
        }
    }

    facts.shuffle(&mut rng);
    let rendered = render_context(&prefix, &facts);
    Context { prefix, facts, rendered, requested_distractors: requested }
}
