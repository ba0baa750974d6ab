use std::collections::BTreeSet;

use crate::table::TypedTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FactKind {
    Gold,
    Distractor,
}

/// The structured content of a fact: the subject column's values in the
/// rows where every condition column holds its value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Statement {
    pub subject: String,
    pub conditions: Vec<(String, String)>,
    pub values: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fact {
    pub text: String,
    pub kind: FactKind,
    /// (row, column) cells the fact verbalizes.
    pub cells: BTreeSet<(usize, usize)>,
    pub statement: Statement,
}

/// Which cells to verbalize: the subject column over `rows`, keyed by the
/// values the key columns share on those rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactPlan {
    pub subject: usize,
    pub keys: Vec<usize>,
    pub rows: Vec<usize>,
}

impl FactPlan {
    pub fn single(subject: usize, key: usize, rows: Vec<usize>) -> Self {
        Self { subject, keys: vec![key], rows }
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .flat_map(move |&r| std::iter::once(self.subject).chain(self.keys.iter().copied()).map(move |c| (r, c)))
    }

    /// True when every referenced cell is non-blank and each key column
    /// holds one value across the rows.
    pub fn is_renderable(&self, table: &TypedTable) -> bool {
        let Some(&first) = self.rows.first() else { return false };
        self.cells().all(|(r, c)| !table.cell(r, c).is_blank())
            && self.keys.iter().all(|&k| self.rows.iter().all(|&r| table.cell(r, k).raw == table.cell(first, k).raw))
    }
}

const IRREGULAR_PLURALS: &[(&str, &str)] = &[
    ("person", "people"),
    ("man", "men"),
    ("woman", "women"),
    ("child", "children"),
    ("foot", "feet"),
    ("tooth", "teeth"),
    ("mouse", "mice"),
    ("goose", "geese"),
    ("criterion", "criteria"),
    ("phenomenon", "phenomena"),
    ("datum", "data"),
    ("series", "series"),
    ("species", "species"),
    ("aircraft", "aircraft"),
    ("sheep", "sheep"),
    ("fish", "fish"),
    ("info", "info"),
    ("notes", "notes"),
];

/// Pluralizes the last word of a phrase.
pub fn pluralize(phrase: &str) -> String {
    let (head, last) = match phrase.rfind(' ') {
        Some(i) => (&phrase[..=i], &phrase[i + 1..]),
        None => ("", phrase),
    };
    let lower = last.to_lowercase();
    let plural = if let Some((_, p)) = IRREGULAR_PLURALS.iter().find(|(s, _)| *s == lower) {
        p.to_string()
    } else if ["s", "x", "z", "ch", "sh"].iter().any(|e| lower.ends_with(e)) {
        format!("{last}es")
    } else if lower.ends_with('y')
        && lower.len() > 1
        && !matches!(lower.as_bytes()[lower.len() - 2], b'a' | b'e' | b'i' | b'o' | b'u')
    {
        format!("{}ies", &last[..last.len() - 1])
    } else {
        format!("{last}s")
    };
    format!("{head}{plural}")
}

fn join_values(values: &[String]) -> String {
    match values {
        [] => String::new(),
        [one] => one.clone(),
        [init @ .., last] => format!("{} and {}", init.join(", "), last),
    }
}

/// Renders `The X when the Y was v was x`, pluralized as
/// `The xs when the y was v were x1 and x2` when the key covers several rows.
pub fn render_statement(statement: &Statement) -> String {
    let plural = statement.values.len() > 1;
    let name = |n: &str| if plural { n.to_lowercase() } else { n.to_string() };
    let subject = if plural { pluralize(&name(&statement.subject)) } else { name(&statement.subject) };
    let conditions = statement
        .conditions
        .iter()
        .map(|(col, val)| format!("the {} was {}", name(col), val))
        .collect::<Vec<_>>()
        .join(" and ");
    let verb = if plural { "were" } else { "was" };
    format!("The {subject} when {conditions} {verb} {}", join_values(&statement.values))
}

pub fn render_plan(table: &TypedTable, plan: &FactPlan, kind: FactKind) -> Fact {
    let first = plan.rows[0];
    let statement = Statement {
        subject: table.column(plan.subject).name.clone(),
        conditions: plan
            .keys
            .iter()
            .map(|&k| (table.column(k).name.clone(), table.cell(first, k).raw.clone()))
            .collect(),
        values: plan.rows.iter().map(|&r| table.cell(r, plan.subject).raw.clone()).collect(),
    };
    Fact { text: render_statement(&statement), kind, cells: plan.cells().collect(), statement }
}

/// Verbalizes the subject column on `key_rows`, keyed by `key_col`.
pub fn render_fact(table: &TypedTable, subject_col: usize, key_col: usize, key_rows: &[usize]) -> Fact {
    render_plan(table, &FactPlan::single(subject_col, key_col, key_rows.to_vec()), FactKind::Gold)
}
