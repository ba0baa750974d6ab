//! Question templates with typed slots.
//!
//! Slots are written `{name}`. `{col:i}` names a column, `{val:i}` (or
//! `{val:i'}` for a second value) a cell drawn from column `i`, `{op}` an
//! operator surface form, plus `{table-title}` and `{page-title}`.
//! Columns the question needs but does not mention are bound without
//! appearing in the pattern.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{EgKind, Query};
use crate::table::{CellValue, TypedTable};

#[derive(Debug, PartialEq, Eq)]
pub struct Template {
    pub eg: EgKind,
    pub id: &'static str,
    pub pattern: &'static str,
    pub operators: &'static [&'static str],
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template {0}: unterminated slot")]
    Unterminated(&'static str),
    #[error("template {0}: unknown slot {1:?}")]
    UnknownSlot(&'static str, String),
    #[error("template {0}: operator slot and operator set disagree")]
    OperatorMismatch(&'static str),
    #[error("slot {0:?} left unfilled")]
    Unfilled(String),
    #[error("value slot {0:?} is not drawn from its column slot")]
    ColumnMismatch(String),
    #[error("operator {0:?} not offered by the template")]
    UnknownOperator(String),
}

/// Kinds of slot a pattern may contain.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Slot {
    Column(String),
    Value(String),
    Operator,
    TableTitle,
    PageTitle,
}

fn classify(name: &str) -> Option<Slot> {
    let index_ok = |i: &str| {
        let digits = i.trim_end_matches('\'');
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    match name {
        "op" => Some(Slot::Operator),
        "table-title" => Some(Slot::TableTitle),
        "page-title" => Some(Slot::PageTitle),
        _ => {
            if let Some(i) = name.strip_prefix("col:") {
                (index_ok(i) && !i.ends_with('\'')).then(|| Slot::Column(i.to_string()))
            } else if let Some(i) = name.strip_prefix("val:") {
                index_ok(i).then(|| Slot::Value(i.to_string()))
            } else {
                None
            }
        }
    }
}

/// Column index a value slot belongs to: `val:1'` belongs to `col:1`.
fn column_slot_of(value_slot: &str) -> String {
    let i = value_slot.trim_start_matches("val:").trim_end_matches('\'');
    format!("col:{i}")
}

impl Template {
    fn slots(&self) -> Result<Vec<(String, Slot)>, TemplateError> {
        let mut out = Vec::new();
        let mut rest = self.pattern;
        while let Some(start) = rest.find('{') {
            let after = &rest[start + 1..];
            let end = after.find('}').ok_or(TemplateError::Unterminated(self.id))?;
            let name = &after[..end];
            let slot = classify(name).ok_or_else(|| TemplateError::UnknownSlot(self.id, name.to_string()))?;
            out.push((name.to_string(), slot));
            rest = &after[end + 1..];
        }
        Ok(out)
    }

    /// Checks slot syntax and that `{op}` appears iff operators exist.
    pub fn validate(&self) -> Result<(), TemplateError> {
        let slots = self.slots()?;
        let has_op = slots.iter().any(|(_, s)| *s == Slot::Operator);
        if has_op != !self.operators.is_empty() {
            return Err(TemplateError::OperatorMismatch(self.id));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    Column { col: usize },
    Cell { col: usize, row: usize, value: CellValue },
    Operator(String),
}

/// A template with every slot bound, plus the semantic query it denotes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instantiation {
    pub template: &'static Template,
    pub bindings: BTreeMap<String, Binding>,
    pub question: String,
    pub query: Query,
}

impl Instantiation {
    /// Binds and renders. Fails if a pattern slot has no binding, if a
    /// value is not drawn from its indexed column, or if the operator is
    /// not one the template offers.
    pub fn new(
        template: &'static Template,
        table: &TypedTable,
        bindings: BTreeMap<String, Binding>,
        query: Query,
    ) -> Result<Self, TemplateError> {
        for (name, binding) in &bindings {
            match binding {
                Binding::Cell { col, .. } => {
                    let col_slot = column_slot_of(name);
                    match bindings.get(&col_slot) {
                        Some(Binding::Column { col: c }) if c == col => {}
                        _ => return Err(TemplateError::ColumnMismatch(name.clone())),
                    }
                }
                Binding::Operator(op) if !template.operators.contains(&op.as_str()) => {
                    return Err(TemplateError::UnknownOperator(op.clone()));
                }
                _ => {}
            }
        }

        let mut question = String::with_capacity(template.pattern.len() + 64);
        let mut rest = template.pattern;
        while let Some(start) = rest.find('{') {
            question.push_str(&rest[..start]);
            let after = &rest[start + 1..];
            let end = after.find('}').ok_or(TemplateError::Unterminated(template.id))?;
            let name = &after[..end];
            let text = match (classify(name), bindings.get(name)) {
                (Some(Slot::TableTitle), _) => table.meta.table_title.clone(),
                (Some(Slot::PageTitle), _) => table.meta.page_title.clone(),
                (Some(Slot::Column(_)), Some(Binding::Column { col })) => table.column(*col).name.clone(),
                (Some(Slot::Value(_)), Some(Binding::Cell { value, .. })) => value.raw.clone(),
                (Some(Slot::Operator), Some(Binding::Operator(op))) => op.clone(),
                _ => return Err(TemplateError::Unfilled(name.to_string())),
            };
            question.push_str(&text);
            rest = &after[end + 1..];
        }
        question.push_str(rest);

        Ok(Self { template, bindings, question, query })
    }

    /// Stable textual form of the bindings, used for example ids.
    pub fn canonical_bindings(&self) -> String {
        let mut s = String::new();
        for (name, b) in &self.bindings {
            match b {
                Binding::Column { col } => write!(s, "{name}=c{col};"),
                Binding::Cell { col, row, value } => write!(s, "{name}=c{col}r{row}:{};", value.raw),
                Binding::Operator(op) => write!(s, "{name}={op};"),
            }
            .expect("write to string");
        }
        s
    }
}

macro_rules! template {
    ($eg:ident, $id:literal, $pattern:literal, [$($op:literal),*]) => {
        Template { eg: EgKind::$eg, id: $id, pattern: $pattern, operators: &[$($op),*] }
    };
}

pub static TEMPLATES: &[Template] = &[
    template!(Composition2Hop, "composition-2hop.what-was",
        "What was the {col:1}(s) when the {col:2} was {val:2} in {table-title} of {page-title}?", []),
    template!(Composition3Hop, "composition-3hop.what-was",
        "What was the {col:1}(s) when the {col:2} was {val:2} in {table-title} of {page-title}?", []),
    template!(Conjunction, "conjunction.what-was",
        "What was the {col:1} when the {col:2} was {val:2} and the {col:3} was {val:3} in {table-title} of {page-title}?", []),
    template!(QuantifierOnly, "quantifier-only.is-only",
        "Is {val:1} the only {col:1} that has {col:2} {val:2} in {table-title} of {page-title}?", []),
    template!(QuantifierMost, "quantifier-most.does",
        "In {table-title} of {page-title}, does {op} {col:1} have {col:2} {val:2}?", ["most"]),
    template!(QuantifierEvery, "quantifier-every.does",
        "In {table-title} of {page-title}, does {op} {col:1} have {col:2} {val:2}?", ["every"]),
    template!(NumberComparison, "number-comparison.which-had",
        "In {table-title} of {page-title}, which {col:1} had a {op} {col:2}: {val:1} or {val:1'}?", ["higher", "lower"]),
    template!(TemporalComparison, "temporal-comparison.what-happened",
        "In {table-title} of {page-title}, what happened {op}: the {col:1} was {val:1} or the {col:2} was {val:2}?",
        ["earlier", "later"]),
    template!(NumberBooleanComparison, "number-boolean-comparison.did-have",
        "In {table-title} of {page-title}, did {val:1} have a {op} {col:2} than {val:1'}?", ["higher", "lower"]),
    template!(TemporalBooleanComparison, "temporal-boolean-comparison.was",
        "The {col:1} was {val:1} {op} the {col:2} was {val:2} in {table-title} of {page-title}?",
        ["more recently than when", "earlier than when"]),
    template!(NumberSuperlative, "number-superlative.in-which",
        "In {table-title} of {page-title}, which {col:1} has the {op} {col:2}?", ["highest", "lowest"]),
    template!(NumberSuperlative, "number-superlative.which-in",
        "Which {col:1} has the {op} {col:2} in {table-title} of {page-title}?", ["highest", "lowest"]),
    template!(TemporalSuperlative, "temporal-superlative.in-which",
        "In {table-title} of {page-title}, which {col:1} has the {op} {col:2}?", ["earliest", "latest"]),
    template!(TemporalSuperlative, "temporal-superlative.which-in",
        "Which {col:1} has the {op} {col:2} in {table-title} of {page-title}?", ["earliest", "latest"]),
    template!(ArithmeticSuperlative, "arithmetic-superlative.what-was",
        "In {table-title} of {page-title}, what was the {op} {col:1} when the {col:2} was {val:2}?",
        ["highest", "lowest", "earliest", "latest"]),
    template!(ArithmeticAddition, "arithmetic-addition.total",
        "In {table-title} of {page-title}, what was the total number of {col:1} when the {col:2} was {val:2}?", []),
    template!(Counting, "counting.how-many",
        "How many {col:1} have {col:2} {val:2} in {table-title} of {page-title}?", []),
    template!(DateDifference, "date-difference.how-much-time",
        "In {table-title} of {page-title}, how much time had passed between when the {col:1} was {val:1} and when the {col:2} was {val:2}?",
        []),
];

pub fn templates_for(eg: EgKind) -> impl Iterator<Item = &'static Template> {
    TEMPLATES.iter().filter(move |t| t.eg == eg)
}

pub fn template_by_id(id: &str) -> Option<&'static Template> {
    TEMPLATES.iter().find(|t| t.id == id)
}
