//! Example generators: templates, sampling and programmatic answers for
//! the sixteen reasoning skills.

mod answer;
mod generate;
mod kind;
pub mod template;

pub use answer::{
    answer_comparison, answer_composition, answer_conjunction, answer_counting, answer_addition,
    answer_date_difference, answer_quantifier, answer_superlative, evaluate, Anchor, Answer, AnswerError,
    AnswerKind, Direction, Family, Quantifier, Query, SuperlativeFamily,
};
pub use generate::{generate, generate_capped, instantiate, operator_direction, Generated, PER_TABLE_CAP};
pub use kind::{EgKind, UnknownEg};
pub use template::{Binding, Instantiation, Template, TemplateError, TEMPLATES};
