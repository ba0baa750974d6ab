use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AnswerKind;

/// The sixteen reasoning skills. Variant names are written verbatim into
/// corpus metadata and must not change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EgKind {
    Composition2Hop,
    Composition3Hop,
    Conjunction,
    QuantifierOnly,
    QuantifierMost,
    QuantifierEvery,
    NumberComparison,
    TemporalComparison,
    NumberBooleanComparison,
    TemporalBooleanComparison,
    NumberSuperlative,
    TemporalSuperlative,
    ArithmeticSuperlative,
    ArithmeticAddition,
    Counting,
    DateDifference,
}

impl EgKind {
    pub const ALL: [EgKind; 16] = [
        EgKind::Composition2Hop,
        EgKind::Composition3Hop,
        EgKind::Conjunction,
        EgKind::QuantifierOnly,
        EgKind::QuantifierMost,
        EgKind::QuantifierEvery,
        EgKind::NumberComparison,
        EgKind::TemporalComparison,
        EgKind::NumberBooleanComparison,
        EgKind::TemporalBooleanComparison,
        EgKind::NumberSuperlative,
        EgKind::TemporalSuperlative,
        EgKind::ArithmeticSuperlative,
        EgKind::ArithmeticAddition,
        EgKind::Counting,
        EgKind::DateDifference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EgKind::Composition2Hop => "Composition2Hop",
            EgKind::Composition3Hop => "Composition3Hop",
            EgKind::Conjunction => "Conjunction",
            EgKind::QuantifierOnly => "QuantifierOnly",
            EgKind::QuantifierMost => "QuantifierMost",
            EgKind::QuantifierEvery => "QuantifierEvery",
            EgKind::NumberComparison => "NumberComparison",
            EgKind::TemporalComparison => "TemporalComparison",
            EgKind::NumberBooleanComparison => "NumberBooleanComparison",
            EgKind::TemporalBooleanComparison => "TemporalBooleanComparison",
            EgKind::NumberSuperlative => "NumberSuperlative",
            EgKind::TemporalSuperlative => "TemporalSuperlative",
            EgKind::ArithmeticSuperlative => "ArithmeticSuperlative",
            EgKind::ArithmeticAddition => "ArithmeticAddition",
            EgKind::Counting => "Counting",
            EgKind::DateDifference => "DateDifference",
        }
    }

    /// Answer kinds this skill may emit. Arithmetic superlatives yield a
    /// number or a date depending on the column they range over.
    pub fn answer_kinds(self) -> &'static [AnswerKind] {
        use EgKind::*;
        match self {
            QuantifierOnly | QuantifierMost | QuantifierEvery | NumberBooleanComparison
            | TemporalBooleanComparison => &[AnswerKind::YesNo],
            Counting | ArithmeticAddition => &[AnswerKind::Number],
            ArithmeticSuperlative => &[AnswerKind::Number, AnswerKind::Date],
            DateDifference => &[AnswerKind::Duration],
            Composition2Hop | Composition3Hop | Conjunction | NumberComparison | TemporalComparison
            | NumberSuperlative | TemporalSuperlative => &[AnswerKind::SpanList],
        }
    }
}

impl fmt::Display for EgKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown example generator {0:?}")]
pub struct UnknownEg(pub String);

impl FromStr for EgKind {
    type Err = UnknownEg;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EgKind::ALL
            .iter()
            .copied()
            .find(|k| k.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownEg(s.to_string()))
    }
}
