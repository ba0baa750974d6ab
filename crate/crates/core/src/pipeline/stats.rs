use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::io::BufRead;

use crate::eg::{AnswerKind, EgKind};

use super::ExampleRecord;

/// Running mean and standard deviation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Welford {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population standard deviation; 0 for fewer than two samples.
    pub fn sd(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / self.count as f64).sqrt()
        }
    }
}

/// The four answer buckets the corpus is summarized by. Durations count
/// with dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AnswerCategory {
    Span,
    YesNo,
    Numeric,
    Date,
}

impl AnswerCategory {
    pub const ALL: [AnswerCategory; 4] =
        [AnswerCategory::Span, AnswerCategory::YesNo, AnswerCategory::Numeric, AnswerCategory::Date];

    pub fn of(kind: AnswerKind) -> Self {
        match kind {
            AnswerKind::SpanList => AnswerCategory::Span,
            AnswerKind::YesNo => AnswerCategory::YesNo,
            AnswerKind::Number => AnswerCategory::Numeric,
            AnswerKind::Date | AnswerKind::Duration => AnswerCategory::Date,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AnswerCategory::Span => "span",
            AnswerCategory::YesNo => "yes_no",
            AnswerCategory::Numeric => "numeric",
            AnswerCategory::Date => "date",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct CorpusStats {
    pub examples: u64,
    pub malformed_lines: u64,
    questions: HashSet<String>,
    tables: HashSet<String>,
    pages: HashSet<String>,
    words: HashSet<String>,
    pub question_words: Welford,
    pub context_words: Welford,
    pub gold_facts: Welford,
    pub distractor_facts: Welford,
    pub answer_categories: BTreeMap<AnswerCategory, u64>,
    pub per_eg: BTreeMap<EgKind, u64>,
    pub per_category: BTreeMap<String, u64>,
}

impl CorpusStats {
    /// Single pass over example lines; unparseable lines are counted.
    pub fn from_reader<R: BufRead>(reader: R) -> std::io::Result<Self> {
        let mut stats = Self::default();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<ExampleRecord>(&line) {
                Ok(rec) => stats.observe(&rec),
                Err(_) => stats.malformed_lines += 1,
            }
        }
        Ok(stats)
    }

    pub fn observe(&mut self, rec: &ExampleRecord) {
        self.examples += 1;
        self.questions.insert(rec.question.clone());
        self.tables.insert(rec.source.table_id.clone());
        self.pages.insert(rec.source.page_title.clone());
        let q: Vec<&str> = rec.question.split_whitespace().collect();
        let c: Vec<&str> = rec.context.split_whitespace().collect();
        for w in q.iter().chain(&c) {
            if !self.words.contains(*w) {
                self.words.insert(w.to_string());
            }
        }
        self.question_words.push(q.len() as f64);
        self.context_words.push(c.len() as f64);
        self.gold_facts.push(rec.gold_fact_count as f64);
        self.distractor_facts.push(rec.distractor_count as f64);
        *self.answer_categories.entry(AnswerCategory::of(rec.answer.kind)).or_default() += 1;
        *self.per_eg.entry(rec.eg).or_default() += 1;
        if let Some(cat) = &rec.source.category {
            *self.per_category.entry(cat.clone()).or_default() += 1;
        }
    }

    pub fn distinct_questions(&self) -> usize {
        self.questions.len()
    }

    pub fn distinct_tables(&self) -> usize {
        self.tables.len()
    }

    pub fn distinct_pages(&self) -> usize {
        self.pages.len()
    }

    pub fn distinct_words(&self) -> usize {
        self.words.len()
    }

    /// Share of examples in `cat`, in percent.
    pub fn percent(&self, cat: AnswerCategory) -> f64 {
        if self.examples == 0 {
            return 0.0;
        }
        100.0 * *self.answer_categories.get(&cat).unwrap_or(&0) as f64 / self.examples as f64
    }

    /// `key: value` lines in a fixed order.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let ms = |w: &Welford| format!("{:.2} ± {:.2}", w.mean(), w.sd());
        let _ = writeln!(s, "examples: {}", self.examples);
        let _ = writeln!(s, "distinct_questions: {}", self.distinct_questions());
        let _ = writeln!(s, "distinct_tables: {}", self.distinct_tables());
        let _ = writeln!(s, "distinct_pages: {}", self.distinct_pages());
        let _ = writeln!(s, "question_words: {}", ms(&self.question_words));
        let _ = writeln!(s, "context_words: {}", ms(&self.context_words));
        let _ = writeln!(s, "gold_facts: {}", ms(&self.gold_facts));
        let _ = writeln!(s, "distractor_facts: {}", ms(&self.distractor_facts));
        let _ = writeln!(s, "distinct_words: {}", self.distinct_words());
        for cat in AnswerCategory::ALL {
            let _ = writeln!(s, "answer_pct.{}: {:.1}", cat.name(), self.percent(cat));
        }
        for eg in EgKind::ALL {
            let _ = writeln!(s, "eg.{}: {}", eg.name(), self.per_eg.get(&eg).unwrap_or(&0));
        }
        for (cat, n) in &self.per_category {
            let _ = writeln!(s, "category.{cat}: {n}");
        }
        let _ = writeln!(s, "malformed_lines: {}", self.malformed_lines);
        s
    }
}
