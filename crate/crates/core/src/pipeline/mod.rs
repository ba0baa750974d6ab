//! Corpus generation over newline-delimited table dumps, corpus
//! statistics, and synthetic tables for tests and benches.

mod stats;
pub mod synth;

pub use stats::{AnswerCategory, CorpusStats, Welford};

use std::collections::HashSet;
use std::io::{BufRead, Write};

use anyhow::Context as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::context::{build_context_pooled, Context, ContextConfig, DistractorPool};
use crate::eg::{generate_capped, Answer, EgKind, Generated, PER_TABLE_CAP};
use crate::par;
use crate::table::{ingest, RawTable, ShapeBounds, TypedTable};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Source {
    pub page_title: String,
    pub table_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

/// One question-context-answer triplet, serialized as a JSON line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExampleRecord {
    pub id: String,
    pub eg: EgKind,
    pub template_id: String,
    pub question: String,
    pub context: String,
    pub answer: Answer,
    pub gold_fact_count: usize,
    pub distractor_count: usize,
    pub source: Source,
}

fn digest(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

/// Per-(table, generator) seed; independent of processing order.
pub fn derive_seed(seed: u64, table_id: &str, eg: EgKind, purpose: &str) -> u64 {
    let d = digest(&[&seed.to_le_bytes(), table_id.as_bytes(), eg.name().as_bytes(), purpose.as_bytes()]);
    u64::from_le_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

pub fn example_id(table_id: &str, eg: EgKind, canonical_bindings: &str) -> String {
    let d = digest(&[table_id.as_bytes(), eg.name().as_bytes(), canonical_bindings.as_bytes()]);
    d[..16].iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub seed: u64,
    pub egs: Vec<EgKind>,
    pub per_table_cap: usize,
    pub bounds: ShapeBounds,
    pub context: ContextConfig,
    /// Input lines processed together; bounds memory use.
    pub chunk_size: usize,
}

impl Default for GenerateOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            egs: EgKind::ALL.to_vec(),
            per_table_cap: PER_TABLE_CAP,
            bounds: ShapeBounds::default(),
            context: ContextConfig::default(),
            chunk_size: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reject {
    pub line: usize,
    pub table_id: Option<String>,
    pub reason: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenerateSummary {
    pub lines: usize,
    pub tables_accepted: usize,
    pub rejected: usize,
    pub examples: usize,
    pub duplicates_dropped: usize,
    /// Largest number of records held in memory at once.
    pub peak_buffered_records: usize,
}

/// Builds the records for one accepted table, in generator order.
pub fn examples_for_table(table: &TypedTable, opts: &GenerateOptions) -> Vec<ExampleRecord> {
    let pool = DistractorPool::new(table);
    let mut out = Vec::new();
    for &eg in &opts.egs {
        let seed = derive_seed(opts.seed, &table.meta.id, eg, "generate");
        for g in generate_capped(table, eg, seed, opts.per_table_cap) {
            out.push(to_record(table, &pool, eg, &g, opts));
        }
    }
    out
}

/// The example id and the context the record for `g` is built from.
pub fn example_context(
    table: &TypedTable,
    pool: &DistractorPool,
    eg: EgKind,
    g: &Generated,
    opts: &GenerateOptions,
) -> (String, Context) {
    let id = example_id(&table.meta.id, eg, &g.instantiation.canonical_bindings());
    let ctx_seed = derive_seed(opts.seed, &table.meta.id, eg, &id);
    let ctx = build_context_pooled(table, pool, &g.gold, &opts.context, ctx_seed);
    (id, ctx)
}

pub fn to_record(
    table: &TypedTable,
    pool: &DistractorPool,
    eg: EgKind,
    g: &Generated,
    opts: &GenerateOptions,
) -> ExampleRecord {
    let (id, ctx) = example_context(table, pool, eg, g, opts);
    ExampleRecord {
        id,
        eg,
        template_id: g.instantiation.template.id.to_string(),
        question: g.instantiation.question.clone(),
        gold_fact_count: ctx.gold_count(),
        distractor_count: ctx.distractor_count(),
        context: ctx.rendered,
        answer: g.answer.clone(),
        source: Source {
            page_title: table.meta.page_title.clone(),
            table_id: table.meta.id.clone(),
            category: table.meta.category.clone(),
        },
    }
}

enum LineOutcome {
    Blank,
    Rejected(Reject),
    Accepted { line: usize, table_id: String, records: Vec<ExampleRecord> },
}

fn process_line(line_no: usize, line: &str, opts: &GenerateOptions) -> LineOutcome {
    if line.trim().is_empty() {
        return LineOutcome::Blank;
    }
    let raw: RawTable = match serde_json::from_str(line) {
        Ok(raw) => raw,
        Err(e) => {
            return LineOutcome::Rejected(Reject {
                line: line_no,
                table_id: None,
                reason: "malformed".into(),
                detail: e.to_string(),
            })
        }
    };
    let id = raw.id.clone();
    match ingest(raw, &opts.bounds) {
        Ok(table) => LineOutcome::Accepted { line: line_no, table_id: id, records: examples_for_table(&table, opts) },
        Err(e) => LineOutcome::Rejected(Reject {
            line: line_no,
            table_id: Some(id),
            reason: e.code().into(),
            detail: e.to_string(),
        }),
    }
}

/// Streams tables from `input` to example lines on `output`.
///
/// Tables are processed chunk by chunk, in parallel within a chunk, and
/// written in input order, so the output bytes depend only on the input
/// and the options. Rejected lines go to `rejects` and never abort the run.
pub fn generate_stream<R: BufRead, W: Write>(
    input: R,
    mut output: W,
    mut rejects: Option<&mut dyn Write>,
    opts: &GenerateOptions,
) -> anyhow::Result<GenerateSummary> {
    let mut summary = GenerateSummary::default();
    let mut seen_tables: HashSet<String> = HashSet::new();
    let mut lines = input.lines().enumerate();
    let chunk_size = opts.chunk_size.max(1);
    loop {
        let mut chunk = Vec::with_capacity(chunk_size);
        for (i, line) in lines.by_ref().take(chunk_size) {
            chunk.push((i + 1, line.with_context(|| format!("reading input line {}", i + 1))?));
        }
        if chunk.is_empty() {
            break;
        }
        summary.lines += chunk.len();
        let outcomes = par::map_ordered(chunk, |(n, line)| process_line(n, &line, opts));
        let buffered: usize = outcomes
            .iter()
            .map(|o| if let LineOutcome::Accepted { records, .. } = o { records.len() } else { 0 })
            .sum();
        summary.peak_buffered_records = summary.peak_buffered_records.max(buffered);

        for outcome in outcomes {
            let reject = match outcome {
                LineOutcome::Blank => None,
                LineOutcome::Rejected(r) => Some(r),
                LineOutcome::Accepted { line, table_id, records } => {
                    if seen_tables.insert(table_id.clone()) {
                        summary.tables_accepted += 1;
                        // ids embed the table id, so collisions can only occur within a table
                        let mut ids = HashSet::new();
                        for rec in records {
                            if !ids.insert(rec.id.clone()) {
                                summary.duplicates_dropped += 1;
                                continue;
                            }
                            serde_json::to_writer(&mut output, &rec)?;
                            output.write_all(b"\n")?;
                            summary.examples += 1;
                        }
                        None
                    } else {
                        Some(Reject {
                            line,
                            table_id: Some(table_id),
                            reason: "duplicate_table_id".into(),
                            detail: "table id already seen".into(),
                        })
                    }
                }
            };
            if let Some(r) = reject {
                summary.rejected += 1;
                log::debug!("rejected {:?}: {}", r.table_id, r.detail);
                if let Some(w) = rejects.as_mut() {
                    serde_json::to_writer(&mut **w, &r)?;
                    w.write_all(b"\n")?;
                }
            }
        }
    }
    output.flush()?;
    Ok(summary)
}
