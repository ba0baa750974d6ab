//! Newline-delimited checkpoint feeds and distribution traces.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{on_checkpoint, AccuracyHistory, SamplerConfig, TaskDistribution};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRecord {
    pub checkpoint: usize,
    pub task: String,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionRecord {
    pub checkpoint: usize,
    pub task: String,
    pub probability: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum FeedError {
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Sampler(#[from] super::SamplerError),
    #[error("checkpoint {0} does not report every task")]
    Incomplete(usize),
}

/// Reads a checkpoint feed into a history. Tasks take the order in which
/// they first appear; checkpoints are sorted by index.
pub fn read_checkpoint_feed<R: BufRead>(reader: R) -> Result<(Vec<usize>, AccuracyHistory), FeedError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: CheckpointRecord =
            serde_json::from_str(&line).map_err(|source| FeedError::Json { line: i + 1, source })?;
        records.push(rec);
    }
    let mut tasks: Vec<String> = Vec::new();
    for r in &records {
        if !tasks.contains(&r.task) {
            tasks.push(r.task.clone());
        }
    }
    let mut checkpoints: Vec<usize> = records.iter().map(|r| r.checkpoint).collect();
    checkpoints.sort_unstable();
    checkpoints.dedup();

    let mut history = AccuracyHistory::new(tasks.clone());
    for &cp in &checkpoints {
        let mut row = vec![f64::NAN; tasks.len()];
        for r in records.iter().filter(|r| r.checkpoint == cp) {
            let t = tasks.iter().position(|t| *t == r.task).expect("task collected above");
            row[t] = r.accuracy;
        }
        if row.iter().any(|a| a.is_nan()) {
            return Err(FeedError::Incomplete(cp));
        }
        history.push(&row)?;
    }
    Ok((checkpoints, history))
}

/// Replays a history through the sampler, one distribution per checkpoint.
pub fn replay(history: &AccuracyHistory, config: &SamplerConfig) -> Vec<TaskDistribution> {
    let mut partial = AccuracyHistory::new(history.tasks().to_vec());
    (0..history.len())
        .map(|i| {
            let row: Vec<f64> = (0..history.tasks().len()).map(|s| history.series(s)[i]).collect();
            partial.push(&row).expect("history already validated");
            on_checkpoint(&partial, config)
        })
        .collect()
}

pub fn write_distribution<W: Write>(out: &mut W, checkpoint: usize, dist: &TaskDistribution) -> std::io::Result<()> {
    for (task, &probability) in dist.tasks().iter().zip(dist.probs()) {
        let rec = DistributionRecord { checkpoint, task: task.clone(), probability };
        serde_json::to_writer(&mut *out, &rec)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
