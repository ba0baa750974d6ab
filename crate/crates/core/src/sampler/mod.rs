//! Task distributions for heterogeneous multi-task batches.
//!
//! Three strategies set the per-task share of each batch: uniform, error
//! sampling (share proportional to the gap between a task's ceiling and
//! its held-out accuracy) and momentum sampling (share proportional to how
//! much the accuracy moved across a sliding window of checkpoints).

mod batch;
pub mod io;

pub use batch::{compose_batch, compose_batch_seeded, BatchPlan, Slot};

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SamplerError {
    #[error("invalid sampler config: {0}")]
    InvalidConfig(String),
    #[error("accuracy history misaligned: {0}")]
    Misaligned(String),
    #[error("accuracy {0} outside [0, 1]")]
    AccuracyOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Uniform,
    Error,
    Momentum,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Uniform, Strategy::Error, Strategy::Momentum];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Uniform => "uniform",
            Strategy::Error => "error",
            Strategy::Momentum => "momentum",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = SamplerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Strategy::Uniform),
            "error" => Ok(Strategy::Error),
            "momentum" => Ok(Strategy::Momentum),
            other => Err(SamplerError::InvalidConfig(format!("unknown strategy {other:?}"))),
        }
    }
}

/// Probability of drawing each task, aligned with `tasks`.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskDistribution {
    tasks: Vec<String>,
    probs: Vec<f64>,
}

impl TaskDistribution {
    /// Normalizes non-negative weights. All-zero or all-equal weights give
    /// exactly uniform probabilities.
    pub fn from_weights(tasks: Vec<String>, weights: Vec<f64>) -> Self {
        assert_eq!(tasks.len(), weights.len());
        assert!(!tasks.is_empty(), "distribution over no tasks");
        debug_assert!(weights.iter().all(|w| *w >= 0.0 && w.is_finite()));
        let total: f64 = weights.iter().sum();
        // summing equal weights rounds, so w / total can miss 1/n by an ulp
        if total <= 0.0 || weights.iter().all(|w| *w == weights[0]) {
            return uniform(&tasks);
        }
        let probs = weights.into_iter().map(|w| w / total).collect();
        Self { tasks, probs }
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, task: &str) -> Option<f64> {
        self.tasks.iter().position(|t| t == task).map(|i| self.probs[i])
    }

    pub fn len(&self) -> usize {
        self.tasks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tasks.is_empty()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self.probs.iter().filter(|p| **p > 0.0).map(|p| p * p.ln()).sum::<f64>()
    }
}

pub fn uniform(tasks: &[String]) -> TaskDistribution {
    assert!(!tasks.is_empty(), "distribution over no tasks");
    let p = 1.0 / tasks.len() as f64;
    TaskDistribution { tasks: tasks.to_vec(), probs: vec![p; tasks.len()] }
}

/// `P(s) ∝ ceil(s) − acc(s)`; uniform when every gap is zero.
pub fn error_sampling(tasks: &[String], latest_acc: &[f64], ceil: &[f64]) -> TaskDistribution {
    assert_eq!(tasks.len(), latest_acc.len());
    assert_eq!(tasks.len(), ceil.len());
    let gaps = latest_acc.iter().zip(ceil).map(|(a, c)| (c - a).max(0.0)).collect();
    TaskDistribution::from_weights(tasks.to_vec(), gaps)
}

/// Per-task held-out accuracy, one entry per checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct AccuracyHistory {
    tasks: Vec<String>,
    series: Vec<Vec<f64>>,
}

impl AccuracyHistory {
    pub fn new(tasks: Vec<String>) -> Self {
        let series = vec![Vec::new(); tasks.len()];
        Self { tasks, series }
    }

    pub fn from_series(tasks: Vec<String>, series: Vec<Vec<f64>>) -> Result<Self, SamplerError> {
        if tasks.len() != series.len() {
            return Err(SamplerError::Misaligned(format!("{} tasks, {} series", tasks.len(), series.len())));
        }
        if let Some(first) = series.first() {
            if series.iter().any(|s| s.len() != first.len()) {
                return Err(SamplerError::Misaligned("series lengths differ".into()));
            }
        }
        for &a in series.iter().flatten() {
            check_accuracy(a)?;
        }
        Ok(Self { tasks, series })
    }

    /// Appends one checkpoint's accuracies, aligned with `tasks`.
    pub fn push(&mut self, accuracies: &[f64]) -> Result<(), SamplerError> {
        if accuracies.len() != self.tasks.len() {
            return Err(SamplerError::Misaligned(format!(
                "{} accuracies for {} tasks",
                accuracies.len(),
                self.tasks.len()
            )));
        }
        for &a in accuracies {
            check_accuracy(a)?;
        }
        for (s, &a) in self.series.iter_mut().zip(accuracies) {
            s.push(a);
        }
        Ok(())
    }

    pub fn tasks(&self) -> &[String] {
        &self.tasks
    }

    /// Number of checkpoints recorded.
    pub fn len(&self) -> usize {
        self.series.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn series(&self, task: usize) -> &[f64] {
        &self.series[task]
    }

    pub fn latest(&self) -> Option<Vec<f64>> {
        (!self.is_empty()).then(|| self.series.iter().map(|s| s[s.len() - 1]).collect())
    }
}

fn check_accuracy(a: f64) -> Result<(), SamplerError> {
    if (0.0..=1.0).contains(&a) {
        Ok(())
    } else {
        Err(SamplerError::AccuracyOutOfRange(a))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    pub strategy: Strategy,
    /// Window size in checkpoints.
    pub window: usize,
    /// Checkpoints averaged at each end of the window.
    pub smoothing: usize,
    /// Floor on a task's momentum weight.
    pub epsilon: f64,
    /// Probability that a batch is drawn from the replay task.
    pub replay_prob: f64,
    /// Per-task ceiling accuracy; empty means 1.0 for every task.
    pub ceilings: Vec<f64>,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { strategy: Strategy::Momentum, window: 4, smoothing: 2, epsilon: 0.002, replay_prob: 0.5, ceilings: Vec::new() }
    }
}

impl SamplerConfig {
    pub fn with_strategy(strategy: Strategy) -> Self {
        Self { strategy, ..Self::default() }
    }

    pub fn validate(&self, n_tasks: usize) -> Result<(), SamplerError> {
        let bad = |m: String| Err(SamplerError::InvalidConfig(m));
        if n_tasks == 0 {
            return bad("no tasks".into());
        }
        if self.window == 0 || self.smoothing == 0 {
            return bad("window and smoothing must be positive".into());
        }
        if self.smoothing > self.window {
            return bad(format!("smoothing k={} exceeds window w={}", self.smoothing, self.window));
        }
        if !(0.0..1.0 / n_tasks as f64).contains(&self.epsilon) {
            return bad(format!("epsilon {} outside [0, 1/{n_tasks})", self.epsilon));
        }
        if !(0.0..=1.0).contains(&self.replay_prob) {
            return bad(format!("replay probability {} outside [0, 1]", self.replay_prob));
        }
        if !self.ceilings.is_empty() && self.ceilings.len() != n_tasks {
            return bad(format!("{} ceilings for {n_tasks} tasks", self.ceilings.len()));
        }
        if self.ceilings.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad("ceilings must lie in [0, 1]".into());
        }
        Ok(())
    }

    pub fn ceilings_for(&self, n_tasks: usize) -> Vec<f64> {
        if self.ceilings.is_empty() {
            vec![1.0; n_tasks]
        } else {
            self.ceilings.clone()
        }
    }
}

/// Momentum sampling over the most recent `window` checkpoints.
///
/// With `t` checkpoints recorded and `t >= w`, each task's weight is
/// `max(|head − tail|, ε)` where `head` averages the `k` latest accuracies
/// and `tail` the `k` oldest inside the window. Before `w` checkpoints
/// exist the distribution is uniform.
pub fn momentum_sampling(history: &AccuracyHistory, config: &SamplerConfig) -> TaskDistribution {
    let t = history.len();
    let (w, k) = (config.window, config.smoothing);
    if t < w {
        return uniform(history.tasks());
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let weights = (0..history.tasks().len())
        .map(|s| {
            let series = history.series(s);
            let head = mean(&series[t - k..t]);
            let tail = mean(&series[t - w..t - w + k]);
            (head - tail).abs().max(config.epsilon)
        })
        .collect();
    TaskDistribution::from_weights(history.tasks().to_vec(), weights)
}

/// Distribution for the configured strategy given the history so far.
pub fn on_checkpoint(history: &AccuracyHistory, config: &SamplerConfig) -> TaskDistribution {
    match config.strategy {
        Strategy::Uniform => uniform(history.tasks()),
        Strategy::Error => match history.latest() {
            Some(latest) => error_sampling(history.tasks(), &latest, &config.ceilings_for(history.tasks().len())),
            None => uniform(history.tasks()),
        },
        Strategy::Momentum => momentum_sampling(history, config),
    }
}

/// Owns the history and publishes the current distribution as an
/// immutable snapshot. Updates happen only at checkpoint boundaries.
#[derive(Debug, Clone)]
pub struct Sampler {
    config: SamplerConfig,
    history: AccuracyHistory,
    current: Arc<TaskDistribution>,
}

impl Sampler {
    pub fn new(tasks: Vec<String>, config: SamplerConfig) -> Result<Self, SamplerError> {
        config.validate(tasks.len())?;
        let current = Arc::new(uniform(&tasks));
        Ok(Self { config, history: AccuracyHistory::new(tasks), current })
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn history(&self) -> &AccuracyHistory {
        &self.history
    }

    pub fn snapshot(&self) -> Arc<TaskDistribution> {
        Arc::clone(&self.current)
    }

    /// Records one checkpoint and swaps in the recomputed distribution.
    pub fn on_checkpoint(&mut self, accuracies: &[f64]) -> Result<Arc<TaskDistribution>, SamplerError> {
        self.history.push(accuracies)?;
        self.current = Arc::new(on_checkpoint(&self.history, &self.config));
        Ok(self.snapshot())
    }
}
