//! Simulated learners standing in for a language model, so that sampling
//! strategies can be compared in seconds.
//!
//! Each task follows a saturating curve `acc = c·(1 − exp(−n/τ))` in the
//! number of examples `n` it has been trained on. Checkpoints optionally
//! measure accuracy on a finite held-out sample, which adds binomial noise.

mod presets;

pub use presets::{fig3_experiment, fig3_experiment_with, fig3_sweep, plateau_run, Condition, ConditionReport, Fig3Report, StrategyResult};

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sampler::{compose_batch, Sampler, SamplerConfig, SamplerError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerTask {
    pub name: String,
    pub ceiling: f64,
    pub tau: f64,
    /// Labels are random: the task can never rise above `chance`.
    #[serde(default)]
    pub noisy: bool,
}

impl LearnerTask {
    pub fn new(name: &str, ceiling: f64, tau: f64) -> Self {
        Self { name: name.to_string(), ceiling, tau, noisy: false }
    }

    pub fn noisy(mut self) -> Self {
        self.noisy = true;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedLearner {
    tasks: Vec<LearnerTask>,
    seen: Vec<u64>,
    /// Accuracy ceiling of a noisy task.
    pub chance: f64,
}

impl SimulatedLearner {
    pub fn new(tasks: Vec<LearnerTask>) -> Self {
        let seen = vec![0; tasks.len()];
        Self { tasks, seen, chance: 0.0 }
    }

    pub fn tasks(&self) -> &[LearnerTask] {
        &self.tasks
    }

    pub fn seen(&self) -> &[u64] {
        &self.seen
    }

    pub fn train(&mut self, task: usize, examples: u64) {
        self.seen[task] += examples;
    }

    pub fn effective_ceiling(&self, task: usize) -> f64 {
        let t = &self.tasks[task];
        if t.noisy {
            self.chance
        } else {
            t.ceiling
        }
    }

    /// Closed-form accuracy after `n` examples.
    pub fn accuracy_at(&self, task: usize, n: u64) -> f64 {
        self.effective_ceiling(task) * (1.0 - (-(n as f64) / self.tasks[task].tau).exp())
    }

    pub fn accuracy(&self, task: usize) -> f64 {
        self.accuracy_at(task, self.seen[task])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub config: SamplerConfig,
    pub tasks: Vec<LearnerTask>,
    pub batch_size: usize,
    /// Training batches between checkpoints.
    pub cadence: usize,
    pub checkpoints: usize,
    /// Held-out examples per task per checkpoint; `None` reports the exact
    /// curve value.
    pub eval_size: Option<u32>,
    pub chance: f64,
}

impl SimulationRun {
    pub fn new(config: SamplerConfig, tasks: Vec<LearnerTask>) -> Self {
        Self { config, tasks, batch_size: 64, cadence: 10, checkpoints: 200, eval_size: None, chance: 0.0 }
    }

    pub fn task_names(&self) -> Vec<String> {
        self.tasks.iter().map(|t| t.name.clone()).collect()
    }

    pub fn validate(&self) -> Result<(), SamplerError> {
        let bad = |m: &str| Err(SamplerError::InvalidConfig(m.to_string()));
        if self.tasks.is_empty() {
            return bad("simulation needs at least one task");
        }
        if self.cadence == 0 || self.batch_size == 0 {
            return bad("cadence and batch size must be positive");
        }
        if self.tasks.iter().any(|t| !(t.tau > 0.0) || !(0.0..=1.0).contains(&t.ceiling)) {
            return bad("learner needs tau > 0 and ceiling in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.chance) {
            return bad("chance level outside [0, 1]");
        }
        self.config.validate(self.tasks.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointRecord {
    pub checkpoint: usize,
    /// Training examples consumed so far, replay included.
    pub examples: u64,
    pub task_examples: Vec<u64>,
    pub accuracies: Vec<f64>,
    /// Distribution published after this checkpoint.
    pub distribution: Vec<f64>,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub tasks: Vec<String>,
    pub records: Vec<CheckpointRecord>,
}

impl Trace {
    /// Total examples consumed when `task` first measures at least
    /// `fraction` of its ceiling.
    pub fn examples_to_threshold(&self, task: usize, ceiling: f64, fraction: f64) -> Option<u64> {
        let target = fraction * ceiling;
        self.records.iter().find(|r| r.accuracies[task] >= target).map(|r| r.examples)
    }

    /// Mean probability of `task` over the final `fraction` of checkpoints.
    pub fn steady_state_prob(&self, task: usize, fraction: f64) -> f64 {
        let n = self.records.len();
        let tail = ((n as f64 * fraction).ceil() as usize).clamp(1, n.max(1));
        let rs = &self.records[n - tail..];
        rs.iter().map(|r| r.distribution[task]).sum::<f64>() / rs.len() as f64
    }

    pub fn final_entropy(&self) -> Option<f64> {
        self.records.last().map(|r| r.entropy)
    }

    /// One row per (checkpoint, task).
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["checkpoint", "examples", "task", "task_examples", "accuracy", "probability", "entropy"])?;
        for r in &self.records {
            for (s, task) in self.tasks.iter().enumerate() {
                w.write_record([
                    r.checkpoint.to_string(),
                    r.examples.to_string(),
                    task.clone(),
                    r.task_examples[s].to_string(),
                    r.accuracies[s].to_string(),
                    r.distribution[s].to_string(),
                    r.entropy.to_string(),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn measure<R: Rng>(truth: f64, eval_size: Option<u32>, rng: &mut R) -> f64 {
    match eval_size {
        None | Some(0) => truth,
        Some(n) => (0..n).filter(|_| rng.gen_bool(truth.clamp(0.0, 1.0))).count() as f64 / n as f64,
    }
}

/// Runs the training loop: batches are composed from the current
/// distribution, each slot trains its task on one example, and after every
/// `cadence` batches the learner is evaluated and the sampler updated.
pub fn run_simulation(run: &SimulationRun, seed: u64) -> Result<Trace, SamplerError> {
    run.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut learner = SimulatedLearner::new(run.tasks.clone());
    learner.chance = run.chance;
    let mut sampler = Sampler::new(run.task_names(), run.config.clone())?;
    let n_tasks = run.tasks.len();
    let mut examples = 0u64;
    let mut records = Vec::with_capacity(run.checkpoints);

    for checkpoint in 1..=run.checkpoints {
        let dist = sampler.snapshot();
        for _ in 0..run.cadence {
            let plan = compose_batch(&dist, run.batch_size, run.config.replay_prob, &mut rng);
            for (t, c) in plan.counts(n_tasks).into_iter().enumerate() {
                learner.train(t, c as u64);
            }
            examples += plan.slots.len() as u64;
        }
        let accuracies: Vec<f64> = (0..n_tasks).map(|t| measure(learner.accuracy(t), run.eval_size, &mut rng)).collect();
        let next = sampler.on_checkpoint(&accuracies)?;
        records.push(CheckpointRecord {
            checkpoint,
            examples,
            task_examples: learner.seen().to_vec(),
            accuracies,
            distribution: next.probs().to_vec(),
            entropy: next.entropy(),
        });
    }
    Ok(Trace { tasks: run.task_names(), records })
}
