//! Canned experiments: the two-task gold/noisy comparison and a 16-task
//! plateau run.

use serde::Serialize;

use super::{run_simulation, LearnerTask, SimulationRun, Trace};
use crate::eg::EgKind;
use crate::par;
use crate::sampler::{SamplerConfig, SamplerError, Strategy};

pub const COMPOSITION: usize = 0;
pub const ADDITION: usize = 1;
const THRESHOLD: f64 = 0.9;
const STEADY_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Gold,
    Noisy,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::Gold => "gold",
            Condition::Noisy => "noisy",
        }
    }
}

/// Composition learns quickly; addition is the slow task whose progress is
/// measured. In the noisy condition composition labels are random.
pub fn fig3_tasks(condition: Condition) -> Vec<LearnerTask> {
    let comp = LearnerTask::new("composition", 1.0, 2_000.0);
    let add = LearnerTask::new("numeric_addition", 1.0, 20_000.0);
    match condition {
        Condition::Gold => vec![comp, add],
        Condition::Noisy => vec![comp.noisy(), add],
    }
}

pub fn fig3_run(base: &SamplerConfig, strategy: Strategy, condition: Condition) -> SimulationRun {
    let config = SamplerConfig { strategy, ..base.clone() };
    let mut run = SimulationRun::new(config, fig3_tasks(condition));
    run.batch_size = 64;
    run.cadence = 10;
    run.checkpoints = 1_200;
    run.eval_size = Some(1_000);
    run
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    pub strategy: Strategy,
    /// Examples until addition measures 90% of its ceiling.
    pub examples_to_threshold: Option<u64>,
    /// Mean composition probability over the last quarter of the run.
    pub steady_composition_prob: f64,
    pub final_entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub results: Vec<StrategyResult>,
    pub ordering_holds: bool,
}

impl ConditionReport {
    pub fn result(&self, strategy: Strategy) -> &StrategyResult {
        self.results.iter().find(|r| r.strategy == strategy).expect("every strategy is run")
    }

    fn steps(&self, strategy: Strategy) -> u64 {
        self.result(strategy).examples_to_threshold.unwrap_or(u64::MAX)
    }

    pub fn ordering(&self) -> String {
        let show = |s: Strategy| match self.result(s).examples_to_threshold {
            Some(n) => format!("{s}={n}"),
            None => format!("{s}=never"),
        };
        match self.condition {
            Condition::Gold => format!(
                "{} <= {} < {}",
                show(Strategy::Error),
                show(Strategy::Momentum),
                show(Strategy::Uniform)
            ),
            Condition::Noisy => format!(
                "{} < {} < {}; P(composition|error)={:.3}",
                show(Strategy::Momentum),
                show(Strategy::Uniform),
                show(Strategy::Error),
                self.result(Strategy::Error).steady_composition_prob
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fig3Report {
    pub seed: u64,
    pub conditions: Vec<ConditionReport>,
}

impl Fig3Report {
    pub fn condition(&self, c: Condition) -> &ConditionReport {
        self.conditions.iter().find(|r| r.condition == c).expect("both conditions are run")
    }

    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.ordering_holds)
    }
}

fn summarize(strategy: Strategy, trace: &Trace) -> StrategyResult {
    StrategyResult {
        strategy,
        examples_to_threshold: trace.examples_to_threshold(ADDITION, 1.0, THRESHOLD),
        steady_composition_prob: trace.steady_state_prob(COMPOSITION, STEADY_FRACTION),
        final_entropy: trace.final_entropy().unwrap_or(0.0),
    }
}

fn verdict(report: &ConditionReport) -> bool {
    let (u, e, m) = (report.steps(Strategy::Uniform), report.steps(Strategy::Error), report.steps(Strategy::Momentum));
    match report.condition {
        Condition::Gold => e <= m && m < u,
        Condition::Noisy => m < u && u < e && report.result(Strategy::Error).steady_composition_prob > 0.8,
    }
}

/// Both conditions under all three strategies, plus the traces.
pub fn fig3_experiment_with(base: &SamplerConfig, seed: u64) -> Result<(Fig3Report, Vec<(Condition, Strategy, Trace)>), SamplerError> {
    let mut conditions = Vec::new();
    let mut traces = Vec::new();
    for condition in [Condition::Gold, Condition::Noisy] {
        let mut results = Vec::new();
        for strategy in Strategy::ALL {
            let trace = run_simulation(&fig3_run(base, strategy, condition), seed)?;
            results.push(summarize(strategy, &trace));
            traces.push((condition, strategy, trace));
        }
        let mut report = ConditionReport { condition, results, ordering_holds: false };
        report.ordering_holds = verdict(&report);
        conditions.push(report);
    }
    Ok((Fig3Report { seed, conditions }, traces))
}

pub fn fig3_experiment(seed: u64) -> Fig3Report {
    fig3_experiment_with(&SamplerConfig::default(), seed).expect("default config is valid").0
}

/// Independent runs, one per seed, in seed order.
pub fn fig3_sweep(base: &SamplerConfig, seeds: &[u64]) -> Result<Vec<Fig3Report>, SamplerError> {
    par::map_ordered(seeds.to_vec(), |seed| fig3_experiment_with(base, seed).map(|(r, _)| r)).into_iter().collect()
}

/// Sixteen tasks with spread-out learning speeds, run long enough for all
/// of them to plateau. `low_ceiling` caps one task below the others.
pub fn plateau_run(strategy: Strategy, low_ceiling: Option<f64>) -> SimulationRun {
    let tasks = EgKind::ALL
        .iter()
        .enumerate()
        .map(|(i, eg)| {
            let tau = 500.0 * (1.0 + i as f64);
            let ceiling = if i == 0 { low_ceiling.unwrap_or(1.0) } else { 1.0 };
            LearnerTask::new(eg.name(), ceiling, tau)
        })
        .collect();
    let mut run = SimulationRun::new(SamplerConfig::with_strategy(strategy), tasks);
    run.batch_size = 256;
    run.cadence = 10;
    run.checkpoints = 800;
    run
}
