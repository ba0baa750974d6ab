use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::TaskDistribution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Slot {
    Task(usize),
    Replay,
}

/// Task slots for one batch, in the order examples are drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchPlan {
    pub slots: Vec<Slot>,
}

impl BatchPlan {
    pub fn is_replay(&self) -> bool {
        self.slots.iter().all(|s| *s == Slot::Replay)
    }

    /// Slot count per task index.
    pub fn counts(&self, n_tasks: usize) -> Vec<usize> {
        let mut counts = vec![0; n_tasks];
        for slot in &self.slots {
            if let Slot::Task(t) = slot {
                counts[*t] += 1;
            }
        }
        counts
    }
}

/// Whole-number slot counts summing to `batch_size`.
///
/// Each task receives `floor(B·p)` or one more. The leftover slots go to
/// tasks by systematic sampling over the fractional remainders, so the
/// expected count of every task is exactly `B·p`.
fn quota_counts<R: Rng + ?Sized>(probs: &[f64], batch_size: usize, rng: &mut R) -> Vec<usize> {
    let quotas: Vec<f64> = probs.iter().map(|p| p * batch_size as f64).collect();
    let mut counts: Vec<usize> = quotas.iter().map(|q| (q + 1e-9).floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let leftover = batch_size.saturating_sub(assigned);
    if leftover == 0 {
        return counts;
    }
    let remainders: Vec<f64> = quotas.iter().zip(&counts).map(|(q, c)| (q - *c as f64).max(0.0)).collect();
    let total: f64 = remainders.iter().sum();
    if total <= 0.0 {
        // rounding noise only; hand leftovers to the largest quotas
        let mut order: Vec<usize> = (0..probs.len()).collect();
        order.sort_by(|&a, &b| quotas[b].total_cmp(&quotas[a]));
        for &i in order.iter().cycle().take(leftover) {
            counts[i] += 1;
        }
        return counts;
    }
    let scale = leftover as f64 / total;
    let offset: f64 = rng.gen();
    let mut next_point = offset;
    let mut cumulative = 0.0;
    let mut given = 0;
    for (i, r) in remainders.iter().enumerate() {
        cumulative += r * scale;
        while given < leftover && next_point < cumulative {
            counts[i] += 1;
            given += 1;
            next_point += 1.0;
        }
    }
    // float shortfall at the top end lands on the last non-zero remainder
    if given < leftover {
        let last = remainders.iter().rposition(|r| *r > 0.0).unwrap_or(probs.len() - 1);
        counts[last] += leftover - given;
    }
    counts
}

/// Plans one batch. With probability `replay_prob` the whole batch comes
/// from the replay task; otherwise every task gets its quota of slots and
/// the slots are shuffled.
pub fn compose_batch<R: Rng + ?Sized>(
    dist: &TaskDistribution,
    batch_size: usize,
    replay_prob: f64,
    rng: &mut R,
) -> BatchPlan {
    if replay_prob > 0.0 && rng.gen_bool(replay_prob.min(1.0)) {
        return BatchPlan { slots: vec![Slot::Replay; batch_size] };
    }
    let counts = quota_counts(dist.probs(), batch_size, rng);
    let mut slots: Vec<Slot> =
        counts.iter().enumerate().flat_map(|(t, &c)| std::iter::repeat(Slot::Task(t)).take(c)).collect();
    slots.shuffle(rng);
    BatchPlan { slots }
}

pub fn compose_batch_seeded(dist: &TaskDistribution, batch_size: usize, replay_prob: f64, seed: u64) -> BatchPlan {
    compose_batch(dist, batch_size, replay_prob, &mut ChaCha8Rng::seed_from_u64(seed))
}
