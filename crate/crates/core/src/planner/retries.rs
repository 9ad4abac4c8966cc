use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{guaranteed_overhead, ConcatenationPlan};
use crate::error::{domain, Result};

/// Empirical overheads of the repeat-until-success process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetryStats {
    pub expected_overhead: f64,
    pub samples: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
}

/// Outcome of the restart-on-budget policy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetRestartStats {
    pub delta: f64,
    /// Spend allowed per attempt, `2 · E[O]`.
    pub attempt_budget: f64,
    /// `2 · E[O] · log₂(1/δ)`.
    pub guaranteed_overhead: f64,
    pub totals: Vec<f64>,
    pub mean_attempts: f64,
    /// Fraction of runs whose total exceeded the guaranteed overhead.
    pub exceed_fraction: f64,
}

struct Layer {
    n: u64,
    k: u64,
    p: f64,
}

fn layers_of(plan: &ConcatenationPlan) -> Result<Vec<Layer>> {
    plan.layers
        .iter()
        .map(|l| {
            let p = l.report.p_accept;
            if !(p > 0.0 && p <= 1.0) {
                return domain(format!("layer acceptance {p} outside (0, 1]"));
            }
            Ok(Layer {
                n: l.params.n,
                k: l.params.k(),
                p,
            })
        })
        .collect()
}

/// Pairs already distilled at each layer and still unused, with the raw
/// cost charged to each.
struct Pools {
    stock: Vec<Vec<f64>>,
}

impl Pools {
    fn new(layers: usize) -> Self {
        Self {
            stock: vec![Vec::new(); layers + 1],
        }
    }

    /// Cost of one pair at `level` (0 = raw input).
    fn take(&mut self, layers: &[Layer], level: usize, rng: &mut ChaCha8Rng) -> f64 {
        if level == 0 {
            return 1.0;
        }
        if let Some(c) = self.stock[level].pop() {
            return c;
        }
        let box_cost = self.run_box(layers, level, rng);
        let layer = &layers[level - 1];
        let each = box_cost / layer.k as f64;
        self.stock[level].extend(std::iter::repeat_n(each, layer.k as usize - 1));
        each
    }

    /// Raw cost of running the round at `level` until it accepts; every
    /// attempt consumes fresh inputs, rejected ones are lost.
    fn run_box(&mut self, layers: &[Layer], level: usize, rng: &mut ChaCha8Rng) -> f64 {
        let layer = &layers[level - 1];
        let mut total = 0.0;
        loop {
            for _ in 0..layer.n {
                total += self.take(layers, level - 1, rng);
            }
            if layer.p >= 1.0 || rng.random::<f64>() < layer.p {
                return total;
            }
        }
    }
}

/// One overhead sample: raw pairs charged to one top-level round, per output.
fn sample_overhead(layers: &[Layer], rng: &mut ChaCha8Rng) -> f64 {
    if layers.is_empty() {
        return 1.0;
    }
    let mut pools = Pools::new(layers.len());
    let top = layers.len();
    pools.run_box(layers, top, rng) / layers[top - 1].k as f64
}

fn run_rng(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// Simulates the nested repeat-until-success process `runs` times.
///
/// A failed round discards its inputs, so all boxes feeding it are rerun. A
/// successful round of `k` outputs charges each output `1/k` of the raw pairs
/// spent on it, and spare outputs serve later rounds of the same run. The
/// sample mean therefore converges to the product of layer overheads.
pub fn simulate_retries(plan: &ConcatenationPlan, runs: u64, seed: u64) -> Result<RetryStats> {
    if runs == 0 {
        return domain("need at least one run");
    }
    let layers = layers_of(plan)?;
    let samples: Vec<f64> = (0..runs)
        .into_par_iter()
        .map(|r| sample_overhead(&layers, &mut run_rng(seed, r)))
        .collect();
    let mean = samples.iter().sum::<f64>() / runs as f64;
    let var = if runs > 1 {
        samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (runs - 1) as f64
    } else {
        0.0
    };
    Ok(RetryStats {
        expected_overhead: plan.expected_overhead,
        samples,
        mean,
        stderr: (var / runs as f64).sqrt(),
    })
}

/// Restart policy behind the guaranteed overhead: abandon any attempt once it
/// has spent `2 · E[O]` and start over.
pub fn simulate_budget_restart(
    plan: &ConcatenationPlan,
    delta: f64,
    runs: u64,
    seed: u64,
) -> Result<BudgetRestartStats> {
    if runs == 0 {
        return domain("need at least one run");
    }
    let bound = guaranteed_overhead(plan.expected_overhead.max(1.0), delta)?;
    let budget = 2.0 * plan.expected_overhead;
    let layers = layers_of(plan)?;
    let results: Vec<(f64, u64)> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let rng = &mut run_rng(seed, r);
            let mut total = 0.0;
            let mut attempts = 0u64;
            loop {
                attempts += 1;
                let o = sample_overhead(&layers, rng);
                if o <= budget {
                    total += o;
                    break;
                }
                total += budget;
            }
            (total, attempts)
        })
        .collect();
    let exceed = results.iter().filter(|(t, _)| *t > bound).count();
    let attempts: u64 = results.iter().map(|(_, a)| a).sum();
    Ok(BudgetRestartStats {
        delta,
        attempt_budget: budget,
        guaranteed_overhead: bound,
        mean_attempts: attempts as f64 / runs as f64,
        exceed_fraction: exceed as f64 / runs as f64,
        totals: results.into_iter().map(|(t, _)| t).collect(),
    })
}
