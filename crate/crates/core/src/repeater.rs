//! Nested repeater chains: `2^T` equal segments joined level by level, with
//! optional distillation on every level before its swap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{passive_performance, Fidelity, ProtocolParams};
use crate::error::{domain, Error, Result};

/// Infidelity after joining two links of infidelity `ε`: `min(2ε, 1)`.
pub fn swap_propagate(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return domain(format!("infidelity {epsilon} outside [0, 1]"));
    }
    Ok((2.0 * epsilon).min(1.0))
}

/// A nested scheme and its evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeaterPlan {
    pub levels: u32,
    pub link_infidelity: f64,
    /// Distillation applied at each level, level 0 being the raw links;
    /// length `levels + 1`.
    pub per_level: Vec<Option<ProtocolParams>>,
    /// Link infidelity after each level's distillation.
    pub level_infidelity: Vec<f64>,
    pub end_to_end_infidelity: f64,
    /// Elementary pairs consumed per end-to-end pair.
    pub end_to_end_overhead: f64,
    /// `end_to_end_overhead / 2^T`: pairs per segment per end-to-end pair.
    pub per_segment_overhead: f64,
}

impl RepeaterPlan {
    pub fn new(link_infidelity: f64, per_level: Vec<Option<ProtocolParams>>) -> Result<Self> {
        if per_level.is_empty() {
            return domain("a scheme has at least level 0");
        }
        let levels = per_level.len() as u32 - 1;
        let mut plan = Self {
            levels,
            link_infidelity,
            per_level,
            level_infidelity: Vec::new(),
            end_to_end_infidelity: f64::NAN,
            end_to_end_overhead: f64::NAN,
            per_segment_overhead: f64::NAN,
        };
        let (eps, overhead, trace) = run_scheme(&plan)?;
        plan.level_infidelity = trace;
        plan.end_to_end_infidelity = eps;
        plan.end_to_end_overhead = overhead;
        plan.per_segment_overhead = overhead / (levels as f64).exp2();
        Ok(plan)
    }

    /// Level 0 uses `first`, levels `1..=T` use `maintenance`.
    pub fn uniform(
        link_infidelity: f64,
        levels: u32,
        first: Option<ProtocolParams>,
        maintenance: Option<ProtocolParams>,
    ) -> Result<Self> {
        let mut per_level = vec![first];
        per_level.extend(std::iter::repeat_n(maintenance, levels as usize));
        Self::new(link_infidelity, per_level)
    }
}

fn run_scheme(plan: &RepeaterPlan) -> Result<(f64, f64, Vec<f64>)> {
    if !(0.0..=1.0).contains(&plan.link_infidelity) {
        return domain(format!("link infidelity {} outside [0, 1]", plan.link_infidelity));
    }
    if plan.per_level.len() != plan.levels as usize + 1 {
        return Err(Error::DimensionMismatch {
            expected: plan.levels as usize + 1,
            actual: plan.per_level.len(),
        });
    }
    let mut eps = plan.link_infidelity;
    let mut overhead = 1.0;
    let mut trace = Vec::with_capacity(plan.per_level.len());
    for (level, params) in plan.per_level.iter().enumerate() {
        if level > 0 {
            eps = swap_propagate(eps)?;
            overhead *= 2.0;
        }
        if let Some(p) = params {
            if eps >= 1.0 {
                return Err(Error::Infeasible(format!(
                    "level {level} receives fully mixed pairs"
                )));
            }
            let r = passive_performance(p, Fidelity::from_infidelity(eps)?)?;
            overhead *= r.expected_overhead;
            eps = r.pair_infidelity;
        }
        trace.push(eps);
    }
    Ok((eps, overhead, trace))
}

/// `(end-to-end infidelity, end-to-end overhead)`: distil, then swap, level by
/// level; each swap level doubles the pair count.
pub fn evaluate_scheme(plan: &RepeaterPlan) -> Result<(f64, f64)> {
    let (eps, overhead, _) = run_scheme(plan)?;
    Ok((eps, overhead))
}

/// Result of [`heuristic_search`]; `None` parameters mean no distillation
/// was needed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicResult {
    pub n: Option<u64>,
    pub k: Option<u64>,
    pub n_prime: Option<u64>,
    pub plan: RepeaterPlan,
}

/// Three-parameter scheme `(n, k)` on the raw links and `(n', n' - 1)` after
/// every swap. For each `(n, n')` with `2 <= n, n' <= n_cap` the largest `k`
/// that still meets `target` end to end is found by bisection; the triple of
/// least end-to-end overhead wins, ties to smaller `n` then smaller `n'`.
pub fn heuristic_search(
    epsilon_link: f64,
    target: f64,
    levels: u32,
    n_cap: u64,
) -> Result<HeuristicResult> {
    if !(target > 0.0) {
        return domain(format!("target {target} must be positive"));
    }
    if !(0.0..=0.5).contains(&epsilon_link) {
        return domain(format!("link infidelity {epsilon_link} outside [0, 0.5]"));
    }
    let bare = RepeaterPlan::uniform(epsilon_link, levels, None, None)?;
    if bare.end_to_end_infidelity <= target {
        return Ok(HeuristicResult {
            n: None,
            k: None,
            n_prime: None,
            plan: bare,
        });
    }
    if n_cap < 2 {
        return domain("n_cap must be at least 2");
    }

    let evaluate = |n: u64, k: u64, n_prime: u64| -> Option<(f64, f64)> {
        let first = ProtocolParams::passive(n, n - k).ok()?;
        let maintenance = if levels > 0 {
            Some(ProtocolParams::passive(n_prime, 1).ok()?)
        } else {
            None
        };
        let plan = RepeaterPlan::uniform(epsilon_link, levels, Some(first), maintenance).ok()?;
        Some((plan.end_to_end_infidelity, plan.end_to_end_overhead))
    };
    let n_primes: Vec<u64> = if levels > 0 { (2..=n_cap).collect() } else { vec![2] };

    let best = (2..=n_cap)
        .into_par_iter()
        .filter_map(|n| {
            let mut best: Option<(f64, u64, u64, u64)> = None;
            for &np in &n_primes {
                // output infidelity grows with k
                let feasible = |k: u64| evaluate(n, k, np).is_some_and(|(e, _)| e <= target);
                if !feasible(1) {
                    continue;
                }
                let (mut lo, mut hi) = (1, n - 1);
                while lo < hi {
                    let mid = (lo + hi).div_ceil(2);
                    if feasible(mid) {
                        lo = mid;
                    } else {
                        hi = mid - 1;
                    }
                }
                let (_, overhead) = evaluate(n, lo, np).expect("feasible");
                if best.is_none_or(|b| overhead < b.0) {
                    best = Some((overhead, n, lo, np));
                }
            }
            best
        })
        .reduce_with(|a, b| {
            if b.0 < a.0 || (b.0 == a.0 && (b.1, b.3) < (a.1, a.3)) {
                b
            } else {
                a
            }
        });

    let Some((_, n, k, np)) = best else {
        return Err(Error::Infeasible(format!(
            "no (n, k, n') with n, n' <= {n_cap} reaches {target} over {levels} levels"
        )));
    };
    let maintenance = if levels > 0 {
        Some(ProtocolParams::passive(np, 1)?)
    } else {
        None
    };
    let plan = RepeaterPlan::uniform(
        epsilon_link,
        levels,
        Some(ProtocolParams::passive(n, n - k)?),
        maintenance,
    )?;
    Ok(HeuristicResult {
        n: Some(n),
        k: Some(k),
        n_prime: (levels > 0).then_some(np),
        plan,
    })
}
