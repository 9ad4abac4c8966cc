//! Concatenated distillation: parameter choice per layer, expected and
//! guaranteed overhead, and simulation of the retry process.
//!
//! Layers are chained through the per-pair output infidelity. A passive round
//! only needs the geometric-mean input fidelity, so the output of one layer is
//! a valid input to the next even though its pairs are correlated. Active
//! rounds assume IID depolarizing input and are therefore only offered as the
//! first layer.

mod retries;

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    passive_bound_performance, passive_performance, Fidelity, Mode, PerformanceReport,
    ProtocolParams,
};
use crate::error::{domain, Error, Result};
use crate::math::ceil_tolerant;
use crate::pauli_dist::{
    active_bounds, active_bounds_from_mass, top_error_mass, ActiveReport, IidDepolarizing,
    TopErrorMass,
};

pub use retries::{
    simulate_budget_restart, simulate_retries, BudgetRestartStats, RetryStats,
};

/// How passive layers are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Exact closed forms for passive layers, certified bounds for active ones.
    #[default]
    Exact,
    /// Guaranteed bounds everywhere: acceptance `fⁿ` and the simple fidelity
    /// bound for passive layers.
    Bound,
}

/// Search settings of [`plan_concatenation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanOptions {
    pub delta: f64,
    pub n_max: u64,
    /// Largest error budget of an active first layer; `None` plans passive
    /// layers only.
    pub active_e_max: Option<u64>,
    pub objective: Objective,
    /// Density of the infidelity grid.
    pub nodes_per_decade: u32,
    /// Budgets scanned per decade for the active layer.
    pub budgets_per_decade: u32,
    /// Plans needing more layers are reported infeasible.
    pub max_layers: usize,
}

impl Default for PlanOptions {
    fn default() -> Self {
        Self {
            delta: 0.1,
            n_max: 300,
            active_e_max: None,
            objective: Objective::Exact,
            nodes_per_decade: 48,
            budgets_per_decade: 8,
            max_layers: 64,
        }
    }
}

/// One layer of a plan, evaluated on its actual input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannedLayer {
    pub params: ProtocolParams,
    pub input_infidelity: f64,
    pub report: PerformanceReport,
    /// Full bound set for active layers.
    pub active: Option<ActiveReport>,
}

impl PlannedLayer {
    pub fn output_infidelity(&self) -> f64 {
        self.report.pair_infidelity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatenationPlan {
    pub epsilon0: f64,
    pub target: f64,
    pub objective: Objective,
    pub layers: Vec<PlannedLayer>,
    pub final_infidelity: f64,
    /// Product of the layer overheads.
    pub expected_overhead: f64,
    pub delta: f64,
    /// `2 · expected_overhead · log₂(1/δ)`.
    pub guaranteed_overhead: f64,
    pub layer_count: usize,
    pub peak_memory_pairs: u64,
}

/// `2 · E[O] · log₂(1/δ)`: restarting whenever twice the expected cost is
/// spent succeeds within this many pairs except with probability `δ`.
pub fn guaranteed_overhead(expected: f64, delta: f64) -> Result<f64> {
    if !(expected >= 1.0) || !expected.is_finite() {
        return domain(format!("expected overhead {expected} must be finite and >= 1"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("failure probability {delta} outside (0, 1)"));
    }
    Ok(2.0 * expected * (1.0 / delta).log2())
}

fn evaluate_layer(params: &ProtocolParams, input: f64, objective: Objective) -> Result<PlannedLayer> {
    let (report, active) = match params.mode {
        Mode::Active { budget } if budget > 0 => {
            let a = active_bounds(params, &IidDepolarizing::new(params.n, input)?)?;
            (a.to_performance_report(), Some(a))
        }
        _ => {
            let f = Fidelity::from_infidelity(input)?;
            let r = match objective {
                Objective::Exact => passive_performance(params, f)?,
                Objective::Bound => passive_bound_performance(params, f)?,
            };
            (r, None)
        }
    };
    Ok(PlannedLayer {
        params: *params,
        input_infidelity: input,
        report,
        active,
    })
}

/// Evaluate a fixed layer sequence on input infidelity `epsilon0`.
pub fn evaluate_chain(
    epsilon0: f64,
    target: f64,
    params: &[ProtocolParams],
    objective: Objective,
    delta: f64,
) -> Result<ConcatenationPlan> {
    if !(epsilon0 > 0.0 && epsilon0 < 1.0) {
        return domain(format!("input infidelity {epsilon0} outside (0, 1)"));
    }
    let mut layers = Vec::with_capacity(params.len());
    let mut eps = epsilon0;
    let mut overhead = 1.0;
    for (i, p) in params.iter().enumerate() {
        if i > 0 && !p.is_effectively_passive() {
            return domain("active rounds need IID input and may only open a plan");
        }
        let layer = evaluate_layer(p, eps, objective)?;
        overhead *= layer.report.expected_overhead;
        eps = layer.output_infidelity();
        layers.push(layer);
    }
    Ok(ConcatenationPlan {
        epsilon0,
        target,
        objective,
        final_infidelity: eps,
        expected_overhead: overhead,
        delta,
        guaranteed_overhead: guaranteed_overhead(overhead.max(1.0), delta)?,
        layer_count: layers.len(),
        peak_memory_pairs: params.iter().map(|p| p.n).max().unwrap_or(0),
        layers,
    })
}

/// Relative slack under which the input already counts as on target.
const ON_TARGET_SLACK: f64 = 1e-9;

fn check_plan_inputs(epsilon0: f64, target: f64, delta: f64) -> Result<()> {
    if !(target > 0.0) {
        return domain(format!("target {target} must be positive"));
    }
    if !(epsilon0 > 0.0 && epsilon0 < 0.5) {
        return domain(format!("input infidelity {epsilon0} outside (0, 0.5)"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("failure probability {delta} outside (0, 1)"));
    }
    Ok(())
}

/// Round parameters of the constant-overhead recipe: `n = ⌈ε^{-1/2}⌉`,
/// `m = ⌈log₂(1/ε_f)⌉`.
pub fn auto_params(epsilon: f64, epsilon_f: f64) -> Result<ProtocolParams> {
    if !(epsilon > 0.0 && epsilon <= 0.05) {
        return domain(format!("recipe needs 0 < ε <= 0.05, got {epsilon}"));
    }
    if !(epsilon_f > 0.0 && epsilon_f < 1.0) {
        return domain(format!("target {epsilon_f} outside (0, 1)"));
    }
    // ε_f >= 2^{-ε^{-1/3}}, compared in the exponent
    let reach = epsilon.powf(-1.0 / 3.0);
    if -epsilon_f.log2() > reach * (1.0 + 1e-12) {
        return domain(format!(
            "target {epsilon_f} below the recipe's reach 2^-{reach:.4} from ε = {epsilon}"
        ));
    }
    let n = ceil_tolerant(epsilon.powf(-0.5)) as u64;
    let m = ceil_tolerant(-epsilon_f.log2()) as u64;
    if m >= n {
        return Err(Error::Infeasible(format!(
            "recipe gives n = {n}, m = {m}; no output pair would remain"
        )));
    }
    let params = ProtocolParams::passive(n, m)?;
    let r = passive_performance(&params, Fidelity::from_infidelity(epsilon)?)?;
    if r.pair_infidelity > epsilon_f {
        return Err(Error::Infeasible(format!(
            "recipe round reaches {} instead of {epsilon_f}",
            r.pair_infidelity
        )));
    }
    Ok(params)
}

/// `exp(2 ε^{1/6})`, the recipe's per-layer overhead guarantee.
pub fn recipe_overhead_bound(epsilon: f64) -> f64 {
    (2.0 * epsilon.powf(1.0 / 6.0)).exp()
}

/// Next nominal infidelity of the recipe, `2^{-ε^{-1/3}}`.
pub fn recipe_next_infidelity(epsilon: f64) -> f64 {
    (-epsilon.powf(-1.0 / 3.0)).exp2()
}

/// Passive plan following the recipe layer by layer: nominal infidelities
/// `ε_ℓ = 2^{-ε_{ℓ-1}^{-1/3}}`, the last layer aimed straight at `target`.
pub fn plan_recipe(epsilon0: f64, target: f64, delta: f64) -> Result<ConcatenationPlan> {
    check_plan_inputs(epsilon0, target, delta)?;
    if epsilon0 <= target * (1.0 + ON_TARGET_SLACK) {
        return evaluate_chain(epsilon0, target, &[], Objective::Exact, delta);
    }
    let mut params = Vec::new();
    let mut nominal = epsilon0;
    loop {
        let next = recipe_next_infidelity(nominal);
        if next <= target {
            // the least noisy input from which one round reaches the target
            let assumed = nominal.max((-target.log2()).powi(-3));
            params.push(auto_params(assumed, target)?);
            break;
        }
        if next >= nominal {
            return Err(Error::Infeasible(format!(
                "recipe makes no progress from ε = {nominal}"
            )));
        }
        params.push(auto_params(nominal, next)?);
        nominal = next;
        if params.len() > 64 {
            return Err(Error::Infeasible("recipe did not converge".into()));
        }
    }
    let plan = evaluate_chain(epsilon0, target, &params, Objective::Exact, delta)?;
    if plan.final_infidelity > target {
        return Err(Error::Infeasible(format!(
            "recipe chain ends at {} above target {target}",
            plan.final_infidelity
        )));
    }
    Ok(plan)
}

/// Best transition found into a grid node.
#[derive(Debug, Clone, Copy)]
struct NodeState {
    cost: f64,
    eps: f64,
    pred: usize,
    params: ProtocolParams,
}

/// Minimum-overhead layer sequence from `epsilon0` down to `target`.
///
/// Dynamic programming over a log-spaced grid of infidelities anchored at
/// `epsilon0`; the last node is the target itself. Each node stores the
/// cheapest chain reaching it together with the actual infidelity that chain
/// achieves, and outgoing rounds are evaluated from that actual value. Every
/// round output is assigned to the lowest node still at or above it.
pub fn plan_concatenation(epsilon0: f64, target: f64, options: &PlanOptions) -> Result<ConcatenationPlan> {
    check_plan_inputs(epsilon0, target, options.delta)?;
    if epsilon0 <= target * (1.0 + ON_TARGET_SLACK) {
        return evaluate_chain(epsilon0, target, &[], options.objective, options.delta);
    }
    if options.n_max < 2 {
        return domain("n_max must be at least 2");
    }
    if options.nodes_per_decade == 0 {
        return domain("grid needs at least one node per decade");
    }
    let step = std::f64::consts::LN_10 / options.nodes_per_decade as f64;
    let span = (epsilon0 / target).ln();
    let inner = (span / step).ceil() as usize;
    let mut grid: Vec<f64> = (0..inner).map(|j| epsilon0 * (-(j as f64) * step).exp()).collect();
    grid.push(target);
    let last = grid.len() - 1;

    let snap = |eps: f64| -> usize {
        if eps <= target {
            return last;
        }
        grid.partition_point(|&g| g >= eps).saturating_sub(1)
    };

    let mut states: Vec<Option<NodeState>> = vec![None; grid.len()];
    states[0] = Some(NodeState {
        cost: 0.0,
        eps: epsilon0,
        pred: usize::MAX,
        params: ProtocolParams {
            n: 0,
            m: 0,
            mode: Mode::Passive,
        },
    });

    let relax = |states: &mut Vec<Option<NodeState>>, from: usize, edges: Vec<(usize, f64, f64, ProtocolParams)>| {
        let base = states[from].expect("reached").cost;
        for (to, cost, eps, params) in edges {
            let total = base + cost;
            let better = match states[to] {
                None => true,
                Some(s) => total < s.cost || (total == s.cost && eps < s.eps),
            };
            if better {
                states[to] = Some(NodeState {
                    cost: total,
                    eps,
                    pred: from,
                    params,
                });
            }
        }
    };

    for i in 0..last {
        let Some(state) = states[i] else { continue };
        let mut edges = passive_edges(state.eps, options, &snap, i)?;
        if i == 0 {
            if let Some(e_max) = options.active_e_max {
                edges.extend(active_edges(state.eps, e_max, options, &snap, i)?);
            }
        }
        relax(&mut states, i, best_edge_per_node(edges));
    }

    let Some(end) = states[last] else {
        return Err(Error::Infeasible(format!(
            "no chain with n <= {} reaches {target} from {epsilon0}",
            options.n_max
        )));
    };
    let mut params = Vec::new();
    let mut node = last;
    let mut cur = end;
    while node != 0 {
        params.push(cur.params);
        node = cur.pred;
        cur = states[node].expect("on path");
    }
    params.reverse();
    if params.len() > options.max_layers {
        return Err(Error::Infeasible(format!(
            "cheapest chain needs {} layers, more than the allowed {}",
            params.len(),
            options.max_layers
        )));
    }

    let plan = evaluate_chain(epsilon0, target, &params, options.objective, options.delta)?;
    if plan.final_infidelity > target {
        return Err(Error::Infeasible(format!(
            "recomputed chain ends at {} above target {target}",
            plan.final_infidelity
        )));
    }
    Ok(plan)
}

type Edge = (usize, f64, f64, ProtocolParams);

fn best_edge_per_node(edges: Vec<Edge>) -> Vec<Edge> {
    let mut best: HashMap<usize, Edge> = HashMap::new();
    for e in edges {
        let keep = match best.get(&e.0) {
            None => true,
            Some(b) => e.1 < b.1 || (e.1 == b.1 && e.2 < b.2),
        };
        if keep {
            best.insert(e.0, e);
        }
    }
    let mut out: Vec<Edge> = best.into_values().collect();
    out.sort_by_key(|e| e.0);
    out
}

fn passive_edges(
    eps: f64,
    options: &PlanOptions,
    snap: &(dyn Fn(f64) -> usize + Sync),
    from: usize,
) -> Result<Vec<Edge>> {
    let f = Fidelity::from_infidelity(eps)?;
    let per_n: Vec<Vec<Edge>> = (2..=options.n_max)
        .into_par_iter()
        .map(|n| {
            let mut best: Vec<Edge> = Vec::new();
            for m in 1..n {
                let params = ProtocolParams {
                    n,
                    m,
                    mode: Mode::Passive,
                };
                let r = match options.objective {
                    Objective::Exact => passive_performance(&params, f),
                    Objective::Bound => passive_bound_performance(&params, f),
                }
                .expect("valid parameters");
                let to = snap(r.pair_infidelity);
                if to > from && r.expected_overhead.is_finite() {
                    best.push((to, r.expected_overhead.ln(), r.pair_infidelity, params));
                }
            }
            best_edge_per_node(best)
        })
        .collect();
    Ok(per_n.into_iter().flatten().collect())
}

/// Budgets `0 < E <= e_max` on a log grid, `e_max` included.
fn budget_grid(e_max: u64, per_decade: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mut x = 0u32;
    loop {
        let e = 10f64.powf(x as f64 / per_decade.max(1) as f64).round() as u64;
        if e >= e_max {
            break;
        }
        if out.last() != Some(&e) {
            out.push(e);
        }
        x += 1;
    }
    if e_max > 0 {
        out.push(e_max);
    }
    out
}

fn active_edges(
    eps: f64,
    e_max: u64,
    options: &PlanOptions,
    snap: &(dyn Fn(f64) -> usize + Sync),
    from: usize,
) -> Result<Vec<Edge>> {
    IidDepolarizing::new(2, eps)?;
    let budgets = budget_grid(e_max, options.budgets_per_decade);
    let per_n: Vec<Vec<Edge>> = (2..=options.n_max)
        .into_par_iter()
        .map(|n| {
            let model = IidDepolarizing { n, epsilon: eps };
            let mut best = Vec::new();
            for &budget in &budgets {
                let top: TopErrorMass = top_error_mass(&model, budget).expect("validated model");
                for m in 1..n {
                    let params = ProtocolParams {
                        n,
                        m,
                        mode: Mode::Active { budget },
                    };
                    let a = active_bounds_from_mass(&params, eps, &top);
                    let r = a.to_performance_report();
                    let to = snap(r.pair_infidelity);
                    if to > from && r.expected_overhead.is_finite() {
                        best.push((to, r.expected_overhead.ln(), r.pair_infidelity, params));
                    }
                }
            }
            best_edge_per_node(best)
        })
        .collect();
    Ok(per_n.into_iter().flatten().collect())
}
