use clap::Args;
use clifford_distill::planner::{plan_concatenation, plan_recipe, ConcatenationPlan, Objective, PlanOptions};
use serde::{Deserialize, Serialize};

use super::Command;
use crate::error::CliError;
use crate::table::{format_float, Cell, Row};

#[derive(Debug, Args, Serialize)]
pub struct PlanArgs {
    /// Infidelity of the raw pairs
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon0: Option<f64>,
    /// Required output infidelity
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// dp (optimized) or recipe (constant-overhead construction)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    /// Failure probability for the guaranteed overhead
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    /// Largest round size considered
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    /// Allow an active first layer with budgets up to this value
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub active_e_max: Option<u64>,
    /// exact or bound
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nodes_per_decade: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budgets_per_decade: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_layers: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    #[default]
    Dp,
    Recipe,
}

fn default_options() -> PlanOptions {
    PlanOptions::default()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub epsilon0: f64,
    pub target: f64,
    #[serde(default)]
    pub strategy: Strategy,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_n_max")]
    pub n_max: u64,
    #[serde(default)]
    pub active_e_max: Option<u64>,
    #[serde(default)]
    pub objective: Objective,
    #[serde(default = "default_nodes")]
    pub nodes_per_decade: u32,
    #[serde(default = "default_budgets")]
    pub budgets_per_decade: u32,
    #[serde(default = "default_layers")]
    pub max_layers: usize,
}

fn default_delta() -> f64 {
    default_options().delta
}
fn default_n_max() -> u64 {
    default_options().n_max
}
fn default_nodes() -> u32 {
    default_options().nodes_per_decade
}
fn default_budgets() -> u32 {
    default_options().budgets_per_decade
}
fn default_layers() -> usize {
    default_options().max_layers
}

/// `n/m` per layer, `n/m/E` for active layers, space separated.
fn layer_summary(plan: &ConcatenationPlan) -> String {
    plan.layers
        .iter()
        .map(|l| {
            let p = &l.params;
            if p.is_effectively_passive() {
                format!("{}/{}", p.n, p.m)
            } else {
                format!("{}/{}/{}", p.n, p.m, p.budget())
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

impl Command for PlanConfig {
    const NAME: &'static str = "plan";
    const COLUMNS: &'static [&'static str] = &[
        "epsilon0",
        "target",
        "strategy",
        "layer_count",
        "final_infidelity",
        "expected_overhead",
        "guaranteed_overhead",
        "delta",
        "peak_memory_pairs",
        "layers",
        "layer_output_infidelities",
    ];

    fn run(&self) -> Result<Vec<Row>, CliError> {
        let plan = match self.strategy {
            Strategy::Recipe => plan_recipe(self.epsilon0, self.target, self.delta)?,
            Strategy::Dp => {
                let options = PlanOptions {
                    delta: self.delta,
                    n_max: self.n_max,
                    active_e_max: self.active_e_max,
                    objective: self.objective,
                    nodes_per_decade: self.nodes_per_decade,
                    budgets_per_decade: self.budgets_per_decade,
                    max_layers: self.max_layers,
                };
                plan_concatenation(self.epsilon0, self.target, &options)?
            }
        };
        let outputs: Vec<String> = plan.layers.iter().map(|l| format_float(l.output_infidelity())).collect();
        Ok(vec![vec![
            Cell::Float(plan.epsilon0),
            Cell::Float(plan.target),
            Cell::Text(match self.strategy {
                Strategy::Dp => "dp".into(),
                Strategy::Recipe => "recipe".into(),
            }),
            Cell::Int(plan.layer_count as u64),
            Cell::Float(plan.final_infidelity),
            Cell::Float(plan.expected_overhead),
            Cell::Float(plan.guaranteed_overhead),
            Cell::Float(plan.delta),
            Cell::Int(plan.peak_memory_pairs),
            Cell::Text(layer_summary(&plan)),
            Cell::Text(outputs.join(" ")),
        ]])
    }
}
