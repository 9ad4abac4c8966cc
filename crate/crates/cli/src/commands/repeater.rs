use clap::Args;
use clifford_distill::analytic::ProtocolParams;
use clifford_distill::repeater::{heuristic_search, RepeaterPlan};
use serde::{Deserialize, Serialize};

use super::Command;
use crate::error::{config_error, CliError};
use crate::table::{format_float, Cell, Row};

#[derive(Debug, Args, Serialize)]
pub struct RepeaterArgs {
    /// Infidelity of each elementary link
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_infidelity: Option<f64>,
    /// End-to-end infidelity to reach
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Swap levels; the chain has 2^levels segments
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<u32>,
    /// Largest n and n' scanned by the search
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_cap: Option<u64>,
    /// Fixed first-level round size (skips the search)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Fixed first-level output count
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u64>,
    /// Fixed round size after each swap, one pair measured
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_prime: Option<u64>,
}

fn default_link() -> f64 {
    0.0035
}
fn default_target() -> f64 {
    1e-9
}
fn default_levels() -> u32 {
    3
}
fn default_cap() -> u64 {
    100
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepeaterConfig {
    #[serde(default = "default_link")]
    pub link_infidelity: f64,
    #[serde(default = "default_target")]
    pub target: f64,
    #[serde(default = "default_levels")]
    pub levels: u32,
    #[serde(default = "default_cap")]
    pub n_cap: u64,
    #[serde(default)]
    pub n: Option<u64>,
    #[serde(default)]
    pub k: Option<u64>,
    #[serde(default)]
    pub n_prime: Option<u64>,
}

impl Command for RepeaterConfig {
    const NAME: &'static str = "repeater";
    const COLUMNS: &'static [&'static str] = &[
        "link_infidelity",
        "levels",
        "target",
        "n",
        "k",
        "n_prime",
        "end_to_end_infidelity",
        "end_to_end_overhead",
        "per_segment_overhead",
        "meets_target",
        "level_infidelities",
    ];

    fn run(&self) -> Result<Vec<Row>, CliError> {
        let (n, k, n_prime, plan) = match (self.n, self.k) {
            (None, None) => {
                if self.n_prime.is_some() {
                    return config_error("n_prime needs n and k");
                }
                let found = heuristic_search(self.link_infidelity, self.target, self.levels, self.n_cap)?;
                (found.n, found.k, found.n_prime, found.plan)
            }
            (Some(n), Some(k)) => {
                if k == 0 || k >= n {
                    return config_error(format!("need 1 <= k <= n - 1, got n = {n}, k = {k}"));
                }
                let keep = self.n_prime.map(|np| ProtocolParams::passive(np, 1)).transpose()?;
                let first = ProtocolParams::passive(n, n - k)?;
                let plan = RepeaterPlan::uniform(self.link_infidelity, self.levels, Some(first), keep)?;
                (Some(n), Some(k), self.n_prime, plan)
            }
            _ => return config_error("give both n and k, or neither"),
        };
        let levels: Vec<String> = plan.level_infidelity.iter().map(|&e| format_float(e)).collect();
        Ok(vec![vec![
            Cell::Float(self.link_infidelity),
            Cell::Int(self.levels as u64),
            Cell::Float(self.target),
            Cell::opt_u64(n),
            Cell::opt_u64(k),
            Cell::opt_u64(n_prime),
            Cell::Float(plan.end_to_end_infidelity),
            Cell::Float(plan.end_to_end_overhead),
            Cell::Float(plan.per_segment_overhead),
            Cell::Bool(plan.end_to_end_infidelity <= self.target),
            Cell::Text(levels.join(" ")),
        ]])
    }
}
