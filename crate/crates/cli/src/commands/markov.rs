use clap::Args;
use clifford_distill::markov::{
    best_measured_count, evolve_checkpoints, finite_depth_performance, initial_weight_distribution,
    transition_matrix, WeightDistribution,
};
use serde::{Deserialize, Serialize};

use super::{Command, NoiseKind};
use crate::error::{config_error, CliError};
use crate::table::{Cell, Row};

#[derive(Debug, Args, Serialize)]
pub struct MarkovArgs {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Input pair infidelity (IID depolarizing)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Start from exactly this many erroneous pairs instead
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_weight: Option<u64>,
    /// Gate counts to report, comma separated
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gates: Option<Vec<u64>>,
    /// Measured pairs; the best m per gate count when omitted
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// ideal, depolarizing or amplitude_damping
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    /// λ for depolarizing, γ for amplitude damping
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkovConfig {
    pub n: u64,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub initial_weight: Option<u64>,
    pub gates: Vec<u64>,
    #[serde(default)]
    pub m: Option<u64>,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub strength: f64,
}

impl MarkovConfig {
    pub fn initial(&self) -> Result<WeightDistribution, CliError> {
        match (self.epsilon, self.initial_weight) {
            (Some(e), None) => Ok(initial_weight_distribution(self.n, e)?),
            (None, Some(w)) => Ok(WeightDistribution::point(self.n, w)?),
            _ => config_error("give exactly one of epsilon and initial_weight"),
        }
    }
}

impl Command for MarkovConfig {
    const NAME: &'static str = "markov";
    const COLUMNS: &'static [&'static str] = &[
        "gates",
        "m",
        "p_accept",
        "p_accept_and_phi",
        "block_fidelity",
        "block_infidelity",
        "pair_infidelity",
        "expected_overhead",
    ];

    fn run(&self) -> Result<Vec<Row>, CliError> {
        let noise = self.noise.channel(self.strength).gate_noise()?;
        let t = transition_matrix(self.n, &noise)?;
        // evolve in sorted order, report in the order given
        let mut order: Vec<usize> = (0..self.gates.len()).collect();
        order.sort_by_key(|&i| self.gates[i]);
        let sorted: Vec<u64> = order.iter().map(|&i| self.gates[i]).collect();
        let dists = evolve_checkpoints(&self.initial()?, &t, &sorted)?;
        let mut rows = vec![Vec::new(); self.gates.len()];
        for (&i, dist) in order.iter().zip(&dists) {
            let (m, r) = match self.m {
                Some(m) => (m, finite_depth_performance(dist, m)?),
                None => best_measured_count(dist)?,
            };
            rows[i] = vec![
                Cell::Int(self.gates[i]),
                Cell::Int(m),
                Cell::Float(r.p_accept),
                Cell::Float(r.p_accept_and_phi),
                Cell::Float(r.block_fidelity),
                Cell::Float(r.block_infidelity),
                Cell::Float(r.pair_infidelity),
                Cell::Float(r.expected_overhead),
            ];
        }
        Ok(rows)
    }
}
