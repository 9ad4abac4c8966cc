use clap::Args;
use clifford_distill::analytic::{
    passive_block_infidelity_bound, passive_linear_fidelity_bound, passive_performance, Fidelity,
    ProtocolParams,
};
use clifford_distill::pauli_dist::{active_bounds, IidDepolarizing};
use serde::{Deserialize, Serialize};

use super::Command;
use crate::error::{config_error, CliError};
use crate::table::{Cell, Row};

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Input pairs per round
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    /// Pairs measured per round
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Input pair fidelity (or give --epsilon)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    /// Input pair infidelity
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Error budget; switches to active correction on IID depolarizing input
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluateConfig {
    pub n: u64,
    pub m: u64,
    #[serde(default)]
    pub fidelity: Option<f64>,
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub budget: Option<u64>,
}

impl EvaluateConfig {
    fn input(&self) -> Result<Fidelity, CliError> {
        match (self.fidelity, self.epsilon) {
            (Some(f), None) => Ok(Fidelity::new(f)?),
            (None, Some(e)) => Ok(Fidelity::from_infidelity(e)?),
            _ => config_error("give exactly one of fidelity and epsilon"),
        }
    }
}

impl Command for EvaluateConfig {
    const NAME: &'static str = "evaluate";
    const COLUMNS: &'static [&'static str] = &[
        "n",
        "m",
        "k",
        "budget",
        "fidelity",
        "p_accept",
        "p_accept_and_phi",
        "block_fidelity",
        "block_infidelity",
        "pair_infidelity",
        "expected_overhead",
        "exact",
        "block_infidelity_bound",
        "linear_fidelity_bound",
        "q",
        "fidelity_lower_bound",
        "p_accept_upper",
    ];

    fn run(&self) -> Result<Vec<Row>, CliError> {
        let f = self.input()?;
        let row = match self.budget {
            None => {
                let p = ProtocolParams::passive(self.n, self.m)?;
                let r = passive_performance(&p, f)?;
                vec![
                    Cell::Int(self.n),
                    Cell::Int(self.m),
                    Cell::Int(r.k),
                    Cell::Int(0),
                    Cell::Float(f.value()),
                    Cell::Float(r.p_accept),
                    Cell::Float(r.p_accept_and_phi),
                    Cell::Float(r.block_fidelity),
                    Cell::Float(r.block_infidelity),
                    Cell::Float(r.pair_infidelity),
                    Cell::Float(r.expected_overhead),
                    Cell::Bool(true),
                    Cell::Float(passive_block_infidelity_bound(&p, f)),
                    Cell::Float(passive_linear_fidelity_bound(&p, f)),
                    Cell::Empty,
                    Cell::Empty,
                    Cell::Empty,
                ]
            }
            Some(budget) => {
                let p = ProtocolParams::active(self.n, self.m, budget)?;
                let a = active_bounds(&p, &IidDepolarizing::new(self.n, f.infidelity())?)?;
                let r = a.to_performance_report();
                vec![
                    Cell::Int(self.n),
                    Cell::Int(self.m),
                    Cell::Int(r.k),
                    Cell::Int(budget),
                    Cell::Float(f.value()),
                    Cell::Float(r.p_accept),
                    Cell::Float(r.p_accept_and_phi),
                    Cell::Float(r.block_fidelity),
                    Cell::Float(r.block_infidelity),
                    Cell::Float(r.pair_infidelity),
                    Cell::Float(r.expected_overhead),
                    Cell::Bool(false),
                    Cell::Float(a.certified_block_infidelity),
                    Cell::Empty,
                    Cell::Float(a.q),
                    Cell::Float(a.fidelity_lower_bound),
                    Cell::Float(a.p_accept_upper),
                ]
            }
        };
        Ok(vec![row])
    }
}
