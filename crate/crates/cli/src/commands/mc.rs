use clap::Args;
use clifford_distill::analytic::{passive_performance, Fidelity, ProtocolParams};
use clifford_distill::markov::{evolve, finite_depth_performance, transition_matrix};
use clifford_distill::mc::{estimate_active, estimate_finite_depth, estimate_passive, InitialErrors, RoundEstimate};
use clifford_distill::pauli_dist::{active_bounds, IidDepolarizing};
use serde::{Deserialize, Serialize};

use super::markov::MarkovConfig;
use super::{Command, NoiseKind};
use crate::error::{config_error, CliError};
use crate::table::{Cell, Row};

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    /// passive, active or finite_depth
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    /// Input pair infidelity
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    /// Master seed; generated and reported on stderr when omitted
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Error budget (active)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    /// Random two-pair gates (finite_depth)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gates: Option<u64>,
    /// ideal, depolarizing or amplitude_damping (finite_depth)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strength: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McKind {
    #[default]
    Passive,
    Active,
    FiniteDepth,
}

fn default_trials() -> u64 {
    100_000
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default)]
    pub kind: McKind,
    pub n: u64,
    pub m: u64,
    pub epsilon: f64,
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub gates: Option<u64>,
    #[serde(default)]
    pub noise: NoiseKind,
    #[serde(default)]
    pub strength: f64,
}

impl McConfig {
    fn check_fields(&self) -> Result<(), CliError> {
        let active = self.kind == McKind::Active;
        let finite = self.kind == McKind::FiniteDepth;
        if active != self.budget.is_some() {
            return config_error("budget is required for, and only used by, kind = active");
        }
        if finite != self.gates.is_some() {
            return config_error("gates is required for, and only used by, kind = finite_depth");
        }
        if !finite && (self.noise != NoiseKind::Ideal || self.strength != 0.0) {
            return config_error("gate noise only applies to kind = finite_depth");
        }
        Ok(())
    }
}

impl Command for McConfig {
    const NAME: &'static str = "mc";
    const COLUMNS: &'static [&'static str] = &[
        "trials",
        "accept",
        "accept_stderr",
        "joint",
        "joint_stderr",
        "block_fidelity",
        "block_fidelity_stderr",
        "reference",
        "reference_accept_lower",
        "reference_accept_upper",
        "reference_joint",
        "reference_block_fidelity",
    ];

    fn prepare(&mut self) {
        if self.seed.is_none() {
            let seed = rand::random::<u64>();
            eprintln!("seed: {seed}");
            self.seed = Some(seed);
        }
    }

    fn run(&self) -> Result<Vec<Row>, CliError> {
        self.check_fields()?;
        let seed = self.seed.expect("prepared");
        let (est, reference, lo, hi, joint, fid) = match self.kind {
            McKind::Passive => {
                let est = estimate_passive(self.n, self.m, self.epsilon, self.trials, seed)?;
                let r = passive_performance(
                    &ProtocolParams::passive(self.n, self.m)?,
                    Fidelity::from_infidelity(self.epsilon)?,
                )?;
                (est, "exact", r.p_accept, r.p_accept, r.p_accept_and_phi, r.block_fidelity)
            }
            McKind::Active => {
                let budget = self.budget.expect("checked");
                let est = estimate_active(self.n, self.m, budget, self.epsilon, self.trials, seed)?;
                let b = active_bounds(
                    &ProtocolParams::active(self.n, self.m, budget)?,
                    &IidDepolarizing::new(self.n, self.epsilon)?,
                )?;
                (est, "bounds", b.p_accept_lower, b.p_accept_upper, b.joint_lower, b.fidelity_lower_bound)
            }
            McKind::FiniteDepth => {
                let gates = self.gates.expect("checked");
                let channel = self.noise.channel(self.strength);
                let f = estimate_finite_depth(
                    self.n,
                    self.m,
                    gates,
                    channel,
                    InitialErrors::Iid { epsilon: self.epsilon },
                    self.trials,
                    seed,
                )?;
                let chain = MarkovConfig {
                    n: self.n,
                    epsilon: Some(self.epsilon),
                    initial_weight: None,
                    gates: vec![gates],
                    m: Some(self.m),
                    noise: self.noise,
                    strength: self.strength,
                };
                let t = transition_matrix(self.n, &channel.gate_noise()?)?;
                let dist = evolve(&chain.initial()?, &t, gates)?;
                let r = finite_depth_performance(&dist, self.m)?;
                let est = RoundEstimate {
                    accept: f.accept,
                    accept_and_phi: f.accept_and_phi,
                };
                (est, "markov", r.p_accept, r.p_accept, r.p_accept_and_phi, r.block_fidelity)
            }
        };
        let (bf, bf_se) = est.block_fidelity();
        Ok(vec![vec![
            Cell::Int(self.trials),
            Cell::Float(est.accept.p_hat),
            Cell::Float(est.accept.stderr),
            Cell::Float(est.accept_and_phi.p_hat),
            Cell::Float(est.accept_and_phi.stderr),
            Cell::Float(bf),
            Cell::Float(bf_se),
            Cell::Text(reference.into()),
            Cell::Float(lo),
            Cell::Float(hi),
            Cell::Float(joint),
            Cell::Float(fid),
        ]])
    }
}
