//! Performance models for entanglement distillation with random bilocal
//! Clifford circuits.
//!
//! * [`analytic`]: closed forms for a fully scrambled passive round.
//! * [`pauli_dist`]: IID depolarizing error statistics, active-decoding
//!   bounds and gate-noise parameters.
//! * [`markov`]: finite-depth scrambling as a chain over error weights.
//! * [`mc`]: Monte Carlo simulation on Pauli frames.
//! * [`planner`]: concatenated protocols with minimal expected overhead.
//! * [`repeater`]: nested repeater chains with distillation between swaps.

pub mod analytic;
pub mod error;
pub mod markov;
mod math;
pub mod mc;
pub mod pauli_dist;
pub mod planner;
pub mod repeater;

pub use analytic::{
    expected_overhead, improvement_threshold, passive_performance, syndrome_match_probability,
    twirl_weights, Exactness, Fidelity, Mode, PerformanceReport, ProtocolParams, SyndromeRelation,
};
pub use error::{Error, Result};
pub use math::per_pair_infidelity;
