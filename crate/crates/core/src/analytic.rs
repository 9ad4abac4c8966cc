//! Closed-form performance of the passive random bilocal Clifford round.
//!
//! A uniformly random bilocal Clifford `C ⊗ C*` twirls any `n`-pair input with
//! fidelity `fⁿ` into a mixture of `Φ^{⊗n}` (weight `fⁿ`) and an equal share of
//! every non-identity Pauli error. Everything in this module follows from that
//! two-component form: acceptance happens when the first `m` slots carry no X/Y
//! component, and the output is ideal when additionally the last `k = n - m`
//! slots are error free.
//!
//! Powers such as `4⁻ⁿ` and `fⁿ` are evaluated through `exp2`/`exp` of their
//! logarithms and the block infidelity is formed from its own closed form
//! rather than as `1 - p_accept∧Φ / p_accept`, so values down to `1e-300` and
//! `n` in the thousands stay representable.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::math::{per_pair_infidelity, pow2_neg, pow4_neg};

/// Single-pair fidelity `f = 1 - ε`, stored through its infidelity so that
/// `ε` near `1e-15` survives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fidelity {
    epsilon: f64,
}

impl Fidelity {
    /// Fidelity `f ∈ (0, 1]`.
    pub fn new(f: f64) -> Result<Self> {
        if !(f > 0.0 && f <= 1.0) {
            return domain(format!("fidelity {f} outside (0, 1]"));
        }
        Ok(Self { epsilon: 1.0 - f })
    }

    /// Infidelity `ε ∈ [0, 1)`.
    pub fn from_infidelity(epsilon: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&epsilon) {
            return domain(format!("infidelity {epsilon} outside [0, 1)"));
        }
        Ok(Self { epsilon })
    }

    /// Per-pair fidelity of a product of pairs: the geometric mean of the
    /// individual fidelities.
    pub fn geometric_mean(fidelities: &[f64]) -> Result<Self> {
        if fidelities.is_empty() {
            return domain("geometric mean of no fidelities");
        }
        let mut ln_sum = 0.0;
        for &f in fidelities {
            ln_sum += Self::new(f)?.ln_value();
        }
        let ln_mean = ln_sum / fidelities.len() as f64;
        Self::from_infidelity(-ln_mean.exp_m1())
    }

    pub fn value(&self) -> f64 {
        1.0 - self.epsilon
    }

    pub fn infidelity(&self) -> f64 {
        self.epsilon
    }

    /// `ln f`.
    pub fn ln_value(&self) -> f64 {
        (-self.epsilon).ln_1p()
    }

    /// `fⁿ`.
    pub fn block(&self, n: u64) -> f64 {
        (n as f64 * self.ln_value()).exp()
    }

    /// `1 - fⁿ`.
    pub fn block_complement(&self, n: u64) -> f64 {
        -(n as f64 * self.ln_value()).exp_m1()
    }
}

/// Decoding strategy of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Reject on any non-zero syndrome.
    Passive,
    /// Correct the `budget + 1` most likely Pauli errors through a lookup table.
    Active { budget: u64 },
}

/// One distillation round: `n` inputs, `m` measured, `k = n - m` outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: u64,
    pub m: u64,
    pub mode: Mode,
}

impl ProtocolParams {
    pub fn passive(n: u64, m: u64) -> Result<Self> {
        Self::new(n, m, Mode::Passive)
    }

    pub fn active(n: u64, m: u64, budget: u64) -> Result<Self> {
        Self::new(n, m, Mode::Active { budget })
    }

    pub fn new(n: u64, m: u64, mode: Mode) -> Result<Self> {
        let p = Self { n, m, mode };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return domain(format!("need at least 2 input pairs, got n = {}", self.n));
        }
        if self.m < 1 || self.m >= self.n {
            return domain(format!(
                "measured count m = {} must satisfy 1 <= m <= n - 1 = {}",
                self.m,
                self.n - 1
            ));
        }
        Ok(())
    }

    pub fn k(&self) -> u64 {
        self.n - self.m
    }

    /// Error budget `E`; zero for passive rounds.
    pub fn budget(&self) -> u64 {
        match self.mode {
            Mode::Passive => 0,
            Mode::Active { budget } => budget,
        }
    }

    /// `E = 0` behaves exactly like the passive strategy.
    pub fn is_effectively_passive(&self) -> bool {
        self.budget() == 0
    }
}

/// Whether a reported quantity is exact or only a guaranteed bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exactness {
    Exact,
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportExactness {
    pub p_accept: Exactness,
    pub p_accept_and_phi: Exactness,
    pub fidelity: Exactness,
    pub expected_overhead: Exactness,
}

impl ReportExactness {
    pub const EXACT: Self = Self {
        p_accept: Exactness::Exact,
        p_accept_and_phi: Exactness::Exact,
        fidelity: Exactness::Exact,
        expected_overhead: Exactness::Exact,
    };

    pub const BOUNDS: Self = Self {
        p_accept: Exactness::Bound,
        p_accept_and_phi: Exactness::Bound,
        fidelity: Exactness::Bound,
        expected_overhead: Exactness::Bound,
    };

    pub fn is_exact(&self) -> bool {
        *self == Self::EXACT
    }
}

/// Performance of a single round.
///
/// For bound reports `p_accept` is a lower bound, `p_accept_and_phi` a lower
/// bound, fidelities lower bounds and `expected_overhead` an upper bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub n: u64,
    pub k: u64,
    pub p_accept: f64,
    pub p_accept_and_phi: f64,
    /// `(1 - ε̄)^k`.
    pub block_fidelity: f64,
    /// `1 - (1 - ε̄)^k`, carried separately to keep precision near zero.
    pub block_infidelity: f64,
    /// ε̄.
    pub pair_infidelity: f64,
    pub expected_overhead: f64,
    pub exactness: ReportExactness,
}

impl PerformanceReport {
    /// Assemble a report from the acceptance probabilities and the block
    /// fidelity and infidelity, each computed without cancellation.
    pub(crate) fn assemble(
        n: u64,
        k: u64,
        p_accept: f64,
        p_accept_and_phi: f64,
        (block_fidelity, block_infidelity): (f64, f64),
        exactness: ReportExactness,
    ) -> Self {
        let block_fidelity = block_fidelity.clamp(0.0, 1.0);
        let block_infidelity = block_infidelity.clamp(0.0, 1.0);
        // the k-th root is taken from whichever side is small
        let pair_infidelity = if block_fidelity < 0.5 {
            -(block_fidelity.ln() / k as f64).exp_m1()
        } else {
            per_pair_infidelity(block_infidelity, k)
        };
        let expected_overhead = if p_accept > 0.0 {
            n as f64 / (k as f64 * p_accept)
        } else {
            f64::INFINITY
        };
        Self {
            n,
            k,
            p_accept,
            p_accept_and_phi,
            block_fidelity,
            block_infidelity,
            pair_infidelity,
            expected_overhead,
            exactness,
        }
    }

    /// Report from acceptance probabilities alone (`block = p∧Φ / p`).
    pub fn from_probabilities(n: u64, k: u64, p_accept: f64, p_accept_and_phi: f64) -> Self {
        let block = if p_accept > 0.0 {
            (p_accept_and_phi / p_accept, (p_accept - p_accept_and_phi) / p_accept)
        } else {
            (0.0, 1.0)
        };
        Self::assemble(
            n,
            k,
            p_accept,
            p_accept_and_phi,
            block,
            ReportExactness::EXACT,
        )
    }
}

/// Coefficients of the twirled state: `(fⁿ, (1 - fⁿ)/(4ⁿ - 1))`, the weight
/// of `Φ^{⊗n}` and of each of the `4ⁿ - 1` non-identity Pauli errors.
pub fn twirl_weights(fidelity: Fidelity, n: u64) -> Result<(f64, f64)> {
    if n < 1 {
        return domain("twirl needs at least one pair");
    }
    let phi = fidelity.block(n);
    // (1 - fⁿ) 4⁻ⁿ / (1 - 4⁻ⁿ)
    let per_pauli = fidelity.block_complement(n) * pow4_neg(n) / (1.0 - pow4_neg(n));
    Ok((phi, per_pauli))
}

/// Exact performance of a passive round on an input of per-pair fidelity `f`.
pub fn passive_performance(params: &ProtocolParams, fidelity: Fidelity) -> Result<PerformanceReport> {
    params.validate()?;
    if !params.is_effectively_passive() {
        return domain("passive_performance needs a passive round (or budget 0)");
    }
    let (n, m, k) = (params.n, params.m, params.k());
    let f_n = fidelity.block(n);
    let miss = fidelity.block_complement(n);
    let q_n = pow4_neg(n);
    // share of non-identity errors with only I/Z on the measured slots: (2^m 4^k - 1)/(4^n - 1)
    let accept_share = (pow2_neg(m) - q_n) / (1.0 - q_n);
    // share that is additionally the identity on the outputs: (2^m - 1)/(4^n - 1)
    let phi_share = (m as f64 - 2.0 * n as f64).exp2() * (1.0 - pow2_neg(m)) / (1.0 - q_n);
    // their difference, 2^-m (1 - 4^-k)/(1 - 4^-n), without cancellation
    let false_accept_share = pow2_neg(m) * (1.0 - pow4_neg(k)) / (1.0 - q_n);

    let p_accept = f_n + miss * accept_share;
    let p_accept_and_phi = f_n + miss * phi_share;
    let block = (p_accept_and_phi / p_accept, miss * false_accept_share / p_accept);
    Ok(PerformanceReport::assemble(
        n,
        k,
        p_accept,
        p_accept_and_phi,
        block,
        ReportExactness::EXACT,
    ))
}

/// Simple lower bound `fⁿ / (fⁿ + 2⁻ᵐ(1 - fⁿ))` on the block fidelity of a
/// passive round, returned as the matching block infidelity
/// `2⁻ᵐ(1 - fⁿ) / (fⁿ + 2⁻ᵐ(1 - fⁿ))`.
pub fn passive_block_infidelity_bound(params: &ProtocolParams, fidelity: Fidelity) -> f64 {
    block_bound_pair(params, fidelity).1
}

/// `(fⁿ, 2⁻ᵐ(1 - fⁿ))` normalized to `(fidelity, infidelity)` of the bound.
fn block_bound_pair(params: &ProtocolParams, fidelity: Fidelity) -> (f64, f64) {
    let f_n = fidelity.block(params.n);
    let x = pow2_neg(params.m) * fidelity.block_complement(params.n);
    (f_n / (f_n + x), x / (f_n + x))
}

/// The weaker linear bound `1 - 2⁻ᵐ(f⁻ⁿ - 1)`; may be negative.
pub fn passive_linear_fidelity_bound(params: &ProtocolParams, fidelity: Fidelity) -> f64 {
    let ratio = (-(params.n as f64) * fidelity.ln_value()).exp_m1();
    1.0 - pow2_neg(params.m) * ratio
}

/// Passive performance computed from guaranteed bounds only: acceptance
/// `p ≥ fⁿ` and block fidelity `≥ fⁿ/(fⁿ + 2⁻ᵐ(1-fⁿ))`.
pub fn passive_bound_performance(
    params: &ProtocolParams,
    fidelity: Fidelity,
) -> Result<PerformanceReport> {
    params.validate()?;
    let f_n = fidelity.block(params.n);
    Ok(PerformanceReport::assemble(
        params.n,
        params.k(),
        f_n,
        f_n,
        block_bound_pair(params, fidelity),
        ReportExactness::BOUNDS,
    ))
}

/// Expected input pairs consumed per output pair, `n / (k · p_accept)`.
pub fn expected_overhead(n: u64, k: u64, p_accept: f64) -> Result<f64> {
    if k < 1 || n < k {
        return domain(format!("need n >= k >= 1, got n = {n}, k = {k}"));
    }
    if !(p_accept > 0.0 && p_accept <= 1.0) {
        return domain(format!("acceptance probability {p_accept} outside (0, 1]"));
    }
    Ok(n as f64 / (k as f64 * p_accept))
}

/// Where passive rounds start improving fidelity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImprovementThreshold {
    /// `-log₂ f`: above this measured fraction the block fidelity tends to one
    /// as `n` grows, below it the block fidelity decays.
    pub critical_fraction: f64,
    /// Real-valued sufficient condition `log₂((1 - fⁿ)/(f^{n-1}(1 - f)))`.
    pub sufficient_m: f64,
    /// Smallest `m ∈ [1, n-1]` whose exact block fidelity exceeds `f`;
    /// `None` when no such `m` exists.
    pub min_m: Option<u64>,
}

/// Measured fraction at which the passive block fidelity changes behaviour,
/// together with the smallest `m` for which one round beats the input
/// single-pair fidelity.
pub fn improvement_threshold(n: u64, fidelity: Fidelity) -> Result<ImprovementThreshold> {
    let f = fidelity.value();
    if !(f > 0.0 && f < 1.0) {
        return domain(format!("fidelity {f} must lie strictly inside (0, 1)"));
    }
    if n < 2 {
        return domain("need at least 2 pairs");
    }
    let critical_fraction = -fidelity.ln_value() / std::f64::consts::LN_2;
    let ln_miss = fidelity.block_complement(n).ln();
    let sufficient_m = (ln_miss - (n as f64 - 1.0) * fidelity.ln_value() - fidelity.infidelity().ln())
        / std::f64::consts::LN_2;

    let beats = |m: u64| -> Result<bool> {
        let report = passive_performance(&ProtocolParams::passive(n, m)?, fidelity)?;
        Ok(report.block_fidelity > f)
    };
    // Start from the rounded sufficient condition, then walk to the exact
    // boundary; block fidelity is increasing in m.
    let start = crate::math::ceil_tolerant(sufficient_m).clamp(1.0, (n - 1) as f64) as u64;
    let min_m = if beats(start)? {
        let mut m = start;
        while m > 1 && beats(m - 1)? {
            m -= 1;
        }
        Some(m)
    } else {
        let mut found = None;
        for m in start + 1..n {
            if beats(m)? {
                found = Some(m);
                break;
            }
        }
        found
    };
    Ok(ImprovementThreshold {
        critical_fraction,
        sufficient_m,
        min_m,
    })
}

/// Relation between two Pauli errors whose syndromes are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyndromeRelation {
    Equal,
    CommuteDistinct,
    Anticommute,
}

/// Probability over a uniformly random Clifford that two errors in the given
/// relation produce the same `m`-bit syndrome.
pub fn syndrome_match_probability(n: u64, m: u64, relation: SyndromeRelation) -> Result<f64> {
    if n < 2 || m < 1 || m >= n {
        return Err(Error::Domain(format!(
            "syndrome statistics need 1 <= m <= n - 1, got n = {n}, m = {m}"
        )));
    }
    Ok(match relation {
        SyndromeRelation::Equal => 1.0,
        // the product of the images is a uniform non-identity Pauli whatever
        // the commutation; the syndromes agree iff it has no X on the
        // measured slots: (2^(2n-m) - 1)/(4^n - 1) <= 2^-m
        SyndromeRelation::CommuteDistinct | SyndromeRelation::Anticommute => {
            let t = pow4_neg(n);
            (pow2_neg(m) - t) / (1.0 - t)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fid(f: f64) -> Fidelity {
        Fidelity::new(f).unwrap()
    }

    #[test]
    fn twirl_weight_examples() {
        assert_eq!(twirl_weights(fid(1.0), 5).unwrap(), (1.0, 0.0));
        let (phi, each) = twirl_weights(fid(0.8), 2).unwrap();
        assert!((phi - 0.64).abs() < 1e-15);
        assert!((each - 0.024).abs() < 1e-15);
        assert!((phi + 15.0 * each - 1.0).abs() < 1e-12);
        let (phi, each) = twirl_weights(fid(0.5), 1).unwrap();
        assert!((phi - 0.5).abs() < 1e-15);
        assert!((each - 1.0 / 6.0).abs() < 1e-15);
        assert!(twirl_weights(fid(0.5), 0).is_err());
    }

    #[test]
    fn fidelity_domain() {
        assert!(Fidelity::new(0.0).is_err());
        assert!(Fidelity::new(1.2).is_err());
        assert!(Fidelity::new(f64::NAN).is_err());
        assert!(Fidelity::from_infidelity(1.0).is_err());
        let g = Fidelity::geometric_mean(&[0.9, 0.9, 0.9]).unwrap();
        assert!((g.value() - 0.9).abs() < 1e-15);
        let g = Fidelity::geometric_mean(&[0.5, 0.8]).unwrap();
        assert!((g.value() - 0.4f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn passive_examples() {
        let r = passive_performance(&ProtocolParams::passive(2, 1).unwrap(), fid(1.0)).unwrap();
        assert_eq!(r.p_accept, 1.0);
        assert_eq!(r.p_accept_and_phi, 1.0);
        assert_eq!(r.pair_infidelity, 0.0);
        assert_eq!(r.expected_overhead, 2.0);

        let r = passive_performance(&ProtocolParams::passive(2, 1).unwrap(), fid(0.8)).unwrap();
        assert!((r.p_accept - 0.808).abs() < 1e-14);
        assert!((r.p_accept_and_phi - 0.664).abs() < 1e-14);
        let expected_eps = 1.0 - 0.664 / 0.808;
        assert!((r.pair_infidelity - expected_eps).abs() < 1e-14);
        assert!((r.pair_infidelity - 0.178218).abs() < 1e-6);
        assert!((r.expected_overhead - 2.0 / 0.808).abs() < 1e-12);
        assert!(r.exactness.is_exact());

        assert!(ProtocolParams::passive(3, 0).is_err());
        assert!(ProtocolParams::passive(3, 3).is_err());
        assert!(ProtocolParams::passive(1, 1).is_err());
    }

    #[test]
    fn active_budget_zero_counts_as_passive() {
        let p = ProtocolParams::active(4, 2, 0).unwrap();
        assert!(passive_performance(&p, fid(0.9)).is_ok());
        let p = ProtocolParams::active(4, 2, 3).unwrap();
        assert!(passive_performance(&p, fid(0.9)).is_err());
    }

    #[test]
    fn large_n_stays_finite() {
        for &(n, m) in &[(300u64, 100u64), (600, 300), (2000, 900)] {
            let r = passive_performance(&ProtocolParams::passive(n, m).unwrap(), fid(0.999)).unwrap();
            assert!(r.p_accept.is_finite() && r.p_accept > 0.0);
            assert!(r.pair_infidelity > 0.0 && r.pair_infidelity < 1e-3);
        }
        // tiny output infidelities are resolved rather than rounded to zero
        let r = passive_performance(&ProtocolParams::passive(300, 60).unwrap(), fid(1.0 - 1e-6)).unwrap();
        assert!(r.pair_infidelity > 0.0 && r.pair_infidelity < 1e-20);
    }

    #[test]
    fn overhead_examples() {
        assert!((expected_overhead(10, 5, 0.8).unwrap() - 2.5).abs() < 1e-15);
        assert_eq!(expected_overhead(7, 7, 1.0).unwrap(), 1.0);
        assert!((expected_overhead(2, 1, 0.808).unwrap() - 2.475247524752475).abs() < 1e-12);
        assert!(expected_overhead(2, 1, 0.0).is_err());
        assert!(expected_overhead(2, 3, 0.5).is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = improvement_threshold(17, fid(0.5)).unwrap();
        assert!((t.critical_fraction - 1.0).abs() < 1e-15);

        let t = improvement_threshold(10, fid(0.8)).unwrap();
        assert!((t.sufficient_m - 5.0553).abs() < 1e-3);
        assert_eq!(t.min_m, Some(6));
        // brute-force scan of the exact ratio
        let scan = (1..10)
            .find(|&m| {
                let r = passive_performance(&ProtocolParams::passive(10, m).unwrap(), fid(0.8)).unwrap();
                r.p_accept_and_phi / r.p_accept > 0.8
            })
            .unwrap();
        assert_eq!(scan, 6);

        let t = improvement_threshold(2, fid(0.999)).unwrap();
        assert_eq!(t.min_m, Some(1));

        let t = improvement_threshold(2, fid(0.3)).unwrap();
        assert_eq!(t.min_m, None);

        assert!(improvement_threshold(5, fid(1.0)).is_err());
    }

    #[test]
    fn syndrome_examples() {
        assert_eq!(syndrome_match_probability(5, 3, SyndromeRelation::Equal).unwrap(), 1.0);
        let p = syndrome_match_probability(5, 3, SyndromeRelation::Anticommute).unwrap();
        assert!((p - 127.0 / 1023.0).abs() < 1e-15);
        assert!(p < 0.125);
        let p = syndrome_match_probability(2, 1, SyndromeRelation::CommuteDistinct).unwrap();
        // 7 of the 15 non-identity products carry no X on the measured slot
        assert!((p - 7.0 / 15.0).abs() < 1e-15);
        assert!(syndrome_match_probability(2, 2, SyndromeRelation::Equal).is_err());
    }

    #[test]
    fn tiny_block_fidelity_keeps_its_digits() {
        // block fidelity ~1e-13; pair infidelity from exact rational arithmetic
        let p = ProtocolParams::passive(44, 1).unwrap();
        let r = passive_performance(&p, Fidelity::new(0.5001361822619728).unwrap()).unwrap();
        assert!((r.block_fidelity / 1.1505727388513475e-13 - 1.0).abs() < 1e-12);
        assert!((r.pair_infidelity - 0.4998606502673949).abs() < 1e-14);
    }
}
