//! Structured Pauli noise: IID depolarizing inputs, their most likely errors
//! and the resulting active-decoding bounds, plus the three fidelity
//! parameters that describe two-qubit gate noise.

use serde::{Deserialize, Serialize};

use crate::analytic::{PerformanceReport, ProtocolParams, ReportExactness};
use crate::error::{domain, Error, Result};
use crate::math::{binomial, ln_binomial, pow2_neg};
use crate::mc::{Pauli, PauliFrame, MAX_SLOTS};

/// Default cap on explicitly enumerated error strings.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1_000_000;

/// Each pair independently carries X, Y or Z with probability `ε/3` each.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IidDepolarizing {
    pub n: u64,
    pub epsilon: f64,
}

impl IidDepolarizing {
    /// Requires `ε < 3/4` so that lighter strings are never less likely.
    pub fn new(n: u64, epsilon: f64) -> Result<Self> {
        if n < 1 {
            return domain("noise model needs at least one pair");
        }
        if !(0.0..0.75).contains(&epsilon) {
            return domain(format!(
                "per-pair infidelity {epsilon} outside [0, 3/4); weight ordering would fail"
            ));
        }
        Ok(Self { n, epsilon })
    }

    /// `ln` of the probability of one particular string of weight `w`.
    pub fn ln_string_probability(&self, w: u64) -> f64 {
        let clean = (self.n - w) as f64 * (-self.epsilon).ln_1p();
        if w == 0 {
            clean
        } else {
            clean + w as f64 * (self.epsilon / 3.0).ln()
        }
    }

    pub fn string_probability(&self, w: u64) -> f64 {
        self.ln_string_probability(w).exp()
    }

    pub fn frame_probability(&self, frame: &PauliFrame) -> f64 {
        self.string_probability(frame.weight() as u64)
    }

    /// Total mass of all strings of weight `w`.
    pub fn weight_class_mass(&self, w: u64) -> f64 {
        if w > self.n {
            return 0.0;
        }
        (ln_binomial(self.n, w) + w as f64 * 3f64.ln() + self.ln_string_probability(w)).exp()
    }

    /// Number of strings of weight `w`, `C(n, w)·3ʷ`, as a float.
    pub fn weight_class_size(&self, w: u64) -> f64 {
        binomial(self.n, w) * 3f64.powi(w as i32)
    }
}

/// Mass of the most likely error strings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopErrorMass {
    /// `q`, total probability of the covered strings.
    pub q: f64,
    /// `1 - q`, summed directly from the uncovered strings.
    pub tail: f64,
    /// Number of covered strings, `min(E + 1, 4ⁿ)`.
    pub covered: f64,
}

/// Sum of the `E + 1` largest string probabilities, accumulated one weight
/// class at a time with a partial final class.
pub fn top_error_mass(model: &IidDepolarizing, budget: u64) -> Result<TopErrorMass> {
    IidDepolarizing::new(model.n, model.epsilon)?;
    let n = model.n;
    let mut remaining = budget as f64 + 1.0;
    let mut covered = 0.0;
    let mut q = 0.0;
    let mut w = 0;
    let mut tail = 0.0;
    while w <= n {
        let size = model.weight_class_size(w);
        if size <= remaining {
            q += model.weight_class_mass(w);
            covered += size;
            remaining -= size;
            w += 1;
        } else {
            let taken = remaining;
            let p = model.string_probability(w);
            q += taken * p;
            covered += taken;
            tail += (size - taken) * p;
            w += 1;
            break;
        }
        if remaining == 0.0 {
            break;
        }
    }
    // The rest of the distribution is the plain binomial tail.
    let everything = w > n && tail == 0.0;
    while w <= n {
        tail += model.weight_class_mass(w);
        w += 1;
    }
    Ok(TopErrorMass {
        q: if everything { 1.0 } else { q.min(1.0) },
        tail: tail.min(1.0),
        covered,
    })
}

/// Guaranteed performance of an E-active round on IID depolarizing input.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActiveReport {
    pub n: u64,
    pub k: u64,
    pub budget: u64,
    pub q: f64,
    /// `1 - 2⁻ᵐ(E+1)(q⁻¹ - 1)`.
    pub fidelity_lower_bound: f64,
    /// `joint_lower / p_accept_upper`, the block fidelity the acceptance and
    /// joint bounds certify on their own.
    pub certified_fidelity: f64,
    /// `1 - certified_fidelity`, computed without cancellation.
    pub certified_block_infidelity: f64,
    pub p_accept_lower: f64,
    pub p_accept_upper: f64,
    pub joint_lower: f64,
    pub expected_overhead_upper: f64,
}

impl ActiveReport {
    /// View as a bound-valued performance report (certified fidelity).
    pub fn to_performance_report(&self) -> PerformanceReport {
        PerformanceReport::assemble(
            self.n,
            self.k,
            self.p_accept_lower,
            self.joint_lower,
            (self.certified_fidelity, self.certified_block_infidelity),
            ReportExactness::BOUNDS,
        )
    }
}

/// Acceptance, joint and fidelity bounds for an E-active round.
pub fn active_bounds(params: &ProtocolParams, model: &IidDepolarizing) -> Result<ActiveReport> {
    params.validate()?;
    if model.n != params.n {
        return Err(Error::DimensionMismatch {
            expected: params.n as usize,
            actual: model.n as usize,
        });
    }
    let budget = params.budget();
    let top = top_error_mass(model, budget)?;
    Ok(active_bounds_from_mass(params, model.epsilon, &top))
}

/// Same as [`active_bounds`] with a precomputed top-error mass.
pub(crate) fn active_bounds_from_mass(
    params: &ProtocolParams,
    epsilon: f64,
    top: &TopErrorMass,
) -> ActiveReport {
    let (n, m, k) = (params.n, params.m, params.k());
    let e = params.budget() as f64;
    let f_n = (n as f64 * (-epsilon).ln_1p()).exp();
    let s = pow2_neg(m);
    let (q, tail) = (top.q, top.tail);

    let false_accept = (s * (e + 1.0) * tail).min(tail);
    let p_accept_upper = (q + false_accept).min(1.0);
    let miscorrected = s * e * (q - f_n).max(0.0);
    let joint_lower = (q - miscorrected).max(0.0);
    let fidelity_lower_bound = if q > 0.0 {
        1.0 - s * (e + 1.0) * tail / q
    } else {
        f64::NEG_INFINITY
    };
    let certified_block_infidelity = if p_accept_upper > 0.0 {
        ((false_accept + miscorrected) / p_accept_upper).min(1.0)
    } else {
        1.0
    };
    ActiveReport {
        n,
        k,
        budget: params.budget(),
        q,
        fidelity_lower_bound,
        certified_fidelity: 1.0 - certified_block_infidelity,
        certified_block_infidelity,
        p_accept_lower: q,
        p_accept_upper,
        joint_lower,
        expected_overhead_upper: if q > 0.0 {
            n as f64 / (k as f64 * q)
        } else {
            f64::INFINITY
        },
    }
}

/// The `E + 1` most likely strings, identity first, in weight order; within a
/// weight class strings are sorted lexicographically by slot with per-slot
/// order `X < Y < Z < I`.
pub fn enumerate_top_errors(model: &IidDepolarizing, budget: u64, cap: u64) -> Result<Vec<PauliFrame>> {
    IidDepolarizing::new(model.n, model.epsilon)?;
    let requested = budget.saturating_add(1);
    if requested > cap {
        return Err(Error::CapExceeded { requested, cap });
    }
    if model.n > MAX_SLOTS as u64 {
        return domain(format!("explicit enumeration limited to {MAX_SLOTS} pairs"));
    }
    let n = model.n as u32;
    let mut out = Vec::with_capacity(requested.min(1 << 20) as usize);
    let mut frame = PauliFrame::identity(n)?;
    for w in 0..=n {
        if out.len() as u64 >= requested {
            break;
        }
        fill_weight_class(&mut frame, 0, w, requested, &mut out);
    }
    Ok(out)
}

fn fill_weight_class(
    frame: &mut PauliFrame,
    slot: u32,
    weight_left: u32,
    requested: u64,
    out: &mut Vec<PauliFrame>,
) {
    if out.len() as u64 >= requested {
        return;
    }
    if weight_left == 0 {
        out.push(*frame);
        return;
    }
    let slots_left = frame.n() - slot;
    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
        frame.set(slot, p);
        fill_weight_class(frame, slot + 1, weight_left - 1, requested, out);
    }
    frame.set(slot, Pauli::I);
    if slots_left > weight_left {
        fill_weight_class(frame, slot + 1, weight_left, requested, out);
    }
}

/// Fidelity parameters of a noisy two-qubit gate: `f0` is the probability
/// the noise leaves both slots untouched; `f1`, `f2` describe how often it
/// lowers the weight of a two-slot error of weight one or two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateNoise {
    pub f0: f64,
    pub f1: f64,
    pub f2: f64,
}

impl GateNoise {
    pub const IDEAL: Self = Self {
        f0: 1.0,
        f1: 0.0,
        f2: 0.0,
    };

    pub fn new(f0: f64, f1: f64, f2: f64) -> Result<Self> {
        for (name, v) in [("f0", f0), ("f1", f1), ("f2", f2)] {
            if !(0.0..=1.0).contains(&v) {
                return domain(format!("{name} = {v} outside [0, 1]"));
            }
        }
        Ok(Self { f0, f1, f2 })
    }

    pub fn is_ideal(&self) -> bool {
        *self == Self::IDEAL
    }
}

/// Two-sided two-qubit depolarizing noise of strength `λ`.
pub fn gate_noise_depolarizing(lambda: f64) -> Result<GateNoise> {
    if !(0.0..=1.0).contains(&lambda) {
        return domain(format!("depolarizing strength {lambda} outside [0, 1]"));
    }
    let f0 = (1.0 - lambda).powi(2) + lambda * lambda / 15.0;
    let f1 = lambda / 15.0 * (2.0 - 16.0 * lambda / 15.0);
    GateNoise::new(f0, f1, f1)
}

/// Single-qubit amplitude damping with parameter `γ` on every qubit.
pub fn gate_noise_amplitude_damping(gamma: f64) -> Result<GateNoise> {
    if !(0.0..=1.0).contains(&gamma) {
        return domain(format!("damping parameter {gamma} outside [0, 1]"));
    }
    let g = gamma;
    let f0 = (g * g / 2.0 - g + 1.0).powi(2);
    let f1 = g * (g.powi(3) - 2.0 * g + 4.0) / 12.0;
    let f2 = (g * (g + 2.0)).powi(2) / 36.0;
    GateNoise::new(f0, f1, f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn depolarizing_examples() {
        assert!(gate_noise_depolarizing(0.0).unwrap().is_ideal());
        let g = gate_noise_depolarizing(1.0).unwrap();
        assert!(close(g.f0, 1.0 / 15.0, 1e-15));
        assert!(close(g.f1, 0.0622222222222222, 1e-14));
        assert_eq!(g.f1, g.f2);
        let g = gate_noise_depolarizing(0.01).unwrap();
        assert!(close(g.f0, 0.98010667, 1e-8));
        assert!(close(g.f1, 0.00132622, 1e-8));
        assert!(gate_noise_depolarizing(1.5).is_err());
    }

    #[test]
    fn amplitude_damping_examples() {
        assert!(gate_noise_amplitude_damping(0.0).unwrap().is_ideal());
        let g = gate_noise_amplitude_damping(1.0).unwrap();
        for v in [g.f0, g.f1, g.f2] {
            assert!(close(v, 0.25, 1e-15));
        }
        let g = gate_noise_amplitude_damping(0.1).unwrap();
        assert!(close(g.f0, 0.819025, 1e-12));
        assert!(close(g.f1, 0.031675, 1e-12));
        assert!(close(g.f2, 0.001225, 1e-12));
        assert!(gate_noise_amplitude_damping(-0.1).is_err());
    }

    #[test]
    fn top_mass_examples() {
        let m = IidDepolarizing::new(2, 0.1).unwrap();
        let t = top_error_mass(&m, 0).unwrap();
        assert!(close(t.q, 0.81, 1e-15));
        assert!(close(t.tail, 0.19, 1e-15));
        let t = top_error_mass(&m, 6).unwrap();
        assert!(close(t.q, 0.99, 1e-15));
        assert_eq!(t.covered, 7.0);
        let t = top_error_mass(&m, 15).unwrap();
        assert!(close(t.q, 1.0, 1e-15));
        assert_eq!(t.tail, 0.0);
        let t = top_error_mass(&m, 100).unwrap();
        assert_eq!(t.covered, 16.0);

        let m = IidDepolarizing::new(10, 0.1).unwrap();
        let t = top_error_mass(&m, 30).unwrap();
        let expect = 0.9f64.powi(10) + 30.0 * 0.9f64.powi(9) * (0.1 / 3.0);
        assert!(close(t.q, expect, 1e-14));
        assert!(close(t.q, 0.736099, 1e-6));
        assert!(close(t.q + t.tail, 1.0, 1e-14));

        assert!(IidDepolarizing::new(3, 0.75).is_err());
    }

    #[test]
    fn large_budget_without_enumeration() {
        let m = IidDepolarizing::new(300, 0.1).unwrap();
        let t = top_error_mass(&m, 3_000_000).unwrap();
        assert!(t.q > 0.0 && t.q < 1.0);
        assert!(close(t.q + t.tail, 1.0, 1e-12));
        assert_eq!(t.covered, 3_000_001.0);
    }

    #[test]
    fn enumeration_examples() {
        let m = IidDepolarizing::new(2, 0.1).unwrap();
        let e = enumerate_top_errors(&m, 0, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.len(), 1);
        assert!(e[0].is_identity());
        let e = enumerate_top_errors(&m, 3, DEFAULT_ENUMERATION_CAP).unwrap();
        let s: Vec<String> = e.iter().map(|p| p.to_string()).collect();
        assert_eq!(s, ["II", "XI", "YI", "ZI"]);
        let e = enumerate_top_errors(&m, 20, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(e.len(), 16);
        assert_eq!(e[6].to_string(), "IZ");
        assert_eq!(e[7].to_string(), "XX");
        assert!(matches!(
            enumerate_top_errors(&m, 10, 5),
            Err(Error::CapExceeded { requested: 11, cap: 5 })
        ));
        let m = IidDepolarizing::new(1, 0.3).unwrap();
        assert_eq!(enumerate_top_errors(&m, 3, 10).unwrap().len(), 4);
    }

    #[test]
    fn active_examples() {
        let p = ProtocolParams::active(2, 1, 0).unwrap();
        let r = active_bounds(&p, &IidDepolarizing::new(2, 0.1).unwrap()).unwrap();
        assert!(close(r.fidelity_lower_bound, 1.0 - 0.5 * (1.0 / 0.81 - 1.0), 1e-14));
        assert!(close(r.fidelity_lower_bound, 0.882716, 1e-6));
        // E = 0: certified ratio is the simple passive bound
        assert!(close(r.certified_fidelity, 0.81 / (0.81 + 0.5 * 0.19), 1e-14));

        let p = ProtocolParams::active(10, 5, 30).unwrap();
        let r = active_bounds(&p, &IidDepolarizing::new(10, 0.1).unwrap()).unwrap();
        assert!(close(r.fidelity_lower_bound, 0.652690, 1e-6));
        assert!(close(r.p_accept_lower, 0.736099, 1e-6));
        assert!(close(r.p_accept_upper, 0.736099 + 31.0 / 32.0 * 0.263901, 1e-6));
        assert!(r.joint_lower <= r.p_accept_upper);
        assert!(r.certified_fidelity <= 1.0);

        let p = ProtocolParams::active(5, 4, 0).unwrap();
        let r = active_bounds(&p, &IidDepolarizing::new(5, 0.0).unwrap()).unwrap();
        assert_eq!(r.fidelity_lower_bound, 1.0);
        assert_eq!((r.p_accept_lower, r.p_accept_upper), (1.0, 1.0));
        assert_eq!(r.certified_fidelity, 1.0);
    }
}
