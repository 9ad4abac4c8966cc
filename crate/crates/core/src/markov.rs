//! Error-weight Markov chain of a finite-depth protocol.
//!
//! Instead of a full random Clifford, the protocol applies `G` random
//! two-qubit bilocal Cliffords to uniformly chosen slot pairs. For IID-like
//! inputs only the number of non-identity slots matters, so the state is a
//! distribution over weights `0..=n`, and each noisy gate moves the weight by
//! at most two. Column `w` of the transition matrix is the law of the next
//! weight given current weight `w`.

use serde::{Deserialize, Serialize};

use crate::analytic::{PerformanceReport, ReportExactness};
use crate::error::{domain, Error, Result};
use crate::math::ln_binomial;
use crate::pauli_dist::GateNoise;

/// Probability vector over error weights `0..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightDistribution {
    n: u64,
    probs: Vec<f64>,
}

impl WeightDistribution {
    /// Validates non-negativity and normalisation (to 1e-10).
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return domain("weight distribution needs at least two entries");
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return domain("weight probabilities must be finite and non-negative");
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return domain(format!("weight probabilities sum to {total}, not 1"));
        }
        Ok(Self {
            n: probs.len() as u64 - 1,
            probs,
        })
    }

    /// All mass on weight `w`.
    pub fn point(n: u64, w: u64) -> Result<Self> {
        if w > n {
            return domain(format!("weight {w} exceeds n = {n}"));
        }
        let mut probs = vec![0.0; n as usize + 1];
        probs[w as usize] = 1.0;
        Self::new(probs)
    }

    /// Twirled input of fidelity `f`: `fⁿ` on weight zero, the rest spread
    /// like the stationary distribution.
    pub fn twirled(n: u64, fidelity: f64) -> Result<Self> {
        let phi = fidelity.powi(n as i32);
        let mut probs = stationary_distribution(n)?.probs;
        for p in probs.iter_mut() {
            *p *= 1.0 - phi;
        }
        probs[0] = phi;
        Self::new(probs)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Total-variation-style ℓ₁ distance.
    pub fn l1_distance(&self, other: &Self) -> Result<f64> {
        check_dims(self.n, other.n)?;
        Ok(self.probs.iter().zip(&other.probs).map(|(a, b)| (a - b).abs()).sum())
    }
}

fn check_dims(expected: u64, actual: u64) -> Result<()> {
    if expected != actual {
        return Err(Error::DimensionMismatch {
            expected: expected as usize,
            actual: actual as usize,
        });
    }
    Ok(())
}

/// Pentadiagonal column-stochastic matrix; `bands[w][d]` is `T[w + d - 2][w]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    n: u64,
    bands: Vec<[f64; 5]>,
}

impl TransitionMatrix {
    pub fn n(&self) -> u64 {
        self.n
    }

    /// Entry `T[to][from]`.
    pub fn get(&self, to: u64, from: u64) -> f64 {
        if to > self.n || from > self.n {
            return 0.0;
        }
        let d = to as i64 - from as i64 + 2;
        if (0..5).contains(&d) {
            self.bands[from as usize][d as usize]
        } else {
            0.0
        }
    }

    pub fn column_sum(&self, from: u64) -> f64 {
        self.bands[from as usize].iter().sum()
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let size = self.n as usize + 1;
        let mut t = vec![vec![0.0; size]; size];
        for from in 0..size {
            for to in 0..size {
                t[to][from] = self.get(to as u64, from as u64);
            }
        }
        t
    }

    /// One step `x ↦ T x`.
    pub fn apply(&self, x: &WeightDistribution) -> Result<WeightDistribution> {
        check_dims(self.n, x.n)?;
        let mut out = vec![0.0; x.probs.len()];
        self.apply_into(&x.probs, &mut out);
        Ok(WeightDistribution {
            n: self.n,
            probs: out,
        })
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let last = x.len() - 1;
        for (w, (&xw, band)) in x.iter().zip(&self.bands).enumerate() {
            if xw == 0.0 {
                continue;
            }
            for (d, &t) in band.iter().enumerate() {
                let to = w + d;
                if t != 0.0 && to >= 2 && to - 2 <= last {
                    out[to - 2] += t * xw;
                }
            }
        }
    }
}

/// Weight transition law of one noisy random two-qubit gate.
pub fn transition_matrix(n: u64, noise: &GateNoise) -> Result<TransitionMatrix> {
    if n < 2 {
        return domain(format!("finite-depth chain needs n >= 2, got {n}"));
    }
    GateNoise::new(noise.f0, noise.f1, noise.f2)?;
    let GateNoise { f0, f1, f2 } = *noise;
    let nf = n as f64;
    let pairs = nf * (nf - 1.0);
    let denom = 5.0 * pairs;
    let bands = (0..=n)
        .map(|w| {
            let wf = w as f64;
            // both slots clean, one clean one not, both carrying errors
            let a = (nf - wf) * (nf - wf - 1.0);
            let b = wf * (nf - wf);
            let c = wf * (wf - 1.0);
            [
                f2 * c / pairs,
                (10.0 * f1 * b + 2.0 * (1.0 - f2) * c) / denom,
                (5.0 * f0 * a + 4.0 * (1.0 - f1) * b + 3.0 * (1.0 - f2) * c) / denom,
                (2.0 * (1.0 - f0) * a + 6.0 * (1.0 - f1) * b) / denom,
                3.0 * (1.0 - f0) * a / denom,
            ]
        })
        .collect();
    Ok(TransitionMatrix { n, bands })
}

/// Binomial law of the number of erroneous pairs under IID infidelity `ε`.
pub fn initial_weight_distribution(n: u64, epsilon: f64) -> Result<WeightDistribution> {
    if !(0.0..=1.0).contains(&epsilon) {
        return domain(format!("infidelity {epsilon} outside [0, 1]"));
    }
    if n < 1 {
        return domain("need at least one pair");
    }
    let probs = (0..=n)
        .map(|w| {
            if epsilon == 0.0 {
                return if w == 0 { 1.0 } else { 0.0 };
            }
            if epsilon == 1.0 {
                return if w == n { 1.0 } else { 0.0 };
            }
            (ln_binomial(n, w) + w as f64 * epsilon.ln() + (n - w) as f64 * (-epsilon).ln_1p())
                .exp()
        })
        .collect::<Vec<_>>();
    let total: f64 = probs.iter().sum();
    WeightDistribution::new(probs.into_iter().map(|p| p / total).collect())
}

/// `T^G x`.
pub fn evolve(dist: &WeightDistribution, t: &TransitionMatrix, gates: u64) -> Result<WeightDistribution> {
    check_dims(t.n, dist.n)?;
    let mut cur = dist.probs.clone();
    let mut next = vec![0.0; cur.len()];
    for _ in 0..gates {
        t.apply_into(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(WeightDistribution {
        n: dist.n,
        probs: cur,
    })
}

/// Distributions after each gate count in `checkpoints` (must be sorted),
/// sharing one pass of the chain.
pub fn evolve_checkpoints(
    dist: &WeightDistribution,
    t: &TransitionMatrix,
    checkpoints: &[u64],
) -> Result<Vec<WeightDistribution>> {
    check_dims(t.n, dist.n)?;
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return domain("checkpoints must be sorted");
    }
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut cur = dist.clone();
    let mut done = 0;
    for &g in checkpoints {
        cur = evolve(&cur, t, g - done)?;
        done = g;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Fixed point of the ideal chain on the non-identity sector:
/// `∝ C(n, w)·3ʷ` for `w ≥ 1`, zero at `w = 0`.
pub fn stationary_distribution(n: u64) -> Result<WeightDistribution> {
    if n < 1 {
        return domain("need at least one pair");
    }
    let ln4 = 4f64.ln();
    let norm = -(-(n as f64) * ln4).exp_m1();
    let mut probs = vec![0.0; n as usize + 1];
    for w in 1..=n {
        probs[w as usize] =
            (ln_binomial(n, w) + w as f64 * 3f64.ln() - n as f64 * ln4).exp() / norm;
    }
    WeightDistribution::new(probs)
}

/// Performance of measuring the first `m` slots after a (possibly partial)
/// scramble leaving error weights distributed as `dist`; errors of a given
/// weight are assumed uniform among the strings of that weight.
pub fn finite_depth_performance(dist: &WeightDistribution, m: u64) -> Result<PerformanceReport> {
    let n = dist.n;
    if m < 1 || m >= n {
        return domain(format!("measured count m = {m} must satisfy 1 <= m <= {}", n - 1));
    }
    let k = n - m;
    let ln3 = 3f64.ln();
    let mut p_phi = 0.0;
    let mut p_false = 0.0;
    for (w, &x) in dist.probs.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let w = w as u64;
        let base = -ln_binomial(n, w) - w as f64 * ln3;
        // j errors on the outputs, the remaining w - j on measured slots as Z
        let lo = w.saturating_sub(m);
        let hi = w.min(k);
        for j in lo..=hi {
            let term = (base + ln_binomial(k, j) + ln_binomial(m, w - j) + j as f64 * ln3).exp();
            if j == 0 {
                p_phi += x * term;
            } else {
                p_false += x * term;
            }
        }
    }
    let p_accept = p_phi + p_false;
    let block = if p_accept > 0.0 {
        (p_phi / p_accept, p_false / p_accept)
    } else {
        (0.0, 1.0)
    };
    Ok(PerformanceReport::assemble(
        n,
        k,
        p_accept,
        p_phi,
        block,
        ReportExactness::EXACT,
    ))
}

/// The measured count minimising the output pair infidelity for `dist`;
/// ties go to the smaller `m`.
pub fn best_measured_count(dist: &WeightDistribution) -> Result<(u64, PerformanceReport)> {
    let mut best: Option<(u64, PerformanceReport)> = None;
    for m in 1..dist.n {
        let r = finite_depth_performance(dist, m)?;
        if best.as_ref().is_none_or(|(_, b)| r.pair_infidelity < b.pair_infidelity) {
            best = Some((m, r));
        }
    }
    best.ok_or_else(|| Error::Domain("need n >= 2".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{passive_performance, Fidelity, ProtocolParams};
    use crate::pauli_dist::{gate_noise_amplitude_damping, gate_noise_depolarizing};

    #[test]
    fn ideal_two_slot_columns() {
        let t = transition_matrix(2, &GateNoise::IDEAL).unwrap();
        let d = t.to_dense();
        let col = |w: usize| [d[0][w], d[1][w], d[2][w]];
        assert_eq!(col(0), [1.0, 0.0, 0.0]);
        let c1 = col(1);
        let c2 = col(2);
        for (a, b) in c1.iter().zip([0.0, 0.4, 0.6]) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in c2.iter().zip([0.0, 0.4, 0.6]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn noisy_zero_column() {
        let g = gate_noise_depolarizing(0.01).unwrap();
        let t = transition_matrix(2, &g).unwrap();
        assert!((t.get(0, 0) - g.f0).abs() < 1e-15);
        assert!((t.get(1, 0) - 0.4 * (1.0 - g.f0)).abs() < 1e-15);
        assert!((t.get(2, 0) - 0.6 * (1.0 - g.f0)).abs() < 1e-15);
    }

    #[test]
    fn columns_are_stochastic() {
        let noises = [
            GateNoise::IDEAL,
            gate_noise_depolarizing(1e-2).unwrap(),
            gate_noise_amplitude_damping(1e-2).unwrap(),
        ];
        for noise in &noises {
            for n in [2, 3, 10, 57] {
                let t = transition_matrix(n, noise).unwrap();
                for w in 0..=n {
                    assert!((t.column_sum(w) - 1.0).abs() < 1e-12);
                }
            }
        }
        assert!(transition_matrix(1, &GateNoise::IDEAL).is_err());
    }

    #[test]
    fn stationary_examples() {
        let s = stationary_distribution(2).unwrap();
        assert!((s.probs()[1] - 0.4).abs() < 1e-15 && (s.probs()[2] - 0.6).abs() < 1e-15);
        let s = stationary_distribution(3).unwrap();
        for (a, b) in s.probs().iter().zip([0.0, 1.0 / 7.0, 3.0 / 7.0, 3.0 / 7.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let t = transition_matrix(3, &GateNoise::IDEAL).unwrap();
        let moved = t.apply(&s).unwrap();
        assert!(moved.l1_distance(&s).unwrap() < 1e-14);
    }

    #[test]
    fn initial_examples() {
        let d = initial_weight_distribution(2, 0.5).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.5, 0.25]);
        let d = initial_weight_distribution(2, 0.0).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0, 0.0]);
        assert!(initial_weight_distribution(2, 1.5).is_err());
    }

    #[test]
    fn evolve_examples() {
        let t = transition_matrix(2, &GateNoise::IDEAL).unwrap();
        let d = WeightDistribution::point(2, 0).unwrap();
        assert_eq!(evolve(&d, &t, 1000).unwrap(), d);
        let d = initial_weight_distribution(2, 0.3).unwrap();
        assert_eq!(evolve(&d, &t, 0).unwrap(), d);
        let d = WeightDistribution::point(2, 1).unwrap();
        let e = evolve(&d, &t, 1).unwrap();
        assert!((e.probs()[1] - 0.4).abs() < 1e-15 && (e.probs()[2] - 0.6).abs() < 1e-15);
        let t3 = transition_matrix(3, &GateNoise::IDEAL).unwrap();
        assert!(evolve(&d, &t3, 1).is_err());
    }

    #[test]
    fn performance_examples() {
        let d = WeightDistribution::point(5, 0).unwrap();
        let r = finite_depth_performance(&d, 2).unwrap();
        assert_eq!((r.p_accept, r.p_accept_and_phi), (1.0, 1.0));

        let d = WeightDistribution::point(2, 1).unwrap();
        let r = finite_depth_performance(&d, 1).unwrap();
        assert!((r.p_accept - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.p_accept_and_phi - 1.0 / 6.0).abs() < 1e-15);

        let d = WeightDistribution::twirled(2, 0.8).unwrap();
        let r = finite_depth_performance(&d, 1).unwrap();
        let exact = passive_performance(
            &ProtocolParams::passive(2, 1).unwrap(),
            Fidelity::new(0.8).unwrap(),
        )
        .unwrap();
        assert!((r.p_accept - exact.p_accept).abs() < 1e-12);
        assert!((r.p_accept_and_phi - exact.p_accept_and_phi).abs() < 1e-12);
        assert!((r.pair_infidelity - exact.pair_infidelity).abs() < 1e-12);
        assert!(finite_depth_performance(&d, 2).is_err());
    }

    #[test]
    fn checkpoints_match_direct_evolution() {
        let t = transition_matrix(6, &gate_noise_depolarizing(0.01).unwrap()).unwrap();
        let d = initial_weight_distribution(6, 0.1).unwrap();
        let cps = evolve_checkpoints(&d, &t, &[0, 3, 10]).unwrap();
        assert_eq!(cps[2], evolve(&d, &t, 10).unwrap());
        assert_eq!(cps[0], d);
    }
}
