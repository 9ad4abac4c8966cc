use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::frame::{Pauli, PauliFrame, MAX_SLOTS};
use super::symplectic::sample_clifford;
use crate::error::{domain, Result};
use crate::pauli_dist::{
    enumerate_top_errors, gate_noise_amplitude_damping, gate_noise_depolarizing, GateNoise,
    IidDepolarizing,
};

/// Largest budget the Monte Carlo decoder will tabulate.
pub const MC_ENUMERATION_CAP: u64 = 1_000_000;

/// Binomial proportion estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MCEstimate {
    pub trials: u64,
    pub successes: u64,
    pub p_hat: f64,
    /// `sqrt(p̂(1 - p̂)/trials)`.
    pub stderr: f64,
}

impl MCEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        let p_hat = if trials == 0 {
            0.0
        } else {
            successes as f64 / trials as f64
        };
        let stderr = if trials == 0 {
            0.0
        } else {
            (p_hat * (1.0 - p_hat) / trials as f64).sqrt()
        };
        Self {
            trials,
            successes,
            p_hat,
            stderr,
        }
    }

    /// `|p̂ - target| <= sigmas · stderr`, with a floor of one count to cope
    /// with estimates stuck at 0 or 1.
    pub fn agrees_with(&self, target: f64, sigmas: f64) -> bool {
        let tol = (sigmas * self.stderr).max(1.0 / self.trials.max(1) as f64);
        (self.p_hat - target).abs() <= tol
    }
}

/// Acceptance and acceptance-with-ideal-output estimates of one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundEstimate {
    pub accept: MCEstimate,
    pub accept_and_phi: MCEstimate,
}

impl RoundEstimate {
    fn from_counts(accept: u64, phi: u64, trials: u64) -> Self {
        Self {
            accept: MCEstimate::from_counts(accept, trials),
            accept_and_phi: MCEstimate::from_counts(phi, trials),
        }
    }

    /// Estimated block fidelity `p̂∧Φ / p̂` with a delta-method standard error.
    pub fn block_fidelity(&self) -> (f64, f64) {
        let a = self.accept.p_hat;
        if a == 0.0 {
            return (0.0, 0.0);
        }
        let ratio = self.accept_and_phi.p_hat / a;
        // conditional proportion over the accepted trials
        let accepted = self.accept.successes as f64;
        (ratio, (ratio * (1.0 - ratio) / accepted).sqrt())
    }
}

/// Per-trial generator: stream `trial` of the ChaCha8 keyed by `seed`.
fn trial_rng(base: &ChaCha8Rng, trial: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(trial);
    rng
}

/// Runs `trials` independent indicator pairs; the result does not depend on
/// the worker count.
fn count_pairs<F>(trials: u64, seed: u64, trial: F) -> (u64, u64)
where
    F: Fn(&mut ChaCha8Rng) -> (bool, bool) + Sync,
{
    let base = ChaCha8Rng::seed_from_u64(seed);
    (0..trials)
        .into_par_iter()
        .map(|i| {
            let (a, b) = trial(&mut trial_rng(&base, i));
            (a as u64, b as u64)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1))
}

fn check_round(n: u64, m: u64) -> Result<()> {
    if n < 2 || n > MAX_SLOTS as u64 {
        return domain(format!("Monte Carlo supports 2 <= n <= {MAX_SLOTS}, got {n}"));
    }
    if m < 1 || m >= n {
        return domain(format!("measured count m = {m} must satisfy 1 <= m <= {}", n - 1));
    }
    Ok(())
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return domain("need at least one trial");
    }
    Ok(())
}

fn random_nontrivial<R: Rng + ?Sized>(rng: &mut R) -> Pauli {
    match rng.random_range(0..3) {
        0 => Pauli::X,
        1 => Pauli::Y,
        _ => Pauli::Z,
    }
}

/// Slot-wise IID error: identity with probability `1 - ε`, else uniform X/Y/Z.
pub fn sample_iid_frame<R: Rng + ?Sized>(n: u32, epsilon: f64, rng: &mut R) -> PauliFrame {
    let mut p = PauliFrame::from_masks_unchecked(n, 0, 0);
    for slot in 0..n {
        if rng.random::<f64>() < epsilon {
            p.set(slot, random_nontrivial(rng));
        }
    }
    p
}

/// Uniform string of exactly weight `w`.
pub fn sample_weight_frame<R: Rng + ?Sized>(n: u32, w: u32, rng: &mut R) -> PauliFrame {
    let mut p = PauliFrame::from_masks_unchecked(n, 0, 0);
    let positions = rand::seq::index::sample(rng, n as usize, w as usize);
    for slot in positions.iter() {
        p.set(slot as u32, random_nontrivial(rng));
    }
    p
}

/// Passive round on IID depolarizing input.
pub fn estimate_passive(n: u64, m: u64, epsilon: f64, trials: u64, seed: u64) -> Result<RoundEstimate> {
    check_round(n, m)?;
    check_trials(trials)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return domain(format!("infidelity {epsilon} outside [0, 1]"));
    }
    let (n32, m32) = (n as u32, m as u32);
    let (acc, phi) = count_pairs(trials, seed, |rng| {
        let c = sample_clifford(n32, rng).expect("size checked");
        let p = sample_iid_frame(n32, epsilon, rng);
        let q = c.conjugate_unchecked(&p);
        let accept = q.syndrome(m32) == 0;
        (accept, accept && q.outputs_clean(m32))
    });
    Ok(RoundEstimate::from_counts(acc, phi, trials))
}

/// E-active round: the decoder tabulates the syndromes of the `E + 1` most
/// likely errors under the sampled Clifford, first writer wins.
pub fn estimate_active(
    n: u64,
    m: u64,
    budget: u64,
    epsilon: f64,
    trials: u64,
    seed: u64,
) -> Result<RoundEstimate> {
    check_round(n, m)?;
    check_trials(trials)?;
    let model = IidDepolarizing::new(n, epsilon)?;
    let table_errors = enumerate_top_errors(&model, budget, MC_ENUMERATION_CAP)?;
    let (n32, m32) = (n as u32, m as u32);
    let (acc, phi) = count_pairs(trials, seed, |rng| {
        let c = sample_clifford(n32, rng).expect("size checked");
        let mut table: HashMap<u64, PauliFrame> = HashMap::with_capacity(table_errors.len());
        for e in &table_errors {
            let image = c.conjugate_unchecked(e);
            table.entry(image.syndrome(m32)).or_insert(image);
        }
        let p = sample_iid_frame(n32, epsilon, rng);
        let q = c.conjugate_unchecked(&p);
        match table.get(&q.syndrome(m32)) {
            None => (false, false),
            Some(guess) => {
                let residual = q.mul(guess).expect("same size");
                (true, residual.outputs_clean(m32))
            }
        }
    });
    Ok(RoundEstimate::from_counts(acc, phi, trials))
}

/// Per-gate noise channel of the finite-depth simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GateChannel {
    Ideal,
    /// Two-qubit depolarizing of strength `lambda` on each party's pair of
    /// qubits.
    Depolarizing { lambda: f64 },
    /// Amplitude damping of parameter `gamma` on every qubit.
    AmplitudeDamping { gamma: f64 },
}

impl GateChannel {
    /// Fidelity parameters this channel induces on the weight chain.
    pub fn gate_noise(&self) -> Result<GateNoise> {
        match *self {
            GateChannel::Ideal => Ok(GateNoise::IDEAL),
            GateChannel::Depolarizing { lambda } => gate_noise_depolarizing(lambda),
            GateChannel::AmplitudeDamping { gamma } => gate_noise_amplitude_damping(gamma),
        }
    }

    /// Applies the noise to slots `a` and `b` of the frame.
    fn apply<R: Rng + ?Sized>(&self, frame: &mut PauliFrame, a: u32, b: u32, rng: &mut R) {
        match *self {
            GateChannel::Ideal => {}
            GateChannel::Depolarizing { lambda } => {
                // Alice's and Bob's errors multiply onto the pair labels.
                for _ in 0..2 {
                    if rng.random::<f64>() < lambda {
                        let r: u8 = rng.random_range(1..16);
                        let pa = Pauli::from_bits(r & 1 != 0, r & 2 != 0);
                        let pb = Pauli::from_bits(r & 4 != 0, r & 8 != 0);
                        frame.set(a, mul_single(frame.get(a), pa));
                        frame.set(b, mul_single(frame.get(b), pb));
                    }
                }
            }
            GateChannel::AmplitudeDamping { gamma } => {
                for slot in [a, b] {
                    let next = damp_label(frame.get(slot), gamma, rng);
                    frame.set(slot, next);
                }
            }
        }
    }
}

fn mul_single(p: Pauli, q: Pauli) -> Pauli {
    let (px, pz) = p.bits();
    let (qx, qz) = q.bits();
    Pauli::from_bits(px ^ qx, pz ^ qz)
}

/// Bell-label kernel of damping both halves of a pair: row `σ` lists the
/// overlaps of the damped `Φ_σ` with `Φ_I, Φ_X, Φ_Y, Φ_Z`.
fn damp_label<R: Rng + ?Sized>(label: Pauli, g: f64, rng: &mut R) -> Pauli {
    let fid = 1.0 - g + g * g / 2.0;
    let flip = g * (1.0 - g) / 2.0;
    let row = match label {
        Pauli::I => [fid, flip, flip, g * g / 2.0],
        Pauli::X => [g / 2.0, 1.0 - g, 0.0, g / 2.0],
        Pauli::Y => [g / 2.0, 0.0, 1.0 - g, g / 2.0],
        Pauli::Z => [g * g / 2.0, flip, flip, fid],
    };
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for (p, out) in row.iter().zip([Pauli::I, Pauli::X, Pauli::Y, Pauli::Z]) {
        acc += p;
        if u < acc {
            return out;
        }
    }
    Pauli::Z
}

/// Initial error law of the finite-depth simulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialErrors {
    Iid { epsilon: f64 },
    FixedWeight { weight: u64 },
}

/// Finite-depth estimate plus the pre-measurement weight histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDepthEstimate {
    pub accept: MCEstimate,
    pub accept_and_phi: MCEstimate,
    pub weight_histogram: Vec<u64>,
}

impl FiniteDepthEstimate {
    pub fn weight_frequencies(&self) -> Vec<f64> {
        let t = self.accept.trials as f64;
        self.weight_histogram.iter().map(|&c| c as f64 / t).collect()
    }
}

/// Gate-level simulation of `G` noisy random two-qubit Cliffords on
/// uniformly chosen slot pairs followed by the passive measurement. Noise
/// acts before each gate.
pub fn estimate_finite_depth(
    n: u64,
    m: u64,
    gates: u64,
    channel: GateChannel,
    initial: InitialErrors,
    trials: u64,
    seed: u64,
) -> Result<FiniteDepthEstimate> {
    check_round(n, m)?;
    check_trials(trials)?;
    channel.gate_noise()?;
    match initial {
        InitialErrors::Iid { epsilon } if !(0.0..=1.0).contains(&epsilon) => {
            return domain(format!("infidelity {epsilon} outside [0, 1]"));
        }
        InitialErrors::FixedWeight { weight } if weight > n => {
            return domain(format!("initial weight {weight} exceeds n = {n}"));
        }
        _ => {}
    }
    let (n32, m32) = (n as u32, m as u32);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let size = n as usize + 1;
    let (acc, phi, hist) = (0..trials)
        .into_par_iter()
        .fold(
            || (0u64, 0u64, vec![0u64; size]),
            |(mut acc, mut phi, mut hist), i| {
                let rng = &mut trial_rng(&base, i);
                let mut p = match initial {
                    InitialErrors::Iid { epsilon } => sample_iid_frame(n32, epsilon, rng),
                    InitialErrors::FixedWeight { weight } => {
                        sample_weight_frame(n32, weight as u32, rng)
                    }
                };
                for _ in 0..gates {
                    let a = rng.random_range(0..n32);
                    let mut b = rng.random_range(0..n32 - 1);
                    if b >= a {
                        b += 1;
                    }
                    channel.apply(&mut p, a, b, rng);
                    let pa = p.get(a);
                    let pb = p.get(b);
                    if pa != Pauli::I || pb != Pauli::I {
                        // a uniform two-qubit Clifford sends any non-identity
                        // pair label to a uniform non-identity one
                        let r: u8 = rng.random_range(1..16);
                        p.set(a, Pauli::from_bits(r & 1 != 0, r & 2 != 0));
                        p.set(b, Pauli::from_bits(r & 4 != 0, r & 8 != 0));
                    }
                }
                hist[p.weight() as usize] += 1;
                let accept = p.syndrome(m32) == 0;
                acc += accept as u64;
                phi += (accept && p.outputs_clean(m32)) as u64;
                (acc, phi, hist)
            },
        )
        .reduce(
            || (0u64, 0u64, vec![0u64; size]),
            |(a1, p1, mut h1), (a2, p2, h2)| {
                h1.iter_mut().zip(&h2).for_each(|(x, y)| *x += y);
                (a1 + a2, p1 + p2, h1)
            },
        );
    Ok(FiniteDepthEstimate {
        accept: MCEstimate::from_counts(acc, trials),
        accept_and_phi: MCEstimate::from_counts(phi, trials),
        weight_histogram: hist,
    })
}

/// Rate at which the images of `a` and `b` under a random Clifford share the
/// `m`-bit syndrome.
pub fn estimate_syndrome_collision(
    a: &PauliFrame,
    b: &PauliFrame,
    m: u64,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let n = a.n() as u64;
    check_round(n, m)?;
    check_trials(trials)?;
    a.mul(b)?;
    let m32 = m as u32;
    let (hits, _) = count_pairs(trials, seed, |rng| {
        let c = sample_clifford(a.n(), rng).expect("size checked");
        let same = c.conjugate_unchecked(a).syndrome(m32) == c.conjugate_unchecked(b).syndrome(m32);
        (same, false)
    });
    Ok(MCEstimate::from_counts(hits, trials))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_input_always_accepted() {
        let r = estimate_passive(6, 2, 0.0, 2000, 3).unwrap();
        assert_eq!(r.accept.p_hat, 1.0);
        assert_eq!(r.accept_and_phi.p_hat, 1.0);
        let r = estimate_finite_depth(4, 1, 0, GateChannel::Ideal, InitialErrors::Iid { epsilon: 0.0 }, 100, 1)
            .unwrap();
        assert_eq!(r.accept.p_hat, 1.0);
        assert_eq!(r.weight_histogram[0], 100);
    }

    #[test]
    fn same_seed_same_counts() {
        let a = estimate_passive(5, 2, 0.1, 5000, 9).unwrap();
        let b = estimate_passive(5, 2, 0.1, 5000, 9).unwrap();
        assert_eq!(a, b);
        let c = estimate_passive(5, 2, 0.1, 5000, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn thread_count_does_not_matter() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    (
                        estimate_active(6, 3, 10, 0.1, 3000, 77).unwrap(),
                        estimate_finite_depth(
                            6,
                            2,
                            20,
                            GateChannel::Depolarizing { lambda: 0.05 },
                            InitialErrors::Iid { epsilon: 0.1 },
                            3000,
                            77,
                        )
                        .unwrap(),
                    )
                })
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn parameter_checks() {
        assert!(estimate_passive(1, 1, 0.1, 10, 0).is_err());
        assert!(estimate_passive(3, 3, 0.1, 10, 0).is_err());
        assert!(estimate_passive(3, 1, 0.1, 0, 0).is_err());
        assert!(estimate_passive(65, 1, 0.1, 10, 0).is_err());
        assert!(estimate_active(3, 1, 0, 0.8, 10, 0).is_err());
    }

    #[test]
    fn damping_rows_are_distributions() {
        for g in [0.0f64, 0.3, 1.0] {
            let fid = 1.0 - g + g * g / 2.0;
            let flip = g * (1.0 - g) / 2.0;
            assert!((fid + 2.0 * flip + g * g / 2.0 - 1.0).abs() < 1e-15);
        }
    }
}
