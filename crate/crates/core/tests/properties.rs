use clifford_distill::analytic::{
    passive_block_infidelity_bound, passive_linear_fidelity_bound, passive_performance,
    syndrome_match_probability, twirl_weights, Fidelity, ProtocolParams, SyndromeRelation,
};
use clifford_distill::markov::{
    evolve, initial_weight_distribution, stationary_distribution, transition_matrix,
    WeightDistribution,
};
use clifford_distill::mc::{estimate_passive, sample_clifford, PauliFrame};
use clifford_distill::pauli_dist::{
    active_bounds, enumerate_top_errors, gate_noise_amplitude_damping, gate_noise_depolarizing,
    top_error_mass, GateNoise, IidDepolarizing,
};
use clifford_distill::planner::{
    evaluate_chain, plan_concatenation, recipe_next_infidelity, recipe_overhead_bound, Objective,
    PlanOptions,
};
use clifford_distill::repeater::{heuristic_search, RepeaterPlan};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn round() -> impl Strategy<Value = (u64, u64)> {
    (2u64..=50).prop_flat_map(|n| (Just(n), 1..n))
}

fn fid(f: f64) -> Fidelity {
    Fidelity::new(f).unwrap()
}

proptest! {
    #[test]
    fn twirl_weights_normalize(n in 1u64..=40, f in 1e-9f64..=1.0) {
        let (phi, each) = twirl_weights(fid(f), n).unwrap();
        let rest = each * (4f64.powi(n as i32) - 1.0);
        prop_assert!((phi + rest - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fidelity_bound_chain((n, m) in round(), f in 0.5f64..1.0) {
        let p = ProtocolParams::passive(n, m).unwrap();
        let r = passive_performance(&p, fid(f)).unwrap();
        let fn_ = (n as f64 * f.ln()).exp();
        let s = 0.5f64.powi(m as i32);
        let ratio = fn_ / (fn_ + s * (1.0 - fn_));
        let linear = 1.0 - s * (1.0 / fn_ - 1.0);
        prop_assert!(r.block_fidelity >= ratio - 1e-12);
        prop_assert!(ratio >= linear - 1e-12);
        prop_assert!((passive_linear_fidelity_bound(&p, fid(f)) - linear).abs() < 1e-9 * linear.abs().max(1.0));
        prop_assert!(passive_block_infidelity_bound(&p, fid(f)) >= r.block_infidelity * (1.0 - 1e-12));
    }

    #[test]
    fn acceptance_between_bounds((n, m) in round(), f in 1e-9f64..=1.0) {
        let r = passive_performance(&ProtocolParams::passive(n, m).unwrap(), fid(f)).unwrap();
        let fn_ = (n as f64 * f.ln()).exp();
        prop_assert!(r.p_accept >= fn_ - 1e-15);
        prop_assert!(r.p_accept <= fn_ + 0.5f64.powi(m as i32) * (1.0 - fn_) + 1e-15);
        prop_assert!(r.p_accept_and_phi <= r.p_accept);
    }

    #[test]
    fn one_round_always_improves((n, m) in round(), f in 0.5f64..0.9999) {
        let r = passive_performance(&ProtocolParams::passive(n, m).unwrap(), fid(f)).unwrap();
        prop_assert!(r.pair_infidelity < 1.0 - f);
    }

    #[test]
    fn syndrome_collisions_never_beat_random_syndromes((n, m) in round()) {
        let s = 0.5f64.powi(m as i32);
        for rel in [SyndromeRelation::CommuteDistinct, SyndromeRelation::Anticommute] {
            let p = syndrome_match_probability(n, m, rel).unwrap();
            prop_assert!(p > 0.0 && p <= s);
        }
    }

    #[test]
    fn top_mass_is_monotone_in_budget(n in 1u64..=60, eps in 0.0f64..0.7, e in 0u64..5000, extra in 1u64..5000) {
        let model = IidDepolarizing::new(n, eps).unwrap();
        let a = top_error_mass(&model, e).unwrap();
        let b = top_error_mass(&model, e + extra).unwrap();
        prop_assert!(b.q >= a.q - 1e-15);
        prop_assert!((a.q + a.tail - 1.0).abs() < 1e-12);
    }

    #[test]
    fn active_bounds_are_ordered((n, m) in (2u64..=40).prop_flat_map(|n| (Just(n), 1..n)), eps in 1e-4f64..0.3, e in 0u64..100_000) {
        let params = ProtocolParams::active(n, m, e).unwrap();
        let b = active_bounds(&params, &IidDepolarizing::new(n, eps).unwrap()).unwrap();
        prop_assert!(b.p_accept_lower <= b.p_accept_upper && b.p_accept_upper <= 1.0);
        prop_assert!(b.joint_lower <= b.p_accept_lower);
        prop_assert!(b.certified_fidelity >= 0.0 && b.certified_fidelity <= 1.0);
        prop_assert!((b.certified_fidelity + b.certified_block_infidelity - 1.0).abs() < 1e-12);
        prop_assert!(b.fidelity_lower_bound <= 1.0);
    }

    #[test]
    fn budgetless_active_round_reproduces_passive_bounds((n, m) in round(), eps in 1e-4f64..0.4) {
        let b = active_bounds(&ProtocolParams::active(n, m, 0).unwrap(), &IidDepolarizing::new(n, eps).unwrap()).unwrap();
        let p = ProtocolParams::passive(n, m).unwrap();
        let f = Fidelity::from_infidelity(eps).unwrap();
        let linear = passive_linear_fidelity_bound(&p, f);
        prop_assert!((b.fidelity_lower_bound - linear).abs() < 1e-9 * linear.abs().max(1.0));
        let fn_ = (n as f64 * (-eps).ln_1p()).exp();
        let ratio = fn_ / (fn_ + 0.5f64.powi(m as i32) * (1.0 - fn_));
        prop_assert!((b.certified_fidelity - ratio).abs() < 1e-12);
    }

    #[test]
    fn chains_are_column_stochastic(n in 2u64..=100, lambda in 0.0f64..=1.0, gamma in 0.0f64..=1.0) {
        for noise in [gate_noise_depolarizing(lambda).unwrap(), gate_noise_amplitude_damping(gamma).unwrap()] {
            let t = transition_matrix(n, &noise).unwrap();
            for w in 0..=n {
                prop_assert!((t.column_sum(w) - 1.0).abs() < 1e-12);
                for to in 0..=n {
                    prop_assert!(t.get(to, w) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn evolution_preserves_probability(n in 2u64..=60, eps in 0.0f64..=1.0, gates in 0u64..200, lambda in 0.0f64..0.1) {
        let t = transition_matrix(n, &gate_noise_depolarizing(lambda).unwrap()).unwrap();
        let x = evolve(&initial_weight_distribution(n, eps).unwrap(), &t, gates).unwrap();
        prop_assert!((x.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(x.probs().iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn conjugation_preserves_commutation(n in 1u32..=12, seed in any::<u64>(), ax in any::<u64>(), az in any::<u64>(), bx in any::<u64>(), bz in any::<u64>()) {
        let mask = (1u64 << n) - 1;
        let a = PauliFrame::from_masks(n, ax & mask, az & mask).unwrap();
        let b = PauliFrame::from_masks(n, bx & mask, bz & mask).unwrap();
        let c = sample_clifford(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(c.is_symplectic());
        let (ca, cb) = (c.conjugate(&a).unwrap(), c.conjugate(&b).unwrap());
        prop_assert_eq!(ca.anticommutes(&cb), a.anticommutes(&b));
        prop_assert_eq!(ca.is_identity(), a.is_identity());
        prop_assert_eq!(c.conjugate(&a.mul(&b).unwrap()).unwrap(), ca.mul(&cb).unwrap());
    }

    #[test]
    fn swaps_without_distillation_only_degrade(link in 0.0f64..=0.5, t in 0u32..12) {
        let a = RepeaterPlan::uniform(link, t, None, None).unwrap();
        let b = RepeaterPlan::uniform(link, t + 1, None, None).unwrap();
        prop_assert!(b.end_to_end_infidelity >= a.end_to_end_infidelity);
    }

    #[test]
    fn repeater_overhead_is_multiplicative(link in 1e-4f64..0.05, t in 0u32..8, (n, m) in (2u64..=60).prop_flat_map(|n| (Just(n), 1..n)), np in 2u64..=60) {
        let first = ProtocolParams::passive(n, m).unwrap();
        let keep = ProtocolParams::passive(np, 1).unwrap();
        let Ok(plan) = RepeaterPlan::uniform(link, t, Some(first), Some(keep)) else { return Ok(()); };
        let mut expected = (t as f64).exp2();
        let mut eps = link;
        for (level, p) in plan.per_level.iter().enumerate() {
            if level > 0 {
                eps = (2.0 * eps).min(1.0);
            }
            let r = passive_performance(p.as_ref().unwrap(), Fidelity::from_infidelity(eps).unwrap()).unwrap();
            expected *= r.expected_overhead;
            eps = r.pair_infidelity;
        }
        prop_assert!((plan.end_to_end_overhead / expected - 1.0).abs() < 1e-9);
        prop_assert_eq!(plan.end_to_end_infidelity, eps);
    }

    #[test]
    fn bound_objective_never_undercuts_exact(eps0 in 1e-4f64..0.2, layers in prop::collection::vec((2u64..=80).prop_flat_map(|n| (Just(n), 1..n)), 1..4)) {
        let params: Vec<ProtocolParams> = layers.iter().map(|&(n, m)| ProtocolParams::passive(n, m).unwrap()).collect();
        let exact = evaluate_chain(eps0, 1e-12, &params, Objective::Exact, 0.1).unwrap();
        let bound = evaluate_chain(eps0, 1e-12, &params, Objective::Bound, 0.1).unwrap();
        prop_assert!(bound.expected_overhead >= exact.expected_overhead * (1.0 - 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn tighter_targets_never_cost_less(eps0 in 1e-3f64..0.2, t_exp in 2.0f64..10.0, gap in 0.01f64..3.0) {
        let options = PlanOptions { n_max: 40, ..PlanOptions::default() };
        let loose = 10f64.powf(-t_exp);
        let tight = 10f64.powf(-t_exp - gap);
        let a = plan_concatenation(eps0, loose, &options).unwrap();
        let b = plan_concatenation(eps0, tight, &options).unwrap();
        prop_assert!(b.expected_overhead >= a.expected_overhead * (1.0 - 1e-12));
        for plan in [&a, &b] {
            // recompute the chain from scratch
            let params: Vec<_> = plan.layers.iter().map(|l| l.params).collect();
            let again = evaluate_chain(eps0, plan.target, &params, Objective::Exact, 0.1).unwrap();
            prop_assert!(again.final_infidelity <= plan.target);
            prop_assert_eq!(again.expected_overhead, plan.expected_overhead);
        }
    }

    #[test]
    fn heuristic_beats_every_scanned_triple(link in 1e-3f64..0.02, t in 0u32..5, n in 2u64..=30, k_frac in 0.0f64..1.0, np in 2u64..=30) {
        let target = 1e-6;
        let Ok(best) = heuristic_search(link, target, t, 30) else { return Ok(()); };
        prop_assert!(best.plan.end_to_end_infidelity <= target);
        let k = 1 + ((n - 1) as f64 * k_frac) as u64;
        let k = k.min(n - 1);
        let other = RepeaterPlan::uniform(
            link,
            t,
            Some(ProtocolParams::passive(n, n - k).unwrap()),
            (t > 0).then(|| ProtocolParams::passive(np, 1).unwrap()),
        ).unwrap();
        if other.end_to_end_infidelity <= target {
            prop_assert!(other.end_to_end_overhead >= best.plan.end_to_end_overhead * (1.0 - 1e-12));
        }
    }

    #[test]
    fn enumeration_agrees_with_top_mass(n in 1u64..=8, eps in 0.0f64..0.7, e in 0u64..3000) {
        let model = IidDepolarizing::new(n, eps).unwrap();
        let frames = enumerate_top_errors(&model, e, 1_000_000).unwrap();
        let total: f64 = frames.iter().map(|f| model.frame_probability(f)).sum();
        prop_assert!((total - top_error_mass(&model, e).unwrap().q).abs() < 1e-12);
    }

    #[test]
    fn passive_estimates_are_reproducible(seed in any::<u64>(), (n, m) in (2u64..=8).prop_flat_map(|n| (Just(n), 1..n))) {
        let a = estimate_passive(n, m, 0.1, 2000, seed).unwrap();
        let b = estimate_passive(n, m, 0.1, 2000, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn all_strings_sum_to_one() {
    for n in 1..=4u64 {
        let model = IidDepolarizing::new(n, 0.13).unwrap();
        let all = 4u64.pow(n as u32);
        let frames = enumerate_top_errors(&model, all - 1, 1_000_000).unwrap();
        assert_eq!(frames.len() as u64, all);
        let total: f64 = frames.iter().map(|f| model.frame_probability(f)).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert_eq!(top_error_mass(&model, all - 1).unwrap().q, 1.0);
    }
}

#[test]
fn zero_strength_noise_is_ideal() {
    let ideal = transition_matrix(20, &GateNoise::IDEAL).unwrap().to_dense();
    for noise in [gate_noise_depolarizing(0.0).unwrap(), gate_noise_amplitude_damping(0.0).unwrap()] {
        assert_eq!(noise, GateNoise::IDEAL);
        assert_eq!(transition_matrix(20, &noise).unwrap().to_dense(), ideal);
    }
}

#[test]
fn ideal_scrambling_converges_monotonically() {
    let n = 10;
    let t = transition_matrix(n, &GateNoise::IDEAL).unwrap();
    let x0 = initial_weight_distribution(n, 0.1).unwrap();
    let s = stationary_distribution(n).unwrap();
    let clean = x0.probs()[0];
    let limit: Vec<f64> = s
        .probs()
        .iter()
        .enumerate()
        .map(|(w, p)| (1.0 - clean) * p + if w == 0 { clean } else { 0.0 })
        .collect();
    let limit = WeightDistribution::new(limit).unwrap();
    let mut last = f64::INFINITY;
    for k in 0..=14 {
        let d = evolve(&x0, &t, 1 << k).unwrap().l1_distance(&limit).unwrap();
        assert!(d <= last, "G = 2^{k}: {d} > {last}");
        last = d;
    }
    assert!(last < 1e-10);
}

#[test]
fn recipe_layer_factors_decay() {
    let mut eps: f64 = 0.0006;
    let mut factor = recipe_overhead_bound(eps);
    for _ in 0..4 {
        eps = recipe_next_infidelity(eps);
        let next = recipe_overhead_bound(eps);
        assert!(next < factor);
        factor = next;
    }
}
