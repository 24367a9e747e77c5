mod common;

use common::*;
use hforge_core::approx::{positive_value_lower_bound, scale_rewards};
use hforge_core::evaluation::{
    average_performance_stationary, discounted_performance_stationary, finite_memory_cross_product, performance,
};
use hforge_core::io;
use hforge_core::oracles::{
    brute_force_stationary_value, brute_force_stationary_value_pruned, brute_force_time_dependent_value,
    exact_history_value,
};
use hforge_core::reductions::{amplify_uomdp, cvp_to_mdp, threesat_to_pomdp, threesat_to_uomdp};
use hforge_core::{
    rat, Caps, FiniteMemoryPolicy, Metric, ObservabilityClass, Policy, Quantifier, Rat, SsatFormula, StationaryPolicy,
};
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;
use rand::Rng;

fn metrics(h: usize) -> Vec<Metric> {
    vec![
        Metric::total(h),
        Metric::discounted(r(1, 2), h).unwrap(),
        Metric::infinite_discounted(r(2, 3)).unwrap(),
        Metric::Average,
    ]
}

fn random_stationary(g: &mut impl Rng, k: usize, a: usize) -> StationaryPolicy {
    StationaryPolicy::new((0..k).map(|_| g.random_range(0..a)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rationals_are_exact(a in -10_000i64..10_000, b in 1i64..10_000, c in -10_000i64..10_000, d in 1i64..10_000) {
        let x = r(a, b);
        let y = r(c, d);
        prop_assert_eq!(rat::parse(&rat::fmt(&x)).unwrap(), x.clone());
        prop_assert_eq!(&(&x + &y) - &y, x.clone());
        if !y.is_zero() {
            prop_assert_eq!(&(&x * &y) / &y, x.clone());
        }
        // cross-multiplication as the independent comparison
        prop_assert_eq!(x < y, (a as i128) * (d as i128) < (c as i128) * (b as i128));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn trajectory_sums_match(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 4);
        let h = g.random_range(1..=4);
        let metric = if g.random_bool(0.5) { Metric::total(h) } else { Metric::discounted(r(3, 4), h).unwrap() };
        let p = random_stationary(&mut g, m.n_obs(), m.n_actions());
        let got = performance(&m, &Policy::Stationary(p.clone()), &metric).unwrap();
        let want = trajectory_sum(&m, &metric, &|_, seq: &[usize]| p.action(*seq.last().unwrap()));
        prop_assert_eq!(got, want);
    }

    #[test]
    fn pomdp_round_trip(seed in any::<u64>()) {
        let m = random_pomdp(&mut rng(seed), 4);
        let text = io::serialize_pomdp(&m);
        let back = io::parse_pomdp(&text).unwrap();
        prop_assert_eq!(&back, &m);
        prop_assert_eq!(io::serialize_pomdp(&back), text);
    }

    #[test]
    fn tbn_round_trip(seed in any::<u64>()) {
        let t = random_tbn(&mut rng(seed));
        let back = io::parse_tbn(&io::serialize_tbn(&t)).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn formula_round_trip(seed in any::<u64>()) {
        let mut g = rng(seed);
        let phi = random_cnf(&mut g, 5, 6);
        prop_assert_eq!(io::parse_cnf(&io::serialize_cnf(&phi)).unwrap(), phi.clone());
        let mut vars: Vec<usize> = (0..phi.n_vars()).collect();
        let mut prefix = Vec::new();
        while !vars.is_empty() {
            let v = vars.swap_remove(g.random_range(0..vars.len()));
            prefix.push((v, if g.random_bool(0.5) { Quantifier::Exists } else { Quantifier::Random }));
        }
        let ssat = SsatFormula::new(prefix, phi).unwrap();
        prop_assert_eq!(io::parse_ssat(&io::serialize_ssat(&ssat)).unwrap(), ssat);
    }

    #[test]
    fn policy_round_trip(seed in any::<u64>()) {
        let mut g = rng(seed);
        let k = g.random_range(1..=4);
        let p = Policy::Stationary(random_stationary(&mut g, k, 3));
        prop_assert_eq!(io::parse_policy(&io::serialize_policy(&p).unwrap()).unwrap(), p);
        let mem = g.random_range(1..=3);
        let step = (0..k).map(|_| (0..mem).map(|_| (g.random_range(0..2), g.random_range(0..mem))).collect()).collect();
        let fm = Policy::FiniteMemory(FiniteMemoryPolicy::new(mem, g.random_range(0..mem), step).unwrap());
        prop_assert_eq!(io::parse_policy(&io::serialize_policy(&fm).unwrap()).unwrap(), fm);
    }

    #[test]
    fn finite_memory_product_agrees(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 3);
        let mem = g.random_range(1..=2);
        let step = (0..m.n_obs())
            .map(|_| (0..mem).map(|_| (g.random_range(0..m.n_actions()), g.random_range(0..mem))).collect())
            .collect();
        let fm = FiniteMemoryPolicy::new(mem, 0, step).unwrap();
        let (prod, st) = finite_memory_cross_product(&m, &fm).unwrap();
        for metric in [Metric::total(3), Metric::discounted(r(1, 2), 4).unwrap()] {
            let direct = performance(&m, &Policy::FiniteMemory(fm.clone()), &metric).unwrap();
            let crossed = performance(&prod, &Policy::Stationary(st.clone()), &metric).unwrap();
            prop_assert_eq!(direct, crossed);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn scaling_is_linear(seed in any::<u64>(), num in 1i64..20, den in 1i64..7) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 4);
        let theta = r(num, den);
        let scaled = scale_rewards(&m, &theta).unwrap();
        let p = Policy::Stationary(random_stationary(&mut g, m.n_obs(), m.n_actions()));
        for metric in metrics(g.random_range(1..=4)) {
            let base = performance(&m, &p, &metric).unwrap();
            prop_assert_eq!(performance(&scaled, &p, &metric).unwrap(), &theta * base);
        }
    }

    #[test]
    fn argmax_survives_scaling(seed in any::<u64>(), theta in 1i64..9) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 4);
        let scaled = scale_rewards(&m, &r(theta, 2)).unwrap();
        let caps = Caps::default();
        for metric in metrics(3) {
            let a = brute_force_stationary_value(&m, &metric, &caps).unwrap();
            let b = brute_force_stationary_value(&scaled, &metric, &caps).unwrap();
            prop_assert_eq!(a.policy, b.policy);
            prop_assert_eq!(a.value * r(theta, 2), b.value);
        }
    }

    #[test]
    fn pruned_search_matches_full(seed in any::<u64>()) {
        let m = random_pomdp(&mut rng(seed), 4);
        let caps = Caps::default();
        for metric in metrics(3) {
            let a = brute_force_stationary_value(&m, &metric, &caps).unwrap();
            let b = brute_force_stationary_value_pruned(&m, &metric, &caps).unwrap();
            prop_assert_eq!(a.value, b.value);
            prop_assert_eq!(a.policy, b.policy);
        }
    }

    #[test]
    fn policy_classes_nest(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 4);
        let caps = Caps::default();
        let metric = Metric::total(g.random_range(1..=3));
        let st = brute_force_stationary_value(&m, &metric, &caps).unwrap().value;
        let td = brute_force_time_dependent_value(&m, &metric, &caps).unwrap().value;
        let hist = exact_history_value(&m, &metric, &caps).unwrap().value;
        prop_assert!(st <= td && td <= hist);
        if m.n_obs() == 1 {
            prop_assert_eq!(td, hist);
        }
    }

    #[test]
    fn totals_grow_with_nonnegative_rewards(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 4).map_rewards(|x| x.abs());
        let p = Policy::Stationary(random_stationary(&mut g, m.n_obs(), m.n_actions()));
        let caps = Caps::default();
        let mut prev = Rat::zero();
        let mut prev_best = Rat::zero();
        for h in 0..6 {
            let v = performance(&m, &p, &Metric::total(h)).unwrap();
            prop_assert!(v >= prev);
            let best = brute_force_stationary_value(&m, &Metric::total(h), &caps).unwrap().value;
            prop_assert!(best >= prev_best);
            prev = v;
            prev_best = best;
        }
    }

    #[test]
    fn discounted_tail_bound(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 4);
        let p = random_stationary(&mut g, m.n_obs(), m.n_actions());
        let beta = r(g.random_range(1..=4), 5);
        let inf = discounted_performance_stationary(&m, &p, &beta).unwrap();
        let rmax = m.max_abs_reward();
        for h in 0..6 {
            let fin = performance(&m, &Policy::Stationary(p.clone()), &Metric::discounted(beta.clone(), h).unwrap()).unwrap();
            let tail = rat::powi(&beta, h as i64) * &rmax / (Rat::one() - &beta);
            prop_assert!((inf.clone() - fin).abs() <= tail);
        }
    }

    #[test]
    fn delta_is_sound(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 4).map_rewards(|x| x.abs());
        let caps = Caps::default();
        for metric in [Metric::total(3), Metric::discounted(r(1, 2), 3).unwrap(), Metric::infinite_discounted(r(1, 2)).unwrap()] {
            let v = brute_force_stationary_value(&m, &metric, &caps).unwrap().value;
            if v.is_positive() {
                prop_assert!(v >= positive_value_lower_bound(&m, &metric).unwrap());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cesaro_averages_converge(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = random_pomdp(&mut g, 3);
        let p = random_stationary(&mut g, m.n_obs(), m.n_actions());
        let avg = average_performance_stationary(&m, &p).unwrap();
        let h = 160;
        let total = performance(&m, &Policy::Stationary(p), &Metric::total(h)).unwrap();
        let gap = (total / Rat::from_integer(h.into()) - avg).abs().to_f64().unwrap();
        let scale = m.max_abs_reward().to_f64().unwrap().max(1.0);
        prop_assert!(gap <= 24.0 * scale / h as f64, "gap {gap}");
    }
}

#[test]
fn gadget_size_bounds_and_observability() {
    for phi in cnf_corpus(50) {
        let a = threesat_to_pomdp(&phi);
        assert_eq!(a.pomdp().unwrap().n_states(), phi.n_literals() + 2);
        let b = threesat_to_uomdp(&phi);
        let bm = b.pomdp().unwrap();
        assert_eq!(bm.observability(), ObservabilityClass::Unobservable);
        if phi.n_clauses() <= 3 {
            let amp = amplify_uomdp(&phi, None).unwrap();
            let am = amp.pomdp().unwrap();
            let m2 = phi.n_clauses() * phi.n_clauses();
            assert!(am.n_states() <= m2 * bm.n_states());
            assert_eq!(am.observability(), ObservabilityClass::Unobservable);
        }
    }
    for e in expressions(2, 5) {
        let c = e.circuit();
        assert_eq!(cvp_to_mdp(&c, 1).unwrap().pomdp().unwrap().n_states(), 2 * c.len() + 1);
    }
}

#[test]
fn assignments_are_policies() {
    for phi in cnf_corpus(30) {
        let g = threesat_to_pomdp(&phi);
        let m = g.pomdp().unwrap();
        for x in assignments(phi.n_vars()) {
            let mut act: Vec<usize> = x.iter().map(|&b| b as usize).collect();
            act.resize(m.n_obs(), 0);
            let v = performance(m, &Policy::Stationary(StationaryPolicy::new(act)), &g.recommended_metric).unwrap();
            let sat = satisfied_count(&phi, &x) == phi.n_clauses();
            assert_eq!(v, if sat { Rat::one() } else { Rat::zero() }, "{phi} under {x:?}");
        }
    }
}
