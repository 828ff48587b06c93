use bellwire::behavior::{Behavior, InputDistribution, Scenario};
use bellwire::cli::campaign::{campaign_behavior, trial_rng};
use bellwire::divergence::{behavior_re, conditional_re, kl};
use bellwire::geometry::{is_local, is_no_signaling, random_local_behavior, random_ns_behavior};
use bellwire::monotones::{s_c, s_nl, s_u, s_uc};
use bellwire::wirings::random::{random_distribution, random_gw, random_losr, random_uclosr, random_wpicc};
use bellwire::wirings::{apply_gw, apply_losr, losr_to_gw, WiringDescriptor};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn scenario() -> impl Strategy<Value = Scenario> {
    (1usize..=3, 2usize..=3, 1usize..=3, 2usize..=3).prop_map(|(sa, ra, sb, rb)| Scenario::new(sa, ra, sb, rb).unwrap())
}

fn assert_normalized(p: &Behavior) -> Result<(), TestCaseError> {
    let sc = p.scenario();
    for s in 0..sc.settings() {
        let block = p.setting_block(s);
        prop_assert!(block.iter().all(|v| *v >= 0.0));
        prop_assert!((block.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn behavior_json_round_trips(sc in scenario(), seed in any::<u64>()) {
        let p = random_ns_behavior(&sc, seed);
        prop_assert_eq!(Behavior::from_json(&p.to_json()).unwrap(), p);
    }

    #[test]
    fn wiring_json_round_trips(seed in any::<u64>()) {
        let sc = Scenario::chsh();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for w in [
            WiringDescriptor::Gw(random_gw(&sc, &sc, &mut rng)),
            WiringDescriptor::Losr(random_losr(&sc, &sc, 3, &mut rng)),
            WiringDescriptor::Wpicc(random_wpicc(&sc, &sc, &mut rng)),
        ] {
            prop_assert_eq!(WiringDescriptor::from_json(&w.to_json()).unwrap(), w);
        }
    }

    #[test]
    fn wirings_conserve_mass(initial in scenario(), fin in scenario(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_ns_behavior(&initial, seed);
        assert_normalized(&random_gw(&initial, &fin, &mut rng).apply(&p).unwrap())?;
        assert_normalized(&random_losr(&initial, &fin, 2, &mut rng).apply(&p).unwrap())?;
        assert_normalized(&random_uclosr(&initial, &fin, &mut rng).apply(&p).unwrap())?;
    }

    #[test]
    fn losr_agrees_with_its_global_form(initial in scenario(), fin in scenario(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_ns_behavior(&initial, seed);
        let w = random_losr(&initial, &fin, 3, &mut rng);
        let direct = apply_losr(&w, &p).unwrap();
        let global = apply_gw(&losr_to_gw(&w), &p).unwrap();
        prop_assert!(direct.max_abs_diff(&global) < 1e-12);
    }

    #[test]
    fn local_wirings_preserve_no_signaling(seed in any::<u64>()) {
        let sc = Scenario::chsh();
        let mut rng = trial_rng(seed, 0);
        let p = campaign_behavior(&mut rng);
        let losr = random_losr(&sc, &sc, 2, &mut rng).apply(&p).unwrap();
        let wpicc = random_wpicc(&sc, &sc, &mut rng).apply(&p).unwrap();
        prop_assert!(is_no_signaling(&losr, 1e-9).no_signaling);
        prop_assert!(is_no_signaling(&wpicc, 1e-9).no_signaling);
    }

    #[test]
    fn global_wirings_contract_behavior_re(seed in any::<u64>()) {
        let sc = Scenario::chsh();
        let mut rng = trial_rng(seed, 1);
        let (p, q) = (campaign_behavior(&mut rng), campaign_behavior(&mut rng));
        let w = random_gw(&sc, &sc, &mut rng);
        let before = behavior_re(&p, &q).unwrap().bits;
        let after = behavior_re(&w.apply(&p).unwrap(), &w.apply(&q).unwrap()).unwrap().bits;
        prop_assert!(after <= before + 1e-9, "{after} > {before}");
    }

    #[test]
    fn kl_is_jointly_convex(seed in any::<u64>(), n in 2usize..8, mu in 0.0f64..=1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (p1, q1) = (random_distribution(n, &mut rng), random_distribution(n, &mut rng));
        let (p2, q2) = (random_distribution(n, &mut rng), random_distribution(n, &mut rng));
        let mix = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| mu * x + (1.0 - mu) * y).collect() };
        let lhs = kl(&mix(&p1, &p2), &mix(&q1, &q2)).unwrap().bits;
        let rhs = mu * kl(&p1, &q1).unwrap().bits + (1.0 - mu) * kl(&p2, &q2).unwrap().bits;
        prop_assert!(lhs <= rhs + 1e-12);
    }

    #[test]
    fn conditional_re_is_bounded_by_behavior_re(sc in scenario(), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_ns_behavior(&sc, seed);
        let q = random_ns_behavior(&sc, seed.wrapping_add(1));
        let d = InputDistribution::general(sc.s_a, sc.s_b, random_distribution(sc.settings(), &mut rng)).unwrap();
        let cond = conditional_re(&p, &q, &d).unwrap().bits;
        prop_assert!(cond <= behavior_re(&p, &q).unwrap().bits + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn local_behaviors_stay_local_under_local_wirings(seed in any::<u64>()) {
        let sc = Scenario::chsh();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_local_behavior(&sc, seed).unwrap();
        let losr = random_losr(&sc, &sc, 3, &mut rng).apply(&p).unwrap();
        let wpicc = random_wpicc(&sc, &sc, &mut rng).apply(&p).unwrap();
        prop_assert!(is_local(&losr, 1e-8).unwrap().is_local());
        prop_assert!(is_local(&wpicc, 1e-8).unwrap().is_local());
    }

    #[test]
    fn monotones_vanish_on_local_behaviors(seed in any::<u64>()) {
        let p = random_local_behavior(&Scenario::chsh(), seed).unwrap();
        for value in [
            s_nl(&p, 1e-6).unwrap().value,
            s_u(&p, 1e-6).unwrap().value,
            s_uc(&p, 1e-6, 4, seed).unwrap().value,
            s_c(&p, 1e-6).unwrap().value,
        ] {
            prop_assert!(value <= 1e-6, "{value}");
        }
    }

    #[test]
    fn uniform_inputs_never_exceed_worst_case(seed in any::<u64>()) {
        let p = campaign_behavior(&mut trial_rng(seed, 2));
        let nl = s_nl(&p, 1e-6).unwrap();
        let u = s_u(&p, 1e-6).unwrap();
        prop_assert!(u.value <= nl.value + nl.gap_estimate + u.gap_estimate + 1e-6);
    }
}
