use std::collections::HashMap;

use edalab_core::cga::CgaState;
use edalab_core::oracle::{conditional_drift_formula, exact_step_distribution, expected_delta_formula};
use edalab_core::{FrequencyVector, LeadingOnes, ModelParams, OneMax, RandomSource};
use proptest::prelude::*;

fn state(n: usize, m: u32, k: &[u32]) -> FrequencyVector {
    let params = ModelParams::from_half_range(n, m).unwrap();
    FrequencyVector::from_indices(params, k.to_vec()).unwrap()
}

/// `(n, m, indices)` with every index strictly inside `(0, 2m)`.
fn interior_state() -> impl Strategy<Value = (usize, u32, Vec<u32>)> {
    (3usize..=6, 2u32..=6).prop_flat_map(|(n, m)| {
        (Just(n), Just(m), prop::collection::vec(1..2 * m, n))
    })
}

fn any_state() -> impl Strategy<Value = (usize, u32, Vec<u32>)> {
    (3usize..=6, 1u32..=4).prop_flat_map(|(n, m)| {
        (Just(n), Just(m), prop::collection::vec(0..=2 * m, n))
    })
}

// Values below come from an independent brute force over exact rationals.

#[test]
fn frozen_leading_ones_drift_with_clamped_borders() {
    let dist = exact_step_distribution(&state(4, 3, &[6, 4, 3, 0]), &LeadingOnes).unwrap();
    let expected = [0.0, 35.0 / 1536.0, 49.0 / 6144.0, 1073.0 / 65536.0];
    for (i, e) in expected.iter().enumerate() {
        assert!((dist.expected_delta(i) - e).abs() < 1e-15, "position {i}");
    }
    assert!((dist.probability(&[0, 0, 0, 0]) - 0.199_795_193_142_361_1).abs() < 1e-15);
    assert_eq!(dist.support_size(), 18);
}

#[test]
fn frozen_leading_ones_drift_at_the_top_of_the_grid() {
    let dist = exact_step_distribution(&state(3, 1, &[2, 2, 2]), &LeadingOnes).unwrap();
    let expected = [0.0, -5.0 / 243.0, -65.0 / 2187.0];
    for (i, e) in expected.iter().enumerate() {
        assert!((dist.expected_delta(i) - e).abs() < 1e-15, "position {i}");
    }
    assert_eq!(dist.support_size(), 4);
}

#[test]
fn frozen_one_max_drift() {
    let dist = exact_step_distribution(&state(5, 3, &[1, 2, 3, 4, 5]), &OneMax).unwrap();
    let expected = [1327347.0, 1538397.0, 1610507.0, 1538397.0, 1327347.0];
    for (i, e) in expected.iter().enumerate() {
        assert!((dist.expected_delta(i) - e / 62_500_000.0).abs() < 1e-15, "position {i}");
    }
    assert_eq!(dist.support_size(), 147);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn leading_ones_drift_matches_closed_form((n, m, k) in interior_state()) {
        let p = state(n, m, &k);
        let dist = exact_step_distribution(&p, &LeadingOnes).unwrap();
        let freqs = p.values();
        let mu = p.params().mu();
        for i in 0..n {
            let formula = expected_delta_formula(&freqs, i, mu);
            prop_assert!((dist.expected_delta(i) - formula).abs() <= 1e-10 * formula.abs().max(1e-3));
            let conditional = dist.conditional_expected_delta(i).unwrap();
            let formula = conditional_drift_formula(&freqs, i, mu);
            prop_assert!((conditional - formula).abs() <= 1e-10 * formula.abs().max(1e-3));
        }
    }

    #[test]
    fn interior_positions_move_when_the_samples_differ((n, m, k) in interior_state()) {
        let p = state(n, m, &k);
        for dist in [
            exact_step_distribution(&p, &LeadingOnes).unwrap(),
            exact_step_distribution(&p, &OneMax).unwrap(),
        ] {
            for (i, q) in p.values().into_iter().enumerate() {
                prop_assert!((dist.change_probability(i) - 2.0 * q * (1.0 - q)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn step_law_is_a_probability_distribution((n, m, k) in any_state()) {
        let p = state(n, m, &k);
        let dist = exact_step_distribution(&p, &LeadingOnes).unwrap();
        prop_assert!((dist.total_mass() - 1.0).abs() < 1e-12);
        for (deltas, mass) in dist.entries() {
            prop_assert!(mass >= 0.0);
            // A clamped frequency never moves past its border.
            for (i, d) in deltas.iter().enumerate() {
                let after = p.index(i) as i64 + *d as i64;
                prop_assert!((0..=2 * m as i64).contains(&after));
            }
        }
    }

    #[test]
    fn one_max_drift_is_never_negative((n, m, k) in interior_state()) {
        let p = state(n, m, &k);
        let dist = exact_step_distribution(&p, &OneMax).unwrap();
        for i in 0..n {
            prop_assert!(dist.expected_delta(i) > 0.0);
        }
    }
}

#[test]
fn sampled_steps_agree_with_the_exact_law() {
    let p = state(4, 3, &[6, 4, 3, 0]);
    let dist = exact_step_distribution(&p, &LeadingOnes).unwrap();
    let mut rng = RandomSource::new(17, 0);
    let samples = 200_000u64;
    let mut counts: HashMap<Vec<i8>, u64> = HashMap::new();
    for _ in 0..samples {
        let mut cga = CgaState::from_frequencies(p.clone());
        let outcome = cga.step(&LeadingOnes, &mut rng);
        let mut deltas = outcome.deltas;
        for &i in &outcome.clamped {
            deltas[i] = 0;
        }
        *counts.entry(deltas).or_default() += 1;
    }
    let tv = dist.total_variation(counts.iter().map(|(d, &c)| (d.as_slice(), c)), samples);
    // 18 outcomes at 2e5 samples put the expected distance near 0.003.
    assert!(tv < 0.01, "{tv}");
}
