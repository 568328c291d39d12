mod common;

use ifslab::circle::{Arc, CirclePoint};
use ifslab::homeo::Homeo;
use ifslab::ifs::{Ifs, StationaryOptions};
use ifslab::measure::{chi_lipschitz_probe, w1_circle, ChiMetric, EmpiricalMeasure};
use ifslab::rng::Streams;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn atoms_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..1.0f64, 0.05..1.0f64), 1..=6).prop_map(|raw| {
        let total: f64 = raw.iter().map(|a| a.1).sum();
        raw.into_iter().map(|(x, w)| (x, w / total)).collect()
    })
}

proptest! {
    #[test]
    fn w1_matches_transport_oracle(a in atoms_strategy(), b in atoms_strategy()) {
        let exact = common::transport_oracle(&a, &b);
        prop_assert!((w1_circle(&common::measure(&a), &common::measure(&b)) - exact).abs() < 1e-9);
    }

    #[test]
    fn w1_is_a_metric(a in atoms_strategy(), b in atoms_strategy(), c in atoms_strategy()) {
        let (a, b, c) = (common::measure(&a), common::measure(&b), common::measure(&c));
        prop_assert_eq!(w1_circle(&a, &b), w1_circle(&b, &a));
        prop_assert_eq!(w1_circle(&a, &a), 0.0);
        prop_assert!(w1_circle(&a, &c) <= w1_circle(&a, &b) + w1_circle(&b, &c) + 1e-9);
        prop_assert!(w1_circle(&a, &b) <= 0.5 + 1e-12);
    }
}

#[test]
fn rotations_are_w1_nonexpansive() {
    let ifs = common::rotations_spec().build_ifs().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let (a, b) = (common::measure(&common::random_atoms(&mut rng, 6)), common::measure(&common::random_atoms(&mut rng, 6)));
        let before = w1_circle(&a, &b);
        let after = w1_circle(&ifs.markov_push(&a, 1000).unwrap(), &ifs.markov_push(&b, 1000).unwrap());
        assert!(after <= before + 1e-12, "{after} > {before}");
    }
}

/// Expanding maps break nonexpansiveness for the circle distance, but not
/// for the transport cost `chi`. Transport under `chi` is circular W1 after
/// pushing both measures through the distribution function of the base.
#[test]
fn markov_operator_is_nonexpansive_for_chi_transport() {
    let ifs = common::demo_spec().build_ifs().unwrap();
    let opts = StationaryOptions { x0: CirclePoint::new(0.0), burn_in: 500, count: 200_000, thinning: 1, chains: 8 };
    let chi = ChiMetric::new(&ifs.inverse_system().stationary_sample(&opts, &Streams::new(9)).unwrap());
    let cdf = |mu: &EmpiricalMeasure| {
        let atoms = mu.atoms().iter().map(|&(x, w)| (CirclePoint::new(chi.arc_mass(&Arc::new(0.0, x))), w)).collect();
        EmpiricalMeasure::from_weighted(atoms).unwrap()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut expanded = 0;
    for _ in 0..200 {
        let (a, b) = (common::measure(&common::random_atoms(&mut rng, 6)), common::measure(&common::random_atoms(&mut rng, 6)));
        let (pa, pb) = (ifs.markov_push(&a, 1000).unwrap(), ifs.markov_push(&b, 1000).unwrap());
        expanded += usize::from(w1_circle(&pa, &pb) > w1_circle(&a, &b) + 1e-12);
        assert!(w1_circle(&cdf(&pa), &cdf(&pb)) <= w1_circle(&cdf(&a), &cdf(&b)) + 1e-2);
    }
    assert!(expanded > 0, "the demo maps should expand some circle distances");
}

/// Chi built from the invariant measure of the inverse system makes the dual
/// operator nonexpansive, up to the sampling error of that measure.
#[test]
fn dual_operator_is_chi_nonexpansive() {
    let ifs = common::demo_spec().build_ifs().unwrap();
    let opts = StationaryOptions { x0: CirclePoint::new(0.0), burn_in: 500, count: 200_000, thinning: 1, chains: 8 };
    let mu_tilde = ifs.inverse_system().stationary_sample(&opts, &Streams::new(9)).unwrap();
    let chi = ChiMetric::new(&mu_tilde);
    // Kolmogorov distance of a 2e5-point empirical law, with room for its chain correlation
    let eps = 1e-2;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..5 {
        let probe = chi_lipschitz_probe(&chi, CirclePoint::new(rng.random()));
        for _ in 0..100 {
            let (x, y) = (CirclePoint::new(rng.random()), CirclePoint::new(rng.random()));
            let u = |z| ifs.dual_exact(&probe, z, 1, 16).unwrap();
            assert!((u(x) - u(y)).abs() <= chi.eval(x, y) + eps);
        }
    }
}

#[test]
fn chi_is_symmetric_and_satisfies_the_triangle_inequality() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let base = common::measure(&common::random_atoms(&mut rng, 6));
    let chi = ChiMetric::new(&base);
    for _ in 0..1000 {
        let (x, y, z) = (CirclePoint::new(rng.random()), CirclePoint::new(rng.random()), CirclePoint::new(rng.random()));
        assert_eq!(chi.eval(x, y), chi.eval(y, x));
        assert!(chi.eval(x, z) <= chi.eval(x, y) + chi.eval(y, z) + 1e-12);
    }
}

#[test]
fn rotation_inverse_system_has_lebesgue_invariant_measure() {
    let ifs = Ifs::equal_weight(vec![Homeo::rotation(2f64.sqrt() - 1.0), Homeo::rotation(3f64.sqrt() - 1.0)]);
    let opts = StationaryOptions { count: 100_000, ..StationaryOptions::default() };
    let mu = ifs.inverse_system().stationary_sample(&opts, &Streams::new(2)).unwrap();
    assert!(w1_circle(&mu, &EmpiricalMeasure::uniform_grid(10_000)) < 0.02);
}
