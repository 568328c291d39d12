mod common;

use ifslab::circle::{Arc, CirclePoint, Region};
use ifslab::clt;
use ifslab::coupling::{self, BlockPairing, PairingParams, Side};
use ifslab::diagnostics::{self, DualMode, ProfileOptions};
use ifslab::homeo::Word;
use ifslab::ifs::{Ifs, DEFAULT_NODE_BUDGET};
use ifslab::observable::Observable;
use ifslab::rng::Streams;
use proptest::prelude::*;

fn demo() -> Ifs {
    common::demo_spec().build_ifs().unwrap()
}

fn p(t: f64) -> CirclePoint {
    CirclePoint::new(t)
}

#[test]
fn exact_profiles_ignore_the_sample_count() {
    let ifs = demo();
    let f = Observable::cos1();
    let deltas = [0.1, 0.01];
    let run = |samples| {
        let opts = ProfileOptions { n_max: 10, mode: DualMode::Exact, samples, node_budget: DEFAULT_NODE_BUDGET };
        diagnostics::e_property_profile(&ifs, &f, p(0.3), &deltas, &opts, &Streams::new(1)).unwrap()
    };
    assert_eq!(run(10), run(100_000));
}

#[test]
fn hitting_time_is_monotone_in_the_target() {
    let ifs = demo();
    let streams = Streams::new(2);
    for center in [0.1, 0.5, 0.8] {
        let ms: Vec<usize> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&len| diagnostics::hitting_parameters(&ifs, &Region::Arc(Arc::centered(p(center), len)), 20, 512, 1 << 20, 2000, &streams).unwrap().m)
            .collect();
        assert!(ms.windows(2).all(|w| w[1] <= w[0]), "center {center}: {ms:?}");
    }
}

#[test]
fn stability_and_uniqueness_are_seeded() {
    let ifs = demo();
    let gap = |seed| diagnostics::stability_gap(&ifs, p(0.1), p(0.6), &[0, 5, 20], 500, &Streams::new(seed)).unwrap();
    assert_eq!(gap(3), gap(3));
    let uniq = |seed| diagnostics::uniqueness_evidence(&ifs, &[p(0.0), p(0.5)], 5000, &Streams::new(seed)).unwrap();
    assert_eq!(uniq(4), uniq(4));
}

#[test]
fn mw_statistic_is_even_and_deterministic() {
    let ifs = demo();
    let f = Observable::harmonic(vec![1.0], vec![0.4]).centered(0.05);
    let xs: Vec<CirclePoint> = (0..16).map(|i| p(i as f64 / 16.0)).collect();
    let ns: Vec<usize> = (1..=10).collect();
    let run = |g: &Observable| clt::mw_statistic(&ifs, g, &ns, &xs, DualMode::Exact, DEFAULT_NODE_BUDGET, 0, &Streams::new(0)).unwrap();
    let a = run(&f);
    assert_eq!(a, run(&f));
    let b = run(&f.negated());
    assert!(a.a_n.iter().zip(&b.a_n).all(|(u, v)| (u - v).abs() <= 1e-12 * u.abs().max(1.0)));
}

#[test]
fn sum_gap_respects_the_sup_norm_envelope() {
    let ifs = demo();
    let f = Observable::harmonic(vec![0.3], vec![1.0]);
    let ns: Vec<usize> = (0..=12).collect();
    for row in clt::uniform_sum_gap(&ifs, &f, p(0.05), p(0.65), &ns, DEFAULT_NODE_BUDGET).unwrap() {
        assert!(row.gap <= 2.0 * row.n as f64 * f.sup_norm() + 1e-12);
    }
}

#[test]
fn rotation_controls_run_and_report() {
    let ifs = common::rotations_spec().build_ifs().unwrap();
    let f = Observable::cos1();
    let samples = clt::sn_star_samples(&ifs, &f, 200, 200, clt::StartMode::Fixed { x: p(0.1) }, &Streams::new(5)).unwrap();
    assert!(samples.iter().all(|s| s.is_finite()));
    match clt::sigma2_estimate(&samples) {
        Ok(s) => assert!(s.sigma2.is_finite()),
        Err(e) => assert!(matches!(e, ifslab::error::IfsError::DegenerateSample { .. })),
    }
}

fn demo_params(m: usize, n: usize) -> PairingParams {
    PairingParams { arc: Arc::new(0.45, 0.55), m, n, q: 0.82, tail_horizon: 64 }
}

#[test]
fn first_symbols_of_both_words_are_uniform() {
    let ifs = demo();
    let params = demo_params(3, 6);
    let ts = coupling::pairing_transcripts(&ifs, p(0.0), p(0.5), &params, 100_000, &Streams::new(6)).unwrap();
    for side in [Side::Omega, Side::Partner] {
        let chi = coupling::prefix_uniformity(&ts, 2, 6, side).unwrap();
        assert!(chi.p_value > 1e-3, "{side:?}: {chi:?}");
    }
}

#[test]
fn success_blocks_end_inside_the_arc_and_pairings_invert() {
    let ifs = demo();
    let params = demo_params(3, 150);
    let (x, y) = (p(0.0), p(0.5));
    for t in coupling::pairing_transcripts(&ifs, x, y, &params, 300, &Streams::new(7)).unwrap() {
        let (mut a, mut b) = (x, y);
        let mut pos = 0;
        for block in &t.blocks {
            assert_eq!(block.start, pos);
            if a != b {
                let pairing = BlockPairing::new(&ifs, a, b, &params.arc, params.m).unwrap();
                assert_eq!(pairing.inverse(block.partner.rank(2)), block.word.rank(2));
                assert_eq!(Word::from_rank(pairing.forward(block.word.rank(2)).0, 2, 3), block.partner);
            }
            a = ifs.compose_word(&block.word, a).unwrap();
            b = ifs.compose_word(&block.partner, b).unwrap();
            if block.success {
                assert!(params.arc.contains(a) && params.arc.contains(b));
            }
            let len = t.omega.len();
            let tail = Word(t.omega.symbols()[(pos + params.m).min(len)..(pos + params.m + block.tail).min(len)].to_vec());
            a = ifs.compose_word(&tail, a).unwrap();
            b = ifs.compose_word(&tail, b).unwrap();
            pos += params.m + block.tail;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transcripts_grow_by_extension(seed in any::<u64>(), short in 5usize..60, extra in 1usize..80) {
        let ifs = demo();
        let s = Streams::new(seed);
        let a = coupling::pairing_sampler(&ifs, p(0.0), p(0.5), &demo_params(3, short), &mut s.stream(0)).unwrap();
        let b = coupling::pairing_sampler(&ifs, p(0.0), p(0.5), &demo_params(3, short + extra), &mut s.stream(0)).unwrap();
        prop_assert!(coupling::prefix_consistent(&a, &b));
    }

    #[test]
    fn paired_distances_respect_the_block_bound(seed in any::<u64>(), x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let ifs = demo();
        let t = coupling::pairing_sampler(&ifs, p(x), p(y), &demo_params(3, 200), &mut Streams::new(seed).stream(0)).unwrap();
        prop_assert!(coupling::verify_p3(&t, &ifs, &Observable::cos1().lipschitz_normalized()).unwrap().ok);
    }
}
