//! Block coupling of two chains driven by paired symbol sequences.
//!
//! cargo run --release --example coupling_lab

use ifslab::circle::CirclePoint;
use ifslab::coupling::{block_tail_stats, pairing_transcripts, prefix_uniformity, verify_p3, PairingParams, Side};
use ifslab::diagnostics::{certify_synchronization, default_candidate_arcs};
use ifslab::homeo::Homeo;
use ifslab::ifs::{Ifs, DEFAULT_NODE_BUDGET};
use ifslab::observable::Observable;
use ifslab::rng::Streams;

fn main() -> ifslab::error::Result<()> {
    let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
    let arcs = default_candidate_arcs(16, 0.1);
    let (cert, _) = certify_synchronization(&ifs, &arcs, 64, 4000, 20, 4096, DEFAULT_NODE_BUDGET, 42)?;
    let m = cert.m.expect("certified");
    let params = PairingParams { arc: cert.arc, m, n: 200, q: cert.q_hat, tail_horizon: 64 };
    let (x, y) = (CirclePoint::new(0.0), CirclePoint::new(0.5));
    let ts = pairing_transcripts(&ifs, x, y, &params, 5000, &Streams::new(42))?;

    let first = &ts[0];
    println!("first transcript: {} blocks, coupled after block {:?}", first.level, first.coupled_block);
    for block in first.blocks.iter().take(4) {
        println!("  block at {:>3}: {:?} paired with {:?}, success {}, tail {}", block.start, block.word.symbols(), block.partner.symbols(), block.success, block.tail);
    }

    let f = Observable::cos1().lipschitz_normalized();
    let worst = ts.iter().map(|t| verify_p3(t, &ifs, &f).map(|c| c.worst_ratio)).collect::<Result<Vec<_>, _>>()?.into_iter().fold(0.0, f64::max);
    println!("worst ratio of the Birkhoff-sum gap to its bound: {worst:.3}");
    let alpha = cert.hit_mass_hat.expect("certified") * cert.mass_hat.estimate;
    for row in block_tail_stats(&ts, 10, alpha)?.iter().step_by(2) {
        println!("  P(not coupled after {:>2} blocks) = {:.3} in [{:.3}, {:.3}], envelope {:.3}", row.l, row.survival, row.lower, row.upper, row.envelope);
    }
    for side in [Side::Omega, Side::Partner] {
        println!("uniformity of the first {} symbols of {side:?}: p = {:.3}", 2 * m, prefix_uniformity(&ts, ifs.k(), 2 * m, side)?.p_value);
    }
    Ok(())
}
