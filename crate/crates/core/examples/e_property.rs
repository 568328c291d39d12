//! Equicontinuity profiles of the dual iterates, exact and sampled, and the
//! decay of W1 between chains started at different points.
//!
//! cargo run --release --example e_property

use ifslab::circle::CirclePoint;
use ifslab::diagnostics::{cesaro_profile, e_property_profile, stability_gap, DualMode, ProfileOptions};
use ifslab::homeo::Homeo;
use ifslab::ifs::{Ifs, DEFAULT_NODE_BUDGET};
use ifslab::observable::Observable;
use ifslab::rng::Streams;

fn main() -> ifslab::error::Result<()> {
    let demo = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
    let rotations = Ifs::equal_weight(vec![Homeo::rotation(2f64.sqrt() - 1.0), Homeo::rotation(3f64.sqrt() - 1.0)]);
    let f = Observable::cos1();
    let x = CirclePoint::new(0.3);
    let deltas = [0.1, 0.01, 0.001];
    let streams = Streams::new(7);
    for (name, ifs) in [("demo", &demo), ("rotations", &rotations)] {
        for mode in [DualMode::Exact, DualMode::Mc] {
            let opts = ProfileOptions { n_max: 14, mode, samples: 20_000, node_budget: DEFAULT_NODE_BUDGET };
            let e = e_property_profile(ifs, &f, x, &deltas, &opts, &streams)?;
            let c = cesaro_profile(ifs, &f, x, &deltas, &opts, &streams)?;
            for (e, c) in e.iter().zip(&c) {
                println!("{name:>9} {mode:?}: delta {:<6} sup |U^n f(y) - U^n f(x)| = {:.5} (n = {}), Cesaro {:.5}", e.delta, e.value, e.argmax_n, c.value);
            }
        }
        let rows = stability_gap(ifs, CirclePoint::new(0.2), CirclePoint::new(0.2001), &[0, 10, 50, 200], 10_000, &streams)?;
        let gaps: Vec<String> = rows.iter().map(|r| format!("n={} {:.1e}", r.n, r.w1)).collect();
        println!("{name:>9}: W1 between chains from 0.2 and 0.2001: {}", gaps.join(", "));
    }
    Ok(())
}
