//! Normalized Birkhoff sums of a centred observable: variance, normality and
//! the effect of the starting point.
//!
//! cargo run --release --example clt_demo

use ifslab::circle::CirclePoint;
use ifslab::clt::{center_with_error, centering_sample, charfn_gap, clt_report, StartMode};
use ifslab::homeo::Homeo;
use ifslab::ifs::Ifs;
use ifslab::observable::Observable;
use ifslab::rng::Streams;

fn main() -> ifslab::error::Result<()> {
    let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
    let streams = Streams::new(13);
    let x0 = CirclePoint::new(0.0);
    let a = centering_sample(&ifs, x0, 1 << 22, 1000, &streams.derive_named("a"))?;
    let b = centering_sample(&ifs, x0, 1 << 22, 1000, &streams.derive_named("b"))?;
    let c = center_with_error(&Observable::cos1(), &a, &b);
    println!("offset {:.5} +- {:.1e}", c.offset, c.centering_error);

    let stationary = StartMode::Stationary { x0, burn_in: 1000 };
    let fixed = StartMode::Fixed { x: CirclePoint::new(0.3) };
    for start in [stationary, fixed] {
        let r = clt_report(&ifs, &c.observable, 5000, 1000, start, c.centering_error, &streams.derive(5000))?;
        println!("{:>10} start: sigma2 {:.3} +- {:.3}, KS {:.4} (p = {:.3})", r.start_mode, r.sigma2_hat, r.sigma2_ci_half_width, r.ks_stat, r.p_value);
    }
    for row in charfn_gap(&ifs, &c.observable, CirclePoint::new(0.3), stationary, &[10, 100, 1000], &[1.0], 1000, &streams)? {
        println!("characteristic function gap at n = {:>4}, t = {}: {:.4}", row.n, row.t, row.gap);
    }
    Ok(())
}
