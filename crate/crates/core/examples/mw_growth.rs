//! Growth of the L2 norm of dual partial sums and summability of the series
//! behind the central limit theorem for the demo system.
//!
//! cargo run --release --example mw_growth

use ifslab::circle::CirclePoint;
use ifslab::clt::{center_observable, centering_sample, growth_exponent, mw_statistic, uniform_sum_gap};
use ifslab::diagnostics::DualMode;
use ifslab::homeo::Homeo;
use ifslab::ifs::{Ifs, DEFAULT_NODE_BUDGET};
use ifslab::observable::Observable;
use ifslab::rng::Streams;

fn main() -> ifslab::error::Result<()> {
    let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
    let streams = Streams::new(11);
    let sample = centering_sample(&ifs, CirclePoint::new(0.0), 1 << 21, 1000, &streams)?;
    let f = center_observable(&Observable::cos1(), &sample);
    let xs: Vec<CirclePoint> = sample.atoms().iter().step_by(sample.len() / 128).take(128).map(|a| a.0).collect();
    let ns: Vec<usize> = (1..=16).collect();
    let mw = mw_statistic(&ifs, &f, &ns, &xs, DualMode::Exact, DEFAULT_NODE_BUDGET, 0, &streams)?;
    let gaps = uniform_sum_gap(&ifs, &f, CirclePoint::new(0.0), CirclePoint::new(0.5), &ns, DEFAULT_NODE_BUDGET)?;
    println!("centering offset {:.5}", f.offset);
    println!("{:>3} {:>10} {:>12} {:>10}", "n", "a_n", "partial sum", "sum gap");
    for i in 0..ns.len() {
        println!("{:>3} {:>10.5} {:>12.5} {:>10.5}", ns[i], mw.a_n[i], mw.partial_series[i], gaps[i].gap);
    }
    let gap_values: Vec<f64> = gaps.iter().map(|g| g.gap).collect();
    println!("a_n exponent {:.3}, sum gap exponent {:.3}, last-quarter share {:.3}", mw.beta_growth_hat, growth_exponent(&ns, &gap_values), mw.tail_fraction());
    Ok(())
}
