//! The Markov operator P on measures and its dual U on functions, exact and
//! sampled, plus uniformization of rational weights.
//!
//! cargo run --release --example markov_operators

use ifslab::circle::CirclePoint;
use ifslab::homeo::Homeo;
use ifslab::ifs::{Ifs, StationaryOptions, DEFAULT_NODE_BUDGET};
use ifslab::measure::{w1_circle, EmpiricalMeasure};
use ifslab::observable::Observable;
use ifslab::rng::Streams;

fn main() -> ifslab::error::Result<()> {
    let maps = vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)];
    let ifs = Ifs::new(maps, vec![1.0 / 3.0, 2.0 / 3.0])?;
    let f = Observable::cos1();
    let x = CirclePoint::new(0.2);

    let mut mu = EmpiricalMeasure::dirac(x);
    for n in 1..=4 {
        mu = ifs.markov_push(&mu, 1 << 20)?;
        println!("P^{n} delta_x: {} atoms, <f, P^n delta_x> = {:.6}", mu.len(), mu.integrate(&f));
    }
    let levels = ifs.dual_levels(&f, x, 12, DEFAULT_NODE_BUDGET)?;
    println!("U^4 f(x) = {:.6} (same number through the dual)", levels[4]);

    let streams = Streams::new(1);
    let mc = ifs.dual_mc(&f, x, 12, 100_000, &streams);
    println!("U^12 f(x): exact {:.5}, Monte Carlo {:.5} +- {:.5}", levels[12], mc.estimate, mc.stderr);

    let uni = ifs.uniformize(&[3, 3])?;
    let u_levels = uni.dual_levels(&f, x, 8, DEFAULT_NODE_BUDGET)?;
    let worst = levels.iter().zip(&u_levels).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("uniformized system has {} equally likely maps; dual differs by {worst:.1e}", uni.k());

    let sample = ifs.stationary_sample(&StationaryOptions::default(), &streams.derive_named("stationary"))?;
    let residual = w1_circle(&sample, &ifs.markov_push(&sample, 1_000_000)?);
    println!("stationary sample of {} states, <f, mu*> ~ {:.5}, W1(mu, P mu) = {residual:.2e}", sample.len(), sample.integrate(&f));
    Ok(())
}
