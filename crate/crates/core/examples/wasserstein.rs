//! Exact Wasserstein-1 distance on the circle, support gaps and atom scans.
//!
//! cargo run --release --example wasserstein

use ifslab::circle::CirclePoint;
use ifslab::homeo::Homeo;
use ifslab::ifs::{Ifs, StationaryOptions};
use ifslab::measure::{atom_scan, max_gap, w1_circle, EmpiricalMeasure};
use ifslab::rng::Streams;

fn main() -> ifslab::error::Result<()> {
    let p = CirclePoint::new;
    let a = EmpiricalMeasure::dirac(p(0.05));
    let b = EmpiricalMeasure::dirac(p(0.95));
    println!("W1 of two Diracs across zero: {:.3}", w1_circle(&a, &b));

    let mixed = EmpiricalMeasure::from_weighted(vec![(p(0.1), 0.5), (p(0.6), 0.5)])?;
    println!("W1 between a two-atom measure and the uniform grid: {:.4}", w1_circle(&mixed, &EmpiricalMeasure::uniform_grid(1000)));

    let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
    let mu = ifs.stationary_sample(&StationaryOptions::default(), &Streams::new(3))?;
    let (gap, arc) = max_gap(&mu);
    println!("stationary sample: largest empty arc {gap:.2e} at [{:.4}, {:.4}]", arc.start.value(), arc.end.value());
    println!("windows of width 1e-4 holding more than 1% of the mass: {}", atom_scan(&mu, 1e-4, 1e-2).len());
    println!("distance to Lebesgue: {:.4}", w1_circle(&mu, &EmpiricalMeasure::uniform_grid(10_000)));
    Ok(())
}
