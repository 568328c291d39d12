//! The metric chi built from the invariant measure of the inverse system, and
//! the nonexpansiveness of the dual operator in that metric.
//!
//! cargo run --release --example chi_metric

use ifslab::circle::CirclePoint;
use ifslab::homeo::Homeo;
use ifslab::ifs::{Ifs, StationaryOptions};
use ifslab::measure::{chi_lipschitz_probe, ChiMetric};
use ifslab::rng::Streams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> ifslab::error::Result<()> {
    let ifs = Ifs::equal_weight(vec![Homeo::arnold(0.0, 0.9), Homeo::arnold(2f64.sqrt() - 1.0, 0.5)]);
    let opts = StationaryOptions { count: 500_000, ..StationaryOptions::default() };
    let mu_tilde = ifs.inverse_system().stationary_sample(&opts, &Streams::new(5))?;
    let chi = ChiMetric::new(&mu_tilde);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10 {
        let probe = chi_lipschitz_probe(&chi, CirclePoint::new(rng.random()));
        for _ in 0..100 {
            let (x, y) = (CirclePoint::new(rng.random()), CirclePoint::new(rng.random()));
            let ux = ifs.dual_exact(&probe, x, 1, 16)?;
            let uy = ifs.dual_exact(&probe, y, 1, 16)?;
            worst = worst.max((ux - uy).abs() - chi.eval(x, y));
        }
    }
    println!("chi(0.1, 0.4) = {:.4} while the circle distance is 0.3", chi.eval(CirclePoint::new(0.1), CirclePoint::new(0.4)));
    println!("max of |Uf(x) - Uf(y)| - chi(x, y) over 1000 probe pairs: {worst:.2e}");
    Ok(())
}
