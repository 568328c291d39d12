//! Points, arcs and homeomorphisms of the circle.
//!
//! cargo run --example circle_geometry

use ifslab::circle::{circ_dist, Arc, CirclePoint};
use ifslab::homeo::{Homeo, Word};
use ifslab::ifs::Ifs;

fn main() -> ifslab::error::Result<()> {
    let x = CirclePoint::new(0.9);
    let y = CirclePoint::new(-0.05);
    println!("x = {}, y = {} (normalized), distance {:.3}", x.value(), y.value(), circ_dist(x, y));

    let arc = Arc::new(0.9, 0.1);
    println!("arc [0.9, 0.1] has length {:.2}, contains 0.0: {}, contains 0.5: {}", arc.length(), arc.contains(CirclePoint::new(0.0)), arc.contains(CirclePoint::new(0.5)));

    let maps = vec![
        Homeo::rotation(0.25),
        Homeo::arnold(0.1, 0.8),
        Homeo::piecewise_linear(&[[0.0, 0.0], [0.3, 0.6], [0.8, 0.9]])?,
    ];
    for (i, h) in maps.iter().enumerate() {
        let report = h.validate(4096);
        let z = CirclePoint::new(0.37);
        let back = h.apply_inverse(h.apply(z))?;
        println!(
            "map {i}: valid {}, min lift slope {:.4}, h(0.37) = {:.5}, round trip error {:.1e}, image of arc has length {:.4}",
            report.passed,
            report.monotonicity_margin * report.grid_n as f64,
            h.apply(z).value(),
            circ_dist(back, z),
            h.image_arc(&arc).length()
        );
    }

    // the first symbol of a word acts first
    let ifs = Ifs::equal_weight(maps);
    let w = Word(vec![0, 2, 1]);
    println!("word {:?} sends 0.37 to {:.5}", w.symbols(), ifs.compose_word(&w, CirclePoint::new(0.37))?.value());
    Ok(())
}
