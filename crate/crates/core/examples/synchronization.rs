//! Contraction certificate, hitting parameters and minimality evidence for
//! the shipped demo system, with the rotation system as a control.
//!
//! cargo run --release --example synchronization

use std::path::Path;

use ifslab::config::load_config;
use ifslab::diagnostics::{certify_synchronization, default_candidate_arcs, minimality_evidence};
use ifslab::rng::Streams;

fn main() -> ifslab::error::Result<()> {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["demo.json", "rotations.json"] {
        let spec = load_config(&configs.join(name))?;
        let ifs = spec.build_ifs()?;
        let s = &spec.sync;
        let arcs = default_candidate_arcs(s.arcs, s.arc_length);
        println!("{name}:");
        match certify_synchronization(&ifs, &arcs, s.depth, s.trials, s.m_max, s.x_grid, spec.budgets.node_budget, 42) {
            Ok((cert, _)) => println!(
                "  arc [{:.3}, {:.3}], q_hat {:.4} in [{:.4}, {:.4}], mass_hat {:.3}, m {:?}, hitting mass {:?}",
                cert.arc.start.value(),
                cert.arc.end.value(),
                cert.q_hat,
                cert.q_lower,
                cert.q_upper,
                cert.mass_hat.estimate,
                cert.m,
                cert.hit_mass_hat
            ),
            Err(e) => println!("  {e}"),
        }
        let min = minimality_evidence(&ifs, spec.x0(), 14, 0.01, 1 << 20, &Streams::new(42));
        println!("  orbit of depth 14: {} points, largest gap {:.4}", min.orbit_points, min.max_gap);
    }
    Ok(())
}
