//! Harmonic measure of a quarter of the unit circle seen from the center:
//! the walk's exit point from the disk is uniform, so u(0) = 1/4.
//!
//! cargo run --release --example harmonic_measure -- [PATHS]

use std::f64::consts::{FRAC_PI_2, TAU};

use rwos::domain::{BoundaryCondition, BoundaryPiece, Domain2, Side};
use rwos::estimator::{estimate_u, path_rng};
use rwos::geometry::{Arc, Point2};
use rwos::reflection::WalkGeometry;
use rwos::walk::{sample_exit, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(200_000);
    let arc = |a, b| Arc::new(Point2::new(0.0, 0.0), 1.0, a, b, true);
    let disk = Domain2::new(vec![
        BoundaryPiece::new(arc(0.0, FRAC_PI_2), BoundaryCondition::Dirichlet(1.0), Side::FOUR),
        BoundaryPiece::new(arc(FRAC_PI_2, TAU), BoundaryCondition::Dirichlet(0.0), Side::TWO),
    ])?;
    let cfg = WalkConfig::for_domain(&disk).with_seed(3);
    let e = estimate_u(&disk, Point2::new(0.0, 0.0), n, &cfg)?;
    println!("u(0) = {:.5} ± {:.5} (exact 0.25), {:.1} steps per path", e.mean, e.stderr, e.mean_steps);

    let g = WalkGeometry::new(&disk)?;
    let mut bins = [0u64; 8];
    for i in 0..n {
        let exit = sample_exit(&g, Point2::new(0.0, 0.0), &cfg, &mut path_rng(cfg.seed, i, 0))?;
        let angle = exit.point.y.atan2(exit.point.x).rem_euclid(TAU);
        bins[((angle / TAU * 8.0) as usize).min(7)] += 1;
    }
    println!("exit octants (expected {:.0} each): {bins:?}", n as f64 / 8.0);
    Ok(())
}
