//! Harmonic field in the L-shaped prism: hot top face, cold right end,
//! insulated elsewhere. Prints one line of nodes through each arm.
//!
//! cargo run --release --example field3d -- [PATHS]

use rwos::wos3d::{estimate_u3, l_prism, Point3};
use rwos::walk::WalkConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(20_000);
    let d = l_prism();
    let cfg = WalkConfig::for_diameter(d.diameter()).with_seed(1);
    println!("volume {}, {} insulated edges", d.volume(), d.neumann_edges().len());

    let vertical: Vec<Point3> = (1..8).map(|k| Point3::new(0.5, 0.5, 2.0 - 0.25 * k as f64)).collect();
    let horizontal: Vec<Point3> = (1..8).map(|k| Point3::new(0.25 * k as f64, 0.5, 0.5)).collect();
    for (name, line) in [("x = 0.5, down from the hot face", vertical), ("z = 0.5, toward the cold end", horizontal)] {
        println!("{name}");
        for (p, e) in line.iter().zip(estimate_u3(&d, &line, n, &cfg)) {
            let e = e?;
            println!("  ({:.2}, {:.2}, {:.2})  u = {:.4} ± {:.4}", p.x, p.y, p.z, e.mean, e.stderr);
        }
    }
    Ok(())
}
