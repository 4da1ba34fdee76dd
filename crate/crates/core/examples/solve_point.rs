//! Estimate u at a few points of the insulated strip, where u = x / 4.
//!
//! cargo run --release --example solve_point -- [PATHS]

use rwos::estimator::estimate_batch;
use rwos::geometry::Point2;
use rwos::shapes;
use rwos::walk::WalkConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(50_000);
    let strip = shapes::rectangle_with(4.0, 1.0, Default::default())?;
    let cfg = WalkConfig::for_domain(strip.domain()).with_seed(1);
    let points: Vec<Point2> = (1..8).map(|k| Point2::new(0.5 * k as f64, 0.5)).collect();

    println!("{:>6} {:>10} {:>10} {:>8} {:>7}", "x", "estimate", "exact", "stderr", "steps");
    for (p, e) in points.iter().zip(estimate_batch(strip.domain(), &points, n, &cfg)?) {
        let e = e?;
        println!(
            "{:>6.2} {:>10.5} {:>10.5} {:>8.5} {:>7.1}",
            p.x,
            e.mean,
            p.x / 4.0,
            e.stderr,
            e.mean_steps
        );
    }
    Ok(())
}
