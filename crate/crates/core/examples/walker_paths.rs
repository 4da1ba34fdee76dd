//! Individual reflected trajectories in the L-shape: exit side, step and
//! reflection counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rwos::geometry::Point2;
use rwos::reflection::WalkGeometry;
use rwos::shapes;
use rwos::walk::{sample_exit, WalkConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = shapes::l_shape()?;
    let g = WalkGeometry::new(q.domain())?;
    let cfg = WalkConfig::for_domain(q.domain());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let start = Point2::new(2.5, 0.5);
    for _ in 0..10 {
        let e = sample_exit(&g, start, &cfg, &mut rng)?;
        println!(
            "exit ({:.4}, {:.4}) on side {} (u = {}), {} steps, {} reflections",
            e.point.x,
            e.point.y,
            e.side.label(),
            e.value,
            e.steps,
            e.reflections
        );
    }
    Ok(())
}
