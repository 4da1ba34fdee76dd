//! The reflection maps and the step-radius rule near a Neumann piece.

use rwos::geometry::Point2;
use rwos::reflection::WalkGeometry;
use rwos::shapes;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = shapes::type_b(rwos::reference::ArcQuadAngles::from_24ths(2, 10, 12)?)?;
    let g = WalkGeometry::new(q.domain())?;
    let p = Point2::from_polar(0.95, 45f64.to_radians());
    let step = g.walk_radius(p)?;
    println!("type B disk, walker at {p:?}");
    println!("  distance to the boundary {:.4}", q.domain().distance_to_boundary(p));
    println!("  step radius {:.4}, may cross piece {:?}", step.radius, step.active);
    if let Some(i) = step.active {
        let map = g.reflection(i).expect("Neumann piece");
        let outside = Point2::from_polar(1.03, 40f64.to_radians());
        let back = map.apply(outside)?;
        println!("  inversion sends {outside:?} to {back:?}, back to {:?}", map.apply(back)?);
    }

    let l = shapes::l_shape()?;
    let g = WalkGeometry::new(l.domain())?;
    for c in g.corners() {
        println!(
            "L-shape splitting point {:?}: opening {:.1} deg, jump radius {:.3}",
            c.point,
            c.opening.to_degrees(),
            c.radius
        );
    }
    for (i, b) in l.domain().pieces().iter().enumerate() {
        if let Some(images) = g.reflected_obstacles(i) {
            println!("piece {i} ({:?} to {:?}): {} exterior image pieces", b.geometry.start(), b.geometry.end(), images.len());
        }
    }
    Ok(())
}
