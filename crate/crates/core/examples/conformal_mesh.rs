//! Canonical conformal mesh of the L-shape: level lines of u and v = M·ũ
//! written as an SVG, with the node values as CSV.
//!
//! cargo run --release --example conformal_mesh -- [OUT_DIR] [PATHS]

use std::fs;
use std::path::PathBuf;

use rwos::conformal::evaluate_map_grid;
use rwos::contour::{extract_contours, uniform_levels, Field};
use rwos::shapes;
use rwos::svg::mesh_svg;
use rwos::walk::WalkConfig;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dir = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let n: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2000);
    let q = shapes::l_shape()?;
    let h = 1.508154;
    let cfg = WalkConfig::for_domain(q.domain()).with_seed(1);
    let grid = evaluate_map_grid(&q, h, 46, 31, n, &cfg)?;

    let u = extract_contours(&grid, Field::U, &uniform_levels(9, 1.0))?;
    let v = extract_contours(&grid, Field::V, &uniform_levels(9, h))?;
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("l_shape_mesh.svg"), mesh_svg(q.domain(), &u, &v))?;

    let mut csv = String::from("x,y,u,v\n");
    for (i, j) in grid.interior() {
        let (p, k) = (grid.point(i, j), grid.index(i, j));
        csv.push_str(&format!("{},{},{:.6},{:.6}\n", p.x, p.y, grid.u[k], grid.v[k]));
    }
    fs::write(dir.join("l_shape_mesh.csv"), csv)?;
    let lines: usize = u.iter().chain(&v).map(|c| c.polylines.len()).sum();
    println!(
        "{} interior nodes, {lines} polylines, {} resampled paths -> {}",
        grid.interior().count(),
        grid.resampled,
        dir.join("l_shape_mesh.svg").display()
    );
    Ok(())
}
