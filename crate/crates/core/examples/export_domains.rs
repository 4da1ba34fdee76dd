//! Write the bundled domain files: rectangles, an insulated strip, the
//! L-shape, both circular-arc families, the insulated cube and the L-prism.
//!
//! cargo run --example export_domains -- [DIR]

use std::fs;
use std::path::PathBuf;

use rwos::domain::DirichletValues;
use rwos::reference::ArcQuadAngles;
use rwos::shapes;
use rwos::wos3d;

const ARC_ROWS: [(u32, u32, u32); 5] = [(2, 10, 12), (2, 10, 14), (4, 12, 18), (6, 16, 24), (8, 22, 32)];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("domains"));
    fs::create_dir_all(&dir)?;
    let mut files = Vec::new();

    for h in ["0.6", "0.8", "1.0", "1.2", "1.4"] {
        files.push((format!("rectangle_h{h}.json"), shapes::rectangle(h.parse()?)?.to_json()));
    }
    files.push((
        "strip.json".into(),
        shapes::rectangle_with(4.0, 1.0, DirichletValues::default())?.to_json(),
    ));
    files.push(("l_shape.json".into(), shapes::l_shape()?.to_json()));
    for (m, n, r) in ARC_ROWS {
        let angles = ArcQuadAngles::from_24ths(m, n, r)?;
        files.push((format!("type_a_{m}_{n}_{r}.json"), shapes::type_a(angles)?.to_json()));
        files.push((format!("type_b_{m}_{n}_{r}.json"), shapes::type_b(angles)?.to_json()));
    }
    files.push(("cube.json".into(), wos3d::insulated_cube().to_json()));
    files.push(("l_prism.json".into(), wos3d::l_prism().to_json()));

    for (name, json) in files {
        let path = dir.join(name);
        fs::write(&path, json + "\n")?;
        println!("{}", path.display());
    }
    Ok(())
}
