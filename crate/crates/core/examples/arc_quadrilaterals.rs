//! Closed-form moduli of the two circular-arc families, optionally compared
//! with walk estimates.
//!
//! cargo run --release --example arc_quadrilaterals -- [PATHS]

use rwos::conformal::{estimate_modulus, ModulusConfig};
use rwos::reference::{type_a_modulus, type_b_modulus, ArcQuadAngles};
use rwos::shapes;

const ROWS: [(u32, u32, u32); 5] = [(2, 10, 12), (2, 10, 14), (4, 12, 18), (6, 16, 24), (8, 22, 32)];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    println!("angles in units of pi/24; walk estimates need a path count argument");
    println!("{:>12} {:>10} {:>10} {:>10} {:>10}", "(m,n,r)", "type A", "walk", "type B", "walk");
    for (m, k, r) in ROWS {
        let angles = ArcQuadAngles::from_24ths(m, k, r)?;
        let (a, b) = (type_a_modulus(angles)?, type_b_modulus(angles)?);
        let walk = |q: rwos::domain::Quadrilateral| -> Result<String, Box<dyn std::error::Error>> {
            if n == 0 {
                return Ok("-".into());
            }
            Ok(format!("{:.5}", estimate_modulus(&q, &ModulusConfig::new(&q, n).with_seed(1))?.h))
        };
        println!(
            "{:>12} {a:>10.6} {:>10} {b:>10.6} {:>10}",
            format!("({m},{k},{r})"),
            walk(shapes::type_a(angles)?)?,
            walk(shapes::type_b(angles)?)?
        );
    }
    Ok(())
}
