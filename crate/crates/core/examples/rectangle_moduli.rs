//! Moduli of the rectangles (0,1) × (0,h) from finite differences of the
//! walk estimates of u and of the conjugate problem.
//!
//! cargo run --release --example rectangle_moduli -- [PATHS]

use rwos::conformal::{estimate_modulus, ModulusConfig};
use rwos::shapes;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(50_000);
    println!("{:>5} {:>9} {:>9} {:>9} {:>12}", "h", "estimate", "stderr", "error", "consistency");
    for h in [0.6, 0.8, 1.0, 1.2, 1.4] {
        let q = shapes::rectangle(h)?;
        let r = estimate_modulus(&q, &ModulusConfig::new(&q, n).with_seed(1))?;
        println!(
            "{h:>5.1} {:>9.5} {:>9.5} {:>+9.5} {:>12.2e}",
            r.h,
            r.stderr,
            r.h - h,
            r.consistency
        );
    }
    Ok(())
}
