//! The L-shaped quadrilateral and its conjugate: the two moduli are
//! reciprocal.
//!
//! cargo run --release --example l_shape_reciprocal -- [PATHS]

use rwos::conformal::{conjugate_seed, estimate_modulus, ModulusConfig};
use rwos::shapes;

const M: f64 = 1.508154;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: u64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(50_000);
    let q = shapes::l_shape()?;
    let r = estimate_modulus(&q, &ModulusConfig::new(&q, n).with_seed(1))?;
    let conj = q.conjugate();
    let c = estimate_modulus(&conj, &ModulusConfig::new(&conj, n).with_seed(conjugate_seed(2)))?;
    println!("evaluation point {:?}, delta {:.3}", r.eval_point, r.delta);
    println!("M(Q)      = {:.5} ± {:.5}   (reference {M})", r.h, r.stderr);
    println!("M(Q~)     = {:.5} ± {:.5}   (reference {:.6})", c.h, c.stderr, 1.0 / M);
    println!("M(Q)M(Q~) = {:.5}", r.h * c.h);
    for (name, m) in [("u_x / u~_y", r.h_from_x), ("-u_y / u~_x", r.h_from_y)] {
        match m {
            Some(m) => println!("  {name:<12} {:.5} ± {:.5}", m.value, m.stderr),
            None => println!("  {name:<12} ill-conditioned"),
        }
    }
    Ok(())
}
