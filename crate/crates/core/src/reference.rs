//! Closed-form moduli used as validation references: rectangles, and the two
//! families of circular-arc quadrilaterals inscribed in the unit disk.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ReferenceError {
    #[error("cross-ratio needs four distinct points")]
    Degenerate,
    #[error("angles must satisfy 0 < a < b < c < 2π, got ({0}, {1}, {2})")]
    BadAngles(f64, f64, f64),
    #[error("argument {0} outside the domain of {1}")]
    Domain(f64, &'static str),
}

/// Cross-ratio `[z1, z2, z3, z4] = (z1−z3)(z2−z4) / ((z1−z4)(z2−z3))`.
pub fn cross_ratio(
    z1: Complex64,
    z2: Complex64,
    z3: Complex64,
    z4: Complex64,
) -> Result<Complex64, ReferenceError> {
    let pts = [z1, z2, z3, z4];
    for i in 0..4 {
        for j in i + 1..4 {
            if pts[i] == pts[j] {
                return Err(ReferenceError::Degenerate);
            }
        }
    }
    Ok((z1 - z3) * (z2 - z4) / ((z1 - z4) * (z2 - z3)))
}

/// Angles of the marked points `e^{ia}, e^{ib}, e^{ic}` (the fourth is 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcQuadAngles {
    a: f64,
    b: f64,
    c: f64,
}

impl ArcQuadAngles {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self, ReferenceError> {
        if 0.0 < a && a < b && b < c && c < TAU {
            Ok(Self { a, b, c })
        } else {
            Err(ReferenceError::BadAngles(a, b, c))
        }
    }

    /// Angles `(m, n, r) · π/24`, the labelling used by the benchmark tables.
    pub fn from_24ths(m: u32, n: u32, r: u32) -> Result<Self, ReferenceError> {
        let s = PI / 24.0;
        Self::new(m as f64 * s, n as f64 * s, r as f64 * s)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }
}

/// `|[e^{ia}, e^{ib}, e^{ic}, 1]|` in closed form: the cross-ratio of the
/// marked points taken in boundary order.
pub fn unit_circle_u(angles: ArcQuadAngles) -> f64 {
    let ArcQuadAngles { a, b, c } = angles;
    ((b / 2.0).sin() * ((c - a) / 2.0).sin()) / ((a / 2.0).sin() * ((c - b) / 2.0).sin())
}

/// Modulus of the disk with the two orthogonal-arc lenses over `[1, e^{ia}]`
/// and `[e^{ib}, e^{ic}]` removed: half the annulus modulus, `π / log t`.
pub fn type_a_modulus(angles: ArcQuadAngles) -> Result<f64, ReferenceError> {
    let u = unit_circle_u(angles);
    if u <= 1.0 {
        return Err(ReferenceError::Domain(u, "type A modulus"));
    }
    let t = 2.0 * u - 1.0 + 2.0 * (u * u - u).sqrt();
    Ok(PI / t.ln())
}

/// Arithmetic-geometric mean, iterated to a fixed point.
pub fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..64 {
        let (an, bn) = (0.5 * (a + b), (a * b).sqrt());
        if (an - bn).abs() <= 1e-15 * an {
            return an;
        }
        a = an;
        b = bn;
    }
    a
}

/// Complete elliptic integral of the first kind, `K(k) = π / (2·AGM(1, √(1−k²)))`.
pub fn elliptic_k(k: f64) -> Result<f64, ReferenceError> {
    if !(0.0..1.0).contains(&k) {
        return Err(ReferenceError::Domain(k, "K"));
    }
    Ok(PI / (2.0 * agm(1.0, (1.0 - k * k).sqrt())))
}

/// Grötzsch ring modulus `μ(r) = (π/2)·K(√(1−r²)) / K(r)`.
pub fn grotzsch_mu(r: f64) -> Result<f64, ReferenceError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(ReferenceError::Domain(r, "Grötzsch modulus"));
    }
    // K(r')/K(r) = AGM(1, r')/AGM(1, r); forming r' = √(1−r²) twice would
    // lose the small-r digits.
    let r_prime = (1.0 - r * r).sqrt();
    Ok(FRAC_PI_2 * agm(1.0, r_prime) / agm(1.0, r))
}

/// Capacity of the Teichmüller ring, `τ(t) = π / μ(1/√(1+t))`.
pub fn teichmuller_capacity(t: f64) -> Result<f64, ReferenceError> {
    if !(t > 0.0) {
        return Err(ReferenceError::Domain(t, "Teichmüller capacity"));
    }
    Ok(PI / grotzsch_mu(1.0 / (1.0 + t).sqrt())?)
}

/// Modulus of the unit disk with marked points `e^{ia}, e^{ib}, e^{ic}, 1`:
/// `τ(u − 1) / 2`.
pub fn type_b_modulus(angles: ArcQuadAngles) -> Result<f64, ReferenceError> {
    let u = unit_circle_u(angles);
    if u <= 1.0 {
        return Err(ReferenceError::Domain(u, "type B modulus"));
    }
    Ok(0.5 * teichmuller_capacity(u - 1.0)?)
}

/// The normalised rectangle `(0,1) × (0,h)` has modulus `h`.
pub fn rectangle_modulus(h: f64) -> Result<f64, ReferenceError> {
    if h > 0.0 && h.is_finite() {
        Ok(h)
    } else {
        Err(ReferenceError::Domain(h, "rectangle modulus"))
    }
}
