//! Builders for the benchmark quadrilaterals: rectangles, the L-shaped
//! region, and the two circular-arc families in the unit disk.

use std::f64::consts::TAU;

use crate::domain::{DirichletValues, DomainError, Quadrilateral, Side};
use crate::geometry::{arc_through, Arc, Piece, Point2, Segment};
use crate::reference::ArcQuadAngles;

fn seg(a: Point2, b: Point2) -> Piece {
    Segment::new(a, b).into()
}

/// Rectangle `(0,1) × (0,h)` with `z1 = 1+ih, z2 = ih, z3 = 0, z4 = 1`, so
/// its modulus is `h`.
pub fn rectangle(h: f64) -> Result<Quadrilateral, DomainError> {
    rectangle_with(1.0, h, DirichletValues::default())
}

/// Rectangle `(0,w) × (0,h)`: Neumann top and bottom, side 2 is `x = 0` and
/// side 4 is `x = w`.
pub fn rectangle_with(w: f64, h: f64, values: DirichletValues) -> Result<Quadrilateral, DomainError> {
    let p = Point2::new;
    Quadrilateral::new(
        vec![
            (seg(p(w, h), p(0.0, h)), Side::ONE),
            (seg(p(0.0, h), p(0.0, 0.0)), Side::TWO),
            (seg(p(0.0, 0.0), p(w, 0.0)), Side::THREE),
            (seg(p(w, 0.0), p(w, h)), Side::FOUR),
        ],
        values,
    )
}

/// Corners `z1..z6` of the L-shaped region.
pub const L_SHAPE_CORNERS: [Point2; 6] = [
    Point2::new(0.0, 0.0),
    Point2::new(3.0, 0.0),
    Point2::new(3.0, 1.0),
    Point2::new(2.0, 1.0),
    Point2::new(2.0, 2.0),
    Point2::new(0.0, 2.0),
];

/// The L-shaped quadrilateral `(L; z2, z4, z6, z1)`.
pub fn l_shape() -> Result<Quadrilateral, DomainError> {
    let z = L_SHAPE_CORNERS;
    Quadrilateral::new(
        vec![
            (seg(z[1], z[2]), Side::ONE),
            (seg(z[2], z[3]), Side::ONE),
            (seg(z[3], z[4]), Side::TWO),
            (seg(z[4], z[5]), Side::TWO),
            (seg(z[5], z[0]), Side::THREE),
            (seg(z[0], z[1]), Side::FOUR),
        ],
        DirichletValues::default(),
    )
}

fn unit_arc(from: f64, to: f64) -> Piece {
    Arc::new(Point2::new(0.0, 0.0), 1.0, from, to, true).into()
}

/// Arc of the circle orthogonal to the unit circle through `e^{iα}` and
/// `e^{iβ}` (`0 < β − α < π`), oriented from `e^{iα}` to `e^{iβ}` with the
/// disk side on its left.
fn orthogonal_arc(alpha: f64, beta: f64) -> Piece {
    let half = 0.5 * (beta - alpha);
    let mid = 0.5 * (alpha + beta);
    let center = Point2::from_polar(1.0 / half.cos(), mid);
    let radius = half.tan();
    let via = Point2::from_polar(1.0 / half.cos() - radius, mid);
    arc_through(
        center,
        radius,
        Point2::from_polar(1.0, alpha),
        via,
        Point2::from_polar(1.0, beta),
    )
    .into()
}

/// Unit disk with the orthogonal-arc lenses over `[1, e^{ia}]` and
/// `[e^{ib}, e^{ic}]` cut away, marked at `e^{ia}, e^{ib}, e^{ic}, 1`. The
/// orthogonal arcs carry the Dirichlet data.
pub fn type_a(angles: ArcQuadAngles) -> Result<Quadrilateral, DomainError> {
    let (a, b, c) = (angles.a(), angles.b(), angles.c());
    Quadrilateral::new(
        vec![
            (unit_arc(a, b), Side::ONE),
            (orthogonal_arc(b, c), Side::TWO),
            (unit_arc(c, TAU), Side::THREE),
            (orthogonal_arc(0.0, a), Side::FOUR),
        ],
        DirichletValues::default(),
    )
}

/// The unit disk marked at `e^{ia}, e^{ib}, e^{ic}, 1`; every side is an
/// arc of the unit circle.
pub fn type_b(angles: ArcQuadAngles) -> Result<Quadrilateral, DomainError> {
    let (a, b, c) = (angles.a(), angles.b(), angles.c());
    Quadrilateral::new(
        vec![
            (unit_arc(a, b), Side::ONE),
            (unit_arc(b, c), Side::TWO),
            (unit_arc(c, TAU), Side::THREE),
            (unit_arc(0.0, a), Side::FOUR),
        ],
        DirichletValues::default(),
    )
}
