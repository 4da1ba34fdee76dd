//! Anti-conformal reflections across zero-Neumann pieces and the walk-radius
//! rule built on them.
//!
//! A straight Neumann piece reflects through its supporting line; a circular
//! one through inversion in its full circle. Both maps are involutions that
//! fix the piece pointwise, so a sample that jumped across the piece can be
//! folded back into the domain.
//!
//! The radius for a step from `p` follows the nearest-piece rule: if the
//! nearest boundary piece `N_i` is Neumann, the walk sphere may cross `N_i`
//! but must avoid every other boundary piece, the splitting points, and the
//! mirror images `g_i(∂Ω ∖ N_i)`. Otherwise it is the plain distance to the
//! boundary.
//!
//! Only the part of the sphere outside `Ω` is folded back, so only the parts
//! of the mirror images lying outside `Ω` can obstruct a step. Images are
//! clipped to those parts once, when the geometry is built. Without the
//! clipping, an image that cuts through the interior (the mirrored wall at a
//! re-entrant corner, say) would act as a barrier no walker can cross.

use thiserror::Error;

use crate::domain::Domain2;
use crate::geometry::{arc_through, Arc, Piece, Point2, Segment};
use crate::walk::WalkError;

/// Relative tolerance for "on the inversion circle / through its center".
const INCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("inversion evaluated at its center {0:?}")]
    Singularity(Point2),
    #[error("piece {piece} passes through the inversion center")]
    ThroughCenter { piece: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReflectionMap {
    /// Mirror through the line `point + t·direction` (`direction` is unit).
    Line { point: Point2, direction: Point2 },
    /// Inversion in the circle `|z − center| = radius`.
    Inversion { center: Point2, radius: f64 },
}

impl ReflectionMap {
    /// The reflection that fixes `piece` pointwise.
    pub fn for_piece(piece: &Piece) -> Self {
        match piece {
            Piece::Segment(s) => {
                let d = s.end - s.start;
                ReflectionMap::Line {
                    point: s.start,
                    direction: d * (1.0 / d.norm()),
                }
            }
            Piece::Arc(a) => ReflectionMap::Inversion {
                center: a.center,
                radius: a.radius,
            },
        }
    }

    pub fn apply(&self, p: Point2) -> Result<Point2, GeometryError> {
        match *self {
            ReflectionMap::Line { point, direction } => {
                let rel = p - point;
                let along = direction * rel.dot(direction);
                Ok(point + along * 2.0 - rel)
            }
            ReflectionMap::Inversion { center, radius } => {
                let rel = p - center;
                let rho_sq = rel.norm_sq();
                if rho_sq.sqrt() < 1e-14 * radius {
                    return Err(GeometryError::Singularity(p));
                }
                Ok(center + rel * (radius * radius / rho_sq))
            }
        }
    }

    /// Exact image of a boundary piece. Segments and arcs map to segments and
    /// arcs; `index` only labels errors.
    pub fn image_of_piece(&self, piece: &Piece, index: usize) -> Result<Piece, GeometryError> {
        match *self {
            ReflectionMap::Line { direction, .. } => Ok(match piece {
                Piece::Segment(s) => {
                    Segment::new(self.apply(s.start)?, self.apply(s.end)?).into()
                }
                Piece::Arc(a) => {
                    // Mirroring across a line at angle φ sends angle θ to 2φ − θ.
                    let phi = direction.angle();
                    let center = self.apply(a.center)?;
                    Arc {
                        center,
                        radius: a.radius,
                        start_angle: 2.0 * phi - a.start_angle,
                        end_angle: 2.0 * phi - a.end_angle,
                        sweep: -a.sweep,
                    }
                    .into()
                }
            }),
            ReflectionMap::Inversion { center, radius } => {
                self.invert_piece(piece, center, radius, index)
            }
        }
    }

    fn invert_piece(
        &self,
        piece: &Piece,
        c: Point2,
        big_r: f64,
        index: usize,
    ) -> Result<Piece, GeometryError> {
        let tol = INCIDENCE_TOL * big_r.max(1.0);
        if piece.distance(c) <= tol {
            return Err(GeometryError::ThroughCenter { piece: index });
        }
        let r2 = big_r * big_r;
        let (s, m, e) = (
            self.apply(piece.start())?,
            self.apply(piece.midpoint())?,
            self.apply(piece.end())?,
        );
        match piece {
            Piece::Segment(seg) => {
                let d = seg.end - seg.start;
                let unit = d * (1.0 / d.norm());
                let offset = (seg.start - c).cross(unit);
                if offset.abs() <= tol {
                    // Collinear with the center: the image stays on the line.
                    return Ok(Segment::new(s, e).into());
                }
                // The image circle passes through c; its diameter is R²/dist.
                let normal = unit.perp() * -offset.signum();
                let dist = offset.abs();
                let img_center = c + normal * (r2 / (2.0 * dist));
                Ok(arc_through(img_center, r2 / (2.0 * dist), s, m, e).into())
            }
            Piece::Arc(a) => {
                let rel = a.center - c;
                let power = rel.norm_sq() - a.radius * a.radius;
                if (a.center.distance(c)).abs() <= tol && (a.radius - big_r).abs() <= tol {
                    return Ok(*piece);
                }
                if power.abs() <= tol * a.radius.max(1.0) {
                    // Circle through the center maps to a line.
                    return Ok(Segment::new(s, e).into());
                }
                let img_center = c + rel * (r2 / power);
                let img_radius = r2 * a.radius / power.abs();
                Ok(arc_through(img_center, img_radius, s, m, e).into())
            }
        }
    }
}

/// What the walker needs to know about one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRadius {
    pub radius: f64,
    /// Index of the Neumann piece the sphere may cross.
    pub active: Option<usize>,
    /// Distance to the Dirichlet boundary.
    pub dirichlet_distance: f64,
}

#[derive(Debug, Clone)]
struct Mirror {
    map: ReflectionMap,
    /// Parts of the images `g_i(piece_j)`, `j ≠ i`, outside the closed domain.
    images: Vec<Piece>,
}

/// Parts of `image` that lie outside the closed domain.
fn exterior_parts(domain: &Domain2, image: &Piece, tol: f64) -> Vec<Piece> {
    let mut ts = vec![0.0, 1.0];
    for b in domain.pieces() {
        ts.extend(image.split_params(&b.geometry, tol));
    }
    ts.sort_by(f64::total_cmp);
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12);
    ts.windows(2)
        .map(|w| image.sub_piece(w[0], w[1]))
        .filter(|sub| {
            let mid = sub.midpoint();
            sub.length() > tol && domain.distance_to_boundary(mid) > tol && !domain.contains(mid)
        })
        .collect()
}

/// Neighbourhood of a splitting point.
///
/// Capped by the distance to the splitting point, steps near it shrink
/// geometrically in a driftless way and the walker can creep to the point
/// itself. Within `trigger` of the point the walker instead jumps to a
/// uniformly distributed angle on the arc of radius `radius` around it: from
/// the apex of a wedge with reflecting sides that is the exact exit law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub point: Point2,
    /// Direction of the first wall leaving the corner into the domain.
    pub start_angle: f64,
    /// Interior angle, in `(0, 2π)`.
    pub opening: f64,
    pub radius: f64,
    pub trigger: f64,
}

impl Corner {
    fn build(domain: &Domain2, incoming: usize, outgoing: usize) -> Self {
        let pieces = domain.pieces();
        let (a, b) = (&pieces[incoming].geometry, &pieces[outgoing].geometry);
        let point = b.start();
        let out_dir = b.tangent_at(0.0);
        let back_dir = -a.tangent_at(1.0);
        let start_angle = out_dir.angle();
        let mut opening = (back_dir.angle() - start_angle).rem_euclid(std::f64::consts::TAU);
        if opening == 0.0 {
            opening = std::f64::consts::TAU;
        }
        let mut reach = a.length().min(b.length());
        for (j, other) in pieces.iter().enumerate() {
            if j != incoming && j != outgoing {
                reach = reach.min(other.geometry.distance(point));
            }
        }
        for piece in [a, b] {
            if let Piece::Arc(arc) = piece {
                reach = reach.min(arc.radius);
            }
        }
        let radius = 0.25 * reach;
        Self {
            point,
            start_angle,
            opening,
            radius,
            trigger: 1e-3 * radius,
        }
    }

    /// Landing point of a corner jump for `u ∈ [0, 1)`.
    pub fn landing(&self, u: f64) -> Point2 {
        self.point + Point2::from_polar(self.radius, self.start_angle + u * self.opening)
    }
}

/// A domain together with the reflection data the walker uses, precomputed
/// once per Neumann piece.
#[derive(Debug, Clone)]
pub struct WalkGeometry {
    domain: Domain2,
    mirrors: Vec<Option<Mirror>>,
    corners: Vec<Corner>,
    stall_radius: f64,
}

impl WalkGeometry {
    pub fn new(domain: &Domain2) -> Result<Self, GeometryError> {
        let pieces = domain.pieces();
        let mut mirrors = Vec::with_capacity(pieces.len());
        for (i, b) in pieces.iter().enumerate() {
            if !b.bc.is_neumann() {
                mirrors.push(None);
                continue;
            }
            let map = ReflectionMap::for_piece(&b.geometry);
            let tol = 1e-9 * domain.diameter();
            let mut images = Vec::new();
            for (j, other) in pieces.iter().enumerate() {
                if j != i {
                    let image = map.image_of_piece(&other.geometry, j)?;
                    images.extend(exterior_parts(domain, &image, tol));
                }
            }
            mirrors.push(Some(Mirror { map, images }));
        }
        let n = pieces.len();
        let corners = (0..n)
            .filter(|&k| pieces[k].bc.is_neumann() && pieces[(k + 1) % n].bc.is_neumann())
            .map(|k| Corner::build(domain, k, (k + 1) % n))
            .collect();
        Ok(Self {
            domain: domain.clone(),
            mirrors,
            corners,
            stall_radius: 1e-12 * domain.diameter(),
        })
    }

    pub fn domain(&self) -> &Domain2 {
        &self.domain
    }

    /// Reflection map of piece `i`, if it is Neumann.
    pub fn reflection(&self, i: usize) -> Option<&ReflectionMap> {
        self.mirrors.get(i)?.as_ref().map(|m| &m.map)
    }

    /// Precomputed obstacles from `g_i(∂Ω ∖ N_i)` for Neumann piece `i`:
    /// the parts of the images outside the domain.
    pub fn reflected_obstacles(&self, i: usize) -> Option<&[Piece]> {
        self.mirrors.get(i)?.as_ref().map(|m| m.images.as_slice())
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    /// The splitting-point neighbourhood whose trigger zone contains `p`.
    pub fn corner_near(&self, p: Point2) -> Option<&Corner> {
        self.corners.iter().find(|c| p.distance(c.point) < c.trigger)
    }

    /// Radius of the next walk sphere around `p`.
    pub fn walk_radius(&self, p: Point2) -> Result<StepRadius, WalkError> {
        let pieces = self.domain.pieces();
        let mut nearest = (usize::MAX, f64::INFINITY);
        let mut dirichlet_distance = f64::INFINITY;
        // Track the two smallest distances so "all pieces but the nearest"
        // needs no second pass.
        let mut second = f64::INFINITY;
        for (i, b) in pieces.iter().enumerate() {
            let d = b.geometry.distance(p);
            if b.bc.is_dirichlet() {
                dirichlet_distance = dirichlet_distance.min(d);
            }
            // A Neumann piece is active only when strictly nearer than every
            // Dirichlet piece.
            let wins = d < nearest.1 || (d == nearest.1 && b.bc.is_dirichlet());
            if wins {
                second = nearest.1;
                nearest = (i, d);
            } else if d < second {
                second = d;
            }
        }
        let (i, d_nearest) = nearest;
        let step = match &self.mirrors[i] {
            None => StepRadius {
                radius: d_nearest,
                active: None,
                dirichlet_distance,
            },
            Some(mirror) => {
                let mut radius = second;
                for s in self.domain.splitting_points() {
                    radius = radius.min(p.distance(*s));
                }
                for img in &mirror.images {
                    radius = radius.min(img.distance(p));
                }
                StepRadius {
                    radius,
                    active: Some(i),
                    dirichlet_distance,
                }
            }
        };
        // A walker this close to Γ_D is about to be absorbed, not stalled.
        if step.radius < self.stall_radius && step.radius < step.dirichlet_distance {
            return Err(WalkError::Stalled { at: vec![p.x, p.y] });
        }
        Ok(step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DirichletValues, Quadrilateral, Side};
    use std::f64::consts::PI;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    #[test]
    fn mirror_across_x_axis() {
        let m = ReflectionMap::for_piece(&Segment::new(p(-1.0, 0.0), p(1.0, 0.0)).into());
        let q = m.apply(p(0.0, 1.0)).unwrap();
        assert!(q.distance(p(0.0, -1.0)) < 1e-15);
    }

    #[test]
    fn inversion_examples() {
        let unit = ReflectionMap::Inversion {
            center: p(0.0, 0.0),
            radius: 1.0,
        };
        assert!(unit.apply(p(2.0, 0.0)).unwrap().distance(p(0.5, 0.0)) < 1e-15);
        let shifted = ReflectionMap::Inversion {
            center: p(1.0, 1.0),
            radius: 2.0,
        };
        assert!(shifted.apply(p(5.0, 1.0)).unwrap().distance(p(2.0, 1.0)) < 1e-15);
        assert!(matches!(
            unit.apply(p(0.0, 0.0)),
            Err(GeometryError::Singularity(_))
        ));
    }

    #[test]
    fn maps_for_pieces() {
        let seg: Piece = Segment::new(p(0.0, 0.0), p(0.0, 2.0)).into();
        assert_eq!(
            ReflectionMap::for_piece(&seg),
            ReflectionMap::Line {
                point: p(0.0, 0.0),
                direction: p(0.0, 1.0)
            }
        );
        let arc: Piece = Arc::new(p(0.0, 0.0), 1.0, 0.0, 1.0, true).into();
        assert_eq!(
            ReflectionMap::for_piece(&arc),
            ReflectionMap::Inversion {
                center: p(0.0, 0.0),
                radius: 1.0
            }
        );
    }

    #[test]
    fn pieces_fixed_by_their_own_map() {
        let pieces: [Piece; 3] = [
            Segment::new(p(0.3, -1.0), p(2.0, 0.7)).into(),
            Arc::new(p(1.0, 2.0), 0.7, -0.3, 2.5, true).into(),
            Arc::new(p(-1.0, 0.5), 3.0, 2.0, 1.0, false).into(),
        ];
        for piece in &pieces {
            let map = ReflectionMap::for_piece(piece);
            for k in 0..=20 {
                let q = piece.point_at(k as f64 / 20.0);
                assert!(map.apply(q).unwrap().distance(q) < 1e-12);
            }
        }
    }

    #[test]
    fn inverted_segment_becomes_arc() {
        let map = ReflectionMap::Inversion {
            center: p(0.0, 0.0),
            radius: 1.0,
        };
        let seg: Piece = Segment::new(p(2.0, -1.0), p(2.0, 1.0)).into();
        let img = map.image_of_piece(&seg, 0).unwrap();
        let Piece::Arc(a) = img else {
            panic!("expected arc, got {img:?}")
        };
        assert!(a.center.distance(p(0.25, 0.0)) < 1e-12);
        assert!((a.radius - 0.25).abs() < 1e-12);
        assert!(a.start().distance(p(0.4, -0.2)) < 1e-12);
        assert!(a.end().distance(p(0.4, 0.2)) < 1e-12);
        for k in 0..20 {
            let q = map.apply(seg.point_at((k as f64 + 0.5) / 20.0)).unwrap();
            assert!(img.distance(q) < 1e-12);
        }
    }

    #[test]
    fn collinear_segment_stays_a_segment() {
        let map = ReflectionMap::Inversion {
            center: p(0.0, 0.0),
            radius: 1.0,
        };
        let img = map
            .image_of_piece(&Segment::new(p(2.0, 0.0), p(3.0, 0.0)).into(), 0)
            .unwrap();
        let Piece::Segment(s) = img else {
            panic!("expected segment")
        };
        assert!(s.start.distance(p(0.5, 0.0)) < 1e-15);
        assert!(s.end.distance(p(1.0 / 3.0, 0.0)) < 1e-15);
    }

    #[test]
    fn arc_on_inversion_circle_is_fixed() {
        let map = ReflectionMap::Inversion {
            center: p(0.0, 0.0),
            radius: 1.0,
        };
        let arc: Piece = Arc::new(p(0.0, 0.0), 1.0, 0.2, 1.4, true).into();
        assert_eq!(map.image_of_piece(&arc, 0).unwrap(), arc);
    }

    #[test]
    fn through_center_is_an_error() {
        let map = ReflectionMap::Inversion {
            center: p(0.0, 0.0),
            radius: 1.0,
        };
        let seg: Piece = Segment::new(p(-1.0, 0.0), p(1.0, 0.0)).into();
        assert_eq!(
            map.image_of_piece(&seg, 7),
            Err(GeometryError::ThroughCenter { piece: 7 })
        );
    }

    fn left_neumann_square() -> WalkGeometry {
        use crate::domain::{BoundaryCondition, BoundaryPiece};
        let d = |v| BoundaryCondition::Dirichlet(v);
        let pieces = vec![
            BoundaryPiece::new(Segment::new(p(0.0, 0.0), p(1.0, 0.0)), d(0.0), Side::TWO),
            BoundaryPiece::new(Segment::new(p(1.0, 0.0), p(1.0, 1.0)), d(1.0), Side::FOUR),
            BoundaryPiece::new(Segment::new(p(1.0, 1.0), p(0.0, 1.0)), d(0.0), Side::TWO),
            BoundaryPiece::new(
                Segment::new(p(0.0, 1.0), p(0.0, 0.0)),
                BoundaryCondition::NeumannZero,
                Side::ONE,
            ),
        ];
        WalkGeometry::new(&Domain2::new(pieces).unwrap()).unwrap()
    }

    #[test]
    fn radius_next_to_neumann_wall() {
        let g = left_neumann_square();
        // Candidates: Dirichlet walls 0.8, 0.5, 0.5; mirrored x=1 at 1.2;
        // mirrored bottom/top at hypot(0.2, 0.5).
        let step = g.walk_radius(p(0.2, 0.5)).unwrap();
        assert_eq!(step.active, Some(3));
        assert!((step.radius - 0.5).abs() < 1e-15);
    }

    #[test]
    fn radius_next_to_dirichlet_wall() {
        let g = left_neumann_square();
        let step = g.walk_radius(p(0.9, 0.5)).unwrap();
        assert_eq!(step.active, None);
        assert!((step.radius - 0.1).abs() < 1e-15);
    }

    #[test]
    fn disk_with_arc_sides_radius_exceeds_neumann_distance() {
        // Type-B style labelling: four arcs of the unit circle.
        let cuts = [0.0, 0.5 * PI, PI, 1.5 * PI, 2.0 * PI];
        let sides = [Side::FOUR, Side::ONE, Side::TWO, Side::THREE];
        let pieces = (0..4)
            .map(|k| {
                (
                    Arc::new(p(0.0, 0.0), 1.0, cuts[k], cuts[k + 1], true).into(),
                    sides[k],
                )
            })
            .collect();
        let q = Quadrilateral::new(pieces, DirichletValues::default()).unwrap();
        let g = WalkGeometry::new(q.domain()).unwrap();
        let start = Point2::from_polar(0.9, 0.75 * PI);
        let step = g.walk_radius(start).unwrap();
        assert_eq!(step.active, Some(1));
        // Nearest obstacle is a marked point at angle π/2 or π.
        let expected = start
            .distance(Point2::from_polar(1.0, 0.5 * PI))
            .min(start.distance(Point2::from_polar(1.0, PI)));
        assert!((step.radius - expected).abs() < 1e-12);
        assert!(step.radius > 0.1 + 1e-3);
    }
}
