//! Boundary-value problem description for planar domains: boundary pieces
//! with conditions and side labels, quadrilaterals, conjugation and the JSON
//! domain file format.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Arc, Bounds, Piece, Point2, Segment};

/// Relative tolerance for chain closure.
const CLOSURE_TOL: f64 = 1e-9;
/// Relative tolerance below which a piece counts as degenerate.
const DEGENERATE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported dimension {0} (expected 2)")]
    Dimension(u64),
    #[error("domain needs at least one piece")]
    Empty,
    #[error("non-finite value in piece {piece}")]
    NonFinite { piece: usize },
    #[error("degenerate piece {piece}: {reason}")]
    Degenerate { piece: usize, reason: String },
    #[error("open chain at piece {piece}: gap {gap:e} to the next piece")]
    OpenChain { piece: usize, gap: f64 },
    #[error("boundary is not positively oriented (signed area {area:e})")]
    Orientation { area: f64 },
    #[error("domain has no Dirichlet piece")]
    NoDirichlet,
    #[error("invalid side label {0} (expected 1..=4)")]
    BadSide(u64),
    #[error("side {0} is missing")]
    MissingSide(Side),
    #[error("side {0} is not one contiguous run in cyclic order 1,2,3,4")]
    NonContiguousSide(Side),
    #[error("wrong boundary condition for side {side}: expected {expected}")]
    WrongCondition { side: Side, expected: &'static str },
    #[error("side {0} is Neumann and has no Dirichlet value")]
    NeumannSide(Side),
}

/// Boundary condition on one boundary piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Dirichlet(f64),
    NeumannZero,
}

impl BoundaryCondition {
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryCondition::Dirichlet(_))
    }

    pub fn is_neumann(&self) -> bool {
        matches!(self, BoundaryCondition::NeumannZero)
    }

    pub fn value(&self) -> Option<f64> {
        match *self {
            BoundaryCondition::Dirichlet(v) => Some(v),
            BoundaryCondition::NeumannZero => None,
        }
    }
}

/// Quadrilateral side label γ1..γ4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Side(u8);

impl Side {
    pub const ONE: Side = Side(1);
    pub const TWO: Side = Side(2);
    pub const THREE: Side = Side(3);
    pub const FOUR: Side = Side(4);
    pub const ALL: [Side; 4] = [Side::ONE, Side::TWO, Side::THREE, Side::FOUR];

    pub fn new(label: u64) -> Result<Self, DomainError> {
        match label {
            1..=4 => Ok(Side(label as u8)),
            other => Err(DomainError::BadSide(other)),
        }
    }

    pub fn label(self) -> u8 {
        self.0
    }

    /// Sides 2 and 4 carry Dirichlet data in the canonical problem.
    pub fn is_dirichlet(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Label after conjugation: side j becomes side j−1 (1 wraps to 4).
    pub fn conjugated(self) -> Side {
        Side(if self.0 == 1 { 4 } else { self.0 - 1 })
    }

    fn next(self) -> Side {
        Side(self.0 % 4 + 1)
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPiece {
    pub geometry: Piece,
    pub bc: BoundaryCondition,
    pub side: Side,
}

impl BoundaryPiece {
    pub fn new(geometry: impl Into<Piece>, bc: BoundaryCondition, side: Side) -> Self {
        Self {
            geometry: geometry.into(),
            bc,
            side,
        }
    }
}

/// A simply connected planar domain bounded by a positively oriented closed
/// chain of segments and arcs, each with a boundary condition.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain2 {
    pieces: Vec<BoundaryPiece>,
    splitting_points: Vec<Point2>,
    diameter: f64,
    bounds: Bounds,
}

impl Domain2 {
    pub fn new(pieces: Vec<BoundaryPiece>) -> Result<Self, DomainError> {
        if pieces.is_empty() {
            return Err(DomainError::Empty);
        }
        for (i, p) in pieces.iter().enumerate() {
            let finite = match &p.geometry {
                Piece::Segment(s) => s.start.is_finite() && s.end.is_finite(),
                Piece::Arc(a) => {
                    a.center.is_finite()
                        && a.radius.is_finite()
                        && a.start_angle.is_finite()
                        && a.end_angle.is_finite()
                }
            };
            let bc_finite = p.bc.value().is_none_or(f64::is_finite);
            if !finite || !bc_finite {
                return Err(DomainError::NonFinite { piece: i });
            }
            if let Piece::Arc(a) = &p.geometry {
                if a.radius <= 0.0 {
                    return Err(DomainError::Degenerate {
                        piece: i,
                        reason: format!("arc radius {} is not positive", a.radius),
                    });
                }
            }
        }

        let diameter = boundary_diameter(&pieces);
        let bounds = Bounds::from_points(pieces.iter().flat_map(|p| p.geometry.extent_points()));

        for (i, p) in pieces.iter().enumerate() {
            if p.geometry.length() <= DEGENERATE_TOL * diameter {
                return Err(DomainError::Degenerate {
                    piece: i,
                    reason: "zero length".into(),
                });
            }
        }

        let n = pieces.len();
        for i in 0..n {
            let gap = pieces[i].geometry.end().distance(pieces[(i + 1) % n].geometry.start());
            if gap > CLOSURE_TOL * diameter {
                return Err(DomainError::OpenChain { piece: i, gap });
            }
        }

        let area: f64 = pieces.iter().map(|p| p.geometry.signed_area_term()).sum();
        if area <= 0.0 {
            return Err(DomainError::Orientation { area });
        }
        if !pieces.iter().any(|p| p.bc.is_dirichlet()) {
            return Err(DomainError::NoDirichlet);
        }

        let splitting_points = (0..n)
            .filter(|&i| pieces[i].bc.is_neumann() && pieces[(i + 1) % n].bc.is_neumann())
            .map(|i| pieces[i].geometry.end())
            .collect();

        Ok(Self {
            pieces,
            splitting_points,
            diameter,
            bounds,
        })
    }

    pub fn pieces(&self) -> &[BoundaryPiece] {
        &self.pieces
    }

    /// Junctions between consecutive zero-Neumann pieces.
    pub fn splitting_points(&self) -> &[Point2] {
        &self.splitting_points
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn signed_area(&self) -> f64 {
        self.pieces.iter().map(|p| p.geometry.signed_area_term()).sum()
    }

    /// Strict interior test by winding number. Points within roughly
    /// `1e-12 · diameter` of the boundary may be classified either way.
    pub fn contains(&self, p: Point2) -> bool {
        let total: f64 = self.pieces.iter().map(|b| b.geometry.winding_angle(p)).sum();
        (total / TAU).round() != 0.0
    }

    /// Distance from `p` to the whole boundary.
    pub fn distance_to_boundary(&self, p: Point2) -> f64 {
        self.pieces
            .iter()
            .map(|b| b.geometry.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `p` to the Dirichlet part of the boundary.
    pub fn distance_to_dirichlet(&self, p: Point2) -> f64 {
        self.pieces
            .iter()
            .filter(|b| b.bc.is_dirichlet())
            .map(|b| b.geometry.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest point of the Dirichlet boundary, with the index of the piece
    /// it lies on. Ties go to the lowest piece index.
    pub fn project_to_dirichlet(&self, p: Point2) -> (Point2, usize) {
        let mut best = (p, usize::MAX, f64::INFINITY);
        for (i, b) in self.pieces.iter().enumerate() {
            if !b.bc.is_dirichlet() {
                continue;
            }
            let q = b.geometry.closest_point(p);
            let d = p.distance(q);
            if d < best.2 {
                best = (q, i, d);
            }
        }
        (best.0, best.1)
    }

    /// The constant Dirichlet value carried by `side`.
    pub fn dirichlet_value(&self, side: Side) -> Result<f64, DomainError> {
        let piece = self
            .pieces
            .iter()
            .find(|b| b.side == side)
            .ok_or(DomainError::MissingSide(side))?;
        piece.bc.value().ok_or(DomainError::NeumannSide(side))
    }

    /// Smallest and largest Dirichlet value.
    pub fn dirichlet_range(&self) -> (f64, f64) {
        self.pieces
            .iter()
            .filter_map(|b| b.bc.value())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }
}

/// Maximum distance between boundary points, from the piece endpoints and a
/// dense sample along arcs.
fn boundary_diameter(pieces: &[BoundaryPiece]) -> f64 {
    let mut pts = Vec::new();
    for p in pieces {
        match &p.geometry {
            Piece::Segment(s) => {
                pts.push(s.start);
                pts.push(s.end);
            }
            Piece::Arc(_) => {
                pts.extend((0..=256).map(|k| p.geometry.point_at(k as f64 / 256.0)));
            }
        }
    }
    let mut best = 0.0_f64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            best = best.max(a.distance(*b));
        }
    }
    best
}

/// Dirichlet data of the canonical problem: side 2 and side 4 values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirichletValues {
    pub side2: f64,
    pub side4: f64,
}

impl Default for DirichletValues {
    fn default() -> Self {
        Self {
            side2: 0.0,
            side4: 1.0,
        }
    }
}

impl DirichletValues {
    fn for_side(&self, side: Side) -> BoundaryCondition {
        match side.label() {
            2 => BoundaryCondition::Dirichlet(self.side2),
            4 => BoundaryCondition::Dirichlet(self.side4),
            _ => BoundaryCondition::NeumannZero,
        }
    }
}

/// A quadrilateral `(Ω; z1, z2, z3, z4)` with the mixed problem attached:
/// sides 1 and 3 are zero-Neumann, sides 2 and 4 Dirichlet.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrilateral {
    domain: Domain2,
    vertices: [Point2; 4],
    values: DirichletValues,
}

impl Quadrilateral {
    /// Build from boundary geometry listed in positive cyclic order, each piece
    /// tagged with its side.
    pub fn new(pieces: Vec<(Piece, Side)>, values: DirichletValues) -> Result<Self, DomainError> {
        if !values.side2.is_finite() || !values.side4.is_finite() {
            return Err(DomainError::NonFinite { piece: 0 });
        }
        let labelled = pieces
            .into_iter()
            .map(|(g, side)| BoundaryPiece::new(g, values.for_side(side), side))
            .collect();
        Self::from_domain(Domain2::new(labelled)?, values)
    }

    fn from_domain(domain: Domain2, values: DirichletValues) -> Result<Self, DomainError> {
        let pieces = domain.pieces();
        for b in pieces {
            let expected = values.for_side(b.side);
            if expected.is_dirichlet() != b.bc.is_dirichlet() {
                return Err(DomainError::WrongCondition {
                    side: b.side,
                    expected: if expected.is_dirichlet() {
                        "Dirichlet"
                    } else {
                        "zero Neumann"
                    },
                });
            }
        }
        for side in Side::ALL {
            if !pieces.iter().any(|b| b.side == side) {
                return Err(DomainError::MissingSide(side));
            }
        }

        // Cyclic runs of labels must read 1,2,3,4 (up to rotation).
        let n = pieces.len();
        let first_of_one = (0..n)
            .find(|&i| pieces[i].side == Side::ONE && pieces[(i + n - 1) % n].side != Side::ONE)
            .ok_or(DomainError::NonContiguousSide(Side::ONE))?;
        let mut runs: Vec<(Side, usize)> = Vec::new();
        for k in 0..n {
            let i = (first_of_one + k) % n;
            match runs.last() {
                Some((s, _)) if *s == pieces[i].side => {}
                _ => runs.push((pieces[i].side, i)),
            }
        }
        let mut expected = Side::ONE;
        for (side, _) in &runs {
            if *side != expected {
                return Err(DomainError::NonContiguousSide(*side));
            }
            expected = expected.next();
        }
        if runs.len() != 4 {
            return Err(DomainError::NonContiguousSide(runs[runs.len() - 1].0));
        }
        let vertices = [
            pieces[runs[0].1].geometry.start(),
            pieces[runs[1].1].geometry.start(),
            pieces[runs[2].1].geometry.start(),
            pieces[runs[3].1].geometry.start(),
        ];
        Ok(Self {
            domain,
            vertices,
            values,
        })
    }

    pub fn domain(&self) -> &Domain2 {
        &self.domain
    }

    /// Marked points `z1..z4`.
    pub fn vertices(&self) -> [Point2; 4] {
        self.vertices
    }

    pub fn dirichlet_values(&self) -> DirichletValues {
        self.values
    }

    pub fn dirichlet_value(&self, side: Side) -> Result<f64, DomainError> {
        self.domain.dirichlet_value(side)
    }

    /// The conjugate quadrilateral `(Ω; z2, z3, z4, z1)`: same geometry,
    /// every side label shifted down by one.
    pub fn conjugate(&self) -> Quadrilateral {
        let pieces = self
            .domain
            .pieces()
            .iter()
            .map(|b| (b.geometry, b.side.conjugated()))
            .collect();
        Quadrilateral::new(pieces, self.values).expect("conjugation preserves validity")
    }

    pub fn from_json(text: &str) -> Result<Self, DomainError> {
        parse_domain(text)
    }

    pub fn to_json(&self) -> String {
        let pieces = self
            .domain
            .pieces()
            .iter()
            .map(|b| PieceSpec::from_piece(&b.geometry, b.side))
            .collect();
        let mut dirichlet_values = BTreeMap::new();
        dirichlet_values.insert("2".to_string(), self.values.side2);
        dirichlet_values.insert("4".to_string(), self.values.side4);
        let file = DomainFile {
            dimension: 2,
            pieces,
            dirichlet_values,
        };
        serde_json::to_string_pretty(&file).expect("domain serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum PieceSpec {
    Segment {
        from: [f64; 2],
        to: [f64; 2],
        side: u64,
    },
    Arc {
        center: [f64; 2],
        radius: f64,
        from_angle: f64,
        to_angle: f64,
        #[serde(default = "default_ccw")]
        ccw: bool,
        side: u64,
    },
}

fn default_ccw() -> bool {
    true
}

impl PieceSpec {
    fn from_piece(piece: &Piece, side: Side) -> Self {
        let side = u64::from(side.label());
        match piece {
            Piece::Segment(s) => PieceSpec::Segment {
                from: [s.start.x, s.start.y],
                to: [s.end.x, s.end.y],
                side,
            },
            Piece::Arc(a) => PieceSpec::Arc {
                center: [a.center.x, a.center.y],
                radius: a.radius,
                from_angle: a.start_angle,
                to_angle: a.end_angle,
                ccw: a.is_ccw(),
                side,
            },
        }
    }

    fn into_piece(self) -> Result<(Piece, Side), DomainError> {
        Ok(match self {
            PieceSpec::Segment { from, to, side } => (
                Segment::new(Point2::new(from[0], from[1]), Point2::new(to[0], to[1])).into(),
                Side::new(side)?,
            ),
            PieceSpec::Arc {
                center,
                radius,
                from_angle,
                to_angle,
                ccw,
                side,
            } => (
                Arc::new(
                    Point2::new(center[0], center[1]),
                    radius,
                    from_angle,
                    to_angle,
                    ccw,
                )
                .into(),
                Side::new(side)?,
            ),
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile {
    dimension: u64,
    pieces: Vec<PieceSpec>,
    #[serde(default)]
    dirichlet_values: BTreeMap<String, f64>,
}

impl From<serde_json::Error> for DomainError {
    fn from(e: serde_json::Error) -> Self {
        DomainError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Parse and validate a two-dimensional domain file.
pub fn parse_domain(text: &str) -> Result<Quadrilateral, DomainError> {
    let file: DomainFile = serde_json::from_str(text)?;
    if file.dimension != 2 {
        return Err(DomainError::Dimension(file.dimension));
    }
    let mut values = DirichletValues::default();
    for (key, value) in &file.dirichlet_values {
        let label: u64 = key.trim().parse().map_err(|_| DomainError::Syntax {
            line: 0,
            column: 0,
            message: format!("dirichlet_values key {key:?} is not a side label"),
        })?;
        let side = Side::new(label)?;
        match side.label() {
            2 => values.side2 = *value,
            4 => values.side4 = *value,
            _ => {
                return Err(DomainError::WrongCondition {
                    side,
                    expected: "zero Neumann",
                })
            }
        }
    }
    let pieces = file
        .pieces
        .into_iter()
        .map(PieceSpec::into_piece)
        .collect::<Result<Vec<_>, _>>()?;
    Quadrilateral::new(pieces, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_json() -> &'static str {
        r#"{"dimension":2,"pieces":[
            {"kind":"segment","from":[1,1],"to":[0,1],"side":1},
            {"kind":"segment","from":[0,1],"to":[0,0],"side":2},
            {"kind":"segment","from":[0,0],"to":[1,0],"side":3},
            {"kind":"segment","from":[1,0],"to":[1,1],"side":4}],
            "dirichlet_values":{"2":0.0,"4":1.0}}"#
    }

    #[test]
    fn parses_unit_square() {
        let q = parse_domain(square_json()).unwrap();
        assert_eq!(q.domain().pieces().len(), 4);
        assert!(q.domain().splitting_points().is_empty());
        assert_eq!(q.vertices()[0], Point2::new(1.0, 1.0));
        assert_eq!(q.vertices()[2], Point2::new(0.0, 0.0));
        assert!((q.domain().diameter() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn open_chain_is_rejected() {
        let text = square_json().replace(r#""from":[1,0],"to":[1,1]"#, r#""from":[1,0],"to":[1,0.9]"#);
        let err = parse_domain(&text).unwrap_err();
        assert_eq!(err.to_string().split(':').next().unwrap(), "open chain at piece 3");
    }

    #[test]
    fn clockwise_boundary_is_rejected() {
        let text = r#"{"dimension":2,"pieces":[
            {"kind":"segment","from":[0,0],"to":[0,1],"side":1},
            {"kind":"segment","from":[0,1],"to":[1,1],"side":2},
            {"kind":"segment","from":[1,1],"to":[1,0],"side":3},
            {"kind":"segment","from":[1,0],"to":[0,0],"side":4}]}"#;
        assert!(matches!(parse_domain(text), Err(DomainError::Orientation { .. })));
    }

    #[test]
    fn non_contiguous_side_is_rejected() {
        let text = r#"{"dimension":2,"pieces":[
            {"kind":"segment","from":[0,0],"to":[1,0],"side":1},
            {"kind":"segment","from":[1,0],"to":[1,1],"side":2},
            {"kind":"segment","from":[1,1],"to":[0.5,1],"side":1},
            {"kind":"segment","from":[0.5,1],"to":[0,1],"side":3},
            {"kind":"segment","from":[0,1],"to":[0,0],"side":4}]}"#;
        assert!(matches!(parse_domain(text), Err(DomainError::NonContiguousSide(_))));
    }

    #[test]
    fn dirichlet_value_for_neumann_side_key_is_rejected() {
        let text = square_json().replace(r#""2":0.0"#, r#""1":0.5"#);
        assert!(matches!(
            parse_domain(&text),
            Err(DomainError::WrongCondition { .. })
        ));
    }

    #[test]
    fn syntax_error_reports_position() {
        let err = parse_domain("{\"dimension\": 2,\n \"pieces\": [}").unwrap_err();
        match err {
            DomainError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dirichlet_values_per_side() {
        let q = parse_domain(square_json()).unwrap();
        assert_eq!(q.dirichlet_value(Side::FOUR).unwrap(), 1.0);
        assert_eq!(q.dirichlet_value(Side::TWO).unwrap(), 0.0);
        assert!(matches!(
            q.dirichlet_value(Side::ONE),
            Err(DomainError::NeumannSide(_))
        ));
    }

    #[test]
    fn conjugation_is_a_four_cycle() {
        let q = parse_domain(square_json()).unwrap();
        let c = q.conjugate();
        assert_ne!(c, q);
        assert_eq!(c.vertices()[0], q.vertices()[1]);
        assert_eq!(c.conjugate().conjugate().conjugate(), q);
    }

    #[test]
    fn json_round_trip() {
        let q = parse_domain(square_json()).unwrap();
        let again = parse_domain(&q.to_json()).unwrap();
        assert_eq!(again, q);
    }

    #[test]
    fn contains_unit_square() {
        let q = parse_domain(square_json()).unwrap();
        assert!(q.domain().contains(Point2::new(0.5, 0.5)));
        assert!(!q.domain().contains(Point2::new(1.5, 0.5)));
    }

    #[test]
    fn projection_tie_goes_to_lower_index() {
        let q = parse_domain(square_json()).unwrap();
        // Dirichlet pieces are x=0 (index 1) and x=1 (index 3).
        let (p, i) = q.domain().project_to_dirichlet(Point2::new(0.1, 0.5));
        assert_eq!((p, i), (Point2::new(0.0, 0.5), 1));
        let (_, i) = q.domain().project_to_dirichlet(Point2::new(0.5, 0.5));
        assert_eq!(i, 1);
    }
}
