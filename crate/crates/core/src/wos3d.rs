//! Walk-on-spheres in polyhedra with Dirichlet faces and zero-Neumann faces
//! handled by plane reflections.
//!
//! The step radius uses the nearest-face rule: when the nearest face is
//! Neumann the sphere may cross it, but must avoid every other face and every
//! Neumann–Neumann edge. A sphere that avoids the other faces meets the
//! active plane only inside the active face, so its part beyond the face is
//! exterior and reflects into the near half of the same sphere. Mirror images
//! of the other faces therefore need no separate check.
//!
//! Right-angle Neumann edges are the exception. Where the active face and its
//! right-angle Neumann neighbours have pairwise orthogonal or parallel
//! normals, the domain inside the sphere is a box corner, reflected motion
//! is free motion folded by the box reflections, and folding never moves a
//! point away from the centre. The sphere may then cross every such face it
//! touches, and only the remaining edges bound the radius. Walkers that still
//! creep into an obstacle edge take the exact jump off the edge.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::BoundaryCondition;
use crate::estimator::{estimate_points, Estimate, EstimateError, PathSampler};
use crate::walk::{WalkConfig, WalkError};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Point3 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Point3 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Point3 {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Point3 {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

fn closest_on_segment(p: Point3, a: Point3, b: Point3) -> Point3 {
    let d = b - a;
    let len_sq = d.norm_sq();
    if len_sq == 0.0 {
        return a;
    }
    a + d * ((p - a).dot(d) / len_sq).clamp(0.0, 1.0)
}

/// Oriented plane `normal · x = offset` with unit normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub normal: Point3,
    pub offset: f64,
}

impl Plane {
    pub fn signed_distance(&self, p: Point3) -> f64 {
        self.normal.dot(p) - self.offset
    }
}

/// Mirror image of `p` across `plane`.
pub fn reflect_across_plane(p: Point3, plane: &Plane) -> Point3 {
    p - plane.normal * (2.0 * plane.signed_distance(p))
}

/// Direction drawn uniformly from the unit sphere.
pub fn uniform_unit_vector3<R: Rng + ?Sized>(rng: &mut R) -> Point3 {
    loop {
        let v = Point3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-300 {
            return v * (1.0 / n);
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Domain3Error {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported dimension {0} (expected 3)")]
    Dimension(u64),
    #[error("domain needs at least four faces")]
    Empty,
    #[error("non-finite coordinate in face {face}")]
    NonFinite { face: usize },
    #[error("degenerate face {face}: {reason}")]
    Degenerate { face: usize, reason: String },
    #[error("face {face} is not planar: vertex off the plane by {deviation:e}")]
    NonPlanar { face: usize, deviation: f64 },
    #[error("edge {edge} of face {face} is not shared by exactly one oppositely oriented face")]
    UnpairedEdge { face: usize, edge: usize },
    #[error("faces are not oriented outward (signed volume {volume:e})")]
    Orientation { volume: f64 },
    #[error("domain has no Dirichlet face")]
    NoDirichlet,
}

impl From<serde_json::Error> for Domain3Error {
    fn from(e: serde_json::Error) -> Self {
        Domain3Error::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

/// Planar polygonal face, vertices counterclockwise seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub vertices: Vec<Point3>,
    pub bc: BoundaryCondition,
    pub plane: Plane,
    area: f64,
    /// In-plane frame for the polygon test.
    axes: (Point3, Point3),
    flat: Vec<(f64, f64)>,
}

fn newell(vertices: &[Point3]) -> Point3 {
    let mut n = Point3::default();
    for (k, a) in vertices.iter().enumerate() {
        let b = vertices[(k + 1) % vertices.len()];
        n.x += (a.y - b.y) * (a.z + b.z);
        n.y += (a.z - b.z) * (a.x + b.x);
        n.z += (a.x - b.x) * (a.y + b.y);
    }
    n
}

impl Face {
    fn build(index: usize, vertices: Vec<Point3>, bc: BoundaryCondition, scale: f64) -> Result<Self, Domain3Error> {
        if vertices.len() < 3 {
            return Err(Domain3Error::Degenerate {
                face: index,
                reason: format!("{} vertices", vertices.len()),
            });
        }
        if !vertices.iter().all(|v| v.is_finite()) || !bc.value().is_none_or(f64::is_finite) {
            return Err(Domain3Error::NonFinite { face: index });
        }
        let n = newell(&vertices);
        let area = 0.5 * n.norm();
        if area <= 1e-12 * scale * scale {
            return Err(Domain3Error::Degenerate {
                face: index,
                reason: "zero area".into(),
            });
        }
        let normal = n.normalized();
        let centroid = vertices.iter().fold(Point3::default(), |acc, v| acc + *v) * (1.0 / vertices.len() as f64);
        let plane = Plane {
            normal,
            offset: normal.dot(centroid),
        };
        let deviation = vertices
            .iter()
            .map(|v| plane.signed_distance(*v).abs())
            .fold(0.0, f64::max);
        if deviation > 1e-9 * scale {
            return Err(Domain3Error::NonPlanar { face: index, deviation });
        }
        let e1 = vertices
            .iter()
            .map(|v| *v - vertices[0])
            .max_by(|a, b| a.norm_sq().total_cmp(&b.norm_sq()))
            .expect("nonempty")
            .normalized();
        let e2 = normal.cross(e1);
        let flat = vertices
            .iter()
            .map(|v| {
                let r = *v - vertices[0];
                (r.dot(e1), r.dot(e2))
            })
            .collect();
        Ok(Self {
            vertices,
            bc,
            plane,
            area,
            axes: (e1, e2),
            flat,
        })
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    fn inside_polygon(&self, q: Point3) -> bool {
        let r = q - self.vertices[0];
        let (px, py) = (r.dot(self.axes.0), r.dot(self.axes.1));
        let mut inside = false;
        let n = self.flat.len();
        for k in 0..n {
            let (xa, ya) = self.flat[k];
            let (xb, yb) = self.flat[(k + 1) % n];
            if (ya > py) != (yb > py) && px < xa + (py - ya) * (xb - xa) / (yb - ya) {
                inside = !inside;
            }
        }
        inside
    }

    pub fn closest_point(&self, p: Point3) -> Point3 {
        let q = p - self.plane.normal * self.plane.signed_distance(p);
        if self.inside_polygon(q) {
            return q;
        }
        let n = self.vertices.len();
        (0..n)
            .map(|k| closest_on_segment(p, self.vertices[k], self.vertices[(k + 1) % n]))
            .min_by(|a, b| p.distance(*a).total_cmp(&p.distance(*b)))
            .expect("nonempty")
    }

    pub fn distance(&self, p: Point3) -> f64 {
        p.distance(self.closest_point(p))
    }

    fn edges(&self) -> impl Iterator<Item = (Point3, Point3)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |k| (self.vertices[k], self.vertices[(k + 1) % n]))
    }
}

/// Edge shared by two Neumann faces, with the wedge between them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannEdge {
    pub start: Point3,
    pub end: Point3,
    /// Faces on either side: `faces.0` runs `start → end`.
    pub faces: (usize, usize),
    /// Unit vector along the edge and the in-face direction of `faces.0`
    /// pointing away from the edge.
    axis: Point3,
    first_wall: Point3,
    /// Interior dihedral angle.
    pub opening: f64,
}

impl NeumannEdge {
    pub fn distance(&self, p: Point3) -> f64 {
        p.distance(closest_on_segment(p, self.start, self.end))
    }

    /// Direction from the edge at cylinder angle `theta ∈ [0, opening]`
    /// and axial component `c ∈ [−1, 1]`.
    fn direction(&self, theta: f64, c: f64) -> Point3 {
        let x = self.first_wall;
        let y = self.axis.cross(x);
        let s = (1.0 - c * c).max(0.0).sqrt();
        // Interior angles run clockwise from the first wall about `axis`.
        self.axis * c + (x * theta.cos() - y * theta.sin()) * s
    }
}

/// A validated polyhedral domain.
#[derive(Debug, Clone)]
pub struct Domain3 {
    faces: Vec<Face>,
    edges: Vec<NeumannEdge>,
    /// Per face: the mirror planes a sphere may cross when that face is the
    /// nearest, and the edges that still bound the radius.
    mirrors: Vec<Vec<usize>>,
    obstacles: Vec<Vec<usize>>,
    diameter: f64,
    bounds: (Point3, Point3),
    stall_radius: f64,
}

/// Outcome of the radius rule at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRadius3 {
    pub radius: f64,
    pub active: Option<usize>,
    pub dirichlet_distance: f64,
}

impl Domain3 {
    pub fn new(faces: Vec<(Vec<Point3>, BoundaryCondition)>) -> Result<Self, Domain3Error> {
        if faces.len() < 4 {
            return Err(Domain3Error::Empty);
        }
        let all: Vec<Point3> = faces.iter().flat_map(|(v, _)| v.iter().copied()).collect();
        let mut diameter: f64 = 0.0;
        for (k, a) in all.iter().enumerate() {
            for b in &all[k + 1..] {
                diameter = diameter.max(a.distance(*b));
            }
        }
        if !diameter.is_finite() {
            let face = faces
                .iter()
                .position(|(v, _)| !v.iter().all(|p| p.is_finite()))
                .unwrap_or(0);
            return Err(Domain3Error::NonFinite { face });
        }
        let faces = faces
            .into_iter()
            .enumerate()
            .map(|(i, (v, bc))| Face::build(i, v, bc, diameter))
            .collect::<Result<Vec<_>, _>>()?;

        let tol = 1e-9 * diameter;
        let same = |a: Point3, b: Point3| a.distance(b) <= tol;
        let mut edges = Vec::new();
        for (f, face) in faces.iter().enumerate() {
            for (e, (a, b)) in face.edges().enumerate() {
                let mut twins = Vec::new();
                for (g, other) in faces.iter().enumerate() {
                    for (c, d) in other.edges() {
                        if (g, c, d) != (f, a, b) && same(a, c) && same(b, d) {
                            return Err(Domain3Error::UnpairedEdge { face: f, edge: e });
                        }
                        if same(a, d) && same(b, c) {
                            twins.push(g);
                        }
                    }
                }
                if twins.len() != 1 || twins[0] == f {
                    return Err(Domain3Error::UnpairedEdge { face: f, edge: e });
                }
                let g = twins[0];
                if f < g && face.bc.is_neumann() && faces[g].bc.is_neumann() {
                    edges.push(Self::wedge(&faces, f, g, a, b));
                }
            }
        }
        let mut volume = 0.0;
        for face in &faces {
            let v0 = face.vertices[0];
            for w in face.vertices[1..].windows(2) {
                volume += v0.dot(w[0].cross(w[1])) / 6.0;
            }
        }
        if volume <= 0.0 {
            return Err(Domain3Error::Orientation { volume });
        }
        if !faces.iter().any(|f| f.bc.is_dirichlet()) {
            return Err(Domain3Error::NoDirichlet);
        }
        let lo = all.iter().fold(Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY), |m, p| {
            Point3::new(m.x.min(p.x), m.y.min(p.y), m.z.min(p.z))
        });
        let hi = all.iter().fold(Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY), |m, p| {
            Point3::new(m.x.max(p.x), m.y.max(p.y), m.z.max(p.z))
        });
        let (mirrors, obstacles) = Self::mirror_sets(&faces, &edges);
        Ok(Self {
            faces,
            edges,
            mirrors,
            obstacles,
            diameter,
            bounds: (lo, hi),
            stall_radius: 1e-12 * diameter,
        })
    }

    /// A Neumann face together with its right-angle Neumann neighbours, when
    /// their normals are pairwise orthogonal or parallel. Near such faces the
    /// domain is locally a box and reflected motion is free motion folded by
    /// the box reflections, so only the other edges remain obstacles. Anything
    /// else falls back to the single active face.
    fn mirror_sets(faces: &[Face], edges: &[NeumannEdge]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let right = |e: &NeumannEdge| (e.opening - 0.5 * PI).abs() < 1e-9;
        let mut mirrors = Vec::with_capacity(faces.len());
        let mut obstacles = Vec::with_capacity(faces.len());
        for (f, face) in faces.iter().enumerate() {
            if face.bc.is_dirichlet() {
                mirrors.push(Vec::new());
                obstacles.push(Vec::new());
                continue;
            }
            let mut set = vec![f];
            for e in edges.iter().filter(|e| right(e)) {
                if e.faces.0 == f {
                    set.push(e.faces.1);
                } else if e.faces.1 == f {
                    set.push(e.faces.0);
                }
            }
            let boxlike = set.iter().all(|&a| {
                set.iter().all(|&b| {
                    let c = faces[a].plane.normal.dot(faces[b].plane.normal).abs();
                    !(1e-9..=1.0 - 1e-9).contains(&c)
                })
            });
            if boxlike {
                obstacles.push((0..edges.len()).filter(|&k| !right(&edges[k])).collect());
                mirrors.push(set);
            } else {
                obstacles.push((0..edges.len()).collect());
                mirrors.push(vec![f]);
            }
        }
        (mirrors, obstacles)
    }

    fn wedge(faces: &[Face], f: usize, g: usize, a: Point3, b: Point3) -> NeumannEdge {
        let axis = (b - a).normalized();
        // Inside face f lies to the left of a → b seen from outside.
        let first_wall = faces[f].plane.normal.cross(axis);
        let second_wall = axis.cross(faces[g].plane.normal);
        let y = axis.cross(first_wall);
        let angle = (-second_wall.dot(y)).atan2(second_wall.dot(first_wall));
        let opening = if angle <= 0.0 { angle + TAU } else { angle };
        NeumannEdge {
            start: a,
            end: b,
            faces: (f, g),
            axis,
            first_wall,
            opening,
        }
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    /// Edges shared by two Neumann faces.
    pub fn neumann_edges(&self) -> &[NeumannEdge] {
        &self.edges
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn bounds(&self) -> (Point3, Point3) {
        self.bounds
    }

    pub fn volume(&self) -> f64 {
        self.faces
            .iter()
            .map(|f| f.plane.offset * f.area / 3.0)
            .sum()
    }

    /// Solid-angle winding test.
    pub fn contains(&self, p: Point3) -> bool {
        let mut total = 0.0;
        for face in &self.faces {
            let a = face.vertices[0] - p;
            for w in face.vertices[1..].windows(2) {
                let (b, c) = (w[0] - p, w[1] - p);
                let (la, lb, lc) = (a.norm(), b.norm(), c.norm());
                let num = a.dot(b.cross(c));
                let den = la * lb * lc + a.dot(b) * lc + a.dot(c) * lb + b.dot(c) * la;
                total += 2.0 * num.atan2(den);
            }
        }
        total > 2.0 * PI
    }

    pub fn distance_to_boundary(&self, p: Point3) -> f64 {
        self.faces.iter().map(|f| f.distance(p)).fold(f64::INFINITY, f64::min)
    }

    pub fn distance_to_dirichlet(&self, p: Point3) -> f64 {
        self.faces
            .iter()
            .filter(|f| f.bc.is_dirichlet())
            .map(|f| f.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest Dirichlet face and the closest point on it.
    pub fn project_to_dirichlet(&self, p: Point3) -> (Point3, usize) {
        let mut best = (p, usize::MAX, f64::INFINITY);
        for (i, f) in self.faces.iter().enumerate() {
            if f.bc.is_dirichlet() {
                let q = f.closest_point(p);
                let d = p.distance(q);
                if d < best.2 {
                    best = (q, i, d);
                }
            }
        }
        (best.0, best.1)
    }

    /// Radius of the next walk sphere around `p`.
    pub fn walk_radius(&self, p: Point3) -> Result<StepRadius3, WalkError> {
        self.step_at(p).map(|(step, _)| step)
    }

    /// Radius rule plus the planes that fold the sample back. The sphere may
    /// cross the mirror faces it touches and must avoid every other face and
    /// every obstacle edge.
    fn step_at(&self, p: Point3) -> Result<(StepRadius3, Vec<usize>), WalkError> {
        let dist: Vec<f64> = self.faces.iter().map(|f| f.distance(p)).collect();
        let mut nearest = (usize::MAX, f64::INFINITY);
        let mut dirichlet_distance = f64::INFINITY;
        for (i, f) in self.faces.iter().enumerate() {
            let d = dist[i];
            if f.bc.is_dirichlet() {
                dirichlet_distance = dirichlet_distance.min(d);
            }
            if d < nearest.1 || (d == nearest.1 && f.bc.is_dirichlet()) {
                nearest = (i, d);
            }
        }
        let (step, mirrors) = if self.faces[nearest.0].bc.is_dirichlet() {
            let step = StepRadius3 {
                radius: nearest.1,
                active: None,
                dirichlet_distance,
            };
            (step, Vec::new())
        } else {
            let set = &self.mirrors[nearest.0];
            let faces = (0..dist.len()).filter(|j| !set.contains(j)).map(|j| dist[j]);
            let mut radius = self.obstacles[nearest.0]
                .iter()
                .map(|&k| self.edges[k].distance(p))
                .chain(faces)
                .fold(f64::INFINITY, f64::min);
            // A mirror face that only grazes the sphere, typically at an
            // obstacle edge, has a plane that may cut the interior elsewhere.
            // Keep such faces out of the sphere instead.
            let near = radius * (1.0 - 1e-9);
            let mut touched = Vec::with_capacity(set.len());
            for &j in set {
                if dist[j] < near {
                    touched.push(j);
                } else {
                    radius = radius.min(dist[j] * (1.0 - 1e-9));
                }
            }
            let step = StepRadius3 {
                radius,
                active: Some(nearest.0),
                dirichlet_distance,
            };
            (step, touched)
        };
        if step.radius < self.stall_radius && step.radius < step.dirichlet_distance {
            return Err(WalkError::Stalled { at: vec![p.x, p.y, p.z] });
        }
        Ok((step, mirrors))
    }

    /// Edge jump for a walker hugging a Neumann–Neumann edge: the landing
    /// point is uniform on the part of a sphere around the nearest edge
    /// point that lies inside the wedge, which is the exact exit law from a
    /// point on the edge.
    fn edge_jump<R: Rng + ?Sized>(&self, p: Point3, rng: &mut R) -> Option<Point3> {
        for e in &self.edges {
            let s = closest_on_segment(p, e.start, e.end);
            let d = p.distance(s);
            if d >= 1e-3 * self.diameter {
                continue;
            }
            let reach = self
                .faces
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != e.faces.0 && *j != e.faces.1)
                .map(|(_, f)| f.distance(s))
                .fold(f64::INFINITY, f64::min);
            let radius = 0.5 * reach;
            if d < 1e-3 * radius {
                let theta = rng.random::<f64>() * e.opening;
                let c = 2.0 * rng.random::<f64>() - 1.0;
                return Some(s + e.direction(theta, c) * radius);
            }
        }
        None
    }

    /// Reflect `z` across whichever mirror plane it lies beyond until it is
    /// on the inner side of all of them.
    fn fold(&self, mut z: Point3, mirrors: &[usize], cap: u32, reflections: &mut u32) -> Result<Point3, WalkError> {
        for _ in 0..=cap {
            let beyond = mirrors
                .iter()
                .map(|&j| (j, self.faces[j].plane.signed_distance(z)))
                .filter(|(_, s)| *s > 0.0)
                .max_by(|a, b| a.1.total_cmp(&b.1));
            match beyond {
                None => return Ok(z),
                Some((j, _)) => {
                    z = reflect_across_plane(z, &self.faces[j].plane);
                    *reflections += 1;
                }
            }
        }
        Err(WalkError::ReflectionCap(cap))
    }

    fn nearest_neumann(&self, z: Point3) -> Option<usize> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.bc.is_neumann())
            .map(|(j, f)| (j, f.distance(z)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(j, _)| j)
    }

    /// Serialize in the domain file format.
    pub fn to_json(&self) -> String {
        let file = DomainFile3 {
            dimension: 3,
            faces: self
                .faces
                .iter()
                .map(|f| FaceSpec {
                    vertices: f.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
                    bc: match f.bc {
                        BoundaryCondition::Dirichlet(value) => BcSpec::Dirichlet { value },
                        BoundaryCondition::NeumannZero => BcSpec::Neumann,
                    },
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("domain serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainFile3 {
    dimension: u64,
    faces: Vec<FaceSpec>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FaceSpec {
    vertices: Vec<[f64; 3]>,
    bc: BcSpec,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum BcSpec {
    Dirichlet { value: f64 },
    Neumann,
}

/// Parse and validate a three-dimensional domain file.
pub fn parse_domain3(text: &str) -> Result<Domain3, Domain3Error> {
    let file: DomainFile3 = serde_json::from_str(text)?;
    if file.dimension != 3 {
        return Err(Domain3Error::Dimension(file.dimension));
    }
    Domain3::new(
        file.faces
            .into_iter()
            .map(|f| {
                let bc = match f.bc {
                    BcSpec::Dirichlet { value } => BoundaryCondition::Dirichlet(value),
                    BcSpec::Neumann => BoundaryCondition::NeumannZero,
                };
                (f.vertices.into_iter().map(|[x, y, z]| Point3::new(x, y, z)).collect(), bc)
            })
            .collect(),
    )
}

/// Where a trajectory was absorbed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitSample3 {
    pub point: Point3,
    pub face: usize,
    pub value: f64,
    pub steps: u64,
    pub reflections: u32,
}

/// Simulate one reflected trajectory from `start` until it enters the
/// ε-shell of the Dirichlet faces.
pub fn sample_exit3<R: Rng + ?Sized>(
    domain: &Domain3,
    start: Point3,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Result<ExitSample3, WalkError> {
    if !domain.contains(start) {
        return Err(WalkError::StartOutside(vec![start.x, start.y, start.z]));
    }
    let mut z = start;
    let mut steps = 0u64;
    let mut reflections = 0u32;
    loop {
        let (step, mirrors) = domain.step_at(z)?;
        if step.dirichlet_distance <= cfg.epsilon {
            break;
        }
        if steps >= cfg.max_steps {
            return Err(WalkError::MaxSteps(steps));
        }
        steps += 1;
        if let Some(landing) = domain.edge_jump(z, rng) {
            z = landing;
            if !domain.contains(z) {
                let mirror = domain.nearest_neumann(z).ok_or(WalkError::ReflectionCap(reflections))?;
                z = domain.fold(z, &[mirror], cfg.max_reflections, &mut reflections)?;
            }
            continue;
        }
        let next = z + uniform_unit_vector3(rng) * step.radius;
        z = domain.fold(next, &mirrors, cfg.max_reflections, &mut reflections)?;
    }
    let (point, face) = domain.project_to_dirichlet(z);
    Ok(ExitSample3 {
        point,
        face,
        value: domain.faces[face].bc.value().expect("Dirichlet face"),
        steps,
        reflections,
    })
}

impl PathSampler for Domain3 {
    type Point = Point3;

    fn diameter(&self) -> f64 {
        self.diameter
    }

    fn is_interior(&self, p: Point3) -> bool {
        self.contains(p)
    }

    fn coordinates(p: Point3) -> Vec<f64> {
        vec![p.x, p.y, p.z]
    }

    fn sample(&self, start: Point3, cfg: &WalkConfig, rng: &mut ChaCha8Rng) -> Result<(f64, u64), WalkError> {
        sample_exit3(self, start, cfg, rng).map(|e| (e.value, e.steps))
    }
}

/// Estimate `u` at points of a polyhedral domain.
pub fn estimate_u3(domain: &Domain3, points: &[Point3], n_paths: u64, cfg: &WalkConfig) -> Vec<Result<Estimate, EstimateError>> {
    estimate_points(domain, points, n_paths, cfg)
}

/// Estimates on a regular grid over the bounding box. Node `(i, j, k)` is
/// stored at `(k·ny + j)·nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid3 {
    pub min: Point3,
    pub max: Point3,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub mask: Vec<bool>,
    pub u: Vec<f64>,
    pub u_stderr: Vec<f64>,
    pub resampled: u64,
    pub mean_steps: f64,
}

impl FieldGrid3 {
    pub fn point(&self, i: usize, j: usize, k: usize) -> Point3 {
        let t = |a: usize, n: usize| if n > 1 { a as f64 / (n - 1) as f64 } else { 0.5 };
        Point3::new(
            self.min.x + t(i, self.nx) * (self.max.x - self.min.x),
            self.min.y + t(j, self.ny) * (self.max.y - self.min.y),
            self.min.z + t(k, self.nz) * (self.max.z - self.min.z),
        )
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    /// Interior nodes in storage order.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        (0..self.nz)
            .flat_map(move |k| (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| (i, j, k))))
            .filter(|&(i, j, k)| self.mask[self.index(i, j, k)])
    }
}

/// Estimate `u` at every interior node of an `nx × ny × nz` grid.
pub fn estimate_field3(
    domain: &Domain3,
    (nx, ny, nz): (usize, usize, usize),
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<FieldGrid3, EstimateError> {
    if nx < 2 || ny < 2 || nz < 2 {
        return Err(EstimateError::Config(format!(
            "grid needs at least 2 nodes per axis, got {nx} x {ny} x {nz}"
        )));
    }
    let (min, max) = domain.bounds();
    let mut grid = FieldGrid3 {
        min,
        max,
        nx,
        ny,
        nz,
        mask: vec![false; nx * ny * nz],
        u: vec![f64::NAN; nx * ny * nz],
        u_stderr: vec![f64::NAN; nx * ny * nz],
        resampled: 0,
        mean_steps: 0.0,
    };
    let tol = 1e-9 * domain.diameter();
    let mut nodes = Vec::new();
    let mut slots = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let p = grid.point(i, j, k);
                if domain.contains(p) && domain.distance_to_boundary(p) > tol {
                    let idx = grid.index(i, j, k);
                    grid.mask[idx] = true;
                    nodes.push(p);
                    slots.push(idx);
                }
            }
        }
    }
    let estimates = estimate_points(domain, &nodes, n_paths, cfg)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut steps = 0.0;
    for (idx, e) in slots.into_iter().zip(&estimates) {
        grid.u[idx] = e.mean;
        grid.u_stderr[idx] = e.stderr;
        grid.resampled += e.resampled;
        steps += e.mean_steps;
    }
    grid.mean_steps = steps / estimates.len().max(1) as f64;
    Ok(grid)
}

/// Orient `vertices` so their Newell normal agrees with `outward`.
fn oriented(mut vertices: Vec<Point3>, outward: Point3) -> Vec<Point3> {
    if newell(&vertices).dot(outward) < 0.0 {
        vertices.reverse();
    }
    vertices
}

/// Right prism over a counterclockwise polygon in the x–z plane, spanning
/// `y ∈ [y0, y1]`. Side face `k` sits on polygon edge `k → k+1`.
pub fn prism(
    polygon_xz: &[(f64, f64)],
    (y0, y1): (f64, f64),
    side_bcs: &[BoundaryCondition],
    cap_bc: BoundaryCondition,
) -> Result<Domain3, Domain3Error> {
    let n = polygon_xz.len();
    let at = |k: usize, y: f64| Point3::new(polygon_xz[k % n].0, y, polygon_xz[k % n].1);
    let mut faces = Vec::with_capacity(n + 2);
    for k in 0..n {
        let (dx, dz) = (polygon_xz[(k + 1) % n].0 - polygon_xz[k].0, polygon_xz[(k + 1) % n].1 - polygon_xz[k].1);
        let outward = Point3::new(dz, 0.0, -dx);
        let quad = vec![at(k, y0), at(k + 1, y0), at(k + 1, y1), at(k, y1)];
        faces.push((oriented(quad, outward), side_bcs[k]));
    }
    let front: Vec<Point3> = (0..n).map(|k| at(k, y0)).collect();
    let back: Vec<Point3> = (0..n).map(|k| at(k, y1)).collect();
    faces.push((oriented(front, Point3::new(0.0, -1.0, 0.0)), cap_bc));
    faces.push((oriented(back, Point3::new(0.0, 1.0, 0.0)), cap_bc));
    Domain3::new(faces)
}

/// Unit cube with `u = 0` on `x = 0`, `u = 1` on `x = 1` and insulated
/// sides, so that `u = x`.
pub fn insulated_cube() -> Domain3 {
    use BoundaryCondition::{Dirichlet, NeumannZero};
    prism(
        &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
        (0.0, 1.0),
        &[NeumannZero, Dirichlet(1.0), NeumannZero, Dirichlet(0.0)],
        NeumannZero,
    )
    .expect("valid cube")
}

/// L-shaped prism: cross-section `[0,2]×[0,1] ∪ [0,1]×[0,2]` in x–z,
/// extruded over `y ∈ [0,1]`. The top `z = 2` is held at 1, the right end
/// `x = 2` at 0, and every other face is insulated.
pub fn l_prism() -> Domain3 {
    use BoundaryCondition::{Dirichlet, NeumannZero};
    prism(
        &[(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)],
        (0.0, 1.0),
        &[
            NeumannZero,
            Dirichlet(0.0),
            NeumannZero,
            NeumannZero,
            Dirichlet(1.0),
            NeumannZero,
        ],
        NeumannZero,
    )
    .expect("valid L-prism")
}
