//! Conjugate function method: the modulus from Cauchy–Riemann ratios of the
//! Dirichlet–Neumann solutions on `Q` and its conjugate, and the canonical
//! map `f = u + i·h·ũ` sampled on a grid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Domain2, Quadrilateral};
use crate::estimator::{estimate_batch_with, mix64, Estimate, EstimateError};
use crate::geometry::{Bounds, Point2};
use crate::reflection::{GeometryError, WalkGeometry};
use crate::walk::WalkConfig;

/// Five-point weights at offsets `−2Δ, −Δ, +Δ, +2Δ`, over `12Δ`.
pub const FIVE_POINT_WEIGHTS: [f64; 4] = [1.0, -8.0, 8.0, -1.0];
/// Stencil spacing as a fraction of the evaluation point's clearance.
pub const DEFAULT_DELTA_FRACTION: f64 = 0.3;
/// Candidate nodes per axis when searching for the default evaluation point.
pub const EVAL_GRID: usize = 101;
/// A derivative whose magnitude is within this many stderrs of zero cannot
/// serve as a denominator.
pub const ILL_CONDITIONED_SIGMAS: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModulusError {
    #[error("{0}")]
    Config(String),
    #[error("both Cauchy-Riemann ratios are ill-conditioned (u~_y = {uy:.3e} ± {uy_se:.1e}, u~_x = {ux:.3e} ± {ux_se:.1e})")]
    IllConditioned {
        uy: f64,
        uy_se: f64,
        ux: f64,
        ux_se: f64,
    },
    #[error(transparent)]
    Estimate(#[from] EstimateError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Five-point central difference of exact values at `−2Δ, −Δ, +Δ, +2Δ`.
pub fn five_point(values: [f64; 4], delta: f64) -> f64 {
    let mut acc = 0.0;
    for (w, v) in FIVE_POINT_WEIGHTS.iter().zip(values) {
        acc += w * v;
    }
    acc / (12.0 * delta)
}

/// Five-point derivative of independent estimates, with propagated stderr.
pub fn five_point_partial(values: &[Estimate; 4], delta: f64) -> (f64, f64) {
    let derivative = five_point(values.map(|e| e.mean), delta);
    let var: f64 = FIVE_POINT_WEIGHTS
        .iter()
        .zip(values)
        .map(|(w, e)| w * w * e.stderr * e.stderr)
        .sum();
    (derivative, var.sqrt() / (12.0 * delta))
}

/// A value with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    pub value: f64,
    pub stderr: f64,
}

impl Measured {
    fn well_conditioned(self) -> bool {
        self.value.abs() > ILL_CONDITIONED_SIGMAS * self.stderr
    }

    /// `self / other` with first-order error propagation.
    fn ratio(self, other: Measured) -> Measured {
        let value = self.value / other.value;
        let rel = (self.stderr / self.value).hypot(other.stderr / other.value);
        let stderr = if rel.is_finite() {
            value.abs() * rel
        } else {
            // Numerator exactly zero.
            self.stderr / other.value.abs()
        };
        Measured { value, stderr }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModulusConfig {
    pub eval_point: Option<Point2>,
    pub delta: Option<f64>,
    pub n_paths: u64,
    pub walk: WalkConfig,
}

impl ModulusConfig {
    pub fn new(q: &Quadrilateral, n_paths: u64) -> Self {
        Self {
            eval_point: None,
            delta: None,
            n_paths,
            walk: WalkConfig::for_domain(q.domain()),
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.walk.seed = seed;
        self
    }
}

/// Partial derivatives at the evaluation point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gradients {
    pub u_x: Measured,
    pub u_y: Measured,
    /// Derivatives of the conjugate problem's solution `ũ`.
    pub conj_x: Measured,
    pub conj_y: Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusResult {
    pub h: f64,
    pub stderr: f64,
    /// `u_x / ũ_y`, absent when `ũ_y` is indistinguishable from zero.
    pub h_from_x: Option<Measured>,
    /// `−u_y / ũ_x`, absent when `ũ_x` is indistinguishable from zero.
    pub h_from_y: Option<Measured>,
    /// `|h_from_x − h_from_y|`, or with one ratio the residual of the other
    /// Cauchy–Riemann equation scaled to units of `h`.
    pub consistency: f64,
    pub consistency_stderr: f64,
    pub gradients: Gradients,
    pub eval_point: Point2,
    pub delta: f64,
    pub n_paths: u64,
    pub resampled: u64,
    pub mean_steps: f64,
}

impl ModulusResult {
    /// Consistency within `k` of its own stderr.
    pub fn consistent_within(&self, k: f64) -> bool {
        self.consistency <= k * self.consistency_stderr
    }
}

/// Interior point of largest clearance among a regular grid of candidates
/// over the bounding box, with that clearance. Ties go to the candidate
/// nearest the box center.
pub fn max_clearance_point(domain: &Domain2, n: usize) -> (Point2, f64) {
    let b = domain.bounds();
    let mid = Point2::new(0.5 * (b.min.x + b.max.x), 0.5 * (b.min.y + b.max.y));
    let tie = 1e-12 * domain.diameter();
    let mut best = (mid, f64::NEG_INFINITY);
    for j in 0..n {
        for i in 0..n {
            let p = grid_node(&b, n, n, i, j);
            if !domain.contains(p) {
                continue;
            }
            let d = domain.distance_to_boundary(p);
            if d > best.1 + tie || (d > best.1 - tie && p.distance(mid) < best.0.distance(mid)) {
                best = (p, d);
            }
        }
    }
    best
}

fn grid_node(b: &Bounds, nx: usize, ny: usize, i: usize, j: usize) -> Point2 {
    let t = |k: usize, n: usize| if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
    Point2::new(
        b.min.x + t(i, nx) * b.width(),
        b.min.y + t(j, ny) * b.height(),
    )
}

/// The eight stencil points: four along x, then four along y.
pub fn stencil_points(center: Point2, delta: f64) -> [Point2; 8] {
    let o = [-2.0, -1.0, 1.0, 2.0];
    let mut pts = [center; 8];
    for k in 0..4 {
        pts[k] = center + Point2::new(o[k] * delta, 0.0);
        pts[4 + k] = center + Point2::new(0.0, o[k] * delta);
    }
    pts
}

/// Resolve the evaluation point and spacing, checking the stencil fits.
pub fn resolve_stencil(domain: &Domain2, cfg: &ModulusConfig) -> Result<(Point2, f64), ModulusError> {
    let (point, clearance) = match cfg.eval_point {
        Some(p) => {
            if !domain.contains(p) {
                return Err(ModulusError::Config(format!(
                    "evaluation point ({}, {}) is not inside the domain",
                    p.x, p.y
                )));
            }
            (p, domain.distance_to_boundary(p))
        }
        None => max_clearance_point(domain, EVAL_GRID),
    };
    let delta = cfg.delta.unwrap_or(DEFAULT_DELTA_FRACTION * clearance);
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(ModulusError::Config(format!("delta must be positive, got {delta}")));
    }
    if clearance <= 2.0 * delta {
        return Err(ModulusError::Config(format!(
            "stencil leaves the domain: delta {delta} needs clearance above {}, but ({}, {}) is {clearance} from the boundary; use a smaller delta or another eval point",
            2.0 * delta,
            point.x,
            point.y
        )));
    }
    Ok((point, delta))
}

/// Seed of the conjugate problem's streams, distinct from the original's.
pub fn conjugate_seed(seed: u64) -> u64 {
    mix64(seed ^ 0x5bd1_e995_5bd1_e995)
}

struct StencilRun {
    x: Measured,
    y: Measured,
    resampled: u64,
    steps: f64,
}

fn run_stencil(
    q: &Quadrilateral,
    points: &[Point2; 8],
    delta: f64,
    n_paths: u64,
    walk: &WalkConfig,
) -> Result<StencilRun, ModulusError> {
    let geometry = WalkGeometry::new(q.domain())?;
    let est = estimate_batch_with(&geometry, points, n_paths, walk)
        .into_iter()
        .collect::<Result<Vec<Estimate>, _>>()?;
    let part = |k: usize| {
        let (value, stderr) = five_point_partial(&[est[k], est[k + 1], est[k + 2], est[k + 3]], delta);
        Measured { value, stderr }
    };
    Ok(StencilRun {
        x: part(0),
        y: part(4),
        resampled: est.iter().map(|e| e.resampled).sum(),
        steps: est.iter().map(|e| e.mean_steps).sum::<f64>() / est.len() as f64,
    })
}

/// Estimate the conformal modulus of `q`.
pub fn estimate_modulus(q: &Quadrilateral, cfg: &ModulusConfig) -> Result<ModulusResult, ModulusError> {
    let (point, delta) = resolve_stencil(q.domain(), cfg)?;
    let pts = stencil_points(point, delta);
    let orig = run_stencil(q, &pts, delta, cfg.n_paths, &cfg.walk)?;
    let conj_walk = WalkConfig {
        seed: conjugate_seed(cfg.walk.seed),
        ..cfg.walk
    };
    let conj = run_stencil(&q.conjugate(), &pts, delta, cfg.n_paths, &conj_walk)?;
    let g = Gradients {
        u_x: orig.x,
        u_y: orig.y,
        conj_x: conj.x,
        conj_y: conj.y,
    };
    let neg_uy = Measured {
        value: -g.u_y.value,
        stderr: g.u_y.stderr,
    };
    let h_from_x = g.conj_y.well_conditioned().then(|| g.u_x.ratio(g.conj_y));
    let h_from_y = g.conj_x.well_conditioned().then(|| neg_uy.ratio(g.conj_x));

    let (h, stderr, consistency, consistency_stderr) = match (h_from_x, h_from_y) {
        (Some(a), Some(b)) => {
            let (wa, wb) = (1.0 / (a.stderr * a.stderr), 1.0 / (b.stderr * b.stderr));
            let h = (wa * a.value + wb * b.value) / (wa + wb);
            (
                h,
                (1.0 / (wa + wb)).sqrt(),
                (a.value - b.value).abs(),
                a.stderr.hypot(b.stderr),
            )
        }
        (Some(a), None) => {
            // u_y + h·ũ_x = 0, scaled by ũ_y ≈ u_x / h.
            let r = (g.u_y.value + a.value * g.conj_x.value).abs() / g.conj_y.value.abs();
            let s = g.u_y.stderr.hypot(a.value * g.conj_x.stderr) / g.conj_y.value.abs();
            (a.value, a.stderr, r, s)
        }
        (None, Some(b)) => {
            // u_x − h·ũ_y = 0, scaled by ũ_x ≈ −u_y / h.
            let r = (g.u_x.value - b.value * g.conj_y.value).abs() / g.conj_x.value.abs();
            let s = g.u_x.stderr.hypot(b.value * g.conj_y.stderr) / g.conj_x.value.abs();
            (b.value, b.stderr, r, s)
        }
        (None, None) => {
            return Err(ModulusError::IllConditioned {
                uy: g.conj_y.value,
                uy_se: g.conj_y.stderr,
                ux: g.conj_x.value,
                ux_se: g.conj_x.stderr,
            })
        }
    };
    Ok(ModulusResult {
        h,
        stderr,
        h_from_x,
        h_from_y,
        consistency,
        consistency_stderr,
        gradients: g,
        eval_point: point,
        delta,
        n_paths: cfg.n_paths,
        resampled: orig.resampled + conj.resampled,
        mean_steps: 0.5 * (orig.steps + conj.steps),
    })
}

/// Samples of `f = u + iv`, `v = h·ũ`, on a regular grid over the domain's
/// bounding box. Node `(i, j)` is stored at `j·nx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub bounds: Bounds,
    pub nx: usize,
    pub ny: usize,
    pub h: f64,
    pub mask: Vec<bool>,
    pub u: Vec<f64>,
    pub u_stderr: Vec<f64>,
    pub v: Vec<f64>,
    pub v_stderr: Vec<f64>,
    pub resampled: u64,
}

impl FieldGrid {
    pub fn point(&self, i: usize, j: usize) -> Point2 {
        grid_node(&self.bounds, self.nx, self.ny, i, j)
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Interior nodes in row-major order with their grid indices.
    pub fn interior(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.ny)
            .flat_map(move |j| (0..self.nx).map(move |i| (i, j)))
            .filter(|&(i, j)| self.mask[self.index(i, j)])
    }
}

/// Estimate `u` and `v = h·ũ` at every interior node of an `nx × ny` grid.
pub fn evaluate_map_grid(
    q: &Quadrilateral,
    h: f64,
    nx: usize,
    ny: usize,
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<FieldGrid, ModulusError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ModulusError::Config(format!("modulus must be positive, got {h}")));
    }
    if nx < 2 || ny < 2 {
        return Err(ModulusError::Config(format!("grid needs at least 2 x 2 nodes, got {nx} x {ny}")));
    }
    let domain = q.domain();
    let bounds = domain.bounds();
    let tol = 1e-9 * domain.diameter();
    let mut mask = vec![false; nx * ny];
    let mut nodes = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let p = grid_node(&bounds, nx, ny, i, j);
            if domain.contains(p) && domain.distance_to_boundary(p) > tol {
                mask[j * nx + i] = true;
                nodes.push(p);
            }
        }
    }
    let solve = |q: &Quadrilateral, walk: &WalkConfig| -> Result<Vec<Estimate>, ModulusError> {
        let geometry = WalkGeometry::new(q.domain())?;
        Ok(estimate_batch_with(&geometry, &nodes, n_paths, walk)
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?)
    };
    let u_est = solve(q, cfg)?;
    let conj_walk = WalkConfig {
        seed: conjugate_seed(cfg.seed),
        ..*cfg
    };
    let c_est = solve(&q.conjugate(), &conj_walk)?;

    let mut grid = FieldGrid {
        bounds,
        nx,
        ny,
        h,
        u: vec![f64::NAN; nx * ny],
        u_stderr: vec![f64::NAN; nx * ny],
        v: vec![f64::NAN; nx * ny],
        v_stderr: vec![f64::NAN; nx * ny],
        mask,
        resampled: 0,
    };
    let slots: Vec<usize> = (0..nx * ny).filter(|&k| grid.mask[k]).collect();
    for ((k, u), c) in slots.into_iter().zip(&u_est).zip(&c_est) {
        grid.u[k] = u.mean;
        grid.u_stderr[k] = u.stderr;
        grid.v[k] = h * c.mean;
        grid.v_stderr[k] = h * c.stderr;
        grid.resampled += u.resampled + c.resampled;
    }
    Ok(grid)
}
