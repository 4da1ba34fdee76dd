//! Monte Carlo estimation of `u(z) = E_z[β_D(B_τ)]`.
//!
//! Every path draws from its own ChaCha8 stream keyed by `(seed, point index,
//! path index)`, and paths are accumulated in fixed chunks whose partial sums
//! are combined in chunk order. Results are therefore bit-identical for any
//! number of worker threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::Domain2;
use crate::geometry::Point2;
use crate::reflection::{GeometryError, WalkGeometry};
use crate::walk::{sample_exit, WalkConfig, WalkError};

/// Paths per accumulation chunk.
pub const CHUNK: u64 = 4096;
/// Attempts per path before a sampler error is propagated.
const MAX_ATTEMPTS: u32 = 8;
/// Fraction of resampled paths above which an estimate is flagged.
pub const RESAMPLE_FLAG_FRACTION: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimateError {
    #[error("point {index} at {point:?} is not inside the domain")]
    NotInterior { index: usize, point: Vec<f64> },
    #[error("need at least 2 paths, got {0}")]
    TooFewPaths(u64),
    #[error("invalid walk configuration: {0}")]
    Config(String),
    #[error("path {path} from point {index} failed after {MAX_ATTEMPTS} attempts: {source}")]
    Walk {
        index: usize,
        path: u64,
        source: WalkError,
    },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub mean_steps: f64,
    /// Paths that hit a sampler error and were redrawn.
    pub resampled: u64,
}

impl Estimate {
    /// More than 0.1% of paths needed a redraw.
    pub fn flagged(&self) -> bool {
        self.resampled as f64 > RESAMPLE_FLAG_FRACTION * self.n_paths as f64
    }
}

/// 64-bit finalizer from SplitMix64.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the stream of point `index` under run seed `seed`.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    mix64(seed ^ mix64(index as u64))
}

/// RNG for one path attempt.
pub fn path_rng(point_seed: u64, path: u64, attempt: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(mix64(point_seed.wrapping_add(u64::from(attempt))));
    rng.set_stream(path);
    rng
}

/// Sum with Neumaier compensation.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct ChunkStats {
    pub(crate) n: u64,
    pub(crate) sum: f64,
    pub(crate) sum_sq: f64,
    pub(crate) steps: u64,
    pub(crate) resampled: u64,
}

/// Fold chunk partial sums, in order, into an estimate.
pub(crate) fn combine(chunks: &[ChunkStats]) -> Estimate {
    let (mut sum, mut sum_sq) = (CompensatedSum::default(), CompensatedSum::default());
    let (mut n, mut steps, mut resampled) = (0u64, 0u64, 0u64);
    for c in chunks {
        sum.add(c.sum);
        sum_sq.add(c.sum_sq);
        n += c.n;
        steps += c.steps;
        resampled += c.resampled;
    }
    let nf = n as f64;
    let mean = sum.value() / nf;
    let var = ((sum_sq.value() - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Estimate {
        mean,
        stderr: (var / nf).sqrt(),
        n_paths: n,
        mean_steps: steps as f64 / nf,
        resampled,
    }
}

/// One reflected-walk sampler: everything the estimator needs from a
/// geometry, in any dimension.
pub trait PathSampler: Sync {
    type Point: Copy + Send + Sync + std::fmt::Debug;

    fn diameter(&self) -> f64;

    /// Whether `p` is a valid start point.
    fn is_interior(&self, p: Self::Point) -> bool;

    fn coordinates(p: Self::Point) -> Vec<f64>;

    /// Dirichlet value at the exit of one trajectory, and its step count.
    fn sample(&self, start: Self::Point, cfg: &WalkConfig, rng: &mut ChaCha8Rng) -> Result<(f64, u64), WalkError>;
}

impl PathSampler for WalkGeometry {
    type Point = Point2;

    fn diameter(&self) -> f64 {
        self.domain().diameter()
    }

    fn is_interior(&self, p: Point2) -> bool {
        self.domain().contains(p)
    }

    fn coordinates(p: Point2) -> Vec<f64> {
        vec![p.x, p.y]
    }

    fn sample(&self, start: Point2, cfg: &WalkConfig, rng: &mut ChaCha8Rng) -> Result<(f64, u64), WalkError> {
        sample_exit(self, start, cfg, rng).map(|e| (e.value, e.steps))
    }
}

fn run_chunk<S: PathSampler>(
    sampler: &S,
    start: S::Point,
    index: usize,
    paths: std::ops::Range<u64>,
    cfg: &WalkConfig,
) -> Result<ChunkStats, EstimateError> {
    let seed = point_seed(cfg.seed, index);
    let mut stats = ChunkStats::default();
    for path in paths {
        let mut attempt = 0;
        let (value, steps) = loop {
            let mut rng = path_rng(seed, path, attempt);
            match sampler.sample(start, cfg, &mut rng) {
                Ok(exit) => break exit,
                Err(e) if e.is_resamplable() && attempt + 1 < MAX_ATTEMPTS => {
                    attempt += 1;
                    stats.resampled += 1;
                }
                Err(source) => {
                    return Err(EstimateError::Walk {
                        index,
                        path,
                        source,
                    })
                }
            }
        };
        stats.n += 1;
        stats.sum += value;
        stats.sum_sq += value * value;
        stats.steps += steps;
    }
    Ok(stats)
}

fn chunk_ranges(n_paths: u64) -> Vec<std::ops::Range<u64>> {
    (0..n_paths.div_ceil(CHUNK))
        .map(|c| c * CHUNK..((c + 1) * CHUNK).min(n_paths))
        .collect()
}

/// Estimate `u` at many points. Point `i` uses the stream keyed by
/// `(cfg.seed, i)`, so element `i` equals a single-point run at index `i`.
pub fn estimate_points<S: PathSampler>(
    sampler: &S,
    points: &[S::Point],
    n_paths: u64,
    cfg: &WalkConfig,
) -> Vec<Result<Estimate, EstimateError>> {
    if n_paths < 2 {
        return points.iter().map(|_| Err(EstimateError::TooFewPaths(n_paths))).collect();
    }
    if let Err(msg) = cfg.validate(sampler.diameter()) {
        return points.iter().map(|_| Err(EstimateError::Config(msg.clone()))).collect();
    }
    let interior: Vec<bool> = points.iter().map(|&p| sampler.is_interior(p)).collect();
    let ranges = chunk_ranges(n_paths);
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .filter(|&i| interior[i])
        .flat_map(|i| (0..ranges.len()).map(move |c| (i, c)))
        .collect();
    let results: Vec<Result<ChunkStats, EstimateError>> = jobs
        .par_iter()
        .map(|&(i, c)| run_chunk(sampler, points[i], i, ranges[c].clone(), cfg))
        .collect();

    let mut out = Vec::with_capacity(points.len());
    let mut cursor = 0;
    for (i, &point) in points.iter().enumerate() {
        if !interior[i] {
            out.push(Err(EstimateError::NotInterior {
                index: i,
                point: S::coordinates(point),
            }));
            continue;
        }
        let slice = &results[cursor..cursor + ranges.len()];
        cursor += ranges.len();
        let chunks: Result<Vec<ChunkStats>, EstimateError> = slice.iter().cloned().collect();
        out.push(chunks.map(|c| combine(&c)));
    }
    out
}

/// [`estimate_points`] on a prepared 2D geometry.
pub fn estimate_batch_with(
    geometry: &WalkGeometry,
    points: &[Point2],
    n_paths: u64,
    cfg: &WalkConfig,
) -> Vec<Result<Estimate, EstimateError>> {
    estimate_points(geometry, points, n_paths, cfg)
}

/// Estimate `u` at many points of `domain`.
pub fn estimate_batch(
    domain: &Domain2,
    points: &[Point2],
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<Vec<Result<Estimate, EstimateError>>, EstimateError> {
    let geometry = WalkGeometry::new(domain)?;
    Ok(estimate_batch_with(&geometry, points, n_paths, cfg))
}

/// Estimate `u(point)` from `n_paths` reflected trajectories.
pub fn estimate_u(
    domain: &Domain2,
    point: Point2,
    n_paths: u64,
    cfg: &WalkConfig,
) -> Result<Estimate, EstimateError> {
    estimate_batch(domain, &[point], n_paths, cfg)?
        .pop()
        .expect("one result per point")
}
