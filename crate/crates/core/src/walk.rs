//! Reflected walk-on-spheres: one trajectory from a start point to its exit
//! through the Dirichlet boundary.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Domain2, Side};
use crate::geometry::{uniform_unit_vector2, Point2};
use crate::reflection::{GeometryError, WalkGeometry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("start point {0:?} is not inside the domain")]
    StartOutside(Vec<f64>),
    #[error("walker stalled at {at:?}: radius underflow away from the Dirichlet boundary")]
    Stalled { at: Vec<f64> },
    #[error("no exit after {0} steps")]
    MaxSteps(u64),
    #[error("sample still outside the domain after {0} reflections")]
    ReflectionCap(u32),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

impl WalkError {
    /// Errors a fresh path can recover from.
    pub fn is_resamplable(&self) -> bool {
        !matches!(self, WalkError::StartOutside(_))
    }
}

/// Sampler parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Width of the absorbing shell around the Dirichlet boundary.
    pub epsilon: f64,
    pub max_steps: u64,
    pub max_reflections: u32,
    pub seed: u64,
}

impl WalkConfig {
    /// Defaults for a domain of the given diameter: `ε = 1e-4 · diameter`.
    pub fn for_diameter(diameter: f64) -> Self {
        Self {
            epsilon: 1e-4 * diameter,
            max_steps: 100_000,
            max_reflections: 4,
            seed: 0,
        }
    }

    pub fn for_domain(domain: &Domain2) -> Self {
        Self::for_diameter(domain.diameter())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn validate(&self, diameter: f64) -> Result<(), String> {
        if !(self.epsilon > 0.0) {
            return Err(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if self.epsilon >= 0.1 * diameter {
            return Err(format!(
                "epsilon {} must be below 0.1 x diameter ({})",
                self.epsilon,
                0.1 * diameter
            ));
        }
        if self.max_steps == 0 || self.max_reflections == 0 {
            return Err("max_steps and max_reflections must be at least 1".into());
        }
        Ok(())
    }
}

/// Where a trajectory was absorbed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExitSample {
    /// Projection of the final position onto the Dirichlet boundary.
    pub point: Point2,
    pub piece: usize,
    pub side: Side,
    /// Dirichlet value at the exit.
    pub value: f64,
    pub steps: u64,
    pub reflections: u32,
}

/// Simulate one reflected trajectory from `start` until it enters the
/// ε-shell of the Dirichlet boundary.
pub fn sample_exit<R: Rng + ?Sized>(
    geometry: &WalkGeometry,
    start: Point2,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Result<ExitSample, WalkError> {
    let domain = geometry.domain();
    let mut z = start;
    let mut steps = 0u64;
    let mut reflections = 0u32;
    loop {
        let step = geometry.walk_radius(z)?;
        if step.dirichlet_distance <= cfg.epsilon {
            break;
        }
        if steps >= cfg.max_steps {
            return Err(WalkError::MaxSteps(steps));
        }
        steps += 1;
        if let Some(corner) = geometry.corner_near(z) {
            z = corner.landing(rng.random::<f64>());
            if !domain.contains(z) {
                let nearest = nearest_neumann(geometry, z, usize::MAX)
                    .ok_or(WalkError::ReflectionCap(reflections))?;
                z = fold_back(geometry, z, nearest, cfg.max_reflections, &mut reflections)?;
            }
            continue;
        }
        let mut next = z + uniform_unit_vector2(rng) * step.radius;
        if let Some(active) = step.active {
            if !domain.contains(next) {
                next = fold_back(geometry, next, active, cfg.max_reflections, &mut reflections)?;
            }
        }
        z = next;
    }
    let (point, piece) = domain.project_to_dirichlet(z);
    let b = &domain.pieces()[piece];
    Ok(ExitSample {
        point,
        piece,
        side: b.side,
        value: b.bc.value().expect("projection lands on a Dirichlet piece"),
        steps,
        reflections,
    })
}

/// Reflect an out-of-domain sample back inside, starting with the active
/// piece's map. Later bounces use the nearest other Neumann piece.
fn fold_back(
    geometry: &WalkGeometry,
    mut z: Point2,
    active: usize,
    cap: u32,
    reflections: &mut u32,
) -> Result<Point2, WalkError> {
    let domain = geometry.domain();
    let mut mirror = active;
    for _ in 0..cap {
        let map = geometry
            .reflection(mirror)
            .expect("active piece is Neumann");
        z = map.apply(z)?;
        *reflections += 1;
        if domain.contains(z) {
            return Ok(z);
        }
        mirror = nearest_neumann(geometry, z, mirror).ok_or(WalkError::ReflectionCap(*reflections))?;
    }
    Err(WalkError::ReflectionCap(cap))
}

/// Neumann piece nearest to `z`, other than `skip`.
fn nearest_neumann(geometry: &WalkGeometry, z: Point2, skip: usize) -> Option<usize> {
    geometry
        .domain()
        .pieces()
        .iter()
        .enumerate()
        .filter(|(j, b)| *j != skip && b.bc.is_neumann())
        .map(|(j, b)| (j, b.geometry.distance(z)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(j, _)| j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{DirichletValues, Quadrilateral};
    use crate::geometry::Segment;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Point2 {
        Point2::new(x, y)
    }

    /// Unit square: Neumann top and bottom, β=0 on the left, β=1 on the right.
    fn symmetric_square() -> Quadrilateral {
        let pieces = vec![
            (Segment::new(p(1.0, 1.0), p(0.0, 1.0)).into(), Side::ONE),
            (Segment::new(p(0.0, 1.0), p(0.0, 0.0)).into(), Side::TWO),
            (Segment::new(p(0.0, 0.0), p(1.0, 0.0)).into(), Side::THREE),
            (Segment::new(p(1.0, 0.0), p(1.0, 1.0)).into(), Side::FOUR),
        ];
        Quadrilateral::new(pieces, DirichletValues::default()).unwrap()
    }

    #[test]
    fn exits_lie_on_dirichlet_boundary() {
        let q = symmetric_square();
        let g = WalkGeometry::new(q.domain()).unwrap();
        let cfg = WalkConfig::for_domain(q.domain());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..2000 {
            let exit = sample_exit(&g, p(0.5, 0.5), &cfg, &mut rng).unwrap();
            assert!(exit.side == Side::TWO || exit.side == Side::FOUR);
            assert!(q.domain().distance_to_dirichlet(exit.point) < 1e-12);
            assert!(exit.point.x == 0.0 || exit.point.x == 1.0);
        }
    }

    #[test]
    fn golden_seed_42() {
        let q = symmetric_square();
        let g = WalkGeometry::new(q.domain()).unwrap();
        let cfg = WalkConfig::for_domain(q.domain()).with_seed(42);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let exit = sample_exit(&g, p(0.5, 0.5), &cfg, &mut rng).unwrap();
        let again = sample_exit(&g, p(0.5, 0.5), &cfg, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(exit, again);
        // Frozen from a reviewed run; update only on intentional sampler changes.
        assert_eq!(
            (exit.side, exit.steps, exit.reflections),
            GOLDEN_SEED_42.0
        );
        assert!((exit.point.y - GOLDEN_SEED_42.1).abs() < 1e-12, "{exit:?}");
    }

    const GOLDEN_SEED_42: ((Side, u64, u32), f64) = ((Side::TWO, 11, 1), 0.217_012_513_537_444);

    #[test]
    fn start_in_shell_projects_immediately() {
        let q = symmetric_square();
        let g = WalkGeometry::new(q.domain()).unwrap();
        let cfg = WalkConfig::for_domain(q.domain());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let exit = sample_exit(&g, p(1.0 - 1e-6, 0.3), &cfg, &mut rng).unwrap();
        assert_eq!(exit.steps, 0);
        assert_eq!(exit.point, p(1.0, 0.3));
        assert_eq!(exit.value, 1.0);
    }

    #[test]
    fn max_steps_is_reported() {
        let q = symmetric_square();
        let g = WalkGeometry::new(q.domain()).unwrap();
        let cfg = WalkConfig {
            max_steps: 1,
            ..WalkConfig::for_domain(q.domain())
        };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let errors = (0..100)
            .filter(|_| matches!(sample_exit(&g, p(0.5, 0.5), &cfg, &mut rng), Err(WalkError::MaxSteps(1))))
            .count();
        assert!(errors > 50);
    }
}
