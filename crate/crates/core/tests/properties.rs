use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rwos::conformal::five_point;
use rwos::domain::{BoundaryCondition, BoundaryPiece, Domain2, Quadrilateral, Side};
use rwos::estimator::{estimate_batch, path_rng};
use rwos::geometry::{Arc, Piece, Point2, Segment};
use rwos::reference::ArcQuadAngles;
use rwos::reflection::{ReflectionMap, WalkGeometry};
use rwos::shapes;
use rwos::walk::{sample_exit, WalkConfig};

fn benchmark_domains() -> Vec<(&'static str, Quadrilateral)> {
    let angles = ArcQuadAngles::from_24ths(2, 10, 12).unwrap();
    let l = shapes::l_shape().unwrap();
    vec![
        ("rect", shapes::rectangle(0.6).unwrap()),
        ("L", l.clone()),
        ("L conj", l.conjugate()),
        ("type A", shapes::type_a(angles).unwrap()),
        ("type A conj", shapes::type_a(angles).unwrap().conjugate()),
        ("type B", shapes::type_b(angles).unwrap()),
    ]
}

fn interior_point(domain: &Domain2, u: f64, v: f64) -> Option<Point2> {
    let b = domain.bounds();
    let p = Point2::new(b.min.x + u * b.width(), b.min.y + v * b.height());
    (domain.contains(p) && domain.distance_to_boundary(p) > 1e-6 * domain.diameter()).then_some(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Every point of the walk circle is in the closed domain or is brought
    /// back by the active reflection, and the circle never crosses Γ_D.
    #[test]
    fn walk_circles_are_safe(u in 0.0..1.0f64, v in 0.0..1.0f64) {
        for (name, q) in benchmark_domains() {
            let domain = q.domain();
            let Some(z) = interior_point(domain, u, v) else { continue };
            let g = WalkGeometry::new(domain).unwrap();
            let step = g.walk_radius(z).unwrap();
            let tol = 1e-9 * domain.diameter();
            prop_assert!(step.radius <= step.dirichlet_distance + tol, "{name} {z:?}");
            for k in 0..256 {
                let w = z + Point2::from_polar(step.radius, TAU * k as f64 / 256.0);
                if domain.contains(w) || domain.distance_to_boundary(w) <= tol {
                    continue;
                }
                let active = step.active;
                prop_assert!(active.is_some(), "{name}: circle at {z:?} leaves through Dirichlet");
                let back = g.reflection(active.unwrap()).unwrap().apply(w).unwrap();
                prop_assert!(
                    domain.contains(back) || domain.distance_to_boundary(back) <= tol,
                    "{name}: {w:?} from {z:?} reflects to {back:?}"
                );
            }
        }
    }

    #[test]
    fn reflections_are_involutions(x in -3.0..3.0f64, y in -3.0..3.0f64) {
        let p = Point2::new(x, y);
        let line: Piece = Segment::new(Point2::new(-0.4, 1.1), Point2::new(2.0, -0.3)).into();
        let circle: Piece = Arc::new(Point2::new(0.3, -0.2), 1.7, 0.1, 2.0, true).into();
        for piece in [line, circle] {
            let map = ReflectionMap::for_piece(&piece);
            if let Ok(once) = map.apply(p) {
                let twice = map.apply(once).unwrap();
                prop_assert!(twice.distance(p) <= 1e-12 * (1.0 + p.norm()), "{p:?} -> {twice:?}");
            }
        }
    }

    #[test]
    fn five_point_exact_on_quartics(
        c in prop::array::uniform5(-2.0..2.0f64),
        x in -1.0..1.0f64,
        delta in 0.01..0.3f64,
    ) {
        let f = |t: f64| c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * c[4])));
        let df = c[1] + x * (2.0 * c[2] + x * (3.0 * c[3] + x * 4.0 * c[4]));
        let got = five_point([f(x - 2.0 * delta), f(x - delta), f(x + delta), f(x + 2.0 * delta)], delta);
        let scale = c.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        prop_assert!((got - df).abs() <= 1e-12 * scale / delta, "{got} vs {df}");
    }

    #[test]
    fn json_round_trip_and_conjugation_cycle(m in 1u32..8, gap in 2u32..10, r in 1u32..10) {
        let angles = ArcQuadAngles::from_24ths(m, m + gap, (m + gap + r).min(47)).unwrap();
        for q in [shapes::type_a(angles).unwrap(), shapes::type_b(angles).unwrap()] {
            let back = Quadrilateral::from_json(&q.to_json()).unwrap();
            prop_assert_eq!(back.vertices(), q.vertices());
            prop_assert_eq!(back.domain().pieces().len(), q.domain().pieces().len());
            let cycled = q.conjugate().conjugate().conjugate().conjugate();
            prop_assert_eq!(cycled, q);
        }
    }
}

#[test]
fn l_shape_images_stay_outside() {
    let q = shapes::l_shape().unwrap();
    let g = WalkGeometry::new(q.domain()).unwrap();
    let domain = q.domain();
    for (i, b) in domain.pieces().iter().enumerate() {
        let Some(images) = g.reflected_obstacles(i) else {
            assert!(b.bc.is_dirichlet());
            continue;
        };
        for img in images {
            for k in 1..20 {
                let p = img.point_at(k as f64 / 20.0);
                assert!(!domain.contains(p) || domain.distance_to_boundary(p) < 1e-9, "piece {i}: {p:?}");
            }
        }
    }
    // The wall x = 2 mirrored across y = 1 would cut the interior at x = 2,
    // y ∈ [0, 1]; none of it may survive as an obstacle.
    let ceiling = domain
        .pieces()
        .iter()
        .position(|b| matches!(b.geometry, Piece::Segment(s) if s.start == Point2::new(3.0, 1.0)))
        .unwrap();
    for img in g.reflected_obstacles(ceiling).unwrap() {
        assert!(img.distance(Point2::new(2.0, 0.5)) > 0.4, "{img:?}");
    }
}

#[test]
fn splitting_corner_lands_on_its_arc() {
    let q = shapes::l_shape().unwrap();
    let g = WalkGeometry::new(q.domain()).unwrap();
    let corner = &g.corners()[0];
    assert_eq!(corner.point, Point2::new(3.0, 1.0));
    // Interior wedge at the convex corner (3,1) spans a quarter turn.
    assert!((corner.opening - 0.5 * PI).abs() < 1e-12);
    for k in 0..=16 {
        let p = corner.landing(k as f64 / 16.0);
        assert!((p.distance(corner.point) - corner.radius).abs() < 1e-12);
        assert!(q.domain().contains(p) || q.domain().distance_to_boundary(p) < 1e-12, "{p:?}");
    }
    assert!(g.corner_near(Point2::new(3.0 - 0.1 * corner.trigger, 1.0 - 0.1 * corner.trigger)).is_some());
    assert!(g.corner_near(Point2::new(2.5, 0.5)).is_none());
}

#[test]
fn batch_is_identical_across_worker_counts() {
    let q = shapes::l_shape().unwrap();
    let cfg = WalkConfig::for_domain(q.domain()).with_seed(17);
    let points = [Point2::new(0.5, 0.5), Point2::new(2.5, 0.5), Point2::new(1.0, 1.5)];
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            estimate_batch(q.domain(), &points, 9000, &cfg)
                .unwrap()
                .into_iter()
                .map(Result::unwrap)
                .collect::<Vec<_>>()
        })
    };
    let one = run(1);
    let eight = run(8);
    for (a, b) in one.iter().zip(&eight) {
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        assert_eq!(a.mean_steps.to_bits(), b.mean_steps.to_bits());
    }
}

fn dirichlet_disk() -> Domain2 {
    let arc = |a: f64, b: f64| Piece::from(Arc::new(Point2::new(0.0, 0.0), 1.0, a, b, true));
    Domain2::new(vec![
        BoundaryPiece::new(arc(0.0, PI), BoundaryCondition::Dirichlet(0.0), Side::TWO),
        BoundaryPiece::new(arc(PI, TAU), BoundaryCondition::Dirichlet(0.0), Side::FOUR),
    ])
    .unwrap()
}

#[test]
fn step_count_grows_logarithmically() {
    let q = shapes::rectangle(1.0).unwrap();
    let g = WalkGeometry::new(q.domain()).unwrap();
    let mean_steps = |eps: f64| {
        let cfg = WalkConfig::for_domain(q.domain()).with_epsilon(eps);
        let total: u64 = (0..20_000)
            .map(|i| sample_exit(&g, Point2::new(0.5, 0.5), &cfg, &mut path_rng(5, i, 0)).unwrap().steps)
            .sum();
        total as f64 / 20_000.0
    };
    let (coarse, fine) = (mean_steps(1e-3), mean_steps(1e-6));
    assert!(fine < 3.0 * coarse, "{coarse} -> {fine}");
}

#[test]
fn disk_exit_points_are_exact() {
    let disk = dirichlet_disk();
    let g = WalkGeometry::new(&disk).unwrap();
    let cfg = WalkConfig::for_domain(&disk);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..2000 {
        let e = sample_exit(&g, Point2::new(0.2, -0.3), &cfg, &mut rng).unwrap();
        assert!((e.point.norm() - 1.0).abs() < 1e-12 * 2.0);
    }
}
