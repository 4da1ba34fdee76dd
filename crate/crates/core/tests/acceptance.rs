//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Monte Carlo criteria use seed 1, fixed before any run was looked at.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI, TAU};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rwos::conformal::{conjugate_seed, estimate_modulus, five_point, max_clearance_point, ModulusConfig, EVAL_GRID};
use rwos::domain::{parse_domain, BoundaryCondition, BoundaryPiece, Domain2, Quadrilateral, Side};
use rwos::estimator::{estimate_batch, estimate_u, path_rng};
use rwos::geometry::{Arc, Piece, Point2, Segment};
use rwos::reference::{cross_ratio, elliptic_k, grotzsch_mu, type_a_modulus, type_b_modulus, ArcQuadAngles};
use rwos::reflection::{ReflectionMap, WalkGeometry};
use rwos::walk::{sample_exit, WalkConfig};
use rwos::wos3d::{estimate_u3, parse_domain3, Domain3, Point3};

const SEED: u64 = 1;
const MODULUS_PATHS: u64 = 200_000;
const TOL: f64 = 2e-2;

/// Chi-square 0.999 quantile with 63 degrees of freedom.
const CHI2_63_999: f64 = 103.442_377_319_873_24;

const TYPE_A_ROWS: [((u32, u32, u32), f64); 5] = [
    ((2, 10, 12), 0.707150),
    ((2, 10, 14), 0.807451),
    ((4, 12, 18), 1.038325),
    ((6, 16, 24), 1.170060),
    ((8, 22, 32), 1.313262),
];

const TYPE_B_ROWS: [((u32, u32, u32), f64); 5] = [
    ((2, 10, 12), 0.538971),
    ((2, 10, 14), 0.595343),
    ((4, 12, 18), 0.712162),
    ((6, 16, 24), 0.771869),
    ((8, 22, 32), 0.831900),
];

type Outcome = Result<String, String>;

fn domains_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("domains")
}

fn load(name: &str) -> Quadrilateral {
    let text = fs::read_to_string(domains_dir().join(name)).expect("bundled domain");
    parse_domain(&text).expect("valid bundled domain")
}

fn load3(name: &str) -> Domain3 {
    let text = fs::read_to_string(domains_dir().join(name)).expect("bundled domain");
    parse_domain3(&text).expect("valid bundled domain")
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn modulus(q: &Quadrilateral, seed: u64) -> Result<rwos::conformal::ModulusResult, String> {
    estimate_modulus(q, &ModulusConfig::new(q, MODULUS_PATHS).with_seed(seed)).map_err(|e| e.to_string())
}

fn rectangles() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for h in ["0.6", "1.0", "1.4"] {
        let exact: f64 = h.parse().unwrap();
        let t = Instant::now();
        let r = modulus(&load(&format!("rectangle_h{h}.json")), SEED)?;
        let pass = (r.h - exact).abs() < TOL && r.consistent_within(4.0);
        ok &= pass;
        lines.push(format!(
            "h={h}: {:.5} ± {:.5}, consistency {:.2e} / stderr {:.2e}, {:.0}s",
            r.h,
            r.stderr,
            r.consistency,
            r.consistency_stderr,
            t.elapsed().as_secs_f64()
        ));
    }
    check(ok, lines.join("; "))
}

fn l_shape() -> Outcome {
    let q = load("l_shape.json");
    let r = modulus(&q, SEED)?;
    let c = modulus(&q.conjugate(), conjugate_seed(SEED ^ 0xa5a5))?;
    let product = r.h * c.h;
    check(
        (r.h - 1.508154).abs() < TOL && (c.h - 0.663062).abs() < TOL && (product - 1.0).abs() < 3e-2,
        format!(
            "M = {:.5} ± {:.5}, conjugate {:.5} ± {:.5}, product {:.5}",
            r.h, r.stderr, c.h, c.stderr, product
        ),
    )
}

fn arc_family(
    prefix: &str,
    rows: &[((u32, u32, u32), f64)],
    formula: fn(ArcQuadAngles) -> Result<f64, rwos::reference::ReferenceError>,
) -> Outcome {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for &((m, n, r), table) in rows {
        let value = formula(ArcQuadAngles::from_24ths(m, n, r).unwrap()).map_err(|e| e.to_string())?;
        worst = worst.max((value - table).abs());
    }
    let formula_time = t.elapsed();
    let exact = formula(ArcQuadAngles::from_24ths(2, 10, 12).unwrap()).unwrap();
    let est = modulus(&load(&format!("{prefix}_2_10_12.json")), SEED)?;
    check(
        worst < 1e-5 && (est.h - exact).abs() < TOL,
        format!(
            "formula vs table max |diff| {worst:.1e} in {:.0}µs; RWoS (2,10,12) {:.5} ± {:.5} vs {exact:.6}",
            formula_time.as_secs_f64() * 1e6,
            est.h,
            est.stderr
        ),
    )
}

fn harmonic_measure() -> Outcome {
    let arc = |a: f64, b: f64| Piece::from(Arc::new(Point2::new(0.0, 0.0), 1.0, a, b, true));
    let disk = Domain2::new(vec![
        BoundaryPiece::new(arc(0.0, FRAC_PI_2), BoundaryCondition::Dirichlet(1.0), Side::FOUR),
        BoundaryPiece::new(arc(FRAC_PI_2, TAU), BoundaryCondition::Dirichlet(0.0), Side::TWO),
    ])
    .map_err(|e| e.to_string())?;
    let n = 1_000_000u64;
    let cfg = WalkConfig::for_domain(&disk).with_seed(SEED);
    let e = estimate_u(&disk, Point2::new(0.0, 0.0), n, &cfg).map_err(|e| e.to_string())?;
    let bound = 4.0 * (0.1875 / n as f64).sqrt();

    let g = WalkGeometry::new(&disk).map_err(|e| e.to_string())?;
    let mut bins = [0u64; 64];
    for i in 0..n {
        let exit = sample_exit(&g, Point2::new(0.0, 0.0), &cfg, &mut path_rng(SEED ^ 0x64, i, 0)).map_err(|e| e.to_string())?;
        let angle = exit.point.y.atan2(exit.point.x).rem_euclid(TAU);
        bins[((angle / TAU * 64.0) as usize).min(63)] += 1;
    }
    let expected = n as f64 / 64.0;
    let chi2: f64 = bins.iter().map(|&b| (b as f64 - expected).powi(2) / expected).sum();
    check(
        (e.mean - 0.25).abs() < bound && chi2 < CHI2_63_999,
        format!(
            "quarter-arc measure {:.5} (|err| bound {bound:.5}); exit-angle chi2 {chi2:.1} < {CHI2_63_999:.1}",
            e.mean
        ),
    )
}

fn exact_solutions() -> Outcome {
    let n = 100_000;
    let strip = load("strip.json");
    let points: Vec<Point2> = [(0.4, 0.5), (1.2, 0.2), (2.0, 0.5), (2.8, 0.9), (3.6, 0.5)]
        .into_iter()
        .map(|(x, y)| Point2::new(x, y))
        .collect();
    let cfg = WalkConfig::for_domain(strip.domain()).with_seed(SEED);
    let mut worst: f64 = 0.0;
    for (p, e) in points.iter().zip(estimate_batch(strip.domain(), &points, n, &cfg).map_err(|e| e.to_string())?) {
        let e = e.map_err(|e| e.to_string())?;
        worst = worst.max((e.mean - p.x / 4.0).abs() / e.stderr);
    }
    let cube = load3("cube.json");
    let nodes = [
        Point3::new(0.25, 0.5, 0.5),
        Point3::new(0.5, 0.25, 0.75),
        Point3::new(0.75, 0.75, 0.25),
    ];
    let cfg3 = WalkConfig::for_diameter(cube.diameter()).with_seed(SEED);
    let mut worst3: f64 = 0.0;
    for (p, e) in nodes.iter().zip(estimate_u3(&cube, &nodes, n, &cfg3)) {
        let e = e.map_err(|e| e.to_string())?;
        worst3 = worst3.max((e.mean - p.x).abs() / e.stderr);
    }
    check(
        worst < 4.0 && worst3 < 4.0,
        format!("strip max |err|/stderr {worst:.2}; cube max |err|/stderr {worst3:.2}"),
    )
}

fn deterministic_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut point = |r: f64| Point2::new(rng.random_range(-r..r), rng.random_range(-r..r));
    let pieces: [Piece; 3] = [
        Segment::new(Point2::new(-0.4, 1.1), Point2::new(2.0, -0.3)).into(),
        Arc::new(Point2::new(0.3, -0.2), 1.7, 0.1, 2.0, true).into(),
        Arc::new(Point2::new(0.0, 0.0), 1.0, 0.0, PI, true).into(),
    ];

    let mut involution: f64 = 0.0;
    for piece in &pieces {
        let map = ReflectionMap::for_piece(piece);
        for _ in 0..10_000 {
            let p = point(3.0);
            if let Ok(once) = map.apply(p) {
                if once.norm() < 1e3 {
                    involution = involution.max(map.apply(once).unwrap().distance(p));
                }
            }
        }
    }

    // g(piece)(t) must coincide with g(piece(t)).
    let mut commutation: f64 = 0.0;
    let targets: [Piece; 3] = [
        Segment::new(Point2::new(1.5, 1.5), Point2::new(2.5, 0.7)).into(),
        Arc::new(Point2::new(2.0, 2.0), 0.5, 0.0, 2.5, true).into(),
        Segment::new(Point2::new(0.4, 0.3), Point2::new(0.6, 0.2)).into(),
    ];
    for map in pieces.iter().map(ReflectionMap::for_piece) {
        for target in &targets {
            let image = map.image_of_piece(target, 0).map_err(|e| e.to_string())?;
            for k in 0..=100 {
                let t = k as f64 / 100.0;
                let p = map.apply(target.point_at(t)).unwrap();
                commutation = commutation.max(image.distance(p));
            }
        }
    }

    let mut stencil: f64 = 0.0;
    for degree in 0..=4 {
        for _ in 0..200 {
            let c: Vec<f64> = (0..=degree).map(|_| point(2.0).x).collect();
            let x = point(1.0).x;
            let delta = 0.01 + point(0.1).x.abs();
            let f = |t: f64| c.iter().rev().fold(0.0, |acc, a| acc * t + a);
            let df = (1..=degree).map(|k| k as f64 * c[k] * x.powi(k as i32 - 1)).sum::<f64>();
            let got = five_point([f(x - 2.0 * delta), f(x - delta), f(x + delta), f(x + 2.0 * delta)], delta);
            let scale = c.iter().map(|a| a.abs()).sum::<f64>().max(1.0) / delta;
            stencil = stencil.max((got - df).abs() / scale);
        }
    }

    let mu = (grotzsch_mu(FRAC_1_SQRT_2).map_err(|e| e.to_string())? - FRAC_PI_2).abs();
    let k0 = elliptic_k(0.0).map_err(|e| e.to_string())?;

    let mut cross: f64 = 0.0;
    for _ in 0..10_000 {
        let z: Vec<Complex64> = (0..4)
            .map(|_| {
                let p = point(2.0);
                Complex64::new(p.x, p.y)
            })
            .collect();
        let (Ok(a), Ok(b)) = (
            cross_ratio(z[0], z[1], z[2], z[3]),
            cross_ratio(z[0].inv(), z[1].inv(), z[2].inv(), z[3].inv()),
        ) else {
            continue;
        };
        if a.norm() < 1e3 && z.iter().all(|w| w.norm() > 0.1) {
            cross = cross.max((a - b).norm() / a.norm().max(1.0));
        }
    }

    check(
        involution <= 1e-12 && commutation <= 1e-12 && stencil <= 1e-12 && mu <= 1e-10 && k0 == FRAC_PI_2 && cross <= 1e-12,
        format!(
            "involution {involution:.1e}, commutation {commutation:.1e}, stencil {stencil:.1e}, \
             mu {mu:.1e}, K(0) = {k0}, cross-ratio {cross:.1e}"
        ),
    )
}

fn run_cli(args: &[&str], threads: usize, dir: &Path) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_rwos"))
        .args(args)
        .env("RWOS_THREADS", threads.to_string())
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn reproducibility() -> Outcome {
    let d = |name: &str| domains_dir().join(name).display().to_string();
    let (strip, l, cube) = (d("strip.json"), d("l_shape.json"), d("cube.json"));
    let commands: Vec<(Vec<String>, Vec<&str>)> = vec![
        (vec!["solve", "--domain", &strip, "--point", "1.1,0.4", "--paths", "20000", "--seed", "5"], vec![]),
        (
            vec!["modulus", "--domain", &l, "--paths", "4000", "--seed", "5", "--reciprocal"],
            vec![],
        ),
        (
            vec![
                "map", "--domain", &l, "--grid", "13,9", "--paths", "500", "--seed", "5", "--modulus", "1.508154",
                "--out", "grid.csv", "--svg", "mesh.svg", "--levels", "9",
            ],
            vec!["grid.csv", "mesh.svg"],
        ),
        (vec!["reference", "--type", "typeA", "--params", "2,10,12"], vec![]),
        (
            vec!["field3d", "--domain", &cube, "--grid", "4,3,3", "--paths", "500", "--seed", "5", "--out", "field.csv"],
            vec!["field.csv"],
        ),
    ]
    .into_iter()
    .map(|(args, files)| (args.into_iter().map(String::from).collect(), files))
    .collect();

    let mut compared = 0;
    for (args, files) in &commands {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let mut runs = Vec::new();
        for threads in [1, 3, 3] {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let stdout = run_cli(&args, threads, dir.path())?;
            let mut outputs = vec![stdout];
            for f in files {
                outputs.push(fs::read(dir.path().join(f)).map_err(|e| format!("{f}: {e}"))?);
                if !dir.path().join(format!("{f}.manifest.json")).exists() {
                    return Err(format!("{}: no manifest for {f}", args[0]));
                }
            }
            runs.push(outputs);
        }
        if runs[0] != runs[1] || runs[1] != runs[2] {
            return Err(format!("{} output differs between runs", args[0]));
        }
        compared += runs[0].len();
    }
    Ok(format!(
        "{} commands, {compared} outputs byte-identical over 1/3/3 threads",
        commands.len()
    ))
}

fn walker_sanity() -> Outcome {
    let mut quads = Vec::new();
    let mut threes = Vec::new();
    for entry in fs::read_dir(domains_dir()).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let text = fs::read_to_string(&path).map_err(|e| e.to_string())?;
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match parse_domain(&text) {
            Ok(q) => {
                quads.push((format!("{name} conjugate"), q.conjugate()));
                quads.push((name, q));
            }
            Err(_) => threes.push((name, parse_domain3(&text).map_err(|e| e.to_string())?)),
        }
    }
    quads.sort_by(|a, b| a.0.cmp(&b.0));
    threes.sort_by(|a, b| a.0.cmp(&b.0));

    let n = 10_000;
    let mut worst_steps = (String::new(), 0.0f64);
    let mut worst_resampled = (String::new(), 0.0f64);
    let mut note = |name: &str, steps: f64, frac: f64| {
        if steps > worst_steps.1 {
            worst_steps = (name.to_string(), steps);
        }
        if frac >= worst_resampled.1 {
            worst_resampled = (name.to_string(), frac);
        }
    };
    for (name, q) in &quads {
        let domain = q.domain();
        let (center, _) = max_clearance_point(domain, EVAL_GRID);
        let b = domain.bounds();
        // The clearance point plus every interior node of a 7 × 7 grid.
        let mut points = vec![center];
        for j in 1..8 {
            for i in 1..8 {
                let p = Point2::new(b.min.x + b.width() * i as f64 / 8.0, b.min.y + b.height() * j as f64 / 8.0);
                if domain.contains(p) && domain.distance_to_boundary(p) > 1e-3 * domain.diameter() {
                    points.push(p);
                }
            }
        }
        let cfg = WalkConfig::for_domain(domain).with_seed(SEED);
        let (mut steps, mut resampled) = (0.0, 0u64);
        for e in estimate_batch(domain, &points, n, &cfg).map_err(|e| e.to_string())? {
            let e = e.map_err(|e| format!("{name}: {e}"))?;
            steps += e.mean_steps;
            resampled += e.resampled;
        }
        note(name, steps / points.len() as f64, resampled as f64 / (n * points.len() as u64) as f64);
    }
    for (name, d) in &threes {
        let (lo, hi) = d.bounds();
        let mut points = Vec::new();
        for k in 1..4 {
            for j in 1..4 {
                for i in 1..4 {
                    let t = |a: f64, b: f64, s: usize| a + (b - a) * s as f64 / 4.0;
                    let p = Point3::new(t(lo.x, hi.x, i), t(lo.y, hi.y, j), t(lo.z, hi.z, k));
                    if d.contains(p) && d.distance_to_boundary(p) > 1e-3 * d.diameter() {
                        points.push(p);
                    }
                }
            }
        }
        let cfg = WalkConfig::for_diameter(d.diameter()).with_seed(SEED);
        let (mut steps, mut resampled) = (0.0, 0u64);
        for e in estimate_u3(d, &points, n / 4, &cfg) {
            let e = e.map_err(|e| format!("{name}: {e}"))?;
            steps += e.mean_steps;
            resampled += e.resampled;
        }
        note(name, steps / points.len() as f64, resampled as f64 / (n / 4 * points.len() as u64) as f64);
    }
    check(
        worst_steps.1 < 200.0 && worst_resampled.1 < 1e-3,
        format!(
            "{} domains; most steps {:.1} ({}); most resampled {:.2e} ({})",
            quads.len() + threes.len(),
            worst_steps.1,
            worst_steps.0,
            worst_resampled.1,
            worst_resampled.0
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("rectangle moduli", rectangles),
        ("L-shape modulus and reciprocal", l_shape),
        ("Type A arc quadrilateral", || arc_family("type_a", &TYPE_A_ROWS, type_a_modulus)),
        ("Type B arc quadrilateral", || arc_family("type_b", &TYPE_B_ROWS, type_b_modulus)),
        ("harmonic measure oracle", harmonic_measure),
        ("exact-solution point tests", exact_solutions),
        ("deterministic properties", deterministic_properties),
        ("CLI reproducibility", reproducibility),
        ("walker sanity", walker_sanity),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = format!("{}", k + 1);
        if !filter.is_empty() && !filter.iter().any(|f| *f == id || name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let outcome = run();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {id} PASS {name}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                failed += 1;
                println!("criterion {id} FAIL {name}: {detail} [{secs:.1}s]");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
