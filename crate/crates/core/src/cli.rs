//! Command-line front end. Exit code 2 signals a bad domain file or flag,
//! 3 a numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::conformal::{estimate_modulus, evaluate_map_grid, ModulusConfig, ModulusError, ModulusResult};
use crate::contour::{extract_contours, uniform_levels, Field};
use crate::domain::{parse_domain, Quadrilateral};
use crate::estimator::{estimate_u, mix64, EstimateError};
use crate::geometry::Point2;
use crate::reference::{rectangle_modulus, type_a_modulus, type_b_modulus, ArcQuadAngles};
use crate::svg::mesh_svg;
use crate::walk::WalkConfig;
use crate::wos3d::{estimate_field3, parse_domain3};

#[derive(Debug, Parser)]
#[command(name = "rwos", version, about = "Reflected walk-on-spheres for mixed Laplace problems and conformal moduli")]
pub struct Cli {
    /// Worker threads; results do not depend on it. 0 uses all cores.
    #[arg(long, global = true, env = "RWOS_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate u at one point; prints `mean stderr n_paths mean_steps`.
    Solve(SolveArgs),
    /// Estimate the conformal modulus of a quadrilateral.
    Modulus(ModulusArgs),
    /// Sample u and v on a grid; write CSV and optionally an SVG mesh.
    Map(MapArgs),
    /// Closed-form reference modulus.
    Reference(ReferenceArgs),
    /// Estimate u on a grid in a polyhedral domain.
    Field3d(Field3dArgs),
}

#[derive(Debug, Clone, Args)]
pub struct WalkArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Absorbing shell width in domain units. Default: 1e-4 of the diameter.
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// `X,Y`
    #[arg(long)]
    pub point: String,
    #[arg(long)]
    pub paths: u64,
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Write a run manifest here.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModulusArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// Evaluation point `X,Y`. Default: the interior point of largest clearance.
    #[arg(long)]
    pub point: Option<String>,
    /// Stencil spacing.
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub paths: u64,
    #[command(flatten)]
    pub walk: WalkArgs,
    /// Also estimate the conjugate modulus and the product.
    #[arg(long)]
    pub reciprocal: bool,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// `NX,NY`
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub paths: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long, default_value_t = 9)]
    pub levels: usize,
    /// Modulus used to scale v. Estimated first when absent.
    #[arg(long)]
    pub modulus: Option<f64>,
    #[command(flatten)]
    pub walk: WalkArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReferenceType {
    Rect,
    #[value(name = "typeA")]
    TypeA,
    #[value(name = "typeB")]
    TypeB,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    #[arg(long = "type", value_enum)]
    pub kind: ReferenceType,
    /// `H` for rectangles; `M,N,R` (angles in units of π/24) for the arc families.
    #[arg(long, allow_hyphen_values = true)]
    pub params: String,
}

#[derive(Debug, Args)]
pub struct Field3dArgs {
    #[arg(long)]
    pub domain: PathBuf,
    /// `NX,NY,NZ`
    #[arg(long)]
    pub grid: String,
    #[arg(long)]
    pub paths: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub walk: WalkArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Spec(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<EstimateError> for CliError {
    fn from(e: EstimateError) -> Self {
        match e {
            EstimateError::Walk { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Spec(e.to_string()),
        }
    }
}

impl From<ModulusError> for CliError {
    fn from(e: ModulusError) -> Self {
        match e {
            ModulusError::Estimate(inner) => inner.into(),
            ModulusError::IllConditioned { .. } => CliError::Numeric(e.to_string()),
            ModulusError::Config(_) | ModulusError::Geometry(_) => CliError::Spec(e.to_string()),
        }
    }
}

/// Everything needed to rerun a command.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub args: Vec<String>,
    pub domain_file: Option<String>,
    pub domain_sha256: Option<String>,
    pub seed: Option<u64>,
    pub epsilon: Option<f64>,
    pub n_paths: Option<u64>,
    pub delta: Option<f64>,
    pub eval_point: Option<[f64; 2]>,
    pub threads: usize,
    pub wall_clock_seconds: f64,
    pub resampled: u64,
    pub version: String,
}

/// Round to `digits` significant digits and print the shortest decimal that
/// reads back as the rounded value.
pub fn format_sig(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        "0".into()
    } else {
        format!("{rounded}")
    }
}

fn parse_list<const N: usize>(text: &str, what: &str) -> Result<[f64; N], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || CliError::Spec(format!("{what}: expected {N} comma-separated numbers, got {text:?}"));
    if parts.len() != N {
        return Err(bad());
    }
    let mut out = [0.0f64; N];
    for (slot, p) in out.iter_mut().zip(parts) {
        *slot = p.parse().map_err(|_| bad())?;
        if !slot.is_finite() {
            return Err(bad());
        }
    }
    Ok(out)
}

fn parse_grid<const N: usize>(text: &str) -> Result<[usize; N], CliError> {
    let values = parse_list::<N>(text, "--grid")?;
    let mut out = [0; N];
    for (slot, v) in out.iter_mut().zip(values) {
        if v < 2.0 || v.fract() != 0.0 || v > 1e6 {
            return Err(CliError::Spec(format!("--grid: need integers of at least 2, got {text:?}")));
        }
        *slot = v as usize;
    }
    Ok(out)
}

fn read_domain(path: &Path) -> Result<(String, String), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Spec(format!("cannot read {}: {e}", path.display())))?;
    let digest = Sha256::digest(text.as_bytes());
    let hex = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok((text, hex))
}

fn load_quadrilateral(path: &Path) -> Result<(Quadrilateral, String), CliError> {
    let (text, hash) = read_domain(path)?;
    let q = parse_domain(&text).map_err(|e| CliError::Spec(format!("{}: {e}", path.display())))?;
    Ok((q, hash))
}

fn walk_config(diameter: f64, args: &WalkArgs) -> Result<WalkConfig, CliError> {
    let mut cfg = WalkConfig::for_diameter(diameter).with_seed(args.seed);
    if let Some(eps) = args.epsilon {
        cfg = cfg.with_epsilon(eps);
    }
    cfg.validate(diameter).map_err(CliError::Spec)?;
    Ok(cfg)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Sidecar path for an output file: `grid.csv` → `grid.csv.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    write_file(path, &(json + "\n"))
}

struct Context {
    args: Vec<String>,
    threads: usize,
    started: Instant,
}

impl Context {
    fn manifest(&self, command: &str, domain: Option<(&Path, &str)>, walk: Option<&WalkConfig>) -> RunManifest {
        RunManifest {
            command: command.into(),
            args: self.args.clone(),
            domain_file: domain.map(|(p, _)| p.display().to_string()),
            domain_sha256: domain.map(|(_, h)| h.to_string()),
            seed: walk.map(|w| w.seed),
            epsilon: walk.map(|w| w.epsilon),
            n_paths: None,
            delta: None,
            eval_point: None,
            threads: self.threads,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            resampled: 0,
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

fn cmd_solve(a: &SolveArgs, ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    let (q, hash) = load_quadrilateral(&a.domain)?;
    let [x, y] = parse_list::<2>(&a.point, "--point")?;
    let cfg = walk_config(q.domain().diameter(), &a.walk)?;
    let e = estimate_u(q.domain(), Point2::new(x, y), a.paths, &cfg)?;
    writeln!(out, "{}\t{}\t{}\t{}", e.mean, e.stderr, e.n_paths, e.mean_steps).map_err(io)?;
    if e.flagged() {
        eprintln!("warning: {} of {} paths were resampled", e.resampled, e.n_paths);
    }
    if let Some(path) = &a.manifest {
        let mut m = ctx.manifest("solve", Some((&a.domain, &hash)), Some(&cfg));
        m.n_paths = Some(a.paths);
        m.eval_point = Some([x, y]);
        m.resampled = e.resampled;
        write_manifest(path, &m)?;
    }
    Ok(())
}

fn measured_line(name: &str, m: Option<crate::conformal::Measured>) -> String {
    match m {
        Some(m) => format!("{name}\t{}\t{}", m.value, m.stderr),
        None => format!("{name}\tnan\tnan"),
    }
}

fn modulus_config(q: &Quadrilateral, a: &ModulusArgs, seed: u64) -> Result<ModulusConfig, CliError> {
    let mut cfg = ModulusConfig::new(q, a.paths);
    cfg.walk = walk_config(q.domain().diameter(), &WalkArgs { seed, ..a.walk.clone() })?;
    cfg.delta = a.delta;
    if let Some(p) = &a.point {
        let [x, y] = parse_list::<2>(p, "--point")?;
        cfg.eval_point = Some(Point2::new(x, y));
    }
    Ok(cfg)
}

fn print_modulus(out: &mut dyn Write, prefix: &str, r: &ModulusResult) -> std::io::Result<()> {
    writeln!(out, "{prefix}h\t{}\t{}", r.h, r.stderr)?;
    writeln!(out, "{}", measured_line(&format!("{prefix}h_from_x"), r.h_from_x))?;
    writeln!(out, "{}", measured_line(&format!("{prefix}h_from_y"), r.h_from_y))?;
    writeln!(out, "{prefix}consistency\t{}\t{}", r.consistency, r.consistency_stderr)
}

fn cmd_modulus(a: &ModulusArgs, ctx: &Context, out: &mut dyn Write) -> Result<(), CliError> {
    let (q, hash) = load_quadrilateral(&a.domain)?;
    let cfg = modulus_config(&q, a, a.walk.seed)?;
    let r = estimate_modulus(&q, &cfg)?;
    print_modulus(out, "", &r).map_err(io)?;
    writeln!(out, "eval_point\t{}\t{}", r.eval_point.x, r.eval_point.y).map_err(io)?;
    writeln!(out, "delta\t{}", r.delta).map_err(io)?;
    let mut resampled = r.resampled;
    if a.reciprocal {
        let conj = q.conjugate();
        // An independent stream from the direct run.
        let c_cfg = modulus_config(&conj, a, mix64(a.walk.seed ^ 0x2545_f491_4f6c_dd1d))?;
        let c = estimate_modulus(&conj, &c_cfg)?;
        print_modulus(out, "conjugate_", &c).map_err(io)?;
        let product = r.h * c.h;
        let product_se = product * (r.stderr / r.h).hypot(c.stderr / c.h);
        writeln!(out, "product\t{product}\t{product_se}").map_err(io)?;
        resampled += c.resampled;
    }
    if let Some(path) = &a.manifest {
        let mut m = ctx.manifest("modulus", Some((&a.domain, &hash)), Some(&cfg.walk));
        m.n_paths = Some(a.paths);
        m.delta = Some(r.delta);
        m.eval_point = Some([r.eval_point.x, r.eval_point.y]);
        m.resampled = resampled;
        write_manifest(path, &m)?;
    }
    Ok(())
}

fn cmd_map(a: &MapArgs, ctx: &Context) -> Result<(), CliError> {
    let (q, hash) = load_quadrilateral(&a.domain)?;
    let [nx, ny] = parse_grid::<2>(&a.grid)?;
    let walk = walk_config(q.domain().diameter(), &a.walk)?;
    let mut resampled = 0;
    let h = match a.modulus {
        Some(h) => h,
        None => {
            let cfg = ModulusConfig {
                walk,
                ..ModulusConfig::new(&q, a.paths)
            };
            let r = estimate_modulus(&q, &cfg)?;
            resampled += r.resampled;
            r.h
        }
    };
    let grid = evaluate_map_grid(&q, h, nx, ny, a.paths, &walk)?;
    resampled += grid.resampled;

    let mut csv = String::from("x,y,u,u_stderr,v,v_stderr\n");
    for (i, j) in grid.interior() {
        let p = grid.point(i, j);
        let k = grid.index(i, j);
        let row = [p.x, p.y, grid.u[k], grid.u_stderr[k], grid.v[k], grid.v_stderr[k]];
        csv.push_str(&row.map(|v| format_sig(v, 9)).join(","));
        csv.push('\n');
    }
    write_file(&a.out, &csv)?;
    let mut m = ctx.manifest("map", Some((&a.domain, &hash)), Some(&walk));
    m.n_paths = Some(a.paths);
    m.resampled = resampled;

    if let Some(svg_path) = &a.svg {
        let u = extract_contours(&grid, Field::U, &uniform_levels(a.levels, 1.0))
            .map_err(|e| CliError::Spec(e.to_string()))?;
        let v = extract_contours(&grid, Field::V, &uniform_levels(a.levels, h))
            .map_err(|e| CliError::Spec(e.to_string()))?;
        write_file(svg_path, &mesh_svg(q.domain(), &u, &v))?;
        write_manifest(&manifest_path(svg_path), &m)?;
    }
    m.wall_clock_seconds = ctx.started.elapsed().as_secs_f64();
    write_manifest(&manifest_path(&a.out), &m)
}

fn cmd_reference(a: &ReferenceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = |e: crate::reference::ReferenceError| CliError::Spec(e.to_string());
    let value = match a.kind {
        ReferenceType::Rect => {
            let [h] = parse_list::<1>(&a.params, "--params")?;
            rectangle_modulus(h).map_err(spec)?
        }
        ReferenceType::TypeA | ReferenceType::TypeB => {
            let [m, n, r] = parse_list::<3>(&a.params, "--params")?;
            let s = std::f64::consts::PI / 24.0;
            let angles = ArcQuadAngles::new(m * s, n * s, r * s).map_err(spec)?;
            if a.kind == ReferenceType::TypeA {
                type_a_modulus(angles).map_err(spec)?
            } else {
                type_b_modulus(angles).map_err(spec)?
            }
        }
    };
    writeln!(out, "{}", format_sig(value, 10)).map_err(io)
}

fn cmd_field3d(a: &Field3dArgs, ctx: &Context) -> Result<(), CliError> {
    let (text, hash) = read_domain(&a.domain)?;
    let domain = parse_domain3(&text).map_err(|e| CliError::Spec(format!("{}: {e}", a.domain.display())))?;
    let dims = parse_grid::<3>(&a.grid)?;
    let walk = walk_config(domain.diameter(), &a.walk)?;
    let grid = estimate_field3(&domain, (dims[0], dims[1], dims[2]), a.paths, &walk)?;
    let mut csv = String::from("x,y,z,u,u_stderr\n");
    for (i, j, k) in grid.interior() {
        let p = grid.point(i, j, k);
        let idx = grid.index(i, j, k);
        let row = [p.x, p.y, p.z, grid.u[idx], grid.u_stderr[idx]];
        csv.push_str(&row.map(|v| format_sig(v, 9)).join(","));
        csv.push('\n');
    }
    write_file(&a.out, &csv)?;
    let mut m = ctx.manifest("field3d", Some((&a.domain, &hash)), Some(&walk));
    m.n_paths = Some(a.paths);
    m.resampled = grid.resampled;
    write_manifest(&manifest_path(&a.out), &m)
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Run a parsed command, writing reports to `out`.
pub fn execute(cli: &Cli, args: Vec<String>, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Context {
        args,
        threads: cli.threads,
        started: Instant::now(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Spec(format!("--threads: {e}")))?;
    let mut report = Vec::new();
    pool.install(|| match &cli.command {
        Command::Solve(a) => cmd_solve(a, &ctx, &mut report),
        Command::Modulus(a) => cmd_modulus(a, &ctx, &mut report),
        Command::Map(a) => cmd_map(a, &ctx),
        Command::Reference(a) => cmd_reference(a, &mut report),
        Command::Field3d(a) => cmd_field3d(a, &ctx),
    })?;
    out.write_all(&report).map_err(io)
}

/// Parse `args` (program name first), run, and return the exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let recorded = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(&cli, recorded, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout().lock())
}
