mod config;

use abspectra::abfem::{assemble, solve_eigs_with, EigenOptions, Order, Weight};
use abspectra::almgren::{
    check_dh_identity, check_frequency_bounds, estimate_ma, frequency_trace, pohozaev_residual, AbField, BoundsOptions,
    TraceRegion,
};
use abspectra::experiments::{
    blowup_compare, fit_rate, matrix_lemma_check, records_from_csv, run_sweep, MatrixNoise, SweepSpec,
};
use abspectra::geometry::{build_mesh_with, DomainSpec, Mesh, MeshPolicy, PoleConfig, SizeSource};
use abspectra::limit_profile::LimitProfile;
use abspectra::spectral::{extract_nodal_set, vanishing_order, PointKind};
use abspectra::Point;
use clap::{Parser, Subcommand};
use config::{parse_list, parse_point, read_input, resolve, CliError, CliResult, DomainFlags};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};

/// A comma-separated list, parsed as one value so clap does not split it.
type List = Vec<f64>;

#[derive(Parser)]
#[command(name = "abspectra", version, about = "Aharonov-Bohm eigenvalue laboratory")]
struct Cli {
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a mesh
    Mesh(MeshFlags),
    /// Eigenvalues of the Dirichlet or Aharonov-Bohm problem
    Solve(SolveFlags),
    /// Sweep a pole towards a boundary point
    Sweep(SweepFlags),
    /// Fit the rate of a sweep's eigenvalue gaps
    Ratefit(RatefitFlags),
    /// Nodal set and order of vanishing of an eigenfunction
    Nodal(NodalFlags),
    /// Frequency function and Pohozaev identity near a pole
    Almgren(AlmgrenFlags),
    /// The constant beta and the limit profile
    Beta(BetaFlags),
    /// Compare a rescaled eigenfunction with the limit profile
    Blowup(BlowupFlags),
    /// Random-matrix check of the eigenvalue lemma
    Matrixcheck(MatrixFlags),
}

fn default_policy(h: f64, grading: f64) -> MeshPolicy {
    MeshPolicy::new(h, grading)
}

fn pole_config(p: Option<Point>) -> Option<PoleConfig> {
    p.map(PoleConfig::at)
}

// ---- mesh ----

#[derive(clap::Args, Serialize)]
struct MeshFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    domain: DomainFlags,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    grading: Option<f64>,
    #[arg(long, value_parser = parse_point)]
    pole: Option<Point>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MeshConfig {
    domain: DomainSpec,
    h: f64,
    grading: f64,
    pole: Option<Point>,
}

impl Default for MeshConfig {
    fn default() -> Self {
        MeshConfig { domain: DomainSpec::disk(1.0), h: 0.05, grading: 2.0, pole: None }
    }
}

fn mesh_stats(m: &Mesh) -> Value {
    json!({
        "vertices": m.vertices.len(),
        "triangles": m.triangles.len(),
        "boundary_edges": m.boundary_edges.len(),
        "cut_pairs": m.cut_pairs.len(),
        "pole": m.pole(),
        "min_angle_deg": m.min_angle_deg(),
        "max_edge": m.max_edge_length(),
    })
}

fn cmd_mesh(f: &MeshFlags, run: &mut Run) -> CliResult<()> {
    let mut c: MeshConfig = resolve(f.config.as_deref(), f)?;
    if let Some(d) = f.domain.spec()? {
        c.domain = d;
    }
    run.config(&c);
    let m = build_mesh_with(&c.domain, &default_policy(c.h, c.grading), pole_config(c.pole).as_ref())?;
    run.write("mesh.txt", &m.to_text())?;
    run.write_json("mesh.json", &mesh_stats(&m))
}

// ---- solve ----

#[derive(clap::Args, Serialize)]
struct SolveFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    domain: DomainFlags,
    /// Number of eigenvalues
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    grading: Option<f64>,
    /// Element order (1 or 2)
    #[arg(long)]
    order: Option<u8>,
    #[arg(long, value_parser = parse_point)]
    pole: Option<Point>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SolveConfig {
    domain: DomainSpec,
    k: usize,
    h: f64,
    grading: f64,
    order: Order,
    pole: Option<Point>,
    tol: f64,
    weight: Weight,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            domain: DomainSpec::disk(1.0),
            k: 3,
            h: 0.05,
            grading: 2.0,
            order: Order::P2,
            pole: None,
            tol: 1e-9,
            weight: Weight::one(),
        }
    }
}

fn cmd_solve(f: &SolveFlags, run: &mut Run) -> CliResult<()> {
    let mut c: SolveConfig = resolve(f.config.as_deref(), f)?;
    if let Some(d) = f.domain.spec()? {
        c.domain = d;
    }
    run.config(&c);
    let opt = EigenOptions { tol: c.tol, ..EigenOptions::new(c.k) };
    run.seed(opt.seed);
    let m = build_mesh_with(&c.domain, &default_policy(c.h, c.grading), pole_config(c.pole).as_ref())?;
    let r = solve_eigs_with(&assemble(&m, &c.weight, c.order)?, &opt)?;
    let out = json!({
        "domain": c.domain,
        "pole": c.pole,
        "dofs": r.dofs,
        "lambdas": r.lambdas,
        "residuals": r.residuals,
        "clusters": r.clusters,
        "mesh": mesh_stats(&m),
    });
    emit(&json!({ "lambdas": r.lambdas, "residuals": r.residuals }));
    run.write_json("solve.json", &out)
}

// ---- sweep ----

#[derive(clap::Args, Serialize)]
struct SweepFlags {
    /// Sweep description (TOML)
    #[arg(long)]
    config: PathBuf,
}

fn cmd_sweep(f: &SweepFlags, run: &mut Run) -> CliResult<()> {
    let text = read_input(&f.config)?;
    let spec: SweepSpec = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", f.config.display())))?;
    run.config(&spec);
    run.seed(spec.seed);
    let out = run_sweep(&spec)?;
    run.write("sweep.csv", &out.to_csv())?;
    run.write_json("sweep.json", &out)
}

// ---- ratefit ----

#[derive(clap::Args, Serialize)]
struct RatefitFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Sweep CSV
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    /// t_min,t_max
    #[arg(long, value_parser = parse_list)]
    window: Option<List>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RatefitConfig {
    csv: Option<PathBuf>,
    k: usize,
    window: Vec<f64>,
}

impl Default for RatefitConfig {
    fn default() -> Self {
        RatefitConfig { csv: None, k: 1, window: vec![0.0, f64::MAX] }
    }
}

fn cmd_ratefit(f: &RatefitFlags, run: &mut Run) -> CliResult<()> {
    let c: RatefitConfig = resolve(f.config.as_deref(), f)?;
    run.config(&c);
    let path = c.csv.as_ref().ok_or_else(|| CliError::Config("csv is required".into()))?;
    if c.window.len() != 2 {
        return Err(CliError::Config("window needs two values".into()));
    }
    let recs = records_from_csv(&read_input(path)?)?;
    let fit = fit_rate(&recs, c.k, (c.window[0], c.window[1]))?;
    emit(&fit);
    run.write_json("ratefit.json", &fit)
}

// ---- nodal ----

#[derive(clap::Args, Serialize)]
struct NodalFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    domain: DomainFlags,
    /// One-based eigenvalue index
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, value_parser = parse_point)]
    pole: Option<Point>,
    /// Point where the order of vanishing is measured
    #[arg(long, value_parser = parse_point)]
    point: Option<Point>,
    /// interior, boundary or pole
    #[arg(long)]
    kind: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct NodalConfig {
    domain: DomainSpec,
    k: usize,
    h: f64,
    grading: f64,
    pole: Option<Point>,
    point: Option<Point>,
    kind: Option<PointKind>,
}

impl Default for NodalConfig {
    fn default() -> Self {
        NodalConfig { domain: DomainSpec::disk(1.0), k: 1, h: 0.05, grading: 2.0, pole: None, point: None, kind: None }
    }
}

fn cmd_nodal(f: &NodalFlags, run: &mut Run) -> CliResult<()> {
    let mut c: NodalConfig = resolve(f.config.as_deref(), f)?;
    if let Some(d) = f.domain.spec()? {
        c.domain = d;
    }
    if c.k == 0 {
        return Err(CliError::Config("k is one-based".into()));
    }
    run.config(&c);
    let m = build_mesh_with(&c.domain, &default_policy(c.h, c.grading), pole_config(c.pole).as_ref())?;
    let pb = assemble(&m, &Weight::one(), Order::P2)?;
    let r = solve_eigs_with(&pb, &EigenOptions::new(c.k))?;
    let set = extract_nodal_set(&pb, &r, c.k - 1)?;
    let order = match (c.point, c.kind) {
        (Some(p), Some(kind)) => Some(vanishing_order(&pb, &r, c.k - 1, p, kind)?),
        (Some(p), None) if Some(p) == c.pole => Some(vanishing_order(&pb, &r, c.k - 1, p, PointKind::Pole)?),
        _ => None,
    };
    run.write("nodal.csv", &set.to_csv())?;
    run.write_json(
        "nodal.json",
        &json!({
            "lambda": r.lambdas[c.k - 1],
            "curves": set.polylines.iter().map(|p| json!({"ends": p.ends, "closed": p.closed, "length": p.length()})).collect::<Vec<_>>(),
            "total_length": set.total_length(),
            "warning": set.warning,
            "order": order,
        }),
    )
}

// ---- almgren ----

#[derive(clap::Args, Serialize)]
struct AlmgrenFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_point)]
    pole: Option<Point>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long, value_parser = parse_list)]
    radii: Option<List>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct AlmgrenConfig {
    domain: DomainSpec,
    pole: Point,
    k: usize,
    h: f64,
    grading: f64,
    /// Explicit radii; when empty a geometric grid on `[k_window a1, r_eps]`.
    radii: Vec<f64>,
    r_count: usize,
    k_window: f64,
    r_eps: f64,
    eps: f64,
    delta: f64,
    pohozaev_r: f64,
}

impl Default for AlmgrenConfig {
    fn default() -> Self {
        AlmgrenConfig {
            domain: DomainSpec::half_disk(1.0),
            pole: Point::new(0.02, 0.0),
            k: 1,
            h: 0.05,
            grading: 2.0,
            radii: vec![],
            r_count: 24,
            k_window: 4.0,
            r_eps: 0.4,
            eps: 0.25,
            delta: 0.05,
            pohozaev_r: 0.3,
        }
    }
}

fn cmd_almgren(f: &AlmgrenFlags, run: &mut Run) -> CliResult<()> {
    let c: AlmgrenConfig = resolve(f.config.as_deref(), f)?;
    run.config(&c);
    let m = build_mesh_with(&c.domain, &default_policy(c.h, c.grading), Some(&PoleConfig::at(c.pole)))?;
    let pb = assemble(&m, &Weight::one(), Order::P2)?;
    let r = solve_eigs_with(&pb, &EigenOptions::new(c.k))?;
    let i = c.k - 1;
    let field = AbField::from_eigen(&pb, &r, i)?;
    let radii = if c.radii.is_empty() {
        let (lo, hi) = (c.k_window * c.pole.x, c.r_eps);
        (0..c.r_count).map(|j| lo * (hi / lo).powf(j as f64 / (c.r_count - 1) as f64)).collect()
    } else {
        c.radii.clone()
    };
    let lambda = r.lambdas[i];
    let tr = frequency_trace(&field, lambda, Some(c.pole), &radii, TraceRegion::default())?;
    let dh = check_dh_identity(&tr)?;
    let ma = estimate_ma(&pb, &r, i)?;
    let poh = pohozaev_residual(&field, lambda, c.pole, c.pohozaev_r, ma.value)?;
    let bounds = check_frequency_bounds(
        &tr,
        &BoundsOptions { k: c.k_window, r_eps: c.r_eps, eps: c.eps, delta: c.delta, p_sup: 1.0 },
    )?;
    run.write("trace.csv", &tr.to_csv())?;
    run.write_json(
        "almgren.json",
        &json!({ "lambda": lambda, "dh": dh, "ma": ma, "pohozaev": poh, "bounds": bounds, "bounds_ok": bounds.ok() }),
    )
}

// ---- beta ----

#[derive(clap::Args, Serialize)]
struct BetaFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    /// Truncation radius
    #[arg(long = "R")]
    #[serde(rename = "radius")]
    radius: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    n_max: Option<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BetaConfig {
    radius: f64,
    h: f64,
    n_max: u32,
}

impl Default for BetaConfig {
    fn default() -> Self {
        BetaConfig { radius: 8.0, h: 0.05, n_max: 9 }
    }
}

fn cmd_beta(f: &BetaFlags, run: &mut Run) -> CliResult<()> {
    let c: BetaConfig = resolve(f.config.as_deref(), f)?;
    run.config(&c);
    let (p, b, coef) = LimitProfile::compute(c.radius, c.h, c.n_max)?;
    run.write("profile.json", &p.to_json()?)?;
    run.write_json("beta.json", &json!({ "beta": b, "coefficients": coef }))
}

// ---- blowup ----

#[derive(clap::Args, Serialize)]
struct BlowupFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long)]
    a1: Option<f64>,
    /// Comparison radius in blown-up coordinates
    #[arg(long = "K")]
    #[serde(rename = "k_radius")]
    k_radius: Option<f64>,
    /// Profile JSON written by `beta`
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BlowupConfig {
    domain: DomainSpec,
    a1: f64,
    a2: f64,
    /// One-based eigenvalue index.
    k: usize,
    k_radius: f64,
    h: f64,
    grading: f64,
    /// Element size at the pole relative to `a1`.
    refine: f64,
    profile: Option<PathBuf>,
    profile_radius: f64,
    profile_h: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig {
            domain: DomainSpec::half_disk(1.0),
            a1: 0.02,
            a2: 0.0,
            k: 1,
            k_radius: 4.0,
            h: 0.05,
            grading: 2.0,
            refine: 0.05,
            profile: None,
            profile_radius: 8.0,
            profile_h: 0.05,
        }
    }
}

fn cmd_blowup(f: &BlowupFlags, run: &mut Run) -> CliResult<()> {
    let c: BlowupConfig = resolve(f.config.as_deref(), f)?;
    run.config(&c);
    // A persisted profile carries no near field; recompute it for the comparison.
    let profile = match &c.profile {
        Some(p) => {
            let stored = LimitProfile::from_json(&read_input(p)?)?;
            LimitProfile::compute(stored.r, stored.h, 9)?.0
        }
        None => LimitProfile::compute(c.profile_radius, c.profile_h, 9)?.0,
    };
    let a = Point::new(c.a1, c.a2);
    let mut pol = default_policy(c.h, c.grading);
    pol.sources.push(SizeSource { center: a, h_min: c.refine * c.a1, ratio: 0.15 });
    let m = build_mesh_with(&c.domain, &pol, Some(&PoleConfig::at(a)))?;
    let pb = assemble(&m, &Weight::one(), Order::P2)?;
    let r = solve_eigs_with(&pb, &EigenOptions::new(c.k))?;
    let rep = blowup_compare(&pb, &r, c.k - 1, &profile, c.k_radius)?;
    emit(&rep);
    run.write_json("blowup.json", &rep)
}

// ---- matrixcheck ----

#[derive(clap::Args, Serialize)]
struct MatrixFlags {
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_list)]
    lambdas: Option<List>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    c_k: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, value_parser = parse_list)]
    eps: Option<List>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct MatrixConfig {
    lambdas: Vec<f64>,
    n: u32,
    c_k: f64,
    trials: usize,
    eps: Vec<f64>,
    noise: f64,
    seed: u64,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig {
            lambdas: vec![1.0, 2.0],
            n: 1,
            c_k: 1.0,
            trials: 20,
            eps: vec![0.01, 0.005, 0.0025, 0.00125],
            noise: 1.0,
            seed: 0,
        }
    }
}

fn cmd_matrix(f: &MatrixFlags, run: &mut Run) -> CliResult<()> {
    let c: MatrixConfig = resolve(f.config.as_deref(), f)?;
    run.config(&c);
    run.seed(c.seed);
    let noise = MatrixNoise { block: c.noise, coupling: c.noise, corner: c.noise };
    let rep = matrix_lemma_check(&c.lambdas, c.n, c.c_k, c.trials, &c.eps, noise, c.seed)?;
    emit(&rep);
    run.write_json("matrix.json", &rep)
}

// ---- run bookkeeping ----

struct Run {
    command: &'static str,
    out: PathBuf,
    config: Value,
    seed: Option<u64>,
    outputs: Vec<String>,
}

impl Run {
    fn config<T: Serialize>(&mut self, c: &T) {
        self.config = serde_json::to_value(c).unwrap_or(Value::Null);
    }

    fn seed(&mut self, s: u64) {
        self.seed = Some(s);
    }

    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        std::fs::create_dir_all(&self.out).map_err(|e| CliError::Output(format!("{}: {e}", self.out.display())))?;
        let p = self.out.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::Output(format!("{}: {e}", p.display())))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, v: &T) -> CliResult<()> {
        let text = serde_json::to_string_pretty(v).map_err(|e| CliError::Output(e.to_string()))?;
        self.write(name, &text)
    }

    fn manifest(&self, status: &str) -> Value {
        let canonical = serde_json::to_string(&self.config).unwrap_or_default();
        let hash = Sha256::digest(canonical.as_bytes());
        json!({
            "command": self.command,
            "status": status,
            "config": self.config,
            "config_sha256": hash.iter().map(|b| format!("{b:02x}")).collect::<String>(),
            "seed": self.seed,
            "versions": { "abspectra": abspectra::VERSION, "abspectra-cli": env!("CARGO_PKG_VERSION") },
            "outputs": self.outputs,
        })
    }
}

fn dispatch(cmd: &Cmd, run: &mut Run) -> CliResult<()> {
    match cmd {
        Cmd::Mesh(f) => cmd_mesh(f, run),
        Cmd::Solve(f) => cmd_solve(f, run),
        Cmd::Sweep(f) => cmd_sweep(f, run),
        Cmd::Ratefit(f) => cmd_ratefit(f, run),
        Cmd::Nodal(f) => cmd_nodal(f, run),
        Cmd::Almgren(f) => cmd_almgren(f, run),
        Cmd::Beta(f) => cmd_beta(f, run),
        Cmd::Blowup(f) => cmd_blowup(f, run),
        Cmd::Matrixcheck(f) => cmd_matrix(f, run),
    }
}

fn name(cmd: &Cmd) -> &'static str {
    match cmd {
        Cmd::Mesh(_) => "mesh",
        Cmd::Solve(_) => "solve",
        Cmd::Sweep(_) => "sweep",
        Cmd::Ratefit(_) => "ratefit",
        Cmd::Nodal(_) => "nodal",
        Cmd::Almgren(_) => "almgren",
        Cmd::Beta(_) => "beta",
        Cmd::Blowup(_) => "blowup",
        Cmd::Matrixcheck(_) => "matrixcheck",
    }
}

// Printing to a closed pipe is not an error worth reporting.
fn emit<T: Serialize>(v: &T) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(v).unwrap_or_default());
}

fn fail(e: &CliError) -> ! {
    eprintln!("{}", e.record());
    std::process::exit(e.exit_code());
}

fn write_manifest(run: &Run, status: &str) {
    let path: &Path = &run.out;
    if std::fs::create_dir_all(path).is_ok() {
        let _ = std::fs::write(path.join("manifest.json"), serde_json::to_string_pretty(&run.manifest(status)).unwrap());
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                e.exit();
            }
            fail(&CliError::Usage(e.to_string().trim().to_string()));
        }
    };
    let mut run = Run { command: name(&cli.cmd), out: cli.out.clone(), config: Value::Null, seed: None, outputs: vec![] };
    match dispatch(&cli.cmd, &mut run) {
        Ok(()) => write_manifest(&run, "ok"),
        Err(e) => {
            let _ = run.write_json("error.json", &e.record());
            write_manifest(&run, "error");
            fail(&e);
        }
    }
}
