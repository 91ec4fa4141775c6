use crate::abfem::{assemble, solve_eigs_with, EigenOptions, EigenProblem, EigenResult, FemFunction, Order, Weight};
use crate::error::{Error, Result};
use crate::geometry::{build_mesh_with, DomainSpec, Locator, Mesh, MeshPolicy, PoleConfig};
use crate::point::Point;
use crate::spectral::extract_nodal_set;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the poles approach `b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PathSpec {
    /// `a = b + t·direction` (the direction is normalised).
    Ray { x: f64, y: f64 },
    /// Along the nodal line of the reference `φ_k` that ends at `b`, straightened to
    /// its secant at distance `reach` from `b`.
    NodalLine { k: usize, reach: f64 },
}

/// A sweep of poles `a_j = b + t_j d` with `t_j = t0 ρ^j`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepSpec {
    pub domain: DomainSpec,
    #[serde(default)]
    pub weight: Weight,
    /// One-based eigenvalue indices.
    pub k_list: Vec<usize>,
    pub b: Point,
    pub path: PathSpec,
    pub t0: f64,
    pub rho: f64,
    pub count: usize,
    pub policy: MeshPolicy,
    #[serde(default = "default_order")]
    pub order: Order,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Repeat every pole on a mesh coarsened by this factor to estimate the gap error.
    #[serde(default)]
    pub richardson_factor: Option<f64>,
    /// Solve the coarsest and finest poles again with a rotated cut.
    #[serde(default = "default_true")]
    pub gauge_check: bool,
}

fn default_order() -> Order {
    Order::P2
}
fn default_tol() -> f64 {
    1e-9
}
fn default_true() -> bool {
    true
}

impl SweepSpec {
    pub fn distances(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.t0 * self.rho.powi(j as i32)).collect()
    }

    fn validate(&self) -> Result<()> {
        if self.k_list.is_empty() || self.k_list.contains(&0) {
            return Err(Error::InvalidInput("k_list must hold one-based indices".into()));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) || !(self.t0 > 0.0) || self.count == 0 {
            return Err(Error::InvalidInput("need t0 > 0, 0 < rho < 1 and count >= 1".into()));
        }
        self.domain.validate()
    }
}

/// One pole and one tracked eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub t: f64,
    pub a: Point,
    pub k: usize,
    pub lambda_a: f64,
    pub lambda_ref: f64,
    pub gap: f64,
    /// Sorted (one-based) index the tracked branch occupies at this pole.
    pub index_a: usize,
    pub dofs: usize,
    pub triangles: usize,
    pub residual: f64,
    /// Error estimate of `gap` from the coarsened solve.
    pub gap_error: Option<f64>,
}

impl SweepRecord {
    pub fn richardson_ok(&self) -> Option<bool> {
        self.gap_error.map(|e| e <= 0.1 * self.gap.abs())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepFailure {
    pub t: f64,
    pub a: Point,
    pub code: String,
    pub message: String,
}

/// Eigenvalues of the same pole with two different cuts.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaugeCheck {
    pub t: f64,
    pub lambdas: Vec<f64>,
    pub lambdas_alt: Vec<f64>,
    pub max_relative: f64,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub failures: Vec<SweepFailure>,
    pub gauge: Vec<GaugeCheck>,
}

pub const CSV_HEADER: &str = "t,a_x,a_y,k,lambda_a,lambda_ref,gap";

impl SweepOutcome {
    /// CSV with header `t,a_x,a_y,k,lambda_a,lambda_ref,gap`.
    pub fn to_csv(&self) -> String {
        records_to_csv(&self.records)
    }
}

pub fn records_to_csv(records: &[SweepRecord]) -> String {
    let mut w = csv::Writer::from_writer(vec![]);
    w.write_record(CSV_HEADER.split(',')).expect("in-memory csv");
    for r in records {
        w.write_record([
            format!("{:?}", r.t),
            format!("{:?}", r.a.x),
            format!("{:?}", r.a.y),
            r.k.to_string(),
            format!("{:?}", r.lambda_a),
            format!("{:?}", r.lambda_ref),
            format!("{:?}", r.gap),
        ])
        .expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf8")
}

/// Parse records written by [`records_to_csv`] (extra columns are ignored).
pub fn records_from_csv(text: &str) -> Result<Vec<SweepRecord>> {
    #[derive(Deserialize)]
    struct Row {
        t: f64,
        a_x: f64,
        a_y: f64,
        k: usize,
        lambda_a: f64,
        lambda_ref: f64,
        gap: f64,
    }
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut out = vec![];
    for row in rd.deserialize::<Row>() {
        let r = row.map_err(|e| Error::Parse(format!("sweep csv: {e}")))?;
        out.push(SweepRecord {
            t: r.t,
            a: Point::new(r.a_x, r.a_y),
            k: r.k,
            lambda_a: r.lambda_a,
            lambda_ref: r.lambda_ref,
            gap: r.gap,
            index_a: r.k,
            dofs: 0,
            triangles: 0,
            residual: 0.0,
            gap_error: None,
        });
    }
    Ok(out)
}

/// Worker count from `ABSPECTRA_THREADS`, if set.
pub fn thread_cap() -> Option<usize> {
    std::env::var("ABSPECTRA_THREADS").ok().and_then(|v| v.trim().parse().ok()).filter(|&n| n > 0)
}

struct PoleSolve {
    mesh: Mesh,
    problem: EigenProblem,
    result: EigenResult,
    reference: EigenResult,
}

fn solve_pole(spec: &SweepSpec, policy: &MeshPolicy, pole: &PoleConfig, count: usize) -> Result<PoleSolve> {
    let mesh = build_mesh_with(&spec.domain, policy, Some(pole))?;
    let mut opt = EigenOptions::new(count);
    opt.tol = spec.tol;
    opt.seed = spec.seed;
    let problem = assemble(&mesh, &spec.weight, spec.order)?;
    let result = solve_eigs_with(&problem, &opt)?;
    let plain = assemble(&mesh.without_cut(), &spec.weight, spec.order)?;
    let reference = solve_eigs_with(&plain, &opt)?;
    Ok(PoleSolve { mesh, problem, result, reference })
}

/// Direction of the nodal line of the reference `φ_k` that ends at `b`.
pub fn nodal_direction(spec: &SweepSpec, k: usize, reach: f64) -> Result<Point> {
    let mesh = build_mesh_with(&spec.domain, &spec.policy, None)?;
    let problem = assemble(&mesh, &spec.weight, spec.order)?;
    let res = solve_eigs_with(&problem, &EigenOptions::new(k + 1))?;
    let set = extract_nodal_set(&problem, &res, k - 1)?;
    let tol = 4.0 * mesh.local_size(spec.b);
    let mut best: Option<(f64, Point)> = None;
    for pl in &set.polylines {
        let (first, last) = (pl.points[0], *pl.points.last().unwrap());
        let pts: Vec<Point> = if first.dist(spec.b) <= tol {
            pl.points.clone()
        } else if last.dist(spec.b) <= tol {
            pl.points.iter().rev().copied().collect()
        } else {
            continue;
        };
        let target = pts.iter().copied().find(|p| p.dist(spec.b) >= reach).unwrap_or(*pts.last().unwrap());
        let d = target.dist(spec.b);
        if best.is_none_or(|(bd, _)| d > bd) {
            best = Some((d, target));
        }
    }
    match best {
        Some((_, p)) => Ok((p - spec.b).unit()),
        None => Err(Error::InvalidInput(format!("no nodal line of phi_{k} ends at ({}, {})", spec.b.x, spec.b.y))),
    }
}

/// Sample grid used to compare eigenvectors across different meshes.
fn sample_grid(domain: &DomainSpec) -> Vec<Point> {
    let d = domain.diameter();
    let n = 48;
    let mut pts = vec![];
    for i in 0..n {
        for j in 0..n {
            let p = Point::new(-d + 2.0 * d * (i as f64 + 0.5) / n as f64, -d + 2.0 * d * (j as f64 + 0.5) / n as f64);
            if domain.contains(p) {
                pts.push(p);
            }
        }
    }
    pts
}

/// `|v|` of every computed eigenvector on the grid, normalised.
fn profiles(s: &PoleSolve, grid: &[Point]) -> Vec<Vec<f64>> {
    let loc = Locator::new(&s.mesh);
    (0..s.result.vectors.len())
        .map(|i| {
            let f = FemFunction::from_free(&s.problem.space, &s.result.vectors[i]);
            let mut v: Vec<f64> = grid.iter().map(|&p| f.eval(&loc, p).map_or(0.0, |x| x.0.abs())).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            v.iter_mut().for_each(|x| *x /= n);
            v
        })
        .collect()
}

/// A second cut: the ray from the pole rotated by a quarter turn from the default cut,
/// up to the boundary (domains are convex).
pub fn alternate_cut(domain: &DomainSpec, a: Point) -> Result<PoleConfig> {
    let default = PoleConfig::at(a).resolve(domain)?;
    let dir = (default[1] - default[0]).unit().perp();
    let (mut lo, mut hi) = (0.0, domain.diameter() * 2.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if domain.contains(a + dir * mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tip = domain.nearest_boundary(a + dir * hi).1;
    Ok(PoleConfig::with_cut(a, vec![tip]))
}

/// Run the sweep. Poles are solved concurrently and merged in order, so output does not
/// depend on the number of workers.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let dir = match &spec.path {
        PathSpec::Ray { x, y } => Point::new(*x, *y).unit(),
        PathSpec::NodalLine { k, reach } => nodal_direction(spec, *k, *reach)?,
    };
    let ts = spec.distances();
    let kmax = *spec.k_list.iter().max().unwrap();
    let count = kmax + 2;
    let coarse_policy = spec.richardson_factor.map(|f| {
        let mut p = spec.policy.clone();
        p.h_max *= f;
        p.pole_h_rel *= f;
        p
    });
    let job = |t: f64| -> (f64, Point, Result<(PoleSolve, Option<PoleSolve>)>) {
        let a = spec.b + dir * t;
        let pole = PoleConfig::at(a);
        let fine = solve_pole(spec, &spec.policy, &pole, count);
        let out = fine.and_then(|f| {
            let c = match &coarse_policy {
                Some(p) => Some(solve_pole(spec, p, &pole, count)?),
                None => None,
            };
            Ok((f, c))
        });
        (t, a, out)
    };
    let run = || ts.par_iter().map(|&t| job(t)).collect::<Vec<_>>();
    let solved = match thread_cap() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };

    let mut out = SweepOutcome::default();
    let mut ok: Vec<(f64, Point, PoleSolve, Option<PoleSolve>)> = vec![];
    for (t, a, r) in solved {
        match r {
            Ok((f, c)) => ok.push((t, a, f, c)),
            Err(e) => out.failures.push(SweepFailure { t, a, code: e.code().into(), message: e.to_string() }),
        }
    }
    // Track branches from the pole closest to b outwards.
    ok.sort_by(|x, y| x.0.total_cmp(&y.0));
    let grid = sample_grid(&spec.domain);
    let mut tracked: Vec<Vec<usize>> = Vec::with_capacity(ok.len());
    let mut prev: Option<Vec<Vec<f64>>> = None;
    for (_, _, f, _) in &ok {
        let prof = profiles(f, &grid);
        let idx: Vec<usize> = match (&prev, tracked.last()) {
            (Some(pp), Some(last)) => spec
                .k_list
                .iter()
                .zip(last)
                .map(|(_, &li)| {
                    (0..prof.len())
                        .max_by(|&x, &y| {
                            let cx: f64 = prof[x].iter().zip(&pp[li]).map(|(u, v)| u * v).sum();
                            let cy: f64 = prof[y].iter().zip(&pp[li]).map(|(u, v)| u * v).sum();
                            cx.total_cmp(&cy)
                        })
                        .unwrap()
                })
                .collect(),
            _ => spec.k_list.iter().map(|&k| k - 1).collect(),
        };
        tracked.push(idx);
        prev = Some(prof);
    }
    for (j, (t, a, f, c)) in ok.iter().enumerate() {
        for (ki, &k) in spec.k_list.iter().enumerate() {
            let i = tracked[j][ki];
            let lambda_a = f.result.lambdas[i];
            let lambda_ref = f.reference.lambdas[k - 1];
            let gap = lambda_a - lambda_ref;
            let gap_error = c.as_ref().map(|c| {
                let gc = c.result.lambdas[i] - c.reference.lambdas[k - 1];
                let r = spec.richardson_factor.unwrap();
                (gap - gc).abs() / (r * r - 1.0)
            });
            out.records.push(SweepRecord {
                t: *t,
                a: *a,
                k,
                lambda_a,
                lambda_ref,
                gap,
                index_a: i + 1,
                dofs: f.result.dofs,
                triangles: f.mesh.triangles.len(),
                residual: f.result.residuals[i],
                gap_error,
            });
        }
    }
    // Largest t first, as the distances were given.
    out.records.sort_by(|x, y| y.t.total_cmp(&x.t).then(x.k.cmp(&y.k)));
    if spec.gauge_check && !ok.is_empty() {
        let ends = if ok.len() > 1 { vec![ok.len() - 1, 0] } else { vec![0] };
        for j in ends {
            let (t, a, f, _) = &ok[j];
            let alt = alternate_cut(&spec.domain, *a)?;
            let mesh = build_mesh_with(&spec.domain, &spec.policy, Some(&alt))?;
            let mut opt = EigenOptions::new(count);
            opt.tol = spec.tol;
            let r = solve_eigs_with(&assemble(&mesh, &spec.weight, spec.order)?, &opt)?;
            let m = kmax.min(r.lambdas.len());
            let max_relative = (0..m)
                .map(|i| (r.lambdas[i] - f.result.lambdas[i]).abs() / f.result.lambdas[i])
                .fold(0.0, f64::max);
            out.gauge.push(GaugeCheck {
                t: *t,
                lambdas: f.result.lambdas[..m].to_vec(),
                lambdas_alt: r.lambdas[..m].to_vec(),
                max_relative,
            });
        }
    }
    Ok(out)
}
