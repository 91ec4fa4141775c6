use super::field::{AbField, Region};
use crate::error::{Error, Result};
use crate::point::Point;
use serde::{Deserialize, Serialize};

/// `E`, `H` and `N = E/H` on a family of half-disks (or disks) of common center.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FrequencyTrace {
    pub center: Point,
    pub half: bool,
    pub lambda: f64,
    pub pole: Option<Point>,
    pub radii: Vec<f64>,
    pub e: Vec<f64>,
    pub h: Vec<f64>,
    pub n: Vec<f64>,
}

/// Where the regions are centered.
#[derive(Clone, Copy, Debug, Default)]
pub enum TraceRegion {
    /// Half-disks about the projection `(0, a2)` of the pole onto the flat boundary.
    #[default]
    HalfDiskAtProjection,
    /// Half-disks about a given point of the flat boundary.
    HalfDisk(Point),
    /// Full disks about a given point.
    Disk(Point),
}

impl TraceRegion {
    fn region(self, pole: Option<Point>, r: f64) -> Region {
        match self {
            TraceRegion::HalfDiskAtProjection => {
                Region::half_disk(Point::new(0.0, pole.map_or(0.0, |a| a.y)), r)
            }
            TraceRegion::HalfDisk(c) => Region::half_disk(c, r),
            TraceRegion::Disk(c) => Region::disk(c, r),
        }
    }
}

const H_FLOOR: f64 = 1e-14;

/// Almgren quantities of `field` at each radius.
///
/// `E(r) = ∫ |∇f|² - λ p f²` over the region and `H(r) = r⁻¹ ∫ f²` over its arc.
pub fn frequency_trace(
    field: &AbField,
    lambda: f64,
    pole: Option<Point>,
    radii: &[f64],
    at: TraceRegion,
) -> Result<FrequencyTrace> {
    if radii.is_empty() {
        return Err(Error::InsufficientData("no radii".into()));
    }
    let mut tr = FrequencyTrace {
        center: at.region(pole, 1.0).center,
        half: at.region(pole, 1.0).half,
        lambda,
        pole,
        radii: radii.to_vec(),
        e: vec![],
        h: vec![],
        n: vec![],
    };
    for &r in radii {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidInput(format!("radius {r} is not positive")));
        }
        let reg = at.region(pole, r);
        if let Some(a) = pole {
            if a.dist(reg.center) >= r {
                return Err(Error::InvalidInput(format!("radius {r} does not enclose the pole")));
            }
        }
        field.check_region(&reg)?;
        let v = field.volume(&reg);
        let arc = field.arc(&reg);
        let e = v.grad2 - lambda * v.pf2;
        let h = arc.f2 / r;
        if h < H_FLOOR {
            return Err(Error::Inconclusive(format!("degenerate trace: H({r}) = {h:e}")));
        }
        tr.e.push(e);
        tr.h.push(h);
        tr.n.push(e / h);
    }
    Ok(tr)
}

impl FrequencyTrace {
    /// CSV with header `r,E,H,N`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,E,H,N\n");
        for i in 0..self.radii.len() {
            s += &format!("{:?},{:?},{:?},{:?}\n", self.radii[i], self.e[i], self.h[i], self.n[i]);
        }
        s
    }

    fn sorted(&self) -> Vec<(f64, f64, f64, f64)> {
        let mut v: Vec<_> = (0..self.radii.len()).map(|i| (self.radii[i], self.e[i], self.h[i], self.n[i])).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

/// Pointwise comparison of `dH/dr` (finite differences) with `2E/r`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DhReport {
    /// `(r, dH/dr, 2E/r, relative defect)` at interior radii.
    pub rows: Vec<(f64, f64, f64, f64)>,
    pub max_relative: f64,
}

/// Checks `H'(r) = 2E(r)/r` with a centered three-point derivative on the sorted radii.
pub fn check_dh_identity(trace: &FrequencyTrace) -> Result<DhReport> {
    let v = trace.sorted();
    if v.len() < 3 {
        return Err(Error::InsufficientData("need at least three radii".into()));
    }
    let mut rows = vec![];
    for i in 1..v.len() - 1 {
        let (r0, r1, r2) = (v[i - 1].0, v[i].0, v[i + 1].0);
        let (h0, h1, h2) = (v[i - 1].2, v[i].2, v[i + 1].2);
        let (a, b) = (r1 - r0, r2 - r1);
        let d = -b / (a * (a + b)) * h0 + (b - a) / (a * b) * h1 + a / (b * (a + b)) * h2;
        let rhs = 2.0 * v[i].1 / r1;
        let rel = (d - rhs).abs() / d.abs().max(rhs.abs()).max(1e-300);
        rows.push((r1, d, rhs, rel));
    }
    let max_relative = rows.iter().map(|r| r.3).fold(0.0, f64::max);
    Ok(DhReport { rows, max_relative })
}

/// Terms of the local Pohozaev identity on a half-disk about `c = (0, a2)`:
/// `(r/2)∫_arc(|∇f|² - 2(∂_ν f)² - λ p f²) + λ∫ f²(p + ∇p·(x-c)/2) + flat + M_a = 0`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PohozaevReport {
    pub r: f64,
    pub boundary: f64,
    pub volume: f64,
    pub flat: f64,
    pub ma: f64,
    pub defect: f64,
    /// `|defect|` relative to the largest term.
    pub residual: f64,
}

pub fn pohozaev_residual(field: &AbField, lambda: f64, pole: Point, r: f64, ma: f64) -> Result<PohozaevReport> {
    let reg = Region::half_disk(Point::new(0.0, pole.y), r);
    if pole.dist(reg.center) >= r {
        return Err(Error::InvalidInput(format!("radius {r} does not enclose the pole")));
    }
    field.check_region(&reg)?;
    let arc = field.arc(&reg);
    let vol = field.volume(&reg);
    let boundary = 0.5 * r * (arc.grad2 - 2.0 * arc.dnu2 - lambda * arc.pf2);
    let volume = lambda * vol.weighted;
    let flat = field.flat_term(&reg);
    let defect = boundary + volume + flat + ma;
    let scale = [boundary, volume, flat, ma].iter().map(|t| t.abs()).fold(0.0, f64::max).max(1e-300);
    Ok(PohozaevReport { r, boundary, volume, flat, ma, defect, residual: defect.abs() / scale })
}

/// Pole contribution to the Pohozaev identity from the leading pole coefficients.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MaEstimate {
    pub value: f64,
    pub a1: f64,
    pub h: u32,
    pub c1: f64,
    pub d1: f64,
}

impl MaEstimate {
    /// `a1 π (c1² - d1²)/4` at a simple pole (`h = 1`); zero for higher odd orders.
    pub fn from_coefficients(a1: f64, h: u32, c1: f64, d1: f64) -> Self {
        let value = if h == 1 { a1 * std::f64::consts::PI * (c1 * c1 - d1 * d1) / 4.0 } else { 0.0 };
        MaEstimate { value, a1, h, c1, d1 }
    }
}

/// Options for [`check_frequency_bounds`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BoundsOptions {
    /// Lower edge of the window is `k a1`.
    pub k: f64,
    /// Upper edge of the window.
    pub r_eps: f64,
    pub eps: f64,
    pub delta: f64,
    /// `‖p‖∞` over the window.
    pub p_sup: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundsReport {
    pub window: (f64, f64),
    pub n_min: f64,
    pub n_max: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
    pub doubling_ok: bool,
    pub growth_ok: bool,
    pub failures: Vec<String>,
}

impl BoundsReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks on the window `k a1 ≤ r ≤ r_eps`: `1 - δ ≤ N ≤ 1 + ε`, the doubling bound
/// `H(r2)/H(r1) ≤ (r2/r1)^{2(1+ε)}` and the growth bound
/// `H(r2)/H(r1) ≥ e^{-C r_eps²} (r2/r1)²` with `C = 4λ‖p‖∞`.
pub fn check_frequency_bounds(trace: &FrequencyTrace, opt: &BoundsOptions) -> Result<BoundsReport> {
    let a1 = trace.pole.map_or(0.0, |a| a.x);
    let lo = opt.k * a1;
    let v: Vec<_> = trace.sorted().into_iter().filter(|s| s.0 >= lo && s.0 <= opt.r_eps).collect();
    if v.is_empty() {
        return Err(Error::InsufficientData(format!("no radius in [{lo}, {}]", opt.r_eps)));
    }
    let n_min = v.iter().map(|s| s.3).fold(f64::INFINITY, f64::min);
    let n_max = v.iter().map(|s| s.3).fold(f64::NEG_INFINITY, f64::max);
    let mut failures = vec![];
    let upper_ok = n_max <= 1.0 + opt.eps;
    if !upper_ok {
        failures.push(format!("N reaches {n_max} > 1 + {}", opt.eps));
    }
    let lower_ok = n_min >= 1.0 - opt.delta;
    if !lower_ok {
        failures.push(format!("N drops to {n_min} < 1 - {}", opt.delta));
    }
    let c = 4.0 * trace.lambda * opt.p_sup;
    let mut doubling_ok = true;
    let mut growth_ok = true;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            let q = v[j].0 / v[i].0;
            let ratio = v[j].2 / v[i].2;
            if ratio > q.powf(2.0 * (1.0 + opt.eps)) * (1.0 + 1e-9) && doubling_ok {
                doubling_ok = false;
                failures.push(format!("doubling bound fails between r = {} and {}", v[i].0, v[j].0));
            }
            if ratio < (-c * opt.r_eps * opt.r_eps).exp() * q * q * (1.0 - 1e-9) && growth_ok {
                growth_ok = false;
                failures.push(format!("growth bound fails between r = {} and {}", v[i].0, v[j].0));
            }
        }
    }
    Ok(BoundsReport { window: (lo, opt.r_eps), n_min, n_max, upper_ok, lower_ok, doubling_ok, growth_ok, failures })
}

/// The two integral inequalities for functions vanishing on the flat side of a half-disk.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PoincareReport {
    /// `r⁻² ∫ f²`
    pub mass: f64,
    /// `r⁻¹ ∫_arc f²`
    pub h: f64,
    /// `∫ |∇f|²`
    pub dirichlet: f64,
}

impl PoincareReport {
    /// `r⁻²∫f² ≤ H + ∫|∇f|²`
    pub fn poincare_ok(&self) -> bool {
        self.mass <= (self.h + self.dirichlet) * (1.0 + 1e-8)
    }
    /// `H ≤ ∫|∇f|²`
    pub fn trace_ok(&self) -> bool {
        self.h <= self.dirichlet * (1.0 + 1e-8)
    }
}

pub fn poincare_check(field: &AbField, center: Point, r: f64) -> Result<PoincareReport> {
    let reg = Region::half_disk(center, r);
    field.check_region(&reg)?;
    let v = field.volume(&reg);
    let arc = field.arc(&reg);
    Ok(PoincareReport { mass: v.f2 / (r * r), h: arc.f2 / r, dirichlet: v.grad2 })
}
