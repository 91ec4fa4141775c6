//! The half-plane limit profile: the constant `β` of the quarter-plane minimisation,
//! the far-field coefficients of its minimiser and an evaluator of the profile.
//!
//! The minimiser `w` solves `Δw = 0` on the quarter plane `Q₁ = {x1 > 0, x2 > 0}` with
//! `w = 0` on `{x1 = 0}`, `w = -x1` on `Γ₁ = (0,1)×{0}` and a natural condition on
//! `{x2 = 0, x1 > 1}` (even reflection). The profile's real representative is `x1 + w`,
//! in the gauge whose cut is `Γ₁` and whose pole is `e = (1, 0)`.

use crate::abfem::{solve_local_dirichlet, FemFunction, LocalForm, LocalSolution};
use crate::error::{Error, Result};
use crate::geometry::{build_outline_mesh, Locator, Outline, SizeField, SizeSource};
use crate::point::Point;
use crate::quadrature::gauss_interval;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::sync::Arc;

/// Mesh parameters of a quarter-plane solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    /// Element size near the unit quarter disk.
    pub h: f64,
    /// Element size at the tip `(1, 0)`.
    pub h_tip: f64,
    pub dofs: usize,
    pub triangles: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BetaResult {
    /// Energy value, extrapolated in the truncation radius when `extrapolated`.
    pub beta: f64,
    /// `2∫₀¹ x1 ∂₂w(x1, 0) dx1`, from pointwise gradients, extrapolated alike.
    pub beta_flux: f64,
    pub truncation_radius: f64,
    pub extrapolated: bool,
    /// Energies at `R` and `2R`.
    pub beta_r: f64,
    pub beta_2r: f64,
    /// `|β(2R) - β(R)| / β`.
    pub stability: f64,
    pub discretization: Discretization,
    /// Minimiser on the quarter disk of radius `2R`.
    #[serde(skip)]
    pub w: Option<Arc<LocalSolution>>,
}

/// One quarter-disk solve.
pub struct QuarterSolve {
    pub radius: f64,
    pub energy: f64,
    pub flux: f64,
    pub solution: LocalSolution,
    pub discretization: Discretization,
}

/// Solve the truncated minimisation on the quarter disk of radius `radius`.
pub fn solve_quarter(radius: f64, h: f64) -> Result<QuarterSolve> {
    if !(radius > 1.0) || !(h > 0.0 && h < 0.5) {
        return Err(Error::InvalidInput(format!("need R > 1 and 0 < h < 0.5, got R = {radius}, h = {h}")));
    }
    let tip = Point::new(1.0, 0.0);
    let h_tip = h / 500.0;
    let size = SizeField {
        h_max: (radius / 8.0).max(h),
        grading: 1.0,
        graded_points: vec![],
        sources: vec![
            SizeSource { center: Point::ORIGIN, h_min: h, ratio: 0.2 },
            SizeSource { center: tip, h_min: h_tip, ratio: 0.2 },
        ],
    };
    let mesh = build_outline_mesh(&Outline::quarter_disk(radius, 1.0), &size, &[])?;
    let form = LocalForm { dirichlet_tags: Some(vec![0, 2, 3]), ..LocalForm::laplace() };
    let g = |p: Point| if p.y.abs() < 1e-12 && p.x <= 1.0 + 1e-12 { -p.x } else { 0.0 };
    let solution = solve_local_dirichlet(&mesh, &form, &g)?;
    let flux = gamma_flux(&solution);
    let discretization = Discretization {
        h,
        h_tip,
        dofs: solution.space.n_free,
        triangles: solution.space.mesh.triangles.len(),
    };
    Ok(QuarterSolve { radius, energy: solution.energy, flux, solution, discretization })
}

/// `∫_Γ₁ x1 ∂₂w dx1` with gradients taken inside the adjacent elements.
fn gamma_flux(sol: &LocalSolution) -> f64 {
    let mesh = &sol.space.mesh;
    let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            owner.insert((a.min(b), a.max(b)), t);
        }
    }
    let f = FemFunction { space: &sol.space, nodal: sol.nodal.clone() };
    let mut s = 0.0;
    for e in mesh.boundary_edges.iter().filter(|e| e.tag == 0) {
        let (a, b) = (e.v[0], e.v[1]);
        let t = owner[&(a.min(b), a.max(b))];
        let tri = mesh.triangle_points(t);
        let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
        for (s01, w) in gauss_interval(8, 0.0, 1.0) {
            let x = pa.lerp(pb, s01);
            let (_, g) = f.eval_in(t, crate::integrate::barycentric(tri, x));
            s += w * pa.dist(pb) * x.x * g.y;
        }
    }
    s
}

/// `β` from solves at `R` and `2R`, Richardson-extrapolated assuming an `R⁻²` truncation error.
pub fn compute_beta(radius: f64, h: f64) -> Result<BetaResult> {
    if radius < 4.0 {
        return Err(Error::InvalidInput(format!("truncation radius {radius} < 4")));
    }
    let s1 = solve_quarter(radius, h)?;
    let s2 = solve_quarter(2.0 * radius, h)?;
    let (b1, b2) = (2.0 * s1.energy, 2.0 * s2.energy);
    let (f1, f2) = (2.0 * s1.flux, 2.0 * s2.flux);
    let beta = (4.0 * b2 - b1) / 3.0;
    Ok(BetaResult {
        beta,
        beta_flux: (4.0 * f2 - f1) / 3.0,
        truncation_radius: radius,
        extrapolated: true,
        beta_r: b1,
        beta_2r: b2,
        stability: (b2 - b1).abs() / beta,
        discretization: s2.discretization,
        w: Some(Arc::new(s2.solution)),
    })
}

/// Far-field coefficients of `w`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Coefficients {
    pub rho: f64,
    /// `b_n` of `cos(nθ)/rⁿ` for odd `n`, at `ρ` and `1.5ρ`.
    pub odd: BTreeMap<u32, (f64, f64)>,
    /// Coefficients of `sin(nθ)/rⁿ` for even `n`; they vanish by symmetry.
    pub even: BTreeMap<u32, f64>,
    /// Relative disagreement between the two radii for `n ≤ 5`.
    pub max_disagreement: f64,
    pub flagged: bool,
}

impl Coefficients {
    pub fn b(&self, n: u32) -> Option<f64> {
        self.odd.get(&n).map(|c| c.0)
    }
}

/// Angular moments of `w` on the circle of radius `rho`, corrected for the homogeneous
/// condition at the truncation radius: `b_n = c_n(ρ) / (ρ⁻ⁿ - ρⁿ/R²ⁿ)`.
pub fn extract_coefficients(w: &LocalSolution, radius: f64, rho: f64, n_max: u32) -> Result<Coefficients> {
    if !(rho > 1.0 && 1.5 * rho < radius) {
        return Err(Error::InvalidInput(format!("need 1 < rho and 1.5 rho < R = {radius}, got rho = {rho}")));
    }
    let f = FemFunction { space: &w.space, nodal: w.nodal.clone() };
    let loc = Locator::new(&w.space.mesh);
    let m = 512;
    let moments = |r: f64, n: u32, odd: bool| -> Result<f64> {
        let mut s = 0.0;
        // Trapezoid on [-π/2, π/2]; the end values vanish.
        for j in 1..m {
            let th = -PI / 2.0 + PI * j as f64 / m as f64;
            let p = Point::polar(r, th);
            let v = f.eval(&loc, Point::new(p.x, p.y.abs()))?.0;
            s += v * if odd { (n as f64 * th).cos() } else { (n as f64 * th).sin() };
        }
        Ok(s * (PI / m as f64) * 2.0 / PI)
    };
    let corr = |r: f64, n: u32| r.powi(-(n as i32)) - r.powi(n as i32) / radius.powi(2 * n as i32);
    let mut odd = BTreeMap::new();
    let mut even = BTreeMap::new();
    let mut max_dis: f64 = 0.0;
    for n in 1..=n_max {
        if n % 2 == 1 {
            let b0 = moments(rho, n, true)? / corr(rho, n);
            let b1 = moments(1.5 * rho, n, true)? / corr(1.5 * rho, n);
            if n <= 5 {
                max_dis = max_dis.max((b0 - b1).abs() / b0.abs().max(1e-300));
            }
            odd.insert(n, (b0, b1));
        } else {
            even.insert(n, moments(rho, n, false)? / corr(rho, n));
        }
    }
    Ok(Coefficients { rho, odd, even, max_disagreement: max_dis, flagged: max_dis > 0.02 })
}

/// Persisted profile `{beta, b: {1: .., 3: .., ..}, R, h}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitProfile {
    pub beta: f64,
    /// Keys are the odd indices as strings; `b["1"] = -β/π`.
    pub b: BTreeMap<String, f64>,
    #[serde(rename = "R")]
    pub r: f64,
    pub h: f64,
    /// `b₁` as extracted from the computed field, for comparison with `-β/π`.
    #[serde(default)]
    pub b1_fitted: Option<f64>,
    #[serde(skip)]
    pub w: Option<Arc<LocalSolution>>,
}

impl LimitProfile {
    /// Solve, extract coefficients up to `n_max` at `ρ = 2` and assemble the profile.
    pub fn compute(radius: f64, h: f64, n_max: u32) -> Result<(LimitProfile, BetaResult, Coefficients)> {
        let beta = compute_beta(radius, h)?;
        let w = beta.w.clone().expect("compute_beta keeps the field");
        let coef = extract_coefficients(&w, 2.0 * radius, 2.0, n_max)?;
        let mut b = BTreeMap::new();
        b.insert("1".to_string(), -beta.beta / PI);
        for (&n, &(v, _)) in coef.odd.range(3..) {
            b.insert(n.to_string(), v);
        }
        let p = LimitProfile { beta: beta.beta, b, r: radius, h, b1_fitted: coef.b(1), w: Some(w) };
        Ok((p, beta, coef))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    fn coeffs(&self) -> Vec<(i32, f64)> {
        let mut v: Vec<(i32, f64)> = self.b.iter().filter_map(|(k, &x)| k.parse::<i32>().ok().map(|n| (n, x))).collect();
        v.sort_by_key(|c| c.0);
        v
    }

    /// Real representative `r cosθ + Σ b_n cos(nθ)/rⁿ` for `r > 1`, `|θ| ≤ π/2`.
    pub fn series(&self, r: f64, theta: f64) -> Result<f64> {
        if !(r > 1.0) {
            return Err(Error::InvalidInput(format!("series mode needs r > 1, got {r}")));
        }
        let mut s = r * theta.cos();
        for (n, b) in self.coeffs() {
            s += b * (n as f64 * theta).cos() / r.powi(n);
        }
        Ok(s)
    }

    /// Gradient of the series in Cartesian coordinates.
    pub fn series_gradient(&self, r: f64, theta: f64) -> Point {
        let (mut fr, mut ft) = (theta.cos(), -r * theta.sin());
        for (n, b) in self.coeffs() {
            let nf = n as f64;
            fr += -nf * b * (nf * theta).cos() / r.powi(n + 1);
            ft += -nf * b * (nf * theta).sin() / r.powi(n);
        }
        let er = Point::polar(1.0, theta);
        er * fr + er.perp() * (ft / r)
    }

    /// `H(x1 + w, K, 0)` from the series: `(π/2)(K + b₁/K)² + Σ_{n≥3} (π/2) b_n²/K²ⁿ`.
    pub fn h_at(&self, k: f64) -> f64 {
        let mut s = 0.0;
        for (n, b) in self.coeffs() {
            if n == 1 {
                s += PI / 2.0 * (k + b / k).powi(2);
            } else {
                s += PI / 2.0 * b * b / k.powi(2 * n);
            }
        }
        s
    }

    /// `E(x1 + w, K, 0) = (π/2)(K² - Σ n b_n²/K²ⁿ)`, from the boundary form.
    pub fn e_at(&self, k: f64) -> f64 {
        let mut s = k * k;
        for (n, b) in self.coeffs() {
            s -= n as f64 * b * b / k.powi(2 * n);
        }
        PI / 2.0 * s
    }

    /// Frequency `N(x1 + w, K, 0)` for `K > 1`.
    pub fn frequency(&self, k: f64) -> f64 {
        self.e_at(k) / self.h_at(k)
    }

    /// Constant making `H(C (x1 + w), K, 0) = 1`.
    pub fn c_norm(&self, k: f64) -> f64 {
        1.0 / self.h_at(k).sqrt()
    }

    pub fn evaluator(&self) -> ProfileEvaluator<'_> {
        ProfileEvaluator {
            profile: self,
            near: self.w.as_ref().map(|w| (FemFunction { space: &w.space, nodal: w.nodal.clone() }, Locator::new(&w.space.mesh))),
        }
    }
}

/// Evaluator of `x1 + w` on the right half-plane: the series for `r > r_switch`, the
/// computed field (reflected evenly in `x2`) inside.
pub struct ProfileEvaluator<'a> {
    pub profile: &'a LimitProfile,
    near: Option<(FemFunction<'a>, Locator<'a>)>,
}

impl ProfileEvaluator<'_> {
    /// Radius beyond which the series is used.
    pub const SWITCH: f64 = 2.0;

    /// Value and gradient of the real representative at `x` (`x1 ≥ 0`).
    pub fn eval(&self, x: Point) -> Result<(f64, Point)> {
        let r = x.norm();
        if r > Self::SWITCH || self.near.is_none() {
            let th = x.angle();
            return Ok((self.profile.series(r, th)?, self.profile.series_gradient(r, th)));
        }
        let (f, loc) = self.near.as_ref().unwrap();
        let q = Point::new(x.x, x.y.abs());
        let (v, g) = f.eval(loc, q)?;
        let g = if x.y < 0.0 { Point::new(g.x, -g.y) } else { g };
        Ok((q.x + v, Point::new(1.0 + g.x, g.y)))
    }

    /// Complex value `e^{iθ_e/2}(x1 + w)`, with `θ_e` the angle about `e = (1, 0)`
    /// on the branch whose cut is `Γ₁`.
    pub fn psi(&self, x: Point) -> Result<nalgebra::Complex<f64>> {
        let (v, _) = self.eval(x)?;
        let th = (x - Point::new(1.0, 0.0)).angle();
        Ok(nalgebra::Complex::from_polar(1.0, th / 2.0) * v)
    }
}
