use crate::abfem::{assemble, solve_eigs, EigenProblem, EigenResult, FemFunction};
use crate::almgren::{AbField, Region};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::limit_profile::LimitProfile;
use crate::point::Point;
use crate::spectral::{fem_vanishing_order, OrderOptions, PointKind};
use serde::{Deserialize, Serialize};

/// Distance between a rescaled eigenfunction and the limit profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlowupReport {
    pub a1: f64,
    /// Radius `K` of the comparison half-disk in blown-up coordinates.
    pub k_radius: f64,
    /// `H(φ, K a1, π(a))`.
    pub h: f64,
    /// `H / (K a1)²`.
    pub h_scaled: f64,
    pub l2_relative: f64,
    pub h1_relative: f64,
    /// Sign relating the eigenfunction to the profile.
    pub sign: f64,
    pub c_norm: f64,
    /// `h` of the reference eigenfunction at `π(a)` (zero of order `h/2`).
    pub boundary_h: u32,
}

/// Radius of the disk about `e = (1, 0)` left out of the comparison.
pub const EXCLUDED_RADIUS: f64 = 0.1;

/// Rescale eigenvector `index` about `π(a) = (0, a2)` by `a1` and compare it with the
/// normalised profile on `D_K⁺(0) \ D_0.1(e)`.
pub fn blowup_compare(
    problem: &EigenProblem,
    result: &EigenResult,
    index: usize,
    profile: &LimitProfile,
    k_radius: f64,
) -> Result<BlowupReport> {
    let mesh = &problem.space.mesh;
    let domain = mesh.recipe.as_ref().map(|r| r.domain);
    if !matches!(domain, Some(DomainSpec::HalfDisk { .. }) | Some(DomainSpec::Rectangle { .. })) {
        return Err(Error::InvalidInput("blow-up needs a domain whose flat side is {x1 = 0}".into()));
    }
    let a = mesh.pole().ok_or_else(|| Error::InvalidInput("mesh carries no pole".into()))?;
    let b = Point::new(0.0, a.y);
    let a1 = a.x;
    // Order of the limit eigenfunction at b, from the same mesh without the pole.
    let plain = assemble(&mesh.without_cut(), &problem.weight, problem.space.order)?;
    let refr = solve_eigs(&plain, index + 1, 1e-9)?;
    let f0 = FemFunction::from_free(&plain.space, &refr.vectors[index]);
    let ord = fem_vanishing_order(&f0, b, PointKind::Boundary, &OrderOptions::default())?;
    if ord.h > 2 {
        return Err(Error::InvalidInput(format!(
            "the eigenfunction vanishes to order {} at b; the profile describes simple zeros only",
            ord.h / 2
        )));
    }

    let field = AbField::from_eigen(problem, result, index)?;
    let reg = Region::half_disk(b, k_radius * a1);
    field.check_region(&reg)?;
    let h = field.arc(&reg).f2 / reg.r;
    let scale = 1.0 / h.sqrt();
    let c_norm = profile.c_norm(k_radius);
    let ev = profile.evaluator();
    let e = Point::new(1.0, 0.0);
    let (mut pg, mut gg, mut dgg) = (0.0, 0.0, 0.0);
    let mut samples = vec![];
    let mut err = None;
    field.for_each_volume_point(&reg, |x, f, g, w| {
        let y = (x - b) * (1.0 / a1);
        if y.dist(e) < EXCLUDED_RADIUS || err.is_some() {
            return;
        }
        match ev.eval(y) {
            Ok((pv, pgr)) => {
                let (gv, ggr) = (c_norm * pv, pgr * c_norm);
                let (psi, dpsi) = (f * scale, g * (a1 * scale));
                let wy = w / (a1 * a1);
                pg += wy * psi * gv;
                gg += wy * gv * gv;
                dgg += wy * ggr.norm2();
                samples.push((wy, psi, dpsi, gv, ggr));
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let sign = if pg >= 0.0 { 1.0 } else { -1.0 };
    let (mut d0, mut d1) = (0.0, 0.0);
    for (w, psi, dpsi, gv, ggr) in samples {
        d0 += w * (psi - sign * gv).powi(2);
        d1 += w * (dpsi - ggr * sign).norm2();
    }
    Ok(BlowupReport {
        a1,
        k_radius,
        h,
        h_scaled: h / (k_radius * a1).powi(2),
        l2_relative: (d0 / gg).sqrt(),
        h1_relative: (d1 / dgg).sqrt(),
        sign,
        c_norm,
        boundary_h: ord.h,
    })
}
