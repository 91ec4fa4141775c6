//! Almgren frequency, Pohozaev identity and related integral bounds near a pole that
//! approaches the flat part of the boundary.

mod field;
mod trace;

pub use field::{AbField, ArcMoments, FieldFn, Region, VolumeMoments};
pub use trace::{
    check_dh_identity, check_frequency_bounds, frequency_trace, pohozaev_residual, poincare_check, BoundsOptions,
    BoundsReport, DhReport, FrequencyTrace, MaEstimate, PohozaevReport, PoincareReport, TraceRegion,
};

use crate::abfem::{EigenProblem, EigenResult, FemFunction};
use crate::error::{Error, Result};
use crate::point::Point;
use crate::spectral::{fem_vanishing_order, OrderOptions, PointKind};

/// Pole term of the Pohozaev identity for eigenvector `index`, from a harmonic fit of the
/// leading coefficients at the pole.
pub fn estimate_ma(problem: &EigenProblem, result: &EigenResult, index: usize) -> Result<MaEstimate> {
    let pole = problem.space.mesh.pole().ok_or_else(|| Error::InvalidInput("mesh carries no pole".into()))?;
    let v = result
        .vectors
        .get(index)
        .ok_or_else(|| Error::InvalidInput(format!("no eigenvector with index {index}")))?;
    let f = FemFunction::from_free(&problem.space, v);
    let ord = fem_vanishing_order(&f, pole, PointKind::Pole, &OrderOptions::default())?;
    Ok(MaEstimate::from_coefficients(pole.x, ord.h, ord.coeffs.0, ord.coeffs.1))
}

/// `∫ f²/|x - a|² / ∫ |∇f|²` over the mesh, skipping the triangles that touch the pole.
pub fn hardy_ratio(f: &FemFunction<'_>, pole: Point) -> f64 {
    let mesh = &f.space.mesh;
    let rule = crate::quadrature::TriangleRule::collapsed(4);
    let (mut num, mut den) = (0.0, 0.0);
    for t in 0..mesh.triangles.len() {
        let tri = mesh.triangle_points(t);
        let touches = tri.iter().any(|p| p.dist(pole) < 1e-12);
        for (x, l, w) in rule.on(tri) {
            let (v, g) = f.eval_in(t, l);
            den += w * g.norm2();
            if !touches {
                num += w * v * v / (x - pole).norm2();
            }
        }
    }
    num / den.max(1e-300)
}
