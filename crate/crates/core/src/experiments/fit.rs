use super::sweep::SweepRecord;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapSign {
    Above,
    Below,
}

/// Least-squares fit of `log|gap| = log C + p log t`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RateFit {
    pub k: usize,
    pub exponent: f64,
    /// `C` with `|gap| ≈ C t^p`.
    pub constant: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub sign: GapSign,
    pub points: usize,
    /// `r² ≥ 0.98`.
    pub conclusive: bool,
}

pub const CONCLUSIVE_R2: f64 = 0.98;

/// Fit the gaps of eigenvalue `k` with `t` in `[window.0, window.1]`.
pub fn fit_rate(records: &[SweepRecord], k: usize, window: (f64, f64)) -> Result<RateFit> {
    let tol = 1e-12 * window.1.abs().max(1.0);
    let sel: Vec<&SweepRecord> =
        records.iter().filter(|r| r.k == k && r.t >= window.0 - tol && r.t <= window.1 + tol).collect();
    if sel.len() < 5 {
        return Err(Error::InsufficientData(format!("{} records for k = {k} in the window, need 5", sel.len())));
    }
    let pos = sel.iter().filter(|r| r.gap > 0.0).count();
    let neg = sel.iter().filter(|r| r.gap < 0.0).count();
    if pos != sel.len() && neg != sel.len() {
        return Err(Error::Inconclusive("sign change".into()));
    }
    let pts: Vec<(f64, f64)> = sel.iter().map(|r| (r.t.ln(), r.gap.abs().ln())).collect();
    let (slope, intercept, r2) = least_squares(&pts);
    Ok(RateFit {
        k,
        exponent: slope,
        constant: intercept.exp(),
        r_squared: r2,
        window,
        sign: if pos > 0 { GapSign::Above } else { GapSign::Below },
        points: sel.len(),
        conclusive: r2 >= CONCLUSIVE_R2,
    })
}

/// Slope, intercept and `r²` of the regression of `y` on `x`.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r2)
}
