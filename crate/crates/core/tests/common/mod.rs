#![allow(dead_code)]

use nalgebra::Complex;

/// `J_ν(x)` up to the positive factor `Γ(ν+1)⁻¹`, from the power series.
/// Zeros are unaffected by the missing factor.
pub fn bessel_j_scaled(nu: f64, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powf(nu);
    let mut sum = term;
    for m in 1..200 {
        term *= -q / (m as f64 * (m as f64 + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && m as f64 > 0.5 * x {
            break;
        }
    }
    sum
}

/// The `m`-th positive zero of `J_ν` by scanning for a sign change and bisecting.
pub fn bessel_zero(nu: f64, m: usize) -> f64 {
    let step = 1e-2;
    let mut a = 1e-3;
    let mut fa = bessel_j_scaled(nu, a);
    let mut found = 0;
    loop {
        let b = a + step;
        let fb = bessel_j_scaled(nu, b);
        if fa * fb < 0.0 {
            found += 1;
            if found == m {
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    let fm = bessel_j_scaled(nu, mid);
                    if fm * flo <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
        assert!(a < 60.0, "zero not found");
    }
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Closed form of the half-plane profile: `x1 + w = Re √(z² - 1)` with the branch
/// `√(z² - 1) ~ z` at infinity. Returns value and gradient.
pub fn profile_closed_form(x: f64, y: f64) -> (f64, (f64, f64)) {
    let z = Complex::new(x, y);
    let s = z * (Complex::new(1.0, 0.0) - (z * z).inv()).sqrt();
    // d/dz √(z²-1) = z / √(z²-1); for a holomorphic F, ∇Re F = (Re F', -Im F').
    let d = z / s;
    (s.re, (d.re, -d.im))
}

/// Far-field coefficients of the closed form: `Re √(z²-1) = Re z + Σ b_{2j-1} Re z^{1-2j}`,
/// `b_{2j-1} = (-1)^j binom(1/2, j)`.
pub fn profile_coefficient(n: u32) -> f64 {
    assert!(n % 2 == 1);
    let j = n.div_ceil(2);
    let mut c = 1.0;
    for i in 1..=j {
        c *= (i as f64 - 1.5) / i as f64;
    }
    c
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let lx: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|p| p.1.abs().ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
