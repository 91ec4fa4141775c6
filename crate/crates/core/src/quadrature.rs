//! Gauss rules on intervals and triangles.

use crate::point::Point;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    (x, w)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_interval(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    x.iter().zip(&w).map(|(xi, wi)| (m + h * xi, h * wi)).collect()
}

/// Collapsed tensor Gauss rule on the reference triangle `{(s, t): s, t >= 0, s + t <= 1}`,
/// exact for polynomials of degree `2n - 2`. Returns `(barycentric, weight)` with weights
/// summing to 1 (the rule integrates the mean value).
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<([f64; 3], f64)>,
}

impl TriangleRule {
    pub fn collapsed(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        for i in 0..n {
            let u = (x[i] + 1.0) / 2.0;
            for j in 0..n {
                let v = (x[j] + 1.0) / 2.0;
                let s = u;
                let t = v * (1.0 - u);
                let weight = w[i] * w[j] * (1.0 - u) / 2.0;
                points.push(([1.0 - s - t, s, t], weight));
            }
        }
        TriangleRule { points }
    }

    /// Physical points and weights (weights sum to the triangle area).
    pub fn on(&self, tri: [Point; 3]) -> impl Iterator<Item = (Point, [f64; 3], f64)> + '_ {
        let area = 0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).abs();
        self.points.iter().map(move |&(l, w)| {
            let p = tri[0] * l[0] + tri[1] * l[1] + tri[2] * l[2];
            (p, l, w * area)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for d in 0..2 * n {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn triangle_rule_moments() {
        // Integral of s^a t^b over the reference triangle is a! b! / (a + b + 2)!.
        let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
        for n in 1..6 {
            let r = TriangleRule::collapsed(n);
            for a in 0..=(2 * n - 2) as u32 {
                for b in 0..=(2 * n - 2) as u32 - a {
                    let q: f64 = r
                        .points
                        .iter()
                        .map(|(l, w)| w * 0.5 * l[1].powi(a as i32) * l[2].powi(b as i32))
                        .sum();
                    let exact = fact(a) * fact(b) / fact(a + b + 2);
                    assert!((q - exact).abs() < 1e-14, "n={n} a={a} b={b}");
                }
            }
        }
    }
}
