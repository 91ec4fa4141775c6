use crate::point::Point;
use nalgebra::Complex;
use std::f64::consts::PI;

/// Exact zero-energy solution `u = e^{iθ/2} r^{h/2} (c cos(hθ/2) + d sin(hθ/2))` around a
/// pole, with the angle measured from `a` on the branch `(cut_angle, cut_angle + 2π]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ManufacturedAb {
    pub h: u32,
    pub c: f64,
    pub d: f64,
    pub a: Point,
    pub cut_angle: f64,
}

/// Evaluator of the manufactured solution of order `h` (odd) at pole `a`.
pub fn manufactured_ab_solution(h: u32, c: f64, d: f64, a: Point) -> ManufacturedAb {
    assert!(h % 2 == 1, "vanishing order at a pole must be odd");
    ManufacturedAb { h, c, d, a, cut_angle: -PI }
}

impl ManufacturedAb {
    pub fn with_cut_angle(mut self, angle: f64) -> Self {
        self.cut_angle = angle;
        self
    }

    fn polar(&self, x: Point) -> (f64, f64) {
        let rel = x - self.a;
        let r = rel.norm();
        let mut th = rel.angle();
        while th <= self.cut_angle {
            th += 2.0 * PI;
        }
        while th > self.cut_angle + 2.0 * PI {
            th -= 2.0 * PI;
        }
        (r, th)
    }

    /// Real double-covering representative `f`, with `u = e^{iθ/2} f`.
    pub fn real_value(&self, x: Point) -> f64 {
        let (r, th) = self.polar(x);
        let k = self.h as f64 / 2.0;
        r.powf(k) * (self.c * (k * th).cos() + self.d * (k * th).sin())
    }

    pub fn real_gradient(&self, x: Point) -> Point {
        let (r, th) = self.polar(x);
        let k = self.h as f64 / 2.0;
        let fr = k * r.powf(k - 1.0) * (self.c * (k * th).cos() + self.d * (k * th).sin());
        let ft = k * r.powf(k - 1.0) * (-self.c * (k * th).sin() + self.d * (k * th).cos());
        let (er, et) = (Point::new(th.cos(), th.sin()), Point::new(-th.sin(), th.cos()));
        er * fr + et * ft
    }

    pub fn value(&self, x: Point) -> Complex<f64> {
        let (_, th) = self.polar(x);
        Complex::from_polar(1.0, th / 2.0) * self.real_value(x)
    }

    /// `(i∇ + A_a) u = i e^{iθ/2} ∇f` as two complex components.
    pub fn covariant_gradient(&self, x: Point) -> [Complex<f64>; 2] {
        let (_, th) = self.polar(x);
        let ph = Complex::from_polar(1.0, th / 2.0) * Complex::new(0.0, 1.0);
        let g = self.real_gradient(x);
        [ph * g.x, ph * g.y]
    }
}
