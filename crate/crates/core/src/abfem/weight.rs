use crate::point::Point;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::Arc;

/// A user-supplied smooth positive weight.
pub trait WeightFn: Send + Sync {
    fn value(&self, x: Point) -> f64;
    fn gradient(&self, x: Point) -> Point;
}

/// The weight `p` in `-Δu = λ p u`.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weight {
    Constant { value: f64 },
    /// `c + g . x`
    Affine { c: f64, gx: f64, gy: f64 },
    /// `c + s |x - x0|^2`
    Quadratic { c: f64, s: f64, x0: f64, y0: f64 },
    #[serde(skip)]
    Custom(Arc<dyn WeightFn>),
}

impl Default for Weight {
    fn default() -> Self {
        Weight::Constant { value: 1.0 }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Constant { value } => write!(f, "Constant({value})"),
            Weight::Affine { c, gx, gy } => write!(f, "Affine({c}, {gx}, {gy})"),
            Weight::Quadratic { c, s, x0, y0 } => write!(f, "Quadratic({c}, {s}, {x0}, {y0})"),
            Weight::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl Weight {
    pub fn one() -> Self {
        Weight::Constant { value: 1.0 }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Weight::Constant { .. })
    }

    pub fn value(&self, x: Point) -> f64 {
        match self {
            Weight::Constant { value } => *value,
            Weight::Affine { c, gx, gy } => c + gx * x.x + gy * x.y,
            Weight::Quadratic { c, s, x0, y0 } => c + s * ((x.x - x0).powi(2) + (x.y - y0).powi(2)),
            Weight::Custom(w) => w.value(x),
        }
    }

    pub fn gradient(&self, x: Point) -> Point {
        match self {
            Weight::Constant { .. } => Point::ORIGIN,
            Weight::Affine { gx, gy, .. } => Point::new(*gx, *gy),
            Weight::Quadratic { s, x0, y0, .. } => Point::new(2.0 * s * (x.x - x0), 2.0 * s * (x.y - y0)),
            Weight::Custom(w) => w.gradient(x),
        }
    }

    /// Supremum of `|p|` over the given sample points.
    pub fn sup_over(&self, pts: &[Point]) -> f64 {
        match self {
            Weight::Constant { value } => value.abs(),
            _ => pts.iter().map(|&q| self.value(q).abs()).fold(0.0, f64::max),
        }
    }
}
