use crate::error::{Error, Result};
use crate::point::{segment_closest, Point};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// The supported planar domains.
///
/// Conventions: the disk and half-disk are centred at the origin, the half-disk
/// is `{|x| < R, x1 > 0}`, the sector has its vertex at the origin and is
/// symmetric about the positive `x1` axis, and the rectangle is
/// `(0, width) x (-height/2, height/2)` so that its left side lies on `x1 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DomainSpec {
    Disk { radius: f64 },
    Sector { angle: f64, radius: f64 },
    HalfDisk { radius: f64 },
    Rectangle { width: f64, height: f64 },
}

impl DomainSpec {
    pub fn disk(radius: f64) -> Self {
        DomainSpec::Disk { radius }
    }
    pub fn sector(angle: f64, radius: f64) -> Self {
        DomainSpec::Sector { angle, radius }
    }
    pub fn half_disk(radius: f64) -> Self {
        DomainSpec::HalfDisk { radius }
    }
    pub fn rectangle(width: f64, height: f64) -> Self {
        DomainSpec::Rectangle { width, height }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            DomainSpec::Disk { radius } | DomainSpec::HalfDisk { radius } => radius > 0.0,
            DomainSpec::Sector { angle, radius } => radius > 0.0 && angle > 0.0 && angle < PI,
            DomainSpec::Rectangle { width, height } => width > 0.0 && height > 0.0,
        };
        if ok && self.params().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::InvalidDomain(format!("{self:?}")))
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            DomainSpec::Disk { radius } | DomainSpec::HalfDisk { radius } => vec![radius],
            DomainSpec::Sector { angle, radius } => vec![angle, radius],
            DomainSpec::Rectangle { width, height } => vec![width, height],
        }
    }

    pub fn name(&self) -> String {
        match *self {
            DomainSpec::Disk { radius } => format!("disk(R={radius})"),
            DomainSpec::Sector { angle, radius } => format!("sector(alpha={angle},R={radius})"),
            DomainSpec::HalfDisk { radius } => format!("half_disk(R={radius})"),
            DomainSpec::Rectangle { width, height } => format!("rectangle({width}x{height})"),
        }
    }

    /// Open-set membership test.
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            DomainSpec::Disk { radius } => p.norm() < radius,
            DomainSpec::HalfDisk { radius } => p.x > 0.0 && p.norm() < radius,
            DomainSpec::Sector { angle, radius } => {
                p.norm() < radius && p.norm() > 0.0 && p.angle().abs() < angle / 2.0
            }
            DomainSpec::Rectangle { width, height } => {
                p.x > 0.0 && p.x < width && p.y.abs() < height / 2.0
            }
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            DomainSpec::Disk { radius } => 2.0 * radius,
            DomainSpec::HalfDisk { radius } => 2.0 * radius,
            DomainSpec::Sector { angle, radius } => radius.max(2.0 * radius * (angle / 2.0).sin()),
            DomainSpec::Rectangle { width, height } => width.hypot(height),
        }
    }

    pub fn outline(&self) -> Outline {
        let seg = |a: Point, b: Point, tag| Piece::Segment { a, b, tag };
        let pieces = match *self {
            DomainSpec::Disk { radius } => vec![Piece::Arc {
                center: Point::ORIGIN,
                radius,
                t0: -PI,
                t1: PI,
                tag: 0,
            }],
            DomainSpec::HalfDisk { radius } => vec![
                Piece::Arc { center: Point::ORIGIN, radius, t0: -PI / 2.0, t1: PI / 2.0, tag: 0 },
                seg(Point::new(0.0, radius), Point::new(0.0, -radius), 1),
            ],
            DomainSpec::Sector { angle, radius } => {
                let h = angle / 2.0;
                vec![
                    seg(Point::ORIGIN, Point::polar(radius, -h), 0),
                    Piece::Arc { center: Point::ORIGIN, radius, t0: -h, t1: h, tag: 1 },
                    seg(Point::polar(radius, h), Point::ORIGIN, 2),
                ]
            }
            DomainSpec::Rectangle { width, height } => {
                let (w, h) = (width, height / 2.0);
                vec![
                    seg(Point::new(0.0, -h), Point::new(w, -h), 0),
                    seg(Point::new(w, -h), Point::new(w, h), 1),
                    seg(Point::new(w, h), Point::new(0.0, h), 2),
                    seg(Point::new(0.0, h), Point::new(0.0, -h), 3),
                ]
            }
        };
        Outline { pieces }
    }

    /// Nearest point of the boundary and its distance.
    pub fn nearest_boundary(&self, p: Point) -> (f64, Point) {
        self.outline().nearest(p)
    }

    /// Whether `p` lies on a straight part of the boundary (within `tol`).
    pub fn on_flat_boundary(&self, p: Point, tol: f64) -> bool {
        self.outline()
            .pieces
            .iter()
            .any(|pc| matches!(pc, Piece::Segment { .. }) && pc.nearest(p).0 <= tol)
    }

    /// Corner points of the boundary (where two pieces meet at an angle).
    pub fn corners(&self) -> Vec<(Point, f64)> {
        match *self {
            DomainSpec::Disk { .. } => vec![],
            DomainSpec::HalfDisk { radius } => vec![
                (Point::new(0.0, radius), PI / 2.0),
                (Point::new(0.0, -radius), PI / 2.0),
            ],
            DomainSpec::Sector { angle, radius } => vec![
                (Point::ORIGIN, angle),
                (Point::polar(radius, angle / 2.0), PI / 2.0),
                (Point::polar(radius, -angle / 2.0), PI / 2.0),
            ],
            DomainSpec::Rectangle { width, height } => {
                let h = height / 2.0;
                [(0.0, -h), (width, -h), (width, h), (0.0, h)]
                    .iter()
                    .map(|&(x, y)| (Point::new(x, y), PI / 2.0))
                    .collect()
            }
        }
    }
}

/// One boundary piece of a closed counterclockwise outline.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Piece {
    Segment { a: Point, b: Point, tag: usize },
    /// Counterclockwise arc from angle `t0` to `t1 > t0`.
    Arc { center: Point, radius: f64, t0: f64, t1: f64, tag: usize },
}

impl Piece {
    pub fn tag(&self) -> usize {
        match *self {
            Piece::Segment { tag, .. } | Piece::Arc { tag, .. } => tag,
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { a, b, .. } => a.dist(b),
            Piece::Arc { radius, t0, t1, .. } => radius * (t1 - t0),
        }
    }

    /// Point at normalised parameter `s` in `[0, 1]`.
    pub fn at(&self, s: f64) -> Point {
        match *self {
            Piece::Segment { a, b, .. } => a.lerp(b, s),
            Piece::Arc { center, radius, t0, t1, .. } => center + Point::polar(radius, t0 + s * (t1 - t0)),
        }
    }

    pub fn start(&self) -> Point {
        self.at(0.0)
    }

    pub fn end(&self) -> Point {
        self.at(1.0)
    }

    /// Distance to the piece, closest point and its parameter.
    pub fn nearest_param(&self, p: Point) -> (f64, Point, f64) {
        match *self {
            Piece::Segment { a, b, .. } => {
                let (d, q) = segment_closest(p, a, b);
                let l = a.dist(b);
                (d, q, if l > 0.0 { a.dist(q) / l } else { 0.0 })
            }
            Piece::Arc { center, radius, t0, t1, .. } => {
                let rel = p - center;
                let mut th = rel.angle();
                while th < t0 {
                    th += 2.0 * PI;
                }
                while th > t0 + 2.0 * PI {
                    th -= 2.0 * PI;
                }
                if th <= t1 {
                    let q = center + Point::polar(radius, th);
                    (p.dist(q), q, (th - t0) / (t1 - t0))
                } else {
                    let (qa, qb) = (self.start(), self.end());
                    if p.dist(qa) <= p.dist(qb) {
                        (p.dist(qa), qa, 0.0)
                    } else {
                        (p.dist(qb), qb, 1.0)
                    }
                }
            }
        }
    }

    pub fn nearest(&self, p: Point) -> (f64, Point) {
        let (d, q, _) = self.nearest_param(p);
        (d, q)
    }

    /// Restriction to the parameter range `[s0, s1]`.
    pub fn sub(&self, s0: f64, s1: f64) -> Piece {
        match *self {
            Piece::Segment { tag, .. } => Piece::Segment { a: self.at(s0), b: self.at(s1), tag },
            Piece::Arc { center, radius, t0, t1, tag } => Piece::Arc {
                center,
                radius,
                t0: t0 + s0 * (t1 - t0),
                t1: t0 + s1 * (t1 - t0),
                tag,
            },
        }
    }
}

/// Closed counterclockwise boundary made of segments and arcs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outline {
    pub pieces: Vec<Piece>,
}

impl Outline {
    pub fn nearest(&self, p: Point) -> (f64, Point) {
        self.pieces
            .iter()
            .map(|pc| pc.nearest(p))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("outline has pieces")
    }

    /// The quarter disk `{x1 > 0, x2 > 0, |x| < R}` with the bottom side split at
    /// `x1 = split`. Tags: 0 bottom `[0, split]`, 1 bottom `[split, R]`, 2 arc, 3 left side.
    pub fn quarter_disk(radius: f64, split: f64) -> Outline {
        Outline {
            pieces: vec![
                Piece::Segment { a: Point::ORIGIN, b: Point::new(split, 0.0), tag: 0 },
                Piece::Segment { a: Point::new(split, 0.0), b: Point::new(radius, 0.0), tag: 1 },
                Piece::Arc { center: Point::ORIGIN, radius, t0: 0.0, t1: PI / 2.0, tag: 2 },
                Piece::Segment { a: Point::new(0.0, radius), b: Point::ORIGIN, tag: 3 },
            ],
        }
    }

    pub fn bbox(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for pc in &self.pieces {
            for k in 0..=64 {
                let q = pc.at(k as f64 / 64.0);
                lo = Point::new(lo.x.min(q.x), lo.y.min(q.y));
                hi = Point::new(hi.x.max(q.x), hi.y.max(q.y));
            }
        }
        (lo, hi)
    }
}
