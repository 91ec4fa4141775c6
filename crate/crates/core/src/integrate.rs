//! Quadrature over the intersection of a triangle with a disk (optionally cut by a
//! vertical half-plane), used for integrals over half-disks of finite element fields.

use crate::point::{orient, Point};
use crate::quadrature::{gauss_interval, TriangleRule};
use std::f64::consts::PI;

/// Convex region bounded by straight edges and circular arcs.
///
/// `arc[i]` tells whether the boundary from `vertices[i]` to `vertices[i + 1]` runs along
/// the circle (counterclockwise) instead of a straight edge.
#[derive(Clone, Debug, Default)]
pub struct ClipRegion {
    pub vertices: Vec<Point>,
    pub arc: Vec<bool>,
}

/// Clip a convex counterclockwise polygon by the half-plane `x1 >= x0`.
pub fn clip_half_plane(poly: &[Point], x0: f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let (ip, iq) = (p.x >= x0, q.x >= x0);
        if ip {
            out.push(p);
        }
        if ip != iq {
            let t = (x0 - p.x) / (q.x - p.x);
            out.push(Point::new(x0, p.y + t * (q.y - p.y)));
        }
    }
    out
}

fn inside_convex(poly: &[Point], p: Point, tol: f64) -> bool {
    let n = poly.len();
    (0..n).all(|i| orient(poly[i], poly[(i + 1) % n], p) >= -tol)
}

/// Intersection of a convex counterclockwise polygon with the closed disk `D_r(c)`.
pub fn clip_disk(poly: &[Point], c: Point, r: f64) -> ClipRegion {
    let n = poly.len();
    if n < 3 {
        return ClipRegion::default();
    }
    let r2 = r * r;
    let strictly_in = |p: Point| (p - c).norm2() < r2 * (1.0 - 1e-12);
    let mut pts: Vec<Point> = Vec::new();
    for i in 0..n {
        let (p, q) = (poly[i], poly[(i + 1) % n]);
        let d = q - p;
        let f = p - c;
        let a = d.norm2();
        if a == 0.0 {
            continue;
        }
        let b = f.dot(d);
        let cc = f.norm2() - r2;
        let disc = b * b - a * cc;
        if disc <= 0.0 {
            continue;
        }
        let sq = disc.sqrt();
        let (t_in, t_out) = ((-b - sq) / a, (-b + sq) / a);
        let s0 = t_in.max(0.0);
        let s1 = t_out.min(1.0);
        if s1 - s0 <= 1e-14 {
            continue;
        }
        pts.push(if strictly_in(p) { p } else { p + d * s0 });
        if !strictly_in(q) {
            pts.push(p + d * s1);
        }
    }
    // Drop near duplicates (consecutive and wrap-around).
    let scale = r.max(1e-300);
    let mut v: Vec<Point> = Vec::with_capacity(pts.len());
    for p in pts {
        if v.last().is_none_or(|l: &Point| l.dist(p) > 1e-13 * scale) {
            v.push(p);
        }
    }
    while v.len() > 1 && v[0].dist(*v.last().unwrap()) <= 1e-13 * scale {
        v.pop();
    }
    if v.is_empty() {
        // Either disjoint or the disk lies inside the polygon.
        let inside = inside_convex(poly, c, 0.0)
            && (0..n).all(|i| {
                let (a, b) = (poly[i], poly[(i + 1) % n]);
                orient(a, b, c) / a.dist(b) >= r
            });
        if !inside {
            return ClipRegion::default();
        }
        let m = 8;
        return ClipRegion {
            vertices: (0..m).map(|k| c + Point::polar(r, 2.0 * PI * k as f64 / m as f64)).collect(),
            arc: vec![true; m],
        };
    }
    if v.len() == 1 {
        return ClipRegion::default();
    }
    let tol = 1e-12 * scale * scale;
    let on_circle = |p: Point| ((p - c).norm() - r).abs() <= 1e-9 * scale;
    let m = v.len();
    let mut arc = vec![false; m];
    for i in 0..m {
        let (p, q) = (v[i], v[(i + 1) % m]);
        if on_circle(p) && on_circle(q) {
            let t0 = (p - c).angle();
            let mut dt = ((q - c).angle() - t0).rem_euclid(2.0 * PI);
            if dt == 0.0 {
                dt = 2.0 * PI;
            }
            let mid = c + Point::polar(r, t0 + dt / 2.0);
            arc[i] = inside_convex(poly, mid, tol) && !on_segment_of(poly, mid, 1e-9 * scale);
        }
    }
    // Subdivide long arcs so every circular segment spans at most a quarter turn.
    let mut vertices = Vec::with_capacity(m);
    let mut flags = Vec::with_capacity(m);
    for i in 0..m {
        vertices.push(v[i]);
        flags.push(arc[i]);
        if arc[i] {
            let (p, q) = (v[i], v[(i + 1) % m]);
            let t0 = (p - c).angle();
            let mut dt = ((q - c).angle() - t0).rem_euclid(2.0 * PI);
            if dt == 0.0 {
                dt = 2.0 * PI;
            }
            let pieces = (dt / (PI / 4.0)).ceil() as usize;
            for k in 1..pieces {
                vertices.push(c + Point::polar(r, t0 + dt * k as f64 / pieces as f64));
                flags.push(true);
            }
        }
    }
    ClipRegion { vertices, arc: flags }
}

fn on_segment_of(poly: &[Point], p: Point, tol: f64) -> bool {
    let n = poly.len();
    (0..n).any(|i| crate::point::segment_closest(p, poly[i], poly[(i + 1) % n]).0 <= tol)
}

/// Quadrature resolution for clipped regions.
#[derive(Clone, Copy, Debug)]
pub struct ClipRule {
    pub triangle: usize,
    pub theta: usize,
    pub rho: usize,
}

impl Default for ClipRule {
    fn default() -> Self {
        ClipRule { triangle: 5, theta: 10, rho: 6 }
    }
}

impl ClipRegion {
    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 2
    }

    /// Area quadrature points `(x, weight)` for the region cut from the disk `D_r(c)`.
    pub fn area_points(&self, c: Point, r: f64, rule: ClipRule, out: &mut Vec<(Point, f64)>) {
        let v = &self.vertices;
        let m = v.len();
        if m < 2 {
            return;
        }
        if m >= 3 {
            let tr = TriangleRule::collapsed(rule.triangle);
            for i in 1..m - 1 {
                let tri = [v[0], v[i], v[i + 1]];
                if orient(tri[0], tri[1], tri[2]) <= 0.0 {
                    continue;
                }
                for (x, _, w) in tr.on(tri) {
                    out.push((x, w));
                }
            }
        }
        for i in 0..m {
            if !self.arc[i] {
                continue;
            }
            let (p, q) = (v[i], v[(i + 1) % m]);
            let t0 = (p - c).angle();
            let dt = ((q - c).angle() - t0).rem_euclid(2.0 * PI);
            let half = dt / 2.0;
            let d = r * half.cos();
            let tm = t0 + half;
            for (th, wt) in gauss_interval(rule.theta, t0, t0 + dt) {
                let rc = d / (th - tm).cos();
                for (rho, wr) in gauss_interval(rule.rho, rc, r) {
                    out.push((c + Point::polar(rho, th), wt * wr * rho));
                }
            }
        }
    }

    /// Quadrature points `(x, outward normal, ds weight)` on the arcs of the region.
    pub fn arc_points(&self, c: Point, r: f64, n: usize, out: &mut Vec<(Point, Point, f64)>) {
        let v = &self.vertices;
        let m = v.len();
        for i in 0..m {
            if !self.arc[i] {
                continue;
            }
            let (p, q) = (v[i], v[(i + 1) % m]);
            let t0 = (p - c).angle();
            let dt = ((q - c).angle() - t0).rem_euclid(2.0 * PI);
            for (th, w) in gauss_interval(n, t0, t0 + dt) {
                let nu = Point::polar(1.0, th);
                out.push((c + nu * r, nu, w * r));
            }
        }
    }
}

/// Barycentric coordinates of `p` in triangle `tri`.
pub fn barycentric(tri: [Point; 3], p: Point) -> [f64; 3] {
    let d = orient(tri[0], tri[1], tri[2]);
    [orient(p, tri[1], tri[2]) / d, orient(tri[0], p, tri[2]) / d, orient(tri[0], tri[1], p) / d]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn area(reg: &ClipRegion, c: Point, r: f64) -> f64 {
        let mut pts = vec![];
        reg.area_points(c, r, ClipRule::default(), &mut pts);
        pts.iter().map(|p| p.1).sum()
    }

    #[test]
    fn disk_inside_triangle() {
        let tri = [Point::new(-10.0, -10.0), Point::new(10.0, -10.0), Point::new(0.0, 10.0)];
        let reg = clip_disk(&tri, Point::new(0.0, -1.0), 0.5);
        assert!((area(&reg, Point::new(0.0, -1.0), 0.5) - PI * 0.25).abs() < 1e-12);
    }

    #[test]
    fn triangle_inside_disk() {
        let tri = [Point::new(0.0, 0.0), Point::new(0.1, 0.0), Point::new(0.0, 0.1)];
        let reg = clip_disk(&tri, Point::ORIGIN, 1.0);
        assert!(reg.arc.iter().all(|a| !a));
        assert!((area(&reg, Point::ORIGIN, 1.0) - 0.005).abs() < 1e-15);
    }

    #[test]
    fn quarter_disk_from_square() {
        let sq = [Point::new(0.0, 0.0), Point::new(2.0, 0.0), Point::new(2.0, 2.0), Point::new(0.0, 2.0)];
        let reg = clip_disk(&sq, Point::ORIGIN, 1.0);
        assert!((area(&reg, Point::ORIGIN, 1.0) - PI / 4.0).abs() < 1e-12);
        let mut arc = vec![];
        reg.arc_points(Point::ORIGIN, 1.0, 8, &mut arc);
        let len: f64 = arc.iter().map(|a| a.2).sum();
        assert!((len - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn chord_cut_segment() {
        // Square whose corner pokes into the disk only through one edge.
        let sq = [Point::new(0.5, -2.0), Point::new(3.0, -2.0), Point::new(3.0, 2.0), Point::new(0.5, 2.0)];
        let reg = clip_disk(&sq, Point::ORIGIN, 1.0);
        let h = 0.5f64;
        let exact = (h).acos() - h * (1.0 - h * h).sqrt();
        assert!((area(&reg, Point::ORIGIN, 1.0) - exact).abs() < 1e-12);
    }

    #[test]
    fn half_plane_half_disk() {
        let big = [Point::new(-3.0, -3.0), Point::new(3.0, -3.0), Point::new(3.0, 3.0), Point::new(-3.0, 3.0)];
        let poly = clip_half_plane(&big, 0.0);
        let reg = clip_disk(&poly, Point::new(0.0, 0.3), 1.2);
        assert!((area(&reg, Point::new(0.0, 0.3), 1.2) - PI * 0.72).abs() < 1e-12);
    }
}
