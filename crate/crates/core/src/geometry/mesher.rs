//! Graded constrained Delaunay meshing of outlines with an optional interior cut.

use super::domain::{Outline, Piece};
use crate::error::{Error, Result};
use crate::point::{orient, segment_closest, Point};
use serde::{Deserialize, Serialize};
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation as _,
};
use std::collections::HashMap;

/// Local refinement centred at a point: `h(x) <= h_min + ratio * |x - center|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeSource {
    pub center: Point,
    pub h_min: f64,
    pub ratio: f64,
}

/// Target element size as a function of position.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SizeField {
    pub h_max: f64,
    pub grading: f64,
    /// Points around which `h <= h_max * max(d, h_max^grading)^(1 - 1/grading)`.
    pub graded_points: Vec<Point>,
    pub sources: Vec<SizeSource>,
}

impl SizeField {
    pub fn uniform(h_max: f64) -> Self {
        SizeField { h_max, grading: 1.0, graded_points: vec![], sources: vec![] }
    }

    pub fn at(&self, p: Point) -> f64 {
        let mut h = self.h_max;
        if self.grading > 1.0 {
            let floor = self.h_max.powf(self.grading);
            let expo = 1.0 - 1.0 / self.grading;
            for c in &self.graded_points {
                h = h.min(self.h_max * p.dist(*c).max(floor).powf(expo));
            }
        }
        for s in &self.sources {
            h = h.min(s.h_min + s.ratio * p.dist(s.center));
        }
        h
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub tag: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct Triangulation {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Vertex indices along the cut, from the pole to the boundary.
    pub cut_chain: Vec<usize>,
}

const MAX_VERTICES: usize = 2_000_000;

fn key(p: Point) -> (u64, u64) {
    (p.x.to_bits(), p.y.to_bits())
}

/// Points along `piece` with spacing following the size field, excluding the end point.
fn discretize(piece: &Piece, size: &SizeField, min_arc_segments: f64, bulge_outward: bool) -> Vec<Point> {
    let len = piece.length();
    let mut cum = vec![0.0];
    let mut ss = vec![0.0];
    let mut s = 0.0;
    while s < 1.0 {
        let h = size.at(piece.at(s));
        let ds = (0.05 * h / len).min(1.0 - s).max(1e-9);
        let mid = size.at(piece.at(s + ds / 2.0));
        s += ds;
        cum.push(cum.last().unwrap() + ds * len / mid);
        ss.push(s.min(1.0));
    }
    let total = *cum.last().unwrap();
    let mut n = total.round().max(1.0);
    if let Piece::Arc { t0, t1, .. } = piece {
        n = n.max(((t1 - t0) / min_arc_segments).ceil());
    }
    let n = n as usize;
    // Slanted straight sides get an outward bulge of relative size 1e-9 so that their
    // vertices are strictly convex in floating point; otherwise rounding produces
    // zero-area triangles between consecutive boundary vertices.
    let bulge = match *piece {
        Piece::Segment { a, b, .. } if bulge_outward && a.x != b.x && a.y != b.y => {
            let d = b - a;
            Point::new(d.y, -d.x) * 4e-9
        }
        _ => Point::ORIGIN,
    };
    let mut out = vec![piece.start()];
    let mut j = 0;
    for k in 1..n {
        let target = total * k as f64 / n as f64;
        while cum[j + 1] < target {
            j += 1;
        }
        let f = (target - cum[j]) / (cum[j + 1] - cum[j]);
        let s = ss[j] + f * (ss[j + 1] - ss[j]);
        out.push(piece.at(s) + bulge * (s * (1.0 - s)));
    }
    out
}

fn point_in_polygon(p: Point, poly: &[Point]) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
            inside = !inside;
        }
        j = i;
    }
    inside
}

/// Split the outline pieces at the given boundary points.
fn split_outline(outline: &Outline, forced: &[Point], tol: f64) -> Vec<Piece> {
    let mut out = Vec::new();
    for pc in &outline.pieces {
        let mut cuts: Vec<f64> = forced
            .iter()
            .filter_map(|&f| {
                let (d, _, s) = pc.nearest_param(f);
                (d <= tol && s > 1e-9 && s < 1.0 - 1e-9).then_some(s)
            })
            .collect();
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut s0 = 0.0;
        for s in cuts.into_iter().chain(std::iter::once(1.0)) {
            let mut sub = pc.sub(s0, s);
            // Snap the end points of straight pieces onto the requested points exactly.
            if let Piece::Segment { a, b, tag } = sub {
                let snap = |q: Point| forced.iter().copied().find(|f| f.dist(q) <= tol).unwrap_or(q);
                sub = Piece::Segment { a: snap(a), b: snap(b), tag };
            }
            out.push(sub);
            s0 = s;
        }
    }
    out
}

/// Build a conforming triangulation of `outline`. The optional `cut` polyline starts at
/// an interior point and ends on the boundary; its vertices are kept as mesh vertices
/// and its segments as mesh edges.
pub(crate) fn triangulate(
    outline: &Outline,
    size: &SizeField,
    cut: Option<&[Point]>,
    forced: &[Point],
) -> Result<Triangulation> {
    let (lo, hi) = outline.bbox();
    let scale = (hi - lo).norm();
    let tol = 1e-10 * scale;
    let mut forced: Vec<Point> = forced.to_vec();
    if let Some(c) = cut {
        forced.push(*c.last().unwrap());
    }
    let pieces = split_outline(outline, &forced, tol);
    let mut loop_pts: Vec<Point> = Vec::new();
    for pc in &pieces {
        loop_pts.extend(discretize(pc, size, std::f64::consts::PI / 24.0, true));
    }
    let mut pts: Vec<Point> = loop_pts.clone();
    let nb = pts.len();
    let mut edges: Vec<[usize; 2]> = (0..nb).map(|i| [i, (i + 1) % nb]).collect();

    let mut cut_pts: Vec<Point> = Vec::new();
    if let Some(c) = cut {
        for w in c.windows(2) {
            let seg = Piece::Segment { a: w[0], b: w[1], tag: usize::MAX };
            cut_pts.extend(discretize(&seg, size, 1.0, false));
        }
        let tip = *c.last().unwrap();
        let tip_idx = loop_pts
            .iter()
            .position(|q| q.dist(tip) <= tol)
            .ok_or_else(|| Error::Mesh("cut does not end on a boundary vertex".into()))?;
        let first = pts.len();
        pts.extend(cut_pts.iter().copied());
        for i in first..pts.len() - 1 {
            edges.push([i, i + 1]);
        }
        edges.push([pts.len() - 1, tip_idx]);
        cut_pts.push(loop_pts[tip_idx]);
    }

    let clearance = |p: Point| -> f64 {
        let mut d = outline.nearest(p).0;
        if let Some(c) = cut {
            for w in c.windows(2) {
                d = d.min(segment_closest(p, w[0], w[1]).0);
            }
        }
        d
    };

    // Quadtree seeding of interior points.
    let side = (hi.x - lo.x).max(hi.y - lo.y) * 1.001;
    let mut stack = vec![(Point::new(lo.x + side / 2.0, lo.y + side / 2.0), side)];
    while let Some((c, s)) = stack.pop() {
        let h = size.at(c);
        let reach = s * std::f64::consts::FRAC_1_SQRT_2;
        let dc = clearance(c);
        let inside = point_in_polygon(c, &loop_pts);
        if !inside && dc > reach {
            continue;
        }
        if s > h {
            let q = s / 4.0;
            for (dx, dy) in [(-q, -q), (q, -q), (-q, q), (q, q)] {
                stack.push((Point::new(c.x + dx, c.y + dy), s / 2.0));
            }
            if stack.len() > MAX_VERTICES {
                return Err(Error::Mesh("size field requests too many vertices".into()));
            }
        } else if inside && dc >= 0.55 * h {
            pts.push(c);
        }
    }

    let verts: Vec<Point2<f64>> = pts.iter().map(|p| Point2::new(p.x, p.y)).collect();
    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::bulk_load_cdt(verts, edges)
            .map_err(|e| Error::Mesh(format!("triangulation failed: {e:?}")))?;
    let h_floor = pts
        .iter()
        .map(|&p| size.at(p))
        .fold(f64::INFINITY, f64::min);
    cdt.refine(
        RefinementParameters::<f64>::new()
            .with_angle_limit(AngleLimit::from_deg(28.0))
            .with_min_required_area(0.05 * h_floor * h_floor)
            .keep_constraint_edges()
            .with_max_additional_vertices(pts.len() / 2 + 1000),
    );

    let vertices: Vec<Point> = cdt
        .vertices()
        .map(|v| {
            let p = v.position();
            Point::new(p.x, p.y)
        })
        .collect();
    let mut triangles = Vec::new();
    for f in cdt.inner_faces() {
        let vs = f.vertices();
        let ids = [vs[0].fix().index(), vs[1].fix().index(), vs[2].fix().index()];
        let (a, b, c) = (vertices[ids[0]], vertices[ids[1]], vertices[ids[2]]);
        let centroid = (a + b + c) * (1.0 / 3.0);
        if !point_in_polygon(centroid, &loop_pts) {
            continue;
        }
        if orient(a, b, c) > 0.0 {
            triangles.push(ids);
        } else {
            triangles.push([ids[0], ids[2], ids[1]]);
        }
    }

    // Drop vertices that ended up outside the kept triangles.
    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    for t in triangles.iter_mut() {
        for v in t.iter_mut() {
            if remap[*v] == usize::MAX {
                remap[*v] = kept.len();
                kept.push(vertices[*v]);
            }
            *v = remap[*v];
        }
    }
    let vertices = kept;

    let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            *edge_count.entry((i.min(j), i.max(j))).or_default() += 1;
        }
    }
    let mut boundary_edges = Vec::new();
    for t in &triangles {
        for k in 0..3 {
            let (i, j) = (t[k], t[(k + 1) % 3]);
            if edge_count[&(i.min(j), i.max(j))] == 1 {
                let mid = vertices[i].lerp(vertices[j], 0.5);
                let tag = pieces
                    .iter()
                    .min_by(|p, q| p.nearest(mid).0.total_cmp(&q.nearest(mid).0))
                    .map(|p| p.tag())
                    .unwrap();
                boundary_edges.push(BoundaryEdge { v: [i, j], tag });
            }
        }
    }

    let index: HashMap<(u64, u64), usize> =
        vertices.iter().enumerate().map(|(i, p)| (key(*p), i)).collect();
    let mut cut_chain = Vec::new();
    for p in &cut_pts {
        let i = index
            .get(&key(*p))
            .copied()
            .ok_or_else(|| Error::Mesh("cut vertex lost during triangulation".into()))?;
        cut_chain.push(i);
    }
    for w in cut_chain.windows(2) {
        if !edge_count.contains_key(&(w[0].min(w[1]), w[0].max(w[1]))) {
            return Err(Error::Mesh("cut segment is not a mesh edge".into()));
        }
    }
    Ok(Triangulation { vertices, triangles, boundary_edges, cut_chain })
}
