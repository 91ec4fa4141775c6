use super::domain::{DomainSpec, Outline};
use super::mesher::{triangulate, BoundaryEdge, SizeField, SizeSource};
use crate::error::{Error, Result};
use crate::point::{orient, Point};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Meshing parameters shared by every mesh of a family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MeshPolicy {
    pub h_max: f64,
    pub grading: f64,
    /// Element size growth rate away from the pole.
    pub pole_ratio: f64,
    /// Element size at the pole relative to the pole's distance from the boundary.
    pub pole_h_rel: f64,
    /// Boundary points that must be mesh vertices.
    pub forced: Vec<Point>,
    /// Additional local refinement.
    pub sources: Vec<SizeSource>,
}

impl Default for MeshPolicy {
    fn default() -> Self {
        MeshPolicy::new(0.05, 2.0)
    }
}

impl MeshPolicy {
    pub fn new(h_max: f64, grading: f64) -> Self {
        MeshPolicy {
            h_max,
            grading,
            pole_ratio: 0.25,
            pole_h_rel: 0.02,
            forced: vec![],
            sources: vec![],
        }
    }
}

/// Position of the pole and the cut used to represent the double covering.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoleConfig {
    pub position: Point,
    /// Polyline vertices after the pole, the last one on the boundary.
    /// `None` selects the straight segment to the nearest boundary point.
    #[serde(default)]
    pub cut: Option<Vec<Point>>,
}

impl PoleConfig {
    pub fn at(position: Point) -> Self {
        PoleConfig { position, cut: None }
    }

    pub fn with_cut(position: Point, cut: Vec<Point>) -> Self {
        PoleConfig { position, cut: Some(cut) }
    }

    /// Full cut polyline from the pole to the boundary.
    pub fn resolve(&self, domain: &DomainSpec) -> Result<Vec<Point>> {
        let a = self.position;
        if !a.is_finite() || !domain.contains(a) {
            return Err(Error::PoleOutside(format!("({}, {}) in {}", a.x, a.y, domain.name())));
        }
        let mut path = vec![a];
        match &self.cut {
            None => path.push(domain.nearest_boundary(a).1),
            Some(c) => path.extend(c.iter().copied()),
        }
        let scale = domain.diameter();
        let tip = *path.last().unwrap();
        if path.len() < 2 || domain.nearest_boundary(tip).0 > 1e-9 * scale {
            return Err(Error::InvalidCut("cut must end on the boundary".into()));
        }
        for w in path.windows(2) {
            if w[0].dist(w[1]) <= 1e-12 * scale {
                return Err(Error::InvalidCut("repeated cut vertex".into()));
            }
            for k in 1..64 {
                let q = w[0].lerp(w[1], k as f64 / 64.0);
                if !domain.contains(q) && !(w[1] == tip && k == 63 && domain.nearest_boundary(q).0 < 1e-6) {
                    return Err(Error::InvalidCut("cut leaves the domain".into()));
                }
            }
        }
        for i in 0..path.len() - 1 {
            for j in i + 2..path.len() - 1 {
                if segments_cross(path[i], path[i + 1], path[j], path[j + 1]) {
                    return Err(Error::InvalidCut("cut intersects itself".into()));
                }
            }
        }
        Ok(path)
    }
}

fn segments_cross(a: Point, b: Point, c: Point, d: Point) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshRecipe {
    pub domain: DomainSpec,
    pub policy: MeshPolicy,
    pub pole: Option<PoleConfig>,
}

/// Triangle mesh, optionally carrying a cut along which vertices are duplicated.
///
/// Vertices strictly inside the cut have a master copy (used by triangles on the
/// right of the cut, looking from the pole) and a slave copy (used on the left).
#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub cut_pairs: Vec<(usize, usize)>,
    pub pole_vertex: Option<usize>,
    /// Boundary vertex where the cut ends.
    pub cut_tip: Option<usize>,
    pub h_max: f64,
    pub grading: f64,
    pub recipe: Option<MeshRecipe>,
}

/// Mesh of `domain` without a pole.
pub fn build_mesh(domain: &DomainSpec, h_max: f64, grading: f64) -> Result<Mesh> {
    build_mesh_with(domain, &MeshPolicy::new(h_max, grading), None)
}

/// Mesh of `domain`, with the cut of `pole` built into the triangulation when given.
pub fn build_mesh_with(domain: &DomainSpec, policy: &MeshPolicy, pole: Option<&PoleConfig>) -> Result<Mesh> {
    domain.validate()?;
    if !(policy.h_max > 0.0 && policy.h_max.is_finite()) || !(policy.grading >= 1.0) {
        return Err(Error::InvalidInput("h_max must be positive and grading >= 1".into()));
    }
    let mut size = SizeField {
        h_max: policy.h_max,
        grading: policy.grading,
        graded_points: vec![],
        sources: policy.sources.clone(),
    };
    let path = match pole {
        Some(pc) => {
            let path = pc.resolve(domain)?;
            let a = path[0];
            let t = domain.nearest_boundary(a).0;
            size.graded_points.push(a);
            let h_floor = policy.h_max.powf(policy.grading).min(policy.pole_h_rel * t);
            size.sources.push(SizeSource { center: a, h_min: h_floor, ratio: policy.pole_ratio });
            Some(path)
        }
        None => None,
    };
    let tri = triangulate(&domain.outline(), &size, path.as_deref(), &policy.forced)?;
    let mut mesh = Mesh {
        vertices: tri.vertices,
        triangles: tri.triangles,
        boundary_edges: tri.boundary_edges,
        cut_pairs: vec![],
        pole_vertex: None,
        cut_tip: None,
        h_max: policy.h_max,
        grading: policy.grading,
        recipe: Some(MeshRecipe { domain: *domain, policy: policy.clone(), pole: pole.cloned() }),
    };
    if pole.is_some() {
        mesh.split_along(&tri.cut_chain);
    }
    Ok(mesh)
}

/// Mesh of an arbitrary outline with boundary tags taken from its pieces (no pole, no recipe).
pub fn build_outline_mesh(outline: &Outline, size: &SizeField, forced: &[Point]) -> Result<Mesh> {
    if !(size.h_max > 0.0 && size.h_max.is_finite()) {
        return Err(Error::InvalidInput("h_max must be positive".into()));
    }
    let tri = triangulate(outline, size, None, forced)?;
    Ok(Mesh {
        vertices: tri.vertices,
        triangles: tri.triangles,
        boundary_edges: tri.boundary_edges,
        cut_pairs: vec![],
        pole_vertex: None,
        cut_tip: None,
        h_max: size.h_max,
        grading: size.grading,
        recipe: None,
    })
}

/// Regenerate `mesh` with the pole inserted as a vertex and the cut built in.
///
/// Inserting the pole that the mesh already carries returns an identical mesh.
pub fn insert_cut(mesh: &Mesh, pole: &PoleConfig) -> Result<Mesh> {
    let recipe = mesh
        .recipe
        .as_ref()
        .ok_or_else(|| Error::InvalidInput("mesh has no generating recipe".into()))?;
    if recipe.pole.as_ref() == Some(pole) {
        return Ok(mesh.clone());
    }
    build_mesh_with(&recipe.domain, &recipe.policy, Some(pole))
}

impl Mesh {
    /// Build a mesh from raw arrays (boundary edges are recomputed and tagged 0).
    pub fn from_parts(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        cut_pairs: Vec<(usize, usize)>,
        pole_vertex: Option<usize>,
    ) -> Result<Mesh> {
        let mut mesh = Mesh {
            vertices,
            triangles,
            boundary_edges: vec![],
            cut_pairs,
            pole_vertex,
            cut_tip: None,
            h_max: 0.0,
            grading: 1.0,
            recipe: None,
        };
        mesh.check_indices()?;
        mesh.boundary_edges = mesh.compute_boundary_edges();
        mesh.h_max = mesh.max_edge_length();
        if !mesh.cut_pairs.is_empty() {
            mesh.cut_tip = mesh.find_cut_tip();
        }
        Ok(mesh)
    }

    fn check_indices(&self) -> Result<()> {
        let n = self.vertices.len();
        if self.triangles.iter().flatten().any(|&v| v >= n)
            || self.cut_pairs.iter().any(|&(m, s)| m >= n || s >= n || m == s)
            || self.pole_vertex.is_some_and(|p| p >= n)
        {
            return Err(Error::Parse("index out of range".into()));
        }
        if self.vertices.iter().any(|p| !p.is_finite()) {
            return Err(Error::Parse("non-finite coordinate".into()));
        }
        Ok(())
    }

    /// Duplicate the interior vertices of `chain` (pole first, boundary tip last).
    fn split_along(&mut self, chain: &[usize]) {
        let n0 = self.vertices.len();
        let mut vertex_tris: Vec<Vec<usize>> = vec![vec![]; n0];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                vertex_tris[v].push(t);
            }
        }
        for k in 1..chain.len() - 1 {
            let v = chain[k];
            let pv = self.vertices[v];
            let dn = self.vertices[chain[k + 1]] - pv;
            let dp = self.vertices[chain[k - 1]] - pv;
            let ccw = |d: Point| -> f64 {
                let a = d.angle() - dn.angle();
                a.rem_euclid(2.0 * PI)
            };
            let limit = ccw(dp);
            let slave = self.vertices.len();
            self.vertices.push(pv);
            self.cut_pairs.push((v, slave));
            for &t in &vertex_tris[v] {
                let tri = self.triangles[t];
                let g = (self.vertices[tri[0]] + self.vertices[tri[1]] + self.vertices[tri[2]]) * (1.0 / 3.0);
                if ccw(g - pv) < limit {
                    for w in self.triangles[t].iter_mut() {
                        if *w == v {
                            *w = slave;
                        }
                    }
                }
            }
        }
        self.pole_vertex = Some(chain[0]);
        self.cut_tip = Some(*chain.last().unwrap());
    }

    /// Same triangulation with the cut removed and the pole treated as an ordinary vertex.
    pub fn without_cut(&self) -> Mesh {
        if self.cut_pairs.is_empty() && self.pole_vertex.is_none() {
            return self.clone();
        }
        let master = self.master_map();
        let mut keep: Vec<bool> = vec![true; self.vertices.len()];
        for &(_, s) in &self.cut_pairs {
            keep[s] = false;
        }
        let mut new_index = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for (i, p) in self.vertices.iter().enumerate() {
            if keep[i] {
                new_index[i] = vertices.len();
                vertices.push(*p);
            }
        }
        let remap = |v: usize| new_index[master[v]];
        let triangles = self.triangles.iter().map(|t| [remap(t[0]), remap(t[1]), remap(t[2])]).collect();
        let boundary_edges = self
            .boundary_edges
            .iter()
            .map(|e| BoundaryEdge { v: [remap(e.v[0]), remap(e.v[1])], tag: e.tag })
            .collect();
        let recipe = self.recipe.clone().map(|mut r| {
            r.pole = None;
            r
        });
        Mesh {
            vertices,
            triangles,
            boundary_edges,
            cut_pairs: vec![],
            pole_vertex: None,
            cut_tip: None,
            h_max: self.h_max,
            grading: self.grading,
            recipe,
        }
    }

    /// Maps every vertex to its master copy.
    pub fn master_map(&self) -> Vec<usize> {
        let mut m: Vec<usize> = (0..self.vertices.len()).collect();
        for &(a, s) in &self.cut_pairs {
            m[s] = a;
        }
        m
    }

    pub fn pole(&self) -> Option<Point> {
        self.pole_vertex.map(|i| self.vertices[i])
    }

    pub fn domain(&self) -> Option<DomainSpec> {
        self.recipe.as_ref().map(|r| r.domain)
    }

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * orient(a, b, c)
    }

    fn compute_boundary_edges(&self) -> Vec<BoundaryEdge> {
        let master = self.master_map();
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (i, j) = (master[t[k]], master[t[(k + 1) % 3]]);
                *count.entry((i.min(j), i.max(j))).or_default() += 1;
            }
        }
        let mut out = Vec::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (i, j) = (t[k], t[(k + 1) % 3]);
                let (mi, mj) = (master[i], master[j]);
                if count[&(mi.min(mj), mi.max(mj))] == 1 {
                    out.push(BoundaryEdge { v: [i, j], tag: 0 });
                }
            }
        }
        out
    }

    fn find_cut_tip(&self) -> Option<usize> {
        let bset = self.boundary_vertex_flags();
        let mut edges = std::collections::HashSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                edges.insert((t[k], t[(k + 1) % 3]));
                edges.insert((t[(k + 1) % 3], t[k]));
            }
        }
        // The tip is the boundary vertex joined by an edge to both copies of a cut vertex.
        for &(m, s) in &self.cut_pairs {
            for v in 0..self.vertices.len() {
                if bset[v] && edges.contains(&(m, v)) && edges.contains(&(s, v)) && Some(v) != self.pole_vertex {
                    return Some(v);
                }
            }
        }
        None
    }

    pub fn boundary_vertex_flags(&self) -> Vec<bool> {
        let mut f = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            f[e.v[0]] = true;
            f[e.v[1]] = true;
        }
        f
    }

    pub fn max_edge_length(&self) -> f64 {
        let mut h: f64 = 0.0;
        for t in 0..self.triangles.len() {
            let p = self.triangle_points(t);
            for k in 0..3 {
                h = h.max(p[k].dist(p[(k + 1) % 3]));
            }
        }
        h
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut m = 180.0f64;
        for t in 0..self.triangles.len() {
            let p = self.triangle_points(t);
            for k in 0..3 {
                let (a, b, c) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let u = b - a;
                let v = c - a;
                let ang = u.cross(v).abs().atan2(u.dot(v));
                m = m.min(ang.to_degrees());
            }
        }
        m
    }

    /// Largest edge length among triangles touching the vertex closest to `p`.
    pub fn local_size(&self, p: Point) -> f64 {
        let v = (0..self.vertices.len())
            .min_by(|&i, &j| self.vertices[i].dist(p).total_cmp(&self.vertices[j].dist(p)))
            .unwrap_or(0);
        let master = self.master_map();
        let mut h: f64 = 0.0;
        for (t, tri) in self.triangles.iter().enumerate() {
            if tri.iter().any(|&w| master[w] == master[v]) {
                let q = self.triangle_points(t);
                for k in 0..3 {
                    h = h.max(q[k].dist(q[(k + 1) % 3]));
                }
            }
        }
        h
    }

    /// Structural checks: positive orientation, index ranges, consistent cut.
    pub fn validate(&self) -> Result<()> {
        self.check_indices()?;
        for t in 0..self.triangles.len() {
            if self.area(t) <= 0.0 {
                return Err(Error::Mesh(format!("triangle {t} is not positively oriented")));
            }
        }
        for &(m, s) in &self.cut_pairs {
            if self.vertices[m] != self.vertices[s] {
                return Err(Error::Mesh("cut pair with distinct coordinates".into()));
            }
        }
        if let Some(p) = self.pole_vertex {
            if self.cut_pairs.iter().any(|&(m, s)| m == p || s == p) {
                return Err(Error::Mesh("pole vertex is duplicated".into()));
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("abmesh v1\n");
        s += &format!("{}\n", self.vertices.len());
        for p in &self.vertices {
            s += &format!("{:?} {:?}\n", p.x, p.y);
        }
        s += &format!("{}\n", self.triangles.len());
        for t in &self.triangles {
            s += &format!("{} {} {}\n", t[0], t[1], t[2]);
        }
        s += &format!("{}\n", self.cut_pairs.len());
        for (m, sl) in &self.cut_pairs {
            s += &format!("{m} {sl}\n");
        }
        match self.pole_vertex {
            Some(p) => s += &format!("{p}\n"),
            None => s += "-1\n",
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Mesh> {
        let bad = |m: &str| Error::Parse(m.to_string());
        let text_lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if text_lines.first() != Some(&"abmesh v1") {
            return Err(bad("missing header"));
        }
        let text_lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        let mut it = text_lines.into_iter().skip(1);
        let mut next = |what: &str| it.next().ok_or_else(|| bad(&format!("unexpected end in {what}")));
        let num = |s: &str| -> Result<usize> { s.parse::<usize>().map_err(|_| bad(&format!("bad integer '{s}'"))) };
        let nv = num(next("vertices")?)?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let l = next("vertices")?;
            let f: Vec<f64> = l
                .split_whitespace()
                .map(|x| x.parse::<f64>().map_err(|_| bad(&format!("bad coordinate '{x}'"))))
                .collect::<Result<_>>()?;
            if f.len() != 2 {
                return Err(bad("vertex row needs two coordinates"));
            }
            vertices.push(Point::new(f[0], f[1]));
        }
        let nt = num(next("triangles")?)?;
        let mut triangles = Vec::with_capacity(nt);
        for _ in 0..nt {
            let f: Vec<usize> = next("triangles")?.split_whitespace().map(num).collect::<Result<_>>()?;
            if f.len() != 3 {
                return Err(bad("triangle row needs three indices"));
            }
            triangles.push([f[0], f[1], f[2]]);
        }
        let nc = num(next("cut pairs")?)?;
        let mut cut_pairs = Vec::with_capacity(nc);
        for _ in 0..nc {
            let f: Vec<usize> = next("cut pairs")?.split_whitespace().map(num).collect::<Result<_>>()?;
            if f.len() != 2 {
                return Err(bad("cut row needs two indices"));
            }
            cut_pairs.push((f[0], f[1]));
        }
        let pole_line = next("pole")?;
        let pole_vertex = if pole_line == "-1" { None } else { Some(num(pole_line)?) };
        if it.next().is_some() {
            return Err(bad("trailing content"));
        }
        Mesh::from_parts(vertices, triangles, cut_pairs, pole_vertex)
    }
}

/// Bucket grid for locating the triangle that contains a point.
pub struct Locator<'a> {
    mesh: &'a Mesh,
    lo: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in &mesh.vertices {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let area = ((hi.x - lo.x) * (hi.y - lo.y)).max(1e-300);
        let n = (mesh.triangles.len().max(1) as f64 / 2.0).max(1.0);
        let cell = (area / n).sqrt().max(1e-12);
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        let mut buckets = vec![vec![]; nx * ny];
        for t in 0..mesh.triangles.len() {
            let p = mesh.triangle_points(t);
            let x0 = p.iter().map(|q| q.x).fold(f64::INFINITY, f64::min);
            let x1 = p.iter().map(|q| q.x).fold(f64::NEG_INFINITY, f64::max);
            let y0 = p.iter().map(|q| q.y).fold(f64::INFINITY, f64::min);
            let y1 = p.iter().map(|q| q.y).fold(f64::NEG_INFINITY, f64::max);
            let (i0, j0) = Self::cell_of(lo, cell, nx, ny, Point::new(x0, y0));
            let (i1, j1) = Self::cell_of(lo, cell, nx, ny, Point::new(x1, y1));
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(t);
                }
            }
        }
        Locator { mesh, lo, cell, nx, ny, buckets }
    }

    fn cell_of(lo: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let i = ((p.x - lo.x) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let j = ((p.y - lo.y) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (i, j)
    }

    /// Containing triangle and barycentric coordinates, with a small tolerance.
    pub fn locate(&self, p: Point) -> Option<(usize, [f64; 3])> {
        let (i, j) = Self::cell_of(self.lo, self.cell, self.nx, self.ny, p);
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.buckets[j * self.nx + i] {
            let [a, b, c] = self.mesh.triangle_points(t);
            let d = orient(a, b, c);
            let l = [orient(p, b, c) / d, orient(a, p, c) / d, orient(a, b, p) / d];
            let m = l[0].min(l[1]).min(l[2]);
            if m >= 0.0 {
                return Some((t, l));
            }
            if best.as_ref().is_none_or(|bb| m > bb.2) {
                best = Some((t, l, m));
            }
        }
        match best {
            Some((t, l, m)) if m > -1e-9 => Some((t, l)),
            _ => None,
        }
    }
}
