use crate::error::{Error, Result};
use crate::geometry::{Locator, Mesh};
use crate::point::Point;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Lagrange element order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    P1,
    #[default]
    P2,
}

impl TryFrom<u8> for Order {
    type Error = String;
    fn try_from(v: u8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Order::P1),
            2 => Ok(Order::P2),
            _ => Err(format!("unsupported element order {v}")),
        }
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        match o {
            Order::P1 => 1,
            Order::P2 => 2,
        }
    }
}

impl Order {
    pub fn local_nodes(self) -> usize {
        match self {
            Order::P1 => 3,
            Order::P2 => 6,
        }
    }
}

/// Where a node's value comes from: a free unknown, a prescribed value, and a sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slot {
    Free(usize, f64),
    Fixed(usize, f64),
}

/// Nodal finite element space on a mesh, with Dirichlet elimination and the sign-flip
/// identification of duplicated cut nodes.
#[derive(Clone, Debug)]
pub struct FeSpace {
    pub mesh: Mesh,
    pub order: Order,
    /// Node ids per triangle: vertices, then midpoints of edges 01, 12, 20.
    pub elem_nodes: Vec<[usize; 6]>,
    pub node_pos: Vec<Point>,
    pub slots: Vec<Slot>,
    pub n_free: usize,
    /// Node id of each prescribed value.
    pub fixed_nodes: Vec<usize>,
}

impl FeSpace {
    /// Space with homogeneous Dirichlet conditions on the whole boundary.
    pub fn new(mesh: &Mesh, order: Order) -> FeSpace {
        FeSpace::with_dirichlet(mesh, order, &|_| true)
    }

    /// Space where boundary edges whose tag satisfies `dirichlet` carry prescribed values.
    pub fn with_dirichlet(mesh: &Mesh, order: Order, dirichlet: &dyn Fn(usize) -> bool) -> FeSpace {
        let master = mesh.master_map();
        let mut node_pos = mesh.vertices.clone();
        let mut edge_node: HashMap<(usize, usize), usize> = HashMap::new();
        let mut elem_nodes = Vec::with_capacity(mesh.triangles.len());
        for t in &mesh.triangles {
            let mut nodes = [t[0], t[1], t[2], 0, 0, 0];
            if order == Order::P2 {
                for k in 0..3 {
                    let (i, j) = (t[k], t[(k + 1) % 3]);
                    let key = (i.min(j), i.max(j));
                    let id = *edge_node.entry(key).or_insert_with(|| {
                        node_pos.push(mesh.vertices[i].lerp(mesh.vertices[j], 0.5));
                        node_pos.len() - 1
                    });
                    nodes[3 + k] = id;
                }
            }
            elem_nodes.push(nodes);
        }
        let n_nodes = node_pos.len();
        let mut fixed = vec![false; n_nodes];
        for e in &mesh.boundary_edges {
            if dirichlet(e.tag) {
                fixed[e.v[0]] = true;
                fixed[e.v[1]] = true;
                let key = (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]));
                if let Some(&id) = edge_node.get(&key) {
                    fixed[id] = true;
                }
            }
        }
        if let Some(p) = mesh.pole_vertex {
            fixed[p] = true;
        }
        // Image of each node on the master side of the cut.
        let mut image: Vec<Option<usize>> = vec![None; n_nodes];
        for &(m, s) in &mesh.cut_pairs {
            image[s] = Some(m);
        }
        if order == Order::P2 && !mesh.cut_pairs.is_empty() {
            for (&(i, j), &id) in &edge_node {
                if master[i] != i || master[j] != j {
                    let (mi, mj) = (master[i], master[j]);
                    if let Some(&mid) = edge_node.get(&(mi.min(mj), mi.max(mj))) {
                        if mid != id {
                            image[id] = Some(mid);
                        }
                    }
                }
            }
        }
        let mut slots = vec![Slot::Free(usize::MAX, 1.0); n_nodes];
        let mut n_free = 0;
        let mut fixed_nodes = Vec::new();
        for n in 0..n_nodes {
            if image[n].is_some() {
                continue;
            }
            slots[n] = if fixed[n] {
                fixed_nodes.push(n);
                Slot::Fixed(fixed_nodes.len() - 1, 1.0)
            } else {
                n_free += 1;
                Slot::Free(n_free - 1, 1.0)
            };
        }
        for n in 0..n_nodes {
            if let Some(m) = image[n] {
                slots[n] = match slots[m] {
                    Slot::Free(i, s) => Slot::Free(i, -s),
                    Slot::Fixed(i, s) => Slot::Fixed(i, -s),
                };
            }
        }
        FeSpace { mesh: mesh.clone(), order, elem_nodes, node_pos, slots, n_free, fixed_nodes }
    }

    pub fn n_nodes(&self) -> usize {
        self.node_pos.len()
    }

    pub fn local(&self, t: usize) -> &[usize] {
        &self.elem_nodes[t][..self.order.local_nodes()]
    }

    /// Nodal values from free unknowns and prescribed values.
    pub fn expand(&self, free: &[f64], fixed: Option<&[f64]>) -> Vec<f64> {
        self.slots
            .iter()
            .map(|s| match *s {
                Slot::Free(i, sg) => sg * free[i],
                Slot::Fixed(i, sg) => sg * fixed.map_or(0.0, |f| f[i]),
            })
            .collect()
    }

    /// Values of `g` at the prescribed nodes.
    pub fn fixed_values(&self, g: &dyn Fn(Point) -> f64) -> Vec<f64> {
        self.fixed_nodes.iter().map(|&n| g(self.node_pos[n])).collect()
    }

    /// Nodal interpolant of `f` restricted to the free unknowns.
    pub fn interpolate_free(&self, f: &dyn Fn(Point) -> f64) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (n, s) in self.slots.iter().enumerate() {
            if let Slot::Free(i, sg) = *s {
                if sg > 0.0 {
                    out[i] = f(self.node_pos[n]);
                }
            }
        }
        out
    }
}

/// Gradients of the barycentric coordinates and twice the signed area.
pub fn bary_gradients(p: [Point; 3]) -> ([Point; 3], f64) {
    let d = (p[1] - p[0]).cross(p[2] - p[0]);
    let g = [
        Point::new(p[1].y - p[2].y, p[2].x - p[1].x) * (1.0 / d),
        Point::new(p[2].y - p[0].y, p[0].x - p[2].x) * (1.0 / d),
        Point::new(p[0].y - p[1].y, p[1].x - p[0].x) * (1.0 / d),
    ];
    (g, d)
}

/// Basis values and gradients at barycentric point `l`.
pub fn basis(order: Order, l: [f64; 3], gl: &[Point; 3]) -> ([f64; 6], [Point; 6]) {
    match order {
        Order::P1 => (
            [l[0], l[1], l[2], 0.0, 0.0, 0.0],
            [gl[0], gl[1], gl[2], Point::ORIGIN, Point::ORIGIN, Point::ORIGIN],
        ),
        Order::P2 => {
            let mut v = [0.0; 6];
            let mut g = [Point::ORIGIN; 6];
            for i in 0..3 {
                v[i] = l[i] * (2.0 * l[i] - 1.0);
                g[i] = gl[i] * (4.0 * l[i] - 1.0);
                let j = (i + 1) % 3;
                v[3 + i] = 4.0 * l[i] * l[j];
                g[3 + i] = (gl[i] * l[j] + gl[j] * l[i]) * 4.0;
            }
            (v, g)
        }
    }
}

/// A finite element function: nodal values over a space.
#[derive(Clone, Debug)]
pub struct FemFunction<'a> {
    pub space: &'a FeSpace,
    pub nodal: Vec<f64>,
}

impl<'a> FemFunction<'a> {
    pub fn from_free(space: &'a FeSpace, free: &[f64]) -> Self {
        FemFunction { space, nodal: space.expand(free, None) }
    }

    /// Value and gradient inside triangle `t` at barycentric coordinates `l`.
    pub fn eval_in(&self, t: usize, l: [f64; 3]) -> (f64, Point) {
        let sp = self.space;
        let (gl, _) = bary_gradients(sp.mesh.triangle_points(t));
        let (v, g) = basis(sp.order, l, &gl);
        let mut val = 0.0;
        let mut grad = Point::ORIGIN;
        for (k, &n) in sp.local(t).iter().enumerate() {
            val += self.nodal[n] * v[k];
            grad = grad + g[k] * self.nodal[n];
        }
        (val, grad)
    }

    /// Value and gradient at a point, located with `loc`.
    pub fn eval(&self, loc: &Locator<'_>, p: Point) -> Result<(f64, Point)> {
        let (t, l) = loc.locate(p).ok_or(Error::OffMesh(p.x, p.y))?;
        Ok(self.eval_in(t, l))
    }
}
