use crate::abfem::{EigenProblem, EigenResult, FeSpace, Order, Slot};
use crate::error::{Error, Result};
use crate::point::Point;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};

/// What a nodal polyline ends on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndKind {
    Interior,
    Boundary,
    Pole,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline {
    pub points: Vec<Point>,
    pub ends: [EndKind; 2],
    pub closed: bool,
}

impl Polyline {
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(w[1])).sum()
    }
}

/// Zero set of a real (double covering) eigenfunction, as polylines.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct NodalSet {
    pub polylines: Vec<Polyline>,
    /// Set when the eigenvalue belongs to a numerical cluster.
    pub warning: Option<String>,
}

impl NodalSet {
    /// Number of nodal arcs leaving the disk `D_radius(p)`: crossings of its boundary circle.
    pub fn arcs_at(&self, p: Point, radius: f64) -> usize {
        let mut n = 0;
        for pl in &self.polylines {
            for w in pl.points.windows(2) {
                let (a, b) = (w[0].dist(p) < radius, w[1].dist(p) < radius);
                if a != b {
                    n += 1;
                }
            }
        }
        n
    }

    pub fn total_length(&self) -> f64 {
        self.polylines.iter().map(Polyline::length).sum()
    }

    /// All polyline vertices.
    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.polylines.iter().flat_map(|p| p.points.iter().copied())
    }

    /// CSV with header `curve_id,x,y`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("curve_id,x,y\n");
        for (i, pl) in self.polylines.iter().enumerate() {
            for p in &pl.points {
                s += &format!("{i},{:?},{:?}\n", p.x, p.y);
            }
        }
        s
    }
}

/// Nodal set of eigenvector `index` of `result`.
pub fn extract_nodal_set(problem: &EigenProblem, result: &EigenResult, index: usize) -> Result<NodalSet> {
    let v = result
        .vectors
        .get(index)
        .ok_or_else(|| Error::InvalidInput(format!("no eigenvector with index {index}")))?;
    let nodal = problem.space.expand(v, None);
    let mut set = nodal_set_of(&problem.space, &nodal);
    if let Some(&(s, e)) = result.clusters.iter().find(|c| c.0 <= index && index < c.1) {
        if e - s > 1 {
            set.warning = Some(format!(
                "eigenvalue {index} lies in the numerical cluster [{s}, {e}); its nodal set is not canonical"
            ));
        }
    }
    Ok(set)
}

#[derive(Clone, Copy)]
enum Sign {
    Neg,
    Pos,
    /// Prescribed zero (boundary or pole node).
    Neutral,
}

/// Marching triangles on the piecewise linear interpolant through all nodes
/// (P2 elements are split into four linear pieces).
pub fn nodal_set_of(space: &FeSpace, nodal: &[f64]) -> NodalSet {
    let mesh = &space.mesh;
    let scale = {
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in &mesh.vertices {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        lo.dist(hi).max(1e-300)
    };
    let q = 1e-10 * scale;
    let key = |p: Point| ((p.x / q).round() as i64, (p.y / q).round() as i64);
    let sign: Vec<Sign> = space
        .slots
        .iter()
        .zip(nodal)
        .map(|(s, &v)| match s {
            Slot::Fixed(..) => Sign::Neutral,
            Slot::Free(..) if v < 0.0 => Sign::Neg,
            Slot::Free(..) => Sign::Pos,
        })
        .collect();
    let pole_key = mesh.pole().map(key);
    let mut fixed_keys = HashSet::new();
    for (n, s) in space.slots.iter().enumerate() {
        if matches!(s, Slot::Fixed(..)) {
            fixed_keys.insert(key(space.node_pos[n]));
        }
    }
    let subs: &[[usize; 3]] = match space.order {
        Order::P1 => &[[0, 1, 2]],
        Order::P2 => &[[0, 3, 5], [3, 1, 4], [5, 4, 2], [3, 4, 5]],
    };
    let mut pos: HashMap<(i64, i64), Point> = HashMap::new();
    let mut segs: Vec<[(i64, i64); 2]> = Vec::new();
    let mut seen: HashSet<[(i64, i64); 2]> = HashSet::new();
    for t in 0..mesh.triangles.len() {
        let nodes = space.elem_nodes[t];
        for sub in subs {
            let n = [nodes[sub[0]], nodes[sub[1]], nodes[sub[2]]];
            let mut hits: Vec<Point> = Vec::with_capacity(3);
            for k in 0..3 {
                let (i, j) = (n[k], n[(k + 1) % 3]);
                if let (Sign::Neg, Sign::Pos) | (Sign::Pos, Sign::Neg) = (sign[i], sign[j]) {
                    let (vi, vj) = (nodal[i], nodal[j]);
                    let s = vi / (vi - vj);
                    hits.push(space.node_pos[i].lerp(space.node_pos[j], s));
                }
            }
            for k in 0..3 {
                let (o1, o2) = (n[(k + 1) % 3], n[(k + 2) % 3]);
                if matches!(sign[n[k]], Sign::Neutral)
                    && matches!((sign[o1], sign[o2]), (Sign::Neg, Sign::Pos) | (Sign::Pos, Sign::Neg))
                {
                    hits.push(space.node_pos[n[k]]);
                }
            }
            if hits.len() == 2 {
                let (ka, kb) = (key(hits[0]), key(hits[1]));
                if ka == kb {
                    continue;
                }
                let e = if ka < kb { [ka, kb] } else { [kb, ka] };
                if seen.insert(e) {
                    pos.insert(ka, hits[0]);
                    pos.insert(kb, hits[1]);
                    segs.push(e);
                }
            }
        }
    }
    let kind = |k: (i64, i64)| {
        if Some(k) == pole_key {
            EndKind::Pole
        } else if fixed_keys.contains(&k) {
            EndKind::Boundary
        } else {
            EndKind::Interior
        }
    };
    let mut adj: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, s) in segs.iter().enumerate() {
        adj.entry(s[0]).or_default().push(i);
        adj.entry(s[1]).or_default().push(i);
    }
    let mut used = vec![false; segs.len()];
    let mut polylines = Vec::new();
    let walk = |start: (i64, i64), first: usize, used: &mut Vec<bool>| -> Vec<(i64, i64)> {
        let mut chain = vec![start];
        let mut cur = start;
        let mut s = first;
        loop {
            used[s] = true;
            let next = if segs[s][0] == cur { segs[s][1] } else { segs[s][0] };
            chain.push(next);
            cur = next;
            let nb = &adj[&cur];
            if nb.len() != 2 {
                break;
            }
            match nb.iter().find(|&&x| !used[x]) {
                Some(&x) => s = x,
                None => break,
            }
        }
        chain
    };
    let mut starts: Vec<(i64, i64)> = adj.iter().filter(|(_, v)| v.len() != 2).map(|(k, _)| *k).collect();
    starts.sort();
    for st in starts {
        for &s in &adj[&st].clone() {
            if used[s] {
                continue;
            }
            let chain = walk(st, s, &mut used);
            let ends = [kind(chain[0]), kind(*chain.last().unwrap())];
            polylines.push(Polyline { points: chain.iter().map(|k| pos[k]).collect(), ends, closed: false });
        }
    }
    for s in 0..segs.len() {
        if used[s] {
            continue;
        }
        let chain = walk(segs[s][0], s, &mut used);
        polylines.push(Polyline {
            points: chain.iter().map(|k| pos[k]).collect(),
            ends: [EndKind::Interior, EndKind::Interior],
            closed: true,
        });
    }
    NodalSet { polylines, warning: None }
}
