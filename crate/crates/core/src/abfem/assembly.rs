use super::space::{bary_gradients, basis, FeSpace, Slot};
use super::sparse::Csr;
use super::weight::Weight;
use crate::quadrature::TriangleRule;

/// Stiffness and weighted mass matrices on the free unknowns, with the couplings to the
/// prescribed values kept for lifting.
#[derive(Clone, Debug)]
pub struct Pencil {
    pub k: Csr,
    pub m: Csr,
    pub k_fixed: Csr,
    pub m_fixed: Csr,
}

/// Element stiffness and mass matrices (local node order of the space).
pub fn element_matrices(space: &FeSpace, t: usize, weight: &Weight, rule: &TriangleRule) -> ([[f64; 6]; 6], [[f64; 6]; 6]) {
    let p = space.mesh.triangle_points(t);
    let (gl, _) = bary_gradients(p);
    let n = space.order.local_nodes();
    let mut ke = [[0.0; 6]; 6];
    let mut me = [[0.0; 6]; 6];
    for (x, l, w) in rule.on(p) {
        let (v, g) = basis(space.order, l, &gl);
        let pw = weight.value(x) * w;
        for i in 0..n {
            for j in i..n {
                ke[i][j] += w * g[i].dot(g[j]);
                me[i][j] += pw * v[i] * v[j];
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            ke[i][j] = ke[j][i];
            me[i][j] = me[j][i];
        }
    }
    (ke, me)
}

/// Assemble the pencil `(K, M)` for `-Δu = λ p u` on the free unknowns.
pub fn assemble(space: &FeSpace, weight: &Weight) -> Pencil {
    let rule = TriangleRule::collapsed(4);
    let n = space.order.local_nodes();
    let nf = space.n_free;
    let nx = space.fixed_nodes.len();
    let cap = space.mesh.triangles.len() * n * n;
    let (mut kt, mut mt) = (Vec::with_capacity(cap), Vec::with_capacity(cap));
    let (mut kx, mut mx) = (Vec::new(), Vec::new());
    for t in 0..space.mesh.triangles.len() {
        let (ke, me) = element_matrices(space, t, weight, &rule);
        let nodes = space.local(t);
        for i in 0..n {
            let Slot::Free(gi, si) = space.slots[nodes[i]] else { continue };
            for j in 0..n {
                match space.slots[nodes[j]] {
                    Slot::Free(gj, sj) => {
                        kt.push((gi, gj, si * sj * ke[i][j]));
                        mt.push((gi, gj, si * sj * me[i][j]));
                    }
                    Slot::Fixed(gj, sj) => {
                        kx.push((gi, gj, si * sj * ke[i][j]));
                        mx.push((gi, gj, si * sj * me[i][j]));
                    }
                }
            }
        }
    }
    Pencil {
        k: Csr::from_triplets(nf, nf, kt),
        m: Csr::from_triplets(nf, nf, mt),
        k_fixed: Csr::from_triplets(nf, nx, kx),
        m_fixed: Csr::from_triplets(nf, nx, mx),
    }
}
