use super::assembly::{assemble as assemble_pencil, element_matrices};
use super::space::{FeSpace, Order};
use super::sparse::Cholesky;
use super::weight::Weight;
use crate::error::{Error, Result};
use crate::geometry::Mesh;
use crate::point::Point;
use crate::quadrature::TriangleRule;

/// The quadratic form `∫ |∇u|² - λ p u²` and which boundary pieces carry data.
#[derive(Clone, Debug)]
pub struct LocalForm {
    pub lambda: f64,
    pub weight: Weight,
    pub order: Order,
    /// Boundary tags with prescribed values; `None` means the whole boundary.
    pub dirichlet_tags: Option<Vec<usize>>,
}

impl LocalForm {
    pub fn laplace() -> Self {
        LocalForm { lambda: 0.0, weight: Weight::one(), order: Order::P2, dirichlet_tags: None }
    }
}

#[derive(Clone, Debug)]
pub struct LocalSolution {
    pub space: FeSpace,
    pub nodal: Vec<f64>,
    /// Relative residual of the linear system.
    pub residual: f64,
    /// Value of the quadratic form at the solution.
    pub energy: f64,
}

/// Minimise the form over functions with the prescribed trace `g` on the Dirichlet part
/// of the boundary (natural conditions elsewhere).
pub fn solve_local_dirichlet(mesh: &Mesh, form: &LocalForm, g: &dyn Fn(Point) -> f64) -> Result<LocalSolution> {
    mesh.validate()?;
    let tags = form.dirichlet_tags.clone();
    let space = FeSpace::with_dirichlet(mesh, form.order, &|t| tags.as_ref().is_none_or(|s| s.contains(&t)));
    let pencil = assemble_pencil(&space, &form.weight);
    let a = pencil.k.add_scaled(-form.lambda, &pencil.m);
    let gd = space.fixed_values(g);
    let mut rhs = pencil.k_fixed.apply(&gd);
    let mg = pencil.m_fixed.apply(&gd);
    for (r, m) in rhs.iter_mut().zip(&mg) {
        *r = -(*r - form.lambda * m);
    }
    let free = if space.n_free == 0 {
        vec![]
    } else {
        let chol = Cholesky::new(&a).map_err(|_| Error::Factorization("local form is not coercive".into()))?;
        chol.solve(&rhs)
    };
    let ax = a.apply(&free);
    let rn: f64 = rhs.iter().map(|x| x * x).sum::<f64>().sqrt();
    let en: f64 = ax.iter().zip(&rhs).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let residual = if rn > 0.0 { en / rn } else { en };
    let nodal = space.expand(&free, Some(&gd));
    let energy = form_value(&space, &form.weight, form.lambda, &nodal);
    Ok(LocalSolution { space, nodal, residual, energy })
}

/// `∫ |∇u|² - λ ∫ p u²` for nodal values on `space`.
pub fn form_value(space: &FeSpace, weight: &Weight, lambda: f64, nodal: &[f64]) -> f64 {
    let rule = TriangleRule::collapsed(4);
    let n = space.order.local_nodes();
    let mut e = 0.0;
    for t in 0..space.mesh.triangles.len() {
        let (ke, me) = element_matrices(space, t, weight, &rule);
        let nodes = space.local(t);
        for i in 0..n {
            for j in 0..n {
                e += nodal[nodes[i]] * (ke[i][j] - lambda * me[i][j]) * nodal[nodes[j]];
            }
        }
    }
    e
}
