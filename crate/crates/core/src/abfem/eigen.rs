use super::assembly::{assemble as assemble_pencil, Pencil};
use super::space::{FeSpace, FemFunction, Order};
use super::sparse::Cholesky;
use super::weight::Weight;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Mesh, PoleConfig};
use crate::quadrature::TriangleRule;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// The discrete pencil `K u = λ M u` together with its finite element space.
#[derive(Clone, Debug)]
pub struct EigenProblem {
    pub space: FeSpace,
    pub pencil: Pencil,
    pub weight: Weight,
}

/// Assemble the eigenproblem for `mesh`. With a pole, the cut couplings carry a sign flip
/// and the pole vertex is pinned to zero.
pub fn assemble(mesh: &Mesh, weight: &Weight, order: Order) -> Result<EigenProblem> {
    mesh.validate()?;
    let rule = TriangleRule::collapsed(4);
    if !weight.is_constant() || weight.value(mesh.vertices[0]) <= 0.0 {
        for t in 0..mesh.triangles.len() {
            for (x, _, _) in rule.on(mesh.triangle_points(t)) {
                let p = weight.value(x);
                if !(p > 0.0) {
                    return Err(Error::InvalidInput(format!(
                        "weight is not positive at ({}, {}): {p}",
                        x.x, x.y
                    )));
                }
            }
        }
    }
    let space = FeSpace::new(mesh, order);
    if space.n_free == 0 {
        return Err(Error::InvalidInput("mesh has no interior degrees of freedom".into()));
    }
    let pencil = assemble_pencil(&space, weight);
    Ok(EigenProblem { space, pencil, weight: weight.clone() })
}

/// Parameters of the shift-invert block Krylov eigensolver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub count: usize,
    /// Relative residual tolerance: `|Kv - λMv| / |Mv| <= tol * λ`, or the rounding floor of
    /// `Kv` when that is larger.
    pub tol: f64,
    pub block: usize,
    pub seed: u64,
    pub max_restarts: usize,
    /// Relative spacing below which neighbouring eigenvalues form one cluster.
    pub cluster_tol: f64,
}

impl EigenOptions {
    pub fn new(count: usize) -> Self {
        EigenOptions { count, tol: 1e-9, block: 4, seed: 0x5eed, max_restarts: 30, cluster_tol: 1e-6 }
    }
}

/// Eigenpairs in ascending order.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EigenResult {
    pub domain: Option<DomainSpec>,
    pub pole: Option<PoleConfig>,
    pub h_max: f64,
    pub order: Order,
    pub dofs: usize,
    pub lambdas: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Index ranges `[start, end)` of numerically coincident eigenvalues.
    pub clusters: Vec<(usize, usize)>,
    /// Free-unknown vectors, M-orthonormal.
    #[serde(skip)]
    pub vectors: Vec<Vec<f64>>,
}

impl EigenResult {
    pub fn function<'a>(&self, problem: &'a EigenProblem, i: usize) -> FemFunction<'a> {
        FemFunction::from_free(&problem.space, &self.vectors[i])
    }

    /// `dof value` table for eigenvector `i`, indexed by mesh nodes.
    pub fn vector_table(&self, problem: &EigenProblem, i: usize) -> String {
        let nodal = problem.space.expand(&self.vectors[i], None);
        let mut s = String::new();
        for (n, v) in nodal.iter().enumerate() {
            s += &format!("{n} {v:?}\n");
        }
        s
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// The `count` smallest eigenpairs with default options.
pub fn solve_eigs(problem: &EigenProblem, count: usize, tol: f64) -> Result<EigenResult> {
    let mut opt = EigenOptions::new(count);
    opt.tol = tol;
    solve_eigs_with(problem, &opt)
}

/// Shift-invert (shift 0) block Krylov iteration with full M-reorthogonalization and
/// thick restarts.
pub fn solve_eigs_with(problem: &EigenProblem, opt: &EigenOptions) -> Result<EigenResult> {
    let n = problem.space.n_free;
    let (k_mat, m_mat) = (&problem.pencil.k, &problem.pencil.m);
    if opt.count == 0 || opt.count >= n {
        return Err(Error::InvalidInput(format!("cannot compute {} eigenpairs of a problem with {n} unknowns", opt.count)));
    }
    let chol = Cholesky::new(k_mat)?;
    let b = opt.block.max(1).min(n);
    let want = (opt.count + b).min(n - 1);
    let max_dim = (2 * want + 24).max(want + 2 * b).min(n);

    // Rounding in K x alone limits the attainable residual on strongly graded meshes.
    let k_norm = k_mat.norm_inf();
    let mut rng = ChaCha8Rng::seed_from_u64(opt.seed);
    let mut start: Vec<Vec<f64>> = (0..b).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();

    let mut last_res = vec![];
    let mut last_floor = vec![];
    for _restart in 0..=opt.max_restarts {
        // Basis Q (M-orthonormal), MQ and A Q = K^{-1} M Q.
        let mut q: Vec<Vec<f64>> = Vec::new();
        let mut mq: Vec<Vec<f64>> = Vec::new();
        let mut aq: Vec<Vec<f64>> = Vec::new();
        let mut block = start.clone();
        while q.len() < max_dim && !block.is_empty() {
            let mut accepted = Vec::new();
            for mut v in block.drain(..) {
                let mut mv = m_mat.apply(&v);
                let n0 = dot(&v, &mv).sqrt();
                for _pass in 0..2 {
                    for (qi, mqi) in q.iter().zip(&mq) {
                        let c = dot(mqi, &v);
                        axpy(-c, qi, &mut v);
                    }
                    mv = m_mat.apply(&v);
                }
                let nv = dot(&v, &mv).sqrt();
                if !(nv > 1e-8 * n0) || q.len() >= max_dim {
                    continue;
                }
                v.iter_mut().for_each(|x| *x /= nv);
                mv.iter_mut().for_each(|x| *x /= nv);
                q.push(v);
                mq.push(mv);
                accepted.push(q.len() - 1);
            }
            // Apply the operator to the accepted block.
            let nb = accepted.len();
            let mut rhs = vec![0.0; n * nb];
            for (c, &i) in accepted.iter().enumerate() {
                rhs[c * n..(c + 1) * n].copy_from_slice(&mq[i]);
            }
            chol.solve_block(&mut rhs, nb);
            for c in 0..nb {
                let w = rhs[c * n..(c + 1) * n].to_vec();
                aq.push(w.clone());
                block.push(w);
            }
        }
        let dim = q.len();
        let mut h = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..dim {
            for j in i..dim {
                let v = 0.5 * (dot(&mq[i], &aq[j]) + dot(&mq[j], &aq[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        let eig = SymmetricEigen::new(h);
        let mut idx: Vec<usize> = (0..dim).collect();
        idx.sort_by(|&a, &c| eig.eigenvalues[c].total_cmp(&eig.eigenvalues[a]));
        let take = want.min(dim);
        let mut lambdas = Vec::with_capacity(take);
        let mut vectors = Vec::with_capacity(take);
        let mut residuals = Vec::with_capacity(take);
        let mut floors = Vec::with_capacity(take);
        for &c in idx.iter().take(take) {
            let theta = eig.eigenvalues[c];
            let mut x = vec![0.0; n];
            for i in 0..dim {
                axpy(eig.eigenvectors[(i, c)], &q[i], &mut x);
            }
            let lam = 1.0 / theta;
            let kx = k_mat.apply(&x);
            let mx = m_mat.apply(&x);
            let r: Vec<f64> = kx.iter().zip(&mx).map(|(a, c)| a - lam * c).collect();
            residuals.push(norm(&r) / norm(&mx));
            floors.push(256.0 * f64::EPSILON * k_norm * x.iter().fold(0.0f64, |m, v| m.max(v.abs())) * (n as f64).sqrt() / norm(&mx));
            lambdas.push(lam);
            vectors.push(x);
        }
        // Extend the requested range to whole clusters.
        let mut need = opt.count.min(take);
        while need < take && (lambdas[need] - lambdas[need - 1]).abs() <= opt.cluster_tol * lambdas[need - 1].abs() {
            need += 1;
        }
        let ok = (0..need).all(|i| lambdas[i] > 0.0 && residuals[i] <= (opt.tol * lambdas[i].abs().max(1.0)).max(floors[i]));
        last_res = residuals[..need].to_vec();
        last_floor = floors[..need].to_vec();
        if ok {
            let mut clusters = Vec::new();
            let mut s = 0;
            for i in 1..=need {
                if i == need || (lambdas[i] - lambdas[i - 1]).abs() > opt.cluster_tol * lambdas[i - 1].abs() {
                    clusters.push((s, i));
                    s = i;
                }
            }
            let mesh = &problem.space.mesh;
            let recipe = mesh.recipe.as_ref();
            return Ok(EigenResult {
                domain: recipe.map(|r| r.domain),
                pole: recipe.and_then(|r| r.pole.clone()),
                h_max: mesh.h_max,
                order: problem.space.order,
                dofs: n,
                lambdas: lambdas[..need].to_vec(),
                residuals: residuals[..need].to_vec(),
                clusters,
                vectors: vectors.into_iter().take(need).collect(),
            });
        }
        start = vectors;
    }
    Err(Error::NoConvergence(format!("residuals {:?} (rounding floors {:?})", last_res, last_floor)))
}
