use super::fit::least_squares;
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Magnitudes of the perturbations, each multiplied by a uniform draw on `[-1, 1]`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct MatrixNoise {
    /// `m_ii - λ_i` and `m_ij` for `i, j < k`, in units of `ε`.
    pub block: f64,
    /// `m_ik` in units of `ε^{(n+2)/2}`.
    pub coupling: f64,
    /// `m_kk - λ_k + C_k ε^{n+1}` in units of `ε^{n+2}`.
    pub corner: f64,
}

impl MatrixNoise {
    pub fn none() -> Self {
        MatrixNoise { block: 0.0, coupling: 0.0, corner: 0.0 }
    }
    pub fn unit() -> Self {
        MatrixNoise { block: 1.0, coupling: 1.0, corner: 1.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixReport {
    pub k: usize,
    pub n: u32,
    pub c_k: f64,
    pub eps: Vec<f64>,
    /// Mean over trials of `(λ_max - λ_k)/ε^{n+1}`.
    pub q: Vec<f64>,
    /// Linear extrapolation of `q` to `ε = 0`.
    pub limit: f64,
    pub limit_relative_error: f64,
    /// Slope of `log|λ_max - λ_k|` against `log ε`.
    pub exponent: f64,
}

/// Random symmetric `k×k` matrices with the entry orders of the eigenvalue lemma, and the
/// behaviour of their largest eigenvalue as `ε → 0`.
pub fn matrix_lemma_check(
    lambdas: &[f64],
    n: u32,
    c_k: f64,
    trials: usize,
    eps_list: &[f64],
    noise: MatrixNoise,
    seed: u64,
) -> Result<MatrixReport> {
    let k = lambdas.len();
    if k == 0 || n == 0 {
        return Err(Error::InvalidInput("need k >= 1 and n >= 1".into()));
    }
    if k >= 2 && !(lambdas[k - 2] < lambdas[k - 1]) {
        return Err(Error::InvalidInput(format!(
            "hypothesis violated: lambda_{} = {} is not below lambda_{} = {}",
            k - 1,
            lambdas[k - 2],
            k,
            lambdas[k - 1]
        )));
    }
    if eps_list.len() < 2 || trials == 0 {
        return Err(Error::InsufficientData("need two eps values and one trial".into()));
    }
    let lk = lambdas[k - 1];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = vec![];
    let mut logs = vec![];
    for &eps in eps_list {
        let mut acc = 0.0;
        let mut gap_acc = 0.0;
        for _ in 0..trials {
            let m = lemma_matrix(lambdas, n, c_k, eps, noise, &mut rng);
            let top = SymmetricEigen::new(m).eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            acc += (top - lk) / eps.powi(n as i32 + 1);
            gap_acc += top - lk;
        }
        q.push(acc / trials as f64);
        logs.push((eps.ln(), (gap_acc / trials as f64).abs().ln()));
    }
    let pts: Vec<(f64, f64)> = eps_list.iter().cloned().zip(q.iter().cloned()).collect();
    let (_, limit, _) = least_squares(&pts);
    let (exponent, _, _) = least_squares(&logs);
    Ok(MatrixReport {
        k,
        n,
        c_k,
        eps: eps_list.to_vec(),
        q,
        limit,
        limit_relative_error: (limit + c_k).abs() / c_k.abs().max(1e-300),
        exponent,
    })
}

/// One draw of the lemma's matrix.
pub fn lemma_matrix(lambdas: &[f64], n: u32, c_k: f64, eps: f64, noise: MatrixNoise, rng: &mut impl Rng) -> DMatrix<f64> {
    let k = lambdas.len();
    let mut u = |amp: f64| if amp == 0.0 { 0.0 } else { amp * rng.random_range(-1.0..=1.0) };
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k - 1 {
        m[(i, i)] = lambdas[i] + u(noise.block) * eps;
        for j in i + 1..k - 1 {
            let v = u(noise.block) * eps;
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        let v = u(noise.coupling) * eps.powf((n as f64 + 2.0) / 2.0);
        m[(i, k - 1)] = v;
        m[(k - 1, i)] = v;
    }
    m[(k - 1, k - 1)] = lambdas[k - 1] - c_k * eps.powi(n as i32 + 1) + u(noise.corner) * eps.powi(n as i32 + 2);
    m
}
