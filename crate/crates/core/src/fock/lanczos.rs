//! Lowest eigenpair of a sparse symmetric matrix: Lanczos with full
//! reorthogonalization and explicit restarts from the current Ritz vector.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hamiltonian::SparseHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::sorted_eigen;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LanczosOptions {
    /// Accept when `|H v - E v| <= tol max(1, |E|)`.
    pub tol: f64,
    /// Krylov dimension per restart.
    pub krylov: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            krylov: 80,
            max_restarts: 60,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
    pub matvecs: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn residual_of(h: &SparseHamiltonian, x: &[f64], e: f64) -> f64 {
    let mut hx = vec![0.0; x.len()];
    h.apply(x, &mut hx);
    hx.iter().zip(x).map(|(a, b)| (a - e * b).powi(2)).sum::<f64>().sqrt()
}

/// Start vector dominated by basis state 0 (the vacuum of every model here),
/// with a small seeded admixture so no symmetry sector is missed.
fn start_vector(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| 1e-3 * (rng.random::<f64>() - 0.5)).collect();
    v[0] = 1.0;
    let n = norm(&v);
    v.iter_mut().for_each(|x| *x /= n);
    v
}

pub fn ground_state(h: &SparseHamiltonian, opts: &LanczosOptions) -> Result<GroundState> {
    let dim = h.dimension;
    if dim == 0 {
        return Err(Error::EmptyBasis("zero-dimensional Hamiltonian".into()));
    }
    if !(opts.tol > 0.0) || opts.krylov < 2 {
        return Err(Error::parameter("tol", "need tol > 0 and krylov >= 2"));
    }
    if h.is_diagonal() {
        let d = h.diagonal();
        let (i, &e) = d
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let mut vector = vec![0.0; dim];
        vector[i] = 1.0;
        return Ok(GroundState {
            energy: e,
            vector,
            residual: 0.0,
            matvecs: 0,
        });
    }
    let m = opts.krylov.min(dim);
    let mut x = start_vector(dim, opts.seed);
    let mut history = Vec::new();
    let mut matvecs = 0;
    let mut w = vec![0.0; dim];
    for _ in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<f64>> = vec![x.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for k in 0..m {
            h.apply(&basis[k], &mut w);
            matvecs += 1;
            let a = dot(&w, &basis[k]);
            alpha.push(a);
            // Two passes of classical Gram-Schmidt against the whole basis.
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(&w, q);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= c * qi);
                }
            }
            let b = norm(&w);
            if k + 1 == m || b <= 1e-14 * a.abs().max(1.0) {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|v| v / b).collect());
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (imin, &e) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let y = eig.eigenvectors.column(imin);
        x = vec![0.0; dim];
        for (q, c) in basis.iter().zip(y.iter()) {
            x.iter_mut().zip(q).for_each(|(xi, qi)| *xi += c * qi);
        }
        let n = norm(&x);
        x.iter_mut().for_each(|v| *v /= n);
        let res = residual_of(h, &x, e);
        matvecs += 1;
        history.push(res);
        if res <= opts.tol * e.abs().max(1.0) {
            return Ok(GroundState {
                energy: e,
                vector: x,
                residual: res,
                matvecs,
            });
        }
    }
    Err(Error::Convergence {
        iterations: matvecs,
        residual: *history.last().unwrap_or(&f64::INFINITY),
        history,
    })
}

/// Lowest eigenvalue by dense diagonalization, for oracles.
pub fn dense_ground_energy(h: &SparseHamiltonian) -> Result<f64> {
    if h.dimension > 4000 {
        return Err(Error::Budget {
            what: "dense diagonalization".into(),
            needed: h.dimension as u128,
            cap: 4000,
        });
    }
    let (vals, _) = sorted_eigen(h.to_dense());
    Ok(vals[0])
}
