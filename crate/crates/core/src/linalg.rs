//! Small dense and banded linear algebra helpers.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Symmetric pentadiagonal matrix stored by diagonals.
#[derive(Debug, Clone, PartialEq)]
pub struct Pentadiagonal {
    pub d0: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl Pentadiagonal {
    pub fn len(&self) -> usize {
        self.d0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d0.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = self.d0[i] * x[i];
            if i >= 1 {
                s += self.d1[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                s += self.d1[i] * x[i + 1];
            }
            if i >= 2 {
                s += self.d2[i - 2] * x[i - 2];
            }
            if i + 2 < n {
                s += self.d2[i] * x[i + 2];
            }
            y[i] = s;
        }
        y
    }

    /// `A - sigma I` factored as `L D L^T` without pivoting.
    pub fn factor_shifted(&self, sigma: f64) -> Result<BandedLdl> {
        let n = self.len();
        let mut d = vec![0.0; n];
        let mut l1 = vec![0.0; n.saturating_sub(1)];
        let mut l2 = vec![0.0; n.saturating_sub(2)];
        for i in 0..n {
            let mut di = self.d0[i] - sigma;
            if i >= 1 {
                di -= l1[i - 1] * l1[i - 1] * d[i - 1];
            }
            if i >= 2 {
                di -= l2[i - 2] * l2[i - 2] * d[i - 2];
            }
            if di == 0.0 || !di.is_finite() {
                return Err(Error::Singular(format!("zero pivot at row {i} for shift {sigma}")));
            }
            d[i] = di;
            if i + 1 < n {
                let mut a = self.d1[i];
                if i >= 1 {
                    a -= l2[i - 1] * l1[i - 1] * d[i - 1];
                }
                l1[i] = a / di;
            }
            if i + 2 < n {
                l2[i] = self.d2[i] / di;
            }
        }
        Ok(BandedLdl { d, l1, l2 })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLdl {
    d: Vec<f64>,
    l1: Vec<f64>,
    l2: Vec<f64>,
}

impl BandedLdl {
    /// Number of negative pivots, i.e. eigenvalues below the shift.
    pub fn negative_count(&self) -> usize {
        self.d.iter().filter(|&&v| v < 0.0).count()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n {
            if i >= 1 {
                x[i] -= self.l1[i - 1] * x[i - 1];
            }
            if i >= 2 {
                x[i] -= self.l2[i - 2] * x[i - 2];
            }
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            if i + 1 < n {
                x[i] -= self.l1[i] * x[i + 1];
            }
            if i + 2 < n {
                x[i] -= self.l2[i] * x[i + 2];
            }
        }
        x
    }
}

/// Eigenpairs of a symmetric matrix with eigenvalues ascending.
pub fn sorted_eigen(m: DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// `(M + M^T)/2`, returning the largest asymmetry seen.
pub fn symmetrize(m: &mut DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..i {
            let a = m[(i, j)];
            let b = m[(j, i)];
            worst = worst.max((a - b).abs());
            let s = 0.5 * (a + b);
            m[(i, j)] = s;
            m[(j, i)] = s;
        }
    }
    worst
}
