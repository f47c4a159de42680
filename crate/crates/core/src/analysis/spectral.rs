//! Spectral decomposition of the coupling Laplacian by cyclic Jacobi rotations.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::CouplingTopology;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_TOL: f64 = 1e-12;

/// Eigenvalues of `A` in ascending order together with orthonormal eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the unit eigenvector of `eigenvalues[k]`.
    pub eigenvectors: DMatrix<f64>,
    pub connected: bool,
}

impl SpectralDecomposition {
    /// Second-smallest eigenvalue; `None` for a single oscillator.
    pub fn algebraic_connectivity(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }

    /// Eigenvalues of the non-consensus modes (index 1 onwards).
    pub fn transverse_eigenvalues(&self) -> &[f64] {
        self.eigenvalues.get(1..).unwrap_or(&[])
    }

    /// `max |A - P diag(v) P^T|`
    pub fn reconstruction_error(&self, a: &DMatrix<f64>) -> f64 {
        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&self.eigenvalues));
        let rebuilt = &self.eigenvectors * d * self.eigenvectors.transpose();
        (a - rebuilt).amax()
    }
}

/// Diagonalizes the Laplacian of `c`.
pub fn spectral_decompose(c: &CouplingTopology) -> Result<SpectralDecomposition> {
    let (eigenvalues, eigenvectors) = symmetric_eigen(c.laplacian())?;
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        connected: c.is_connected(),
    })
}

/// Cyclic Jacobi eigensolver for a real symmetric matrix.
///
/// Returns ascending eigenvalues and the matching eigenvectors as columns.
/// Each eigenvector is signed so that its largest-magnitude entry is positive.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidTopology(format!(
            "matrix must be square, got {}x{}",
            n,
            m.ncols()
        )));
    }
    let asym = (m - m.transpose()).amax();
    if asym > 1e-12 * (1.0 + m.amax()) {
        return Err(Error::NotSymmetric(asym));
    }

    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    let tol = OFF_DIAGONAL_TOL * m.norm().max(1.0);

    let mut sweeps = 0;
    let mut off = off_diagonal_norm(&a);
    while off >= tol {
        if sweeps == MAX_SWEEPS {
            return Err(Error::EigenNoConvergence {
                sweeps,
                residual: off,
            });
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
        off = off_diagonal_norm(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].total_cmp(&a[(j, j)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let mut col = v.column(i).clone_owned();
        let lead = col
            .iter()
            .copied()
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap_or(0.0);
        if lead < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(k, &col);
    }
    Ok((values, vectors))
}

fn off_diagonal_norm(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for j in 0..n {
        for i in 0..n {
            if i != j {
                s += a[(i, j)] * a[(i, j)];
            }
        }
    }
    s.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut DMatrix<f64>, v: &mut DMatrix<f64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let n = a.nrows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_kp = c * akp - s * akq;
        let new_kq = s * akp + c * akq;
        a[(k, p)] = new_kp;
        a[(p, k)] = new_kp;
        a[(k, q)] = new_kq;
        a[(q, k)] = new_kq;
    }
    a[(p, p)] -= t * apq;
    a[(q, q)] += t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = c * vkp - s * vkq;
        v[(k, q)] = s * vkp + c * vkq;
    }
}
