use super::Matrix;
use nalgebra::DMatrix;

/// Symmetric eigendecomposition with eigenvalues in ascending order.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: Matrix,
}

impl SymEigen {
    /// `Q diag(f(λ)) Qᵗ`.
    pub fn reassemble(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.values.len();
        let q = &self.vectors;
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += q[(i, k)] * fl[k] * q[(j, k)];
                }
                out[(i, j)] = s;
                out[(j, i)] = s;
            }
        }
        out
    }

    /// `Q diag(√max(λ, 0))`, a square root of the matrix.
    pub fn sqrt_factor(&self) -> Matrix {
        let n = self.values.len();
        Matrix::from_fn(n, n, |i, k| self.vectors[(i, k)] * self.values[k].max(0.0).sqrt())
    }
}

fn to_nalgebra(a: &Matrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

pub fn sym_eigen(a: &Matrix) -> SymEigen {
    assert!(a.is_square(), "eigendecomposition needs a square matrix");
    let n = a.rows();
    let eig = to_nalgebra(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = Matrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    SymEigen { values, vectors }
}

pub fn lambda_min(a: &Matrix) -> f64 {
    assert!(a.is_square(), "eigenvalues need a square matrix");
    if a.rows() == 0 {
        return f64::INFINITY;
    }
    to_nalgebra(a).symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}
