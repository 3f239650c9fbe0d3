use crate::error::{Error, Result};
use crate::linalg::{cholesky_factorize, dot, sym_eigen, Matrix};
use crate::rng::{derive_seed, fill_normal, seeded, Rng};

/// Eigenvalues above `−TOL` are clipped to zero when factoring `V`.
const TOL: f64 = 1e-8;

/// Sampling quantities derived from `(Σ, S, m)`. Immutable after
/// [`build_model`].
#[derive(Clone, Debug)]
pub struct KnockoffModel {
    m: usize,
    sigma: Matrix,
    s: Matrix,
    /// `Σ⁻¹S`.
    sigma_inv_s: Matrix,
    /// `I − SΣ⁻¹`.
    proj: Matrix,
    c: Matrix,
    /// Square roots of `S + m(C − S)` and `S`. With an orthonormal `Q` whose
    /// first column is `1/√m`, `V = (Q ⊗ I)·diag(S + m(C−S), S, …, S)·(Q ⊗ I)ᵗ`.
    root_first: Matrix,
    root_rest: Matrix,
    helmert: Matrix,
}

/// Build the sampling model.
///
/// Fails with [`Error::InfeasibleS`] when `V` has an eigenvalue below
/// `−1e−8`, which happens exactly when `S` violates `0 ⪯ S ⪯ ((m+1)/m)Σ`.
pub fn build_model(sigma: &Matrix, s: &Matrix, m: usize) -> Result<KnockoffModel> {
    sigma.check_symmetric("covariance")?;
    if s.rows() != sigma.rows() || s.cols() != sigma.cols() {
        return Err(Error::Dimension("S and covariance differ in size".into()));
    }
    if m < 1 {
        return Err(Error::InvalidInput("m must be at least 1".into()));
    }
    let p = sigma.rows();
    let f = cholesky_factorize(sigma)?;
    let sigma_inv_s = f.solve_matrix(s);
    let s_sigma_inv = sigma_inv_s.transpose();
    let proj = Matrix::identity(p).sub(&s_sigma_inv);
    let mut c = s.scaled(2.0).sub(&s.matmul(&sigma_inv_s));
    c.symmetrize();
    let mut first = s.add(&c.sub(s).scaled(m as f64));
    first.symmetrize();
    let root_first = psd_root(&first)?;
    let root_rest = if m > 1 { psd_root(s)? } else { Matrix::zeros(p, p) };
    Ok(KnockoffModel {
        m,
        sigma: sigma.clone(),
        s: s.clone(),
        sigma_inv_s,
        proj,
        c,
        root_first,
        root_rest,
        helmert: helmert(m),
    })
}

fn psd_root(a: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(a);
    let scale = a.diag().iter().fold(1.0f64, |x, d| x.max(d.abs()));
    let lmin = eig.values.first().copied().unwrap_or(0.0);
    if lmin < -TOL * scale {
        return Err(Error::InfeasibleS { lambda_min: lmin });
    }
    Ok(eig.sqrt_factor())
}

/// Orthonormal `m × m` matrix with constant first column.
fn helmert(m: usize) -> Matrix {
    let mut q = Matrix::zeros(m, m);
    let c0 = 1.0 / (m as f64).sqrt();
    for l in 0..m {
        q[(l, 0)] = c0;
    }
    for k in 1..m {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for l in 0..k {
            q[(l, k)] = 1.0 / norm;
        }
        q[(k, k)] = -(k as f64) / norm;
    }
    q
}

impl KnockoffModel {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> usize {
        self.sigma.rows()
    }

    pub fn sigma(&self) -> &Matrix {
        &self.sigma
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    pub fn sigma_inv_s(&self) -> &Matrix {
        &self.sigma_inv_s
    }

    /// The `p × p` block `I − SΣ⁻¹` repeated in every copy.
    pub fn projection(&self) -> &Matrix {
        &self.proj
    }

    /// `C = 2S − SΣ⁻¹S`.
    pub fn c(&self) -> &Matrix {
        &self.c
    }

    /// The full `mp × mp` noise covariance.
    pub fn v_matrix(&self) -> Matrix {
        let p = self.p();
        let off = self.c.sub(&self.s);
        Matrix::from_fn(self.m * p, self.m * p, |i, j| {
            let (bi, bj) = (i / p, j / p);
            let (a, b) = (i % p, j % p);
            if bi == bj {
                self.c[(a, b)]
            } else {
                off[(a, b)]
            }
        })
    }

    /// Noise draw for one row, copy-major, using `m·p` normals from `rng`.
    fn noise(&self, rng: &mut Rng, eta: &mut [f64], out: &mut [f64]) {
        let p = self.p();
        fill_normal(rng, eta);
        let mut z = vec![0.0; p];
        for k in 0..self.m {
            let root = if k == 0 { &self.root_first } else { &self.root_rest };
            let e = &eta[k * p..(k + 1) * p];
            for (i, zi) in z.iter_mut().enumerate() {
                *zi = dot(root.row(i), e);
            }
            for l in 0..self.m {
                let q = self.helmert[(l, k)];
                if q == 0.0 {
                    continue;
                }
                for (o, zi) in out[l * p..(l + 1) * p].iter_mut().zip(&z) {
                    *o += q * zi;
                }
            }
        }
    }

    /// Knockoffs of one input with a caller-supplied generator.
    pub fn sample_with(&self, input: &[f64], rng: &mut Rng) -> Vec<f64> {
        let p = self.p();
        assert_eq!(input.len(), p, "input length must equal p");
        let mean = self.proj.matvec(input);
        let mut out = Vec::with_capacity(self.m * p);
        for _ in 0..self.m {
            out.extend_from_slice(&mean);
        }
        let mut eta = vec![0.0; self.m * p];
        self.noise(rng, &mut eta, &mut out);
        out
    }
}

/// `m` knockoff copies of `input`, stacked copy-major.
pub fn sample_knockoffs(input: &[f64], model: &KnockoffModel, seed: u64) -> Vec<f64> {
    model.sample_with(input, &mut seeded(seed))
}

/// Knockoffs for every row of `x` (`n × p`), giving `n × mp`. Row `r` uses
/// the seed `derive_seed(seed, r)`, so results do not depend on threading.
pub fn sample_knockoff_rows(x: &Matrix, model: &KnockoffModel, seed: u64) -> Result<Matrix> {
    let p = model.p();
    if x.cols() != p {
        return Err(Error::Dimension(format!("data has {} columns, model has {p}", x.cols())));
    }
    let row = |r: usize| sample_knockoffs(x.row(r), model, derive_seed(seed, r as u64));
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = {
        use rayon::prelude::*;
        (0..x.rows()).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..x.rows()).map(row).collect();
    Matrix::from_vec(x.rows(), model.m * p, rows.concat())
}

/// Covariance of `(X, X̃₁, …, X̃ₘ)`: every diagonal block `Σ`, every
/// off-diagonal block `Σ − S`.
pub fn joint_covariance(sigma: &Matrix, s: &Matrix, m: usize) -> Matrix {
    let p = sigma.rows();
    Matrix::from_fn((m + 1) * p, (m + 1) * p, |i, j| {
        let (a, b) = (i % p, j % p);
        if i / p == j / p {
            sigma[(a, b)]
        } else {
            sigma[(a, b)] - s[(a, b)]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helmert_is_orthonormal() {
        for m in 1..6 {
            let q = helmert(m);
            assert!(q.transpose().matmul(&q).max_abs_diff(&Matrix::identity(m)) < 1e-14);
        }
    }

    #[test]
    fn zero_s_repeats_input() {
        let sigma = Matrix::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.3 });
        let model = build_model(&sigma, &Matrix::zeros(3, 3), 2).unwrap();
        let x = [0.5, -1.0, 2.0];
        let out = sample_knockoffs(&x, &model, 7);
        for l in 0..2 {
            for j in 0..3 {
                assert!((out[l * 3 + j] - x[j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identity_blocks() {
        let model = build_model(&Matrix::identity(3), &Matrix::identity(3), 2).unwrap();
        assert!(model.projection().max_abs_diff(&Matrix::zeros(3, 3)) < 1e-15);
        let v = model.v_matrix();
        assert!(v.max_abs_diff(&Matrix::identity(6)) < 1e-15);
    }

    #[test]
    fn infeasible_s_rejected() {
        let s = Matrix::identity(2).scaled(3.0);
        assert!(matches!(build_model(&Matrix::identity(2), &s, 1), Err(Error::InfeasibleS { .. })));
    }
}
