use super::{dot, Matrix};
use crate::error::{Error, Result};

/// Pivots below this value end a downdate.
const DOWNDATE_PIVOT_FLOOR: f64 = 1e-12;

/// Lower Cholesky factor `L` with `L Lᵗ = A`.
///
/// Stored column-major so that the column sweeps in factorization, triangular
/// solves and rank-1 modifications all run over contiguous memory.
#[derive(Clone, Debug)]
pub struct CholeskyFactor {
    n: usize,
    // col j holds L[j..n, j] at data[j * n + j ..(j + 1) * n]
    data: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rank1 {
    Update,
    Downdate,
}

pub fn cholesky_factorize(a: &Matrix) -> Result<CholeskyFactor> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("cannot factor a {}x{} matrix", a.rows(), a.cols())));
    }
    let n = a.rows();
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        for i in j..n {
            data[j * n + i] = a[(i, j)];
        }
    }
    for j in 0..n {
        let (done, rest) = data.split_at_mut(j * n);
        let col = &mut rest[..n];
        for k in 0..j {
            let ck = &done[k * n..(k + 1) * n];
            let ljk = ck[j];
            if ljk == 0.0 {
                continue;
            }
            for i in j..n {
                col[i] -= ljk * ck[i];
            }
        }
        let d = col[j];
        if !(d > 0.0) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let r = d.sqrt();
        col[j] = r;
        for v in &mut col[j + 1..] {
            *v /= r;
        }
    }
    Ok(CholeskyFactor { n, data })
}

impl CholeskyFactor {
    pub fn order(&self) -> usize {
        self.n
    }

    /// Entry `L[i, j]` (zero above the diagonal).
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < j {
            0.0
        } else {
            self.data[j * self.n + i]
        }
    }

    pub fn lower(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    /// `L Lᵗ`.
    pub fn reconstruct(&self) -> Matrix {
        let l = self.lower();
        l.matmul(&l.transpose())
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.data[j * self.n + j]).collect()
    }

    pub fn logdet(&self) -> f64 {
        2.0 * self.diag().iter().map(|d| d.ln()).sum::<f64>()
    }

    /// Frobenius distance between the two lower factors.
    pub fn distance(&self, other: &CholeskyFactor) -> f64 {
        assert_eq!(self.n, other.n);
        let mut s = 0.0;
        for j in 0..self.n {
            for i in j..self.n {
                let d = self.data[j * self.n + i] - other.data[j * self.n + i];
                s += d * d;
            }
        }
        s.sqrt()
    }

    /// Solve `L x = b` in place. Leading zeros of `b` are skipped.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        let start = b.iter().position(|&v| v != 0.0).unwrap_or(n);
        for k in start..n {
            let col = &self.data[k * n..(k + 1) * n];
            let xk = b[k] / col[k];
            b[k] = xk;
            if xk != 0.0 {
                for i in k + 1..n {
                    b[i] -= col[i] * xk;
                }
            }
        }
    }

    /// Solve `Lᵗ x = b` in place.
    pub fn solve_upper_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        assert_eq!(b.len(), n);
        for k in (0..n).rev() {
            let col = &self.data[k * n..(k + 1) * n];
            let s = dot(&col[k + 1..], &b[k + 1..]);
            b[k] = (b[k] - s) / col[k];
        }
    }

    /// `L⁻¹ v`.
    pub fn half_solve(&self, v: &[f64]) -> Vec<f64> {
        let mut x = v.to_vec();
        self.solve_lower_in_place(&mut x);
        x
    }

    /// `A⁻¹ v`.
    pub fn solve(&self, v: &[f64]) -> Vec<f64> {
        let mut x = v.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// `L⁻¹ eᵢ`; entries before `i` are zero.
    pub fn half_solve_unit(&self, i: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        x[i] = 1.0;
        self.solve_lower_in_place(&mut x);
        x
    }

    /// `A⁻¹ B` column by column.
    pub fn solve_matrix(&self, b: &Matrix) -> Matrix {
        assert_eq!(b.rows(), self.n);
        let mut out = Matrix::zeros(b.rows(), b.cols());
        for j in 0..b.cols() {
            let x = self.solve(&b.column(j));
            for i in 0..self.n {
                out[(i, j)] = x[i];
            }
        }
        out
    }

    pub fn inverse(&self) -> Matrix {
        let mut inv = self.solve_matrix(&Matrix::identity(self.n));
        inv.symmetrize();
        inv
    }

    /// In-place `L Lᵗ ± w wᵗ`.
    ///
    /// On error the factor is left partially modified and must be rebuilt.
    pub fn rank1(&mut self, w: &[f64], dir: Rank1) -> Result<()> {
        let n = self.n;
        assert_eq!(w.len(), n, "rank-1 vector length mismatch");
        let mut w = w.to_vec();
        let start = match w.iter().position(|&v| v != 0.0) {
            Some(s) => s,
            None => return Ok(()),
        };
        for k in start..n {
            let wk = w[k];
            if wk == 0.0 {
                continue;
            }
            let col = &mut self.data[k * n..(k + 1) * n];
            let lkk = col[k];
            let r = match dir {
                Rank1::Update => lkk.hypot(wk),
                Rank1::Downdate => {
                    let r2 = (lkk - wk) * (lkk + wk);
                    if !(r2 > 0.0) || r2.sqrt() < DOWNDATE_PIVOT_FLOOR {
                        return Err(Error::DowndateBreaksPositivity { column: k });
                    }
                    r2.sqrt()
                }
            };
            let c = r / lkk;
            let s = wk / lkk;
            col[k] = r;
            match dir {
                Rank1::Update => {
                    for i in k + 1..n {
                        col[i] = (col[i] + s * w[i]) / c;
                        w[i] = c * w[i] - s * col[i];
                    }
                }
                Rank1::Downdate => {
                    for i in k + 1..n {
                        col[i] = (col[i] - s * w[i]) / c;
                        w[i] = c * w[i] - s * col[i];
                    }
                }
            }
        }
        Ok(())
    }

    /// Functional form of [`CholeskyFactor::rank1`].
    pub fn rank1_update(&self, w: &[f64], dir: Rank1) -> Result<CholeskyFactor> {
        let mut out = self.clone();
        out.rank1(w, dir)?;
        Ok(out)
    }
}

/// `eᵢᵗ D⁻¹ eⱼ` style constants for one coordinate pair.
///
/// `a` forms come from `D⁻¹`, `b` from `S⁻¹`, `c` from `S⁻²`, `d` from `D⁻²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadraticForms {
    pub a_ii: f64,
    pub a_ij: f64,
    pub a_jj: f64,
    pub b_ii: f64,
    pub b_ij: f64,
    pub b_jj: f64,
    pub second: Option<SecondOrderForms>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SecondOrderForms {
    pub c_ii: f64,
    pub c_ij: f64,
    pub c_jj: f64,
    pub d_ii: f64,
    pub d_ij: f64,
    pub d_jj: f64,
}

struct PairForms {
    ii: f64,
    ij: f64,
    jj: f64,
    sq: Option<(f64, f64, f64)>,
}

fn pair_forms(l: &CholeskyFactor, i: usize, j: usize, second: bool) -> PairForms {
    let ui = l.half_solve_unit(i);
    let ii = dot(&ui[i..], &ui[i..]);
    if i == j {
        let sq = second.then(|| {
            let mut x = ui.clone();
            l.solve_upper_in_place(&mut x);
            let v = dot(&x, &x);
            (v, v, v)
        });
        return PairForms { ii, ij: ii, jj: ii, sq };
    }
    let uj = l.half_solve_unit(j);
    let lo = i.max(j);
    let ij = dot(&ui[lo..], &uj[lo..]);
    let jj = dot(&uj[j..], &uj[j..]);
    let sq = second.then(|| {
        let mut xi = ui;
        let mut xj = uj;
        l.solve_upper_in_place(&mut xi);
        l.solve_upper_in_place(&mut xj);
        (dot(&xi, &xi), dot(&xi, &xj), dot(&xj, &xj))
    });
    PairForms { ii, ij, jj, sq }
}

/// Forms for the pair `(i, j)` from the factors of `D` and `S`.
pub fn quadratic_forms(
    l_d: &CholeskyFactor,
    l_s: &CholeskyFactor,
    i: usize,
    j: usize,
    want_second_order: bool,
) -> QuadraticForms {
    assert_eq!(l_d.order(), l_s.order(), "factor orders differ");
    assert!(i < l_d.order() && j < l_d.order(), "index out of range");
    let a = pair_forms(l_d, i, j, want_second_order);
    let b = pair_forms(l_s, i, j, want_second_order);
    let second = match (a.sq, b.sq) {
        (Some(d), Some(c)) => Some(SecondOrderForms {
            c_ii: c.0,
            c_ij: c.1,
            c_jj: c.2,
            d_ii: d.0,
            d_ij: d.1,
            d_jj: d.2,
        }),
        _ => None,
    };
    QuadraticForms { a_ii: a.ii, a_ij: a.ij, a_jj: a.jj, b_ii: b.ii, b_ij: b.ij, b_jj: b.jj, second }
}
