use super::descent::inverse_trace;
use super::Method;
use crate::error::{Error, Result};
use crate::grouping::GroupPartition;
use crate::linalg::{cholesky_factorize, Matrix};

/// Loss of `S` for `method`, lower is better.
///
/// SDP (also used for the equicorrelated construction):
/// `Σ_γ |A_γ|⁻² Σ_{i,j∈A_γ} |S_ij − Σ_ij|`. MVR: `m²·tr(S⁻¹) + tr(D⁻¹)`.
/// ME: `−(logdet D + m·logdet S)`. Here `D = ((m+1)/m)Σ − S`.
pub fn objective(sigma: &Matrix, s: &Matrix, partition: &GroupPartition, m: usize, method: Method) -> Result<f64> {
    let mf = m as f64;
    match method {
        Method::Sdp | Method::Equi => {
            let mut total = 0.0;
            for members in partition.groups() {
                let w = 1.0 / (members.len() * members.len()) as f64;
                for &i in members {
                    for &j in members {
                        total += w * (s[(i, j)] - sigma[(i, j)]).abs();
                    }
                }
            }
            Ok(total)
        }
        Method::Mvr | Method::Me => {
            let d = sigma.scaled((mf + 1.0) / mf).sub(s);
            let ls = cholesky_factorize(s).map_err(|_| Error::SingularState)?;
            let ld = cholesky_factorize(&d).map_err(|_| Error::SingularState)?;
            Ok(if method == Method::Mvr {
                mf * mf * inverse_trace(&ls) + inverse_trace(&ld)
            } else {
                -(ld.logdet() + mf * ls.logdet())
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_values() {
        let p = 7;
        let i = Matrix::identity(p);
        let g = GroupPartition::contiguous_blocks(p, 3);
        assert!((objective(&i, &i, &g, 1, Method::Mvr).unwrap() - 2.0 * p as f64).abs() < 1e-12);
        assert!(objective(&i, &i, &g, 1, Method::Me).unwrap().abs() < 1e-12);
        assert_eq!(objective(&i, &i, &g, 1, Method::Sdp).unwrap(), 0.0);
    }

    #[test]
    fn singular_state() {
        let i = Matrix::identity(3);
        let g = GroupPartition::singletons(3);
        let z = Matrix::zeros(3, 3);
        assert!(matches!(objective(&i, &z, &g, 1, Method::Me), Err(Error::SingularState)));
    }
}
