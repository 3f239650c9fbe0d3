use super::model::KnockoffModel;
use crate::error::{Error, Result};
use crate::grouping::KeySelection;
use crate::linalg::{cholesky_factorize, dot, sym_eigen, Matrix};
use crate::rng::{fill_normal, seeded};

/// Knockoff sampler that goes through the key variables.
///
/// Keys get knockoffs from a model built on `Σ⋆` (the key rows and columns);
/// the non-keys of each group are then drawn, independently for every
/// group and copy, from the Gaussian conditional of `X†_γ` given the keys,
/// evaluated at the key knockoffs.
#[derive(Clone, Debug)]
pub struct ConditionalSampler {
    p: usize,
    key_index: Vec<usize>,
    star: KnockoffModel,
    /// Per group: non-key indices, regression on the keys, conditional root.
    groups: Vec<(Vec<usize>, Matrix, Matrix)>,
}

impl ConditionalSampler {
    pub fn new(sigma: &Matrix, keys: &KeySelection, star: KnockoffModel) -> Result<Self> {
        sigma.check_symmetric("covariance")?;
        let key_index = keys.all_keys();
        if star.p() != key_index.len() {
            return Err(Error::Dimension(format!(
                "key model has {} variables, selection has {} keys",
                star.p(),
                key_index.len()
            )));
        }
        let f = cholesky_factorize(&sigma.principal(&key_index))?;
        let mut groups = Vec::new();
        for nk in &keys.non_keys {
            if nk.is_empty() {
                continue;
            }
            let cross = sigma.submatrix(&key_index, nk);
            let coef = f.solve_matrix(&cross);
            let mut schur = sigma.principal(nk).sub(&cross.transpose().matmul(&coef));
            schur.symmetrize();
            let root = sym_eigen(&schur).sqrt_factor();
            groups.push((nk.clone(), coef.transpose(), root));
        }
        Ok(ConditionalSampler { p: sigma.rows(), key_index, star, groups })
    }

    pub fn m(&self) -> usize {
        self.star.m()
    }

    /// `m` copies stacked copy-major. The key knockoffs use the first `m·|⋆|`
    /// normals; the non-key draws follow, group by group, copy by copy.
    pub fn sample(&self, input: &[f64], seed: u64) -> Vec<f64> {
        assert_eq!(input.len(), self.p, "input length must equal p");
        let m = self.m();
        let p = self.p;
        let k = self.key_index.len();
        let mut rng = seeded(seed);
        let x_star: Vec<f64> = self.key_index.iter().map(|&i| input[i]).collect();
        let star = self.star.sample_with(&x_star, &mut rng);
        let mut out = vec![0.0; m * p];
        for l in 0..m {
            for (a, &i) in self.key_index.iter().enumerate() {
                out[l * p + i] = star[l * k + a];
            }
        }
        for (nk, coef, root) in &self.groups {
            let mut eta = vec![0.0; nk.len()];
            for l in 0..m {
                let ks = &star[l * k..(l + 1) * k];
                fill_normal(&mut rng, &mut eta);
                for (r, &i) in nk.iter().enumerate() {
                    out[l * p + i] = dot(coef.row(r), ks) + dot(root.row(r), &eta);
                }
            }
        }
        out
    }
}

/// One-shot form of [`ConditionalSampler::sample`].
pub fn sample_ci_knockoffs(
    input: &[f64],
    sigma: &Matrix,
    keys: &KeySelection,
    star_model: &KnockoffModel,
    seed: u64,
) -> Result<Vec<f64>> {
    Ok(ConditionalSampler::new(sigma, keys, star_model.clone())?.sample(input, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grouping::GroupPartition;
    use crate::sampler::{build_model, sample_knockoffs};

    #[test]
    fn all_keys_match_direct_sampler() {
        let sigma = Matrix::from_fn(4, 4, |i, j| 0.5f64.powi((i as i32 - j as i32).abs()));
        let g = GroupPartition::contiguous_blocks(4, 2);
        let s = sigma.scaled(0.4);
        let model = build_model(&sigma, &s, 2).unwrap();
        let x = [0.1, 0.2, -0.3, 1.0];
        let a = sample_ci_knockoffs(&x, &sigma, &KeySelection::all(&g), &model, 11).unwrap();
        assert_eq!(a, sample_knockoffs(&x, &model, 11));
    }

    #[test]
    fn conditional_variance_of_nonkey() {
        let rho = 0.5;
        let sigma = Matrix::from_rows(&[vec![1.0, rho], vec![rho, 1.0]]).unwrap();
        let g = GroupPartition::single_group(2);
        let keys = KeySelection::from_key_indices(&g, &[0]).unwrap();
        let star = build_model(&Matrix::identity(1), &Matrix::identity(1), 1).unwrap();
        let sampler = ConditionalSampler::new(&sigma, &keys, star).unwrap();
        let (_, coef, root) = &sampler.groups[0];
        assert!((coef[(0, 0)] - rho).abs() < 1e-15);
        assert!((root[(0, 0)].powi(2) - 0.75).abs() < 1e-12);
    }
}
