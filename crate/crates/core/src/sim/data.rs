use crate::error::{Error, Result};
use crate::linalg::{sym_eigen, Matrix};
use crate::rng::{fill_normal, seeded};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    Random,
    Contiguous,
}

#[derive(Clone, Debug)]
pub struct SimData {
    /// `n × p`, rows i.i.d. `N(0, Σ)`.
    pub x: Matrix,
    pub y: Vec<f64>,
    pub beta: Vec<f64>,
    /// 0-based causal variables, ascending.
    pub causal: Vec<usize>,
}

/// Gaussian design and linear response `y = Xβ + N(0, I)` with `k`
/// nonzero `N(0, effect_sd²)` coefficients.
pub fn gen_data(
    sigma: &Matrix,
    n: usize,
    k: usize,
    effect_sd: f64,
    placement: Placement,
    seed: u64,
) -> Result<SimData> {
    sigma.check_symmetric("covariance")?;
    let p = sigma.rows();
    if k > p {
        return Err(Error::InvalidInput(format!("k = {k} exceeds p = {p}")));
    }
    let mut rng = seeded(seed);
    let mut causal: Vec<usize> = match placement {
        Placement::Random => rand::seq::index::sample(&mut rng, p, k).into_vec(),
        Placement::Contiguous => {
            let start = rng.random_range(0..=p - k);
            (start..start + k).collect()
        }
    };
    causal.sort_unstable();
    let mut beta = vec![0.0; p];
    for &j in &causal {
        let z: f64 = StandardNormal.sample(&mut rng);
        beta[j] = effect_sd * z;
    }
    let root = sym_eigen(sigma).sqrt_factor();
    let root_t = root.transpose();
    let mut eta = Matrix::zeros(n, p);
    fill_normal(&mut rng, eta.as_mut_slice());
    let x = eta.matmul(&root_t);
    let mut noise = vec![0.0; n];
    fill_normal(&mut rng, &mut noise);
    let y = x.matvec(&beta).iter().zip(&noise).map(|(a, b)| a + b).collect();
    Ok(SimData { x, y, beta, causal })
}
