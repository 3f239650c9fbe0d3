//! Gaussian second-order knockoff sampling.
//!
//! Given `(Σ, S, m)`, knockoff copies of a row `x` are drawn as
//! `x̃ = P·x + e` with every `p × p` block of `P` equal to `I − SΣ⁻¹` and
//! `e ~ N(0, V)`, `V` having diagonal blocks `C = 2S − SΣ⁻¹S` and
//! off-diagonal blocks `C − S`. The same routine serves individual-level
//! rows and z-score vectors.
//!
//! Random draws are standard normals from the crate generator, consumed
//! copy by copy and, within a copy, coordinate by coordinate. Matrices of
//! rows use one derived seed per row.

mod conditional;
mod exchange;
mod model;

pub use conditional::{sample_ci_knockoffs, ConditionalSampler};
pub use exchange::{exchangeability_check, ExchangeabilityPoint, ExchangeabilityReport};
pub use model::{build_model, joint_covariance, sample_knockoff_rows, sample_knockoffs, KnockoffModel};
