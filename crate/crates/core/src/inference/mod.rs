//! Feature statistics and FDR-controlled selection.

mod filter;
mod lasso;
mod pseudo;
mod scores;

pub use filter::{
    knockoff_w, metrics_text, multiple_knockoff_filter, power_fdr, selection_csv, Metrics, SelectionResult,
    WStatistics,
};
pub use lasso::{kkt_residual, lasso_cd, lasso_path, LassoConfig};
pub use pseudo::{lambda_grid, pseudo_validate, pseudo_validate_with_noise, PseudoValidation};
pub use scores::{group_scores, marginal_scores, GroupScores};
