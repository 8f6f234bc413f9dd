//! Tangent-space linear regression: ridge with GCV-selected penalty, the
//! filter → embedding → ridge pipeline, and K-fold evaluation.

mod pipeline;
mod ridge;

pub use pipeline::{
    fold_assignment, run_pipeline_cv, train_indices, CVReport, FilterSpec, FittedPipeline, PipelineSpec,
};
pub use ridge::{default_ridge_grid, fit_ridge_gcv, gcv_curve, log_grid, FeatureScaling, RidgeModel};
