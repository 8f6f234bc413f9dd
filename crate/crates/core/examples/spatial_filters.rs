//! Unsupervised (PCA), supervised (SPoC) and MNE filters fitted on one bundle,
//! compared through the cross-validated error of the geometric pipeline.

use std::sync::Arc;

use covreg::filters::{fit_mne, fit_supervised, fit_unsupervised, supervised_moments, Leadfield};
use covreg::manifold::EmbeddingKind;
use covreg::regress::{run_pipeline_cv, FilterSpec, PipelineSpec};
use covreg::simgen::{sample_bundle, GenerativeConfig};

fn main() -> covreg::Result<()> {
    let cfg = GenerativeConfig { p: 8, q: 2, sigma: 0.1, ..Default::default() };
    let sample = sample_bundle(&cfg)?;
    let bundle = &sample.bundle;

    let pca = fit_unsupervised(bundle, 3)?;
    println!("PCA eigenvalues of the mean covariance: {:.4?}", pca.metadata);
    let spoc = fit_supervised(bundle, 3)?;
    println!("SPoC generalized eigenvalues: {:.4?}", spoc.metadata);
    let (c_bar, _) = supervised_moments(bundle)?;
    let w = spoc.w.column(0);
    println!("first SPoC filter: wᵀ C̄ w = {:.6}", (w.transpose() * c_bar.as_matrix() * w)[0]);

    // the true mixing columns of the sources make a natural leadfield
    let lead = Leadfield::new(sample.mixing.columns(0, cfg.q).into_owned())?;
    let mne = fit_mne(&lead, 1.0)?;
    println!("MNE filter: {}×{}", mne.w.nrows(), mne.w.ncols());

    let (_, std) = bundle.label_mean_std();
    for filter in [
        FilterSpec::Identity,
        FilterSpec::Unsupervised { rank: 3 },
        FilterSpec::Supervised { rank: 3 },
        FilterSpec::Mne { leadfield: Arc::new(lead.clone()), lambda: 1.0 },
    ] {
        let spec = PipelineSpec::new(filter, EmbeddingKind::GeometricTangent);
        let report = run_pipeline_cv(bundle, &spec, 10, 0)?;
        println!("{:<24} rank {} MAE/std(y) = {:.3e}", spec.name(), report.rank, report.mean_mae / std);
    }
    Ok(())
}
