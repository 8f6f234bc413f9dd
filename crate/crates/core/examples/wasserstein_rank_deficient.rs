//! Rank-deficient covariances: the geometric embedding refuses them, the
//! Wasserstein embedding works on the rank-`R` factors directly.

use covreg::manifold::{dist_wasserstein, mean_wasserstein, EmbeddingKind};
use covreg::regress::{run_pipeline_cv, FilterSpec, PipelineSpec};
use covreg::simgen::{sample_bundle, GenerativeConfig, Link};
use covreg::{CovarianceBundle, Provenance, SymMat};

fn main() -> covreg::Result<()> {
    // remove the contribution of the last noise source so that every matrix
    // shares the same null direction
    let sample = sample_bundle(&GenerativeConfig { link: Link::Sqrt, orthogonal_a: true, ..Default::default() })?;
    let p = sample.bundle.dim();
    let r = p - 1;
    let a = sample.mixing.column(p - 1);
    let matrices = sample
        .bundle
        .matrices()
        .iter()
        .enumerate()
        .map(|(i, c)| SymMat::new(c.as_matrix() - a * a.transpose() * sample.powers[(i, p - 1)]))
        .collect::<covreg::Result<Vec<SymMat>>>()?;
    let bundle = CovarianceBundle::new(matrices, sample.bundle.labels().to_vec(), r, Provenance::Derived("truncated"))?;

    let mean = mean_wasserstein(bundle.matrices(), r)?;
    println!("Wasserstein mean rank {}", mean.numerical_rank()?);
    println!("d_W(mean, C_0) = {:.4}", dist_wasserstein(&mean, &bundle.matrices()[0])?);

    let (_, std) = bundle.label_mean_std();
    let wasserstein = PipelineSpec::new(FilterSpec::Identity, EmbeddingKind::WassersteinTangent);
    let report = run_pipeline_cv(&bundle, &wasserstein, 10, 0)?;
    println!("wasserstein: MAE/std(y) = {:.3e}", report.mean_mae / std);

    let geometric = PipelineSpec::new(FilterSpec::Identity, EmbeddingKind::GeometricTangent);
    match run_pipeline_cv(&bundle, &geometric, 10, 0) {
        Ok(r) => println!("geometric: MAE/std(y) = {:.3e}", r.mean_mae / std),
        Err(e) => println!("geometric: {e}"),
    }

    // after an unsupervised projection to rank R the geometric pipeline applies again
    let projected = PipelineSpec::new(FilterSpec::Unsupervised { rank: r }, EmbeddingKind::GeometricTangent);
    let report = run_pipeline_cv(&bundle, &projected, 10, 0)?;
    println!("unsupervised({r}) + geometric: MAE/std(y) = {:.3e}", report.mean_mae / std);
    Ok(())
}
