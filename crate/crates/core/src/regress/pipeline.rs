use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use super::ridge::{default_ridge_grid, fit_ridge_gcv, FeatureScaling, RidgeModel};
use crate::bundle::CovarianceBundle;
use crate::error::{Error, Result};
use crate::filters::{fit_mne, fit_supervised_reduced, fit_unsupervised, FilterKind, Leadfield, SpatialFilter};
use crate::manifold::{Embedding, EmbeddingKind};
use crate::symmat::SymMat;

/// How the projection stage is learned.
#[derive(Clone, Debug, PartialEq)]
pub enum FilterSpec {
    Identity,
    Unsupervised { rank: usize },
    Supervised { rank: usize },
    Mne { leadfield: Arc<Leadfield>, lambda: f64 },
}

impl FilterSpec {
    pub fn kind(&self) -> FilterKind {
        match self {
            FilterSpec::Identity => FilterKind::Identity,
            FilterSpec::Unsupervised { .. } => FilterKind::Unsupervised,
            FilterSpec::Supervised { .. } => FilterKind::Supervised,
            FilterSpec::Mne { .. } => FilterKind::Mne,
        }
    }

    /// Requested output rank, `None` when the filter keeps its natural width.
    pub fn rank(&self) -> Option<usize> {
        match self {
            FilterSpec::Unsupervised { rank } | FilterSpec::Supervised { rank } => Some(*rank),
            FilterSpec::Identity | FilterSpec::Mne { .. } => None,
        }
    }

    pub fn fit(&self, bundle: &CovarianceBundle) -> Result<SpatialFilter> {
        match self {
            FilterSpec::Identity => Ok(SpatialFilter::identity(bundle.dim())),
            FilterSpec::Unsupervised { rank } => fit_unsupervised(bundle, *rank),
            FilterSpec::Supervised { rank } => fit_supervised_reduced(bundle, *rank),
            FilterSpec::Mne { leadfield, lambda } => {
                if leadfield.sensors() != bundle.dim() {
                    return Err(Error::dims(
                        format!("leadfield with {} sensors", bundle.dim()),
                        format!("leadfield with {} sensors", leadfield.sensors()),
                    ));
                }
                fit_mne(leadfield, *lambda)
            }
        }
    }
}

/// Projection → vectorization → ridge.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineSpec {
    pub filter: FilterSpec,
    pub embedding: EmbeddingKind,
    pub ridge_grid: Vec<f64>,
    pub scaling: FeatureScaling,
}

impl PipelineSpec {
    pub fn new(filter: FilterSpec, embedding: EmbeddingKind) -> Self {
        PipelineSpec { filter, embedding, ridge_grid: default_ridge_grid(), scaling: FeatureScaling::default() }
    }

    pub fn name(&self) -> String {
        format!("{}+{}", self.filter.kind(), self.embedding)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ridge_grid.is_empty() {
            return Err(Error::InvalidInput("ridge grid is empty".into()));
        }
        if self.ridge_grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidInput("ridge grid values must be positive".into()));
        }
        if self.ridge_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("ridge grid must be strictly increasing".into()));
        }
        if self.filter.rank() == Some(0) {
            return Err(Error::InvalidInput("filter rank must be at least 1".into()));
        }
        if let FilterSpec::Mne { lambda, .. } = &self.filter {
            if !(*lambda > 0.0) {
                return Err(Error::InvalidInput("MNE regularization must be positive".into()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PipelineSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

/// Every stage of a pipeline fit on one training set.
#[derive(Clone, Debug)]
pub struct FittedPipeline {
    pub filter: SpatialFilter,
    pub embedding: Embedding,
    pub model: RidgeModel,
}

impl FittedPipeline {
    pub fn fit(train: &CovarianceBundle, spec: &PipelineSpec) -> Result<Self> {
        spec.validate()?;
        let filter = spec.filter.fit(train).map_err(|e| e.in_stage("filter"))?;
        let filtered = filter.apply(train).map_err(|e| e.in_stage("filter"))?;
        let rank = filtered.nominal_rank();
        let embedding =
            Embedding::fit(spec.embedding, filtered.matrices(), rank).map_err(|e| e.in_stage("embedding"))?;
        let features = embedding.transform(filtered.matrices()).map_err(|e| e.in_stage("embedding"))?;
        let model = fit_ridge_gcv(&features.rows, filtered.labels(), &spec.ridge_grid, spec.scaling)
            .map_err(|e| e.in_stage("ridge"))?;
        Ok(FittedPipeline { filter, embedding, model })
    }

    pub fn features(&self, matrices: &[SymMat]) -> Result<DMatrix<f64>> {
        let filtered = if self.filter.kind == FilterKind::Identity {
            matrices.to_vec()
        } else {
            self.filter.apply_matrices(matrices)?
        };
        Ok(self.embedding.transform(&filtered)?.rows)
    }

    pub fn predict(&self, matrices: &[SymMat]) -> Result<DVector<f64>> {
        let x = self.features(matrices).map_err(|e| e.in_stage("embedding"))?;
        self.model.predict(&x).map_err(|e| e.in_stage("ridge"))
    }

    /// Hash over the bit patterns of every fitted parameter.
    pub fn checksum(&self) -> u64 {
        let mut h = DefaultHasher::new();
        let mut put = |values: &mut dyn Iterator<Item = f64>| {
            for v in values {
                v.to_bits().hash(&mut h);
            }
        };
        put(&mut self.filter.w.iter().copied());
        if let Some(r) = self.embedding.reference() {
            put(&mut r.as_matrix().iter().copied());
        }
        put(&mut self.model.beta.iter().copied());
        put(&mut self.model.feature_mean.iter().copied());
        put(&mut self.model.feature_scale.iter().copied());
        put(&mut [self.model.intercept, self.model.lambda_star].into_iter());
        h.finish()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CVReport {
    pub per_fold_mae: Vec<f64>,
    pub mean_mae: f64,
    pub per_fold_lambda: Vec<f64>,
    pub per_fold_checksum: Vec<u64>,
    /// Width of the filtered covariances fed to the embedding.
    pub rank: usize,
    pub seed: u64,
    pub ridge_grid: Vec<f64>,
}

/// Held-out indices for each fold: a seeded shuffle cut into contiguous
/// blocks, with the `n mod folds` extra samples going one each to the first folds.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if folds < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::InvalidInput(format!("{folds} folds requested for {n} samples")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha20Rng::seed_from_u64(seed));
    let (base, extra) = (n / folds, n % folds);
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let len = base + usize::from(f < extra);
        let mut block = order[start..start + len].to_vec();
        block.sort_unstable();
        out.push(block);
        start += len;
    }
    Ok(out)
}

/// Complement of `test` in `0..n`, ascending.
pub fn train_indices(n: usize, test: &[usize]) -> Vec<usize> {
    let mut held = vec![false; n];
    for &i in test {
        held[i] = true;
    }
    (0..n).filter(|&i| !held[i]).collect()
}

struct FoldResult {
    mae: f64,
    lambda: f64,
    checksum: u64,
    rank: usize,
}

fn run_fold(bundle: &CovarianceBundle, spec: &PipelineSpec, test: &[usize]) -> Result<FoldResult> {
    let train = bundle.select(&train_indices(bundle.len(), test))?;
    let held = bundle.select(test)?;
    let fitted = FittedPipeline::fit(&train, spec)?;
    let pred = fitted.predict(held.matrices())?;
    let mae = pred.iter().zip(held.labels()).map(|(p, y)| (p - y).abs()).sum::<f64>() / test.len() as f64;
    Ok(FoldResult {
        mae,
        lambda: fitted.model.lambda_star,
        checksum: fitted.checksum(),
        rank: fitted.filter.rank_out().min(bundle.nominal_rank()),
    })
}

/// K-fold cross-validated MAE, refitting every stage on each training split.
pub fn run_pipeline_cv(bundle: &CovarianceBundle, spec: &PipelineSpec, folds: usize, seed: u64) -> Result<CVReport> {
    spec.validate()?;
    let assignment = fold_assignment(bundle.len(), folds, seed)?;
    let results: Vec<Result<FoldResult>> = assignment.par_iter().map(|test| run_fold(bundle, spec, test)).collect();
    let mut per_fold_mae = Vec::with_capacity(folds);
    let mut per_fold_lambda = Vec::with_capacity(folds);
    let mut per_fold_checksum = Vec::with_capacity(folds);
    let mut rank = 0;
    for (fold, r) in results.into_iter().enumerate() {
        let r = r.map_err(|e| Error::Fold { fold, source: Box::new(e) })?;
        per_fold_mae.push(r.mae);
        per_fold_lambda.push(r.lambda);
        per_fold_checksum.push(r.checksum);
        rank = r.rank;
    }
    let mean_mae = per_fold_mae.iter().sum::<f64>() / per_fold_mae.len() as f64;
    Ok(CVReport {
        per_fold_mae,
        mean_mae,
        per_fold_lambda,
        per_fold_checksum,
        rank,
        seed,
        ridge_grid: spec.ridge_grid.clone(),
    })
}
