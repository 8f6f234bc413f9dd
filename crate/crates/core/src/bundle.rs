use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::simgen::GenerativeConfig;
use crate::symmat::SymMat;

/// Where a bundle came from.
#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Generated(GenerativeConfig),
    File(PathBuf),
    Derived(&'static str),
}

/// `N` labeled covariance matrices sharing dimension `P` and nominal rank `R`.
#[derive(Clone, Debug)]
pub struct CovarianceBundle {
    matrices: Vec<SymMat>,
    labels: Vec<f64>,
    nominal_rank: usize,
    provenance: Provenance,
}

impl CovarianceBundle {
    pub fn new(matrices: Vec<SymMat>, labels: Vec<f64>, nominal_rank: usize, provenance: Provenance) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::InvalidInput("bundle must contain at least one matrix".into()));
        }
        if matrices.len() != labels.len() {
            return Err(Error::dims(format!("{} labels", matrices.len()), format!("{} labels", labels.len())));
        }
        let p = matrices[0].dim();
        if let Some(bad) = matrices.iter().find(|m| m.dim() != p) {
            return Err(Error::dims(p, bad.dim()));
        }
        if labels.iter().any(|y| !y.is_finite()) {
            return Err(Error::InvalidInput("labels must be finite".into()));
        }
        if nominal_rank == 0 || nominal_rank > p {
            return Err(Error::InvalidInput(format!("nominal rank {nominal_rank} must lie in 1..={p}")));
        }
        Ok(CovarianceBundle { matrices, labels, nominal_rank, provenance })
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.matrices[0].dim()
    }

    pub fn nominal_rank(&self) -> usize {
        self.nominal_rank
    }

    pub fn matrices(&self) -> &[SymMat] {
        &self.matrices
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Sub-bundle at the given sample indices, in that order.
    pub fn select(&self, indices: &[usize]) -> Result<CovarianceBundle> {
        let matrices = indices.iter().map(|&i| self.matrices[i].clone()).collect();
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        CovarianceBundle::new(matrices, labels, self.nominal_rank, Provenance::Derived("subset"))
    }

    pub fn with_labels(&self, labels: Vec<f64>) -> Result<CovarianceBundle> {
        CovarianceBundle::new(self.matrices.clone(), labels, self.nominal_rank, self.provenance.clone())
    }

    pub fn label_mean_std(&self) -> (f64, f64) {
        mean_std(&self.labels)
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
