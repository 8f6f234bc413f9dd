//! Spatial filters `W ∈ R^{P×R}` reducing `P×P` covariances to `R×R` ones
//! via `Σ_i = Wᵀ C_i W`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::bundle::{mean_std, CovarianceBundle, Provenance};
use crate::error::{Error, Result};
use crate::symmat::SymMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Identity,
    Unsupervised,
    Supervised,
    Mne,
}

impl FilterKind {
    pub fn name(self) -> &'static str {
        match self {
            FilterKind::Identity => "identity",
            FilterKind::Unsupervised => "unsupervised",
            FilterKind::Supervised => "supervised",
            FilterKind::Mne => "mne",
        }
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "none" => Ok(FilterKind::Identity),
            "unsupervised" | "pca" => Ok(FilterKind::Unsupervised),
            "supervised" | "spoc" => Ok(FilterKind::Supervised),
            "mne" => Ok(FilterKind::Mne),
            other => Err(Error::InvalidInput(format!("unknown filter '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpatialFilter {
    pub w: DMatrix<f64>,
    pub kind: FilterKind,
    /// Eigenvalues behind the selected columns, or `[λ]` for MNE.
    pub metadata: Vec<f64>,
}

impl SpatialFilter {
    pub fn identity(p: usize) -> Self {
        SpatialFilter { w: DMatrix::identity(p, p), kind: FilterKind::Identity, metadata: Vec::new() }
    }

    pub fn input_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn rank_out(&self) -> usize {
        self.w.ncols()
    }

    /// `Wᵀ C_i W` for every matrix; labels are carried through.
    pub fn apply(&self, bundle: &CovarianceBundle) -> Result<CovarianceBundle> {
        if bundle.dim() != self.input_dim() {
            return Err(Error::dims(
                format!("{}-channel bundle", self.input_dim()),
                format!("{}-channel bundle", bundle.dim()),
            ));
        }
        if self.kind == FilterKind::Identity {
            return Ok(bundle.clone());
        }
        let matrices = self.apply_matrices(bundle.matrices())?;
        let rank = bundle.nominal_rank().min(self.rank_out());
        CovarianceBundle::new(matrices, bundle.labels().to_vec(), rank, Provenance::Derived("filtered"))
    }

    pub fn apply_matrices(&self, matrices: &[SymMat]) -> Result<Vec<SymMat>> {
        matrices.iter().map(|c| c.congruence(&self.w)).collect()
    }
}

/// Sensors × candidate sources forward matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Leadfield {
    g: DMatrix<f64>,
}

impl Leadfield {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if g.ncols() == 0 || g.nrows() == 0 {
            return Err(Error::InvalidInput("leadfield must have at least one sensor and one source".into()));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("leadfield has non-finite entries".into()));
        }
        Ok(Leadfield { g })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn sensors(&self) -> usize {
        self.g.nrows()
    }

    pub fn sources(&self) -> usize {
        self.g.ncols()
    }
}

/// PCA on the average covariance: the top-`r` eigenvectors of `C̄`.
pub fn fit_unsupervised(bundle: &CovarianceBundle, r: usize) -> Result<SpatialFilter> {
    let p = bundle.dim();
    if r == 0 || r > p {
        return Err(Error::InvalidInput(format!("filter rank {r} must lie in 1..={p}")));
    }
    let mean = SymMat::arithmetic_mean(bundle.matrices())?;
    let eig = mean.eigh()?;
    eig.check_psd()?;
    let available = eig.rank();
    if r > available {
        return Err(Error::RankTooLarge { requested: r, available });
    }
    Ok(SpatialFilter {
        w: eig.vectors.columns(0, r).into_owned(),
        kind: FilterKind::Unsupervised,
        metadata: eig.values.as_slice()[..r].to_vec(),
    })
}

/// SPoC: generalized eigenvectors of `(C_y, C̄)` with `y` standardized,
/// sorted by decreasing eigenvalue and scaled so that `wᵀ C̄ w = 1`.
///
/// Solved by whitening with `C̄^{-1/2}`; a rank-deficient `C̄` is rejected.
pub fn fit_supervised(bundle: &CovarianceBundle, r: usize) -> Result<SpatialFilter> {
    let p = bundle.dim();
    if r == 0 || r > p {
        return Err(Error::InvalidInput(format!("filter rank {r} must lie in 1..={p}")));
    }
    let (c_bar, c_y) = supervised_moments(bundle)?;
    let whitener = c_bar.inv_sqrt()?;
    let eig = whitener.sandwich(&c_y)?.eigh()?;
    let w = whitener.as_matrix() * eig.vectors.columns(0, r);
    Ok(SpatialFilter { w, kind: FilterKind::Supervised, metadata: eig.values.as_slice()[..r].to_vec() })
}

/// `(C̄, C_y)` with `C_y = (1/N) Σ y_i C_i` for the standardized labels.
pub fn supervised_moments(bundle: &CovarianceBundle) -> Result<(SymMat, SymMat)> {
    let (mean, std) = mean_std(bundle.labels());
    let scale = if std > 0.0 { 1.0 / std } else { 0.0 };
    let p = bundle.dim();
    let n = bundle.len() as f64;
    let mut c_y = DMatrix::zeros(p, p);
    for (c, &y) in bundle.matrices().iter().zip(bundle.labels()) {
        c_y += c.as_matrix() * ((y - mean) * scale);
    }
    Ok((SymMat::arithmetic_mean(bundle.matrices())?, SymMat::new(c_y / n)?))
}

/// PCA down to the numerical rank of `C̄` when needed, then SPoC in that
/// subspace; the composed `P×r` filter is returned.
pub fn fit_supervised_reduced(bundle: &CovarianceBundle, r: usize) -> Result<SpatialFilter> {
    let mean = SymMat::arithmetic_mean(bundle.matrices())?;
    let rank = mean.numerical_rank()?;
    if rank == bundle.dim() {
        return fit_supervised(bundle, r);
    }
    if r > rank {
        return Err(Error::RankTooLarge { requested: r, available: rank });
    }
    let pca = fit_unsupervised(bundle, rank)?;
    let reduced = pca.apply(bundle)?;
    let spoc = fit_supervised(&reduced, r)?;
    Ok(SpatialFilter { w: &pca.w * &spoc.w, kind: FilterKind::Supervised, metadata: spoc.metadata })
}

/// Tikhonov inverse `Gᵀ(GGᵀ + λI)^{-1}` stored transposed as a `P×Q` filter.
pub fn fit_mne(lead: &Leadfield, lambda: f64) -> Result<SpatialFilter> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("MNE regularization must be positive, got {lambda}")));
    }
    let g = lead.matrix();
    let p = g.nrows();
    let gram = g * g.transpose() + DMatrix::identity(p, p) * lambda;
    let chol = gram.cholesky().ok_or(Error::NumericalFailure { iterations: 0 })?;
    Ok(SpatialFilter { w: chol.solve(g), kind: FilterKind::Mne, metadata: vec![lambda] })
}
