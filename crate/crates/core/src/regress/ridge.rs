use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::symmat::svd_rect;

/// Columns whose standard deviation falls below this fraction of the largest
/// column standard deviation are treated as constant (scale 1).
const CONSTANT_COLUMN_TOL: f64 = 1e-10;

/// How centered features are scaled before the penalty is applied.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FeatureScaling {
    /// One scale for every column: the root mean column variance. Ridge then
    /// commutes with orthogonal maps of the feature space.
    #[default]
    Isotropic,
    /// Unit variance per column.
    PerColumn,
}

impl FeatureScaling {
    pub fn name(self) -> &'static str {
        match self {
            FeatureScaling::Isotropic => "isotropic",
            FeatureScaling::PerColumn => "columns",
        }
    }
}

impl fmt::Display for FeatureScaling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureScaling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "isotropic" => Ok(FeatureScaling::Isotropic),
            "columns" | "per-column" | "per_column" => Ok(FeatureScaling::PerColumn),
            other => {
                Err(Error::InvalidInput(format!("unknown feature scaling '{other}' (expected isotropic or columns)")))
            }
        }
    }
}

/// `n` values logarithmically spaced over `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| if i == n - 1 { hi } else { 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64) }).collect()
}

/// 100 log-spaced values in `[1e-5, 1e3]`.
pub fn default_ridge_grid() -> Vec<f64> {
    log_grid(1e-5, 1e3, 100)
}

#[derive(Clone, Debug, PartialEq)]
pub struct RidgeModel {
    /// Weights on centered, scaled features.
    pub beta: DVector<f64>,
    /// Prediction for an all-zero raw feature row.
    pub intercept: f64,
    pub lambda_star: f64,
    pub feature_mean: DVector<f64>,
    pub feature_scale: DVector<f64>,
}

impl RidgeModel {
    pub fn n_features(&self) -> usize {
        self.beta.len()
    }

    /// `ŷ = Σ_k β_k x_k / s_k + intercept`, which equals
    /// `standardized(x)·β + mean(y)` on the training target.
    pub fn predict(&self, features: &DMatrix<f64>) -> Result<DVector<f64>> {
        if features.ncols() != self.n_features() {
            return Err(Error::dims(
                format!("{} features", self.n_features()),
                format!("{} features", features.ncols()),
            ));
        }
        let weights = self.beta.component_div(&self.feature_scale);
        Ok((features * weights).add_scalar(self.intercept))
    }
}

/// Centered and scaled design, its column statistics and the centered target.
struct Design {
    x: DMatrix<f64>,
    mean: DVector<f64>,
    scale: DVector<f64>,
    y_mean: f64,
    y: DVector<f64>,
}

fn standardize(x: &DMatrix<f64>, y: &[f64], scaling: FeatureScaling) -> Result<Design> {
    let (n, k) = x.shape();
    if n < 3 {
        return Err(Error::InvalidInput(format!("ridge needs at least 3 samples, got {n}")));
    }
    if k == 0 {
        return Err(Error::InvalidInput("ridge needs at least one feature".into()));
    }
    if y.len() != n {
        return Err(Error::dims(format!("{n} targets"), format!("{} targets", y.len())));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite features or targets".into()));
    }
    let mean = DVector::from_iterator(k, x.column_iter().map(|c| c.mean()));
    let std = DVector::from_iterator(
        k,
        x.column_iter()
            .zip(mean.iter())
            .map(|(c, m)| (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt()),
    );
    let max_std = std.max();
    if !(max_std > 0.0) {
        return Err(Error::DegenerateDesign);
    }
    let scale = match scaling {
        FeatureScaling::Isotropic => {
            let s = (std.norm_squared() / k as f64).sqrt();
            DVector::from_element(k, s)
        }
        FeatureScaling::PerColumn => std.map(|s| if s > CONSTANT_COLUMN_TOL * max_std { s } else { 1.0 }),
    };
    let xs = DMatrix::from_fn(n, k, |i, j| (x[(i, j)] - mean[j]) / scale[j]);
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let yc = DVector::from_iterator(n, y.iter().map(|v| v - y_mean));
    Ok(Design { x: xs, mean, scale, y_mean, y: yc })
}

/// GCV curve evaluated from one SVD of the scaled design.
struct GcvPath {
    n: usize,
    s2: Vec<f64>,
    /// `Uᵀ ỹ`
    uty: Vec<f64>,
    /// `‖(I − UUᵀ) ỹ‖²`
    resid_perp: f64,
    s: Vec<f64>,
    v: DMatrix<f64>,
}

impl GcvPath {
    fn new(design: &Design) -> Result<Self> {
        let svd = svd_rect(&design.x)?;
        let uty = svd.u.transpose() * &design.y;
        let perp = &design.y - &svd.u * &uty;
        Ok(GcvPath {
            n: design.x.nrows(),
            s2: svd.singular_values.iter().map(|s| s * s).collect(),
            s: svd.singular_values.iter().copied().collect(),
            uty: uty.iter().copied().collect(),
            resid_perp: perp.norm_squared(),
            v: svd.v,
        })
    }

    /// `N ‖(I − H_λ) ỹ‖² / Tr(I − H_λ)²`.
    fn gcv(&self, lambda: f64) -> f64 {
        let mut resid = self.resid_perp;
        let mut dof = 0.0;
        for (s2, c) in self.s2.iter().zip(&self.uty) {
            let shrink = s2 / (s2 + lambda);
            resid += ((1.0 - shrink) * c).powi(2);
            dof += shrink;
        }
        let denom = self.n as f64 - dof;
        self.n as f64 * resid / (denom * denom)
    }

    fn beta(&self, lambda: f64) -> DVector<f64> {
        let coef =
            DVector::from_iterator(self.s.len(), self.s.iter().zip(&self.uty).map(|(s, c)| s / (s * s + lambda) * c));
        &self.v * coef
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("ridge grid is empty".into()));
    }
    if grid.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::InvalidInput("ridge grid values must be positive".into()));
    }
    Ok(())
}

/// GCV criterion at every grid value, on scaled features and centered target.
pub fn gcv_curve(x: &DMatrix<f64>, y: &[f64], grid: &[f64], scaling: FeatureScaling) -> Result<Vec<f64>> {
    check_grid(grid)?;
    let design = standardize(x, y, scaling)?;
    let path = GcvPath::new(&design)?;
    Ok(grid.iter().map(|&l| path.gcv(l)).collect())
}

/// Ridge regression with the penalty chosen by generalized cross-validation.
///
/// Ties in the criterion go to the larger λ.
pub fn fit_ridge_gcv(x: &DMatrix<f64>, y: &[f64], grid: &[f64], scaling: FeatureScaling) -> Result<RidgeModel> {
    check_grid(grid)?;
    let design = standardize(x, y, scaling)?;
    let path = GcvPath::new(&design)?;
    let mut best = (f64::INFINITY, grid[0]);
    for &lambda in grid {
        let score = path.gcv(lambda);
        if score < best.0 || (score == best.0 && lambda > best.1) {
            best = (score, lambda);
        }
    }
    let lambda_star = best.1;
    let beta = path.beta(lambda_star);
    let intercept = design.y_mean
        - beta.iter().zip(design.mean.iter().zip(design.scale.iter())).map(|(b, (m, s))| b * m / s).sum::<f64>();
    Ok(RidgeModel { beta, intercept, lambda_star, feature_mean: design.mean, feature_scale: design.scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ISO: FeatureScaling = FeatureScaling::Isotropic;

    #[test]
    fn grid_shape() {
        let g = default_ridge_grid();
        assert_eq!(g.len(), 100);
        assert!((g[0] - 1e-5).abs() < 1e-20);
        assert_eq!(g[99], 1e3);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn noiseless_slope_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3 - 1.0).collect();
        let x = DMatrix::from_column_slice(10, 1, &xs);
        let y: Vec<f64> = xs.iter().map(|v| 2.0 * v).collect();
        let m = fit_ridge_gcv(&x, &y, &[1e-8], ISO).unwrap();
        let slope = m.beta[0] / m.feature_scale[0];
        assert!((slope - 2.0).abs() < 1e-6);
        let pred = m.predict(&x).unwrap();
        let mae = pred.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum::<f64>() / 10.0;
        assert!(mae < 1e-6);
    }

    #[test]
    fn constant_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = DMatrix::from_fn(8, 3, |_, _| rng.random_range(-1.0..1.0));
        let y = vec![4.5; 8];
        let m = fit_ridge_gcv(&x, &y, &default_ridge_grid(), ISO).unwrap();
        assert!(m.beta.norm() < 1e-12);
        assert!((m.intercept - 4.5).abs() < 1e-12);
    }

    #[test]
    fn zero_row_predicts_intercept_and_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = DMatrix::from_fn(12, 3, |_, _| rng.random_range(-1.0..1.0));
        let y: Vec<f64> = (0..12).map(|i| x[(i, 0)] - 0.5 * x[(i, 2)] + 3.0).collect();
        let m = fit_ridge_gcv(&x, &y, &default_ridge_grid(), ISO).unwrap();
        let zero = m.predict(&DMatrix::zeros(1, 3)).unwrap();
        assert_eq!(zero[0], m.intercept);
        let a = DMatrix::from_row_slice(1, 3, &[0.3, -1.0, 2.0]);
        let b = DMatrix::from_row_slice(1, 3, &[1.1, 0.5, -0.2]);
        let lhs = m.predict(&(&a * 2.0 - &b)).unwrap()[0] - m.intercept;
        let rhs = 2.0 * (m.predict(&a).unwrap()[0] - m.intercept) - (m.predict(&b).unwrap()[0] - m.intercept);
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(matches!(m.predict(&DMatrix::zeros(1, 2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let x = DMatrix::from_element(5, 2, 1.0);
        assert!(matches!(fit_ridge_gcv(&x, &[1.0, 2.0, 3.0, 4.0, 5.0], &[1.0], ISO), Err(Error::DegenerateDesign)));
        let x = DMatrix::from_fn(2, 2, |i, j| (i + j) as f64);
        assert!(fit_ridge_gcv(&x, &[1.0, 2.0], &[1.0], ISO).is_err());
        let x = DMatrix::from_fn(4, 2, |i, j| (i * j) as f64);
        assert!(fit_ridge_gcv(&x, &[1.0, 2.0, 3.0, 4.0], &[], ISO).is_err());
        assert!(fit_ridge_gcv(&x, &[1.0, 2.0, 3.0, 4.0], &[-1.0], ISO).is_err());
    }

    #[test]
    fn ties_prefer_larger_lambda() {
        // a constant target makes GCV identical for every λ
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = DMatrix::from_fn(6, 2, |_, _| rng.random_range(-1.0..1.0));
        let m = fit_ridge_gcv(&x, &[1.0; 6], &[0.1, 1.0, 10.0], ISO).unwrap();
        assert_eq!(m.lambda_star, 10.0);
    }

    #[test]
    fn isotropic_scaling_commutes_with_rotations() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = DMatrix::from_fn(30, 4, |_, j| rng.random_range(-1.0..1.0) * (j + 1) as f64);
        let y: Vec<f64> = (0..30).map(|i| x[(i, 0)] + x[(i, 3)] + rng.random_range(-0.3..0.3)).collect();
        let q = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0)).qr().q();
        let xq = &x * &q;
        let grid = default_ridge_grid();
        let a = fit_ridge_gcv(&x, &y, &grid, ISO).unwrap();
        let b = fit_ridge_gcv(&xq, &y, &grid, ISO).unwrap();
        assert_eq!(a.lambda_star, b.lambda_star);
        let gap = (a.predict(&x).unwrap() - b.predict(&xq).unwrap()).amax();
        assert!(gap < 1e-10, "{gap}");
        let per_column = fit_ridge_gcv(&x, &y, &grid, FeatureScaling::PerColumn).unwrap();
        assert!(per_column.feature_scale[0] < per_column.feature_scale[3]);
        assert!(a.feature_scale.iter().all(|s| *s == a.feature_scale[0]));
    }

    #[test]
    fn scaling_names_round_trip() {
        for s in [FeatureScaling::Isotropic, FeatureScaling::PerColumn] {
            assert_eq!(s.name().parse::<FeatureScaling>().unwrap(), s);
        }
        assert!("zscore".parse::<FeatureScaling>().is_err());
    }
}
