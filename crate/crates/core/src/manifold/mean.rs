use nalgebra::DMatrix;

use super::tangent::{factorize, procrustes, top_factor, FactorMat};
use crate::error::{Error, Result};
use crate::symmat::SymMat;

/// Iteration controls for the Fréchet mean solvers.
///
/// `tol` is a multiplier: the geometric mean stops once the summed tangent
/// gradient has Frobenius norm below `tol · P`, the Wasserstein mean once the
/// averaged factor-space gradient is below `tol · √(P·R)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl MeanOptions {
    /// Convergence is linear; widely dispersed sets of 50+ matrices need
    /// 150 or more iterations.
    pub const GEOMETRIC: MeanOptions = MeanOptions { max_iter: 500, tol: 1e-9 };
    pub const WASSERSTEIN: MeanOptions = MeanOptions { max_iter: 300, tol: 1e-7 };
}

/// Convergence diagnostics returned by the `*_with` variants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanReport {
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Karcher mean under the affine-invariant metric.
pub fn mean_geometric(set: &[SymMat]) -> Result<SymMat> {
    mean_geometric_with(set, MeanOptions::GEOMETRIC).map(|(m, _)| m)
}

struct GeometricState {
    mean: SymMat,
    /// `Σ_i log(M^{-1/2} C_i M^{-1/2})`
    log_sum: DMatrix<f64>,
    objective: f64,
}

fn geometric_state(mean: SymMat, set: &[SymMat]) -> Result<GeometricState> {
    let w = mean.inv_sqrt()?;
    let p = mean.dim();
    let mut log_sum = DMatrix::zeros(p, p);
    let mut objective = 0.0;
    for c in set {
        let l = w.sandwich(c)?.log()?;
        objective += l.as_matrix().norm_squared();
        log_sum += l.as_matrix();
    }
    Ok(GeometricState { mean, log_sum, objective })
}

/// Fixed-point iteration `M ← M^{1/2} exp(step · mean_i log(M^{-1/2} C_i M^{-1/2})) M^{1/2}`
/// started at the arithmetic mean, halving the step whenever the objective increases.
pub fn mean_geometric_with(set: &[SymMat], opts: MeanOptions) -> Result<(SymMat, MeanReport)> {
    let start = SymMat::arithmetic_mean(set)?;
    let p = start.dim();
    let n = set.len() as f64;
    let tol = opts.tol * p as f64;
    let mut state = geometric_state(start, set)?;
    for iterations in 0..=opts.max_iter {
        let gradient_norm = state.log_sum.norm();
        if gradient_norm <= tol {
            return Ok((state.mean, MeanReport { iterations, gradient_norm }));
        }
        if iterations == opts.max_iter {
            break;
        }
        let root = state.mean.sqrt()?;
        let mut step = 1.0;
        loop {
            let direction = SymMat::new(&state.log_sum * (step / n))?;
            let candidate = root.sandwich(&direction.exp()?)?;
            let next = geometric_state(candidate, set)?;
            // near the minimum the objective change drowns in round-off for
            // ill-conditioned sets, so a shrinking gradient also counts as progress
            if next.objective <= state.objective * (1.0 + 1e-10) || next.log_sum.norm() < gradient_norm {
                state = next;
                break;
            }
            step *= 0.5;
            if step < 1e-12 {
                return Err(Error::NoConvergence { what: "geometric mean", iterations, gradient_norm });
            }
        }
    }
    Err(Error::NoConvergence { what: "geometric mean", iterations: opts.max_iter, gradient_norm: state.log_sum.norm() })
}

/// Wasserstein (Bures) barycenter of rank-`r` PSD matrices.
pub fn mean_wasserstein(set: &[SymMat], r: usize) -> Result<SymMat> {
    mean_wasserstein_with(set, r, MeanOptions::WASSERSTEIN).map(|(m, _)| m.gram())
}

struct WassersteinState {
    y: FactorMat,
    /// mean of the log maps, i.e. the negative gradient of the objective
    direction: DMatrix<f64>,
    /// `(1/2N) Σ_i d_W²(Y Yᵀ, C_i)`
    objective: f64,
}

fn wasserstein_state(y: FactorMat, factors: &[FactorMat]) -> Result<WassersteinState> {
    let mut direction = DMatrix::zeros(y.dim(), y.rank());
    let mut objective = 0.0;
    for f in factors {
        let log = f.matrix() * procrustes(&y, f)? - y.matrix();
        objective += log.norm_squared();
        direction += log;
    }
    let n = factors.len() as f64;
    Ok(WassersteinState { y, direction: direction / n, objective: objective / (2.0 * n) })
}

/// Gradient descent on the factor `Y ∈ R^{P×R}` minimizing `Σ_i d_W²(Y Yᵀ, C_i)`,
/// with Armijo backtracking, started from the top-`r` factor of the
/// arithmetic mean. Returns the factor of the barycenter.
pub fn mean_wasserstein_with(set: &[SymMat], r: usize, opts: MeanOptions) -> Result<(FactorMat, MeanReport)> {
    const ARMIJO_C: f64 = 1e-4;
    let start = SymMat::arithmetic_mean(set)?;
    let p = start.dim();
    if r == 0 || r > p {
        return Err(Error::InvalidInput(format!("rank {r} must lie in 1..={p}")));
    }
    let factors = set.iter().map(|c| factorize(c, r)).collect::<Result<Vec<_>>>()?;
    let tol = opts.tol * ((p * r) as f64).sqrt();
    let mut state = wasserstein_state(top_factor(&start.eigh()?, r), &factors)?;
    for iterations in 0..=opts.max_iter {
        let gradient_norm = state.direction.norm();
        if gradient_norm <= tol {
            return Ok((state.y, MeanReport { iterations, gradient_norm }));
        }
        if iterations == opts.max_iter {
            break;
        }
        let mut step = 1.0;
        loop {
            let candidate = FactorMat::new(state.y.matrix() + &state.direction * step)?;
            let next = wasserstein_state(candidate, &factors)?;
            let bound = state.objective - ARMIJO_C * step * gradient_norm * gradient_norm;
            if next.objective <= bound + 1e-14 * state.objective {
                state = next;
                break;
            }
            step *= 0.5;
            if step < 1e-10 {
                return Err(Error::NoConvergence { what: "wasserstein mean", iterations, gradient_norm });
            }
        }
    }
    Err(Error::NoConvergence {
        what: "wasserstein mean",
        iterations: opts.max_iter,
        gradient_norm: state.direction.norm(),
    })
}
