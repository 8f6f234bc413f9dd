//! Dense symmetric matrices and the eigendecomposition-backed kernels the
//! rest of the crate is written against.
//!
//! Every matrix function here goes through [`SymMat::eigh`]: `f(S) = U f(Λ) Uᵀ`.
//! Positivity and rank decisions all use the same relative threshold
//! [`RANK_TOL`] against the largest eigenvalue magnitude.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative eigenvalue threshold for rank and positivity decisions.
pub const RANK_TOL: f64 = 1e-12;

const EIG_EPS: f64 = 1e-15;
const MAX_SWEEPS: usize = 10_000;
const JACOBI_SWEEPS: usize = 100;

/// Symmetric `P×P` matrix. Construction symmetrizes the input as `(M + Mᵀ)/2`.
#[derive(Clone, PartialEq)]
pub struct SymMat {
    data: DMatrix<f64>,
}

/// Eigenvalues sorted descending with their eigenvectors as columns.
///
/// In each eigenvector the entry of largest magnitude is nonnegative.
#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

/// Thin SVD `m = U diag(Σ) Vᵀ` with singular values descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

/// Scalar functions that can be lifted to symmetric matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SymFn {
    Log,
    Exp,
    Sqrt,
    InvSqrt,
    Inv,
}

impl SymMat {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::dims("square matrix", format!("{}x{}", m.nrows(), m.ncols())));
        }
        if m.nrows() == 0 {
            return Err(Error::InvalidInput("matrix dimension must be at least 1".into()));
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(SymMat { data: sym })
    }

    pub fn from_row_slice(p: usize, values: &[f64]) -> Result<Self> {
        if values.len() != p * p {
            return Err(Error::dims(p * p, values.len()));
        }
        Self::new(DMatrix::from_row_slice(p, p, values))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn identity(p: usize) -> Self {
        SymMat { data: DMatrix::identity(p, p) }
    }

    pub fn zeros(p: usize) -> Self {
        SymMat { data: DMatrix::zeros(p, p) }
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[(i, j)]
    }

    pub fn diagonal(&self) -> DVector<f64> {
        self.data.diagonal()
    }

    pub fn trace(&self) -> f64 {
        self.data.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.norm()
    }

    /// `Wᵀ S W` for a `P×R` matrix `W`.
    pub fn congruence(&self, w: &DMatrix<f64>) -> Result<SymMat> {
        if w.nrows() != self.dim() {
            return Err(Error::dims(format!("{} rows", self.dim()), format!("{} rows", w.nrows())));
        }
        SymMat::new(w.transpose() * &self.data * w)
    }

    /// `S₁ S₂ S₁` for two symmetric matrices, symmetrized.
    pub fn sandwich(&self, inner: &SymMat) -> Result<SymMat> {
        if inner.dim() != self.dim() {
            return Err(Error::dims(self.dim(), inner.dim()));
        }
        SymMat::new(&self.data * &inner.data * &self.data)
    }

    pub fn scale(&self, factor: f64) -> SymMat {
        SymMat { data: &self.data * factor }
    }

    /// Arithmetic mean of a nonempty set of same-sized matrices.
    pub fn arithmetic_mean(set: &[SymMat]) -> Result<SymMat> {
        let first = set.first().ok_or_else(|| Error::InvalidInput("mean of an empty set".into()))?;
        let p = first.dim();
        let mut acc = DMatrix::zeros(p, p);
        for s in set {
            if s.dim() != p {
                return Err(Error::dims(p, s.dim()));
            }
            acc += &s.data;
        }
        SymMat::new(acc / set.len() as f64)
    }

    pub fn eigh(&self) -> Result<EigenPairs> {
        let eig = self
            .data
            .clone()
            .try_symmetric_eigen(EIG_EPS, MAX_SWEEPS)
            .ok_or(Error::NumericalFailure { iterations: MAX_SWEEPS })?;
        let p = self.dim();
        let mut order: Vec<usize> = (0..p).collect();
        // stable sort keeps the original order among equal eigenvalues
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = DVector::from_iterator(p, order.iter().map(|&k| eig.eigenvalues[k]));
        let mut vectors = DMatrix::zeros(p, p);
        for (dst, &src) in order.iter().enumerate() {
            let mut col = eig.eigenvectors.column(src).clone_owned();
            apply_sign_convention(&mut col);
            vectors.set_column(dst, &col);
        }
        Ok(EigenPairs { values, vectors })
    }

    /// `U diag(f(λ)) Uᵀ`.
    pub fn apply(&self, func: SymFn) -> Result<SymMat> {
        let eig = self.eigh()?;
        let transformed = match func {
            SymFn::Exp => eig.values.map(f64::exp),
            SymFn::Sqrt => eig.clipped_nonnegative()?.map(f64::sqrt),
            SymFn::Log | SymFn::InvSqrt | SymFn::Inv => {
                eig.require_positive()?;
                match func {
                    SymFn::Log => eig.values.map(f64::ln),
                    SymFn::InvSqrt => eig.values.map(|l| 1.0 / l.sqrt()),
                    _ => eig.values.map(|l| 1.0 / l),
                }
            }
        };
        Ok(eig.recompose(&transformed))
    }

    pub fn log(&self) -> Result<SymMat> {
        self.apply(SymFn::Log)
    }

    pub fn exp(&self) -> Result<SymMat> {
        self.apply(SymFn::Exp)
    }

    pub fn sqrt(&self) -> Result<SymMat> {
        self.apply(SymFn::Sqrt)
    }

    pub fn inv_sqrt(&self) -> Result<SymMat> {
        self.apply(SymFn::InvSqrt)
    }

    pub fn inv(&self) -> Result<SymMat> {
        self.apply(SymFn::Inv)
    }

    /// Number of eigenvalues above `RANK_TOL · λ_max`.
    pub fn numerical_rank(&self) -> Result<usize> {
        let eig = self.eigh()?;
        eig.check_psd()?;
        Ok(eig.rank())
    }
}

impl EigenPairs {
    fn scale(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    fn threshold(&self) -> f64 {
        RANK_TOL * self.scale()
    }

    pub(crate) fn check_psd(&self) -> Result<()> {
        let min = self.values.min();
        if min < -self.threshold() {
            return Err(Error::NotPsd { min_eigenvalue: min });
        }
        Ok(())
    }

    pub(crate) fn rank(&self) -> usize {
        let thr = self.threshold();
        self.values.iter().filter(|&&v| v > thr).count()
    }

    fn require_positive(&self) -> Result<()> {
        let min = self.values.min();
        let threshold = self.threshold();
        if !(min > threshold) {
            return Err(Error::SingularMatrix { min_eigenvalue: min, threshold });
        }
        Ok(())
    }

    /// Eigenvalues with everything within `RANK_TOL · λ_max` of zero set to
    /// zero; errors on genuinely negative ones. Square roots of the cleared
    /// round-off would otherwise surface at the `1e-8` level.
    pub(crate) fn clipped_nonnegative(&self) -> Result<DVector<f64>> {
        self.check_psd()?;
        let thr = self.threshold();
        Ok(self.values.map(|v| if v > thr { v } else { 0.0 }))
    }

    pub fn recompose(&self, values: &DVector<f64>) -> SymMat {
        let scaled =
            DMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| self.vectors[(i, j)] * values[j]);
        let data = &scaled * self.vectors.transpose();
        SymMat { data: (&data + data.transpose()) * 0.5 }
    }
}

fn apply_sign_convention(col: &mut DVector<f64>) {
    let mut best = 0usize;
    for k in 1..col.len() {
        if col[k].abs() > col[best].abs() {
            best = k;
        }
    }
    if col[best] < 0.0 {
        col.neg_mut();
    }
}

/// Thin SVD of a rectangular matrix, singular values descending.
///
/// One-sided Jacobi: accurate to working precision relative to each singular
/// value. nalgebra's bidiagonal SVD can lose accuracy on some well-conditioned
/// inputs, which breaks Procrustes alignment.
pub fn svd_rect(m: &DMatrix<f64>) -> Result<Svd> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    if m.nrows() < m.ncols() {
        let t = svd_rect(&m.transpose())?;
        return Ok(Svd { u: t.v, singular_values: t.singular_values, v: t.u });
    }
    let (rows, k) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(k, k);
    let threshold = rows as f64 * f64::EPSILON;
    let mut converged = k < 2;
    for _ in 0..JACOBI_SWEEPS {
        if converged {
            break;
        }
        converged = true;
        for i in 0..k {
            for j in i + 1..k {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma == 0.0 || gamma.abs() <= threshold * (alpha * beta).sqrt() {
                    continue;
                }
                converged = false;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut a, i, j, c, s);
                rotate_columns(&mut v, i, j, c, s);
            }
        }
    }
    if !converged {
        return Err(Error::NumericalFailure { iterations: JACOBI_SWEEPS });
    }
    let norms: Vec<f64> = (0..k).map(|c| a.column(c).norm()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let singular_values = DVector::from_iterator(k, order.iter().map(|&c| norms[c]));
    let v = DMatrix::from_fn(k, k, |r, c| v[(r, order[c])]);
    let floor = singular_values[0] * f64::EPSILON * rows as f64;
    let mut u = DMatrix::zeros(rows, k);
    for (c, &src) in order.iter().enumerate() {
        if norms[src] > floor {
            u.set_column(c, &(a.column(src) / norms[src]));
        } else {
            u.set_column(c, &orthogonal_complement_vector(&u, c));
        }
    }
    Ok(Svd { u, singular_values, v })
}

fn rotate_columns(m: &mut DMatrix<f64>, i: usize, j: usize, c: f64, s: f64) {
    for r in 0..m.nrows() {
        let (x, y) = (m[(r, i)], m[(r, j)]);
        m[(r, i)] = c * x - s * y;
        m[(r, j)] = s * x + c * y;
    }
}

/// Unit vector orthogonal to the first `filled` columns of `u`.
fn orthogonal_complement_vector(u: &DMatrix<f64>, filled: usize) -> DVector<f64> {
    let rows = u.nrows();
    let mut best = DVector::zeros(rows);
    for e in 0..rows {
        let mut w = DVector::zeros(rows);
        w[e] = 1.0;
        for _ in 0..2 {
            for c in 0..filled {
                let proj = u.column(c).dot(&w);
                w -= u.column(c) * proj;
            }
        }
        if w.norm() > best.norm() {
            best = w;
        }
    }
    let n = best.norm();
    best / n
}

impl fmt::Debug for SymMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymMat{}", self.data)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_sym(p: usize, seed: u64) -> SymMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(p, p, |_, _| rng.random_range(-1.0..1.0));
        SymMat::new(m).unwrap()
    }

    fn random_spd(p: usize, seed: u64) -> SymMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(p, p + 3, |_, _| rng.random_range(-1.0..1.0));
        SymMat::new(&x * x.transpose() + DMatrix::identity(p, p) * 0.1).unwrap()
    }

    #[test]
    fn construction_symmetrizes() {
        let s = SymMat::from_row_slice(2, &[1.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(s.get(0, 1), 3.0);
        assert_eq!(s.get(1, 0), 3.0);
        assert!(SymMat::new(DMatrix::zeros(2, 3)).is_err());
        assert!(SymMat::new(DMatrix::zeros(0, 0)).is_err());
    }

    #[test]
    fn eigh_identity() {
        let e = SymMat::identity(3).eigh().unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 1.0, 1.0]);
        assert!((&e.vectors - DMatrix::<f64>::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn eigh_diagonal_sorts_descending() {
        let e = SymMat::from_diagonal(&[2.0, 5.0]).unwrap().eigh().unwrap();
        assert_eq!(e.values.as_slice(), &[5.0, 2.0]);
        let perm = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        assert!((&e.vectors - perm).norm() < 1e-14);
    }

    #[test]
    fn eigh_reconstructs_random() {
        let s = random_sym(6, 7);
        let e = s.eigh().unwrap();
        let rebuilt = &e.vectors * DMatrix::from_diagonal(&e.values) * e.vectors.transpose();
        assert!((rebuilt - s.as_matrix()).norm() < 1e-10 * s.frobenius_norm().max(1.0));
        let gram = e.vectors.transpose() * &e.vectors;
        assert!((gram - DMatrix::<f64>::identity(6, 6)).norm() < 1e-10);
        for w in e.values.as_slice().windows(2) {
            assert!(w[0] >= w[1]);
        }
        for c in 0..6 {
            let col = e.vectors.column(c);
            let big = col.iter().copied().fold(0.0_f64, |m, v| if v.abs() > m.abs() { v } else { m });
            assert!(big >= 0.0);
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        let l = SymMat::identity(4).log().unwrap();
        assert!(l.frobenius_norm() < 1e-15);
    }

    #[test]
    fn sqrt_of_diagonal() {
        let r = SymMat::from_diagonal(&[4.0, 9.0]).unwrap().sqrt().unwrap();
        assert!((r.get(0, 0) - 2.0).abs() < 1e-14);
        assert!((r.get(1, 1) - 3.0).abs() < 1e-14);
        assert!(r.get(0, 1).abs() < 1e-15);
    }

    #[test]
    fn exp_log_round_trip() {
        let s = random_spd(5, 11);
        let back = s.log().unwrap().exp().unwrap();
        assert!((back.as_matrix() - s.as_matrix()).norm() < 1e-8 * s.frobenius_norm());
    }

    #[test]
    fn sqrt_squares_back_and_inv_sqrt_whitens() {
        let s = random_spd(5, 3);
        let r = s.sqrt().unwrap();
        let sq = r.as_matrix() * r.as_matrix();
        assert!((sq - s.as_matrix()).norm() < 1e-8 * s.frobenius_norm());
        let w = s.inv_sqrt().unwrap();
        let white = w.as_matrix() * s.as_matrix() * w.as_matrix();
        assert!((white - DMatrix::<f64>::identity(5, 5)).norm() < 1e-8);
        let inv = s.inv().unwrap();
        assert!((inv.as_matrix() * s.as_matrix() - DMatrix::<f64>::identity(5, 5)).norm() < 1e-8);
    }

    #[test]
    fn log_rejects_singular() {
        let s = SymMat::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(s.log(), Err(Error::SingularMatrix { .. })));
        assert!(matches!(s.inv_sqrt(), Err(Error::SingularMatrix { .. })));
        // sqrt tolerates the zero eigenvalue
        assert!(s.sqrt().is_ok());
    }

    #[test]
    fn sqrt_clips_roundoff_but_rejects_negative() {
        let tiny = SymMat::from_diagonal(&[1.0, -1e-14]).unwrap();
        let r = tiny.sqrt().unwrap();
        assert_eq!(r.get(1, 1), 0.0);
        let neg = SymMat::from_diagonal(&[1.0, -1e-3]).unwrap();
        assert!(matches!(neg.sqrt(), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn numerical_rank_cases() {
        assert_eq!(SymMat::zeros(4).numerical_rank().unwrap(), 0);
        assert_eq!(SymMat::from_diagonal(&[1.0, 1.0, 1e-16]).unwrap().numerical_rank().unwrap(), 2);
        assert_eq!(random_spd(5, 2).numerical_rank().unwrap(), 5);
        let neg = SymMat::from_diagonal(&[1.0, -0.5]).unwrap();
        assert!(matches!(neg.numerical_rank(), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn svd_identity_and_rank_one() {
        let s = svd_rect(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(s.singular_values.as_slice(), &[1.0, 1.0, 1.0]);

        // ‖u‖ = 2, ‖v‖ = 3 → single singular value 6
        let u = DVector::from_column_slice(&[2.0, 0.0, 0.0]);
        let v = DVector::from_column_slice(&[0.0, 3.0 / 2f64.sqrt(), 3.0 / 2f64.sqrt()]);
        let m = &u * v.transpose();
        let s = svd_rect(&m).unwrap();
        assert!((s.singular_values[0] - 6.0).abs() < 1e-12);
        assert!(s.singular_values[1].abs() < 1e-12);
        assert!(s.singular_values[2].abs() < 1e-12);
    }

    #[test]
    fn svd_is_accurate_where_bidiagonal_svd_is_not() {
        #[rustfmt::skip]
        let m = DMatrix::from_row_slice(4, 4, &[
            6.916006233465946, -0.037926867358723415, 0.036939049390755124, -0.0013333149772374146,
            -0.0065656601318986145, -0.013658366491917644, 0.02433855844574996, 0.12223981408520457,
            -0.01621516520712358, 0.05057922223049102, 0.10065187254972813, -0.011161321672831598,
            0.02333098713170952, 0.0966658402716761, -0.03048089218007397, 0.00903279771519581,
        ]);
        let s = svd_rect(&m).unwrap();
        let rebuilt = &s.u * DMatrix::from_diagonal(&s.singular_values) * s.v.transpose();
        assert!((rebuilt - &m).norm() < 1e-14 * m.norm());
        let eye = DMatrix::<f64>::identity(4, 4);
        assert!((s.u.transpose() * &s.u - &eye).norm() < 1e-14);
        assert!((s.v.transpose() * &s.v - &eye).norm() < 1e-14);
    }

    #[test]
    fn svd_of_wide_and_singular_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let wide = DMatrix::from_fn(2, 6, |_, _| rng.random_range(-1.0..1.0f64));
        let s = svd_rect(&wide).unwrap();
        assert_eq!((s.u.shape(), s.v.shape()), ((2, 2), (6, 2)));
        let rebuilt = &s.u * DMatrix::from_diagonal(&s.singular_values) * s.v.transpose();
        assert!((rebuilt - &wide).norm() < 1e-13 * wide.norm());

        let square = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0f64));
        let singular = &square * square.transpose();
        let s = svd_rect(&singular).unwrap();
        assert!(s.singular_values[2] < 1e-14 && s.singular_values[3] < 1e-14);
        let eye = DMatrix::<f64>::identity(4, 4);
        assert!((s.u.transpose() * &s.u - &eye).norm() < 1e-13);
        assert!((s.v.transpose() * &s.v - &eye).norm() < 1e-13);
    }

    #[test]
    fn svd_converges_across_shapes_ranks_and_scales() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..2000 {
            let (rows, cols) = (1 + trial % 7, 1 + (trial / 7) % 7);
            let rank = 1 + trial % rows.min(cols);
            let l = DMatrix::from_fn(rows, rank, |_, _| rng.random_range(-1.0..1.0f64));
            let r = DMatrix::from_fn(rank, cols, |_, _| rng.random_range(-1.0..1.0f64));
            let m = l * r * 10f64.powi(trial as i32 % 13 - 6);
            let s = svd_rect(&m).unwrap();
            let rebuilt = &s.u * DMatrix::from_diagonal(&s.singular_values) * s.v.transpose();
            assert!((rebuilt - &m).norm() <= 1e-13 * m.norm(), "trial {trial}");
            let k = rows.min(cols);
            assert!((s.u.transpose() * &s.u - DMatrix::<f64>::identity(k, k)).norm() < 1e-12, "trial {trial}");
            assert!((s.v.transpose() * &s.v - DMatrix::<f64>::identity(k, k)).norm() < 1e-12, "trial {trial}");
        }
    }

    #[test]
    fn svd_reconstructs_rectangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = DMatrix::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0));
        let s = svd_rect(&m).unwrap();
        assert_eq!(s.u.shape(), (4, 2));
        assert_eq!(s.v.shape(), (2, 2));
        let rebuilt = &s.u * DMatrix::from_diagonal(&s.singular_values) * s.v.transpose();
        assert!((rebuilt - &m).norm() < 1e-10 * m.norm().max(1.0));
        assert!(s.singular_values[0] >= s.singular_values[1]);
        assert!(s.singular_values[1] >= 0.0);
    }
}
