use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::symmat::{svd_rect, SymMat};

/// Factor `Y ∈ R^{P×R}` of rank `R` representing `Y Yᵀ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FactorMat {
    y: DMatrix<f64>,
}

impl FactorMat {
    pub fn new(y: DMatrix<f64>) -> Result<Self> {
        if y.ncols() == 0 || y.nrows() < y.ncols() {
            return Err(Error::dims("P×R with 1 ≤ R ≤ P", format!("{}x{}", y.nrows(), y.ncols())));
        }
        Ok(FactorMat { y })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.y.nrows()
    }

    pub fn rank(&self) -> usize {
        self.y.ncols()
    }

    /// `Y Yᵀ`.
    pub fn gram(&self) -> SymMat {
        SymMat::new(&self.y * self.y.transpose()).expect("finite factor")
    }
}

/// Upper triangle flattened row-major, off-diagonal entries weighted by √2.
///
/// The weights make the map an isometry from Frobenius to ℓ₂.
pub fn upper(m: &SymMat) -> DVector<f64> {
    let p = m.dim();
    let mut out = Vec::with_capacity(p * (p + 1) / 2);
    for i in 0..p {
        out.push(m.get(i, i));
        for j in i + 1..p {
            out.push(SQRT_2 * m.get(i, j));
        }
    }
    DVector::from_vec(out)
}

/// Riemannian logarithm `S^{1/2} log(S^{-1/2} T S^{-1/2}) S^{1/2}` at `base`.
pub fn log_geometric(base: &SymMat, s: &SymMat) -> Result<SymMat> {
    let root = base.sqrt()?;
    let whitened = base.inv_sqrt()?.sandwich(s)?;
    root.sandwich(&whitened.log()?)
}

/// `Upper(log(B^{-1/2} S B^{-1/2}))`; its norm equals `dist_geometric(base, s)`.
pub fn vec_geometric(base: &SymMat, s: &SymMat) -> Result<DVector<f64>> {
    let w = base.inv_sqrt()?;
    vec_geometric_whitened(&w, s)
}

pub(crate) fn vec_geometric_whitened(base_inv_sqrt: &SymMat, s: &SymMat) -> Result<DVector<f64>> {
    Ok(upper(&base_inv_sqrt.sandwich(s)?.log()?))
}

/// `Y = U_r diag(√λ_r)` from the top `r` eigenpairs. Requires numerical rank `r`.
pub fn factorize(s: &SymMat, r: usize) -> Result<FactorMat> {
    let eig = s.eigh()?;
    eig.check_psd()?;
    let found = eig.rank();
    if found != r {
        return Err(Error::RankMismatch { expected: r, found });
    }
    Ok(top_factor(&eig, r))
}

/// Top-`r` eigen-factor without the rank check (negative eigenvalues clipped).
pub(crate) fn top_factor(eig: &crate::symmat::EigenPairs, r: usize) -> FactorMat {
    let p = eig.vectors.nrows();
    let y = DMatrix::from_fn(p, r, |i, j| eig.vectors[(i, j)] * eig.values[j].max(0.0).sqrt());
    FactorMat { y }
}

/// Orthogonal `Q* = V Uᵀ` aligning `s` onto `base`, where `U Σ Vᵀ = Yᵀ Y'`.
pub(crate) fn procrustes(base: &FactorMat, s: &FactorMat) -> Result<DMatrix<f64>> {
    let svd = svd_rect(&(base.y.transpose() * &s.y))?;
    Ok(&svd.v * svd.u.transpose())
}

/// Wasserstein logarithm in factor space: `Y' Q* − Y`.
pub fn log_wasserstein(base: &FactorMat, s: &FactorMat) -> Result<DMatrix<f64>> {
    if base.y.shape() != s.y.shape() {
        return Err(Error::dims(format!("{}x{}", base.dim(), base.rank()), format!("{}x{}", s.dim(), s.rank())));
    }
    let q = procrustes(base, s)?;
    Ok(&s.y * q - &base.y)
}

/// Row-major flattening of [`log_wasserstein`].
pub fn vec_wasserstein(base: &FactorMat, s: &FactorMat) -> Result<DVector<f64>> {
    let log = log_wasserstein(base, s)?;
    Ok(DVector::from_iterator(
        log.len(),
        (0..log.nrows()).flat_map(|i| (0..log.ncols()).map(move |j| (i, j))).map(|ij| log[ij]),
    ))
}

/// `Upper(S)`: a Frobenius isometry.
pub fn vec_euclidean(s: &SymMat) -> DVector<f64> {
    upper(s)
}

/// Elementwise log of the diagonal.
pub fn vec_logdiag(s: &SymMat) -> Result<DVector<f64>> {
    let d = s.diagonal();
    if let Some((index, &value)) = d.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
        return Err(Error::NonPositiveDiagonal { index, value });
    }
    Ok(d.map(f64::ln))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{dist_geometric, dist_wasserstein};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(p: usize, rng: &mut ChaCha8Rng) -> SymMat {
        let x = DMatrix::from_fn(p, p + 2, |_, _| rng.random_range(-1.0..1.0));
        SymMat::new(&x * x.transpose() + DMatrix::identity(p, p) * 0.05).unwrap()
    }

    fn random_low_rank(p: usize, r: usize, rng: &mut ChaCha8Rng) -> SymMat {
        let x = DMatrix::from_fn(p, r, |_, _| rng.random_range(-1.0..1.0));
        SymMat::new(&x * x.transpose()).unwrap()
    }

    #[test]
    fn log_geometric_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = random_spd(3, &mut rng);
        assert!(log_geometric(&s, &s).unwrap().frobenius_norm() < 1e-12);

        let e = 1f64.exp();
        let l = log_geometric(&SymMat::identity(2), &SymMat::from_diagonal(&[e, e * e]).unwrap()).unwrap();
        assert!((l.as_matrix() - DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 2.0]))).norm() < 1e-12);
    }

    #[test]
    fn log_geometric_exp_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let base = random_spd(5, &mut rng);
        let s = random_spd(5, &mut rng);
        let log = log_geometric(&base, &s).unwrap();
        let w = base.inv_sqrt().unwrap();
        let back = base.sqrt().unwrap().sandwich(&w.sandwich(&log).unwrap().exp().unwrap()).unwrap();
        assert!((back.as_matrix() - s.as_matrix()).norm() < 1e-8 * s.frobenius_norm());
    }

    #[test]
    fn vec_geometric_cases() {
        let v = vec_geometric(&SymMat::identity(2), &SymMat::identity(2)).unwrap();
        assert_eq!(v.as_slice(), &[0.0, 0.0, 0.0]);
        let e = 1f64.exp();
        let v = vec_geometric(&SymMat::identity(2), &SymMat::from_diagonal(&[e, 1.0]).unwrap()).unwrap();
        assert!((v - DVector::from_vec(vec![1.0, 0.0, 0.0])).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let base = random_spd(4, &mut rng);
        let s = random_spd(4, &mut rng);
        let v = vec_geometric(&base, &s).unwrap();
        assert_eq!(v.len(), 10);
        assert!((v.norm() - dist_geometric(&base, &s).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn factorize_cases() {
        let y = factorize(&SymMat::from_diagonal(&[4.0, 0.0]).unwrap(), 1).unwrap();
        assert!((y.matrix() - DMatrix::from_column_slice(2, 1, &[2.0, 0.0])).norm() < 1e-14);

        let y = factorize(&SymMat::identity(3), 3).unwrap();
        assert!((y.matrix() - DMatrix::<f64>::identity(3, 3)).norm() < 1e-14);

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let s = random_low_rank(5, 2, &mut rng);
        let y = factorize(&s, 2).unwrap();
        assert!((y.gram().as_matrix() - s.as_matrix()).norm() < 1e-8 * s.frobenius_norm());
        assert!(matches!(factorize(&s, 3), Err(Error::RankMismatch { expected: 3, found: 2 })));
    }

    #[test]
    fn log_wasserstein_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let y = FactorMat::new(DMatrix::from_fn(4, 2, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        assert!(log_wasserstein(&y, &y).unwrap().norm() < 1e-12);

        let a = FactorMat::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let b = FactorMat::new(DMatrix::from_column_slice(2, 1, &[2.0, 0.0])).unwrap();
        let log = log_wasserstein(&a, &b).unwrap();
        assert!((&log - DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).norm() < 1e-14);
        let d = dist_wasserstein(&a.gram(), &b.gram()).unwrap();
        assert!((log.norm() - d).abs() < 1e-12);
        let v = vec_wasserstein(&a, &b).unwrap();
        assert!((v - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-14);

        let other = FactorMat::new(DMatrix::zeros(3, 1)).unwrap();
        assert!(matches!(log_wasserstein(&a, &other), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn log_wasserstein_norm_matches_distance_full_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = random_spd(3, &mut rng);
        let t = random_spd(3, &mut rng);
        let (ys, yt) = (factorize(&s, 3).unwrap(), factorize(&t, 3).unwrap());
        let log = log_wasserstein(&ys, &yt).unwrap();
        assert!((log.norm() - dist_wasserstein(&s, &t).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn vec_wasserstein_shape_and_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = factorize(&random_low_rank(5, 3, &mut rng), 3).unwrap();
        let b = factorize(&random_low_rank(5, 3, &mut rng), 3).unwrap();
        let v = vec_wasserstein(&a, &b).unwrap();
        assert_eq!(v.len(), 15);
        let log = log_wasserstein(&a, &b).unwrap();
        assert_eq!(v[1], log[(0, 1)]);
        assert_eq!(v[3], log[(1, 0)]);
        assert!((v.norm() - log.norm()).abs() < 1e-15);
        assert!(vec_wasserstein(&a, &a).unwrap().norm() < 1e-12);
    }

    #[test]
    fn euclidean_vectorization() {
        assert_eq!(vec_euclidean(&SymMat::zeros(3)).norm(), 0.0);
        assert_eq!(vec_euclidean(&SymMat::from_diagonal(&[1.0, 2.0]).unwrap()).as_slice(), &[1.0, 0.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let s = random_spd(4, &mut rng);
        let t = random_spd(4, &mut rng);
        let lhs = (vec_euclidean(&s) - vec_euclidean(&t)).norm();
        let rhs = (s.as_matrix() - t.as_matrix()).norm();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn logdiag_cases() {
        assert_eq!(vec_logdiag(&SymMat::identity(3)).unwrap().norm(), 0.0);
        let e = 1f64.exp();
        let v = vec_logdiag(&SymMat::from_diagonal(&[e, e * e]).unwrap()).unwrap();
        assert!((v - DVector::from_vec(vec![1.0, 2.0])).norm() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let s = random_spd(4, &mut rng);
        let v = vec_logdiag(&s).unwrap();
        for i in 0..4 {
            assert_eq!(v[i], s.get(i, i).ln());
        }
        assert!(matches!(
            vec_logdiag(&SymMat::from_diagonal(&[1.0, 0.0]).unwrap()),
            Err(Error::NonPositiveDiagonal { index: 1, .. })
        ));
    }
}
