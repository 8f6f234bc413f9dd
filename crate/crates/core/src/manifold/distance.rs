use crate::error::{Error, Result};
use crate::symmat::SymMat;

/// Affine-invariant distance `‖log(S^{-1/2} T S^{-1/2})‖_F`.
pub fn dist_geometric(s: &SymMat, t: &SymMat) -> Result<f64> {
    same_dim(s, t)?;
    let w = s.inv_sqrt()?;
    let eig = w.sandwich(t)?.eigh()?;
    let min = eig.values.min();
    let threshold = crate::symmat::RANK_TOL * eig.values.max().abs();
    if !(min > threshold) {
        return Err(Error::SingularMatrix { min_eigenvalue: min, threshold });
    }
    Ok(eig.values.iter().map(|l| l.ln().powi(2)).sum::<f64>().sqrt())
}

/// Bures–Wasserstein distance
/// `[Tr S + Tr T − 2 Tr((S^{1/2} T S^{1/2})^{1/2})]^{1/2}`.
///
/// Both arguments only need to be PSD; their ranks may differ.
pub fn dist_wasserstein(s: &SymMat, t: &SymMat) -> Result<f64> {
    same_dim(s, t)?;
    let root = s.sqrt()?;
    t.numerical_rank()?;
    let inner = root.sandwich(t)?.eigh()?;
    let cross: f64 = inner.clipped_nonnegative()?.iter().map(|v| v.sqrt()).sum();
    let sq = s.trace() + t.trace() - 2.0 * cross;
    Ok(sq.max(0.0).sqrt())
}

fn same_dim(s: &SymMat, t: &SymMat) -> Result<()> {
    if s.dim() != t.dim() {
        return Err(Error::dims(s.dim(), t.dim()));
    }
    Ok(())
}

/// Numerical demonstration that the Wasserstein distance is not invariant
/// under congruence by invertible matrices on rank-deficient inputs.
#[derive(Clone, Debug)]
pub struct Witness {
    pub a: SymMat,
    pub b: SymMat,
    /// `d_W(A, B)`.
    pub base_distance: f64,
    /// `(ε, d_W(W_ε A W_εᵀ, W_ε B W_εᵀ))` with `W_ε = diag(1, ε)`.
    pub table: Vec<(f64, f64)>,
}

pub const WITNESS_EPSILONS: [f64; 4] = [1.0, 0.1, 0.01, 0.001];

/// With `A = [[1,0],[0,0]]` and `B = [[1,1],[1,1]]`, conjugating by
/// `W_ε = diag(1, ε)` leaves `A` fixed and drives `B` onto `A`, so any
/// continuous affine-invariant distance would give `d(A, B) = 0`.
pub fn no_affine_invariance_witness() -> Result<Witness> {
    let a = SymMat::from_row_slice(2, &[1.0, 0.0, 0.0, 0.0])?;
    let b = SymMat::from_row_slice(2, &[1.0, 1.0, 1.0, 1.0])?;
    let base_distance = dist_wasserstein(&a, &b)?;
    let mut table = Vec::with_capacity(WITNESS_EPSILONS.len());
    for eps in WITNESS_EPSILONS {
        let w = nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, eps]);
        // W M Wᵀ is a congruence by Wᵀ
        let wt = w.transpose();
        let d = dist_wasserstein(&a.congruence(&wt)?, &b.congruence(&wt)?)?;
        table.push((eps, d));
    }
    Ok(Witness { a, b, base_distance, table })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(p: usize, rng: &mut ChaCha8Rng) -> SymMat {
        let x = DMatrix::from_fn(p, p + 2, |_, _| rng.random_range(-1.0..1.0));
        SymMat::new(&x * x.transpose() + DMatrix::identity(p, p) * 0.05).unwrap()
    }

    #[test]
    fn geometric_self_distance_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = random_spd(4, &mut rng);
        assert!(dist_geometric(&s, &s).unwrap() < 1e-12);
    }

    #[test]
    fn geometric_scalar_case() {
        let e2 = 1f64.exp().powi(2);
        let t = SymMat::from_diagonal(&[e2, e2]).unwrap();
        let d = dist_geometric(&SymMat::identity(2), &t).unwrap();
        assert!((d - 2.0 * 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn geometric_affine_invariance_seed5() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_spd(4, &mut rng);
        let t = random_spd(4, &mut rng);
        let w = DMatrix::from_fn(4, 4, |_, _| rng.random_range(-1.0..1.0));
        let d0 = dist_geometric(&s, &t).unwrap();
        let d1 = dist_geometric(&s.congruence(&w).unwrap(), &t.congruence(&w).unwrap()).unwrap();
        assert!((d0 - d1).abs() < 1e-8);
        let back = dist_geometric(&t, &s).unwrap();
        assert!((d0 - back).abs() < 1e-10);
    }

    #[test]
    fn geometric_rejects_singular() {
        let s = SymMat::identity(2);
        let t = SymMat::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(matches!(dist_geometric(&s, &t), Err(Error::SingularMatrix { .. })));
        assert!(matches!(dist_geometric(&t, &s), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn wasserstein_commuting_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = random_spd(3, &mut rng);
        assert!(dist_wasserstein(&s, &s).unwrap() < 1e-7);
        let d =
            dist_wasserstein(&SymMat::from_diagonal(&[4.0]).unwrap(), &SymMat::from_diagonal(&[1.0]).unwrap()).unwrap();
        assert!((d - 1.0).abs() < 1e-12);
        let d = dist_wasserstein(
            &SymMat::from_diagonal(&[4.0, 0.0]).unwrap(),
            &SymMat::from_diagonal(&[1.0, 0.0]).unwrap(),
        )
        .unwrap();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_rejects_indefinite() {
        let s = SymMat::identity(2);
        let t = SymMat::from_diagonal(&[1.0, -1.0]).unwrap();
        assert!(matches!(dist_wasserstein(&s, &t), Err(Error::NotPsd { .. })));
        assert!(matches!(dist_wasserstein(&t, &s), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn witness_sequence() {
        let w = no_affine_invariance_witness().unwrap();
        assert!(w.base_distance > 0.1);
        for pair in w.table.windows(2) {
            assert!(pair[1].1 < pair[0].1);
        }
        assert!(w.table.last().unwrap().1 < 1e-2);
        // d_W(A, B_ε) = ε analytically
        for &(eps, d) in &w.table {
            assert!((d - eps).abs() < 1e-9);
        }
    }
}
