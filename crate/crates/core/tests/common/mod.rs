//! Random draws and independent reference computations shared by the
//! integration suites. The oracles use nalgebra directly so they do not go
//! through the crate's own kernels.
#![allow(dead_code)]

use covreg::SymMat;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

/// Haar-ish orthogonal matrix from the QR of a Gaussian matrix.
pub fn orthogonal(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, p, p).qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DMatrix::from_diagonal(&DVector::from_fn(p, |i, _| r[(i, i)].signum()));
    q * signs
}

/// Invertible matrix with singular values in `[e^-1, e]`.
pub fn invertible(rng: &mut ChaCha8Rng, p: usize) -> DMatrix<f64> {
    let u = orthogonal(rng, p);
    let v = orthogonal(rng, p);
    let s = DVector::from_fn(p, |_, _| rng.random_range(-1.0..1.0f64).exp());
    u * DMatrix::from_diagonal(&s) * v.transpose()
}

/// SPD matrix `X Xᵀ / m + 0.1 I` with `X` Gaussian `p × 2p`.
pub fn spd(rng: &mut ChaCha8Rng, p: usize) -> SymMat {
    let x = gaussian(rng, p, 2 * p);
    SymMat::new(&x * x.transpose() / (2 * p) as f64 + DMatrix::identity(p, p) * 0.1).unwrap()
}

/// Rank-`r` PSD matrix `Y Yᵀ` with well-separated nonzero eigenvalues.
pub fn psd_rank(rng: &mut ChaCha8Rng, p: usize, r: usize) -> SymMat {
    let q = orthogonal(rng, p);
    let vals: Vec<f64> = (0..p).map(|i| if i < r { rng.random_range(0.5..3.0) } else { 0.0 }).collect();
    SymMat::new(&q * DMatrix::from_diagonal(&DVector::from_vec(vals)) * q.transpose()).unwrap()
}

pub fn sym_fn(m: &DMatrix<f64>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// `d_G(S, T) = ‖log(L⁻¹ T L⁻ᵀ)‖_F` with `S = L Lᵀ`.
pub fn oracle_dist_geometric(s: &DMatrix<f64>, t: &DMatrix<f64>) -> f64 {
    let l = s.clone().cholesky().expect("SPD").l();
    let li = l.try_inverse().expect("invertible");
    let inner = &li * t * li.transpose();
    let eig = SymmetricEigen::new((&inner + inner.transpose()) * 0.5);
    eig.eigenvalues.iter().map(|v| v.ln().powi(2)).sum::<f64>().sqrt()
}

/// `d_W² = tr S + tr T − 2 tr (S^{1/2} T S^{1/2})^{1/2}`.
pub fn oracle_dist_wasserstein(s: &DMatrix<f64>, t: &DMatrix<f64>) -> f64 {
    let rs = sym_fn(s, |v| v.max(0.0).sqrt());
    let cross = sym_fn(&(&rs * t * &rs), |v| v.max(0.0).sqrt()).trace();
    (s.trace() + t.trace() - 2.0 * cross).max(0.0).sqrt()
}

/// `Σ_i log(M^{-1/2} C_i M^{-1/2})`.
pub fn oracle_karcher_gradient(mean: &DMatrix<f64>, set: &[SymMat]) -> DMatrix<f64> {
    let w = sym_fn(mean, |v| 1.0 / v.sqrt());
    let p = mean.nrows();
    set.iter().fold(DMatrix::zeros(p, p), |acc, c| acc + sym_fn(&(&w * c.as_matrix() * &w), f64::ln))
}

pub fn rel(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

pub fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    (m, (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n).sqrt())
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
