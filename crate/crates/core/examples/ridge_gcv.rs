//! Ridge regression with the penalty picked by generalized cross-validation.

use covreg::regress::{default_ridge_grid, fit_ridge_gcv, gcv_curve, FeatureScaling};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

fn main() -> covreg::Result<()> {
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let (n, k) = (60, 10);
    let x = DMatrix::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let truth: Vec<f64> = (0..k).map(|j| if j < 3 { 1.0 } else { 0.0 }).collect();
    let y: Vec<f64> = (0..n)
        .map(|i| (0..k).map(|j| x[(i, j)] * truth[j]).sum::<f64>() + 0.5 * rng.sample::<f64, _>(StandardNormal))
        .collect();

    let grid = default_ridge_grid();
    let curve = gcv_curve(&x, &y, &grid, FeatureScaling::Isotropic)?;
    for (l, g) in grid.iter().zip(&curve).step_by(11) {
        println!("lambda {l:>10.3e}  GCV {g:.5}");
    }
    for scaling in [FeatureScaling::Isotropic, FeatureScaling::PerColumn] {
        let model = fit_ridge_gcv(&x, &y, &grid, scaling)?;
        let pred = model.predict(&x)?;
        let mae = pred.iter().zip(&y).map(|(p, t)| (p - t).abs()).sum::<f64>() / n as f64;
        println!("{scaling}: lambda* = {:.3e}, training MAE {mae:.4}", model.lambda_star);
    }
    Ok(())
}
