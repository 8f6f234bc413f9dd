//! Arithmetic, geometric (Karcher) and Wasserstein means of one set of
//! covariance matrices.

use covreg::manifold::{dist_geometric, dist_wasserstein, mean_geometric_with, mean_wasserstein_with, MeanOptions};
use covreg::simgen::{sample_bundle, GenerativeConfig};
use covreg::SymMat;

fn main() -> covreg::Result<()> {
    let sample = sample_bundle(&GenerativeConfig { p: 4, q: 2, n: 20, sigma_mix: 0.2, ..Default::default() })?;
    let set = sample.bundle.matrices();
    let p = sample.bundle.dim();

    let arithmetic = SymMat::arithmetic_mean(set)?;
    let (geometric, g) = mean_geometric_with(set, MeanOptions::GEOMETRIC)?;
    let (factor, w) = mean_wasserstein_with(set, p, MeanOptions::WASSERSTEIN)?;
    let wasserstein = factor.gram();
    println!("geometric mean: {} iterations, gradient norm {:.2e}", g.iterations, g.gradient_norm);
    println!("wasserstein mean: {} iterations, gradient norm {:.2e}", w.iterations, w.gradient_norm);

    for (name, m) in [("arithmetic", &arithmetic), ("geometric", &geometric), ("wasserstein", &wasserstein)] {
        let dg: f64 = set.iter().map(|c| dist_geometric(m, c).map(|d| d * d)).sum::<covreg::Result<f64>>()?;
        let dw: f64 = set.iter().map(|c| dist_wasserstein(m, c).map(|d| d * d)).sum::<covreg::Result<f64>>()?;
        println!("{name:<12} trace {:>8.4}  Σ d_G² {dg:>9.4}  Σ d_W² {dw:>9.4}", m.trace());
    }
    Ok(())
}
