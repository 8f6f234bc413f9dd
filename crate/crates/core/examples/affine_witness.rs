//! The Wasserstein distance is only orthogonally invariant. For rank-deficient
//! matrices an invertible congruence can shrink it arbitrarily; the geometric
//! distance on full-rank matrices does not move.

use covreg::manifold::{dist_geometric, dist_wasserstein, no_affine_invariance_witness};
use covreg::SymMat;
use nalgebra::DMatrix;

fn main() -> covreg::Result<()> {
    let witness = no_affine_invariance_witness()?;
    println!("d_W(A, B) = {:.6}", witness.base_distance);
    for (eps, d) in &witness.table {
        println!("  W = diag(1, {eps:e}): d_W = {d:.6e}");
    }

    let s = SymMat::from_row_slice(2, &[2.0, 0.3, 0.3, 1.0])?;
    let t = SymMat::from_row_slice(2, &[1.0, -0.2, -0.2, 0.5])?;
    let a = DMatrix::from_row_slice(2, 2, &[3.0, 1.0, 0.0, 0.2]);
    let sa = SymMat::new(&a * s.as_matrix() * a.transpose())?;
    let ta = SymMat::new(&a * t.as_matrix() * a.transpose())?;
    println!("d_G before {:.12}, after {:.12}", dist_geometric(&s, &t)?, dist_geometric(&sa, &ta)?);
    println!("d_W before {:.12}, after {:.12}", dist_wasserstein(&s, &t)?, dist_wasserstein(&sa, &ta)?);
    Ok(())
}
