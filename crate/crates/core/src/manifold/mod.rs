//! Distances, log maps, means and vectorizations for the Euclidean,
//! affine-invariant (geometric) and Bures–Wasserstein geometries.

mod distance;
mod embedding;
mod mean;
mod tangent;

pub use distance::{dist_geometric, dist_wasserstein, no_affine_invariance_witness, Witness};
pub use embedding::{tangent_distortion, Embedding, EmbeddingKind, FeatureMatrix};
pub use mean::{mean_geometric, mean_geometric_with, mean_wasserstein, mean_wasserstein_with, MeanOptions, MeanReport};
pub use tangent::{
    factorize, log_geometric, log_wasserstein, upper, vec_euclidean, vec_geometric, vec_logdiag, vec_wasserstein,
    FactorMat,
};
