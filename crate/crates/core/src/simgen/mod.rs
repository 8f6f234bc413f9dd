//! Seeded synthetic covariances `C_i = A_i E_i A_iᵀ` with targets driven by
//! the source powers, and the parameter sweeps built on top of them.
//!
//! All randomness for one bundle comes from a single ChaCha20 stream seeded
//! with `seed`, consumed in this order:
//!
//! 1. `B`: `P×P` standard normals, row-major;
//! 2. `α`: `Q` standard normals;
//! 3. per subject `i`: `Q` source log-powers `~ N(0, 1)`, then `P−Q` noise
//!    log-powers `~ N(−2, 0.5²)`;
//! 4. `ε`: `N` standard normals, scaled by `σ`;
//! 5. `Ξ_i`: per subject `P×P` standard normals row-major, scaled by `σ_mix`.
//!
//! Every draw happens regardless of the parameter values, so configs that
//! differ only in `μ`, `σ` or `σ_mix` share the same powers and coefficients.

mod generate;
mod sweep;

pub use crate::bundle::CovarianceBundle;
pub use generate::{make_mixing, sample_bundle, GenerativeConfig, Link, SampledBundle};
pub use sweep::{default_specs, fig3_preset, sweep, Preset, SweepAxis, SweepRow};
