use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::bundle::{CovarianceBundle, Provenance};
use crate::error::{Error, Result};
use crate::symmat::{svd_rect, SymMat};

/// Link `f` between source power and target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Link {
    Identity,
    Log,
    Sqrt,
}

impl Link {
    pub fn apply(self, power: f64) -> f64 {
        match self {
            Link::Identity => power,
            Link::Log => power.ln(),
            Link::Sqrt => power.sqrt(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::Identity => "identity",
            Link::Log => "log",
            Link::Sqrt => "sqrt",
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Link {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "identity" | "id" | "linear" => Ok(Link::Identity),
            "log" => Ok(Link::Log),
            "sqrt" => Ok(Link::Sqrt),
            other => Err(Error::InvalidInput(format!("unknown link '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenerativeConfig {
    /// sensors
    pub p: usize,
    /// sources, `1 ≤ q < p`
    pub q: usize,
    /// subjects
    pub n: usize,
    /// `A = exp(μB)`
    pub mu: f64,
    /// label noise standard deviation
    pub sigma: f64,
    /// per-subject mixing perturbation standard deviation
    pub sigma_mix: f64,
    pub link: Link,
    /// replace `A` by its orthogonal polar factor
    pub orthogonal_a: bool,
    pub seed: u64,
}

impl Default for GenerativeConfig {
    fn default() -> Self {
        GenerativeConfig {
            p: 5,
            q: 2,
            n: 100,
            mu: 1.0,
            sigma: 0.0,
            sigma_mix: 0.0,
            link: Link::Log,
            orthogonal_a: false,
            seed: 0,
        }
    }
}

impl GenerativeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.q >= self.p {
            return Err(Error::InvalidInput(format!("need 1 <= q < p, got q = {} and p = {}", self.q, self.p)));
        }
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("need n >= 2, got {}", self.n)));
        }
        for (name, v) in [("mu", self.mu), ("sigma", self.sigma), ("sigma_mix", self.sigma_mix)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        Ok(())
    }
}

/// A generated bundle together with the latent quantities behind it.
#[derive(Clone, Debug)]
pub struct SampledBundle {
    pub bundle: CovarianceBundle,
    pub alpha: Vec<f64>,
    pub mixing: DMatrix<f64>,
    /// `N×P` diagonal of each `E_i`: source powers then noise powers.
    pub powers: DMatrix<f64>,
}

fn normal_matrix(rng: &mut ChaCha20Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    let values: Vec<f64> = (0..rows * cols).map(|_| rng.sample(StandardNormal)).collect();
    DMatrix::from_row_slice(rows, cols, &values)
}

fn mixing_from(b: &DMatrix<f64>, cfg: &GenerativeConfig) -> Result<DMatrix<f64>> {
    let p = cfg.p;
    let a = if cfg.mu == 0.0 { DMatrix::identity(p, p) } else { (b * cfg.mu).exp() };
    if a.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!("exp(mu B) overflowed for mu = {}", cfg.mu)));
    }
    if cfg.orthogonal_a {
        let svd = svd_rect(&a)?;
        return Ok(&svd.u * svd.v.transpose());
    }
    Ok(a)
}

/// `A = exp(μB)` with `B` the first `P²` normals of the seeded stream,
/// optionally replaced by its orthogonal polar factor.
pub fn make_mixing(cfg: &GenerativeConfig) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let b = normal_matrix(&mut rng, cfg.p, cfg.p);
    mixing_from(&b, cfg)
}

pub fn sample_bundle(cfg: &GenerativeConfig) -> Result<SampledBundle> {
    cfg.validate()?;
    let (p, q, n) = (cfg.p, cfg.q, cfg.n);
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);

    let b = normal_matrix(&mut rng, p, p);
    let mixing = mixing_from(&b, cfg)?;
    let alpha: Vec<f64> = (0..q).map(|_| rng.sample(StandardNormal)).collect();

    let mut powers = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            let z: f64 = rng.sample(StandardNormal);
            let log_power = if j < q { z } else { -2.0 + 0.5 * z };
            powers[(i, j)] = log_power.exp();
        }
    }
    let noise: Vec<f64> = (0..n).map(|_| cfg.sigma * rng.sample::<f64, _>(StandardNormal)).collect();

    let mut matrices = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let xi = normal_matrix(&mut rng, p, p);
        let a_i = if cfg.sigma_mix == 0.0 { mixing.clone() } else { &mixing + xi * cfg.sigma_mix };
        let e_i = DMatrix::from_fn(p, p, |r, c| if r == c { powers[(i, r)] } else { 0.0 });
        matrices.push(SymMat::new(&a_i * e_i * a_i.transpose())?);
        let y = (0..q).map(|j| alpha[j] * cfg.link.apply(powers[(i, j)])).sum::<f64>() + noise[i];
        labels.push(y);
    }

    let bundle = CovarianceBundle::new(matrices, labels, p, Provenance::Generated(cfg.clone()))?;
    Ok(SampledBundle { bundle, alpha, mixing, powers })
}
