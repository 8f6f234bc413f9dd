use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::generate::{sample_bundle, GenerativeConfig};
use crate::bundle::CovarianceBundle;
use crate::error::{Error, Result};
use crate::manifold::{tangent_distortion, Embedding, EmbeddingKind};
use crate::regress::{run_pipeline_cv, FilterSpec, PipelineSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    SigmaNoise,
    Mu,
    SigmaMix,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::SigmaNoise => "sigma",
            SweepAxis::Mu => "mu",
            SweepAxis::SigmaMix => "sigma_mix",
        }
    }

    pub fn configure(self, base: &GenerativeConfig, value: f64) -> GenerativeConfig {
        let mut cfg = base.clone();
        match self {
            SweepAxis::SigmaNoise => cfg.sigma = value,
            SweepAxis::Mu => cfg.mu = value,
            SweepAxis::SigmaMix => cfg.sigma_mix = value,
        }
        cfg
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigma" | "sigma_noise" | "noise" => Ok(SweepAxis::SigmaNoise),
            "mu" => Ok(SweepAxis::Mu),
            "sigma_mix" | "mix" => Ok(SweepAxis::SigmaMix),
            other => Err(Error::InvalidInput(format!("unknown sweep axis '{other}'"))),
        }
    }
}

/// One CSV row of a sweep: a single fold of one (value, spec, repeat) cell,
/// or a single error row when the cell failed.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub repeat: usize,
    pub seed: u64,
    pub method: String,
    pub filter: String,
    pub embedding: String,
    pub rank: usize,
    pub fold: Option<usize>,
    pub lambda: Option<f64>,
    pub mae: Option<f64>,
    pub label_std: f64,
    /// Relative gap between pairwise distances and tangent-vector distances
    /// on the whole filtered bundle; `None` when not defined or not computable.
    pub tangent_distortion: Option<f64>,
    pub error: Option<String>,
}

/// Consecutive subject pairs used for the distortion column.
const DISTORTION_PAIRS: usize = 20;

fn cell_distortion(bundle: &CovarianceBundle, spec: &PipelineSpec) -> Option<f64> {
    let filtered = spec.filter.fit(bundle).and_then(|f| f.apply(bundle)).ok()?;
    let embedding = Embedding::fit(spec.embedding, filtered.matrices(), filtered.nominal_rank()).ok()?;
    tangent_distortion(&embedding, filtered.matrices(), DISTORTION_PAIRS).ok().flatten()
}

fn cell_rows(
    cfg: &GenerativeConfig,
    axis: SweepAxis,
    value: f64,
    repeat: usize,
    specs: &[PipelineSpec],
    folds: usize,
) -> Vec<Vec<SweepRow>> {
    let blank = |spec: &PipelineSpec| SweepRow {
        axis,
        value,
        repeat,
        seed: cfg.seed,
        method: spec.name(),
        filter: spec.filter.kind().name().to_string(),
        embedding: spec.embedding.name().to_string(),
        rank: spec.filter.rank().unwrap_or(cfg.p),
        fold: None,
        lambda: None,
        mae: None,
        label_std: f64::NAN,
        tangent_distortion: None,
        error: None,
    };
    let sample = match sample_bundle(cfg) {
        Ok(s) => s,
        Err(e) => {
            return specs.iter().map(|s| vec![SweepRow { error: Some(e.to_string()), ..blank(s) }]).collect();
        }
    };
    let label_std = sample.bundle.label_mean_std().1;
    specs
        .iter()
        .map(|spec| match run_pipeline_cv(&sample.bundle, spec, folds, cfg.seed) {
            Ok(report) => {
                let tangent_distortion = cell_distortion(&sample.bundle, spec);
                report
                    .per_fold_mae
                    .iter()
                    .zip(&report.per_fold_lambda)
                    .enumerate()
                    .map(|(fold, (&mae, &lambda))| SweepRow {
                        rank: report.rank,
                        fold: Some(fold),
                        lambda: Some(lambda),
                        mae: Some(mae),
                        label_std,
                        tangent_distortion,
                        ..blank(spec)
                    })
                    .collect()
            }
            Err(e) => vec![SweepRow { label_std, error: Some(e.to_string()), ..blank(spec) }],
        })
        .collect()
}

/// Runs every (axis value × spec × repeat) cell; repeat `k` uses seed
/// `base.seed + k` for both generation and fold assignment.
///
/// Rows come back ordered by value, then spec, then repeat, then fold,
/// independent of the execution schedule. Failed cells produce one row
/// carrying the error message.
pub fn sweep(
    base: &GenerativeConfig,
    axis: SweepAxis,
    values: &[f64],
    specs: &[PipelineSpec],
    folds: usize,
    repeats: usize,
) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one axis value".into()));
    }
    if specs.is_empty() {
        return Err(Error::InvalidInput("sweep needs at least one pipeline spec".into()));
    }
    if repeats == 0 {
        return Err(Error::InvalidInput("sweep needs at least one repeat".into()));
    }
    if folds < 2 || folds > base.n {
        return Err(Error::InvalidInput(format!("folds must lie in 2..={}, got {folds}", base.n)));
    }
    for spec in specs {
        spec.validate()?;
    }
    for &v in values {
        axis.configure(base, v).validate()?;
    }

    let cells: Vec<(usize, usize)> = (0..values.len()).flat_map(|v| (0..repeats).map(move |r| (v, r))).collect();
    let results: Vec<Vec<Vec<SweepRow>>> = cells
        .par_iter()
        .map(|&(v, r)| {
            let mut cfg = axis.configure(base, values[v]);
            cfg.seed = base.seed.wrapping_add(r as u64);
            cell_rows(&cfg, axis, values[v], r, specs, folds)
        })
        .collect();

    let mut rows = Vec::new();
    for per_value in results.chunks(repeats) {
        for s in 0..specs.len() {
            for cell in per_value {
                rows.extend(cell[s].iter().cloned());
            }
        }
    }
    Ok(rows)
}

/// A named sweep configuration.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub base: GenerativeConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub specs: Vec<PipelineSpec>,
    pub folds: usize,
    pub repeats: usize,
}

/// The default comparison set: geometric, Wasserstein and log-diag without
/// projection, plus log-diag after a full-width supervised filter.
pub fn default_specs(p: usize) -> Vec<PipelineSpec> {
    vec![
        PipelineSpec::new(FilterSpec::Identity, EmbeddingKind::GeometricTangent),
        PipelineSpec::new(FilterSpec::Identity, EmbeddingKind::WassersteinTangent),
        PipelineSpec::new(FilterSpec::Identity, EmbeddingKind::LogDiag),
        PipelineSpec::new(FilterSpec::Supervised { rank: p }, EmbeddingKind::LogDiag),
    ]
}

/// `fig3-left` (label noise), `fig3-middle` (distance of `A` from identity)
/// and `fig3-right` (per-subject mixing perturbation).
pub fn fig3_preset(name: &str) -> Result<Preset> {
    let base = GenerativeConfig::default();
    let (name, axis, values, base) = match name {
        "fig3-left" => ("fig3-left", SweepAxis::SigmaNoise, vec![0.0, 0.05, 0.1, 0.5, 1.0], base),
        "fig3-middle" => ("fig3-middle", SweepAxis::Mu, vec![0.0, 0.25, 0.5, 0.75, 1.0], base),
        "fig3-right" => ("fig3-right", SweepAxis::SigmaMix, vec![0.0, 0.01, 0.05, 0.1, 0.2], base),
        other => return Err(Error::InvalidInput(format!("unknown preset '{other}'"))),
    };
    Ok(Preset { name, specs: default_specs(base.p), base, axis, values, folds: 10, repeats: 3 })
}
