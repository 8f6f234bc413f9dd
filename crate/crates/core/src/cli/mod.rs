//! The `covreg` command line.
//!
//! Every subcommand reads optional `key = value` settings from `--config`
//! and lets a flag of the same name override each key. Data goes to files;
//! standard output carries one-line summaries.
//!
//! Exit codes: 0 on success, 2 on configuration or input errors, 3 when a
//! numerical precondition fails or a solver does not converge.

mod config;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

pub use config::RunConfig;

use crate::bundle::CovarianceBundle;
use crate::error::{Error, Result};
use crate::filters::FilterKind;
use crate::io;
use crate::manifold::{
    mean_geometric_with, mean_wasserstein_with, no_affine_invariance_witness, Embedding, EmbeddingKind, MeanOptions,
};
use crate::regress::{
    default_ridge_grid, log_grid, run_pipeline_cv, FeatureScaling, FilterSpec, FittedPipeline, PipelineSpec,
};
use crate::simgen::{default_specs, fig3_preset, sample_bundle, sweep, GenerativeConfig, SweepAxis};
use crate::symmat::SymMat;

#[derive(Parser, Debug)]
#[command(name = "covreg", version, about = "Regression on covariance matrices through tangent-space embeddings")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Settings file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: number of processors)
    #[arg(long)]
    jobs: Option<usize>,
}

macro_rules! settings {
    ($name:ident { $($field:ident : $help:literal),* $(,)? }) => {
        #[derive(Args, Debug, Default)]
        struct $name {
            #[command(flatten)]
            common: Common,
            $(
                #[arg(long, help = $help)]
                $field: Option<String>,
            )*
        }

        impl $name {
            const KEYS: &'static [&'static str] = &[$(stringify!($field),)* "seed", "out"];

            fn config(&self) -> Result<RunConfig> {
                let mut cfg = match &self.common.config {
                    Some(path) => RunConfig::load(path, Self::KEYS)?,
                    None => RunConfig::default(),
                };
                $(
                    if let Some(v) = &self.$field {
                        cfg.set(stringify!($field), v.clone());
                    }
                )*
                if let Some(seed) = self.common.seed {
                    cfg.set("seed", seed.to_string());
                }
                if let Some(out) = &self.common.out {
                    cfg.set("out", out.to_string_lossy());
                }
                Ok(cfg)
            }
        }
    };
}

settings!(SimulateArgs {
    p: "Sensors",
    q: "Sources",
    n: "Subjects",
    mu: "Mixing distance from identity",
    sigma: "Label noise standard deviation",
    sigma_mix: "Per-subject mixing perturbation",
    link: "Link between source power and target: identity, log, sqrt",
    orthogonal: "Use the orthogonal polar factor of the mixing matrix",
});

settings!(PipelineArgs {
    input: "Bundle file (COVB v1)",
    filter: "identity, unsupervised, supervised or mne",
    rank: "Filter output rank",
    embedding: "euclidean, geometric, wasserstein or logdiag",
    folds: "Cross-validation folds",
    leadfield: "Leadfield file (LEADFIELD v1) for the mne filter",
    mne_lambda: "Regularization of the mne filter",
    grid_min: "Smallest ridge penalty",
    grid_max: "Largest ridge penalty",
    grid_size: "Number of log-spaced ridge penalties",
    scaling: "Feature scaling before ridge: isotropic or columns",
});

settings!(FitArgs {
    input: "Bundle file (COVB v1)",
    filter: "identity, unsupervised, supervised or mne",
    rank: "Filter output rank",
    embedding: "euclidean, geometric, wasserstein or logdiag",
    folds: "Cross-validation folds",
    leadfield: "Leadfield file (LEADFIELD v1) for the mne filter",
    mne_lambda: "Regularization of the mne filter",
    grid_min: "Smallest ridge penalty",
    grid_max: "Largest ridge penalty",
    grid_size: "Number of log-spaced ridge penalties",
    scaling: "Feature scaling before ridge: isotropic or columns",
    model: "Model file to write (MODEL v1)",
});

settings!(PredictArgs { input: "Bundle file (COVB v1)", model: "Model file (MODEL v1)" });

settings!(SweepArgs {
    preset: "fig3-left, fig3-middle or fig3-right",
    axis: "sigma, mu or sigma_mix",
    values: "Comma-separated axis values",
    p: "Sensors",
    q: "Sources",
    n: "Subjects",
    mu: "Mixing distance from identity",
    sigma: "Label noise standard deviation",
    sigma_mix: "Per-subject mixing perturbation",
    link: "identity, log or sqrt",
    orthogonal: "Use the orthogonal polar factor of the mixing matrix",
    folds: "Cross-validation folds",
    repeats: "Seeds per axis value",
});

settings!(MeanArgs {
    input: "Bundle file (COVB v1)",
    metric: "euclidean, geometric or wasserstein",
    rank: "Rank of the Wasserstein mean",
});

settings!(EmbedArgs {
    input: "Bundle file (COVB v1)",
    filter: "identity, unsupervised, supervised or mne",
    rank: "Filter output rank",
    embedding: "euclidean, geometric, wasserstein or logdiag",
    leadfield: "Leadfield file (LEADFIELD v1) for the mne filter",
    mne_lambda: "Regularization of the mne filter",
});

settings!(WitnessArgs {});

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample a synthetic bundle and write it as COVB v1
    Simulate(SimulateArgs),
    /// Cross-validate a pipeline, then fit it on the whole bundle and save the model
    Fit(FitArgs),
    /// Apply a saved model to a bundle
    Predict(PredictArgs),
    /// Cross-validate a pipeline and write per-fold results
    Eval(PipelineArgs),
    /// Run a parameter sweep over synthetic bundles
    Sweep(SweepArgs),
    /// Fréchet mean of a bundle
    Mean(MeanArgs),
    /// Write the tangent-space features of a bundle
    Embed(EmbedArgs),
    /// Print the table showing the Wasserstein distance is not affine invariant
    Witness(WitnessArgs),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Simulate(a) => &a.common,
            Command::Fit(a) => &a.common,
            Command::Predict(a) => &a.common,
            Command::Eval(a) => &a.common,
            Command::Sweep(a) => &a.common,
            Command::Mean(a) => &a.common,
            Command::Embed(a) => &a.common,
            Command::Witness(a) => &a.common,
        }
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind_name());
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

fn execute(command: &Command) -> Result<()> {
    let jobs = match command.common().jobs {
        Some(0) => return Err(Error::InvalidInput("--jobs must be at least 1".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start {jobs} worker threads: {e}")))?;
    pool.install(|| match command {
        Command::Simulate(a) => cmd_simulate(&a.config()?),
        Command::Fit(a) => cmd_fit(&a.config()?, true),
        Command::Eval(a) => cmd_fit(&a.config()?, false),
        Command::Predict(a) => cmd_predict(&a.config()?),
        Command::Sweep(a) => cmd_sweep(&a.config()?),
        Command::Mean(a) => cmd_mean(&a.config()?),
        Command::Embed(a) => cmd_embed(&a.config()?),
        Command::Witness(a) => cmd_witness(&a.config()?),
    })
}

fn generative(cfg: &RunConfig, base: GenerativeConfig) -> Result<GenerativeConfig> {
    let gen = GenerativeConfig {
        p: cfg.get_or("p", base.p)?,
        q: cfg.get_or("q", base.q)?,
        n: cfg.get_or("n", base.n)?,
        mu: cfg.get_or("mu", base.mu)?,
        sigma: cfg.get_or("sigma", base.sigma)?,
        sigma_mix: cfg.get_or("sigma_mix", base.sigma_mix)?,
        link: cfg.get_or("link", base.link)?,
        orthogonal_a: cfg.bool_or("orthogonal", base.orthogonal_a)?,
        seed: cfg.get_or("seed", base.seed)?,
    };
    gen.validate()?;
    Ok(gen)
}

fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let gen = generative(cfg, GenerativeConfig::default())?;
    let out = cfg.path_or("out", "bundle.covb");
    let sample = sample_bundle(&gen)?;
    let bundle = &sample.bundle;
    io::write_bundle(&out, bundle)?;
    let (mean, std) = bundle.label_mean_std();
    println!(
        "wrote {}: N={} P={} R={} label mean={mean:.6} std={std:.6}",
        out.display(),
        bundle.len(),
        bundle.dim(),
        bundle.nominal_rank()
    );
    Ok(())
}

fn input_bundle(cfg: &RunConfig) -> Result<CovarianceBundle> {
    io::read_bundle(Path::new(cfg.require("input")?))
}

fn filter_spec(cfg: &RunConfig, bundle: &CovarianceBundle) -> Result<FilterSpec> {
    let kind: FilterKind = cfg.get_or("filter", FilterKind::Identity)?;
    let rank: Option<usize> = cfg.get("rank")?;
    let max_rank = bundle.nominal_rank();
    if let Some(r) = rank {
        if r == 0 || r > max_rank {
            return Err(Error::InvalidInput(format!("rank must lie in 1..={max_rank} for this bundle, got {r}")));
        }
    }
    Ok(match kind {
        FilterKind::Identity => {
            if rank.is_some() {
                return Err(Error::InvalidInput("the identity filter takes no rank".into()));
            }
            FilterSpec::Identity
        }
        FilterKind::Unsupervised => FilterSpec::Unsupervised { rank: rank.unwrap_or(max_rank) },
        FilterKind::Supervised => FilterSpec::Supervised { rank: rank.unwrap_or(max_rank) },
        FilterKind::Mne => {
            if rank.is_some() {
                return Err(Error::InvalidInput("the mne filter rank is set by the leadfield".into()));
            }
            let leadfield = io::read_leadfield(Path::new(cfg.require("leadfield")?))?;
            if leadfield.sensors() != bundle.dim() {
                return Err(Error::InvalidInput(format!(
                    "leadfield has {} sensors but the bundle has {}",
                    leadfield.sensors(),
                    bundle.dim()
                )));
            }
            FilterSpec::Mne { leadfield: Arc::new(leadfield), lambda: cfg.get_or("mne_lambda", 1.0)? }
        }
    })
}

fn ridge_grid(cfg: &RunConfig) -> Result<Vec<f64>> {
    if !["grid_min", "grid_max", "grid_size"].iter().any(|k| cfg.contains(k)) {
        return Ok(default_ridge_grid());
    }
    let lo: f64 = cfg.get_or("grid_min", 1e-5)?;
    let hi: f64 = cfg.get_or("grid_max", 1e3)?;
    let n: usize = cfg.get_or("grid_size", 100)?;
    if !(lo > 0.0 && hi.is_finite() && (hi > lo || (n == 1 && hi == lo))) || n == 0 {
        return Err(Error::InvalidInput(format!(
            "ridge grid needs 0 < grid_min < grid_max and grid_size >= 1, got {lo}, {hi}, {n}"
        )));
    }
    Ok(log_grid(lo, hi, n))
}

fn pipeline_spec(cfg: &RunConfig, bundle: &CovarianceBundle) -> Result<PipelineSpec> {
    let spec = PipelineSpec {
        filter: filter_spec(cfg, bundle)?,
        embedding: cfg.get_or("embedding", EmbeddingKind::GeometricTangent)?,
        ridge_grid: ridge_grid(cfg)?,
        scaling: cfg.get_or("scaling", FeatureScaling::default())?,
    };
    spec.validate()?;
    Ok(spec)
}

fn cmd_fit(cfg: &RunConfig, save_model: bool) -> Result<()> {
    let bundle = input_bundle(cfg)?;
    let spec = pipeline_spec(cfg, &bundle)?;
    let folds: usize = cfg.get_or("folds", 10)?;
    if folds < 2 || folds > bundle.len() {
        return Err(Error::InvalidInput(format!(
            "folds must lie in 2..={} for this bundle, got {folds}",
            bundle.len()
        )));
    }
    let seed: u64 = cfg.get_or("seed", 0)?;
    let out = cfg.path_or("out", "results.csv");
    let model_path = cfg.path_or("model", "model.txt");

    let report = run_pipeline_cv(&bundle, &spec, folds, seed)?;
    let model = if save_model { Some(FittedPipeline::fit(&bundle, &spec)?) } else { None };
    io::write_file(&out, |w| io::write_cv_csv(w, &spec, &report))?;
    println!("{spec}: {folds}-fold mean MAE {:.6e} -> {}", report.mean_mae, out.display());
    if let Some(model) = model {
        io::write_model(&model_path, &model)?;
        println!(
            "model fitted on {} samples (lambda {:.3e}) -> {}",
            bundle.len(),
            model.model.lambda_star,
            model_path.display()
        );
    }
    Ok(())
}

fn cmd_predict(cfg: &RunConfig) -> Result<()> {
    let model = io::read_model(Path::new(cfg.require("model")?))?;
    let bundle = input_bundle(cfg)?;
    if bundle.dim() != model.filter.input_dim() {
        return Err(Error::InvalidInput(format!(
            "model expects {}×{} covariances, bundle has {}×{}",
            model.filter.input_dim(),
            model.filter.input_dim(),
            bundle.dim(),
            bundle.dim()
        )));
    }
    let predictions = model.predict(bundle.matrices())?;
    let out = cfg.path_or("out", "predictions.csv");
    io::write_file(&out, |w| {
        writeln!(w, "index,prediction,label")?;
        for (i, (p, y)) in predictions.iter().zip(bundle.labels()).enumerate() {
            writeln!(w, "{i},{},{}", io::fmt_f64(*p), io::fmt_f64(*y))?;
        }
        Ok(())
    })?;
    let mae = predictions.iter().zip(bundle.labels()).map(|(p, y)| (p - y).abs()).sum::<f64>() / bundle.len() as f64;
    println!("{} predictions (MAE against stored labels {mae:.6e}) -> {}", bundle.len(), out.display());
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig) -> Result<()> {
    let preset = cfg.str("preset").map(fig3_preset).transpose()?;
    let base = generative(cfg, preset.as_ref().map(|p| p.base.clone()).unwrap_or_default())?;
    let axis: SweepAxis = match (cfg.get("axis")?, &preset) {
        (Some(a), _) => a,
        (None, Some(p)) => p.axis,
        (None, None) => return Err(Error::InvalidInput("sweep needs 'preset' or 'axis'".into())),
    };
    let values = match (cfg.list_f64("values")?, &preset) {
        (Some(v), _) => v,
        (None, Some(p)) => p.values.clone(),
        (None, None) => return Err(Error::InvalidInput("sweep needs 'preset' or 'values'".into())),
    };
    let folds = cfg.get_or("folds", preset.as_ref().map_or(10, |p| p.folds))?;
    let repeats = cfg.get_or("repeats", preset.as_ref().map_or(3, |p| p.repeats))?;
    let specs = default_specs(base.p);
    let out = cfg.path_or("out", "sweep.csv");

    let rows = sweep(&base, axis, &values, &specs, folds, repeats)?;
    io::write_file(&out, |w| io::write_sweep_csv(w, &rows))?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    println!(
        "{axis} sweep: {} values × {} specs × {repeats} repeats, {} rows ({failed} failed cells) -> {}",
        values.len(),
        specs.len(),
        rows.len(),
        out.display()
    );
    Ok(())
}

fn cmd_mean(cfg: &RunConfig) -> Result<()> {
    let bundle = input_bundle(cfg)?;
    let metric = cfg.string_or("metric", "geometric").to_ascii_lowercase();
    let out = cfg.path_or("out", "mean.txt");
    let (mean, summary) = match metric.as_str() {
        "euclidean" => (SymMat::arithmetic_mean(bundle.matrices())?, "closed form".to_string()),
        "geometric" => {
            let (m, report) = mean_geometric_with(bundle.matrices(), MeanOptions::GEOMETRIC)?;
            (m, format!("{} iterations, gradient norm {:.3e}", report.iterations, report.gradient_norm))
        }
        "wasserstein" => {
            let rank: usize = cfg.get_or("rank", bundle.nominal_rank())?;
            if rank == 0 || rank > bundle.dim() {
                return Err(Error::InvalidInput(format!("rank must lie in 1..={}, got {rank}", bundle.dim())));
            }
            let (y, report) = mean_wasserstein_with(bundle.matrices(), rank, MeanOptions::WASSERSTEIN)?;
            (
                y.gram(),
                format!("rank {rank}, {} iterations, gradient norm {:.3e}", report.iterations, report.gradient_norm),
            )
        }
        other => {
            return Err(Error::InvalidInput(format!("unknown metric '{other}' (euclidean, geometric, wasserstein)")))
        }
    };
    io::write_symmat(&out, &mean)?;
    println!("{metric} mean of {} matrices ({summary}) -> {}", bundle.len(), out.display());
    Ok(())
}

fn cmd_embed(cfg: &RunConfig) -> Result<()> {
    let bundle = input_bundle(cfg)?;
    let filter = filter_spec(cfg, &bundle)?;
    let kind: EmbeddingKind = cfg.get_or("embedding", EmbeddingKind::GeometricTangent)?;
    let out = cfg.path_or("out", "features.csv");

    let fitted = filter.fit(&bundle).map_err(|e| e.in_stage("filter"))?;
    let filtered = fitted.apply(&bundle).map_err(|e| e.in_stage("filter"))?;
    let embedding =
        Embedding::fit(kind, filtered.matrices(), filtered.nominal_rank()).map_err(|e| e.in_stage("embedding"))?;
    let features = embedding.transform(filtered.matrices()).map_err(|e| e.in_stage("embedding"))?;
    io::write_file(&out, |w| {
        let names: Vec<String> = (0..features.k()).map(|j| format!("f{j}")).collect();
        writeln!(w, "label,{}", names.join(","))?;
        for (row, y) in features.rows.row_iter().zip(bundle.labels()) {
            let values: Vec<String> = row.iter().map(|v| io::fmt_f64(*v)).collect();
            writeln!(w, "{},{}", io::fmt_f64(*y), values.join(","))?;
        }
        Ok(())
    })?;
    println!("{} embedding: {} × {} features -> {}", kind, features.n(), features.k(), out.display());
    Ok(())
}

fn cmd_witness(cfg: &RunConfig) -> Result<()> {
    let witness = no_affine_invariance_witness()?;
    println!("A = [[1, 0], [0, 0]], B = [[1, 1], [1, 1]], W = diag(1, eps)");
    println!("d_W(A, B) = {:.12}", witness.base_distance);
    println!("{:>10}  {:>20}", "eps", "d_W(WAW', WBW')");
    for (eps, d) in &witness.table {
        println!("{eps:>10}  {d:>20.12e}");
    }
    if let Some(out) = cfg.str("out") {
        let out = PathBuf::from(out);
        io::write_file(&out, |w| {
            writeln!(w, "epsilon,distance")?;
            for (eps, d) in &witness.table {
                writeln!(w, "{},{}", io::fmt_f64(*eps), io::fmt_f64(*d))?;
            }
            Ok(())
        })?;
    }
    Ok(())
}
