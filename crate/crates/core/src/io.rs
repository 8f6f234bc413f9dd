//! Plain-text file formats: covariance bundles (`COVB v1`), leadfields
//! (`LEADFIELD v1`), single matrices (`SYMMAT v1`), fitted models
//! (`MODEL v1`) and results CSVs.
//!
//! Every real number is written with 17 significant digits so that reading
//! a file back reproduces the exact `f64` values.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};

use crate::bundle::{CovarianceBundle, Provenance};
use crate::error::{Error, Result};
use crate::filters::{FilterKind, Leadfield, SpatialFilter};
use crate::manifold::{Embedding, EmbeddingKind};
use crate::regress::{CVReport, FittedPipeline, PipelineSpec, RidgeModel};
use crate::simgen::SweepRow;
use crate::symmat::SymMat;

pub const RESULTS_HEADER: &str = "method,filter,embedding,rank,fold,lambda,mae,seed";
pub const SWEEP_HEADER: &str =
    "axis,value,repeat,method,filter,embedding,rank,fold,lambda,mae,seed,label_std,tangent_distortion,error";

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io { path: path.to_path_buf(), source }
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

/// Writes through a buffered file, reporting the path on failure.
pub fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

/// Line reader that skips blank lines and keeps line numbers for errors.
struct Lines {
    path: PathBuf,
    lines: Vec<(usize, String)>,
    pos: usize,
}

impl Lines {
    fn open(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut lines = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(io_err(path))?;
            if !line.trim().is_empty() {
                lines.push((i + 1, line));
            }
        }
        Ok(Lines { path: path.to_path_buf(), lines, pos: 0 })
    }

    fn error(&self, message: impl Into<String>) -> Error {
        let line = self.lines.get(self.pos.saturating_sub(1)).map(|(n, _)| *n).unwrap_or(0);
        Error::Parse { path: self.path.clone(), line, message: message.into() }
    }

    fn next_tokens(&mut self) -> Result<Vec<String>> {
        let (_, line) = self.lines.get(self.pos).ok_or_else(|| Error::Parse {
            path: self.path.clone(),
            line: self.lines.last().map(|(n, _)| *n).unwrap_or(0),
            message: "unexpected end of file".into(),
        })?;
        self.pos += 1;
        Ok(line.split_whitespace().map(str::to_string).collect())
    }

    fn numbers(&mut self, count: usize) -> Result<Vec<f64>> {
        let tokens = self.next_tokens()?;
        if tokens.len() != count {
            return Err(self.error(format!("expected {count} values, found {}", tokens.len())));
        }
        tokens.iter().map(|t| self.parse_f64(t)).collect()
    }

    fn parse_f64(&self, token: &str) -> Result<f64> {
        match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(self.error(format!("invalid number '{token}'"))),
        }
    }

    fn parse_usize(&self, token: &str) -> Result<usize> {
        token.parse::<usize>().map_err(|_| self.error(format!("invalid integer '{token}'")))
    }

    fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let mut values = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            values.extend(self.numbers(cols)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &values))
    }

    /// A `keyword a b …` line; returns the remaining tokens.
    fn keyword(&mut self, key: &str, args: usize) -> Result<Vec<String>> {
        let tokens = self.next_tokens()?;
        if tokens.first().map(String::as_str) != Some(key) || tokens.len() != args + 1 {
            return Err(self.error(format!("expected '{key}' with {args} argument(s)")));
        }
        Ok(tokens[1..].to_vec())
    }

    fn keyword_usize(&mut self, key: &str) -> Result<usize> {
        let token = self.keyword(key, 1)?.remove(0);
        self.parse_usize(&token)
    }

    fn keyword_f64(&mut self, key: &str) -> Result<f64> {
        let token = self.keyword(key, 1)?.remove(0);
        self.parse_f64(&token)
    }

    fn header(&mut self, magic: &str, args: usize) -> Result<Vec<String>> {
        let tokens = self.next_tokens()?;
        if tokens.len() != args + 2 || tokens[0] != magic || tokens[1] != "v1" {
            return Err(self.error(format!("expected header '{magic} v1' followed by {args} field(s)")));
        }
        Ok(tokens[2..].to_vec())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.lines.len() {
            let line = self.lines[self.pos].0;
            return Err(Error::Parse { path: self.path.clone(), line, message: "trailing content".into() });
        }
        Ok(())
    }
}

fn write_row(w: &mut dyn Write, values: impl IntoIterator<Item = f64>) -> std::io::Result<()> {
    let row: Vec<String> = values.into_iter().map(fmt_f64).collect();
    writeln!(w, "{}", row.join(" "))
}

fn write_matrix(w: &mut dyn Write, m: &DMatrix<f64>) -> std::io::Result<()> {
    for row in m.row_iter() {
        write_row(w, row.iter().copied())?;
    }
    Ok(())
}

/// `COVB v1 N P R`, then per subject a `y <label>` line and `P` rows.
pub fn write_bundle_to(w: &mut dyn Write, bundle: &CovarianceBundle) -> std::io::Result<()> {
    writeln!(w, "COVB v1 {} {} {}", bundle.len(), bundle.dim(), bundle.nominal_rank())?;
    for (c, y) in bundle.matrices().iter().zip(bundle.labels()) {
        writeln!(w, "y {}", fmt_f64(*y))?;
        write_matrix(w, c.as_matrix())?;
    }
    Ok(())
}

pub fn write_bundle(path: &Path, bundle: &CovarianceBundle) -> Result<()> {
    write_file(path, |w| write_bundle_to(w, bundle))
}

pub fn read_bundle(path: &Path) -> Result<CovarianceBundle> {
    let mut lines = Lines::open(path)?;
    let head = lines.header("COVB", 3)?;
    let n = lines.parse_usize(&head[0])?;
    let p = lines.parse_usize(&head[1])?;
    let r = lines.parse_usize(&head[2])?;
    if n == 0 || p == 0 {
        return Err(lines.error("N and P must be positive"));
    }
    let mut matrices = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = lines.keyword("y", 1)?;
        labels.push(lines.parse_f64(&label[0])?);
        matrices.push(SymMat::new(lines.matrix(p, p)?)?);
    }
    lines.finish()?;
    CovarianceBundle::new(matrices, labels, r, Provenance::File(path.to_path_buf())).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: 1,
        message: e.to_string(),
    })
}

/// `LEADFIELD v1 P Q`, then `P` rows of `Q` values.
pub fn write_leadfield(path: &Path, lead: &Leadfield) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "LEADFIELD v1 {} {}", lead.sensors(), lead.sources())?;
        write_matrix(w, lead.matrix())
    })
}

pub fn read_leadfield(path: &Path) -> Result<Leadfield> {
    let mut lines = Lines::open(path)?;
    let head = lines.header("LEADFIELD", 2)?;
    let p = lines.parse_usize(&head[0])?;
    let q = lines.parse_usize(&head[1])?;
    let g = lines.matrix(p, q)?;
    lines.finish()?;
    Leadfield::new(g)
}

/// `SYMMAT v1 P`, then `P` rows.
pub fn write_symmat(path: &Path, m: &SymMat) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "SYMMAT v1 {}", m.dim())?;
        write_matrix(w, m.as_matrix())
    })
}

pub fn read_symmat(path: &Path) -> Result<SymMat> {
    let mut lines = Lines::open(path)?;
    let head = lines.header("SYMMAT", 1)?;
    let p = lines.parse_usize(&head[0])?;
    let m = lines.matrix(p, p)?;
    lines.finish()?;
    SymMat::new(m)
}

/// One row per fold in the `method,filter,embedding,rank,fold,lambda,mae,seed` schema.
pub fn write_cv_csv(w: &mut dyn Write, spec: &PipelineSpec, report: &CVReport) -> std::io::Result<()> {
    writeln!(w, "{RESULTS_HEADER}")?;
    for (fold, (mae, lambda)) in report.per_fold_mae.iter().zip(&report.per_fold_lambda).enumerate() {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            spec.name(),
            spec.filter.kind(),
            spec.embedding,
            report.rank,
            fold,
            fmt_f64(*lambda),
            fmt_f64(*mae),
            report.seed
        )?;
    }
    Ok(())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_sweep_csv(w: &mut dyn Write, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_HEADER}")?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.axis,
            fmt_f64(r.value),
            r.repeat,
            r.method,
            r.filter,
            r.embedding,
            r.rank,
            r.fold.map(|f| f.to_string()).unwrap_or_default(),
            opt(r.lambda),
            opt(r.mae),
            r.seed,
            fmt_f64(r.label_std),
            opt(r.tangent_distortion),
            csv_field(r.error.as_deref().unwrap_or("")),
        )?;
    }
    Ok(())
}

/// Serializes everything `predict` needs.
pub fn write_model_to(w: &mut dyn Write, model: &FittedPipeline) -> std::io::Result<()> {
    writeln!(w, "MODEL v1")?;
    writeln!(w, "embedding {}", model.embedding.kind())?;
    let f = &model.filter;
    writeln!(w, "filter {} {} {}", f.kind, f.w.nrows(), f.w.ncols())?;
    write_matrix(w, &f.w)?;
    writeln!(w, "rank {}", model.embedding.rank())?;
    match model.embedding.reference() {
        Some(r) => {
            writeln!(w, "reference {}", r.dim())?;
            write_matrix(w, r.as_matrix())?;
        }
        None => writeln!(w, "reference none")?,
    }
    let m = &model.model;
    writeln!(w, "lambda {}", fmt_f64(m.lambda_star))?;
    writeln!(w, "intercept {}", fmt_f64(m.intercept))?;
    writeln!(w, "features {}", m.beta.len())?;
    for (name, v) in [("beta", &m.beta), ("feature_mean", &m.feature_mean), ("feature_scale", &m.feature_scale)] {
        write!(w, "{name} ")?;
        write_row(w, v.iter().copied())?;
    }
    Ok(())
}

pub fn write_model(path: &Path, model: &FittedPipeline) -> Result<()> {
    write_file(path, |w| write_model_to(w, model))
}

pub fn read_model(path: &Path) -> Result<FittedPipeline> {
    let mut lines = Lines::open(path)?;
    lines.header("MODEL", 0)?;
    let kind: EmbeddingKind = lines.keyword("embedding", 1)?[0].parse()?;
    let head = lines.keyword("filter", 3)?;
    let filter_kind: FilterKind = head[0].parse()?;
    let (p, r) = (lines.parse_usize(&head[1])?, lines.parse_usize(&head[2])?);
    let w = lines.matrix(p, r)?;
    let rank = lines.keyword_usize("rank")?;
    let reference_head = lines.keyword("reference", 1)?;
    let reference = if reference_head[0] == "none" {
        None
    } else {
        let d = lines.parse_usize(&reference_head[0])?;
        Some(SymMat::new(lines.matrix(d, d)?)?)
    };
    let lambda_star = lines.keyword_f64("lambda")?;
    let intercept = lines.keyword_f64("intercept")?;
    let k = lines.keyword_usize("features")?;
    let mut vectors = Vec::with_capacity(3);
    for name in ["beta", "feature_mean", "feature_scale"] {
        let values = lines.keyword(name, k)?;
        let parsed = values.iter().map(|t| lines.parse_f64(t)).collect::<Result<Vec<_>>>()?;
        vectors.push(DVector::from_vec(parsed));
    }
    lines.finish()?;
    let feature_scale = vectors.pop().expect("three vectors");
    let feature_mean = vectors.pop().expect("three vectors");
    let beta = vectors.pop().expect("three vectors");
    let embedding = Embedding::with_reference(kind, reference, rank)?;
    Ok(FittedPipeline {
        filter: SpatialFilter { w, kind: filter_kind, metadata: Vec::new() },
        embedding,
        model: RidgeModel { beta, intercept, lambda_star, feature_mean, feature_scale },
    })
}
