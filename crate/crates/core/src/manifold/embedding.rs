use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;

use super::distance::{dist_geometric, dist_wasserstein};
use super::mean::{mean_geometric, mean_wasserstein};
use super::tangent::{factorize, upper, vec_geometric_whitened, vec_logdiag, vec_wasserstein, FactorMat};
use crate::error::{Error, Result};
use crate::symmat::SymMat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmbeddingKind {
    Euclidean,
    GeometricTangent,
    WassersteinTangent,
    LogDiag,
}

impl EmbeddingKind {
    pub const ALL: [EmbeddingKind; 4] = [
        EmbeddingKind::Euclidean,
        EmbeddingKind::GeometricTangent,
        EmbeddingKind::WassersteinTangent,
        EmbeddingKind::LogDiag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingKind::Euclidean => "euclidean",
            EmbeddingKind::GeometricTangent => "geometric",
            EmbeddingKind::WassersteinTangent => "wasserstein",
            EmbeddingKind::LogDiag => "logdiag",
        }
    }

    /// Feature dimension `K` for `P×P` inputs and Wasserstein rank `R`.
    pub fn feature_dim(self, p: usize, r: usize) -> usize {
        match self {
            EmbeddingKind::Euclidean | EmbeddingKind::GeometricTangent => p * (p + 1) / 2,
            EmbeddingKind::WassersteinTangent => p * r,
            EmbeddingKind::LogDiag => p,
        }
    }
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbeddingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "euclidean" => Ok(EmbeddingKind::Euclidean),
            "geometric" | "riemann" => Ok(EmbeddingKind::GeometricTangent),
            "wasserstein" => Ok(EmbeddingKind::WassersteinTangent),
            "logdiag" | "log-diag" => Ok(EmbeddingKind::LogDiag),
            other => Err(Error::InvalidInput(format!("unknown embedding '{other}'"))),
        }
    }
}

/// A fitted vectorization: the embedding kind plus its tangent base point.
#[derive(Clone, Debug)]
pub struct Embedding {
    kind: EmbeddingKind,
    reference: Option<SymMat>,
    rank: usize,
    base: Base,
}

#[derive(Clone, Debug)]
enum Base {
    None,
    Euclidean(SymMat),
    Geometric { inv_sqrt: SymMat },
    Wasserstein(FactorMat),
}

impl Embedding {
    /// Fits the reference as the mean of `matrices` under the matching metric.
    ///
    /// `rank` is only used by the Wasserstein embedding.
    pub fn fit(kind: EmbeddingKind, matrices: &[SymMat], rank: usize) -> Result<Self> {
        let reference = match kind {
            EmbeddingKind::Euclidean => Some(SymMat::arithmetic_mean(matrices)?),
            EmbeddingKind::GeometricTangent => Some(mean_geometric(matrices)?),
            EmbeddingKind::WassersteinTangent => Some(mean_wasserstein(matrices, rank)?),
            EmbeddingKind::LogDiag => None,
        };
        Self::with_reference(kind, reference, rank)
    }

    pub fn with_reference(kind: EmbeddingKind, reference: Option<SymMat>, rank: usize) -> Result<Self> {
        let base = match (kind, &reference) {
            (EmbeddingKind::LogDiag, _) => Base::None,
            (_, None) => {
                return Err(Error::InvalidInput(format!("{kind} embedding needs a reference matrix")));
            }
            (EmbeddingKind::Euclidean, Some(r)) => Base::Euclidean(r.clone()),
            (EmbeddingKind::GeometricTangent, Some(r)) => Base::Geometric { inv_sqrt: r.inv_sqrt()? },
            (EmbeddingKind::WassersteinTangent, Some(r)) => Base::Wasserstein(factorize(r, rank)?),
        };
        let reference = if kind == EmbeddingKind::LogDiag { None } else { reference };
        Ok(Embedding { kind, reference, rank, base })
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn reference(&self) -> Option<&SymMat> {
        self.reference.as_ref()
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vectorize(&self, s: &SymMat) -> Result<Vec<f64>> {
        let v = match &self.base {
            Base::None => vec_logdiag(s)?,
            Base::Euclidean(r) => {
                if r.dim() != s.dim() {
                    return Err(Error::dims(r.dim(), s.dim()));
                }
                upper(&SymMat::new(s.as_matrix() - r.as_matrix())?)
            }
            Base::Geometric { inv_sqrt } => vec_geometric_whitened(inv_sqrt, s)?,
            Base::Wasserstein(y) => vec_wasserstein(y, &factorize(s, self.rank)?)?,
        };
        Ok(v.as_slice().to_vec())
    }

    pub fn transform(&self, matrices: &[SymMat]) -> Result<FeatureMatrix> {
        let p = matrices.first().map(SymMat::dim).ok_or_else(|| Error::InvalidInput("no matrices to embed".into()))?;
        let k = self.kind.feature_dim(p, self.rank);
        let mut rows = DMatrix::zeros(matrices.len(), k);
        for (i, s) in matrices.iter().enumerate() {
            let v = self.vectorize(s)?;
            if v.len() != k {
                return Err(Error::dims(k, v.len()));
            }
            rows.row_mut(i).copy_from_slice(&v);
        }
        Ok(FeatureMatrix { rows, embedding: self.clone() })
    }
}

/// `N×K` feature rows together with the embedding that produced them.
#[derive(Clone, Debug)]
pub struct FeatureMatrix {
    pub rows: DMatrix<f64>,
    pub embedding: Embedding,
}

impl FeatureMatrix {
    pub fn n(&self) -> usize {
        self.rows.nrows()
    }

    pub fn k(&self) -> usize {
        self.rows.ncols()
    }
}

/// Mean of `|d(C_i, C_{i+1}) − ‖v_i − v_{i+1}‖| / d(C_i, C_{i+1})` over the first
/// `max_pairs` consecutive pairs, where `d` is the embedding's own distance and
/// `v` its tangent vectors. Zero means the embedding preserves those distances.
///
/// `None` for the log-diagonal embedding, which has no matching distance, and
/// when no pair has a positive distance.
pub fn tangent_distortion(embedding: &Embedding, matrices: &[SymMat], max_pairs: usize) -> Result<Option<f64>> {
    let dist = match embedding.kind() {
        EmbeddingKind::LogDiag => return Ok(None),
        EmbeddingKind::Euclidean => |a: &SymMat, b: &SymMat| Ok((a.as_matrix() - b.as_matrix()).norm()),
        EmbeddingKind::GeometricTangent => dist_geometric,
        EmbeddingKind::WassersteinTangent => dist_wasserstein,
    };
    let mut total = 0.0;
    let mut count = 0usize;
    for pair in matrices.windows(2).take(max_pairs) {
        let d = dist(&pair[0], &pair[1])?;
        if !(d > 0.0) {
            continue;
        }
        let (a, b) = (embedding.vectorize(&pair[0])?, embedding.vectorize(&pair[1])?);
        let e = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        total += (d - e).abs() / d;
        count += 1;
    }
    Ok((count > 0).then(|| total / count as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn feature_dims() {
        assert_eq!(EmbeddingKind::Euclidean.feature_dim(5, 5), 15);
        assert_eq!(EmbeddingKind::GeometricTangent.feature_dim(5, 2), 15);
        assert_eq!(EmbeddingKind::WassersteinTangent.feature_dim(5, 3), 15);
        assert_eq!(EmbeddingKind::LogDiag.feature_dim(5, 3), 5);
    }

    #[test]
    fn parse_names_round_trip() {
        for kind in EmbeddingKind::ALL {
            assert_eq!(kind.name().parse::<EmbeddingKind>().unwrap(), kind);
        }
        assert!("nope".parse::<EmbeddingKind>().is_err());
    }

    #[test]
    fn reference_is_required_except_logdiag() {
        assert!(Embedding::with_reference(EmbeddingKind::GeometricTangent, None, 2).is_err());
        assert!(Embedding::with_reference(EmbeddingKind::LogDiag, None, 2).is_ok());
        let singular = SymMat::from_diagonal(&[1.0, 0.0]).unwrap();
        assert!(Embedding::with_reference(EmbeddingKind::GeometricTangent, Some(singular.clone()), 2).is_err());
        assert!(Embedding::with_reference(EmbeddingKind::WassersteinTangent, Some(singular.clone()), 2).is_err());
        assert!(Embedding::with_reference(EmbeddingKind::WassersteinTangent, Some(singular), 1).is_ok());
    }

    #[test]
    fn transform_shapes() {
        let set = vec![
            SymMat::from_diagonal(&[1.0, 2.0, 3.0]).unwrap(),
            SymMat::from_diagonal(&[2.0, 1.0, 1.0]).unwrap(),
            SymMat::from_diagonal(&[1.5, 1.5, 0.5]).unwrap(),
        ];
        for kind in EmbeddingKind::ALL {
            let e = Embedding::fit(kind, &set, 3).unwrap();
            let f = e.transform(&set).unwrap();
            assert_eq!(f.n(), 3);
            assert_eq!(f.k(), kind.feature_dim(3, 3));
        }
    }

    #[test]
    fn distortion_vanishes_at_the_reference() {
        let set = vec![
            SymMat::from_row_slice(2, &[2.0, 0.5, 0.5, 1.0]).unwrap(),
            SymMat::from_row_slice(2, &[1.0, -0.3, -0.3, 3.0]).unwrap(),
            SymMat::from_row_slice(2, &[0.5, 0.1, 0.1, 0.7]).unwrap(),
        ];
        let euclidean = Embedding::fit(EmbeddingKind::Euclidean, &set, 2).unwrap();
        assert!(tangent_distortion(&euclidean, &set, 10).unwrap().unwrap() < 1e-14);
        let geometric = Embedding::fit(EmbeddingKind::GeometricTangent, &set, 2).unwrap();
        let reference = geometric.reference().unwrap().clone();
        let anchored = [reference, set[1].clone()];
        assert!(tangent_distortion(&geometric, &anchored, 1).unwrap().unwrap() < 1e-10);
        assert!(tangent_distortion(&geometric, &set, 10).unwrap().unwrap() > 1e-4);
        let logdiag = Embedding::fit(EmbeddingKind::LogDiag, &set, 2).unwrap();
        assert_eq!(tangent_distortion(&logdiag, &set, 10).unwrap(), None);
    }
}
