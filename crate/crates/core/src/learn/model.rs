use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};

/// Coefficients with `|v| <= ZERO_EPS` count as null.
pub const ZERO_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Base,
    Gtl,
    Aggregate,
}

/// Input layout of a model: `sources` transfer weights followed by
/// `raw_dim` feature weights and one intercept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub raw_dim: usize,
    pub sources: usize,
}

impl FeatureSpace {
    pub fn raw(raw_dim: usize) -> Self {
        Self {
            raw_dim,
            sources: 0,
        }
    }

    pub fn augmented(raw_dim: usize, sources: usize) -> Self {
        Self { raw_dim, sources }
    }

    /// Coefficient vector length, intercept included.
    pub fn len(&self) -> usize {
        self.sources + self.raw_dim + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for FeatureSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "raw{}+src{}", self.raw_dim, self.sources)
    }
}

impl FromStr for FeatureSpace {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("bad feature space id {s:?}"));
        let rest = s.strip_prefix("raw").ok_or_else(bad)?;
        let (d, l) = rest.split_once("+src").ok_or_else(bad)?;
        Ok(Self {
            raw_dim: d.parse().map_err(|_| bad())?,
            sources: l.parse().map_err(|_| bad())?,
        })
    }
}

/// A binary linear classifier; the unit of all network exchange.
///
/// Layout is `[β (sources) ; ω (raw features) ; intercept]`, so base models
/// are simply `[ω ; b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "ModelRecord", try_from = "ModelRecord")]
pub struct LinearModel {
    pub space: FeatureSpace,
    pub kind: ModelKind,
    pub coefficients: Vec<f64>,
    /// Set when training saw a single class and fell back to a constant.
    pub degenerate: bool,
}

impl LinearModel {
    pub fn new(space: FeatureSpace, kind: ModelKind, coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.len() != space.len() {
            return Err(Error::Dimension {
                expected: space.len(),
                got: coefficients.len(),
            });
        }
        if coefficients.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite coefficient".into()));
        }
        Ok(Self {
            space,
            kind,
            coefficients,
            degenerate: false,
        })
    }

    pub fn zeros(space: FeatureSpace, kind: ModelKind) -> Self {
        Self {
            space,
            kind,
            coefficients: vec![0.0; space.len()],
            degenerate: false,
        }
    }

    /// The constant classifier `sign`, flagged degenerate.
    pub fn constant(space: FeatureSpace, kind: ModelKind, sign: f64) -> Self {
        let mut m = Self::zeros(space, kind);
        *m.coefficients.last_mut().expect("non-empty layout") = sign;
        m.degenerate = true;
        m
    }

    pub fn beta(&self) -> &[f64] {
        &self.coefficients[..self.space.sources]
    }

    pub fn omega(&self) -> &[f64] {
        &self.coefficients[self.space.sources..self.space.sources + self.space.raw_dim]
    }

    pub fn intercept(&self) -> f64 {
        self.coefficients[self.space.len() - 1]
    }

    /// Number of coefficients with `|v| > ZERO_EPS` (intercept included).
    pub fn non_null_count(&self) -> usize {
        self.coefficients
            .iter()
            .filter(|v| v.abs() > ZERO_EPS)
            .count()
    }

    /// Non-null count over `β` and `ω` only, i.e. the quantity bounded by κ.
    pub fn support_size(&self) -> usize {
        self.coefficients[..self.space.len() - 1]
            .iter()
            .filter(|v| v.abs() > ZERO_EPS)
            .count()
    }

    /// `ωᵀx + b` over raw features, ignoring any transfer weights.
    pub fn raw_margin(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.space.raw_dim {
            return Err(Error::Dimension {
                expected: self.space.raw_dim,
                got: x.len(),
            });
        }
        Ok(dot(self.omega(), x) + self.intercept())
    }

    /// `βᵀs + ωᵀx + b` given precomputed source features `s`.
    pub fn augmented_margin(&self, source_feats: &[f64], x: &[f64]) -> Result<f64> {
        if source_feats.len() != self.space.sources {
            return Err(Error::Dimension {
                expected: self.space.sources,
                got: source_feats.len(),
            });
        }
        Ok(dot(self.beta(), source_feats) + self.raw_margin(x)?)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coefficient payload of a serialized model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "encoding", rename_all = "snake_case")]
pub enum CoefficientPayload {
    Dense {
        values: Vec<f64>,
    },
    Sparse {
        len: usize,
        entries: Vec<(u32, f64)>,
    },
}

/// Versioned wire record for [`LinearModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelRecord {
    pub version: u32,
    pub feature_space_id: String,
    pub kind: ModelKind,
    #[serde(default)]
    pub degenerate: bool,
    pub payload: CoefficientPayload,
}

impl ModelRecord {
    pub const VERSION: u32 = 1;
    const MAGIC: &'static [u8; 4] = b"GTLM";

    /// Binary layout (little endian): magic `GTLM`, u32 version, u8 kind,
    /// u8 flags (bit0 sparse, bit1 degenerate), u32 raw_dim, u32 sources,
    /// u32 count, then `count` f64 values or `count` (u32 index, f64) pairs.
    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let space: FeatureSpace = self.feature_space_id.parse()?;
        let mut out = Vec::new();
        out.extend_from_slice(Self::MAGIC);
        out.extend_from_slice(&self.version.to_le_bytes());
        out.push(match self.kind {
            ModelKind::Base => 0,
            ModelKind::Gtl => 1,
            ModelKind::Aggregate => 2,
        });
        let sparse = matches!(self.payload, CoefficientPayload::Sparse { .. });
        out.push(u8::from(sparse) | (u8::from(self.degenerate) << 1));
        out.extend_from_slice(&(space.raw_dim as u32).to_le_bytes());
        out.extend_from_slice(&(space.sources as u32).to_le_bytes());
        match &self.payload {
            CoefficientPayload::Dense { values } => {
                out.extend_from_slice(&(values.len() as u32).to_le_bytes());
                values
                    .iter()
                    .for_each(|v| out.extend_from_slice(&v.to_le_bytes()));
            }
            CoefficientPayload::Sparse { entries, .. } => {
                out.extend_from_slice(&(entries.len() as u32).to_le_bytes());
                for (i, v) in entries {
                    out.extend_from_slice(&i.to_le_bytes());
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = |why: &str| Error::format("<model record>", why.to_string());
        let take = |at: usize, n: usize| bytes.get(at..at + n).ok_or_else(|| bad("truncated"));
        let u32_at = |at: usize| take(at, 4).map(|b| u32::from_le_bytes(b.try_into().unwrap()));
        let f64_at = |at: usize| take(at, 8).map(|b| f64::from_le_bytes(b.try_into().unwrap()));
        if take(0, 4)? != Self::MAGIC {
            return Err(bad("bad magic"));
        }
        let version = u32_at(4)?;
        if version != Self::VERSION {
            return Err(bad("unsupported version"));
        }
        let kind = match take(8, 1)?[0] {
            0 => ModelKind::Base,
            1 => ModelKind::Gtl,
            2 => ModelKind::Aggregate,
            _ => return Err(bad("unknown kind")),
        };
        let flags = take(9, 1)?[0];
        let space = FeatureSpace::augmented(u32_at(10)? as usize, u32_at(14)? as usize);
        let count = u32_at(18)? as usize;
        let mut at = 22;
        let payload = if flags & 1 == 1 {
            let mut entries = Vec::with_capacity(count);
            for _ in 0..count {
                entries.push((u32_at(at)?, f64_at(at + 4)?));
                at += 12;
            }
            CoefficientPayload::Sparse {
                len: space.len(),
                entries,
            }
        } else {
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                values.push(f64_at(at)?);
                at += 8;
            }
            CoefficientPayload::Dense { values }
        };
        if at != bytes.len() {
            return Err(bad("trailing bytes"));
        }
        Ok(Self {
            version,
            feature_space_id: space.to_string(),
            kind,
            degenerate: flags & 2 == 2,
            payload,
        })
    }
}

impl From<LinearModel> for ModelRecord {
    fn from(m: LinearModel) -> Self {
        let nnz = m.non_null_count();
        let payload = if nnz * 2 < m.coefficients.len() {
            CoefficientPayload::Sparse {
                len: m.coefficients.len(),
                entries: m
                    .coefficients
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| v.abs() > ZERO_EPS)
                    .map(|(i, &v)| (i as u32, v))
                    .collect(),
            }
        } else {
            CoefficientPayload::Dense {
                values: m.coefficients,
            }
        };
        ModelRecord {
            version: ModelRecord::VERSION,
            feature_space_id: m.space.to_string(),
            kind: m.kind,
            degenerate: m.degenerate,
            payload,
        }
    }
}

impl TryFrom<ModelRecord> for LinearModel {
    type Error = Error;

    fn try_from(r: ModelRecord) -> Result<Self> {
        let space: FeatureSpace = r.feature_space_id.parse()?;
        let coefficients = match r.payload {
            CoefficientPayload::Dense { values } => values,
            CoefficientPayload::Sparse { len, entries } => {
                if len != space.len() {
                    return Err(Error::Dimension {
                        expected: space.len(),
                        got: len,
                    });
                }
                let mut v = vec![0.0; len];
                for (i, x) in entries {
                    *v.get_mut(i as usize).ok_or(Error::Dimension {
                        expected: len,
                        got: i as usize + 1,
                    })? = x;
                }
                v
            }
        };
        let mut m = LinearModel::new(space, r.kind, coefficients)?;
        m.degenerate = r.degenerate;
        Ok(m)
    }
}

/// Rows plus ±1 targets for one binary task. Rows are borrowed.
#[derive(Debug, Clone)]
pub struct BinaryProblem<'a> {
    pub rows: Vec<&'a [f64]>,
    pub targets: Vec<f64>,
}

impl<'a> BinaryProblem<'a> {
    pub fn new(rows: Vec<&'a [f64]>, targets: Vec<f64>) -> Result<Self> {
        if rows.len() != targets.len() {
            return Err(Error::Dimension {
                expected: rows.len(),
                got: targets.len(),
            });
        }
        if targets.iter().any(|&t| t != 1.0 && t != -1.0) {
            return Err(Error::config("binary targets must be +1 or -1"));
        }
        if let Some(d) = rows.first().map(|r| r.len()) {
            if let Some(r) = rows.iter().find(|r| r.len() != d) {
                return Err(Error::Dimension {
                    expected: d,
                    got: r.len(),
                });
            }
        }
        Ok(Self { rows, targets })
    }

    /// Class `positive` against every other class.
    pub fn one_vs_rest(samples: &'a [Sample], positive: usize) -> Self {
        Self {
            rows: samples.iter().map(|s| s.features.as_slice()).collect(),
            targets: samples
                .iter()
                .map(|s| if s.label == positive { 1.0 } else { -1.0 })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.rows.first().map(|r| r.len())
    }

    /// `Some(sign)` when every target has the same sign.
    pub fn single_class(&self) -> Option<f64> {
        let first = *self.targets.first()?;
        self.targets.iter().all(|&t| t == first).then_some(first)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_accessors() {
        let m = LinearModel::new(
            FeatureSpace::augmented(2, 3),
            ModelKind::Gtl,
            vec![0.1, 0.0, 0.3, 1.0, 2.0, -0.5],
        )
        .unwrap();
        assert_eq!(m.beta(), &[0.1, 0.0, 0.3]);
        assert_eq!(m.omega(), &[1.0, 2.0]);
        assert_eq!(m.intercept(), -0.5);
        assert_eq!(m.non_null_count(), 5);
        assert_eq!(m.support_size(), 4);
        assert_eq!(m.raw_margin(&[1.0, 1.0]).unwrap(), 2.5);
        assert!((m.augmented_margin(&[1.0, 1.0, 1.0], &[0.0, 0.0]).unwrap() + 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(LinearModel::new(FeatureSpace::raw(2), ModelKind::Base, vec![1.0]).is_err());
        assert!(
            LinearModel::new(FeatureSpace::raw(1), ModelKind::Base, vec![f64::NAN, 0.0]).is_err()
        );
        let m = LinearModel::zeros(FeatureSpace::raw(3), ModelKind::Base);
        assert!(matches!(m.raw_margin(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn sparse_record_for_sparse_model() {
        let mut m = LinearModel::zeros(FeatureSpace::augmented(10, 2), ModelKind::Gtl);
        m.coefficients[4] = 2.0;
        let rec = ModelRecord::from(m.clone());
        assert!(
            matches!(rec.payload, CoefficientPayload::Sparse { ref entries, .. } if entries == &[(4, 2.0)])
        );
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("raw10+src2"));
        assert_eq!(serde_json::from_str::<LinearModel>(&json).unwrap(), m);
    }

    #[test]
    fn binary_problem_validation() {
        let rows: Vec<&[f64]> = vec![&[1.0], &[2.0]];
        assert!(BinaryProblem::new(rows.clone(), vec![1.0, 0.0]).is_err());
        assert!(BinaryProblem::new(rows.clone(), vec![1.0]).is_err());
        let p = BinaryProblem::new(rows, vec![-1.0, -1.0]).unwrap();
        assert_eq!(p.single_class(), Some(-1.0));
    }

    proptest! {
        #[test]
        fn record_roundtrip(raw_dim in 1usize..20, sources in 0usize..5,
                            seed in any::<u64>(), zero_mask in any::<u64>()) {
            let space = FeatureSpace::augmented(raw_dim, sources);
            let coefficients: Vec<f64> = (0..space.len()).map(|i| {
                if zero_mask >> (i % 64) & 1 == 1 { 0.0 }
                else { ((seed.wrapping_mul(i as u64 + 1) % 2001) as f64 - 1000.0) / 7.0 }
            }).collect();
            let m = LinearModel::new(space, ModelKind::Aggregate, coefficients).unwrap();
            let rec = ModelRecord::from(m.clone());
            let back = LinearModel::try_from(ModelRecord::from_bytes(&rec.to_bytes().unwrap()).unwrap()).unwrap();
            prop_assert_eq!(&back, &m);
            let json = serde_json::to_vec(&m).unwrap();
            prop_assert_eq!(serde_json::from_slice::<LinearModel>(&json).unwrap(), m);
        }
    }
}
