//! Frame embeddings and relevance scores.
//!
//! Frame `i` corresponds to second `i` of the video at 1 fps sampling. The
//! engine only deals in indices; mapping them back to timestamps is up to the
//! caller.

use crate::error::{Error, Result};

/// Rows with a norm below this are rejected by [`normalize_embeddings`].
pub const MIN_ROW_NORM: f64 = 1e-12;

/// `count` frame feature vectors of dimension `dim`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    count: usize,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingSet {
    pub fn new(count: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if count == 0 || dim == 0 {
            return Err(Error::data(format!(
                "embedding set must be non-empty (count={count}, dim={dim})"
            )));
        }
        if data.len() != count * dim {
            return Err(Error::Dimension {
                what: "embedding buffer length",
                expected: count * dim,
                actual: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(format!(
                "non-finite embedding value in row {}",
                pos / dim
            )));
        }
        Ok(Self { count, dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let count = rows.len();
        let dim = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(count * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::Dimension {
                    what: "row length",
                    expected: dim,
                    actual: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(count, dim, data)
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Inner product of frames `i` and `j`.
    #[inline]
    pub fn similarity(&self, i: usize, j: usize) -> f64 {
        dot(self.row(i), self.row(j))
    }
}

/// Scales every row to unit ℓ2 norm.
pub fn normalize_embeddings(raw: &EmbeddingSet) -> Result<EmbeddingSet> {
    let mut data = Vec::with_capacity(raw.data.len());
    for (i, row) in raw.rows().enumerate() {
        let norm = dot(row, row).sqrt();
        if norm < MIN_ROW_NORM {
            return Err(Error::ZeroVector { row: i });
        }
        data.extend(row.iter().map(|v| v / norm));
    }
    Ok(EmbeddingSet {
        count: raw.count,
        dim: raw.dim,
        data,
    })
}

/// Per-frame query relevance, each entry in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelevanceVector(Vec<f64>);

impl RelevanceVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        for (i, &s) in scores.iter().enumerate() {
            if !s.is_finite() {
                return Err(Error::data(format!("score at index {i} is not finite")));
            }
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::data(format!(
                    "score at index {i} is {s}, outside [0, 1]"
                )));
            }
        }
        Ok(Self(scores))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
