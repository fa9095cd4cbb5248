//! Small dense symmetric positive-definite helpers.
//!
//! These back the direct (non-incremental) routes: the log-det evaluation,
//! the oracles and the invariant checks. The greedy selector never calls
//! [`spd_inverse`]; every call is counted per thread so tests can assert that.

use std::cell::Cell;

use crate::embedding::EmbeddingSet;

thread_local! {
    static DENSE_INVERSIONS: Cell<u64> = const { Cell::new(0) };
}

/// Number of dense inversions performed on the current thread.
pub fn dense_inversion_count() -> u64 {
    DENSE_INVERSIONS.with(Cell::get)
}

/// Square row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "matrix buffer must be n*n");
        Self { n, data }
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn matmul(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = SquareMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Frobenius norm of `self - other`.
    pub fn frobenius_distance(&self, other: &SquareMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Largest `|a_ij - a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for SquareMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for SquareMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// `E_F E_Fᵀ + εI` for the frames in `subset`.
///
/// Rows of a normalized set have unit norm, so the diagonal is written as
/// exactly `1 + ε`. This keeps the direct route consistent with the
/// incremental one, whose bordering corner is `1 + ε` by construction.
pub fn ridge_gram(e: &EmbeddingSet, subset: &[usize], epsilon: f64) -> SquareMatrix {
    let m = subset.len();
    let mut g = SquareMatrix::zeros(m);
    for a in 0..m {
        g[(a, a)] = 1.0 + epsilon;
        for b in (a + 1)..m {
            let s = e.similarity(subset[a], subset[b]);
            g[(a, b)] = s;
            g[(b, a)] = s;
        }
    }
    g
}

/// Lower Cholesky factor of an SPD matrix.
///
/// Returns `None` when a pivot drops to `min_pivot` or below.
pub fn cholesky(a: &SquareMatrix, min_pivot: f64) -> Option<SquareMatrix> {
    factor(a, min_pivot).map(|(l, _)| l)
}

/// Cholesky factor plus the pivots `d_j = L_jj²`. The last pivot is the
/// Schur complement of the trailing entry.
fn factor(a: &SquareMatrix, min_pivot: f64) -> Option<(SquareMatrix, Vec<f64>)> {
    let n = a.size();
    let mut l = SquareMatrix::zeros(n);
    let mut pivots = Vec::with_capacity(n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d.is_nan() || d <= min_pivot {
            return None;
        }
        pivots.push(d);
        let ljj = d.sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Some((l, pivots))
}

/// `log det(a)` for SPD `a` as the sum of log pivots. The empty matrix
/// gives 0.
pub fn logdet_spd(a: &SquareMatrix, min_pivot: f64) -> Option<f64> {
    let (_, pivots) = factor(a, min_pivot)?;
    Some(pivots.iter().map(|d| d.ln()).sum())
}

/// Dense inverse of an SPD matrix through its Cholesky factor.
pub fn spd_inverse(a: &SquareMatrix) -> Option<SquareMatrix> {
    DENSE_INVERSIONS.with(|c| c.set(c.get() + 1));
    let n = a.size();
    let l = cholesky(a, 0.0)?;
    let mut inv = SquareMatrix::zeros(n);
    let mut col = vec![0.0; n];
    for c in 0..n {
        // forward: L z = e_c
        for i in 0..n {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[(i, k)] * col[k];
            }
            col[i] = s / l[(i, i)];
        }
        // backward: Lᵀ x = z
        for i in (0..n).rev() {
            let mut s = col[i];
            for k in (i + 1)..n {
                s -= l[(k, i)] * col[k];
            }
            col[i] = s / l[(i, i)];
        }
        for i in 0..n {
            inv[(i, c)] = col[i];
        }
    }
    Some(inv)
}
