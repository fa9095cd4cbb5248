//! Greedy relevance + log-det diversity selection with an incrementally
//! maintained inverse Gram matrix.
//!
//! For a selected set `F` the state keeps `B = (G_F + εI)^{-1}`. Adding a
//! unit frame `e_i` borders `G_F + εI` with `r = E_F e_i` and a `1 + ε`
//! corner, so with `y = B r` and the Schur complement `α = (1 + ε) - rᵀ B r`:
//!
//! ```text
//! (G_{F+i} + εI)^{-1} = | B + y yᵀ/α   -y/α |
//!                       |   -yᵀ/α      1/α  |
//! log det(G_{F+i} + εI) = log det(G_F + εI) + log α
//! ```
//!
//! The greedy scan never recomputes `rᵀ B r` from scratch. Each candidate
//! carries its current quadratic form `q_i`; after frame `j` joins with
//! `(y, α)`, the bordered inverse gives
//! `q_i ← q_i + (yᵀ r_i - s_ij)² / α` where `s_ij = e_i · e_j`, so a step
//! costs `O(N (m + d) + m²)`.

use serde::{Deserialize, Serialize};

use crate::embedding::{dot, EmbeddingSet, RelevanceVector};
use crate::error::{Error, Result};
use crate::linalg::{logdet_spd, ridge_gram, SquareMatrix};

/// Candidates whose Schur complement falls to this value or below are
/// treated as linearly dependent on the selected set and skipped.
pub const SCHUR_FLOOR: f64 = 1e-12;

/// Which objective the selection ran under.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateMode {
    RelevanceDiversity,
    DiversityOnly,
}

impl GateMode {
    pub fn as_str(self) -> &'static str {
        match self {
            GateMode::RelevanceDiversity => "relevance_diversity",
            GateMode::DiversityOnly => "diversity_only",
        }
    }
}

/// Selected frames plus `(G_F + εI)^{-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramInverseState {
    selected: Vec<usize>,
    inverse: SquareMatrix,
    epsilon: f64,
}

/// Quantities produced while bordering the inverse with a new frame.
#[derive(Debug, Clone)]
pub struct BorderUpdate {
    /// `B r` for the pre-update `B`.
    pub y: Vec<f64>,
    /// Schur complement `(1 + ε) - rᵀ B r`.
    pub schur: f64,
}

impl GramInverseState {
    pub fn new(epsilon: f64) -> Self {
        Self {
            selected: Vec::new(),
            inverse: SquareMatrix::zeros(0),
            epsilon,
        }
    }

    /// Builds a state by adding `frames` one at a time.
    pub fn from_frames(e: &EmbeddingSet, frames: &[usize], epsilon: f64) -> Result<Self> {
        let mut state = Self::new(epsilon);
        for &i in frames {
            state.extend_in_place(e, i)?;
        }
        Ok(state)
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn inverse(&self) -> &SquareMatrix {
        &self.inverse
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.selected.len()
    }

    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.selected.contains(&i)
    }

    /// `r = E_F e_i`.
    pub fn cross_similarities(&self, e: &EmbeddingSet, i: usize) -> Vec<f64> {
        let ei = e.row(i);
        self.selected.iter().map(|&j| dot(e.row(j), ei)).collect()
    }

    /// `B r`.
    pub fn apply_inverse(&self, r: &[f64]) -> Vec<f64> {
        (0..self.len()).map(|a| dot(self.inverse.row(a), r)).collect()
    }

    /// `(1 + ε) - rᵀ B r` for candidate `i`.
    pub fn schur_complement(&self, e: &EmbeddingSet, i: usize) -> f64 {
        if self.is_empty() {
            return 1.0 + self.epsilon;
        }
        let r = self.cross_similarities(e, i);
        let y = self.apply_inverse(&r);
        (1.0 + self.epsilon) - dot(&r, &y)
    }

    /// Appends frame `i`, bordering the inverse in place.
    pub fn extend_in_place(&mut self, e: &EmbeddingSet, i: usize) -> Result<BorderUpdate> {
        check_index(e, i)?;
        if self.contains(i) {
            return Err(Error::config(format!("frame {i} is already selected")));
        }
        let m = self.len();
        let r = self.cross_similarities(e, i);
        let y = self.apply_inverse(&r);
        let schur = (1.0 + self.epsilon) - dot(&r, &y);
        if !(schur > SCHUR_FLOOR) {
            return Err(Error::NumericalDomain(format!(
                "Schur complement {schur:e} for frame {i} is at or below {SCHUR_FLOOR:e}; \
                 the frame lies in the span of the selected set"
            )));
        }

        let inv_schur = 1.0 / schur;
        let mut next = SquareMatrix::zeros(m + 1);
        for a in 0..m {
            let ya = y[a] * inv_schur;
            for b in 0..m {
                next[(a, b)] = self.inverse[(a, b)] + ya * y[b];
            }
            next[(a, m)] = -ya;
            next[(m, a)] = -ya;
        }
        next[(m, m)] = inv_schur;

        self.inverse = next;
        self.selected.push(i);
        Ok(BorderUpdate { y, schur })
    }
}

/// Returns a new state with frame `i` appended.
pub fn extend_state(
    state: &GramInverseState,
    e: &EmbeddingSet,
    i: usize,
) -> Result<GramInverseState> {
    let mut next = state.clone();
    next.extend_in_place(e, i)?;
    Ok(next)
}

/// `log det(G_{F+i} + εI) - log det(G_F + εI)` through the maintained inverse.
pub fn diversity_gain(state: &GramInverseState, e: &EmbeddingSet, i: usize) -> Result<f64> {
    check_index(e, i)?;
    if state.contains(i) {
        return Err(Error::config(format!("frame {i} is already selected")));
    }
    let x = state.schur_complement(e, i);
    if !(x > 0.0) {
        return Err(Error::NumericalDomain(format!(
            "log argument {x:e} for frame {i} is not positive"
        )));
    }
    Ok(x.ln())
}

/// Total marginal gain `R_eff(i) + λ log((1 + ε) - rᵀ B r)`.
pub fn marginal_gain(
    state: &GramInverseState,
    e: &EmbeddingSet,
    i: usize,
    r_eff_i: f64,
    lambda: f64,
) -> Result<f64> {
    Ok(r_eff_i + lambda * diversity_gain(state, e, i)?)
}

/// `log det(E_F E_Fᵀ + εI)` by Cholesky. Not used by the greedy scan.
pub fn logdet_diversity(e: &EmbeddingSet, subset: &[usize], epsilon: f64) -> Result<f64> {
    for (pos, &i) in subset.iter().enumerate() {
        check_index(e, i)?;
        if subset[..pos].contains(&i) {
            return Err(Error::config(format!("frame {i} appears twice in the subset")));
        }
    }
    let g = ridge_gram(e, subset, epsilon);
    logdet_spd(&g, 0.0).ok_or_else(|| {
        Error::NumericalDomain("ridge Gram matrix is not numerically positive definite".into())
    })
}

/// How the per-step candidate scan is executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scan {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

// Derivable only in one feature configuration.
#[allow(clippy::derivable_impls)]
impl Default for Scan {
    fn default() -> Self {
        #[cfg(feature = "parallel")]
        {
            Scan::Parallel
        }
        #[cfg(not(feature = "parallel"))]
        {
            Scan::Sequential
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SelectOptions {
    pub scan: Scan,
    /// Record every candidate's gain at the first step.
    pub trace_first_step: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Selected frames in ascending (temporal) order.
    pub indices: Vec<usize>,
    /// Selected frames in the order they were picked.
    pub selection_order: Vec<usize>,
    /// Total marginal gain of each pick, in pick order.
    pub gains: Vec<f64>,
    pub lambda_used: f64,
    pub gate: GateMode,
    /// The budget covered every frame, so nothing was truncated.
    pub saturated: bool,
    /// Gain of every candidate at the first step (`None` = not traced or
    /// skipped), present only when tracing was requested.
    pub first_step_gains: Option<Vec<Option<f64>>>,
}

impl SelectionResult {
    pub(crate) fn from_order(
        order: Vec<usize>,
        gains: Vec<f64>,
        lambda: f64,
        saturated: bool,
    ) -> Self {
        let mut indices = order.clone();
        indices.sort_unstable();
        Self {
            indices,
            selection_order: order,
            gains,
            lambda_used: lambda,
            gate: GateMode::RelevanceDiversity,
            saturated,
            first_step_gains: None,
        }
    }
}

/// Greedy selection with the default scan.
pub fn rdmv_select(
    e: &EmbeddingSet,
    r_eff: &RelevanceVector,
    k: usize,
    lambda: f64,
    epsilon: f64,
) -> Result<SelectionResult> {
    rdmv_select_with(e, r_eff, k, lambda, epsilon, &SelectOptions::default())
}

pub(crate) fn validate_selection_args(
    e: &EmbeddingSet,
    r_eff: &RelevanceVector,
    k: usize,
    lambda: f64,
    epsilon: f64,
) -> Result<()> {
    if k == 0 {
        return Err(Error::config("k must be at least 1"));
    }
    if r_eff.len() != e.count() {
        return Err(Error::Dimension {
            what: "relevance scores vs frames",
            expected: e.count(),
            actual: r_eff.len(),
        });
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::config(format!("lambda must be finite and >= 0 (got {lambda})")));
    }
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::config(format!("epsilon must be finite and > 0 (got {epsilon})")));
    }
    Ok(())
}

/// Candidate bookkeeping for the greedy scan.
struct CandidatePool {
    budget: usize,
    /// `q_i = r_iᵀ B r_i` for every frame.
    quad: Vec<f64>,
    /// Row `i` holds `e_i · e_f` for every selected `f`, in pick order.
    cross: Vec<f64>,
    /// Selected, or skipped for the rest of the run.
    taken: Vec<bool>,
}

impl CandidatePool {
    fn new(n: usize, budget: usize) -> Self {
        Self {
            budget,
            quad: vec![0.0; n],
            cross: vec![0.0; n * budget],
            taken: vec![false; n],
        }
    }

    #[inline]
    fn gain(&self, i: usize, one_plus_eps: f64, r_eff: &[f64], lambda: f64) -> Option<f64> {
        if self.taken[i] {
            return None;
        }
        let x = one_plus_eps - self.quad[i];
        if !(x > SCHUR_FLOOR) {
            return None;
        }
        Some(r_eff[i] + lambda * x.ln())
    }

    fn best(&self, scan: Scan, one_plus_eps: f64, r_eff: &[f64], lambda: f64) -> Option<(usize, f64)> {
        match scan {
            Scan::Sequential => {
                let mut best: Option<(usize, f64)> = None;
                for i in 0..self.taken.len() {
                    if let Some(g) = self.gain(i, one_plus_eps, r_eff, lambda) {
                        // strict `>` keeps the lowest index on ties
                        if best.is_none_or(|(_, bg)| g > bg) {
                            best = Some((i, g));
                        }
                    }
                }
                best
            }
            #[cfg(feature = "parallel")]
            Scan::Parallel => {
                use rayon::prelude::*;
                (0..self.taken.len())
                    .into_par_iter()
                    .filter_map(|i| self.gain(i, one_plus_eps, r_eff, lambda).map(|g| (i, g)))
                    .reduce_with(prefer)
            }
        }
    }

    /// Folds the newly selected frame `j` (the `m`-th pick) into every
    /// remaining candidate's cached quadratic form.
    fn absorb(&mut self, scan: Scan, e: &EmbeddingSet, j: usize, m: usize, update: &BorderUpdate) {
        let budget = self.budget;
        let ej = e.row(j);
        let y = &update.y;
        let inv_schur = 1.0 / update.schur;
        let step = |i: usize, row: &mut [f64], q: &mut f64, taken: bool| {
            if taken {
                return;
            }
            let s = dot(e.row(i), ej);
            let t = dot(&row[..m], y) - s;
            *q += t * t * inv_schur;
            row[m] = s;
        };
        match scan {
            Scan::Sequential => {
                for (i, (row, q)) in self
                    .cross
                    .chunks_exact_mut(budget)
                    .zip(self.quad.iter_mut())
                    .enumerate()
                {
                    step(i, row, q, self.taken[i]);
                }
            }
            #[cfg(feature = "parallel")]
            Scan::Parallel => {
                use rayon::prelude::*;
                let taken = &self.taken;
                self.cross
                    .par_chunks_exact_mut(budget)
                    .zip(self.quad.par_iter_mut())
                    .enumerate()
                    .for_each(|(i, (row, q))| step(i, row, q, taken[i]));
            }
        }
    }
}

/// Higher gain wins; equal gains go to the lower frame index.
#[cfg(feature = "parallel")]
#[inline]
fn prefer(a: (usize, f64), b: (usize, f64)) -> (usize, f64) {
    if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) {
        b
    } else {
        a
    }
}

/// Greedy selection of `min(k, N)` frames maximizing relevance plus
/// `λ`-weighted log-det diversity.
///
/// Rows of `e` are expected to be unit norm. Candidates whose Schur
/// complement is at or below [`SCHUR_FLOOR`] are skipped; if every remaining
/// candidate is skipped the run stops early with fewer frames.
pub fn rdmv_select_with(
    e: &EmbeddingSet,
    r_eff: &RelevanceVector,
    k: usize,
    lambda: f64,
    epsilon: f64,
    opts: &SelectOptions,
) -> Result<SelectionResult> {
    validate_selection_args(e, r_eff, k, lambda, epsilon)?;
    let n = e.count();
    let budget = k.min(n);
    let scores = r_eff.as_slice();
    let one_plus_eps = 1.0 + epsilon;

    let mut state = GramInverseState::new(epsilon);
    let mut pool = CandidatePool::new(n, budget);
    let mut gains = Vec::with_capacity(budget);

    let first_step_gains = opts.trace_first_step.then(|| {
        (0..n)
            .map(|i| pool.gain(i, one_plus_eps, scores, lambda))
            .collect::<Vec<_>>()
    });

    while state.len() < budget {
        let Some((best, gain)) = pool.best(opts.scan, one_plus_eps, scores, lambda) else {
            break;
        };
        let m = state.len();
        let update = match state.extend_in_place(e, best) {
            Ok(u) => u,
            Err(Error::NumericalDomain(_)) => {
                // the cached form disagreed with the direct Schur complement
                pool.taken[best] = true;
                continue;
            }
            Err(err) => return Err(err),
        };
        pool.taken[best] = true;
        gains.push(gain);
        if state.len() < budget {
            pool.absorb(opts.scan, e, best, m, &update);
        }
    }

    let mut result = SelectionResult::from_order(state.selected.clone(), gains, lambda, k >= n);
    result.first_step_gains = first_step_gains;
    Ok(result)
}

fn check_index(e: &EmbeddingSet, i: usize) -> Result<()> {
    if i >= e.count() {
        return Err(Error::data(format!(
            "frame index {i} out of range for {} frames",
            e.count()
        )));
    }
    Ok(())
}
