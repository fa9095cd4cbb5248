//! Brute-force reference implementations.
//!
//! Nothing here touches the incremental inverse: gains come from two direct
//! log-det factorizations, optima from full enumeration.

use serde::{Deserialize, Serialize};

use crate::embedding::{dot, EmbeddingSet, RelevanceVector};
use crate::error::{Error, Result};
use crate::linalg::{logdet_spd, ridge_gram, spd_inverse};
use crate::selector::{validate_selection_args, SelectionResult, SCHUR_FLOOR};

/// Largest number of subsets [`exhaustive_optimum`] will enumerate.
pub const MAX_SUBSETS: u128 = 1_000_000;

/// Greedy selection recomputing every gain from scratch.
///
/// Same contract and tie-breaking as [`crate::selector::rdmv_select`]. A
/// candidate is skipped when the trailing Cholesky pivot of the bordered
/// Gram matrix (its Schur complement) is at or below [`SCHUR_FLOOR`].
pub fn naive_select(
    e: &EmbeddingSet,
    r_eff: &RelevanceVector,
    k: usize,
    lambda: f64,
    epsilon: f64,
) -> Result<SelectionResult> {
    validate_selection_args(e, r_eff, k, lambda, epsilon)?;
    let n = e.count();
    let budget = k.min(n);
    let scores = r_eff.as_slice();
    let mut selected: Vec<usize> = Vec::with_capacity(budget);
    let mut gains = Vec::with_capacity(budget);

    while selected.len() < budget {
        let base = logdet_spd(&ridge_gram(e, &selected, epsilon), 0.0).ok_or_else(|| {
            Error::NumericalDomain("selected Gram matrix lost positive definiteness".into())
        })?;
        let mut trial = selected.clone();
        trial.push(usize::MAX);
        let mut best: Option<(usize, f64)> = None;
        for (i, &score) in scores.iter().enumerate() {
            if selected.contains(&i) {
                continue;
            }
            *trial.last_mut().unwrap() = i;
            let Some(with_i) = logdet_spd(&ridge_gram(e, &trial, epsilon), SCHUR_FLOOR) else {
                continue;
            };
            let g = score + lambda * (with_i - base);
            if best.is_none_or(|(_, bg)| g > bg) {
                best = Some((i, g));
            }
        }
        let Some((i, g)) = best else { break };
        selected.push(i);
        gains.push(g);
    }

    Ok(SelectionResult::from_order(selected, gains, lambda, k >= n))
}

/// `Σ_{i∈F} R_eff(i) + λ log det(G_F + εI)`.
pub fn subset_objective(
    e: &EmbeddingSet,
    r_eff: &RelevanceVector,
    subset: &[usize],
    lambda: f64,
    epsilon: f64,
) -> Result<f64> {
    let relevance: f64 = subset.iter().map(|&i| r_eff.as_slice()[i]).sum();
    let div = crate::selector::logdet_diversity(e, subset, epsilon)?;
    Ok(relevance + lambda * div)
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc * (n - j) as u128 / (j + 1) as u128;
        if acc > MAX_SUBSETS * 1024 {
            return acc;
        }
    }
    acc
}

/// Best `min(k, N)`-subset by full enumeration.
///
/// Subsets are visited in lexicographic order and only a strictly better
/// objective replaces the incumbent, so ties go to the lexicographically
/// smallest set.
pub fn exhaustive_optimum(
    e: &EmbeddingSet,
    r_eff: &RelevanceVector,
    k: usize,
    lambda: f64,
    epsilon: f64,
) -> Result<(Vec<usize>, f64)> {
    validate_selection_args(e, r_eff, k, lambda, epsilon)?;
    let n = e.count();
    let k = k.min(n);
    let subsets = binomial(n, k);
    if subsets > MAX_SUBSETS {
        return Err(Error::InstanceTooLarge {
            subsets,
            limit: MAX_SUBSETS,
        });
    }

    let mut combo: Vec<usize> = (0..k).collect();
    let mut best: Option<(Vec<usize>, f64)> = None;
    loop {
        if let Ok(obj) = subset_objective(e, r_eff, &combo, lambda, epsilon) {
            if best.as_ref().is_none_or(|(_, b)| obj > *b) {
                best = Some((combo.clone(), obj));
            }
        }
        // next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&p| combo[p] < n - k + p) else {
            break;
        };
        combo[pos] += 1;
        for p in (pos + 1)..k {
            combo[p] = combo[p - 1] + 1;
        }
    }
    best.ok_or_else(|| Error::NumericalDomain("no subset had a finite objective".into()))
}

/// Relative residual of the bordered determinant identity
/// `det(G_{F+i} + εI) = det(G_F + εI) · ((1 + ε) - rᵀ (G_F + εI)^{-1} r)`.
///
/// Determinants are handled as logs; the inverse is formed densely.
pub fn det_identity_check(
    e: &EmbeddingSet,
    subset: &[usize],
    i: usize,
    epsilon: f64,
) -> Result<f64> {
    if subset.contains(&i) {
        return Err(Error::config(format!("candidate {i} is already in the subset")));
    }
    let mut union = subset.to_vec();
    union.push(i);
    let ld_union = crate::selector::logdet_diversity(e, &union, epsilon)?;
    let ld_base = crate::selector::logdet_diversity(e, subset, epsilon)?;

    let schur = if subset.is_empty() {
        1.0 + epsilon
    } else {
        let inv = spd_inverse(&ridge_gram(e, subset, epsilon))
            .ok_or_else(|| Error::NumericalDomain("Gram matrix is not invertible".into()))?;
        let ei = e.row(i);
        let r: Vec<f64> = subset.iter().map(|&j| dot(e.row(j), ei)).collect();
        let quad: f64 = (0..r.len()).map(|a| r[a] * dot(inv.row(a), &r)).sum();
        (1.0 + epsilon) - quad
    };

    if schur > 0.0 {
        Ok((1.0 - (ld_base + schur.ln() - ld_union).exp()).abs())
    } else {
        let det_union = ld_union.exp();
        Ok((det_union - ld_base.exp() * schur).abs() / det_union.abs().max(1e-300))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub seed: u64,
}

/// One greedy-vs-optimum comparison, emitted as a JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub instance: InstanceDescriptor,
    pub greedy_indices: Vec<usize>,
    pub oracle_indices: Vec<usize>,
    pub greedy_objective: f64,
    pub optimum_objective: f64,
    pub ratio: f64,
    /// Every pick along the greedy path had a non-negative total gain.
    pub nonnegative_path: bool,
}

impl OracleReport {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("report is always serializable")
    }
}

/// Runs the incremental greedy and the exhaustive optimum on one instance.
pub fn compare_with_optimum(
    e: &EmbeddingSet,
    r_eff: &RelevanceVector,
    k: usize,
    lambda: f64,
    epsilon: f64,
    seed: u64,
) -> Result<OracleReport> {
    let greedy = crate::selector::rdmv_select(e, r_eff, k, lambda, epsilon)?;
    let greedy_objective = subset_objective(e, r_eff, &greedy.indices, lambda, epsilon)?;
    let (oracle_indices, optimum_objective) = exhaustive_optimum(e, r_eff, k, lambda, epsilon)?;
    let ratio = if optimum_objective != 0.0 {
        greedy_objective / optimum_objective
    } else if greedy_objective == 0.0 {
        1.0
    } else {
        f64::NAN
    };
    Ok(OracleReport {
        instance: InstanceDescriptor {
            n: e.count(),
            d: e.dim(),
            k,
            lambda,
            epsilon,
            seed,
        },
        greedy_indices: greedy.indices,
        oracle_indices,
        greedy_objective,
        optimum_objective,
        ratio,
        nonnegative_path: greedy.gains.iter().all(|&g| g >= 0.0),
    })
}
