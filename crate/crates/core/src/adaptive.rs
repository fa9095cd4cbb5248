//! Adaptive diversity weight and relevance gate.
//!
//! The weight blends a variability term (flat score profiles want more
//! diversity) with a budget term (more candidates per slot want more
//! diversity), mixed by a logistic weight on the budget ratio `ρ = N / k`.
//! When no frame clears the gate threshold the scores are dropped entirely
//! and selection runs on diversity alone with `λ = 1`.

use serde::{Deserialize, Serialize};

use crate::config::SelectionConfig;
use crate::embedding::{normalize_embeddings, EmbeddingSet, RelevanceVector};
use crate::error::{Error, Result};
use crate::selector::{rdmv_select_with, GateMode, SelectOptions, SelectionResult};

/// `std(r) / (mean(r) + delta)` with the population standard deviation.
pub fn coefficient_of_variation(r: &RelevanceVector, delta: f64) -> f64 {
    let s = r.as_slice();
    if s.is_empty() {
        return 0.0;
    }
    let n = s.len() as f64;
    let mean = s.iter().sum::<f64>() / n;
    let var = s.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    var.sqrt() / (mean + delta)
}

/// `λ_min + λ_max / (1 + α·cv)`. Not clipped, so it can exceed `λ_max`.
pub fn lambda_var(cv: f64, cfg: &SelectionConfig) -> f64 {
    cfg.lambda_min + cfg.lambda_max / (1.0 + cfg.alpha_cv * cv)
}

/// `λ_max · clamp(log(ρ + ε) / log(ρ_cap), 0, 1)`.
pub fn lambda_bud(rho: f64, cfg: &SelectionConfig) -> f64 {
    let ratio = (rho + cfg.epsilon).ln() / cfg.rho_cap.ln();
    cfg.lambda_max * ratio.clamp(0.0, 1.0)
}

/// Logistic weight `1 / (1 + e^{-(ρ - 1)})`.
pub fn blend_weight(rho: f64) -> f64 {
    1.0 / (1.0 + (-(rho - 1.0)).exp())
}

/// `clip(w·λ_bud + (1 - w)·λ_var, λ_min, λ_max)`.
pub fn blend_lambda(rho: f64, l_var: f64, l_bud: f64, cfg: &SelectionConfig) -> f64 {
    let w = blend_weight(rho);
    (w * l_bud + (1.0 - w) * l_var).clamp(cfg.lambda_min, cfg.lambda_max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    /// 1 when the scores are trusted.
    pub eta: u8,
    pub mode: GateMode,
    pub max_score: f64,
}

/// Trusts the scores iff `max(r) >= tau`.
pub fn relevance_gate(r: &RelevanceVector, tau: f64) -> GateDecision {
    let max_score = r.max();
    if max_score >= tau {
        GateDecision {
            eta: 1,
            mode: GateMode::RelevanceDiversity,
            max_score,
        }
    } else {
        GateDecision {
            eta: 0,
            mode: GateMode::DiversityOnly,
            max_score,
        }
    }
}

/// Forces a particular branch regardless of the gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ForceMode {
    #[default]
    Auto,
    /// Always use the scores.
    RelevanceDiversity,
    /// Always run diversity-only.
    DiversityOnly,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PlanOptions {
    pub force: ForceMode,
    /// Replaces the computed weight on the relevance + diversity path.
    pub lambda_override: Option<f64>,
    pub select: SelectOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionPlan {
    pub lambda_final: f64,
    pub r_eff: RelevanceVector,
    pub gate: GateDecision,
    pub cv: f64,
    pub rho: f64,
    pub lambda_var: f64,
    pub lambda_bud: f64,
    pub blend_weight: f64,
}

/// Normalizes the embeddings, derives `λ` and the gate, and runs the selector.
pub fn plan_selection(
    e: &EmbeddingSet,
    r: &RelevanceVector,
    cfg: &SelectionConfig,
) -> Result<(SelectionPlan, SelectionResult)> {
    plan_selection_with(e, r, cfg, &PlanOptions::default())
}

pub fn plan_selection_with(
    e: &EmbeddingSet,
    r: &RelevanceVector,
    cfg: &SelectionConfig,
    opts: &PlanOptions,
) -> Result<(SelectionPlan, SelectionResult)> {
    cfg.validate()?;
    if r.len() != e.count() {
        return Err(Error::Dimension {
            what: "relevance scores vs frames",
            expected: e.count(),
            actual: r.len(),
        });
    }
    if let Some(l) = opts.lambda_override {
        if !(l >= 0.0) || !l.is_finite() {
            return Err(Error::config(format!("lambda override must be >= 0 (got {l})")));
        }
    }
    let unit = normalize_embeddings(e)?;

    let cv = coefficient_of_variation(r, cfg.delta_cv);
    let rho = unit.count() as f64 / cfg.k as f64;
    let l_var = lambda_var(cv, cfg);
    let l_bud = lambda_bud(rho, cfg);
    let w = blend_weight(rho);
    let blended = blend_lambda(rho, l_var, l_bud, cfg);

    let measured = relevance_gate(r, cfg.tau);
    let gate = match opts.force {
        ForceMode::Auto => measured,
        ForceMode::RelevanceDiversity => GateDecision {
            eta: 1,
            mode: GateMode::RelevanceDiversity,
            ..measured
        },
        ForceMode::DiversityOnly => GateDecision {
            eta: 0,
            mode: GateMode::DiversityOnly,
            ..measured
        },
    };

    let (r_eff, lambda_final) = match gate.mode {
        GateMode::RelevanceDiversity => (r.clone(), opts.lambda_override.unwrap_or(blended)),
        GateMode::DiversityOnly => (RelevanceVector::zeros(r.len()), 1.0),
    };

    let mut result = rdmv_select_with(
        &unit,
        &r_eff,
        cfg.k,
        lambda_final,
        cfg.epsilon,
        &opts.select,
    )?;
    result.gate = gate.mode;

    let plan = SelectionPlan {
        lambda_final,
        r_eff,
        gate,
        cv,
        rho,
        lambda_var: l_var,
        lambda_bud: l_bud,
        blend_weight: w,
    };
    Ok((plan, result))
}
