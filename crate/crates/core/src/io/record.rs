use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::json::{format_sig9, to_json_sig9};
use crate::adaptive::{ForceMode, SelectionPlan};
use crate::config::SelectionConfig;
use crate::error::{Error, Result};
use crate::selector::{GateMode, SelectionResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    #[serde(flatten)]
    pub selection: SelectionConfig,
    pub force_mode: ForceMode,
    pub lambda_override: Option<f64>,
}

/// Everything a run produced, in output key order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub indices: Vec<usize>,
    pub selection_order: Vec<usize>,
    pub gains: Vec<f64>,
    pub gate: GateMode,
    pub max_score: f64,
    pub lambda: f64,
    pub lambda_var: f64,
    pub lambda_bud: f64,
    pub cv: f64,
    pub rho: f64,
    pub blend_weight: f64,
    pub saturated: bool,
    pub config: ConfigSnapshot,
    pub duration_ms: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_step_gains: Option<Vec<Option<f64>>>,
}

impl RunRecord {
    pub fn new(
        plan: &SelectionPlan,
        result: &SelectionResult,
        config: ConfigSnapshot,
        duration_ms: f64,
    ) -> Self {
        Self {
            indices: result.indices.clone(),
            selection_order: result.selection_order.clone(),
            gains: result.gains.clone(),
            gate: result.gate,
            max_score: plan.gate.max_score,
            lambda: plan.lambda_final,
            lambda_var: plan.lambda_var,
            lambda_bud: plan.lambda_bud,
            cv: plan.cv,
            rho: plan.rho,
            blend_weight: plan.blend_weight,
            saturated: result.saturated,
            config,
            duration_ms,
            first_step_gains: result.first_step_gains.clone(),
        }
    }

    /// The record as it reads back from its rendered form: every float
    /// rounded to 9 significant digits.
    pub fn rounded(&self) -> Self {
        let r = |x: f64| -> f64 {
            if x.is_finite() {
                format_sig9(x).parse().unwrap()
            } else {
                x
            }
        };
        let mut out = self.clone();
        out.gains.iter_mut().for_each(|g| *g = r(*g));
        for f in [
            &mut out.max_score,
            &mut out.lambda,
            &mut out.lambda_var,
            &mut out.lambda_bud,
            &mut out.cv,
            &mut out.rho,
            &mut out.blend_weight,
            &mut out.duration_ms,
            &mut out.config.selection.epsilon,
            &mut out.config.selection.tau,
            &mut out.config.selection.lambda_min,
            &mut out.config.selection.lambda_max,
            &mut out.config.selection.alpha_cv,
            &mut out.config.selection.rho_cap,
            &mut out.config.selection.delta_cv,
        ] {
            *f = r(*f);
        }
        if let Some(l) = out.config.lambda_override.as_mut() {
            *l = r(*l);
        }
        if let Some(trace) = out.first_step_gains.as_mut() {
            trace.iter_mut().flatten().for_each(|g| *g = r(*g));
        }
        out
    }
}

pub fn render_record(record: &RunRecord) -> String {
    to_json_sig9(record)
}

pub fn parse_record(text: &str) -> Result<RunRecord> {
    serde_json::from_str(text).map_err(|e| Error::format(format!("invalid result document: {e}")))
}

pub fn write_result(record: &RunRecord, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, render_record(record))?;
    Ok(())
}
