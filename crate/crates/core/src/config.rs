use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tunables for the full selection pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    /// Frame budget.
    pub k: usize,
    /// Ridge added to the Gram matrix.
    pub epsilon: f64,
    /// Gate threshold on the maximum relevance score.
    pub tau: f64,
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Sensitivity of the variability term to the coefficient of variation.
    pub alpha_cv: f64,
    /// Budget ratio at which the budget term saturates.
    pub rho_cap: f64,
    /// Added to the mean in the coefficient of variation.
    pub delta_cv: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            k: 32,
            epsilon: 1e-6,
            tau: 0.4,
            lambda_min: 0.05,
            lambda_max: 0.6,
            alpha_cv: 2.0,
            rho_cap: 8.0,
            delta_cv: 1e-8,
        }
    }
}

impl SelectionConfig {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("epsilon", self.epsilon),
            ("tau", self.tau),
            ("lambda_min", self.lambda_min),
            ("lambda_max", self.lambda_max),
            ("alpha_cv", self.alpha_cv),
            ("rho_cap", self.rho_cap),
            ("delta_cv", self.delta_cv),
        ];
        if let Some((name, _)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::config(format!("{name} must be finite")));
        }
        if self.k == 0 {
            return Err(Error::config("k must be at least 1"));
        }
        if self.epsilon <= 0.0 {
            return Err(Error::config("epsilon must be positive"));
        }
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(Error::config("tau must lie in [0, 1]"));
        }
        if self.lambda_min < 0.0 || self.lambda_min > self.lambda_max {
            return Err(Error::config(format!(
                "need 0 <= lambda_min <= lambda_max (got {} and {})",
                self.lambda_min, self.lambda_max
            )));
        }
        if self.alpha_cv <= 0.0 {
            return Err(Error::config("alpha_cv must be positive"));
        }
        if self.rho_cap <= 1.0 {
            return Err(Error::config("rho_cap must be greater than 1"));
        }
        if self.delta_cv <= 0.0 {
            return Err(Error::config("delta_cv must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = SelectionConfig::default();
        assert_eq!(c.epsilon, 1e-6);
        assert_eq!(c.tau, 0.4);
        assert_eq!(c.lambda_min, 0.05);
        assert_eq!(c.lambda_max, 0.6);
        assert_eq!(c.alpha_cv, 2.0);
        assert_eq!(c.rho_cap, 8.0);
        assert_eq!(c.delta_cv, 1e-8);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_values() {
        let base = SelectionConfig::default();
        assert!(base.with_k(0).validate().is_err());
        assert!(SelectionConfig { lambda_min: 0.7, ..base }.validate().is_err());
        assert!(SelectionConfig { rho_cap: 1.0, ..base }.validate().is_err());
        assert!(SelectionConfig { epsilon: 0.0, ..base }.validate().is_err());
        assert!(SelectionConfig { tau: 1.5, ..base }.validate().is_err());
        assert!(SelectionConfig { delta_cv: f64::NAN, ..base }.validate().is_err());
    }
}
