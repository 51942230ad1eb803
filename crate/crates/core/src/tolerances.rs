use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module. Stored as `f64` and converted
/// to the working scalar at the point of use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub herm: f64,
    pub proj: f64,
    pub norm: f64,
    pub trace: f64,
    pub psd: f64,
    pub cptp: f64,
    /// Verdict threshold for the code-condition residuals.
    pub condition: f64,
    /// Eigenvalues of the error-correlation matrix at or below this are dropped.
    pub diag: f64,
    pub sweep_budget: usize,
    pub max_dim: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            proj: 1e-10,
            norm: 1e-10,
            trace: 1e-10,
            psd: 1e-9,
            cptp: 1e-8,
            condition: 1e-8,
            diag: 1e-12,
            sweep_budget: 100,
            max_dim: 1 << 10,
        }
    }
}

impl Tolerances {
    /// Defaults loosened for single-precision work.
    pub fn single_precision() -> Self {
        Self {
            herm: 1e-5,
            proj: 1e-5,
            norm: 1e-5,
            trace: 1e-5,
            psd: 1e-5,
            cptp: 1e-5,
            condition: 1e-5,
            diag: 1e-6,
            ..Self::default()
        }
    }
}
