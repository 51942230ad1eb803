//! Closed-form error analysis for QEC-assisted Ramsey spectroscopy and the
//! headline sensitivity scalings.
//!
//! Phases follow one convention throughout: `Φ₀` is the accumulated phase of
//! the logical state, an error at fraction `u` of a segment takes `2φ₀(1−u)`
//! away from it (`φ₀ = Φ₀/r`), and the fringe reads `P₊ = cos²(fΦ₀)`.

use crate::error::{Error, Result};

/// First and second moments of the accumulated phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMoments {
    pub mean: f64,
    pub second_moment: f64,
    pub f_factor: f64,
    pub p_r: f64,
    pub r: usize,
    pub phi0: f64,
}

impl PhaseMoments {
    pub fn variance(&self) -> f64 {
        self.second_moment - self.mean * self.mean
    }
}

/// `f(p_r)² = (1−p_r)² + (3p_r/4 − p_r²)/r`, as printed.
pub fn f_squared(p_r: f64, r: usize) -> f64 {
    let r = r as f64;
    (1.0 - p_r).powi(2) + (0.75 * p_r - p_r * p_r) / r
}

/// `+√f²`, clamped at zero where the printed bracket goes negative
/// (`r = 1`, `p_r > 0.8`).
pub fn f_factor(p_r: f64, r: usize) -> f64 {
    f_squared(p_r, r).max(0.0).sqrt()
}

/// `E[Φ] = (1−p_r)Φ₀`, `E[Φ²] = f(p_r)²Φ₀²`.
pub fn phase_moments(phi0: f64, p_r: f64, r: usize) -> PhaseMoments {
    PhaseMoments {
        mean: (1.0 - p_r) * phi0,
        second_moment: f_squared(p_r, r) * phi0 * phi0,
        f_factor: f_factor(p_r, r),
        p_r,
        r,
        phi0,
    }
}

/// Moments of the same error model with the second moment worked out for
/// error times uniform on the segment: `E[Φ²] = (1−p_r)²Φ₀² + (4p_r/3 − p_r²)Φ₀²/r`.
pub fn phase_moments_uniform_times(phi0: f64, p_r: f64, r: usize) -> PhaseMoments {
    let rr = r as f64;
    let f2 = (1.0 - p_r).powi(2) + (4.0 * p_r / 3.0 - p_r * p_r) / rr;
    PhaseMoments {
        mean: (1.0 - p_r) * phi0,
        second_moment: f2 * phi0 * phi0,
        f_factor: f2.max(0.0).sqrt(),
        p_r,
        r,
        phi0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fringe {
    pub p_plus: f64,
    /// `f·|Φ₀| ≤ 0.5`, the small-phase regime the approximation assumes.
    pub valid: bool,
}

/// `P₊(Φ₀) = ½(1 + cos 2f(p_r)Φ₀)`.
pub fn p_plus_analytic(phi0: f64, p_r: f64, r: usize) -> Fringe {
    let f = f_factor(p_r, r);
    Fringe {
        p_plus: 0.5 * (1.0 + (2.0 * f * phi0).cos()),
        valid: f * phi0.abs() <= 0.5,
    }
}

/// Inverse of the fringe on its first branch: `Φ₀ = arccos(2P₊ − 1)/(2f)`.
pub fn invert_fringe(p_plus: f64, f: f64) -> f64 {
    (2.0 * p_plus.clamp(0.0, 1.0) - 1.0).acos() / (2.0 * f)
}

/// `δx = √(P(1−P)) / |∂P/∂x| / √n`.
pub fn error_propagation(p_plus: f64, slope: f64, n: u64) -> f64 {
    (p_plus * (1.0 - p_plus)).max(0.0).sqrt() / slope.abs() / (n as f64).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Formula {
    /// `1/(T√n)`, or `1/√(Tτ)` when `τ` is given instead of `n`.
    RamseyIdeal,
    /// `√(γ/τ)`.
    RamseyNoisy,
    /// `√(γ/(rτ))`.
    QecRSteps,
    /// `1/τ`.
    QecMax,
    /// `1/(Nτ)`.
    Heisenberg,
    /// `1/(f(p_r)√n)`.
    DeltaPhi,
}

impl Formula {
    pub const ALL: [Formula; 6] = [
        Formula::RamseyIdeal,
        Formula::RamseyNoisy,
        Formula::QecRSteps,
        Formula::QecMax,
        Formula::Heisenberg,
        Formula::DeltaPhi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Formula::RamseyIdeal => "ramsey_ideal",
            Formula::RamseyNoisy => "ramsey_noisy",
            Formula::QecRSteps => "qec_r_steps",
            Formula::QecMax => "qec_max",
            Formula::Heisenberg => "heisenberg",
            Formula::DeltaPhi => "delta_phi",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Inputs for [`sensitivity`]; each formula reads only what it needs.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SensitivityParams {
    pub t: Option<f64>,
    pub n: Option<f64>,
    pub tau: Option<f64>,
    pub gamma: Option<f64>,
    pub r: Option<f64>,
    pub n_qubits: Option<f64>,
    pub p_r: Option<f64>,
}

fn need(v: Option<f64>, name: &'static str) -> Result<f64> {
    match v {
        None => Err(Error::MissingParam(name)),
        Some(x) if x.is_finite() && x > 0.0 => Ok(x),
        Some(x) => Err(Error::InvalidConfig {
            field: name.to_string(),
            message: format!("must be positive and finite, got {x}"),
        }),
    }
}

pub fn sensitivity(formula: Formula, p: &SensitivityParams) -> Result<f64> {
    Ok(match formula {
        Formula::RamseyIdeal => {
            let t = need(p.t, "T")?;
            match p.n {
                Some(_) => 1.0 / (t * need(p.n, "n")?.sqrt()),
                None => 1.0 / (t * need(p.tau, "n or tau")?).sqrt(),
            }
        }
        Formula::RamseyNoisy => (need(p.gamma, "gamma")? / need(p.tau, "tau")?).sqrt(),
        Formula::QecRSteps => {
            let (g, r, tau) = (need(p.gamma, "gamma")?, need(p.r, "r")?, need(p.tau, "tau")?);
            (g / (r * tau)).sqrt()
        }
        Formula::QecMax => 1.0 / need(p.tau, "tau")?,
        Formula::Heisenberg => 1.0 / (need(p.n_qubits, "N")? * need(p.tau, "tau")?),
        Formula::DeltaPhi => {
            let p_r = match p.p_r {
                Some(x) if (0.0..=1.0).contains(&x) => x,
                Some(x) => {
                    return Err(Error::BadProbability {
                        value: x,
                        context: "p_r",
                    })
                }
                None => return Err(Error::MissingParam("p_r")),
            };
            let r = need(p.r, "r")?.round() as usize;
            1.0 / (f_factor(p_r, r.max(1)) * need(p.n, "n")?.sqrt())
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardRamsey {
    pub p_plus: f64,
    pub delta_omega: f64,
}

/// `P₊ = ½(1 + e^{−γT} cos ωT)`; `δω = e^{γT}/(T√n)`, the error propagation
/// value at mid-fringe.
pub fn standard_ramsey_analytic(t: f64, gamma: f64, omega: f64, n: u64) -> StandardRamsey {
    let contrast = (-gamma * t).exp();
    StandardRamsey {
        p_plus: 0.5 * (1.0 + contrast * (omega * t).cos()),
        delta_omega: 1.0 / (contrast * t * (n as f64).sqrt()),
    }
}

/// `T* = 1/(2γ)` minimizes `e^{γT}/√(Tτ)`.
pub fn standard_optimal_time(gamma: f64) -> f64 {
    0.5 / gamma
}

#[cfg(test)]
mod tests;
