//! Ramsey protocols: standard single-qubit Ramsey, the QEC cycle on the
//! detector-plus-ancilla code, the GHZ code, and the error-time sampler
//! behind the phase statistics.
//!
//! `Φ₀` denotes the logical phase `gωT/2`, with `g` the number of data
//! qubits, and the decoded readout is `P₊ = cos²Φ`.

mod engine;

use num_complex::Complex64 as C;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::analytics::f_factor;
use crate::codes::{build_syndrome_recovery, RecoveryOperation, SyndromeKind};
use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

pub use engine::{splitmix64, stream_seed};
use engine::{Circuit, SparseOp, Stage};

/// Largest per-substep error probability inside a QEC segment.
pub const MAX_STEP_PROBABILITY: f64 = 0.01;
/// Lower bound on substeps per QEC segment, so errors land at resolved times.
pub const MIN_SUBSTEPS: usize = 8;
/// Step controls for the uncorrected single-qubit run (relevant once `T₁`
/// decay, which does not commute with the signal, is switched on).
const STANDARD_STEP_PROBABILITY: f64 = 0.001;
const STANDARD_MIN_SUBSTEPS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    ExactDensity,
    MonteCarlo,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    pub omega: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "one")]
    pub r: usize,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub gamma_parallel: f64,
    /// `None` is `T₁ = ∞`.
    #[serde(default)]
    pub t1: Option<f64>,
    #[serde(default)]
    pub p_error: f64,
    pub n: u64,
    #[serde(rename = "N", default = "one")]
    pub n_qubits: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: Mode,
}

impl ProtocolConfig {
    /// Noise-free, exact-mode defaults.
    pub fn new(omega: f64, t: f64, n: u64) -> Self {
        Self {
            omega,
            t,
            r: 1,
            gamma: 0.0,
            gamma_parallel: 0.0,
            t1: None,
            p_error: 0.0,
            n,
            n_qubits: 1,
            seed: 0,
            mode: Mode::ExactDensity,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.t / self.r as f64
    }

    /// `p_r = γα`.
    pub fn p_r(&self) -> f64 {
        self.gamma * self.alpha()
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64, f: &str| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::config(f, format!("must be finite and >= 0, got {v}")))
            }
        };
        if !self.omega.is_finite() {
            return Err(Error::config("omega", "must be finite"));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::config("T", format!("must be positive, got {}", self.t)));
        }
        if self.r == 0 {
            return Err(Error::config("r", "must be at least 1"));
        }
        if self.n == 0 {
            return Err(Error::config("n", "must be at least 1"));
        }
        finite_nonneg(self.gamma, "gamma")?;
        finite_nonneg(self.gamma_parallel, "gamma_parallel")?;
        if let Some(t1) = self.t1 {
            if !(t1 > 0.0) {
                return Err(Error::config("t1", format!("must be positive, got {t1}")));
            }
        }
        if !(0.0..=1.0).contains(&self.p_error) {
            return Err(Error::config("p_error", format!("must lie in [0, 1], got {}", self.p_error)));
        }
        if self.n_qubits == 0 || self.n_qubits > 10 {
            return Err(Error::config("N", format!("must lie in 1..=10, got {}", self.n_qubits)));
        }
        if self.mode == Mode::ExactDensity && self.n_qubits > 6 {
            return Err(Error::config("N", "exact_density mode supports N <= 6"));
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the per-segment limits of the QEC
    /// cycle (`αγ ≤ 1`, `αγ∥ ≤ 1`, `α/T₁ ≤ 1`). Plain Ramsey has no segments
    /// and may run past `1/γ`.
    pub fn validate_qec(&self) -> Result<()> {
        self.validate()?;
        if self.p_r() > 1.0 {
            return Err(Error::config("r", format!("alpha*gamma = {} exceeds 1", self.p_r())));
        }
        if self.gamma_parallel * self.alpha() > 1.0 {
            return Err(Error::config("gamma_parallel", "alpha*gamma_parallel exceeds 1"));
        }
        if let Some(t1) = self.t1 {
            if self.alpha() / t1 > 1.0 {
                return Err(Error::config("t1", "alpha/t1 exceeds 1"));
            }
        }
        Ok(())
    }

    fn validate_for(&self, kind: ProtocolKind) -> Result<()> {
        match kind {
            ProtocolKind::Standard => self.validate(),
            ProtocolKind::Qec => self.validate_qec(),
        }
    }
}

/// What is run: plain Ramsey or the QEC cycle (two-qubit code for `N = 1`,
/// GHZ code for `N ≥ 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Standard,
    Qec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub p_plus_hat: f64,
    /// Model value of `P₊` (exact mode only).
    pub p_plus: Option<f64>,
    pub phi_hat: f64,
    pub omega_hat: f64,
    pub delta_omega: f64,
    pub n_plus: u64,
    pub n_minus: u64,
    /// Calibration `f(p_r)` divided out by the estimator (1 for standard).
    pub f_calibration: f64,
    /// Fringe contrast assumed by the estimator.
    pub contrast: f64,
    /// Number of data qubits `g` in `Φ₀ = gωT/2`.
    pub phase_gain: usize,
    pub config: ProtocolConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub error_count: usize,
    /// Segment index (0-based) of each error.
    pub error_segments: Vec<usize>,
    /// Error times as fractions of `α`, each in `(0, 1]`.
    pub error_times: Vec<f64>,
    pub phi: f64,
}

/// Draws one error history: each of the `r` segments errs with probability
/// `p_r` at a uniform time, and every error at fraction `u` removes
/// `2(Φ₀/r)(1 − u)` from the accumulated phase.
pub fn sample_error_trajectory(phi0: f64, p_r: f64, r: usize, rng: &mut impl Rng) -> TrajectorySample {
    let k = if p_r <= 0.0 {
        0
    } else {
        Binomial::new(r as u64, p_r.min(1.0)).expect("valid binomial").sample(rng) as usize
    };
    let mut segs = sample_indices(rng, r, k).into_vec();
    segs.sort_unstable();
    let times: Vec<f64> = (0..k).map(|_| 1.0 - rng.random::<f64>()).collect();
    let step = phi0 / r as f64;
    let phi = phi0 - times.iter().map(|u| 2.0 * step * (1.0 - u)).sum::<f64>();
    TrajectorySample {
        error_count: k,
        error_segments: segs,
        error_times: times,
        phi,
    }
}

fn substeps(cfg: &ProtocolConfig, data: usize, segment: f64, cap: f64, floor: usize) -> usize {
    let mut worst = cfg.gamma * segment * data as f64;
    worst = worst.max(cfg.gamma_parallel * segment);
    if let Some(t1) = cfg.t1 {
        worst = worst.max(segment / t1);
    }
    ((worst / cap).ceil() as usize).max(floor)
}

struct Layout {
    qubits: usize,
    data: Vec<usize>,
    gain: usize,
}

fn layout(kind: ProtocolKind, n: usize) -> Layout {
    match (kind, n) {
        (ProtocolKind::Standard, _) => Layout {
            qubits: 1,
            data: vec![1],
            gain: 1,
        },
        (ProtocolKind::Qec, 1) => Layout {
            qubits: 2,
            data: vec![1],
            gain: 1,
        },
        (ProtocolKind::Qec, n) => Layout {
            qubits: n,
            data: (1..=n).collect(),
            gain: n,
        },
    }
}

/// Frame Kraus set of a recovery, mixed with the failure branch in which the
/// correction is replaced by a uniformly random Pauli on a random data qubit.
fn recovery_stage(rec: &RecoveryOperation<f64>, p_error: f64, lay: &Layout) -> Stage {
    let m = lay.qubits;
    let d = 1 << m;
    let mut ks = Vec::new();
    let keep = (1.0 - p_error).sqrt();
    let fail_w = (p_error / (4.0 * lay.data.len() as f64)).sqrt();
    for (c, p) in rec.corrections.iter().zip(&rec.syndrome_projectors) {
        let pf = engine::to_frame(p);
        if keep > 0.0 {
            let k = engine::to_frame(&c.matmul(p)).scale_real(keep);
            ks.push(SparseOp::from_dense(&k));
        }
        if p_error > 0.0 {
            let ps = SparseOp::from_dense(&pf);
            for &q in &lay.data {
                for sigma in ['I', 'X', 'Y', 'Z'] {
                    let s = engine::pauli_frame(sigma, q, m, fail_w);
                    ks.push(compose(&s, &ps, d));
                }
            }
        }
    }
    Stage::Kraus(ks)
}

fn compose(a: &SparseOp, b: &SparseOp, d: usize) -> SparseOp {
    let rows = (0..d)
        .map(|i| {
            let mut acc = vec![C::new(0.0, 0.0); d];
            for &(k, x) in &a.rows[i] {
                for &(j, y) in &b.rows[k] {
                    acc[j] += x * y;
                }
            }
            acc.into_iter()
                .enumerate()
                .filter(|(_, v)| v.norm() > 1e-13)
                .collect()
        })
        .collect();
    SparseOp { rows }
}

fn build_circuit(
    cfg: &ProtocolConfig,
    kind: ProtocolKind,
    rec: Option<&RecoveryOperation<f64>>,
    omega: f64,
) -> Result<Circuit> {
    let lay = layout(kind, cfg.n_qubits);
    let m = lay.qubits;
    let d = 1usize << m;
    let (segments, seg_len) = match kind {
        ProtocolKind::Standard => (1, cfg.t),
        ProtocolKind::Qec => (cfg.r, cfg.alpha()),
    };
    let steps = match kind {
        ProtocolKind::Standard => substeps(cfg, 1, seg_len, STANDARD_STEP_PROBABILITY, STANDARD_MIN_SUBSTEPS),
        ProtocolKind::Qec => substeps(cfg, lay.data.len(), seg_len, MAX_STEP_PROBABILITY, MIN_SUBSTEPS),
    };
    let h = seg_len / steps as f64;
    let half = engine::signal_phase(omega, 0.5 * h, &lay.data, m);
    let mut noise = Vec::new();
    if cfg.gamma > 0.0 && kind == ProtocolKind::Standard {
        // uncorrected baseline: the phase-carrying coherence decays as e^{−γt}
        noise.push(engine::x_sign(0.5 * (1.0 - (-cfg.gamma * h).exp()), 1, m));
    } else if cfg.gamma > 0.0 {
        // transverse dephasing: Z error probability γ dt, coherences e^{−2γt}
        let p = 0.5 * (1.0 - (-2.0 * cfg.gamma * h).exp());
        if lay.data.len() == 1 {
            noise.push(engine::z_flip(p, lay.data[0], m));
        } else {
            if p * lay.data.len() as f64 > 1.0 {
                return Err(Error::config("gamma", "N*gamma*dt exceeds 1"));
            }
            noise.push(engine::collective_z(p, &lay.data, m));
        }
    }
    if cfg.gamma_parallel > 0.0 {
        for &q in &lay.data {
            noise.push(engine::x_sign(0.5 * (1.0 - (-2.0 * cfg.gamma_parallel * h).exp()), q, m));
        }
    }
    if let Some(t1) = cfg.t1 {
        for &q in &lay.data {
            noise.push(engine::emission(-(-h / t1).exp_m1(), q, m));
        }
    }
    let mut segment = Vec::new();
    for _ in 0..steps {
        segment.push(half.clone());
        segment.extend(noise.iter().cloned());
        segment.push(half.clone());
    }
    merge_phases(&mut segment);
    if kind == ProtocolKind::Qec {
        let rec = rec.ok_or_else(|| Error::config("recovery", "QEC protocol needs a recovery"))?;
        if rec.dim() != d {
            return Err(Error::RecoveryDimensionMismatch {
                expected: d,
                found: rec.dim(),
            });
        }
        segment.push(recovery_stage(rec, cfg.p_error, &lay));
    }
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut init = vec![C::new(0.0, 0.0); d];
    init[0] = C::new(amp, 0.0);
    init[d - 1] = C::new(amp, 0.0);
    Ok(Circuit {
        qubits: m,
        init,
        segment,
        segments,
    })
}

/// Collapses neighbouring diagonal stages into one.
fn merge_phases(stages: &mut Vec<Stage>) {
    let mut out: Vec<Stage> = Vec::with_capacity(stages.len());
    for s in stages.drain(..) {
        match (out.last_mut(), s) {
            (Some(Stage::Phase(a)), Stage::Phase(b)) => a.iter_mut().zip(&b).for_each(|(x, y)| *x *= y),
            (_, s) => out.push(s),
        }
    }
    *stages = out;
}

fn default_recovery(kind: ProtocolKind, n: usize) -> Result<Option<RecoveryOperation<f64>>> {
    let tol = Tolerances::default();
    Ok(match (kind, n) {
        (ProtocolKind::Standard, _) => None,
        (ProtocolKind::Qec, 1) => Some(build_syndrome_recovery(SyndromeKind::TwoQubit, 2, &tol)?),
        (ProtocolKind::Qec, n) => Some(build_syndrome_recovery(SyndromeKind::Ghz, n, &tol)?),
    })
}

/// Model `P₊` at `omega` (exact density evolution).
pub fn p_plus_exact(
    cfg: &ProtocolConfig,
    kind: ProtocolKind,
    rec: Option<&RecoveryOperation<f64>>,
    omega: f64,
) -> Result<f64> {
    cfg.validate_for(kind)?;
    let c = build_circuit(cfg, kind, rec, omega)?;
    Ok(c.p_plus_exact().clamp(0.0, 1.0))
}

/// `P₊` with deterministic `Z` errors on data qubit 1 at the given
/// `(segment, time within segment)` pairs and no other noise; no recovery is
/// applied after a segment that contains an injected error until the segment
/// ends.
pub fn p_plus_with_injected_errors(cfg: &ProtocolConfig, errors: &[(usize, f64)]) -> Result<f64> {
    cfg.validate_qec()?;
    let kind = ProtocolKind::Qec;
    let lay = layout(kind, cfg.n_qubits);
    let m = lay.qubits;
    let rec = default_recovery(kind, cfg.n_qubits)?.expect("qec recovery");
    let rstage = recovery_stage(&rec, 0.0, &lay);
    let alpha = cfg.alpha();
    let flip = Stage::Kraus(vec![engine::pauli_frame('Z', lay.data[0], m, 1.0)]);
    let mut stages = Vec::new();
    for seg in 0..cfg.r {
        let mut times: Vec<f64> = errors.iter().filter(|e| e.0 == seg).map(|e| e.1).collect();
        times.sort_by(|a, b| a.total_cmp(b));
        let mut last = 0.0;
        for t in times {
            let t = t.clamp(0.0, alpha);
            stages.push(engine::signal_phase(cfg.omega, t - last, &lay.data, m));
            stages.push(flip.clone());
            last = t;
        }
        stages.push(engine::signal_phase(cfg.omega, alpha - last, &lay.data, m));
        stages.push(rstage.clone());
    }
    let d = 1 << m;
    let amp = std::f64::consts::FRAC_1_SQRT_2;
    let mut init = vec![C::new(0.0, 0.0); d];
    init[0] = C::new(amp, 0.0);
    init[d - 1] = C::new(amp, 0.0);
    let c = Circuit {
        qubits: m,
        init,
        segment: stages,
        segments: 1,
    };
    Ok(c.p_plus_exact())
}

/// Finite-difference step in `ω`, small against the fringe period.
fn omega_step(t: f64, gain: usize) -> f64 {
    1e-4 / (gain as f64 * t)
}

fn estimate(
    cfg: &ProtocolConfig,
    kind: ProtocolKind,
    rec: Option<&RecoveryOperation<f64>>,
) -> Result<EstimationResult> {
    cfg.validate_for(kind)?;
    let lay = layout(kind, cfg.n_qubits);
    let gain = lay.gain;
    let (f, contrast) = match kind {
        ProtocolKind::Standard => (1.0, (-cfg.gamma * cfg.t).exp()),
        ProtocolKind::Qec => (f_factor(cfg.p_r(), cfg.r), 1.0),
    };
    let circuit = build_circuit(cfg, kind, rec, cfg.omega)?;
    let n = cfg.n;
    let (n_plus, p_model, delta_omega_exact) = match cfg.mode {
        Mode::ExactDensity => {
            let p = circuit.p_plus_exact().clamp(0.0, 1.0);
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, 0));
            let n_plus = Binomial::new(n, p).expect("p in [0,1]").sample(&mut rng);
            let h = omega_step(cfg.t, gain);
            let up = p_plus_exact(cfg, kind, rec, cfg.omega + h)?;
            let dn = p_plus_exact(cfg, kind, rec, cfg.omega - h)?;
            let slope = (up - dn) / (2.0 * h);
            let d = crate::analytics::error_propagation(p, slope, n);
            (n_plus, Some(p), Some(d))
        }
        Mode::MonteCarlo => {
            let mut n_plus = 0;
            for i in 0..n {
                let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, i));
                let p = circuit.trajectory_p_plus(&mut rng);
                if rng.random::<f64>() < p {
                    n_plus += 1;
                }
            }
            (n_plus, None, None)
        }
    };
    let p_hat = n_plus as f64 / n as f64;
    // invert P₊ = ½(1 + c cos 2fΦ₀) on the first branch
    let x = ((2.0 * p_hat - 1.0) / contrast).clamp(-1.0, 1.0).acos();
    let phi_hat = x / (2.0 * f);
    let omega_hat = 2.0 * phi_hat / (gain as f64 * cfg.t);
    let delta_omega = match delta_omega_exact {
        Some(d) => d,
        None => {
            // calibrated analytic fringe at the estimate
            let p = 0.5 * (1.0 + contrast * x.cos());
            let slope = 0.5 * contrast * x.sin() * f * gain as f64 * cfg.t;
            crate::analytics::error_propagation(p, slope, n)
        }
    };
    Ok(EstimationResult {
        p_plus_hat: p_hat,
        p_plus: p_model,
        phi_hat,
        omega_hat,
        delta_omega,
        n_plus,
        n_minus: n - n_plus,
        f_calibration: f,
        contrast,
        phase_gain: gain,
        config: cfg.clone(),
    })
}

pub fn run_standard_ramsey(cfg: &ProtocolConfig) -> Result<EstimationResult> {
    if cfg.n_qubits != 1 {
        return Err(Error::config("N", "standard Ramsey uses a single qubit"));
    }
    if cfg.r != 1 {
        return Err(Error::config("r", "standard Ramsey has no recovery steps (r = 1)"));
    }
    estimate(cfg, ProtocolKind::Standard, None)
}

pub fn run_qec_ramsey(cfg: &ProtocolConfig, rec: &RecoveryOperation<f64>) -> Result<EstimationResult> {
    if cfg.n_qubits != 1 {
        return Err(Error::config("N", "the two-qubit code protocol takes N = 1"));
    }
    estimate(cfg, ProtocolKind::Qec, Some(rec))
}

pub fn run_ghz_qec(cfg: &ProtocolConfig, rec: &RecoveryOperation<f64>) -> Result<EstimationResult> {
    if cfg.n_qubits < 2 {
        return Err(Error::config("N", "the GHZ protocol needs N >= 2"));
    }
    estimate(cfg, ProtocolKind::Qec, Some(rec))
}

/// Runs `kind` with the syndrome-circuit recovery for the configured `N`.
pub fn simulate(cfg: &ProtocolConfig, kind: ProtocolKind) -> Result<EstimationResult> {
    cfg.validate_for(kind)?;
    let rec = default_recovery(kind, cfg.n_qubits)?;
    match (kind, rec) {
        (ProtocolKind::Standard, _) => run_standard_ramsey(cfg),
        (ProtocolKind::Qec, Some(rec)) if cfg.n_qubits == 1 => run_qec_ramsey(cfg, &rec),
        (ProtocolKind::Qec, Some(rec)) => run_ghz_qec(cfg, &rec),
        (ProtocolKind::Qec, None) => unreachable!("qec always has a recovery"),
    }
}

/// Single-shot (`n = 1`) sensitivity at the best point of a fringe scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub omega: f64,
    pub p_plus: f64,
    /// `∂P₊/∂ω`.
    pub slope: f64,
    /// `√(P₊(1−P₊))/|∂P₊/∂ω|`; divide by `√n` for `n` repetitions.
    pub delta_omega_single: f64,
}

/// Scans `Φ₀ = gωT/2` over `points` values in `(0, 0.6π]`, takes the grid
/// point of largest `|∂P₊/∂Φ₀|` and evaluates the error propagation there
/// with a fine central difference. Exact mode only.
pub fn operating_point(cfg: &ProtocolConfig, kind: ProtocolKind, points: usize) -> Result<OperatingPoint> {
    let mut cfg = cfg.clone();
    cfg.mode = Mode::ExactDensity;
    cfg.validate_for(kind)?;
    let rec = default_recovery(kind, cfg.n_qubits)?;
    let rec = rec.as_ref();
    let gain = layout(kind, cfg.n_qubits).gain as f64;
    let to_omega = |phi: f64| 2.0 * phi / (gain * cfg.t);
    let points = points.max(3);
    let top = 0.6 * std::f64::consts::PI;
    let grid: Vec<f64> = (1..=points).map(|i| top * i as f64 / points as f64).collect();
    let values = grid
        .iter()
        .map(|&phi| p_plus_exact(&cfg, kind, rec, to_omega(phi)))
        .collect::<Result<Vec<_>>>()?;
    let mut best = 1;
    let mut best_slope = 0.0;
    for i in 1..points - 1 {
        let s = ((values[i + 1] - values[i - 1]) / (grid[i + 1] - grid[i - 1])).abs();
        if s > best_slope {
            best_slope = s;
            best = i;
        }
    }
    let omega = to_omega(grid[best]);
    let h = omega_step(cfg.t, gain as usize);
    let up = p_plus_exact(&cfg, kind, rec, omega + h)?;
    let dn = p_plus_exact(&cfg, kind, rec, omega - h)?;
    let p = values[best];
    let slope = (up - dn) / (2.0 * h);
    Ok(OperatingPoint {
        omega,
        p_plus: p,
        slope,
        delta_omega_single: crate::analytics::error_propagation(p, slope, 1),
    })
}

#[cfg(test)]
mod tests;
