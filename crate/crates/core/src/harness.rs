//! Parameter sweeps over interrogation time, total time and qubit count, with
//! CSV output and log-log slope fits.
//!
//! Every point is evaluated from the exact density evolution (or a closed
//! form), so a sweep is a pure function of its spec. Repetitions enter only
//! through `δω = D/√n_eff` with `n_eff = τ/T`, where `D` is the single-shot
//! error at the best fringe point.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analytics::standard_ramsey_analytic;
use crate::error::{Error, Result};
use crate::protocols::{operating_point, Mode, ProtocolConfig, ProtocolKind};

pub const CSV_HEADER: [&str; 7] = ["axis", "axis_value", "strategy", "delta_omega", "normalized", "n_effective", "seed"];

/// Fringe scan resolution handed to [`operating_point`].
pub const DEFAULT_FRINGE_POINTS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    InterrogationTime,
    TotalTime,
    QubitCount,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::InterrogationTime => "interrogation_time",
            Axis::TotalTime => "total_time",
            Axis::QubitCount => "qubit_count",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    NoiseFree,
    Standard,
    QecIdeal,
    QecImperfect,
    QecPerQubit,
    GhzQec,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::NoiseFree => "noise_free",
            Strategy::Standard => "standard",
            Strategy::QecIdeal => "qec_ideal",
            Strategy::QecImperfect => "qec_imperfect",
            Strategy::QecPerQubit => "qec_per_qubit",
            Strategy::GhzQec => "ghz_qec",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    DeltaOmegaSqrtTau,
    DeltaOmegaTauN,
}

fn default_fringe_points() -> usize {
    DEFAULT_FRINGE_POINTS
}

fn default_time_points() -> usize {
    12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: Axis,
    pub grid: Vec<f64>,
    pub strategies: Vec<Strategy>,
    pub base_config: ProtocolConfig,
    pub normalization: Normalization,
    /// Total time `τ` for interrogation-time and qubit-count sweeps. Defaults
    /// to the last grid value (interrogation time) or `T` (qubit count).
    #[serde(default)]
    pub tau: Option<f64>,
    /// Segment length as `αγ`. Defaults to 1 for interrogation-time sweeps
    /// and 10⁻⁴ for total-time sweeps (short enough that two perpendicular
    /// errors in one GHZ segment are rarer than relaxation).
    #[serde(default)]
    pub alpha_gamma: Option<f64>,
    #[serde(default = "default_fringe_points")]
    pub fringe_points: usize,
    /// Candidate interrogation times per decade when the best `T ≤ τ` is
    /// searched (total-time sweeps).
    #[serde(default = "default_time_points")]
    pub time_points_per_decade: usize,
}

impl SweepSpec {
    pub fn new(axis: Axis, grid: Vec<f64>, strategies: Vec<Strategy>, base_config: ProtocolConfig) -> Self {
        let normalization = match axis {
            Axis::InterrogationTime => Normalization::DeltaOmegaSqrtTau,
            _ => Normalization::DeltaOmegaTauN,
        };
        Self {
            axis,
            grid,
            strategies,
            base_config,
            normalization,
            tau: None,
            alpha_gamma: None,
            fringe_points: DEFAULT_FRINGE_POINTS,
            time_points_per_decade: default_time_points(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidSpec("grid is empty".into()));
        }
        if self.grid.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidSpec("grid values must be finite and positive".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSpec("grid must be strictly increasing".into()));
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidSpec("no strategies".into()));
        }
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::InvalidSpec(format!("tau must be positive, got {tau}")));
            }
        }
        if let Some(ag) = self.alpha_gamma {
            if !(ag > 0.0 && ag <= 1.0) {
                return Err(Error::InvalidSpec(format!("alpha_gamma must lie in (0, 1], got {ag}")));
            }
        }
        if self.fringe_points < 3 {
            return Err(Error::InvalidSpec("fringe_points must be at least 3".into()));
        }
        if self.time_points_per_decade == 0 {
            return Err(Error::InvalidSpec("time_points_per_decade must be positive".into()));
        }
        let needs_gamma = self
            .strategies
            .iter()
            .any(|s| !matches!(s, Strategy::NoiseFree));
        if needs_gamma && !(self.base_config.gamma > 0.0) {
            return Err(Error::InvalidSpec("base_config.gamma must be positive".into()));
        }
        self.base_config.validate()
    }

    fn check_strategies(&self, allowed: &[Strategy], sweep: &str) -> Result<()> {
        for s in &self.strategies {
            if !allowed.contains(s) {
                return Err(Error::InvalidSpec(format!("strategy {} is not part of {sweep}", s.name())));
            }
        }
        Ok(())
    }

    fn check_axis(&self, axis: Axis) -> Result<()> {
        if self.axis != axis {
            return Err(Error::InvalidSpec(format!(
                "axis {} given, {} expected",
                self.axis.name(),
                axis.name()
            )));
        }
        Ok(())
    }
}

/// Interrogation-time sweep with all four strategies on `0.1/γ ≤ T ≤ 700/γ`.
/// The upper end keeps `e^{γT}` of the standard curve inside `f64`.
pub fn fig2_spec(gamma: f64, per_decade: usize) -> SweepSpec {
    let mut base = ProtocolConfig::new(0.0, 1.0 / gamma, 1);
    base.gamma = gamma;
    SweepSpec::new(
        Axis::InterrogationTime,
        log_grid(0.1 / gamma, 700.0 / gamma, per_decade),
        vec![Strategy::NoiseFree, Strategy::Standard, Strategy::QecIdeal, Strategy::QecImperfect],
        base,
    )
}

/// Total-time sweep at `T₁ = 10³/γ` with `n` probe qubits, `0.1/γ ≤ τ ≤ 10⁵/γ`.
pub fn fig_si_spec(gamma: f64, n: usize, per_decade: usize) -> SweepSpec {
    let mut base = ProtocolConfig::new(0.0, 1.0 / gamma, 1);
    base.gamma = gamma;
    base.t1 = Some(1e3 / gamma);
    base.n_qubits = n;
    SweepSpec::new(
        Axis::TotalTime,
        log_grid(0.1 / gamma, 1e5 / gamma, per_decade),
        vec![Strategy::Standard, Strategy::QecPerQubit, Strategy::GhzQec],
        base,
    )
}

/// `per_decade` log-spaced points from `lo` to `hi`, both included.
pub fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi >= lo && per_decade > 0);
    let decades = (hi / lo).log10();
    let steps = ((decades * per_decade as f64).round() as usize).max(1);
    if hi == lo {
        return vec![lo];
    }
    (0..=steps)
        .map(|i| {
            if i == steps {
                hi
            } else {
                lo * 10f64.powf(decades * i as f64 / steps as f64)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub strategy: Strategy,
    pub delta_omega: f64,
    pub normalized: f64,
    pub n_effective: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    /// `(axis_value, normalized)` for one strategy, in grid order.
    pub fn curve(&self, strategy: Strategy) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.strategy == strategy)
            .map(|r| (r.axis_value, r.normalized))
            .collect()
    }

    /// `(axis_value, delta_omega)` for one strategy, in grid order.
    pub fn delta_omega_curve(&self, strategy: Strategy) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter(|r| r.strategy == strategy)
            .map(|r| (r.axis_value, r.delta_omega))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::Output(format!("csv: {e}"));
        w.write_record(CSV_HEADER).map_err(io)?;
        let axis = self.spec.axis.name();
        for r in &self.rows {
            w.write_record([
                axis.to_string(),
                r.axis_value.to_string(),
                r.strategy.name().to_string(),
                r.delta_omega.to_string(),
                r.normalized.to_string(),
                r.n_effective.to_string(),
                r.seed.to_string(),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::Output(format!("csv: {e}")))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Output(e.to_string()))
    }

    /// Sidecar document: the full spec, the CSV schema and the row count.
    pub fn provenance(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Provenance<'a> {
            generator: &'a str,
            version: &'a str,
            columns: [&'a str; 7],
            rows: usize,
            spec: &'a SweepSpec,
        }
        serde_json::to_string_pretty(&Provenance {
            generator: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            columns: CSV_HEADER,
            rows: self.rows.len(),
            spec: &self.spec,
        })
        .map_err(|e| Error::Output(e.to_string()))
    }
}

/// Dispatches on `spec.axis`.
pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    match spec.axis {
        Axis::InterrogationTime => sweep_fig2(spec),
        Axis::TotalTime => sweep_fig_si(spec),
        Axis::QubitCount => sweep_qubits(spec),
    }
}

fn qec_config(base: &ProtocolConfig, t: f64, alpha: f64, n_qubits: usize) -> ProtocolConfig {
    let mut cfg = base.clone();
    cfg.t = t;
    cfg.r = ((t / alpha) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    cfg.n_qubits = n_qubits;
    cfg.mode = Mode::ExactDensity;
    cfg.omega = 0.0;
    cfg
}

/// Single-shot error `D(T)` of the QEC cycle at its best fringe point.
fn qec_single_shot(cfg: &ProtocolConfig, points: usize) -> Result<f64> {
    let op = operating_point(cfg, ProtocolKind::Qec, points)?;
    finite_positive(op.delta_omega_single, "qec operating point")
}

fn finite_positive(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::Numerical(format!("{what}: non-finite or non-positive error {v}")))
    }
}

fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        a.strategy
            .cmp(&b.strategy)
            .then(a.axis_value.total_cmp(&b.axis_value))
    });
}

/// Sweep over the interrogation time `T` at fixed total time `τ`.
///
/// QEC strategies use segments of length `α = αγ/γ` (`r = ⌈T/α⌉`).
/// `qec_imperfect` adds `γ∥ = 10⁻³γ` and `p_error = 10⁻³` and reports the
/// achievable error, the best value over all `T' ≤ T` on the grid. Rows carry
/// `δω = D(T)√(T/τ)`; the `√τ` normalization removes `τ`.
pub fn sweep_fig2(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    spec.check_axis(Axis::InterrogationTime)?;
    spec.check_strategies(
        &[Strategy::NoiseFree, Strategy::Standard, Strategy::QecIdeal, Strategy::QecImperfect],
        "the interrogation-time sweep",
    )?;
    let base = &spec.base_config;
    let gamma = base.gamma;
    let tau = spec.tau.unwrap_or(*spec.grid.last().expect("validated"));
    let alpha = spec.alpha_gamma.unwrap_or(1.0) / gamma.max(f64::MIN_POSITIVE);
    let mut rows = Vec::new();
    for &strategy in &spec.strategies {
        let mut best = f64::INFINITY;
        for &t in &spec.grid {
            let single = match strategy {
                Strategy::NoiseFree => 1.0 / t,
                Strategy::Standard => standard_ramsey_analytic(t, gamma, std::f64::consts::FRAC_PI_2 / t, 1).delta_omega,
                Strategy::QecIdeal => {
                    let mut cfg = qec_config(base, t, alpha, 1);
                    cfg.gamma_parallel = 0.0;
                    cfg.p_error = 0.0;
                    cfg.t1 = None;
                    qec_single_shot(&cfg, spec.fringe_points)?
                }
                Strategy::QecImperfect => {
                    let mut cfg = qec_config(base, t, alpha, 1);
                    cfg.gamma_parallel = 1e-3 * gamma;
                    cfg.p_error = 1e-3;
                    cfg.t1 = None;
                    qec_single_shot(&cfg, spec.fringe_points)?
                }
                _ => unreachable!("checked above"),
            };
            let single = finite_positive(single, strategy.name())?;
            let mut scaled = single * t.sqrt();
            if strategy == Strategy::QecImperfect {
                best = best.min(scaled);
                scaled = best;
            }
            let normalized = normalize(spec.normalization, scaled / tau.sqrt(), tau, 1);
            rows.push(SweepRow {
                axis_value: t,
                strategy,
                delta_omega: scaled / tau.sqrt(),
                normalized,
                n_effective: tau / t,
                seed: base.seed,
            });
        }
    }
    sort_rows(&mut rows);
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

fn normalize(norm: Normalization, delta_omega: f64, tau: f64, n: usize) -> f64 {
    match norm {
        Normalization::DeltaOmegaSqrtTau => delta_omega * tau.sqrt(),
        Normalization::DeltaOmegaTauN => delta_omega * tau * n as f64,
    }
}

/// Sweep over the total time `τ`, choosing for each strategy the best
/// interrogation time `T ≤ τ`.
///
/// `standard` and `qec_per_qubit` use `N` independent single-qubit probes
/// (`δω` divided by `√N`); `ghz_qec` uses one `N`-qubit GHZ probe. The QEC
/// strategies see the perpendicular rate `γ` and relaxation `t1` of the base
/// config (`t1` defaults to `10³/γ`); `standard` is limited by `γ` alone.
pub fn sweep_fig_si(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    spec.check_axis(Axis::TotalTime)?;
    spec.check_strategies(
        &[Strategy::Standard, Strategy::QecPerQubit, Strategy::GhzQec],
        "the total-time sweep",
    )?;
    let base = &spec.base_config;
    let n = base.n_qubits;
    if spec.strategies.contains(&Strategy::GhzQec) && n < 2 {
        return Err(Error::InvalidSpec("ghz_qec needs base_config.N >= 2".into()));
    }
    let gamma = base.gamma;
    let t1 = base.t1.unwrap_or(1e3 / gamma);
    let alpha = spec.alpha_gamma.unwrap_or(1e-4) / gamma;
    let lo = spec.grid[0];
    let hi = *spec.grid.last().expect("validated");
    let mut candidates = log_grid(lo, hi, spec.time_points_per_decade);
    candidates.extend(spec.grid.iter().copied());
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();

    let mut rows = Vec::new();
    for &strategy in &spec.strategies {
        // D(T)·√T on every candidate interrogation time.
        let mut scaled = BTreeMap::new();
        for (i, &t) in candidates.iter().enumerate() {
            let single = match strategy {
                Strategy::Standard => {
                    standard_ramsey_analytic(t, gamma, std::f64::consts::FRAC_PI_2 / t, 1).delta_omega
                }
                Strategy::QecPerQubit => {
                    let mut cfg = qec_config(base, t, alpha, 1);
                    cfg.t1 = Some(t1);
                    operating_point(&cfg, ProtocolKind::Qec, spec.fringe_points)?.delta_omega_single
                }
                Strategy::GhzQec => {
                    let mut cfg = qec_config(base, t, alpha, n);
                    cfg.t1 = Some(t1);
                    operating_point(&cfg, ProtocolKind::Qec, spec.fringe_points)?.delta_omega_single
                }
                _ => unreachable!("checked above"),
            };
            // A fully decayed fringe (T ≫ T₁) has no slope; such T never wins.
            let v = single * t.sqrt();
            scaled.insert(i, if v.is_finite() && v > 0.0 { v } else { f64::INFINITY });
        }
        let copies = match strategy {
            Strategy::GhzQec => 1.0,
            _ => n as f64,
        };
        for &tau in &spec.grid {
            let (best_t, best) = candidates
                .iter()
                .enumerate()
                .filter(|(_, &t)| t <= tau)
                .map(|(i, &t)| (t, scaled[&i]))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .expect("tau itself is a candidate");
            let delta_omega = finite_positive(best / (tau * copies).sqrt(), strategy.name())?;
            rows.push(SweepRow {
                axis_value: tau,
                strategy,
                delta_omega,
                normalized: normalize(spec.normalization, delta_omega, tau, n),
                n_effective: tau / best_t,
                seed: base.seed,
            });
        }
    }
    sort_rows(&mut rows);
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

/// GHZ QEC over the number of qubits at `T = τ` (`τ` defaults to the base
/// `T`), with `r` from `αγ` when given and from the base config otherwise.
pub fn sweep_qubits(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    spec.check_axis(Axis::QubitCount)?;
    spec.check_strategies(&[Strategy::GhzQec, Strategy::NoiseFree], "the qubit-count sweep")?;
    let base = &spec.base_config;
    let tau = spec.tau.unwrap_or(base.t);
    let mut rows = Vec::new();
    for &strategy in &spec.strategies {
        for &nv in &spec.grid {
            if nv.fract() != 0.0 || nv < 1.0 {
                return Err(Error::InvalidSpec(format!("qubit count {nv} is not a positive integer")));
            }
            let n = nv as usize;
            let single = match strategy {
                Strategy::NoiseFree => 1.0 / (n as f64 * tau),
                Strategy::GhzQec => {
                    if n < 2 {
                        return Err(Error::InvalidSpec("ghz_qec needs at least 2 qubits".into()));
                    }
                    let mut cfg = base.clone();
                    cfg.t = tau;
                    cfg.n_qubits = n;
                    cfg.mode = Mode::ExactDensity;
                    if let Some(ag) = spec.alpha_gamma {
                        cfg = qec_config(base, tau, ag / base.gamma, n);
                    }
                    qec_single_shot(&cfg, spec.fringe_points)?
                }
                _ => unreachable!("checked above"),
            };
            let delta_omega = finite_positive(single, strategy.name())?;
            rows.push(SweepRow {
                axis_value: nv,
                strategy,
                delta_omega,
                normalized: normalize(spec.normalization, delta_omega, tau, n),
                n_effective: 1.0,
                seed: base.seed,
            });
        }
    }
    sort_rows(&mut rows);
    Ok(SweepResult {
        spec: spec.clone(),
        rows,
    })
}

/// Ordinary least squares of `log y` on `log x`: `(slope, stderr)`.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!("need at least 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(x, y)| !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(Error::DegenerateInput("log-log fit needs finite positive values".into()));
    }
    let n = points.len() as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-300 {
        return Err(Error::DegenerateInput("all x values coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - icpt - slope * x).powi(2))
        .sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    Ok((slope, stderr))
}
