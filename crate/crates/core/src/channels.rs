//! Kraus-form noise channels `E(ρ) = Σ_k E_k ρ E_k†`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cr, kron_all, DensityOperator, OperatorMatrix};
use crate::pauli::{Pauli, PauliTerm};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

/// Set on channels whose Kraus list drops higher-order error terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    /// Completeness residual `‖Σ E_k†E_k − I‖_F` of the truncated set.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantumChannel<T: Scalar> {
    dim: usize,
    kraus: Vec<OperatorMatrix<T>>,
    label: String,
    truncation: Option<Truncation>,
}

fn check_probability(p: f64, context: &'static str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::BadProbability { value: p, context })
    }
}

fn check_qubit(qubit: usize, n: usize) -> Result<()> {
    if qubit == 0 || qubit > n {
        Err(Error::BadIndex {
            index: qubit,
            count: n,
        })
    } else {
        Ok(())
    }
}

fn check_qubit_count(n: usize, tol: &Tolerances) -> Result<usize> {
    let dim = 1usize << n.min(usize::BITS as usize - 1);
    if n > 10 || dim > tol.max_dim {
        return Err(Error::DimensionOverflow {
            dim,
            max: tol.max_dim.min(1 << 10),
        });
    }
    Ok(dim)
}

fn pauli_on<T: Scalar>(p: Pauli, qubit: usize, n: usize) -> Result<OperatorMatrix<T>> {
    Ok(PauliTerm::single(p, qubit, n)?.materialize())
}

impl<T: Scalar> QuantumChannel<T> {
    /// Validates trace preservation within `tol.cptp`.
    pub fn new(kraus: Vec<OperatorMatrix<T>>, label: impl Into<String>, tol: &Tolerances) -> Result<Self> {
        let ch = Self::unchecked(kraus, label)?;
        let residual = ch.completeness_residual().as_f64();
        if residual > tol.cptp {
            return Err(Error::InvalidChannel(format!(
                "completeness residual {residual:e} exceeds {:e}",
                tol.cptp
            )));
        }
        Ok(ch)
    }

    /// A channel flagged as a first-order truncation; its completeness
    /// residual is recorded rather than required to vanish.
    pub fn truncated(kraus: Vec<OperatorMatrix<T>>, label: impl Into<String>) -> Result<Self> {
        let mut ch = Self::unchecked(kraus, label)?;
        ch.truncation = Some(Truncation {
            bound: ch.completeness_residual().as_f64(),
        });
        Ok(ch)
    }

    fn unchecked(kraus: Vec<OperatorMatrix<T>>, label: impl Into<String>) -> Result<Self> {
        let dim = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?
            .dim();
        if let Some(bad) = kraus.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self {
            dim,
            kraus,
            label: label.into(),
            truncation: None,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![OperatorMatrix::identity(dim)],
            label: "identity".into(),
            truncation: None,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[OperatorMatrix<T>] {
        &self.kraus
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.truncation
    }

    pub fn is_first_order_truncated(&self) -> bool {
        self.truncation.is_some()
    }

    /// `Σ_k E_k†E_k`.
    pub fn completeness(&self) -> OperatorMatrix<T> {
        self.kraus
            .iter()
            .fold(OperatorMatrix::zeros(self.dim), |acc, k| &acc + &k.adjoint().matmul(k))
    }

    pub fn completeness_residual(&self) -> T {
        self.completeness()
            .distance(&OperatorMatrix::identity(self.dim))
    }

    /// `E(ρ)` on a bare matrix, no renormalization.
    pub fn apply_matrix(&self, rho: &OperatorMatrix<T>) -> OperatorMatrix<T> {
        self.kraus
            .iter()
            .fold(OperatorMatrix::zeros(self.dim), |acc, k| &acc + &k.sandwich(rho))
    }

    /// `self` after `first`: Kraus set `{B_j A_i}`.
    pub fn after(&self, first: &Self) -> Result<Self> {
        if self.dim != first.dim {
            return Err(Error::DimensionMismatch {
                expected: first.dim,
                found: self.dim,
            });
        }
        let kraus = self
            .kraus
            .iter()
            .flat_map(|b| first.kraus.iter().map(move |a| b.matmul(a)))
            .collect();
        let mut out = Self::unchecked(kraus, format!("{} ∘ {}", self.label, first.label))?;
        if self.truncation.is_some() || first.truncation.is_some() {
            out.truncation = Some(Truncation {
                bound: out.completeness_residual().as_f64(),
            });
        }
        Ok(out)
    }

    /// Embeds a single-qubit channel on `qubit` of `n`.
    pub fn on_qubit(&self, qubit: usize, n: usize, tol: &Tolerances) -> Result<Self> {
        if self.dim != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: self.dim,
            });
        }
        check_qubit(qubit, n)?;
        check_qubit_count(n, tol)?;
        let kraus = self
            .kraus
            .iter()
            .map(|k| {
                let factors: Vec<_> = (1..=n)
                    .map(|q| if q == qubit { k.clone() } else { OperatorMatrix::identity(2) })
                    .collect();
                kron_all(&factors, tol.max_dim)
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            dim: 1 << n,
            kraus,
            label: format!("{} on qubit {qubit} of {n}", self.label),
            truncation: self.truncation,
        })
    }
}

/// Pauli-error channel `{√(1−p) I, √p σ_qubit}`.
pub fn pauli_flip_channel<T: Scalar>(
    p: f64,
    error: Pauli,
    qubit: usize,
    n: usize,
    label: &str,
    tol: &Tolerances,
) -> Result<QuantumChannel<T>> {
    check_probability(p, "pauli flip channel")?;
    check_qubit(qubit, n)?;
    let dim = check_qubit_count(n, tol)?;
    let e0 = OperatorMatrix::identity(dim).scale_real(T::lit((1.0 - p).sqrt()));
    let e1 = pauli_on::<T>(error, qubit, n)?.scale_real(T::lit(p.sqrt()));
    QuantumChannel::new(vec![e0, e1], label.to_string(), tol)
}

/// Single-qubit dephasing `{√(1−p) I, √p Z_qubit}` on `n` qubits.
pub fn dephasing_channel<T: Scalar>(p: f64, qubit: usize, n: usize, tol: &Tolerances) -> Result<QuantumChannel<T>> {
    pauli_flip_channel(p, Pauli::Z, qubit, n, &format!("dephasing p={p} on qubit {qubit}"), tol)
}

/// Dephasing along the signal axis: the error operator is `X_qubit`.
pub fn parallel_dephasing_channel<T: Scalar>(p: f64, qubit: usize, n: usize, tol: &Tolerances) -> Result<QuantumChannel<T>> {
    pauli_flip_channel(p, Pauli::X, qubit, n, &format!("parallel_dephasing p={p} on qubit {qubit}"), tol)
}

/// First-order independent dephasing of `n` qubits:
/// `E₀ = √(1−Np) I`, `E_i = √p Z_i`.
///
/// The normalization of the single-error elements is `√p` so that the set is
/// complete; the label keeps the literal `E_i = p Z_i` form for reference.
pub fn collective_dephasing_first_order<T: Scalar>(p: f64, n: usize, tol: &Tolerances) -> Result<QuantumChannel<T>> {
    let dim = check_qubit_count(n, tol)?;
    if n == 0 {
        return Err(Error::BadN(0));
    }
    let np = n as f64 * p;
    if !(0.0..=1.0).contains(&p) || np > 1.0 {
        return Err(Error::BadProbability {
            value: np,
            context: "collective dephasing requires 0 <= N*p <= 1",
        });
    }
    let mut kraus = Vec::with_capacity(n + 1);
    kraus.push(OperatorMatrix::identity(dim).scale_real(T::lit((1.0 - np).sqrt())));
    for q in 1..=n {
        kraus.push(pauli_on::<T>(Pauli::Z, q, n)?.scale_real(T::lit(p.sqrt())));
    }
    QuantumChannel::truncated(
        kraus,
        format!("collective_dephasing p={p} N={n} (first order; literal text: E0 = sqrt(1-Np) 1, E_i = p Z_i; built with sqrt(p))"),
    )
}

/// Amplitude damping `E₀ = diag(1, √(1−p))`, `E₁ = √p |0⟩⟨1|`.
pub fn spontaneous_emission_channel<T: Scalar>(p: f64, tol: &Tolerances) -> Result<QuantumChannel<T>> {
    check_probability(p, "spontaneous emission")?;
    let e0 = OperatorMatrix::real_diagonal(&[T::one(), T::lit((1.0 - p).sqrt())]);
    let mut e1 = OperatorMatrix::zeros(2);
    e1[(0, 1)] = cr(T::lit(p.sqrt()));
    QuantumChannel::new(vec![e0, e1], format!("spontaneous_emission p={p}"), tol)
}

/// `apply_channel` output: the image state plus the renormalization factor
/// applied when the channel is a truncated expansion.
#[derive(Debug, Clone)]
pub struct ChannelOutput<T: Scalar> {
    pub state: DensityOperator<T>,
    pub renormalization: Option<T>,
}

pub fn apply_channel<T: Scalar>(rho: &DensityOperator<T>, ch: &QuantumChannel<T>) -> Result<ChannelOutput<T>> {
    if rho.dim() != ch.dim() {
        return Err(Error::DimensionMismatch {
            expected: ch.dim(),
            found: rho.dim(),
        });
    }
    let mut out = ch.apply_matrix(rho.matrix());
    // restore exact Hermiticity lost to roundoff
    let n = out.dim();
    let half = T::lit(0.5);
    for i in 0..n {
        for j in i..n {
            let avg = (out[(i, j)] + out[(j, i)].conj()) * half;
            out[(i, j)] = avg;
            out[(j, i)] = avg.conj();
        }
    }
    let renormalization = if ch.is_first_order_truncated() {
        let tr = out.trace().re;
        let factor = T::one() / tr;
        out = out.scale_real(factor);
        Some(factor)
    } else {
        None
    };
    Ok(ChannelOutput {
        state: DensityOperator::from_matrix_unchecked(out),
        renormalization,
    })
}

/// Config-file declaration of a channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Dephasing { p: f64, qubit: usize },
    CollectiveDephasing { p: f64 },
    SpontaneousEmission { p: f64, qubit: usize },
    ParallelDephasing { p: f64, qubit: usize },
    /// Explicit Kraus matrices, rows of `[re, im]` pairs.
    Kraus { matrices: Vec<Vec<Vec<[f64; 2]>>> },
}

impl ChannelSpec {
    pub fn build<T: Scalar>(&self, n: usize, tol: &Tolerances) -> Result<QuantumChannel<T>> {
        match *self {
            ChannelSpec::Dephasing { p, qubit } => dephasing_channel(p, qubit, n, tol),
            ChannelSpec::CollectiveDephasing { p } => collective_dephasing_first_order(p, n, tol),
            ChannelSpec::SpontaneousEmission { p, qubit } => spontaneous_emission_channel(p, tol)?.on_qubit(qubit, n, tol),
            ChannelSpec::ParallelDephasing { p, qubit } => parallel_dephasing_channel(p, qubit, n, tol),
            ChannelSpec::Kraus { ref matrices } => {
                let kraus = matrices
                    .iter()
                    .map(|rows| {
                        let rows: Vec<Vec<Complex<T>>> = rows
                            .iter()
                            .map(|r| r.iter().map(|&[re, im]| Complex::new(T::lit(re), T::lit(im))).collect())
                            .collect();
                        OperatorMatrix::from_rows(&rows)
                    })
                    .collect::<Result<Vec<_>>>()?;
                QuantumChannel::new(kraus, "kraus", tol)
            }
        }
    }
}

#[cfg(test)]
mod tests;
