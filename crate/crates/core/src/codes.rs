//! Code spaces, the three code conditions, the figure of merit ξ and
//! recovery operations (generic polar construction and syndrome circuits).

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::channels::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{cr, hermitian_eig, DensityOperator, OperatorMatrix, StateVector};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

fn dot<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).fold(Complex::zero(), |s, x| s + x)
}

fn norm<T: Scalar>(u: &[Complex<T>]) -> T {
    u.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}

/// Extends an orthonormal set to an orthonormal basis of the whole space,
/// returning only the added vectors.
pub(crate) fn complete_basis<T: Scalar>(given: &[Vec<Complex<T>>], dim: usize) -> Vec<Vec<Complex<T>>> {
    let mut all: Vec<Vec<Complex<T>>> = given.to_vec();
    let mut added = Vec::new();
    let cutoff = T::lit(1e-6);
    for e in 0..dim {
        if all.len() == dim {
            break;
        }
        let mut v = vec![Complex::zero(); dim];
        v[e] = Complex::one();
        // two passes of classical Gram-Schmidt
        for _ in 0..2 {
            for q in &all {
                let c = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi = *vi - *qi * c;
                }
            }
        }
        let n = norm(&v);
        if n > cutoff {
            let inv = T::one() / n;
            v.iter_mut().for_each(|x| *x = x.scale(inv));
            all.push(v.clone());
            added.push(v);
        }
    }
    added
}

/// Orthonormal basis of `span(vectors)`; vectors with residual norm below
/// `cutoff` after projection are skipped.
pub fn orthonormal_span<T: Scalar>(vectors: &[Vec<Complex<T>>], cutoff: f64) -> Vec<StateVector<T>> {
    let mut out: Vec<Vec<Complex<T>>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi = *wi - *qi * c;
                }
            }
        }
        let n = norm(&w);
        if n.as_f64() > cutoff {
            let inv = T::one() / n;
            w.iter_mut().for_each(|x| *x = x.scale(inv));
            out.push(w);
        }
    }
    out.into_iter()
        .map(|v| StateVector::normalized(v).expect("nonzero by construction"))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodeSpace<T: Scalar> {
    dim: usize,
    basis: Vec<StateVector<T>>,
    projector: OperatorMatrix<T>,
}

impl<T: Scalar> CodeSpace<T> {
    pub fn new(basis: Vec<StateVector<T>>, tol: &Tolerances) -> Result<Self> {
        let first = basis.first().ok_or(Error::EmptyCode)?;
        let dim = first.dim();
        if let Some(b) = basis.iter().find(|b| b.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: b.dim(),
            });
        }
        if basis.len() > dim {
            return Err(Error::InvalidCode(format!(
                "{} basis vectors in dimension {dim}",
                basis.len()
            )));
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate() {
                let g = a.inner(b);
                let want = if i == j { T::one() } else { T::zero() };
                if (g - cr(want)).norm().as_f64() > tol.norm {
                    return Err(Error::InvalidCode(format!(
                        "basis not orthonormal: <b{i}|b{j}> = {}{:+}i",
                        g.re, g.im
                    )));
                }
            }
        }
        let projector = basis
            .iter()
            .fold(OperatorMatrix::zeros(dim), |acc, b| &acc + &b.projector());
        if projector.idempotency_residual().as_f64() > tol.proj {
            return Err(Error::InvalidCode("projector not idempotent".into()));
        }
        Ok(Self { dim, basis, projector })
    }

    /// Builds from raw amplitude lists; each vector must already be normalized.
    pub fn from_amplitudes(vectors: Vec<Vec<Complex<T>>>, tol: &Tolerances) -> Result<Self> {
        let basis = vectors
            .into_iter()
            .map(|v| StateVector::new(v, tol))
            .collect::<Result<Vec<_>>>()?;
        Self::new(basis, tol)
    }

    /// `|+⟩^⊗n` and `|−⟩^⊗n`, in that order.
    pub fn ghz(n: usize, tol: &Tolerances) -> Result<Self> {
        if n == 0 || n > 10 {
            return Err(Error::BadN(n));
        }
        let dim = 1usize << n;
        let amp = T::one() / T::lit(dim as f64).sqrt();
        let plus = vec![cr(amp); dim];
        let minus = (0..dim)
            .map(|x: usize| if x.count_ones().is_multiple_of(2) { cr(amp) } else { cr(-amp) })
            .collect();
        Self::from_amplitudes(vec![plus, minus], tol)
    }

    /// Detector plus ancilla code `{|++⟩, |−−⟩}`.
    pub fn two_qubit_plus(tol: &Tolerances) -> Result<Self> {
        Self::ghz(2, tol)
    }

    /// `"two_qubit_plus"` or `"ghz:N"`.
    pub fn preset(name: &str, tol: &Tolerances) -> Result<Self> {
        match name.trim() {
            "two_qubit_plus" => Self::two_qubit_plus(tol),
            other => match other.strip_prefix("ghz:") {
                Some(n) => {
                    let n: usize = n
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidCode(format!("bad qubit count in preset {other:?}")))?;
                    Self::ghz(n, tol)
                }
                None => Err(Error::InvalidCode(format!("unknown code preset {other:?}"))),
            },
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn code_dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[StateVector<T>] {
        &self.basis
    }

    pub fn projector(&self) -> &OperatorMatrix<T> {
        &self.projector
    }

    /// Code state `Σ c_k |b_k⟩`.
    pub fn embed(&self, coefficients: &[Complex<T>]) -> Result<StateVector<T>> {
        if coefficients.len() != self.code_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.code_dim(),
                found: coefficients.len(),
            });
        }
        let mut v = vec![Complex::zero(); self.dim];
        for (c, b) in coefficients.iter().zip(&self.basis) {
            for (vi, bi) in v.iter_mut().zip(b.amplitudes()) {
                *vi = *vi + *c * *bi;
            }
        }
        StateVector::normalized(v)
    }

    /// `V† M V` for the isometry `V` whose columns are the basis.
    pub fn compress(&self, m: &OperatorMatrix<T>) -> OperatorMatrix<T> {
        let images: Vec<_> = self.basis.iter().map(|b| m.apply(b.amplitudes())).collect();
        OperatorMatrix::from_fn(self.code_dim(), |i, j| dot(self.basis[i].amplitudes(), &images[j]))
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: d,
            });
        }
        Ok(())
    }
}

/// ξ with the raw spectral data of the compressed generator.
#[derive(Debug, Clone)]
pub struct XiValue<T: Scalar> {
    /// Maximal code-space variance `((λ_max − λ_min)/2)²`.
    pub xi: T,
    pub maximizer: StateVector<T>,
    pub lambda_min: T,
    pub lambda_max: T,
}

impl<T: Scalar> XiValue<T> {
    pub fn spread(&self) -> T {
        self.lambda_max - self.lambda_min
    }

    pub fn spread_squared(&self) -> T {
        self.spread() * self.spread()
    }
}

/// `‖[G,P]‖_F` computed as `√2 ‖(I−P) G V‖_F`.
pub fn commutator_residual<T: Scalar>(g: &OperatorMatrix<T>, code: &CodeSpace<T>) -> Result<T> {
    code.check_dim(g.dim())?;
    let mut total = T::zero();
    let gv: Vec<_> = code.basis.iter().map(|b| g.apply(b.amplitudes())).collect();
    for col in &gv {
        let mut r = col.clone();
        for b in &code.basis {
            let c = dot(b.amplitudes(), col);
            for (ri, bi) in r.iter_mut().zip(b.amplitudes()) {
                *ri = *ri - *bi * c;
            }
        }
        total = total + r.iter().map(|x| x.norm_sqr()).sum::<T>();
    }
    Ok((T::lit(2.0) * total).sqrt())
}

pub fn compute_xi<T: Scalar>(g: &OperatorMatrix<T>, code: &CodeSpace<T>, tol: &Tolerances) -> Result<XiValue<T>> {
    code.check_dim(g.dim())?;
    g.ensure_hermitian(tol.herm)?;
    let compressed = code.compress(g);
    let eig = hermitian_eig(&compressed, tol)?;
    let k = eig.values.len();
    let (lmin, lmax) = (eig.values[0], eig.values[k - 1]);
    let coeffs = if k == 1 {
        vec![Complex::one()]
    } else {
        let (a, b) = (eig.vector(0), eig.vector(k - 1));
        a.iter().zip(&b).map(|(x, y)| *x + *y).collect()
    };
    let half = (lmax - lmin) / T::lit(2.0);
    Ok(XiValue {
        xi: half * half,
        maximizer: code.embed(&coeffs)?,
        lambda_min: lmin,
        lambda_max: lmax,
    })
}

/// `M_ij = V† E_i† E_j V` for every pair.
fn error_overlaps<T: Scalar>(ch: &QuantumChannel<T>, code: &CodeSpace<T>) -> Vec<Vec<OperatorMatrix<T>>> {
    let images: Vec<Vec<Vec<Complex<T>>>> = ch
        .kraus()
        .iter()
        .map(|e| code.basis.iter().map(|b| e.apply(b.amplitudes())).collect())
        .collect();
    let d = code.code_dim();
    images
        .iter()
        .map(|fi| {
            images
                .iter()
                .map(|fj| OperatorMatrix::from_fn(d, |a, b| dot(&fi[a], &fj[b])))
                .collect()
        })
        .collect()
}

/// `A_ij = tr(P E_i†E_j P)/d_C` and `max_ij ‖P E_i†E_j P − A_ij P‖_F`.
pub fn knill_laflamme<T: Scalar>(ch: &QuantumChannel<T>, code: &CodeSpace<T>) -> Result<(OperatorMatrix<T>, T)> {
    code.check_dim(ch.dim())?;
    let m = error_overlaps(ch, code);
    let w = m.len();
    let d = T::lit(code.code_dim() as f64);
    let a = OperatorMatrix::from_fn(w, |i, j| m[i][j].trace() / d);
    let mut worst = T::zero();
    for i in 0..w {
        for j in 0..w {
            let shifted = &m[i][j] - &OperatorMatrix::identity(code.code_dim()).scale(a[(i, j)]);
            worst = worst.max(shifted.frobenius_norm());
        }
    }
    Ok((a, worst))
}

#[derive(Debug, Clone)]
pub struct ConditionReport<T: Scalar> {
    pub commutator_residual: T,
    pub a_matrix: OperatorMatrix<T>,
    pub condition2_residual: T,
    pub xi: XiValue<T>,
    pub condition1: bool,
    pub condition2: bool,
    pub condition3: bool,
    pub tolerances: Tolerances,
    pub notes: Vec<String>,
}

impl<T: Scalar> ConditionReport<T> {
    pub fn all_pass(&self) -> bool {
        self.condition1 && self.condition2 && self.condition3
    }

    pub fn xi_state(&self) -> &StateVector<T> {
        &self.xi.maximizer
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn fmt_entry<T: Scalar>(z: Complex<T>) -> String {
    let (re, im) = (z.re.as_f64(), z.im.as_f64());
    if im.abs() < 1e-15 {
        format!("{re:.12}")
    } else {
        format!("{re:.12}{im:+.12}i")
    }
}

impl<T: Scalar> std::fmt::Display for ConditionReport<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tol = self.tolerances.condition;
        writeln!(
            f,
            "condition (1) [G,P] = 0:           {}  residual {:.3e} (tol {tol:.1e})",
            verdict(self.condition1),
            self.commutator_residual.as_f64()
        )?;
        writeln!(
            f,
            "condition (2) P Ei' Ej P = Aij P:  {}  residual {:.3e} (tol {tol:.1e})",
            verdict(self.condition2),
            self.condition2_residual.as_f64()
        )?;
        writeln!(f, "A =")?;
        let d = self.a_matrix.dim();
        for i in 0..d {
            let row: Vec<String> = (0..d).map(|j| fmt_entry(self.a_matrix[(i, j)])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        writeln!(f, "condition (3) xi > 0:              {}", verdict(self.condition3))?;
        let xi = &self.xi;
        writeln!(f, "xi = {} (maximal code variance ((lmax-lmin)/2)^2)", xi.xi.as_f64())?;
        writeln!(
            f,
            "  lmin = {}, lmax = {}, spread = {}, spread^2 = {}",
            xi.lambda_min.as_f64(),
            xi.lambda_max.as_f64(),
            xi.spread().as_f64(),
            xi.spread_squared().as_f64()
        )?;
        writeln!(
            f,
            "  note: the quoted values xi = 2 (two-qubit code) and xi = (2N)^2 (GHZ) are the spread and the \
             squared spread of the generator, not its variance; the literal variance is 1 and N^2"
        )?;
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}

pub fn check_conditions<T: Scalar>(
    g: &OperatorMatrix<T>,
    ch: &QuantumChannel<T>,
    code: &CodeSpace<T>,
    tol: &Tolerances,
) -> Result<ConditionReport<T>> {
    code.check_dim(g.dim())?;
    code.check_dim(ch.dim())?;
    let mut notes = Vec::new();
    let comm = commutator_residual(g, code)?;
    let condition1 = comm.as_f64() <= tol.condition;
    if !condition1 {
        notes.push("G does not leave the code invariant; ξ uses the compression P G P".to_string());
    }
    if let Some(t) = ch.truncation() {
        notes.push(format!("channel is first-order truncated (completeness residual {:e})", t.bound));
    }
    let (a, res2) = knill_laflamme(ch, code)?;
    let condition2 = res2.as_f64() <= tol.condition;
    let xi = compute_xi(g, code, tol)?;
    let condition3 = xi.xi.as_f64() > tol.condition;
    Ok(ConditionReport {
        commutator_residual: comm,
        a_matrix: a,
        condition2_residual: res2,
        xi,
        condition1,
        condition2,
        condition3,
        tolerances: *tol,
        notes,
    })
}

/// Projective syndrome measurement followed by a unitary correction per
/// outcome: `R(ρ) = Σ_k C_k P_k ρ P_k C_k†`.
#[derive(Debug, Clone)]
pub struct RecoveryOperation<T: Scalar> {
    pub syndrome_projectors: Vec<OperatorMatrix<T>>,
    pub corrections: Vec<OperatorMatrix<T>>,
    /// Outcome labels, parallel to the projectors.
    pub labels: Vec<String>,
    /// Index of the fail outcome, if any.
    pub fail_outcome: Option<usize>,
    pub description: String,
    /// Error-basis elements with `d_k ≤ diag_tol`, left out of the construction.
    pub dropped: Vec<usize>,
}

impl<T: Scalar> RecoveryOperation<T> {
    pub fn dim(&self) -> usize {
        self.syndrome_projectors[0].dim()
    }

    pub fn len(&self) -> usize {
        self.syndrome_projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.syndrome_projectors.is_empty()
    }

    /// Kraus operators `C_k P_k`.
    pub fn kraus(&self) -> Vec<OperatorMatrix<T>> {
        self.corrections
            .iter()
            .zip(&self.syndrome_projectors)
            .map(|(c, p)| c.matmul(p))
            .collect()
    }

    pub fn to_channel(&self, tol: &Tolerances) -> Result<QuantumChannel<T>> {
        QuantumChannel::new(self.kraus(), self.description.clone(), tol)
    }

    pub fn apply(&self, rho: &DensityOperator<T>) -> Result<DensityOperator<T>> {
        if rho.dim() != self.dim() {
            return Err(Error::RecoveryDimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        let m = self
            .kraus()
            .iter()
            .fold(OperatorMatrix::zeros(self.dim()), |acc, k| &acc + &k.sandwich(rho.matrix()));
        Ok(DensityOperator::from_matrix_unchecked(m))
    }

    pub fn outcome_probabilities(&self, rho: &DensityOperator<T>) -> Vec<T> {
        self.syndrome_projectors
            .iter()
            .map(|p| rho.expectation(p).re)
            .collect()
    }

    /// Largest `‖P_a P_b‖_F` over `a ≠ b` and largest correction unitarity
    /// residual.
    pub fn validity_residuals(&self) -> (T, T) {
        let mut orth = T::zero();
        for (a, pa) in self.syndrome_projectors.iter().enumerate() {
            for pb in &self.syndrome_projectors[a + 1..] {
                orth = orth.max(pa.matmul(pb).frobenius_norm());
            }
        }
        let unit = self
            .corrections
            .iter()
            .map(|c| c.unitarity_residual())
            .fold(T::zero(), T::max);
        (orth, unit)
    }
}

fn diagonalize_a<T: Scalar>(a: &OperatorMatrix<T>, tol: &Tolerances) -> Result<(Vec<T>, Vec<Vec<Complex<T>>>)> {
    let eig = hermitian_eig(a, tol)?;
    let w = a.dim();
    let mut out_vals = Vec::with_capacity(w);
    let mut out_vecs = Vec::with_capacity(w);
    for k in (0..w).rev() {
        let mut v = eig.vector(k);
        let lead = v
            .iter()
            .copied()
            .fold(Complex::zero(), |best: Complex<T>, x| if x.norm() > best.norm() { x } else { best });
        if lead.norm() > T::zero() {
            let phase = lead.conj() / cr(lead.norm());
            v.iter_mut().for_each(|x| *x = *x * phase);
        }
        out_vals.push(eig.values[k]);
        out_vecs.push(v);
    }
    Ok((out_vals, out_vecs))
}

/// Generic recovery from the diagonalized error basis and polar decomposition.
pub fn build_recovery_polar<T: Scalar>(
    ch: &QuantumChannel<T>,
    code: &CodeSpace<T>,
    tol: &Tolerances,
) -> Result<RecoveryOperation<T>> {
    code.check_dim(ch.dim())?;
    let (a, res2) = knill_laflamme(ch, code)?;
    if res2.as_f64() > tol.condition {
        return Err(Error::ConditionsViolated(format!(
            "P E_i†E_j P = A_ij P fails with residual {:e}",
            res2.as_f64()
        )));
    }
    let (d, u) = diagonalize_a(&a, tol)?;
    let dim = code.dim();
    let v: Vec<Vec<Complex<T>>> = code.basis.iter().map(|b| b.amplitudes().to_vec()).collect();
    let v_perp = complete_basis(&v, dim);
    let mut projectors = Vec::new();
    let mut corrections = Vec::new();
    let mut labels = Vec::new();
    let mut dropped = Vec::new();
    for (k, (dk, uk)) in d.iter().zip(&u).enumerate() {
        if dk.as_f64() <= tol.diag {
            dropped.push(k);
            continue;
        }
        // Ẽ_k = Σ_i u_ik E_i
        let ek = ch
            .kraus()
            .iter()
            .zip(uk)
            .fold(OperatorMatrix::zeros(dim), |acc, (e, c)| &acc + &e.scale(*c));
        let scale = T::one() / dk.sqrt();
        let w: Vec<Vec<Complex<T>>> = v
            .iter()
            .map(|col| ek.apply(col).into_iter().map(|x| x.scale(scale)).collect())
            .collect();
        let w_perp = complete_basis(&w, dim);
        let pk = w
            .iter()
            .fold(OperatorMatrix::zeros(dim), |acc, col| &acc + &OperatorMatrix::outer(col, col));
        // correction = U_k† with U_k V = W
        let mut ck = OperatorMatrix::zeros(dim);
        for (vc, wc) in v.iter().zip(&w).chain(v_perp.iter().zip(&w_perp)) {
            ck = &ck + &OperatorMatrix::outer(vc, wc);
        }
        projectors.push(pk);
        corrections.push(ck);
        labels.push(format!("sector {k} (d = {:.6e})", dk.as_f64()));
    }
    let covered = projectors
        .iter()
        .fold(OperatorMatrix::zeros(dim), |acc, p| &acc + p);
    let leftover = &OperatorMatrix::identity(dim) - &covered;
    let mut fail_outcome = None;
    if leftover.trace().re.as_f64() > 0.5 {
        fail_outcome = Some(projectors.len());
        projectors.push(leftover);
        corrections.push(OperatorMatrix::identity(dim));
        labels.push("fail".to_string());
    }
    let rec = RecoveryOperation {
        syndrome_projectors: projectors,
        corrections,
        labels,
        fail_outcome,
        description: format!("polar recovery for {}", ch.label()),
        dropped,
    };
    let (orth, _) = rec.validity_residuals();
    if orth.as_f64() > 1e-9 {
        return Err(Error::ConditionsViolated(format!(
            "syndrome subspaces overlap (‖P_a P_b‖ = {:e}); degenerate codes are not supported",
            orth.as_f64()
        )));
    }
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyndromeKind {
    /// Detector plus noiseless ancilla, syndrome `X₁X₂`.
    TwoQubit,
    /// N-qubit GHZ code, syndromes `X_i X_{i+1}`.
    Ghz,
}

/// Syndrome pattern (`true` = outcome −1 for `X_i X_{i+1}`) of a single
/// `Z_q` error, qubits counted from 1.
pub fn single_error_syndrome(q: usize, n: usize) -> Vec<bool> {
    (1..n).map(|i| i == q || i + 1 == q).collect()
}

/// Which qubit a syndrome pattern points to, if it is a no-error or
/// single-error pattern. `Some(0)` means no error.
pub fn decode_syndrome(pattern: &[bool]) -> Option<usize> {
    let n = pattern.len() + 1;
    if pattern.iter().all(|&s| !s) {
        return Some(0);
    }
    (1..=n).find(|&q| single_error_syndrome(q, n) == pattern)
}

/// Projector onto X-basis states `|x⟩` (bit 1 = `|−⟩`, qubit 1 most
/// significant) satisfying `keep`, written in the computational basis.
pub(crate) fn x_frame_projector<T: Scalar>(n: usize, keep: impl Fn(usize) -> bool) -> OperatorMatrix<T> {
    let dim = 1usize << n;
    let kept: Vec<usize> = (0..dim).filter(|&x| keep(x)).collect();
    let inv = T::one() / T::lit(dim as f64);
    let f: Vec<T> = (0..dim)
        .map(|c| {
            kept.iter()
                .map(|&x| if (c & x).count_ones() % 2 == 0 { T::one() } else { -T::one() })
                .sum::<T>()
                * inv
        })
        .collect();
    OperatorMatrix::from_fn(dim, |a, b| cr(f[a ^ b]))
}

/// Pattern of all `X_i X_{i+1}` outcomes on X-basis state `x`.
pub(crate) fn syndrome_of(x: usize, n: usize) -> Vec<bool> {
    let bit = |q: usize| (x >> (n - q)) & 1 == 1;
    (1..n).map(|i| bit(i) != bit(i + 1)).collect()
}

pub fn build_syndrome_recovery<T: Scalar>(kind: SyndromeKind, n: usize, tol: &Tolerances) -> Result<RecoveryOperation<T>> {
    let n = match kind {
        SyndromeKind::TwoQubit => 2,
        SyndromeKind::Ghz if (2..=10).contains(&n) => n,
        SyndromeKind::Ghz => return Err(Error::BadN(n)),
    };
    if (1usize << n) > tol.max_dim {
        return Err(Error::DimensionOverflow {
            dim: 1 << n,
            max: tol.max_dim,
        });
    }
    let mut projectors = Vec::new();
    let mut corrections = Vec::new();
    let mut labels = Vec::new();
    // qubit index per sector; 0 = no error
    let mut sectors: Vec<usize> = vec![0];
    sectors.extend((1..=n).filter(|&q| decode_syndrome(&single_error_syndrome(q, n)) == Some(q)));
    for &q in &sectors {
        let p = x_frame_projector::<T>(n, |x| decode_syndrome(&syndrome_of(x, n)) == Some(q));
        let c = if q == 0 {
            OperatorMatrix::identity(1 << n)
        } else {
            crate::pauli::PauliTerm::single(crate::pauli::Pauli::Z, q, n)?.materialize()
        };
        projectors.push(p);
        corrections.push(c);
        labels.push(if q == 0 {
            "no error".to_string()
        } else {
            format!("Z{q}")
        });
    }
    let fail = x_frame_projector::<T>(n, |x| decode_syndrome(&syndrome_of(x, n)).is_none());
    let mut fail_outcome = None;
    if fail.trace().re.as_f64() > 0.5 {
        fail_outcome = Some(projectors.len());
        projectors.push(fail);
        corrections.push(OperatorMatrix::identity(1 << n));
        labels.push("fail".to_string());
    }
    let description = match kind {
        SyndromeKind::TwoQubit => "syndrome X1X2, Z1 correction on -1".to_string(),
        SyndromeKind::Ghz => format!("GHZ syndromes X_iX_(i+1), N={n}, single-Z correction"),
    };
    Ok(RecoveryOperation {
        syndrome_projectors: projectors,
        corrections,
        labels,
        fail_outcome,
        description,
        dropped: Vec::new(),
    })
}

/// Choi matrix `Σ_ab |a⟩⟨b| ⊗ R(|s_a⟩⟨s_b|)` of a recovery restricted to the
/// input subspace spanned by `inputs` (orthonormal).
pub fn choi_on_subspace<T: Scalar>(rec: &RecoveryOperation<T>, inputs: &[StateVector<T>]) -> OperatorMatrix<T> {
    let dim = rec.dim();
    let s = inputs.len();
    let kraus = rec.kraus();
    // images[k][a] = K_k |s_a⟩
    let images: Vec<Vec<Vec<Complex<T>>>> = kraus
        .iter()
        .map(|k| inputs.iter().map(|v| k.apply(v.amplitudes())).collect())
        .collect();
    OperatorMatrix::from_fn(s * dim, |row, col| {
        let (a, i) = (row / dim, row % dim);
        let (b, j) = (col / dim, col % dim);
        images
            .iter()
            .map(|img| img[a][i] * img[b][j].conj())
            .fold(Complex::zero(), |acc, x| acc + x)
    })
}

/// Orthonormal basis of `span(code ∪ E_k code)`.
pub fn code_plus_error_subspace<T: Scalar>(code: &CodeSpace<T>, ch: &QuantumChannel<T>) -> Vec<StateVector<T>> {
    let mut vecs: Vec<Vec<Complex<T>>> = code.basis.iter().map(|b| b.amplitudes().to_vec()).collect();
    for k in ch.kraus() {
        for b in &code.basis {
            vecs.push(k.apply(b.amplitudes()));
        }
    }
    orthonormal_span(&vecs, 1e-9)
}
