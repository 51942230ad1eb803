use num_complex::Complex;

use super::eig::hermitian_eig;
use super::matrix::OperatorMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

/// Unit-norm pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Scalar> {
    amplitudes: Vec<Complex<T>>,
}

impl<T: Scalar> StateVector<T> {
    /// Validates the norm without rescaling.
    pub fn new(amplitudes: Vec<Complex<T>>, tol: &Tolerances) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("state has no amplitudes".into()));
        }
        let norm2: T = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm2 - T::one()).abs() > T::lit(tol.norm) {
            return Err(Error::InvalidState(format!(
                "squared norm {} differs from 1",
                norm2
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let norm: T = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if amplitudes.is_empty() || norm == T::zero() || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or empty vector".into()));
        }
        let inv = T::one() / norm;
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z * inv).collect(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); dim];
        amplitudes[index] = Complex::new(T::one(), T::zero());
        Self { amplitudes }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
    }

    pub fn projector(&self) -> OperatorMatrix<T> {
        OperatorMatrix::outer(&self.amplitudes, &self.amplitudes)
    }
}

/// Unit-trace Hermitian PSD operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator<T: Scalar> {
    matrix: OperatorMatrix<T>,
}

impl<T: Scalar> DensityOperator<T> {
    /// Checks Hermiticity, unit trace and PSD within the given tolerances.
    pub fn new(matrix: OperatorMatrix<T>, tol: &Tolerances) -> Result<Self> {
        matrix.ensure_hermitian(tol.herm)?;
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > T::lit(tol.trace) || tr.im.abs() > T::lit(tol.trace) {
            return Err(Error::InvalidState(format!("trace {} + {}i is not 1", tr.re, tr.im)));
        }
        let eig = hermitian_eig(&matrix, tol)?;
        if let Some(&lowest) = eig.values.first() {
            if lowest < -T::lit(tol.psd) {
                return Err(Error::NotPsd {
                    eigenvalue: lowest.as_f64(),
                });
            }
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(state: &StateVector<T>) -> Self {
        Self {
            matrix: state.projector(),
        }
    }

    /// Wraps a matrix already known to be a valid state (e.g. a CPTP image).
    pub(crate) fn from_matrix_unchecked(matrix: OperatorMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: OperatorMatrix::identity(dim).scale_real(T::one() / T::from_usize(dim).unwrap()),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &OperatorMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> OperatorMatrix<T> {
        self.matrix
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn fidelity_with_pure(&self, psi: &StateVector<T>) -> T {
        self.matrix.expectation(psi.amplitudes(), psi.amplitudes()).re
    }

    /// `tr(Πρ)` for an observable or projector.
    pub fn expectation(&self, op: &OperatorMatrix<T>) -> Complex<T> {
        let n = self.dim();
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..n {
            for j in 0..n {
                acc = acc + op[(i, j)] * self.matrix[(j, i)];
            }
        }
        acc
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }
}
