//! Dense complex linear algebra for small Hilbert spaces (dimension ≤ 2¹⁰).
//!
//! Everything here is a pure function of its inputs. Hermitian spectra come
//! from cyclic complex Jacobi rotations, which is slow for large matrices but
//! robust on the degenerate spectra that code projectors and Pauli operators
//! produce.

mod eig;
mod matrix;
mod state;

pub use eig::{hermitian_eig, psd_sqrt, unitary_evolution, HermitianEigen};
pub use matrix::{kron, kron_all, kron_vec, OperatorMatrix};
pub use state::{DensityOperator, StateVector};

use num_complex::Complex;

use crate::scalar::Scalar;

#[inline]
pub fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn cr<T: Scalar>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

#[cfg(test)]
mod tests;
