use num_complex::Complex;

use super::matrix::OperatorMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tolerances::Tolerances;

/// Spectrum of a Hermitian matrix: ascending eigenvalues with orthonormal
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T: Scalar> {
    pub values: Vec<T>,
    pub vectors: OperatorMatrix<T>,
}

impl<T: Scalar> HermitianEigen<T> {
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        let n = self.vectors.dim();
        (0..n).map(|i| self.vectors[(i, k)]).collect()
    }

    /// `V f(Λ) V†` for a real function of the eigenvalues.
    pub fn reconstruct_with(&self, f: impl Fn(T) -> Complex<T>) -> OperatorMatrix<T> {
        let n = self.vectors.dim();
        let mut out = OperatorMatrix::zeros(n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let fk = f(lambda);
            if fk.re == T::zero() && fk.im == T::zero() {
                continue;
            }
            for i in 0..n {
                let vik = self.vectors[(i, k)] * fk;
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + vik * self.vectors[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> OperatorMatrix<T> {
        self.reconstruct_with(|l| Complex::new(l, T::zero()))
    }
}

fn off_diagonal_norm<T: Scalar>(a: &OperatorMatrix<T>) -> T {
    let n = a.dim();
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s = s + a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic complex Jacobi diagonalization.
pub fn hermitian_eig<T: Scalar>(m: &OperatorMatrix<T>, tol: &Tolerances) -> Result<HermitianEigen<T>> {
    m.ensure_hermitian(tol.herm)?;
    let n = m.dim();
    // symmetrize so the rotations see an exactly Hermitian input
    let mut a = OperatorMatrix::from_fn(n, |i, j| {
        let half = T::lit(0.5);
        (m[(i, j)] + m[(j, i)].conj()) * half
    });
    let mut v = OperatorMatrix::<T>::identity(n);
    let scale = a.frobenius_norm();
    let target = T::epsilon() * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || scale == T::zero() {
            break;
        }
        if sweeps >= tol.sweep_budget {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off.as_f64(),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a[(i, i)]
            .re
            .partial_cmp(&a[(j, j)].re)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&k| a[(k, k)].re).collect();
    let vectors = OperatorMatrix::from_fn(n, |i, k| v[(i, order[k])]);
    Ok(HermitianEigen { values, vectors })
}

/// One Jacobi rotation zeroing `a[p][q]`; accumulates `V ← V J`.
fn rotate<T: Scalar>(a: &mut OperatorMatrix<T>, v: &mut OperatorMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag <= T::min_positive_value() {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let two = T::lit(2.0);
    let theta = (aqq - app) / (two * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;
    let cc = Complex::new(c, T::zero());
    // J = [[c, s·e^{iφ}], [−s·e^{−iφ}, c]] on the (p, q) plane
    let jpq = phase * s;
    let jqp = -(phase.conj() * s);
    let n = a.dim();

    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * cc + akq * jqp;
        a[(k, q)] = akp * jpq + akq * cc;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * cc + aqk * jqp.conj();
        a[(q, k)] = apk * jpq.conj() + aqk * cc;
    }
    let zero = Complex::new(T::zero(), T::zero());
    a[(p, q)] = zero;
    a[(q, p)] = zero;
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * cc + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * cc;
    }
}

/// Hermitian PSD square root; eigenvalues in `[-psd_tol, 0)` are clamped to zero.
pub fn psd_sqrt<T: Scalar>(m: &OperatorMatrix<T>, tol: &Tolerances) -> Result<OperatorMatrix<T>> {
    let eig = hermitian_eig(m, tol)?;
    let floor = -T::lit(tol.psd);
    if let Some(&worst) = eig.values.first() {
        if worst < floor {
            return Err(Error::NotPsd {
                eigenvalue: worst.as_f64(),
            });
        }
    }
    Ok(eig.reconstruct_with(|l| Complex::new(l.max(T::zero()).sqrt(), T::zero())))
}

/// `exp(−i H t)` for Hermitian `H`.
pub fn unitary_evolution<T: Scalar>(h: &OperatorMatrix<T>, t: T, tol: &Tolerances) -> Result<OperatorMatrix<T>> {
    let eig = hermitian_eig(h, tol)?;
    Ok(eig.reconstruct_with(|l| {
        let angle = -l * t;
        Complex::new(angle.cos(), angle.sin())
    }))
}
