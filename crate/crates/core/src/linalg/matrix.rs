use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense complex square matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct OperatorMatrix<T: Scalar> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> fmt::Debug for OperatorMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OperatorMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re.as_f64(), z.im.as_f64())?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> OperatorMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "operator dimension must be at least 1");
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries; `entries.len()` must be a perfect square.
    pub fn from_row_major(entries: Vec<Complex<T>>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim == 0 || dim * dim != entries.len() {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1) * dim.max(1),
                found: entries.len(),
            });
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: 0,
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    /// Real-valued convenience constructor used heavily in tests.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex<T>>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[Complex<T>]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn real_diagonal(values: &[T]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex::new(v, T::zero());
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
            acc + self[(i, i)]
        })
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Largest entrywise deviation `|M[i][j] - conj(M[j][i])|`.
    pub fn hermiticity_residual(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= T::lit(tol)
    }

    pub fn ensure_hermitian(&self, tol: f64) -> Result<()> {
        let residual = self.hermiticity_residual();
        if residual <= T::lit(tol) {
            Ok(())
        } else {
            Err(Error::NotHermitian {
                residual: residual.as_f64(),
                tol,
            })
        }
    }

    /// `‖M² − M‖_F`, zero for an orthogonal projector.
    pub fn idempotency_residual(&self) -> T {
        (&self.matmul(self) - self).frobenius_norm()
    }

    pub fn is_projector(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.idempotency_residual() <= T::lit(tol)
    }

    /// `‖U†U − I‖_F`.
    pub fn unitarity_residual(&self) -> T {
        (&self.adjoint().matmul(self) - &Self::identity(self.dim)).frobenius_norm()
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in row.iter().enumerate() {
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `A B A†`.
    pub fn sandwich(&self, inner: &Self) -> Self {
        self.matmul(inner).matmul(&self.adjoint())
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        &self.matmul(rhs) - &rhs.matmul(self)
    }

    /// Matrix-vector product on raw amplitudes.
    pub fn apply(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim, "apply dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|i| {
                self.data[i * n..(i + 1) * n]
                    .iter()
                    .zip(v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product dimension mismatch");
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    /// `⟨u|M|v⟩`.
    pub fn expectation(&self, u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
        self.apply(v)
            .iter()
            .zip(u)
            .fold(Complex::new(T::zero(), T::zero()), |acc, (&mv, &ui)| {
                acc + ui.conj() * mv
            })
    }

    /// Frobenius distance to another matrix of the same dimension.
    pub fn distance(&self, other: &Self) -> T {
        (self - other).frobenius_norm()
    }

    pub fn map_entries(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> OperatorMatrix<U> {
        OperatorMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(U::lit(z.re.as_f64()), U::lit(z.im.as_f64())))
                .collect(),
        }
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| i == j || (self[(i, j)].re == T::zero() && self[(i, j)].im == T::zero()))
        })
    }
}

impl<T: Scalar> Index<(usize, usize)> for OperatorMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for OperatorMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Scalar> Add for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;

    fn add(self, rhs: Self) -> OperatorMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "add dimension mismatch");
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect(),
        }
    }
}

impl<T: Scalar> Sub for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;

    fn sub(self, rhs: Self) -> OperatorMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "sub dimension mismatch");
        OperatorMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect(),
        }
    }
}

impl<T: Scalar> Mul for &OperatorMatrix<T> {
    type Output = OperatorMatrix<T>;

    fn mul(self, rhs: Self) -> OperatorMatrix<T> {
        self.matmul(rhs)
    }
}

/// Kronecker product; the left factor is the most significant index.
pub fn kron<T: Scalar>(a: &OperatorMatrix<T>, b: &OperatorMatrix<T>, max_dim: usize) -> Result<OperatorMatrix<T>> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.saturating_mul(db);
    if dim > max_dim {
        return Err(Error::DimensionOverflow { dim, max: max_dim });
    }
    let mut out = OperatorMatrix::zeros(dim);
    for i in 0..da {
        for j in 0..da {
            let aij = a[(i, j)];
            if aij.re == T::zero() && aij.im == T::zero() {
                continue;
            }
            for k in 0..db {
                for l in 0..db {
                    out[(i * db + k, j * db + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    Ok(out)
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all<T: Scalar>(factors: &[OperatorMatrix<T>], max_dim: usize) -> Result<OperatorMatrix<T>> {
    let (first, rest) = factors
        .split_first()
        .expect("kron_all needs at least one factor");
    rest.iter().try_fold(first.clone(), |acc, f| kron(&acc, f, max_dim))
}

/// Kronecker product of state vectors.
pub fn kron_vec<T: Scalar>(a: &[Complex<T>], b: &[Complex<T>]) -> Vec<Complex<T>> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}
