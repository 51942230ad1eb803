use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::error::Error;
use crate::tolerances::Tolerances;

type M = OperatorMatrix<f64>;

fn pauli_x() -> M {
    M::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
}

fn pauli_z() -> M {
    M::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]]).unwrap()
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> M {
    let mut m = M::zeros(n);
    for i in 0..n {
        m[(i, i)] = c(rng.random_range(-1.0..1.0), 0.0);
        for j in (i + 1)..n {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

fn random_psd(rng: &mut ChaCha8Rng, n: usize) -> M {
    let b = M::from_fn(n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    b.matmul(&b.adjoint())
}

/// Determinant by Gaussian elimination with partial pivoting; test-only oracle.
fn det(m: &M) -> Complex64 {
    let n = m.dim();
    let mut a: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)]).collect()).collect();
    let mut d = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&x, &y| a[x][col].norm().partial_cmp(&a[y][col].norm()).unwrap())
            .unwrap();
        if a[piv][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            a.swap(piv, col);
            d = -d;
        }
        d *= a[col][col];
        for row in (col + 1)..n {
            let f = a[row][col] / a[col][col];
            let pivot = a[col].clone();
            for (x, v) in a[row][col..].iter_mut().zip(&pivot[col..]) {
                *x -= f * v;
            }
        }
    }
    d
}

#[test]
fn pauli_z_spectrum() {
    let eig = hermitian_eig(&pauli_z(), &Tolerances::default()).unwrap();
    assert_eq!(eig.values, vec![-1.0, 1.0]);
}

#[test]
fn pauli_x_spectrum_and_vectors() {
    let eig = hermitian_eig(&pauli_x(), &Tolerances::default()).unwrap();
    assert!((eig.values[0] + 1.0).abs() < 1e-14 && (eig.values[1] - 1.0).abs() < 1e-14);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let minus = [c(s, 0.0), c(-s, 0.0)];
    let plus = [c(s, 0.0), c(s, 0.0)];
    let overlap = |v: &[Complex64], w: &[Complex64]| {
        v.iter().zip(w).map(|(a, b)| a.conj() * b).sum::<Complex64>().norm()
    };
    assert!((overlap(&eig.vector(0), &minus) - 1.0).abs() < 1e-12);
    assert!((overlap(&eig.vector(1), &plus) - 1.0).abs() < 1e-12);
}

#[test]
fn xx_spectrum_matches_characteristic_polynomial() {
    let xx = kron(&pauli_x(), &pauli_x(), 1024).unwrap();
    // oracle: det(XX − λI) = (λ² − 1)² at several sample points
    for &lambda in &[-2.0, -0.5, 0.0, 0.3, 3.0] {
        let shifted = &xx - &M::identity(4).scale_real(lambda);
        let expected = (lambda * lambda - 1.0f64).powi(2);
        assert!((det(&shifted).re - expected).abs() < 1e-12);
    }
    let eig = hermitian_eig(&xx, &Tolerances::default()).unwrap();
    for (got, want) in eig.values.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
        assert!((got - want).abs() < 1e-12);
    }
}

#[test]
fn eig_rejects_non_hermitian() {
    let m = M::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
    assert!(matches!(
        hermitian_eig(&m, &Tolerances::default()),
        Err(Error::NotHermitian { .. })
    ));
}

#[test]
fn eig_reports_exhausted_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_hermitian(&mut rng, 8);
    let tol = Tolerances {
        sweep_budget: 1,
        ..Tolerances::default()
    };
    assert!(matches!(hermitian_eig(&m, &tol), Err(Error::NoConvergence { .. })));
}

#[test]
fn random_hermitian_reconstruction_up_to_256() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0xD1CE);
    for n in [1, 2, 3, 8, 17, 64, 256] {
        let m = random_hermitian(&mut rng, n);
        let eig = hermitian_eig(&m, &tol).unwrap();
        let resid = eig.reconstruct().distance(&m);
        assert!(resid <= 1e-9 * m.frobenius_norm(), "n={n} resid={resid}");
        let vtv = eig.vectors.adjoint().matmul(&eig.vectors);
        assert!(vtv.distance(&M::identity(n)) <= 1e-9, "n={n}");
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn kron_examples() {
    let i2 = M::identity(2);
    assert_eq!(kron(&i2, &i2, 1024).unwrap(), M::identity(4));

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let plus = vec![c(s, 0.0), c(s, 0.0)];
    let minus = vec![c(s, 0.0), c(-s, 0.0)];
    let zero = vec![c(1.0, 0.0), c(0.0, 0.0)];
    let pp = kron_vec(&plus, &plus);
    let out = kron(&pauli_x(), &pauli_x(), 1024).unwrap().apply(&pp);
    assert!(out.iter().zip(&pp).all(|(a, b)| (a - b).norm() < 1e-15));

    let out = kron(&pauli_z(), &i2, 1024).unwrap().apply(&kron_vec(&plus, &zero));
    let want = kron_vec(&minus, &zero);
    assert!(out.iter().zip(&want).all(|(a, b)| (a - b).norm() < 1e-15));
}

#[test]
fn kron_overflow() {
    let big = M::identity(64);
    assert!(matches!(
        kron(&big, &big, 1024),
        Err(Error::DimensionOverflow { dim: 4096, max: 1024 })
    ));
}

#[test]
fn psd_sqrt_examples() {
    let tol = Tolerances::default();
    let d = M::from_real_rows(&[&[4.0, 0.0], &[0.0, 9.0]]).unwrap();
    let r = psd_sqrt(&d, &tol).unwrap();
    assert!(r.distance(&M::from_real_rows(&[&[2.0, 0.0], &[0.0, 3.0]]).unwrap()) < 1e-14);

    assert_eq!(psd_sqrt(&M::zeros(3), &tol).unwrap(), M::zeros(3));

    let s = std::f64::consts::FRAC_1_SQRT_2;
    let p = M::outer(&[c(s, 0.0), c(0.0, s)], &[c(s, 0.0), c(0.0, s)]);
    assert!(psd_sqrt(&p, &tol).unwrap().distance(&p) < 1e-14);

    let neg = M::from_real_rows(&[&[1.0, 0.0], &[0.0, -1e-3]]).unwrap();
    assert!(matches!(psd_sqrt(&neg, &tol), Err(Error::NotPsd { .. })));
    // tiny negative roundoff is clamped
    let clamp = M::from_real_rows(&[&[1.0, 0.0], &[0.0, -1e-12]]).unwrap();
    assert!(psd_sqrt(&clamp, &tol).is_ok());
}

#[test]
fn psd_sqrt_squares_back() {
    let tol = Tolerances::default();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for n in [2, 4, 8, 16] {
        for _ in 0..100 {
            let m = random_psd(&mut rng, n);
            let r = psd_sqrt(&m, &tol).unwrap();
            assert!(r.is_hermitian(1e-10));
            let bound = 1e-8 * m.frobenius_norm().max(1.0);
            assert!(r.matmul(&r).distance(&m) <= bound);
        }
    }
}

#[test]
fn single_precision_kernel() {
    let tol = Tolerances::single_precision();
    let x = OperatorMatrix::<f32>::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
    let eig = hermitian_eig(&x, &tol).unwrap();
    assert!((eig.values[0] + 1.0).abs() < 1e-6);
    assert!(eig.reconstruct().distance(&x) < 1e-5);
}

#[test]
fn density_operator_validation() {
    let tol = Tolerances::default();
    assert!(DensityOperator::new(M::identity(2), &tol).is_err());
    let half = M::identity(2).scale_real(0.5);
    assert!(DensityOperator::new(half, &tol).is_ok());
    let bad = M::from_real_rows(&[&[1.5, 0.0], &[0.0, -0.5]]).unwrap();
    assert!(matches!(DensityOperator::new(bad, &tol), Err(Error::NotPsd { .. })));
}

proptest! {
    #[test]
    fn kron_is_associative(seed in any::<u64>(), da in 1usize..4, db in 1usize..4, dc in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // small integer entries keep every product exact
        let mut rand_m = |n: usize| M::from_fn(n, |_, _| c(rng.random_range(-3i32..=3) as f64, rng.random_range(-3i32..=3) as f64));
        let (a, b, cm) = (rand_m(da), rand_m(db), rand_m(dc));
        let left = kron(&kron(&a, &b, 1024).unwrap(), &cm, 1024).unwrap();
        let right = kron(&a, &kron(&b, &cm, 1024).unwrap(), 1024).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn unitary_evolution_is_unitary(seed in any::<u64>(), n in 1usize..6, t in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, n);
        let u = unitary_evolution(&h, t, &Tolerances::default()).unwrap();
        prop_assert!(u.unitarity_residual() < 1e-10);
    }
}
