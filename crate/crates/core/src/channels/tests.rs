use super::*;
use crate::linalg::{c, hermitian_eig, unitary_evolution, StateVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn plus() -> StateVector<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(vec![c(h, 0.0), c(h, 0.0)], &tol()).unwrap()
}

fn minus() -> StateVector<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    StateVector::new(vec![c(h, 0.0), c(-h, 0.0)], &tol()).unwrap()
}

fn random_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityOperator<f64> {
    // Wishart-style: A A† / tr
    let a = OperatorMatrix::from_fn(dim, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let m = a.matmul(&a.adjoint());
    let tr = m.trace().re;
    DensityOperator::new(m.scale_real(1.0 / tr), &tol()).unwrap()
}

#[test]
fn dephasing_zero_is_identity() {
    for q in 1..=3 {
        let ch: QuantumChannel<f64> = dephasing_channel(0.0, q, 3, &tol()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(q as u64);
        let rho = random_density(&mut rng, 8);
        let out = apply_channel(&rho, &ch).unwrap();
        assert!(out.state.matrix().distance(rho.matrix()) < 1e-14);
        assert!(out.renormalization.is_none());
    }
}

#[test]
fn dephasing_examples_on_plus() {
    let rho = DensityOperator::from_pure(&plus());
    let ch = dephasing_channel::<f64>(0.3, 1, 1, &tol()).unwrap();
    let out = apply_channel(&rho, &ch).unwrap().state;
    let want = &plus().projector().scale_real(0.7) + &minus().projector().scale_real(0.3);
    assert!(out.matrix().distance(&want) < 1e-14);

    let ch = dephasing_channel::<f64>(1.0, 1, 1, &tol()).unwrap();
    let out = apply_channel(&rho, &ch).unwrap().state;
    assert!(out.matrix().distance(&minus().projector()) < 1e-14);

    let ch = dephasing_channel::<f64>(0.5, 1, 1, &tol()).unwrap();
    let out = apply_channel(&rho, &ch).unwrap().state;
    assert!(out.matrix().distance(DensityOperator::maximally_mixed(2).matrix()) < 1e-14);
}

#[test]
fn dephasing_errors() {
    assert!(matches!(dephasing_channel::<f64>(1.5, 1, 2, &tol()), Err(Error::BadProbability { .. })));
    assert!(matches!(dephasing_channel::<f64>(-0.1, 1, 2, &tol()), Err(Error::BadProbability { .. })));
    assert!(matches!(dephasing_channel::<f64>(0.1, 3, 2, &tol()), Err(Error::BadIndex { .. })));
    assert!(matches!(dephasing_channel::<f64>(0.1, 0, 2, &tol()), Err(Error::BadIndex { .. })));
    assert!(matches!(
        dephasing_channel::<f64>(0.1, 1, 11, &tol()),
        Err(Error::DimensionOverflow { .. })
    ));
}

#[test]
fn composition_of_dephasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &(p1, p2) in &[(0.1, 0.2), (0.01, 0.5), (0.3, 0.3), (1.0, 0.25)] {
        let a = dephasing_channel::<f64>(p1, 2, 2, &tol()).unwrap();
        let b = dephasing_channel::<f64>(p2, 2, 2, &tol()).unwrap();
        let both = dephasing_channel::<f64>(p1 + p2 - 2.0 * p1 * p2, 2, 2, &tol()).unwrap();
        let composed = b.after(&a).unwrap();
        assert!(composed.completeness_residual() < 1e-12);
        // oracle: act on every matrix unit |i><j|
        for i in 0..4 {
            for j in 0..4 {
                let mut e = OperatorMatrix::zeros(4);
                e[(i, j)] = c(1.0, 0.0);
                let lhs = b.apply_matrix(&a.apply_matrix(&e));
                assert!(lhs.distance(&both.apply_matrix(&e)) < 1e-14);
                assert!(composed.apply_matrix(&e).distance(&lhs) < 1e-14);
            }
        }
        let rho = random_density(&mut rng, 4);
        let x = apply_channel(&apply_channel(&rho, &a).unwrap().state, &b).unwrap().state;
        let y = apply_channel(&rho, &both).unwrap().state;
        assert!(x.matrix().distance(y.matrix()) < 1e-14);
    }
}

#[test]
fn dephasing_commutes_with_z_rotation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z: OperatorMatrix<f64> = Pauli::Z.matrix();
    for _ in 0..20 {
        let theta = rng.random::<f64>() * 6.0;
        let u = unitary_evolution(&z, theta, &tol()).unwrap();
        let rho = random_density(&mut rng, 2);
        let ch = dephasing_channel::<f64>(rng.random(), 1, 1, &tol()).unwrap();
        let rotated = DensityOperator::new(u.sandwich(rho.matrix()), &tol()).unwrap();
        let lhs = apply_channel(&rotated, &ch).unwrap().state;
        let rhs = u.sandwich(apply_channel(&rho, &ch).unwrap().state.matrix());
        assert!((&lhs.matrix().clone() - &rhs).max_abs() < 1e-10);
    }
}

#[test]
fn collective_reduces_to_single_for_one_qubit() {
    for &p in &[0.0, 0.01, 0.3, 1.0] {
        let a = collective_dephasing_first_order::<f64>(p, 1, &tol()).unwrap();
        let b = dephasing_channel::<f64>(p, 1, 1, &tol()).unwrap();
        assert_eq!(a.kraus(), b.kraus());
        assert!(a.is_first_order_truncated());
        assert_eq!(a.truncation().unwrap().bound, 0.0);
    }
}

#[test]
fn collective_label_and_bounds() {
    let ch = collective_dephasing_first_order::<f64>(0.1, 3, &tol()).unwrap();
    assert_eq!(ch.kraus().len(), 4);
    assert!(ch.label().contains("E_i = p Z_i"));
    assert!(ch.truncation().unwrap().bound < 1e-15);
    assert!(matches!(
        collective_dephasing_first_order::<f64>(0.4, 3, &tol()),
        Err(Error::BadProbability { .. })
    ));
    let id = collective_dephasing_first_order::<f64>(0.0, 3, &tol()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho = random_density(&mut rng, 8);
    let out = apply_channel(&rho, &id).unwrap();
    assert!(out.state.matrix().distance(rho.matrix()) < 1e-14);
    assert!((out.renormalization.unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn collective_on_ghz_detects_single_flips() {
    // GHZ in the X basis: (|+++> + |--->)/sqrt2; syndromes X1X2, X2X3
    let p = 0.01;
    let n = 3;
    let h = 1.0 / 8f64.sqrt();
    let amps: Vec<_> = (0..8)
        .map(|b: u32| {
            let sign = if b.count_ones() % 2 == 1 { -1.0 } else { 1.0 };
            c((1.0 + sign) * h / 2f64.sqrt(), 0.0)
        })
        .collect();
    let ghz = StateVector::normalized(amps).unwrap();
    let ch = collective_dephasing_first_order::<f64>(p, n, &tol()).unwrap();
    let rho = apply_channel(&DensityOperator::from_pure(&ghz), &ch).unwrap().state;
    let id = OperatorMatrix::<f64>::identity(8);
    let s12 = PauliTerm::new(c(1.0, 0.0), vec![Pauli::X, Pauli::X, Pauli::I]).unwrap().materialize();
    let s23 = PauliTerm::new(c(1.0, 0.0), vec![Pauli::I, Pauli::X, Pauli::X]).unwrap().materialize();
    let proj = |s: &OperatorMatrix<f64>, sign: f64| (&id + &s.scale_real(sign)).scale_real(0.5);
    // Z1 flips only X1X2, Z3 flips only X2X3, Z2 flips both
    let cases = [(-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)];
    for (a, b) in cases {
        let pr = proj(&s12, a).matmul(&proj(&s23, b));
        let prob = rho.expectation(&pr).re;
        assert!((prob - p).abs() < 1e-14, "{prob}");
    }
    let pr = proj(&s12, 1.0).matmul(&proj(&s23, 1.0));
    assert!((rho.expectation(&pr).re - (1.0 - 3.0 * p)).abs() < 1e-14);
}

#[test]
fn spontaneous_emission_examples() {
    let id = spontaneous_emission_channel::<f64>(0.0, &tol()).unwrap();
    assert!(id.kraus()[0].distance(&OperatorMatrix::identity(2)) < 1e-15);
    assert!(id.kraus()[1].max_abs() == 0.0);

    let full = spontaneous_emission_channel::<f64>(1.0, &tol()).unwrap();
    let one = DensityOperator::from_pure(&StateVector::basis(2, 1));
    let out = apply_channel(&one, &full).unwrap().state;
    assert!(out.matrix().distance(&StateVector::<f64>::basis(2, 0).projector()) < 1e-15);

    for &p in &[0.01, 0.1, 0.5] {
        let ch = spontaneous_emission_channel::<f64>(p, &tol()).unwrap();
        let e0 = &ch.kraus()[0];
        let g = e0.adjoint().matmul(e0);
        // E0†E0 = (1 - p/2) I + (p/2) Z
        let want = &OperatorMatrix::identity(2).scale_real(1.0 - p / 2.0) + &Pauli::Z.matrix().scale_real(p / 2.0);
        assert!(g.distance(&want) < 1e-15);
    }
    assert!(matches!(spontaneous_emission_channel::<f64>(2.0, &tol()), Err(Error::BadProbability { .. })));
}

#[test]
fn spontaneous_emission_extension() {
    let ch = spontaneous_emission_channel::<f64>(0.2, &tol()).unwrap().on_qubit(2, 3, &tol()).unwrap();
    assert_eq!(ch.dim(), 8);
    assert!(ch.completeness_residual() < 1e-14);
    // |011> decays to |001> with probability 0.2 (qubit 2 is the middle bit)
    let rho = DensityOperator::from_pure(&StateVector::basis(8, 0b011));
    let out = apply_channel(&rho, &ch).unwrap().state;
    assert!((out.matrix()[(0b001, 0b001)].re - 0.2).abs() < 1e-14);
    assert!((out.matrix()[(0b011, 0b011)].re - 0.8).abs() < 1e-14);
    assert!(matches!(
        spontaneous_emission_channel::<f64>(0.2, &tol()).unwrap().on_qubit(4, 3, &tol()),
        Err(Error::BadIndex { .. })
    ));
}

#[test]
fn parallel_dephasing_flips_x_axis_populations() {
    let ch = parallel_dephasing_channel::<f64>(0.25, 1, 1, &tol()).unwrap();
    let zero = DensityOperator::from_pure(&StateVector::basis(2, 0));
    let out = apply_channel(&zero, &ch).unwrap().state;
    assert!((out.matrix()[(1, 1)].re - 0.25).abs() < 1e-15);
    let p = DensityOperator::from_pure(&plus());
    let out = apply_channel(&p, &ch).unwrap().state;
    assert!(out.matrix().distance(p.matrix()) < 1e-15);
}

#[test]
fn apply_checks_dimension() {
    let ch = dephasing_channel::<f64>(0.1, 1, 2, &tol()).unwrap();
    let rho = DensityOperator::maximally_mixed(2);
    assert!(matches!(apply_channel(&rho, &ch), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn non_cptp_kraus_rejected() {
    let k = OperatorMatrix::<f64>::identity(2).scale_real(0.9);
    assert!(matches!(QuantumChannel::new(vec![k], "bad", &tol()), Err(Error::InvalidChannel(_))));
    assert!(QuantumChannel::<f64>::new(vec![], "none", &tol()).is_err());
}

#[test]
fn spec_roundtrip_from_json() {
    let specs = [
        r#"{"type":"dephasing","p":0.1,"qubit":1}"#,
        r#"{"type":"collective_dephasing","p":0.05}"#,
        r#"{"type":"spontaneous_emission","p":0.2,"qubit":2}"#,
        r#"{"type":"parallel_dephasing","p":0.1,"qubit":2}"#,
        r#"{"type":"kraus","matrices":[[[[1,0],[0,0]],[[0,0],[0,0]]],[[[0,0],[0,0]],[[0,0],[1,0]]]]}"#,
    ];
    for (i, s) in specs.iter().enumerate() {
        let spec: ChannelSpec = serde_json::from_str(s).unwrap();
        let n = if i == 4 { 1 } else { 2 };
        let ch = spec.build::<f64>(n, &tol()).unwrap();
        assert!(ch.completeness_residual() < 1e-12, "{s}");
    }
    assert!(serde_json::from_str::<ChannelSpec>(r#"{"type":"amplitude","p":0.1}"#).is_err());
}

fn all_channels(p: f64) -> Vec<QuantumChannel<f64>> {
    let t = tol();
    vec![
        dephasing_channel(p, 1, 2, &t).unwrap(),
        parallel_dephasing_channel(p, 2, 2, &t).unwrap(),
        spontaneous_emission_channel(p, &t).unwrap().on_qubit(1, 2, &t).unwrap(),
        collective_dephasing_first_order(p / 2.0, 2, &t).unwrap(),
    ]
}

#[test]
fn cptp_on_probability_grid() {
    for &p in &[0.0, 0.01, 0.1, 0.5, 1.0] {
        for ch in all_channels(p) {
            assert!(ch.completeness_residual() <= 1e-8, "{}", ch.label());
        }
    }
}

#[test]
fn outputs_stay_positive() {
    let t = tol();
    for &p in &[0.01, 0.1, 0.5, 1.0] {
        for (k, ch) in all_channels(p).into_iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + k as u64);
            for _ in 0..200 {
                let rho = random_density(&mut rng, 4);
                let out = apply_channel(&rho, &ch).unwrap().state;
                let eig = hermitian_eig(out.matrix(), &t).unwrap();
                assert!(eig.values[0] >= -t.psd, "{}: {}", ch.label(), eig.values[0]);
                assert!((out.trace() - 1.0).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn single_precision_channels() {
    let t = Tolerances::single_precision();
    let ch = dephasing_channel::<f32>(0.3, 1, 1, &t).unwrap();
    let h = std::f32::consts::FRAC_1_SQRT_2;
    let psi = StateVector::new(vec![Complex::new(h, 0.0), Complex::new(h, 0.0)], &t).unwrap();
    let out = apply_channel(&DensityOperator::from_pure(&psi), &ch).unwrap().state;
    assert!((out.matrix()[(0, 1)].re - 0.2).abs() < 1e-6);
}

proptest! {
    #[test]
    fn completeness_for_any_probability(p in 0.0f64..=1.0, q in 1usize..=3) {
        let t = tol();
        prop_assert!(dephasing_channel::<f64>(p, q, 3, &t).unwrap().completeness_residual() <= 1e-12);
        prop_assert!(spontaneous_emission_channel::<f64>(p, &t).unwrap().on_qubit(q, 3, &t).unwrap().completeness_residual() <= 1e-12);
        prop_assert!(collective_dephasing_first_order::<f64>(p / 3.0, 3, &t).unwrap().completeness_residual() <= 1e-12);
    }
}
