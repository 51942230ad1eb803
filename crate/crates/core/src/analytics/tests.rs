use super::*;
use proptest::prelude::*;

/// Binomial-weighted moments of `Φ_k = Φ₀ − Σ 2φ₀ u_i`, `u_i` uniform on
/// (0,1]; per-k integrals in closed form, k-sum cut once the binomial mass
/// reaches 1 − 1e−12.
fn integral_moments(phi0: f64, p: f64, r: usize) -> (f64, f64) {
    let step = phi0 / r as f64;
    let mut mass = 0.0;
    let (mut m1, mut m2) = (0.0, 0.0);
    // log-space binomial weights
    let ln_c = |k: usize| -> f64 {
        (1..=k).map(|i| ((r - k + i) as f64 / i as f64).ln()).sum()
    };
    for k in 0..=r {
        let w = if p == 0.0 {
            if k == 0 { 1.0 } else { 0.0 }
        } else {
            (ln_c(k) + k as f64 * p.ln() + (r - k) as f64 * (-p).ln_1p()).exp()
        };
        let kf = k as f64;
        // each reduction 2φ₀u has mean φ₀ and second moment 4φ₀²/3
        let mean_k = phi0 - kf * step;
        let var_k = kf * (4.0 / 3.0 - 1.0) * step * step;
        m1 += w * mean_k;
        m2 += w * (mean_k * mean_k + var_k);
        mass += w;
        if mass >= 1.0 - 1e-12 {
            break;
        }
    }
    (m1, m2)
}

#[test]
fn moment_examples() {
    let m = phase_moments(1.3, 0.0, 7);
    assert_eq!(m.mean, 1.3);
    assert_eq!(m.f_factor, 1.0);
    let m = phase_moments(1.0, 0.1, 10);
    assert!((m.mean - 0.9).abs() < 1e-15);
    assert!((m.second_moment - 0.8165).abs() < 1e-15);
    assert!((m.f_factor - 0.8165f64.sqrt()).abs() < 1e-15);
    assert_eq!(phase_moments(0.0, 0.1, 10).f_factor, 0.8165f64.sqrt());
}

#[test]
fn mean_matches_integral() {
    for &p in &[0.01, 0.05, 0.1, 0.2] {
        for &r in &[1usize, 10, 100] {
            let (m1, _) = integral_moments(0.7, p, r);
            let m = phase_moments(0.7, p, r);
            assert!(((m.mean - m1) / m1).abs() < 1e-10, "p={p} r={r}");
        }
    }
}

#[test]
fn second_moment_against_integral() {
    // The printed bracket carries 3p/4 where the integral gives 4p/3, so the
    // two differ by exactly (4/3 − 3/4)·p·Φ₀²/r.
    for &p in &[0.01, 0.05, 0.1, 0.2] {
        for &r in &[1usize, 10, 100] {
            let phi0 = 0.7;
            let (_, m2) = integral_moments(phi0, p, r);
            let exact = phase_moments_uniform_times(phi0, p, r);
            assert!(((exact.second_moment - m2) / m2).abs() < 1e-10, "p={p} r={r}");
            let printed = phase_moments(phi0, p, r);
            let gap = (7.0 / 12.0) * p * phi0 * phi0 / r as f64;
            assert!((m2 - printed.second_moment - gap).abs() < 1e-12 * m2);
        }
    }
}

#[test]
fn fringe_examples() {
    assert_eq!(p_plus_analytic(0.0, 0.1, 10).p_plus, 1.0);
    let v = p_plus_analytic(std::f64::consts::FRAC_PI_4, 0.0, 5);
    assert!((v.p_plus - 0.5).abs() < 1e-15);
    assert!(!v.valid);
    assert!(p_plus_analytic(0.3, 0.05, 100).valid);
    let f = f_factor(0.05, 100);
    let pp = p_plus_analytic(0.3, 0.05, 100).p_plus;
    assert!((invert_fringe(pp, f) - 0.3).abs() < 1e-12);
}

#[test]
fn sensitivity_examples() {
    let p = SensitivityParams {
        t: Some(1.0),
        n: Some(100.0),
        ..Default::default()
    };
    assert!((sensitivity(Formula::RamseyIdeal, &p).unwrap() - 0.1).abs() < 1e-15);
    let p = SensitivityParams {
        n_qubits: Some(10.0),
        tau: Some(100.0),
        ..Default::default()
    };
    assert!((sensitivity(Formula::Heisenberg, &p).unwrap() - 1e-3).abs() < 1e-18);
    for &(g, tau) in &[(1.0, 100.0), (0.3, 7.0), (2.5, 1e4)] {
        let p = SensitivityParams {
            gamma: Some(g),
            r: Some(g * tau),
            tau: Some(tau),
            ..Default::default()
        };
        let a = sensitivity(Formula::QecRSteps, &p).unwrap();
        let b = sensitivity(Formula::QecMax, &p).unwrap();
        assert!((a - b).abs() <= 1e-15 * b);
    }
    assert!(matches!(
        sensitivity(Formula::RamseyNoisy, &SensitivityParams::default()),
        Err(Error::MissingParam("gamma"))
    ));
    let p = SensitivityParams {
        p_r: Some(0.0),
        r: Some(10.0),
        n: Some(4.0),
        ..Default::default()
    };
    assert_eq!(sensitivity(Formula::DeltaPhi, &p).unwrap(), 0.5);
    for f in Formula::ALL {
        assert_eq!(Formula::from_name(f.name()), Some(f));
    }
}

#[test]
fn delta_phi_matches_error_propagation() {
    // On the logical phase the fringe gives 1/(2f√n); the displayed value is
    // the same quantity for the relative phase 2Φ₀.
    let (p_r, r, n) = (0.05, 100usize, 400u64);
    let f = f_factor(p_r, r);
    let phi0 = 0.25 / f;
    let pp = p_plus_analytic(phi0, p_r, r).p_plus;
    let slope = -f * (2.0 * f * phi0).sin();
    let d = error_propagation(pp, slope, n);
    assert!((d - 1.0 / (2.0 * f * 20.0)).abs() < 1e-12);
    let p = SensitivityParams {
        p_r: Some(p_r),
        r: Some(r as f64),
        n: Some(n as f64),
        ..Default::default()
    };
    assert!((sensitivity(Formula::DeltaPhi, &p).unwrap() - 2.0 * d).abs() < 1e-12);
}

#[test]
fn standard_ramsey() {
    let s = standard_ramsey_analytic(2.0, 0.0, 1.0, 25);
    assert!((s.delta_omega - 0.1).abs() < 1e-15);
    let s = standard_ramsey_analytic(1.0, 1.0, 0.0, 1);
    assert!((2.0 * s.p_plus - 1.0 - (-1.0f64).exp()).abs() < 1e-15);
    // closed-form minimum over a T grid at fixed τ
    let gamma = 0.8;
    let tau = 1e3;
    let grid: Vec<f64> = (1..=4000).map(|i| i as f64 * 1e-3).collect();
    let best = grid
        .iter()
        .copied()
        .min_by(|a, b| {
            let f = |t: f64| standard_ramsey_analytic(t, gamma, 0.0, (tau / t) as u64).delta_omega * (((tau / t) as u64) as f64 / (tau / t)).sqrt();
            f(*a).partial_cmp(&f(*b)).unwrap()
        })
        .unwrap();
    assert!((best - standard_optimal_time(gamma)).abs() < 2e-3, "{best}");
}

proptest! {
    #[test]
    fn f_close_to_one(p in 0.0f64..=0.2, r in 1usize..500) {
        let f = f_factor(p, r);
        prop_assert!((f - 1.0).abs() <= p + 1.0 / r as f64);
    }

    #[test]
    fn variance_nonnegative(p in 0.0f64..=0.75, r in 1usize..500, phi0 in -3.0f64..3.0) {
        let m = phase_moments(phi0, p, r);
        prop_assert!(m.variance() >= -1e-12 * phi0 * phi0);
        prop_assert!(phase_moments_uniform_times(phi0, p, r).variance() >= -1e-12 * phi0 * phi0);
    }

    #[test]
    fn moments_scale_with_phi0(p in 0.0f64..=0.5, r in 1usize..100, phi0 in 0.01f64..3.0) {
        let a = phase_moments(phi0, p, r);
        let b = phase_moments(1.0, p, r);
        prop_assert!((a.mean - phi0 * b.mean).abs() < 1e-12);
        prop_assert!((a.second_moment - phi0 * phi0 * b.second_moment).abs() < 1e-12);
    }
}
