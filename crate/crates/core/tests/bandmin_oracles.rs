use magstep::bandmin::*;
use magstep::robin::theta0_refined;
use magstep::specdisc::{Discretization, Refinement};
use magstep::Error;

#[test]
fn symmetric_endpoint_minimum() {
    let r = Refinement::default();
    let m = minimize_band_refined(-1.0, &r).unwrap();
    assert!((m.zeta + 0.768).abs() < 5e-3);
    assert!((m.beta - 0.59).abs() < 5e-3);
    assert!(m.gamma_min.abs() < 1e-6);
    assert!((m.beta - m.theta0).abs() < 1e-6);
}

#[test]
fn half_ratio_bounds() {
    let m = minimize_band_refined(-0.5, &Refinement::default()).unwrap();
    assert!(m.beta > 0.295 && m.beta < 0.5 && m.beta < m.theta0);
    assert!((m.beta - 0.391237469).abs() < 1e-8, "{}", m.beta);
    assert!((m.zeta + 0.664312923).abs() < 1e-8, "{}", m.zeta);
    assert!(m.checks.all());
    assert!((m.mu2 - m.mu2_closed).abs() <= 1e-2 * m.mu2_closed);
    assert!((m.mu2_closed - 2.0 * (1.0 / m.a - 1.0) * m.zeta * m.point.phi0.powi(2)).abs() < 1e-12);
    assert!(critical_identity_check(&m, &m.point).abs() < 1e-6);
}

#[test]
fn quarter_ratio_trace_negative() {
    let m = minimize_band(-0.25, &Discretization::with_delta(0.01)).unwrap();
    assert!(m.gamma_min < 0.0);
    assert_eq!(m.local_minima, 1);
}

#[test]
fn positive_ratio_refused() {
    let err = minimize_band(0.5, &Discretization::with_delta(0.02)).unwrap_err();
    assert!(matches!(err, Error::NotAttained { .. }));
    assert!(err.is_validation());
    assert!(minimize_band(-1.5, &Discretization::with_delta(0.02)).is_err());
}

#[test]
fn identity_residual_converges() {
    let a = -0.75;
    let theta0 = 0.590106124950;
    let res = |d: f64| {
        let m = minimize_band_with(a, &Discretization::with_delta(d), theta0).unwrap();
        critical_identity_check(&m, &m.point)
    };
    let (r1, r2, r3) = (res(0.01), res(0.005), res(0.0025));
    assert!((r1 / r2).abs().log2() >= 1.8, "{r1} {r2}");
    assert!((r2 / r3).abs().log2() >= 1.8, "{r2} {r3}");
}

#[test]
fn bounds_table_rows_hold() {
    let rows = bounds_table(&[-0.9, -0.1], &Discretization::with_delta(0.01)).unwrap();
    let r9 = &rows[0];
    assert!(r9.holds());
    assert!((r9.lower - 0.9 * r9.theta0).abs() < 1e-14);
    assert!((r9.lower - 0.531).abs() < 1e-3);
    assert!(r9.beta < r9.theta0.min(0.9));
    let r1 = &rows[1];
    assert!(r1.holds() && r1.beta < 0.1);
}

#[test]
fn approach_to_symmetric_endpoint() {
    let r = Refinement::default();
    let theta0 = theta0_refined(&r).unwrap();
    let gaps: Vec<f64> = [-0.9, -0.99]
        .iter()
        .map(|&a| (minimize_band_refined_with(a, &r, theta0).unwrap().beta - theta0).abs())
        .collect();
    assert!(gaps[1] < gaps[0]);
}

#[test]
fn trace_sign_along_sequence() {
    let d = Discretization::with_delta(0.01);
    let theta0 = 0.590106124950;
    let gammas: Vec<f64> = [-0.1, -0.25, -0.5, -0.75, -0.9, -0.99]
        .iter()
        .map(|&a| minimize_band_with(a, &d, theta0).unwrap().gamma_min)
        .collect();
    assert!(gammas.iter().all(|g| *g < 0.0));
    // continuous approach to zero at the symmetric endpoint
    assert!(gammas[5].abs() < gammas[4].abs());
}

#[test]
fn scan_minima_counting() {
    let pts: Vec<(f64, f64)> = [3.0, 2.0, 1.0, 2.0, 2.0 + 1e-14, 2.0, 3.0]
        .iter()
        .enumerate()
        .map(|(i, v)| (i as f64, *v))
        .collect();
    assert_eq!(local_minima(&pts, 1e-12), vec![2]);
    assert_eq!(local_minima(&pts, 0.0), vec![2, 5]);
}
