use proptest::prelude::*;

use magstep::bandmin::minimize_band_with;
use magstep::curvature::{weighted_grid, weighted_system_on, WeightedParams};
use magstep::glfields::{classify, critical_fields};
use magstep::robin::{robin_eig, robin_spectrum, RobinParams};
use magstep::specdisc::*;
use magstep::stepband::{band_point, step_grid, step_potential, StepParams};

const THETA0: f64 = 0.590106124950;

fn ab() -> impl Strategy<Value = f64> {
    prop_oneof![-1.0..-0.05f64, 0.05..0.95f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn aligned_grid_contains_origin(left in 0.5..20.0f64, right in 0.5..20.0f64, k in 1usize..40) {
        let delta = 0.5 / k as f64;
        let g = Grid::aligned(left, right, delta).unwrap();
        let z = g.zero_index().unwrap();
        prop_assert_eq!(g.node(z), 0.0);
        prop_assert!((g.delta() - (g.hi() - g.lo()) / (g.len() - 1) as f64).abs() < 1e-12);
        prop_assert!(g.len() >= 3);
    }

    #[test]
    fn step_potential_continuous_and_nonnegative(a in ab(), xi in -10.0..10.0f64, t in -20.0..20.0f64) {
        let v = step_potential(StepParams::new(a).unwrap(), xi);
        prop_assert!(v(t) >= 0.0);
        prop_assert!((v(1e-12) - v(-1e-12)).abs() < 1e-9 * (1.0 + xi.abs()));
        prop_assert_eq!(v(0.0), xi * xi);
    }

    #[test]
    fn trapezoid_exact_for_linear(left in 0.5..5.0f64, right in 0.5..5.0f64, c0 in -3.0..3.0f64, c1 in -3.0..3.0f64) {
        let g = Grid::aligned(left, right, 0.1).unwrap();
        let q = quadrature(&g, &g.sample(|t| c0 + c1 * t), None).unwrap();
        let (lo, hi) = (g.lo(), g.hi());
        let len = hi - lo;
        let exact = c0 * len + 0.5 * c1 * (hi * hi - lo * lo);
        prop_assert!((q - exact).abs() < 1e-10 * (1.0 + exact.abs()));
    }

    #[test]
    fn classification_monotone_in_field(a in -0.99..-0.01f64, t in 0.0..1.0f64, b1 in 0.01..20.0f64, b2 in 0.01..20.0f64) {
        // any beta strictly inside (|a| Theta_0, min(|a|, Theta_0)) is consistent
        let lo = a.abs() * THETA0;
        let hi = a.abs().min(THETA0);
        let beta = lo + (hi - lo) * (0.05 + 0.9 * t);
        let f = critical_fields(a, THETA0, beta).unwrap();
        prop_assert!(f.bc1 < f.bc2 && f.bc2 < f.bc3);
        let (small, large) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
        let (r1, r2) = (classify(&f, small).unwrap(), classify(&f, large).unwrap());
        prop_assert!(!r1.edge || r2.edge);
        prop_assert!(!r1.boundary1 || r2.boundary1);
        prop_assert!(!r1.boundary2 || r2.boundary2);
        let eps = 1e-9 * f.bc2;
        let (below, above) = (classify(&f, f.bc2 - eps).unwrap(), classify(&f, f.bc2 + eps).unwrap());
        prop_assert!(!below.edge && above.edge);
        prop_assert_eq!(below.boundary1, above.boundary1);
        prop_assert_eq!(below.boundary2, above.boundary2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn step_ground_state_single_signed(a in ab(), xi in -4.0..2.0f64) {
        let bp = band_point(StepParams::new(a).unwrap(), xi, &Discretization::with_delta(0.02)).unwrap();
        prop_assert!(bp.phi0 > 0.0);
        let inner_nodes = &bp.phi[1..bp.phi.len() - 1];
        let min = inner_nodes.iter().cloned().fold(f64::INFINITY, f64::min);
        prop_assert!(min > -1e-12, "min {}", min);
        prop_assert_eq!(bp.gamma, bp.dphi0_right / bp.phi0);
    }

    #[test]
    fn robin_spectrum_simple_with_positive_trace(gamma in -1.0..2.0f64, xi in -3.0..1.0f64) {
        let params = RobinParams::new(gamma, xi).unwrap();
        let d = Discretization::with_delta(0.02);
        let s = robin_spectrum(params, 3, &d).unwrap();
        prop_assert!(s[0] < s[1] && s[1] < s[2]);
        for j in 1..=3 {
            prop_assert!(robin_eig(params, j, &d).unwrap().vector[0] > 0.0);
        }
    }

    #[test]
    fn unit_mass_reduces_to_plain(a in -1.0..-0.05f64, xi in -2.0..1.0f64) {
        let params = StepParams::new(a).unwrap();
        let grid = step_grid(params, xi, &Discretization::with_delta(0.05)).unwrap();
        let sys = build_fd_operator(&grid, step_potential(params, xi), Boundary::Dirichlet).unwrap();
        let gen = GeneralizedSystem::new(sys.clone(), vec![1.0; grid.len()]).unwrap();
        let p = eigs_smallest(&sys, 2, 1e-12).unwrap();
        let q = eigs_smallest(&gen, 2, 1e-12).unwrap();
        for (x, y) in p.iter().zip(&q) {
            prop_assert!((x.value - y.value).abs() <= 1e-12);
        }
    }

    #[test]
    fn constrained_solve_right_inverse(seed in proptest::collection::vec(-1.0..1.0f64, 6), xi in -1.5..0.5f64) {
        let params = StepParams::new(-0.5).unwrap();
        let grid = step_grid(params, xi, &Discretization::with_delta(0.05)).unwrap();
        let sys = build_fd_operator(&grid, step_potential(params, xi), Boundary::Dirichlet).unwrap();
        let g = eigs_smallest(&sys, 1, 1e-13).unwrap().remove(0);
        let raw: Vec<f64> = grid
            .sample(|t| seed.iter().enumerate().map(|(k, c)| c * t.powi(k as i32)).sum::<f64>() * (-0.1 * t * t).exp());
        let c = inner(&sys, &raw, &g.vector).unwrap();
        let rhs: Vec<f64> = raw.iter().zip(&g.vector).map(|(r, p)| r - c * p).collect();
        let norm = |f: &[f64]| inner(&sys, f, f).unwrap().sqrt();
        prop_assume!(norm(&rhs) > 1e-6);
        let x = constrained_solve(&sys, g.value, &rhs, &g.vector).unwrap();
        let back = apply_shifted(&sys, g.value, &x).unwrap();
        let cb = inner(&sys, &back, &g.vector).unwrap();
        let diff: Vec<f64> = back.iter().zip(&rhs).zip(&g.vector).map(|((b, r), p)| b - cb * p - r).collect();
        prop_assert!(norm(&diff) <= 1e-10 * norm(&rhs), "{}", norm(&diff) / norm(&rhs));
        prop_assert!(inner(&sys, &x, &g.vector).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn weighted_stiffness_symmetric_with_positive_mass(kappa in -1.0..1.0f64, h in 1e-5..1e-2f64, xi in -1.0..0.0f64) {
        let p = WeightedParams::with_defaults(-0.5, kappa, h).unwrap();
        let grid = weighted_grid(&p, &Discretization::with_delta(0.05)).unwrap();
        let sys = weighted_system_on(&p, xi, &grid).unwrap();
        prop_assert!(sys.mass().iter().all(|m| *m > 0.0));
        // one stored off-diagonal: the pencil is symmetric by construction
        prop_assert_eq!(sys.stiffness().offdiag().len() + 1, sys.stiffness().unknowns());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn step_constant_window(a in -0.95..-0.1f64) {
        let m = minimize_band_with(a, &Discretization::with_delta(0.02), THETA0).unwrap();
        prop_assert!(m.zeta < 0.0);
        prop_assert!(a.abs() * THETA0 < m.beta && m.beta < a.abs().min(THETA0));
        prop_assert!(m.gamma_min < 0.0);
        prop_assert_eq!(m.local_minima, 1);
    }
}
