use magstep::specdisc::*;
use magstep::Error;

fn oscillator(lo: f64, hi: f64, delta: f64, shift: f64) -> TridiagonalSystem {
    let n = ((hi - lo) / delta).round() as usize + 1;
    let grid = Grid::new(lo, hi, n).unwrap();
    build_fd_operator(
        &grid,
        move |t| (t - shift) * (t - shift),
        Boundary::Dirichlet,
    )
    .unwrap()
}

#[test]
fn whole_line_oscillator_levels() {
    let sys = oscillator(-10.0, 10.0, 0.01, 0.0);
    let pairs = eigs_smallest(&sys, 3, 1e-12).unwrap();
    for (p, exact) in pairs.iter().zip([1.0, 3.0, 5.0]) {
        // second-order truncation error of the three-point Laplacian
        assert!(
            (p.value - exact).abs() < 1e-4 * exact,
            "{} vs {exact}",
            p.value
        );
    }
    assert!(pairs[0].value < pairs[1].value && pairs[1].value < pairs[2].value);
}

#[test]
fn shifted_oscillator_is_translation_invariant() {
    let p = &eigs_smallest(&oscillator(-10.0, 10.0, 0.01, 3.0), 1, 1e-12).unwrap()[0];
    assert!((p.value - 1.0).abs() < 1e-4);
}

#[test]
fn neumann_half_line_keeps_even_levels() {
    let grid = Grid::new(0.0, 10.0, 1001).unwrap();
    let sys = build_fd_operator(&grid, |t| t * t, Boundary::RobinLeft { gamma: 0.0 }).unwrap();
    let pairs = eigs_smallest(&sys, 2, 1e-12).unwrap();
    assert!((pairs[0].value - 1.0).abs() < 1e-4);
    assert!((pairs[1].value - 5.0).abs() < 1e-3);
    assert!(pairs[0].vector[0] > 0.0);
}

#[test]
fn halving_reduces_error_fourfold() {
    let err =
        |d: f64| eigs_smallest(&oscillator(-10.0, 10.0, d, 0.0), 1, 1e-13).unwrap()[0].value - 1.0;
    let (e1, e2) = (err(0.02), err(0.01));
    let ratio = e1 / e2;
    assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    assert!((1.8..=2.2).contains(&observed_order(e1, e2)));
}

#[test]
fn pairs_are_normalized_with_small_residual() {
    let sys = oscillator(-10.0, 10.0, 0.02, 0.5);
    for p in eigs_smallest(&sys, 3, 1e-12).unwrap() {
        let norm = inner(&sys, &p.vector, &p.vector).unwrap();
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(
            p.residual <= 1e-8 * (1.0 + p.value.abs()),
            "residual {}",
            p.residual
        );
    }
}

#[test]
fn unit_mass_matches_plain_system() {
    let sys = oscillator(-8.0, 8.0, 0.02, 0.0);
    let n = sys.grid().len();
    let gen = GeneralizedSystem::new(sys.clone(), vec![1.0; n]).unwrap();
    let plain = eigs_smallest(&sys, 3, 1e-12).unwrap();
    let weighted = eigs_smallest(&gen, 3, 1e-12).unwrap();
    for (p, q) in plain.iter().zip(&weighted) {
        assert!((p.value - q.value).abs() <= 1e-12);
    }
}

#[test]
fn nonpositive_mass_rejected() {
    let sys = oscillator(-8.0, 8.0, 0.1, 0.0);
    let n = sys.grid().len();
    let mut mass = vec![1.0; n];
    mass[n / 2] = 0.0;
    assert!(GeneralizedSystem::new(sys, mass).is_err());
}

#[test]
fn non_finite_potential_names_the_node() {
    let grid = Grid::new(-1.0, 1.0, 21).unwrap();
    let err = build_fd_operator(
        &grid,
        |t| if t > 0.45 && t < 0.55 { f64::NAN } else { 0.0 },
        Boundary::Dirichlet,
    )
    .unwrap_err();
    match err {
        Error::NonFinitePotential { index, tau } => {
            assert_eq!(index, 15);
            assert!((tau - 0.5).abs() < 1e-12);
        }
        other => panic!("unexpected {other}"),
    }
}

#[test]
fn robin_needs_origin_at_left_end() {
    let grid = Grid::new(-1.0, 1.0, 21).unwrap();
    assert!(matches!(
        build_fd_operator(&grid, |_| 0.0, Boundary::RobinLeft { gamma: 1.0 }),
        Err(Error::UnsupportedBoundary(_))
    ));
}

#[test]
fn origin_is_a_node() {
    let g = Grid::aligned(3.0, 5.0, 0.01).unwrap();
    let z = g.zero_index().unwrap();
    assert_eq!(g.node(z), 0.0);
    assert_eq!(z, 300);
    assert!(Grid::new(1.0, 0.0, 10).is_err());
    assert!(Grid::new(0.0, 1.0, 2).is_err());
}

fn ground(sys: &TridiagonalSystem) -> EigenPair {
    eigs_smallest(sys, 1, 1e-13).unwrap().remove(0)
}

#[test]
fn constrained_solve_of_ground_state_is_zero() {
    let sys = oscillator(-8.0, 8.0, 0.02, 0.0);
    let g = ground(&sys);
    let x = constrained_solve(&sys, g.value, &g.vector, &g.vector).unwrap();
    assert!(x.iter().all(|v| *v == 0.0));
}

#[test]
fn constrained_solve_inverts_on_complement() {
    let sys = oscillator(-8.0, 8.0, 0.02, 0.0);
    let g = ground(&sys);
    // odd function, orthogonal to the even ground state
    let rhs: Vec<f64> = sys
        .grid()
        .nodes()
        .map(|t| t * (-t * t / 2.0).exp())
        .collect();
    let c = inner(&sys, &rhs, &g.vector).unwrap();
    let rhs: Vec<f64> = rhs.iter().zip(&g.vector).map(|(r, p)| r - c * p).collect();
    let x = constrained_solve(&sys, g.value, &rhs, &g.vector).unwrap();
    let back = apply_shifted(&sys, g.value, &x).unwrap();
    let diff: Vec<f64> = back.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let rel = inner(&sys, &diff, &diff).unwrap().sqrt() / inner(&sys, &rhs, &rhs).unwrap().sqrt();
    assert!(rel <= 1e-10, "relative residual {rel}");
    assert!(inner(&sys, &x, &g.vector).unwrap().abs() <= 1e-12);
    // t e^{-t^2/2} is the first excited state, two units above the ground state
    let z = sys.grid().zero_index().unwrap();
    let probe = z + 50;
    let t = sys.grid().node(probe);
    assert!(
        (x[probe] - 0.5 * rhs[probe]).abs() < 1e-3 * t.abs(),
        "{} vs {}",
        x[probe],
        0.5 * rhs[probe]
    );
}

#[test]
fn constrained_solve_rejects_non_orthogonal_rhs() {
    let sys = oscillator(-8.0, 8.0, 0.05, 0.0);
    let g = ground(&sys);
    let rhs: Vec<f64> = sys
        .grid()
        .nodes()
        .map(|t| g.vector[0] + (-(t - 1.0).powi(2)).exp())
        .collect();
    assert!(matches!(
        constrained_solve(&sys, g.value, &rhs, &g.vector),
        Err(Error::NotOrthogonal { .. })
    ));
}

#[test]
fn quadrature_examples() {
    let g = Grid::new(0.0, 1.0, 101).unwrap();
    assert_eq!(quadrature(&g, &vec![1.0; 101], None).unwrap(), 1.0);
    let g = Grid::new(-1.0, 1.0, 201).unwrap();
    assert!(quadrature(&g, &g.sample(|t| t), None).unwrap().abs() < 1e-14);
    let g = Grid::new(-10.0, 10.0, 4001).unwrap();
    let val = quadrature(&g, &g.sample(|t| (-t * t).exp()), None).unwrap();
    assert!((val - std::f64::consts::PI.sqrt()).abs() < 1e-8);
    let w = g.sample(|t| t * t);
    let second = quadrature(&g, &g.sample(|t| (-t * t).exp()), Some(&w)).unwrap();
    assert!((second - 0.5 * std::f64::consts::PI.sqrt()).abs() < 1e-8);
    assert!(matches!(
        quadrature(&g, &[1.0; 3], None),
        Err(Error::LengthMismatch { .. })
    ));
}

#[test]
fn one_sided_derivatives_at_origin() {
    let g = Grid::aligned(2.0, 2.0, 0.01).unwrap();
    for side in [Side::Left, Side::Right] {
        assert!(
            derivative_at_zero(&g, &g.sample(|t| t * t), side)
                .unwrap()
                .abs()
                < 1e-12
        );
        assert!(
            derivative_at_zero(&g, &g.sample(|t| (-t * t / 2.0).exp()), side)
                .unwrap()
                .abs()
                < 1e-4
        );
        assert!((derivative_at_zero(&g, &g.sample(f64::sin), side).unwrap() - 1.0).abs() < 1e-4);
    }
    let short = Grid::aligned(0.01, 1.0, 0.01).unwrap();
    assert!(matches!(
        derivative_at_zero(&short, &short.sample(|t| t), Side::Left),
        Err(Error::TooFewNodes { .. })
    ));
}

#[test]
fn richardson_removes_even_error_terms() {
    let f = |d: f64| 2.0 + 3.0 * d * d - 5.0 * d.powi(4);
    let r = richardson([f(0.1), f(0.05), f(0.025)]);
    assert!((r - 2.0).abs() < 1e-13);
}
