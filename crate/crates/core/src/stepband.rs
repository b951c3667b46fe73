//! Fiber operator `h_a[xi] = -d^2/dt^2 + (xi + sigma(t) t)^2` of the step
//! field, with `sigma = 1` on `t >= 0` and `sigma = a` on `t < 0`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::specdisc::{
    build_fd_operator, derivative_at_zero, eigenvalue_derivative, eigs_smallest, Boundary,
    Discretization, EigenPair, Grid, Side, TridiagonalSystem,
};

/// Ratio `a` of the field on the negative half-line to that on the positive one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepParams {
    a: f64,
}

impl StepParams {
    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() || !(-1.0..1.0).contains(&a) || a == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "field ratio must lie in [-1, 1) \\ {{0}}, got a = {a}"
            )));
        }
        Ok(StepParams { a })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn sigma(&self, tau: f64) -> f64 {
        if tau >= 0.0 {
            1.0
        } else {
            self.a
        }
    }
}

/// `tau -> (xi + sigma(tau) tau)^2`.
pub fn step_potential(params: StepParams, xi: f64) -> impl Fn(f64) -> f64 {
    move |tau| {
        let s = xi + params.sigma(tau) * tau;
        s * s
    }
}

/// Derivative of the step potential with respect to `xi`.
fn step_potential_dxi(params: StepParams, xi: f64) -> impl Fn(f64) -> f64 {
    move |tau| 2.0 * (xi + params.sigma(tau) * tau)
}

/// Ground state of the fiber operator at one value of `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPoint {
    pub xi: f64,
    pub mu: f64,
    pub phi0: f64,
    pub dphi0_left: f64,
    pub dphi0_right: f64,
    /// Robin trace `phi'(0) / phi(0)` taken from the right-sided derivative.
    pub gamma: f64,
    /// Second eigenvalue, when requested.
    pub second: Option<f64>,
    pub residual: f64,
    pub phi: Vec<f64>,
    pub grid: Grid,
}

/// Truncation box for `h_a[xi]`.
///
/// The right well sits at `-xi` with unit frequency, the left one at
/// `-xi/a` with frequency `|a|`, so the left extent grows like `1/|a|` in
/// position and `1/sqrt|a|` in width. Lengths are rounded up to whole units
/// so that every spacing of a halving sequence reproduces the same box.
pub fn step_grid(params: StepParams, xi: f64, disc: &Discretization) -> Result<Grid> {
    disc.validate()?;
    if !xi.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "xi must be finite, got {xi}"
        )));
    }
    let (left, right) = match disc.length {
        Some(l) => (l, l),
        None => {
            let abs_a = params.a.abs();
            let left = (xi.abs() / abs_a + disc.margin / abs_a.sqrt()).max(disc.margin);
            (left.ceil(), (xi.abs() + disc.margin).ceil())
        }
    };
    Grid::aligned(left, right, disc.delta)
}

/// Discrete fiber operator on a given grid.
pub fn step_system(params: StepParams, xi: f64, grid: &Grid) -> Result<TridiagonalSystem> {
    build_fd_operator(grid, step_potential(params, xi), Boundary::Dirichlet)
}

fn point_from_pair(
    xi: f64,
    grid: &Grid,
    pair: EigenPair,
    second: Option<f64>,
) -> Result<BandPoint> {
    let z = grid
        .zero_index()
        .ok_or_else(|| Error::InvalidGrid("step grids must contain the origin".into()))?;
    let phi0 = pair.vector[z];
    let dphi0_left = derivative_at_zero(grid, &pair.vector, Side::Left)?;
    let dphi0_right = derivative_at_zero(grid, &pair.vector, Side::Right)?;
    Ok(BandPoint {
        xi,
        mu: pair.value,
        phi0,
        dphi0_left,
        dphi0_right,
        gamma: dphi0_right / phi0,
        second,
        residual: pair.residual,
        phi: pair.vector,
        grid: grid.clone(),
    })
}

/// Band point on an explicitly chosen grid. Holding the grid fixed makes
/// `xi -> mu` a smooth function, which derivative-based searches rely on.
pub fn band_point_on(
    params: StepParams,
    xi: f64,
    grid: &Grid,
    tol: f64,
    with_second: bool,
) -> Result<BandPoint> {
    let sys = step_system(params, xi, grid)?;
    let k = if with_second { 2 } else { 1 };
    let mut pairs = eigs_smallest(&sys, k, tol)?;
    let second = if with_second {
        Some(pairs[1].value)
    } else {
        None
    };
    pairs.truncate(1);
    point_from_pair(xi, grid, pairs.pop().expect("one pair requested"), second)
}

/// Lowest eigenvalue `mu_a(xi)` with its ground-state traces at the jump.
pub fn band_point(params: StepParams, xi: f64, disc: &Discretization) -> Result<BandPoint> {
    let grid = step_grid(params, xi, disc)?;
    band_point_on(params, xi, &grid, disc.tol, false)
}

/// Same as [`band_point`], also returning the second eigenvalue.
pub fn band_point_with_gap(
    params: StepParams,
    xi: f64,
    disc: &Discretization,
) -> Result<BandPoint> {
    let grid = step_grid(params, xi, disc)?;
    band_point_on(params, xi, &grid, disc.tol, true)
}

/// Exact derivative of the discrete band value in `xi` at fixed grid.
pub fn discrete_mu_prime(params: StepParams, point: &BandPoint) -> Result<f64> {
    let sys = step_system(params, point.xi, &point.grid)?;
    let d_onsite: Vec<f64> = sys
        .unknown_nodes()
        .map(step_potential_dxi(params, point.xi))
        .collect();
    let pair = EigenPair {
        value: point.mu,
        vector: point.phi.clone(),
        residual: point.residual,
    };
    eigenvalue_derivative(&sys, &pair, &d_onsite)
}

/// Samples the band on a list of `xi`. Points are computed in parallel;
/// each entry carries either its point or the error raised at that `xi`.
pub fn band_curve(
    params: StepParams,
    xi_values: &[f64],
    disc: &Discretization,
) -> Vec<Result<BandPoint>> {
    xi_values
        .par_iter()
        .map(|&xi| band_point(params, xi, disc).map_err(|e| Error::at_xi(xi, e)))
        .collect()
}

/// `mu_a'(xi)` from the boundary traces of the ground state.
pub fn mu_prime_analytic(point: &BandPoint, params: StepParams) -> f64 {
    let a = params.a;
    let xi = point.xi;
    (1.0 - 1.0 / a)
        * (point.dphi0_right * point.dphi0_right + (point.mu - xi * xi) * point.phi0 * point.phi0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn potential_values() {
        let p = StepParams::new(-1.0).unwrap();
        let v = step_potential(p, 0.0);
        assert_eq!(v(2.0), 4.0);
        assert_eq!(v(-2.0), 4.0);
        for a in [-0.3, 0.4, -1.0] {
            assert_eq!(
                step_potential(StepParams::new(a).unwrap(), 1.7)(0.0),
                1.7 * 1.7
            );
        }
        assert_eq!(
            step_potential(StepParams::new(-0.5).unwrap(), 1.0)(-2.0),
            4.0
        );
    }

    #[test]
    fn params_reject_out_of_range() {
        for a in [0.0, 1.0, -1.5, f64::NAN] {
            assert!(StepParams::new(a).is_err());
        }
    }

    #[test]
    fn grid_rounds_to_whole_units() {
        let p = StepParams::new(-0.5).unwrap();
        let g1 = step_grid(p, -1.3, &Discretization::with_delta(0.01)).unwrap();
        let g2 = step_grid(p, -1.3, &Discretization::with_delta(0.0025)).unwrap();
        assert_eq!(g1.lo(), g2.lo());
        assert_eq!(g1.hi(), g2.hi());
        assert!(g1.lo() <= -(1.3 / 0.5 + 12.0 / 0.5f64.sqrt()));
    }

    #[test]
    fn point_traces_are_consistent() {
        let p = StepParams::new(-0.5).unwrap();
        let bp = band_point(p, -0.6, &Discretization::with_delta(0.01)).unwrap();
        assert!(bp.phi0 > 0.0);
        assert_eq!(bp.gamma, bp.dphi0_right / bp.phi0);
        assert!((bp.dphi0_left - bp.dphi0_right).abs() < 1e-3);
    }

    #[test]
    fn discrete_derivative_matches_difference_quotient() {
        let p = StepParams::new(-0.5).unwrap();
        let disc = Discretization::with_delta(0.02);
        let grid = step_grid(p, -1.0, &disc).unwrap();
        let c = band_point_on(p, -1.0, &grid, disc.tol, false).unwrap();
        let h = 1e-4;
        let up = band_point_on(p, -1.0 + h, &grid, disc.tol, false)
            .unwrap()
            .mu;
        let dn = band_point_on(p, -1.0 - h, &grid, disc.tol, false)
            .unwrap()
            .mu;
        let fd = (up - dn) / (2.0 * h);
        assert!((discrete_mu_prime(p, &c).unwrap() - fd).abs() < 1e-7);
    }

    #[test]
    fn band_curve_preserves_order() {
        let p = StepParams::new(-0.5).unwrap();
        let xs = [0.5, -1.0, 0.0];
        let curve = band_curve(p, &xs, &Discretization::with_delta(0.02));
        for (pt, x) in curve.iter().zip(xs) {
            assert_eq!(pt.as_ref().unwrap().xi, x);
        }
    }
}
