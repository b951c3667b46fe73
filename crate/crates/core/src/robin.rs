//! Robin oscillator `H[gamma, xi] = -d^2/dt^2 + (t + xi)^2` on the half-line
//! with `u'(0) = gamma u(0)`, and the de Gennes function
//! `Theta(gamma) = inf_xi lambda_1(gamma, xi)`.

use crate::error::{Error, Result};
use crate::optimize::brent_root;
use crate::specdisc::{
    build_fd_operator, eigenvalue_derivative, eigs_smallest, richardson, Boundary, Discretization,
    EigenPair, Grid, Refinement, TridiagonalSystem,
};

/// Step of the bracketing scan over `xi`.
pub const SCAN_STEP: f64 = 0.1;
/// Step of the five-point curvature stencil.
pub const CURVATURE_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RobinParams {
    pub gamma: f64,
    pub xi: f64,
}

impl RobinParams {
    pub fn new(gamma: f64, xi: f64) -> Result<Self> {
        if !gamma.is_finite() || !xi.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "Robin parameters must be finite, got gamma = {gamma}, xi = {xi}"
            )));
        }
        Ok(RobinParams { gamma, xi })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeGennesPoint {
    pub gamma: f64,
    pub theta: f64,
    pub xi_min: f64,
    /// `d^2 lambda / d xi^2` at the minimum, five-point stencil.
    pub curvature: f64,
    /// Richardson combination of the stencil at steps `h` and `2h`.
    pub curvature_check: f64,
    /// Bracket handed to the root search.
    pub bracket: (f64, f64),
}

/// Half-line grid `[0, L]` with `L = |xi| + margin` rounded up to whole units.
pub fn robin_grid(xi: f64, disc: &Discretization) -> Result<Grid> {
    disc.validate()?;
    let len = disc
        .length
        .unwrap_or_else(|| (xi.abs() + disc.margin).ceil());
    let n = (len / disc.delta).round() as usize + 1;
    Grid::new(0.0, (n - 1) as f64 * disc.delta, n)
}

fn robin_system(params: RobinParams, grid: &Grid) -> Result<TridiagonalSystem> {
    let xi = params.xi;
    build_fd_operator(
        grid,
        move |t| (t + xi) * (t + xi),
        Boundary::RobinLeft {
            gamma: params.gamma,
        },
    )
}

fn robin_eig_on(
    params: RobinParams,
    j: usize,
    grid: &Grid,
    tol: f64,
) -> Result<(TridiagonalSystem, EigenPair)> {
    if j == 0 {
        return Err(Error::InvalidArgument("eigenvalue index is 1-based".into()));
    }
    let sys = robin_system(params, grid)?;
    let pair = eigs_smallest(&sys, j, tol)?
        .pop()
        .expect("j pairs requested");
    Ok((sys, pair))
}

/// `j`-th eigenpair (1-based) of the Robin problem, `u(0) > 0`.
pub fn robin_eig(params: RobinParams, j: usize, disc: &Discretization) -> Result<EigenPair> {
    let grid = robin_grid(params.xi, disc)?;
    Ok(robin_eig_on(params, j, &grid, disc.tol)?.1)
}

/// The `k` lowest Robin eigenvalues, ascending.
pub fn robin_spectrum(params: RobinParams, k: usize, disc: &Discretization) -> Result<Vec<f64>> {
    let grid = robin_grid(params.xi, disc)?;
    Ok(eigs_smallest(&robin_system(params, &grid)?, k, disc.tol)?
        .into_iter()
        .map(|p| p.value)
        .collect())
}

/// `d lambda / d xi = (lambda - xi^2 + gamma^2) u(0)^2`.
pub fn dlambda_dxi(params: RobinParams, pair: &EigenPair) -> f64 {
    let u0 = pair.vector[0];
    (pair.value - params.xi * params.xi + params.gamma * params.gamma) * u0 * u0
}

/// `d lambda / d gamma = u(0)^2`.
pub fn dlambda_dgamma(pair: &EigenPair) -> f64 {
    pair.vector[0] * pair.vector[0]
}

/// Exact `xi`-derivative of the discrete eigenvalue on a fixed grid.
fn discrete_dxi(sys: &TridiagonalSystem, params: RobinParams, pair: &EigenPair) -> Result<f64> {
    // onsite data of the derivative potential 2(t + xi), half weight at 0
    let xi = params.xi;
    let d = build_fd_operator(
        sys.grid(),
        move |t| 2.0 * (t + xi),
        Boundary::RobinLeft { gamma: 0.0 },
    )?;
    eigenvalue_derivative(sys, pair, d.onsite())
}

/// Minimizes `xi -> lambda_1(gamma, xi)`.
///
/// A scan over `[-4 - |gamma|, 2]` locates the lowest sample; the root of
/// the exact discrete derivative is then found by Brent's method between
/// its neighbours, with the grid held fixed.
pub fn de_gennes(gamma: f64, disc: &Discretization) -> Result<DeGennesPoint> {
    RobinParams::new(gamma, 0.0)?;
    let lo = -4.0 - gamma.abs();
    let steps = ((2.0 - lo) / SCAN_STEP).round() as usize;
    let xs: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * SCAN_STEP).collect();
    let grid = robin_grid(lo.abs(), disc)?;
    let trace = xs
        .iter()
        .map(|&xi| {
            Ok((
                xi,
                robin_eig_on(RobinParams { gamma, xi }, 1, &grid, disc.tol)?
                    .1
                    .value,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    let imin = trace
        .iter()
        .enumerate()
        .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .map(|(i, _)| i)
        .expect("non-empty scan");
    if imin == 0 || imin + 1 == trace.len() {
        return Err(Error::Bracket {
            reason: format!("lowest sample at the scan end xi = {}", trace[imin].0),
            trace,
        });
    }
    let bracket = (trace[imin - 1].0, trace[imin + 1].0);
    let deriv = |xi: f64| -> Result<f64> {
        let params = RobinParams { gamma, xi };
        let (sys, pair) = robin_eig_on(params, 1, &grid, disc.tol)?;
        discrete_dxi(&sys, params, &pair)
    };
    let xi_min = brent_root(deriv, bracket.0, bracket.1, 1e-11).map_err(|e| match e {
        Error::NoConvergence(reason) => Error::Bracket {
            reason,
            trace: trace.clone(),
        },
        other => other,
    })?;
    let lam = |xi: f64| -> Result<f64> {
        Ok(robin_eig_on(RobinParams { gamma, xi }, 1, &grid, disc.tol)?
            .1
            .value)
    };
    let theta = lam(xi_min)?;
    let stencil = |h: f64| -> Result<f64> {
        let (m2, m1, p1, p2) = (
            lam(xi_min - 2.0 * h)?,
            lam(xi_min - h)?,
            lam(xi_min + h)?,
            lam(xi_min + 2.0 * h)?,
        );
        Ok((-m2 + 16.0 * m1 - 30.0 * theta + 16.0 * p1 - p2) / (12.0 * h * h))
    };
    let curvature = stencil(CURVATURE_STEP)?;
    let coarse = stencil(2.0 * CURVATURE_STEP)?;
    Ok(DeGennesPoint {
        gamma,
        theta,
        xi_min,
        curvature,
        curvature_check: (16.0 * curvature - coarse) / 15.0,
        bracket,
    })
}

/// [`de_gennes`] at three halving spacings, Richardson-extrapolated.
pub fn de_gennes_refined(gamma: f64, refinement: &Refinement) -> Result<DeGennesPoint> {
    refinement.validate()?;
    let levels = refinement.levels();
    let pts: Vec<DeGennesPoint> = {
        use rayon::prelude::*;
        levels
            .par_iter()
            .map(|d| de_gennes(gamma, d))
            .collect::<Result<_>>()?
    };
    let ex = |f: fn(&DeGennesPoint) -> f64| richardson([f(&pts[0]), f(&pts[1]), f(&pts[2])]);
    Ok(DeGennesPoint {
        gamma,
        theta: ex(|p| p.theta),
        xi_min: ex(|p| p.xi_min),
        curvature: ex(|p| p.curvature),
        curvature_check: ex(|p| p.curvature_check),
        bracket: pts[2].bracket,
    })
}

/// The de Gennes constant `Theta(0)`.
pub fn theta0(disc: &Discretization) -> Result<f64> {
    Ok(de_gennes(0.0, disc)?.theta)
}

/// `Theta(0)` extrapolated over a refinement sequence.
pub fn theta0_refined(refinement: &Refinement) -> Result<f64> {
    Ok(de_gennes_refined(0.0, refinement)?.theta)
}
