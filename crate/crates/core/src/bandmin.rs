//! Minimization of the band function `mu_a` and numerical checks of the
//! properties of its minimum: location, non-degeneracy, bounds on the step
//! constant and the sign of the ground-state derivative at the jump.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::optimize::brent_root;
use crate::robin;
use crate::specdisc::{richardson, Discretization, Grid, Refinement};
use crate::stepband::{
    band_point, band_point_on, discrete_mu_prime, step_grid, BandPoint, StepParams,
};

/// Scan window and step used to bracket the minimizer.
pub const SCAN_LO: f64 = -6.0;
pub const SCAN_HI: f64 = 1.0;
pub const SCAN_STEP: f64 = 0.05;
/// The scan runs on a grid no finer than this spacing.
pub const SCAN_DELTA: f64 = 0.01;
/// Differences of consecutive scan values below this are treated as flat.
pub const SCAN_NOISE: f64 = 1e-12;
/// Step of the five-point stencil for `mu''`.
pub const MU2_STEP: f64 = 1e-3;
/// Interval tolerance of the root search for the minimizer.
pub const ZETA_TOL: f64 = 1e-11;
/// Relative agreement required between the stencil and the closed form of `mu''`.
pub const MU2_REL_TOL: f64 = 1e-2;

/// Outcome of each inequality and sign check at the band minimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MinimumChecks {
    pub zeta_negative: bool,
    pub unique_bracket: bool,
    pub mu2_positive: bool,
    pub mu2_matches_closed: bool,
    /// `|a| Theta_0 < beta`.
    pub lower_bound: bool,
    /// `beta < |a|`.
    pub below_abs_a: bool,
    /// `beta < Theta_0`.
    pub below_theta0: bool,
    pub gamma_negative: bool,
}

impl MinimumChecks {
    pub fn all(&self) -> bool {
        self.zeta_negative
            && self.unique_bracket
            && self.mu2_positive
            && self.mu2_matches_closed
            && self.lower_bound
            && self.below_abs_a
            && self.below_theta0
            && self.gamma_negative
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandMinimum {
    pub a: f64,
    pub zeta: f64,
    pub beta: f64,
    /// `mu''(zeta)` by the five-point stencil.
    pub mu2: f64,
    /// Richardson combination of stencils at two steps.
    pub mu2_check: f64,
    /// `2 (1/a - 1) zeta phi(0)^2`.
    pub mu2_closed: f64,
    pub gamma_min: f64,
    /// Second eigenvalue of the fiber at `zeta`.
    pub second: f64,
    pub theta0: f64,
    pub checks: MinimumChecks,
    /// Number of local minima seen on the scan.
    pub local_minima: usize,
    pub bracket: (f64, f64),
    pub scan: Vec<(f64, f64)>,
    /// Ground state at the minimizer (finest grid for refined results, with
    /// the scalar traces replaced by their extrapolated values).
    pub point: BandPoint,
}

/// Band values on the bracketing scan `[-6, 1]`, step 0.05.
pub fn scan_band(params: StepParams, disc: &Discretization) -> Result<Vec<(f64, f64)>> {
    let coarse = Discretization {
        delta: disc.delta.max(SCAN_DELTA),
        ..*disc
    };
    let steps = ((SCAN_HI - SCAN_LO) / SCAN_STEP).round() as usize;
    (0..=steps)
        .into_par_iter()
        .map(|i| {
            let xi = SCAN_LO + i as f64 * SCAN_STEP;
            band_point(params, xi, &coarse)
                .map(|p| (xi, p.mu))
                .map_err(|e| Error::at_xi(xi, e))
        })
        .collect()
}

/// Indices of local minima of a sampled curve, ignoring flat steps.
///
/// A minimum is a descent followed by an ascent; a descent that runs into
/// the right end of the samples is also reported.
pub fn local_minima(values: &[(f64, f64)], noise: f64) -> Vec<usize> {
    let mut out = Vec::new();
    let mut last_down: Option<usize> = None;
    let mut last_dir = 0i8;
    for i in 0..values.len().saturating_sub(1) {
        let d = values[i + 1].1 - values[i].1;
        if d.abs() <= noise * values[i].1.abs().max(1.0) {
            continue;
        }
        if d < 0.0 {
            last_down = Some(i + 1);
            last_dir = -1;
        } else {
            if last_dir == -1 {
                out.push(last_down.expect("descent recorded"));
            }
            last_dir = 1;
        }
    }
    if last_dir == -1 {
        out.push(last_down.expect("descent recorded"));
    }
    out
}

fn stencil_mu2(
    params: StepParams,
    zeta: f64,
    beta: f64,
    grid: &Grid,
    tol: f64,
    h: f64,
) -> Result<f64> {
    let mu = |xi: f64| -> Result<f64> { Ok(band_point_on(params, xi, grid, tol, false)?.mu) };
    let (m2, m1, p1, p2) = (
        mu(zeta - 2.0 * h)?,
        mu(zeta - h)?,
        mu(zeta + h)?,
        mu(zeta + 2.0 * h)?,
    );
    Ok((-m2 + 16.0 * m1 - 30.0 * beta + 16.0 * p1 - p2) / (12.0 * h * h))
}

/// Finds `zeta` in `bracket` on a fixed grid and evaluates the minimum.
fn polish(
    params: StepParams,
    bracket: (f64, f64),
    disc: &Discretization,
) -> Result<(BandPoint, f64, f64)> {
    let point = minimizer_point(params.a(), bracket, disc)?;
    let (zeta, grid) = (point.xi, &point.grid);
    let mu2 = stencil_mu2(params, zeta, point.mu, grid, disc.tol, MU2_STEP)?;
    let coarse = stencil_mu2(params, zeta, point.mu, grid, disc.tol, 2.0 * MU2_STEP)?;
    Ok((point, mu2, (16.0 * mu2 - coarse) / 15.0))
}

fn validate_a(a: f64) -> Result<StepParams> {
    let params = StepParams::new(a)?;
    if a > 0.0 {
        return Err(Error::NotAttained { a });
    }
    Ok(params)
}

struct Located {
    scan: Vec<(f64, f64)>,
    minima: Vec<usize>,
    bracket: (f64, f64),
}

fn locate(params: StepParams, disc: &Discretization) -> Result<Located> {
    let scan = scan_band(params, disc)?;
    let minima = local_minima(&scan, SCAN_NOISE);
    match minima.len() {
        0 => {
            return Err(Error::Bracket {
                reason: "band is monotone on the scan".into(),
                trace: scan,
            })
        }
        1 => {}
        count => {
            return Err(Error::MultipleMinima {
                count,
                positions: minima.iter().map(|&i| scan[i].0).collect(),
            })
        }
    }
    let i = minima[0];
    if i == 0 || i + 1 >= scan.len() {
        return Err(Error::Bracket {
            reason: format!("lowest sample at the scan end xi = {}", scan[i].0),
            trace: scan,
        });
    }
    let bracket = (scan[i - 1].0, scan[i + 1].0);
    Ok(Located {
        scan,
        minima,
        bracket,
    })
}

fn assemble(
    a: f64,
    theta0: f64,
    located: Located,
    point: BandPoint,
    mu2: f64,
    mu2_check: f64,
) -> BandMinimum {
    let zeta = point.xi;
    let beta = point.mu;
    let mu2_closed = 2.0 * (1.0 / a - 1.0) * zeta * point.phi0 * point.phi0;
    let checks = MinimumChecks {
        zeta_negative: zeta < 0.0,
        unique_bracket: located.minima.len() == 1,
        mu2_positive: mu2 > 0.0 && mu2_closed > 0.0,
        mu2_matches_closed: (mu2 - mu2_closed).abs() <= MU2_REL_TOL * mu2_closed.abs(),
        lower_bound: a.abs() * theta0 < beta,
        below_abs_a: beta < a.abs(),
        below_theta0: beta < theta0,
        gamma_negative: point.gamma < 0.0,
    };
    BandMinimum {
        a,
        zeta,
        beta,
        mu2,
        mu2_check,
        mu2_closed,
        gamma_min: point.gamma,
        second: point.second.unwrap_or(f64::NAN),
        theta0,
        checks,
        local_minima: located.minima.len(),
        bracket: located.bracket,
        scan: located.scan,
        point,
    }
}

/// Bracket `(lo, hi)` around the unique minimizer found by the scan.
pub fn minimizer_bracket(a: f64, disc: &Discretization) -> Result<(f64, f64)> {
    let params = validate_a(a)?;
    Ok(locate(params, disc)?.bracket)
}

/// Ground state at the minimizer inside `bracket`, on the grid of `disc`.
pub fn minimizer_point(a: f64, bracket: (f64, f64), disc: &Discretization) -> Result<BandPoint> {
    let params = validate_a(a)?;
    let grid = step_grid(params, bracket.0, disc)?;
    let deriv = |xi: f64| -> Result<f64> {
        let p = band_point_on(params, xi, &grid, disc.tol, false)?;
        discrete_mu_prime(params, &p)
    };
    let zeta = brent_root(deriv, bracket.0, bracket.1, ZETA_TOL)?;
    band_point_on(params, zeta, &grid, disc.tol, true)
}

/// Minimum of `mu_a` for `a` in `[-1, 0)`, checked against a given `Theta_0`.
pub fn minimize_band_with(a: f64, disc: &Discretization, theta0: f64) -> Result<BandMinimum> {
    let params = validate_a(a)?;
    let located = locate(params, disc)?;
    let (point, mu2, mu2_check) = polish(params, located.bracket, disc)?;
    Ok(assemble(a, theta0, located, point, mu2, mu2_check))
}

/// Minimum of `mu_a` for `a` in `[-1, 0)`. For `a` in `(0, 1)` the infimum
/// `a` is not attained and the call is refused.
pub fn minimize_band(a: f64, disc: &Discretization) -> Result<BandMinimum> {
    validate_a(a)?;
    let theta0 = robin::theta0(disc)?;
    minimize_band_with(a, disc, theta0)
}

/// Minimum of `mu_a` at three halving spacings, Richardson-extrapolated.
///
/// The bracket comes from a single scan; every level then solves for the
/// minimizer on its own grid.
pub fn minimize_band_refined_with(
    a: f64,
    refinement: &Refinement,
    theta0: f64,
) -> Result<BandMinimum> {
    let params = validate_a(a)?;
    refinement.validate()?;
    let levels = refinement.levels();
    let located = locate(params, &levels[0])?;
    let runs: Vec<(BandPoint, f64, f64)> = levels
        .par_iter()
        .map(|d| polish(params, located.bracket, d))
        .collect::<Result<_>>()?;
    let pts: Vec<&BandPoint> = runs.iter().map(|r| &r.0).collect();
    let ex = |f: &dyn Fn(&BandPoint) -> f64| richardson([f(pts[0]), f(pts[1]), f(pts[2])]);
    let mut point = runs[2].0.clone();
    point.xi = ex(&|p| p.xi);
    point.mu = ex(&|p| p.mu);
    point.phi0 = ex(&|p| p.phi0);
    point.dphi0_left = ex(&|p| p.dphi0_left);
    point.dphi0_right = ex(&|p| p.dphi0_right);
    point.gamma = ex(&|p| p.gamma);
    point.second = Some(ex(&|p| p.second.unwrap_or(f64::NAN)));
    let mu2 = richardson([runs[0].1, runs[1].1, runs[2].1]);
    let mu2_check = richardson([runs[0].2, runs[1].2, runs[2].2]);
    Ok(assemble(a, theta0, located, point, mu2, mu2_check))
}

pub fn minimize_band_refined(a: f64, refinement: &Refinement) -> Result<BandMinimum> {
    validate_a(a)?;
    let theta0 = robin::theta0_refined(refinement)?;
    minimize_band_refined_with(a, refinement, theta0)
}

/// Residual of `(beta - zeta^2) phi(0)^2 + phi'(0)^2 = 0` at the minimum.
pub fn critical_identity_check(m: &BandMinimum, point: &BandPoint) -> f64 {
    let phi0 = point.phi0;
    let dphi0 = point.dphi0_right;
    (m.beta - m.zeta * m.zeta) * phi0 * phi0 + dphi0 * dphi0
}

/// One row of the step-constant bounds table.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsRow {
    pub a: f64,
    /// `|a| Theta_0`.
    pub lower: f64,
    pub beta: f64,
    pub abs_a: f64,
    pub theta0: f64,
    pub lower_holds: bool,
    pub below_abs_a: bool,
    pub below_theta0: bool,
}

impl BoundsRow {
    fn new(a: f64, beta: f64, theta0: f64) -> Self {
        let lower = a.abs() * theta0;
        BoundsRow {
            a,
            lower,
            beta,
            abs_a: a.abs(),
            theta0,
            lower_holds: lower < beta,
            below_abs_a: beta < a.abs(),
            below_theta0: beta < theta0,
        }
    }

    /// All strict inequalities hold.
    pub fn holds(&self) -> bool {
        self.lower_holds && self.below_abs_a && self.below_theta0
    }
}

fn check_table_input(a_values: &[f64]) -> Result<()> {
    if let Some(a) = a_values.iter().find(|a| !(-1.0..0.0).contains(*a)) {
        return Err(Error::InvalidArgument(format!(
            "bounds table needs a in [-1, 0), got {a}"
        )));
    }
    Ok(())
}

/// Step constants and their bounds for each `a`, computed concurrently.
pub fn bounds_table(a_values: &[f64], disc: &Discretization) -> Result<Vec<BoundsRow>> {
    check_table_input(a_values)?;
    let theta0 = robin::theta0(disc)?;
    a_values
        .par_iter()
        .map(|&a| minimize_band_with(a, disc, theta0).map(|m| BoundsRow::new(a, m.beta, theta0)))
        .collect()
}

/// [`bounds_table`] from refined step constants.
pub fn bounds_table_refined(a_values: &[f64], refinement: &Refinement) -> Result<Vec<BoundsRow>> {
    check_table_input(a_values)?;
    let theta0 = robin::theta0_refined(refinement)?;
    a_values
        .par_iter()
        .map(|&a| {
            minimize_band_refined_with(a, refinement, theta0)
                .map(|m| BoundsRow::new(a, m.beta, theta0))
        })
        .collect()
}
