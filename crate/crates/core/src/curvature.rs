//! Curvature-weighted fiber model.
//!
//! With `p = kappa h^{1/2}` and weight `w(t) = 1 - p t`, the model is the
//! operator of the quadratic form
//!
//! ```text
//! q(u) = int ( |u'|^2 + (1 + 2 p t) (sigma t + xi - p sigma t^2 / 2)^2 u^2 ) w dt
//! ```
//!
//! in `L^2(w dt)`, with Dirichlet ends. The form (not the operator with its
//! first-order term) is discretized, so the pencil is symmetric: edge
//! conductances carry `w` at cell midpoints, the onsite part carries the
//! weighted potential and the mass is `w` at the nodes.

use rayon::prelude::*;

use crate::bandmin::{minimizer_bracket, minimizer_point};
use crate::error::{Error, Result};
use crate::moments::{loglog_slope, moments_from_bundles, GroundStateBundle};
use crate::optimize::brent_root;
use crate::specdisc::{
    eigenvalue_derivative, eigs_smallest, richardson, Discretization, EigenPair, GeneralizedSystem,
    Grid, Refinement, TridiagonalSystem,
};
use crate::stepband::StepParams;

/// Default exponent of the half-length `h^{-delta}`.
pub const DEFAULT_DELTA_EXP: f64 = 1.0 / 24.0;
/// Upper limit on the half-length of the computational interval.
pub const MAX_HALF_LENGTH: f64 = 40.0;
/// Values of `h` used by default when fitting the `h^{1/2}` law.
pub const DEFAULT_H_VALUES: [f64; 4] = [5e-4, 2.5e-4, 1.25e-4, 6.25e-5];
/// Half-width of the search window around `zeta_a`.
const SEARCH_HALF_WIDTH: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedParams {
    pub a: f64,
    pub kappa: f64,
    pub h: f64,
    pub delta_exp: f64,
    /// Curvature cap `M` with `|kappa| <= M`.
    pub cap: f64,
}

impl WeightedParams {
    /// Validates `a in (-1, 0)`, `h > 0`, `delta in (0, 1/12)`,
    /// `|kappa| <= M` and `M h^{1/2 - delta} < 1/3`.
    pub fn new(a: f64, kappa: f64, h: f64, delta_exp: f64, cap: f64) -> Result<Self> {
        if !(-1.0 < a && a < 0.0) {
            return Err(Error::Inadmissible(format!(
                "a must lie in (-1, 0), got {a}"
            )));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Inadmissible(format!("h must be positive, got {h}")));
        }
        if !(delta_exp > 0.0 && delta_exp < 1.0 / 12.0) {
            return Err(Error::Inadmissible(format!(
                "delta must lie in (0, 1/12), got {delta_exp}"
            )));
        }
        if !kappa.is_finite() || !(kappa.abs() <= cap) {
            return Err(Error::Inadmissible(format!(
                "|kappa| = {} exceeds the cap M = {cap}",
                kappa.abs()
            )));
        }
        let lhs = cap * h.powf(0.5 - delta_exp);
        if !(lhs < 1.0 / 3.0) {
            return Err(Error::Inadmissible(format!(
                "M h^(1/2 - delta) = {lhs} is not below 1/3"
            )));
        }
        let params = WeightedParams {
            a,
            kappa,
            h,
            delta_exp,
            cap,
        };
        let t = h.powf(-delta_exp);
        if params.weight(t) <= 0.0 || params.weight(-t) <= 0.0 {
            return Err(Error::Inadmissible(
                "weight 1 - kappa h^(1/2) t is not positive on the interval".into(),
            ));
        }
        Ok(params)
    }

    /// Parameters with the default exponent and the smallest admissible cap.
    pub fn with_defaults(a: f64, kappa: f64, h: f64) -> Result<Self> {
        Self::new(a, kappa, h, DEFAULT_DELTA_EXP, kappa.abs())
    }

    /// Same as [`with_defaults`](Self::with_defaults); used when the model is
    /// evaluated on an externally chosen grid.
    pub fn for_grid(a: f64, kappa: f64, h: f64) -> Result<Self> {
        Self::with_defaults(a, kappa, h)
    }

    /// `p = kappa h^{1/2}`.
    pub fn p(&self) -> f64 {
        self.kappa * self.h.sqrt()
    }

    pub fn weight(&self, t: f64) -> f64 {
        1.0 - self.p() * t
    }

    /// Nominal half-length `h^{-delta}` of the model interval.
    pub fn nominal_half_length(&self) -> f64 {
        self.h.powf(-self.delta_exp)
    }

    /// Half-length of the computational interval: the largest `T <= 40`
    /// with `|p| T <= 1/3`, rounded down to a multiple of 0.01. It is never
    /// shorter than the nominal `h^{-delta}` and keeps both the weight and
    /// the factor `1 + 2 p t` bounded below by 1/3.
    pub fn half_length(&self) -> f64 {
        let p = self.p().abs();
        let t = if p > 0.0 {
            (1.0 / (3.0 * p)).min(MAX_HALF_LENGTH)
        } else {
            MAX_HALF_LENGTH
        };
        (t * 100.0).floor() / 100.0
    }

    fn step(&self) -> StepParams {
        StepParams::new(self.a).expect("a validated")
    }

    /// Potential of the form (before multiplication by the weight).
    pub fn form_potential(&self, xi: f64) -> impl Fn(f64) -> f64 {
        let p = self.p();
        let step = self.step();
        move |t| {
            let s = step.sigma(t);
            let inner = s * t + xi - p * s * t * t / 2.0;
            (1.0 + 2.0 * p * t) * inner * inner
        }
    }

    fn form_potential_dxi(&self, xi: f64) -> impl Fn(f64) -> f64 {
        let p = self.p();
        let step = self.step();
        move |t| {
            let s = step.sigma(t);
            2.0 * (1.0 + 2.0 * p * t) * (s * t + xi - p * s * t * t / 2.0)
        }
    }
}

/// Discretized weighted model on a given grid (Dirichlet at both ends).
pub fn weighted_system_on(
    params: &WeightedParams,
    xi: f64,
    grid: &Grid,
) -> Result<GeneralizedSystem> {
    let n = grid.len();
    if n < 4 {
        return Err(Error::InvalidGrid(
            "weighted model needs at least 4 nodes".into(),
        ));
    }
    let d = grid.delta();
    let mass = grid.sample(|t| params.weight(t));
    if let Some(i) = mass.iter().position(|m| !(*m > 0.0)) {
        return Err(Error::Inadmissible(format!(
            "weight 1 - kappa h^(1/2) t = {} at t = {}",
            mass[i],
            grid.node(i)
        )));
    }
    let v = params.form_potential(xi);
    let edges: Vec<f64> = (0..n - 1)
        .map(|e| params.weight(grid.node(e) + 0.5 * d) / (d * d))
        .collect();
    let onsite: Vec<f64> = (1..n - 1).map(|i| v(grid.node(i)) * mass[i]).collect();
    let m = onsite.len();
    let stiffness = TridiagonalSystem::from_form(grid.clone(), 1, edges, onsite, vec![1.0; m])?;
    GeneralizedSystem::new(stiffness, mass)
}

/// Symmetric grid on the computational interval of `params`.
pub fn weighted_grid(params: &WeightedParams, disc: &Discretization) -> Result<Grid> {
    disc.validate()?;
    let t = disc.length.unwrap_or_else(|| params.half_length());
    Grid::aligned(t, t, disc.delta)
}

/// Discretized weighted model on its computational interval.
pub fn weighted_system(
    params: &WeightedParams,
    xi: f64,
    disc: &Discretization,
) -> Result<GeneralizedSystem> {
    weighted_system_on(params, xi, &weighted_grid(params, disc)?)
}

fn ground_on(
    params: &WeightedParams,
    xi: f64,
    grid: &Grid,
    tol: f64,
) -> Result<(GeneralizedSystem, EigenPair)> {
    let sys = weighted_system_on(params, xi, grid)?;
    let pair = eigs_smallest(&sys, 1, tol)?
        .pop()
        .expect("one pair requested");
    Ok((sys, pair))
}

/// `lambda_1` of the weighted model at `xi` on a fixed grid.
pub fn weighted_ground_energy(
    params: &WeightedParams,
    xi: f64,
    grid: &Grid,
    tol: f64,
) -> Result<f64> {
    Ok(ground_on(params, xi, grid, tol)?.1.value)
}

fn weighted_dxi(params: &WeightedParams, xi: f64, grid: &Grid, tol: f64) -> Result<f64> {
    let (sys, pair) = ground_on(params, xi, grid, tol)?;
    let dv = params.form_potential_dxi(xi);
    let d_onsite: Vec<f64> = (1..grid.len() - 1)
        .map(|i| {
            let t = grid.node(i);
            dv(t) * params.weight(t)
        })
        .collect();
    eigenvalue_derivative(&sys, &pair, &d_onsite)
}

/// Minimum of `xi -> lambda_1` for the weighted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedMinimum {
    pub beta_wk: f64,
    pub xi_star: f64,
    /// Minimizer of the unweighted band used to seed the search.
    pub zeta: f64,
    pub half_length: f64,
}

/// Minimizes `lambda_1` over `xi` near `seed`, with the grid held fixed.
pub fn beta_weighted_near(
    params: &WeightedParams,
    seed: f64,
    disc: &Discretization,
) -> Result<WeightedMinimum> {
    let grid = weighted_grid(params, disc)?;
    let deriv = |xi: f64| weighted_dxi(params, xi, &grid, disc.tol);
    let (mut lo, mut hi) = (seed - SEARCH_HALF_WIDTH, seed + SEARCH_HALF_WIDTH);
    let mut expansions = 0;
    while deriv(lo)? >= 0.0 || deriv(hi)? <= 0.0 {
        expansions += 1;
        if expansions > 5 {
            return Err(Error::NoConvergence(format!(
                "no sign change of the xi-derivative around {seed} within [{lo}, {hi}]"
            )));
        }
        lo -= SEARCH_HALF_WIDTH;
        hi += SEARCH_HALF_WIDTH;
    }
    let xi_star = brent_root(deriv, lo, hi, 1e-11)?;
    Ok(WeightedMinimum {
        beta_wk: weighted_ground_energy(params, xi_star, &grid, disc.tol)?,
        xi_star,
        zeta: seed,
        half_length: grid.hi(),
    })
}

/// `beta_{a,kappa,h} = inf_xi lambda_1`, seeded at `zeta_a`.
pub fn beta_weighted(params: &WeightedParams, disc: &Discretization) -> Result<WeightedMinimum> {
    let bracket = minimizer_bracket(params.a, disc)?;
    let zeta = minimizer_point(params.a, bracket, disc)?.xi;
    beta_weighted_near(params, zeta, disc)
}

/// [`beta_weighted`] at three halving spacings, Richardson-extrapolated.
pub fn beta_weighted_refined(
    params: &WeightedParams,
    refinement: &Refinement,
    zeta: f64,
) -> Result<WeightedMinimum> {
    refinement.validate()?;
    let levels = refinement.levels();
    let runs: Vec<WeightedMinimum> = levels
        .par_iter()
        .map(|d| beta_weighted_near(params, zeta, d))
        .collect::<Result<_>>()?;
    Ok(WeightedMinimum {
        beta_wk: richardson([runs[0].beta_wk, runs[1].beta_wk, runs[2].beta_wk]),
        xi_star: richardson([runs[0].xi_star, runs[1].xi_star, runs[2].xi_star]),
        zeta,
        half_length: runs[2].half_length,
    })
}

/// One `h` of an expansion fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionPoint {
    pub h: f64,
    pub beta_wk: f64,
    pub xi_star: f64,
    pub half_length: f64,
    /// `beta_wk - beta - kappa M_3 h^{1/2}`.
    pub remainder: f64,
    /// `beta_wk - beta - s h^{1/2}` with the fitted slope `s`.
    pub fitted_remainder: f64,
}

/// Fit of `beta_{a,kappa,h} = beta_a + s h^{1/2} + r(h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionFit {
    pub a: f64,
    pub kappa: f64,
    pub beta: f64,
    pub zeta: f64,
    pub m3: f64,
    /// Least-squares constant of `(beta_wk - beta) / h^{1/2} = s + c h^{1/2} + d h`,
    /// the `d h` term being dropped when fewer than four `h` are given.
    pub slope: f64,
    /// Coefficient `c` of the same fit.
    pub next_coefficient: f64,
    /// `kappa M_3`.
    pub predicted: f64,
    /// `|s - kappa M_3| / |M_3|`.
    pub relative_error: f64,
    /// Log-log slope of `|r(h)|` with `r` measured against `kappa M_3`.
    pub remainder_exponent: f64,
    /// Log-log slope of `|r(h)|` with `r` measured against the fitted `s`.
    pub fitted_remainder_exponent: f64,
    pub points: Vec<ExpansionPoint>,
    pub deltas: [f64; 3],
}

/// Fits the `h^{1/2}` law of the weighted ground energy.
///
/// `beta_a`, `zeta_a` and `M_3(a)` come from the same refinement, and every
/// `h` is solved on three grids and extrapolated. The `O(h)` term is sizeable
/// (about `-2.5 h` at `a = -1/2`), so it is fitted rather than neglected;
/// large `h` are best avoided since the box `1/(3|p|)` then cuts into the
/// left tail of the ground state.
pub fn expansion_fit(
    a: f64,
    kappa: f64,
    h_values: &[f64],
    refinement: &Refinement,
) -> Result<ExpansionFit> {
    if h_values.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "expansion fit needs at least 3 values of h, got {}",
            h_values.len()
        )));
    }
    if h_values.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument(
            "h values must be strictly decreasing".into(),
        ));
    }
    let params: Vec<WeightedParams> = h_values
        .iter()
        .map(|&h| WeightedParams::with_defaults(a, kappa, h))
        .collect::<Result<_>>()?;
    refinement.validate()?;
    let levels = refinement.levels();
    let bracket = minimizer_bracket(a, &levels[0])?;
    let bundles: Vec<GroundStateBundle> = levels
        .par_iter()
        .map(|d| GroundStateBundle::from_point(a, &minimizer_point(a, bracket, d)?))
        .collect::<Result<_>>()?;
    let beta = richardson([bundles[0].beta, bundles[1].beta, bundles[2].beta]);
    let zeta = richardson([bundles[0].zeta, bundles[1].zeta, bundles[2].zeta]);
    let m3 = moments_from_bundles(a, &bundles, refinement.deltas)?.quadrature[2];

    let mins: Vec<WeightedMinimum> = params
        .par_iter()
        .map(|p| beta_weighted_refined(p, refinement, zeta))
        .collect::<Result<_>>()?;

    // least squares for y = s + c x (+ d x^2 from four points on), x = h^{1/2}
    let xs: Vec<f64> = h_values.iter().map(|h| h.sqrt()).collect();
    let ys: Vec<f64> = mins
        .iter()
        .zip(&xs)
        .map(|(m, x)| (m.beta_wk - beta) / x)
        .collect();
    let degree = if xs.len() >= 4 { 2 } else { 1 };
    let coef = polyfit(&xs, &ys, degree)?;
    let (s, c) = (coef[0], coef[1]);

    let predicted = kappa * m3;
    let points: Vec<ExpansionPoint> = mins
        .iter()
        .zip(h_values)
        .map(|(m, &h)| ExpansionPoint {
            h,
            beta_wk: m.beta_wk,
            xi_star: m.xi_star,
            half_length: m.half_length,
            remainder: m.beta_wk - beta - predicted * h.sqrt(),
            fitted_remainder: m.beta_wk - beta - s * h.sqrt(),
        })
        .collect();
    let remainder_exponent = loglog_slope(
        &points
            .iter()
            .map(|p| (p.h, p.remainder))
            .collect::<Vec<_>>(),
    );
    let fitted_remainder_exponent = loglog_slope(
        &points
            .iter()
            .map(|p| (p.h, p.fitted_remainder))
            .collect::<Vec<_>>(),
    );
    Ok(ExpansionFit {
        a,
        kappa,
        beta,
        zeta,
        m3,
        slope: s,
        next_coefficient: c,
        predicted,
        relative_error: if m3 != 0.0 {
            (s - predicted).abs() / m3.abs()
        } else {
            f64::INFINITY
        },
        remainder_exponent,
        fitted_remainder_exponent,
        points,
        deltas: refinement.deltas,
    })
}

/// Least-squares polynomial coefficients, lowest order first. The abscissae
/// are rescaled to `[-1, 1]`-ish magnitude before forming normal equations.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<Vec<f64>> {
    if xs.len() != ys.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let m = degree + 1;
    if xs.len() < m {
        return Err(Error::InvalidArgument(format!(
            "degree {degree} fit needs at least {m} points, got {}",
            xs.len()
        )));
    }
    let scale = xs.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidArgument(
            "fit abscissae must be finite and not all zero".into(),
        ));
    }
    let mut a = vec![vec![0.0; m + 1]; m];
    for (&x, &y) in xs.iter().zip(ys) {
        let t = x / scale;
        let pows: Vec<f64> = (0..m).map(|k| t.powi(k as i32)).collect();
        for i in 0..m {
            for j in 0..m {
                a[i][j] += pows[i] * pows[j];
            }
            a[i][m] += pows[i] * y;
        }
    }
    // Gaussian elimination with partial pivoting
    for col in 0..m {
        let piv = (col..m)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        a.swap(col, piv);
        if a[col][col].abs() < 1e-14 {
            return Err(Error::InvalidArgument(
                "fit abscissae are degenerate".into(),
            ));
        }
        for row in col + 1..m {
            let f = a[row][col] / a[col][col];
            for k in col..=m {
                a[row][k] -= f * a[col][k];
            }
        }
    }
    let mut coef = vec![0.0; m];
    for i in (0..m).rev() {
        let tail: f64 = (i + 1..m).map(|k| a[i][k] * coef[k]).sum();
        coef[i] = (a[i][m] - tail) / a[i][i];
    }
    Ok(coef
        .iter()
        .enumerate()
        .map(|(k, c)| c / scale.powi(k as i32))
        .collect())
}

/// Two-term edge energy `beta_a h + M_3(a) k_max h^{3/2}`.
pub fn edge_energy(a: f64, k_max: f64, h: f64, beta: f64, m3: f64) -> Result<f64> {
    StepParams::new(a)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "h must be positive, got {h}"
        )));
    }
    if !k_max.is_finite() || !beta.is_finite() || !m3.is_finite() {
        return Err(Error::InvalidArgument(
            "edge energy inputs must be finite".into(),
        ));
    }
    Ok(beta * h + m3 * k_max * h.powf(1.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specdisc::{inner, Spectral};
    use crate::stepband::{step_grid, step_system};

    #[test]
    fn admissibility() {
        assert!(WeightedParams::with_defaults(-0.5, 1.0, 1e-3).is_ok());
        assert!(WeightedParams::with_defaults(-0.5, 1.0, 0.1).is_err());
        assert!(WeightedParams::new(-0.5, 2.0, 1e-3, DEFAULT_DELTA_EXP, 1.0).is_err());
        assert!(WeightedParams::new(-0.5, 1.0, 1e-3, 0.1, 1.0).is_err());
        assert!(WeightedParams::with_defaults(-1.0, 1.0, 1e-3).is_err());
        assert!(WeightedParams::with_defaults(-0.5, 1.0, 0.0).is_err());
        let p = WeightedParams::with_defaults(-0.5, 1.0, 1e-3).unwrap();
        assert!(p.half_length() >= p.nominal_half_length());
    }

    #[test]
    fn zero_curvature_reduces_to_step_operator() {
        let params = WeightedParams::with_defaults(-0.5, 0.0, 1e-3).unwrap();
        let disc = Discretization::with_delta(0.02);
        let grid = step_grid(StepParams::new(-0.5).unwrap(), -0.6, &disc).unwrap();
        let w = weighted_system_on(&params, -0.6, &grid).unwrap();
        let s = step_system(StepParams::new(-0.5).unwrap(), -0.6, &grid).unwrap();
        assert_eq!(w.stiffness().diag(), s.diag());
        assert_eq!(w.stiffness().offdiag(), s.offdiag());
        assert!(w.mass().iter().all(|m| *m == 1.0));
    }

    #[test]
    fn stiffness_is_symmetric_by_construction() {
        let params = WeightedParams::with_defaults(-0.5, 1.0, 1e-3).unwrap();
        let sys = weighted_system(&params, -0.6, &Discretization::with_delta(0.05)).unwrap();
        let off = sys.stiffness().offdiag();
        // the stored off-diagonal is both the upper and the lower band
        assert_eq!(off.len(), sys.stiffness().unknowns() - 1);
        assert!(sys.effective_mass().iter().all(|m| *m > 0.0));
    }

    #[test]
    fn grid_beyond_weight_zero_is_rejected() {
        let params = WeightedParams::with_defaults(-0.5, 1.0, 1e-3).unwrap();
        let grid = Grid::aligned(5.0, 40.0, 0.1).unwrap();
        assert!(matches!(
            weighted_system_on(&params, 0.0, &grid),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn form_matches_continuous_quadratic_form() {
        // smooth, compactly supported test functions
        let params = WeightedParams::with_defaults(-0.5, 1.0, 4e-3).unwrap();
        let xi = -0.6;
        let tests: [fn(f64) -> f64; 3] = [
            |t| {
                if t.abs() < 2.0 {
                    (1.0 - t * t / 4.0).powi(4)
                } else {
                    0.0
                }
            },
            |t| {
                if t.abs() < 3.0 {
                    (t + 0.5) * (1.0 - t * t / 9.0).powi(4)
                } else {
                    0.0
                }
            },
            |t| (-t * t).exp() * (2.0 * t).cos(),
        ];
        let dtests: [fn(f64) -> f64; 3] = [
            |t| {
                if t.abs() < 2.0 {
                    -2.0 * t * (1.0 - t * t / 4.0).powi(3)
                } else {
                    0.0
                }
            },
            |t| {
                if t.abs() < 3.0 {
                    let b = 1.0 - t * t / 9.0;
                    b.powi(4) - (t + 0.5) * 8.0 * t / 9.0 * b.powi(3)
                } else {
                    0.0
                }
            },
            |t| (-t * t).exp() * (-2.0 * t * (2.0 * t).cos() - 2.0 * (2.0 * t).sin()),
        ];
        let v = params.form_potential(xi);
        let mut errs = Vec::new();
        for delta in [0.02, 0.01] {
            let grid = Grid::aligned(5.0, 5.0, delta).unwrap();
            let sys = weighted_system_on(&params, xi, &grid).unwrap();
            let mut level = Vec::new();
            for (f, df) in tests.iter().zip(&dtests) {
                let u = grid.sample(f);
                let ku = crate::specdisc::apply_shifted(&sys, 0.0, &u).unwrap();
                let discrete = inner(&sys, &u, &ku).unwrap();
                // reference by a fine composite Simpson rule
                let m = 200_000;
                let hh = 10.0 / m as f64;
                let g = |t: f64| (df(t).powi(2) + v(t) * f(t).powi(2)) * params.weight(t);
                let mut acc = g(-5.0) + g(5.0);
                for k in 1..m {
                    acc += g(-5.0 + k as f64 * hh) * if k % 2 == 1 { 4.0 } else { 2.0 };
                }
                level.push((discrete - acc * hh / 3.0).abs());
            }
            errs.push(level);
        }
        for k in 0..3 {
            assert!(errs[1][k] < 1e-3, "test {k}: {}", errs[1][k]);
            assert!(
                errs[0][k] / errs[1][k] > 3.0,
                "test {k}: {:?}",
                (errs[0][k], errs[1][k])
            );
        }
    }

    #[test]
    fn edge_energy_terms() {
        assert_eq!(
            edge_energy(-0.5, 0.0, 1e-4, 0.39, -0.1).unwrap(),
            0.39 * 1e-4
        );
        let e1 = edge_energy(-0.5, 1.0, 1e-4, 0.39, -0.1).unwrap();
        let e2 = edge_energy(-0.5, 2.0, 1e-4, 0.39, -0.1).unwrap();
        assert!(e2 < e1);
        assert!(edge_energy(-0.5, 1.0, 0.0, 0.39, -0.1).is_err());
    }
}
