//! Moments of the ground state at the band minimum, the regularized
//! resolvent, and the formal approximate eigenpair of the curvature-weighted
//! model.

use rayon::prelude::*;

use crate::bandmin::{minimizer_bracket, minimizer_point};
use crate::curvature::{weighted_system_on, WeightedParams};
use crate::error::{Error, Result};
use crate::specdisc::{
    apply_shifted, constrained_solve, gradient, inner, richardson, Discretization, Grid,
    Refinement, TridiagonalSystem, ORTHOGONALITY_TOL,
};
use crate::stepband::{step_system, BandPoint, StepParams};

/// Ground state of `h_a[zeta_a]` together with its discrete operator.
#[derive(Debug, Clone)]
pub struct GroundStateBundle {
    pub a: f64,
    pub zeta: f64,
    pub beta: f64,
    pub phi: Vec<f64>,
    pub phi0: f64,
    pub dphi0: f64,
    pub grid: Grid,
    pub system: TridiagonalSystem,
}

impl GroundStateBundle {
    /// Bundle from a band point computed at the minimizer.
    pub fn from_point(a: f64, point: &BandPoint) -> Result<Self> {
        let params = StepParams::new(a)?;
        let system = step_system(params, point.xi, &point.grid)?;
        Ok(GroundStateBundle {
            a,
            zeta: point.xi,
            beta: point.mu,
            phi: point.phi.clone(),
            phi0: point.phi0,
            dphi0: point.dphi0_right,
            grid: point.grid.clone(),
            system,
        })
    }

    pub fn params(&self) -> StepParams {
        StepParams::new(self.a).expect("validated at construction")
    }

    /// `sigma(tau) tau + zeta` at every node.
    fn shifted_coordinate(&self) -> Vec<f64> {
        let p = self.params();
        self.grid.sample(|t| p.sigma(t) * t + self.zeta)
    }

    /// Split-trapezoid weights for integrands carrying the factor `1/sigma`:
    /// the node at the jump receives the mean of the one-sided limits.
    fn inverse_sigma_weight(&self) -> Vec<f64> {
        let p = self.params();
        let z = self
            .grid
            .zero_index()
            .expect("step grids contain the origin");
        let mut w = self.grid.sample(|t| 1.0 / p.sigma(t));
        w[z] = 0.5 * (1.0 + 1.0 / self.a);
        w
    }
}

/// Ground-state bundle at a single resolution.
pub fn ground_state_bundle(a: f64, disc: &Discretization) -> Result<GroundStateBundle> {
    let bracket = minimizer_bracket(a, disc)?;
    GroundStateBundle::from_point(a, &minimizer_point(a, bracket, disc)?)
}

/// Bundles at the three spacings of a refinement, sharing one bracket.
pub fn ground_state_bundles(a: f64, refinement: &Refinement) -> Result<Vec<GroundStateBundle>> {
    refinement.validate()?;
    let levels = refinement.levels();
    let bracket = minimizer_bracket(a, &levels[0])?;
    levels
        .par_iter()
        .map(|d| GroundStateBundle::from_point(a, &minimizer_point(a, bracket, d)?))
        .collect()
}

/// Trapezoid rule for integrands that vanish at both (Dirichlet) ends.
fn trapezoid(grid: &Grid, f: impl Iterator<Item = f64>) -> f64 {
    grid.delta() * f.sum::<f64>()
}

/// `M_n = int (1/sigma) (zeta + sigma tau)^n phi^2` by quadrature.
pub fn moment(bundle: &GroundStateBundle, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "moment order must be at least 1".into(),
        ));
    }
    let s = bundle.shifted_coordinate();
    let w = bundle.inverse_sigma_weight();
    Ok(trapezoid(
        &bundle.grid,
        (0..bundle.grid.len()).map(|i| w[i] * s[i].powi(n as i32) * bundle.phi[i] * bundle.phi[i]),
    ))
}

fn weighted_mass(bundle: &GroundStateBundle) -> f64 {
    let w = bundle.inverse_sigma_weight();
    trapezoid(
        &bundle.grid,
        (0..bundle.grid.len()).map(|i| w[i] * bundle.phi[i] * bundle.phi[i]),
    )
}

/// Closed forms of the first three moments in terms of the traces at 0.
///
/// They follow from integrating `s^k / sigma^2` against `(phi^2)'''` by
/// parts and using the ground-state equation, with `s = zeta + sigma t`:
///
/// * `M_1 = 0`,
/// * `M_2 = beta M_0 / 2 + (1/a - 1) phi(0) phi'(0) / 4` with `M_0 = int phi^2 / sigma`,
/// * `M_3 = (1/a - 1) zeta phi(0) phi'(0) / 3`.
pub fn moment_closed(bundle: &GroundStateBundle, n: u32) -> Result<f64> {
    let jump = (1.0 / bundle.a - 1.0) * bundle.phi0 * bundle.dphi0;
    match n {
        1 => Ok(0.0),
        2 => Ok(0.5 * bundle.beta * weighted_mass(bundle) + 0.25 * jump),
        3 => Ok(bundle.zeta * jump / 3.0),
        _ => Err(Error::InvalidArgument(format!(
            "closed forms exist for n in {{1, 2, 3}}, got {n}"
        ))),
    }
}

/// The variant `-beta M_0 / 2 + (1/a - 1) zeta phi(0) phi'(0) / 4` of the
/// second-moment identity. It does not match the quadrature and is kept
/// only so that the discrepancy can be reported.
pub fn moment2_variant(bundle: &GroundStateBundle) -> f64 {
    let jump = (1.0 / bundle.a - 1.0) * bundle.phi0 * bundle.dphi0;
    -0.5 * bundle.beta * weighted_mass(bundle) + 0.25 * bundle.zeta * jump
}

/// Moments by quadrature and closed form, Richardson-extrapolated.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub a: f64,
    pub quadrature: [f64; 3],
    pub closed: [f64; 3],
    /// Per-level quadrature values `[level][n - 1]`.
    pub levels: Vec<[f64; 3]>,
    /// Per-level closed forms `[level][n - 1]`.
    pub levels_closed: Vec<[f64; 3]>,
    /// Extrapolated [`moment2_variant`].
    pub m2_variant: f64,
    pub deltas: [f64; 3],
}

pub fn moments_refined(a: f64, refinement: &Refinement) -> Result<MomentReport> {
    let bundles = ground_state_bundles(a, refinement)?;
    moments_from_bundles(a, &bundles, refinement.deltas)
}

pub fn moments_from_bundles(
    a: f64,
    bundles: &[GroundStateBundle],
    deltas: [f64; 3],
) -> Result<MomentReport> {
    if bundles.len() != 3 {
        return Err(Error::LengthMismatch {
            expected: 3,
            got: bundles.len(),
        });
    }
    let mut levels = Vec::with_capacity(3);
    let mut levels_closed = Vec::with_capacity(3);
    for b in bundles {
        levels.push([moment(b, 1)?, moment(b, 2)?, moment(b, 3)?]);
        levels_closed.push([
            moment_closed(b, 1)?,
            moment_closed(b, 2)?,
            moment_closed(b, 3)?,
        ]);
    }
    let ex = |v: &[[f64; 3]], k: usize| richardson([v[0][k], v[1][k], v[2][k]]);
    Ok(MomentReport {
        a,
        quadrature: [ex(&levels, 0), ex(&levels, 1), ex(&levels, 2)],
        closed: [
            ex(&levels_closed, 0),
            ex(&levels_closed, 1),
            ex(&levels_closed, 2),
        ],
        levels,
        levels_closed,
        m2_variant: richardson([
            moment2_variant(&bundles[0]),
            moment2_variant(&bundles[1]),
            moment2_variant(&bundles[2]),
        ]),
        deltas,
    })
}

/// Inverse of `h_a[zeta_a] - beta_a` on the complement of the ground state,
/// zero along it. The component of `v` along `phi` is discarded first.
pub fn regularized_resolvent(bundle: &GroundStateBundle, v: &[f64]) -> Result<Vec<f64>> {
    let c = inner(&bundle.system, v, &bundle.phi)?;
    let perp: Vec<f64> = v.iter().zip(&bundle.phi).map(|(x, p)| x - c * p).collect();
    let norm = inner(&bundle.system, v, v)?.sqrt();
    if inner(&bundle.system, &perp, &perp)?.sqrt() <= 1e-10 * norm {
        return Ok(vec![0.0; v.len()]);
    }
    constrained_solve(&bundle.system, bundle.beta, &perp, &bundle.phi)
}

/// `(h_a[zeta_a] - beta_a) f` on the bundle grid.
pub fn apply_fiber_shifted(bundle: &GroundStateBundle, f: &[f64]) -> Result<Vec<f64>> {
    apply_shifted(&bundle.system, bundle.beta, f)
}

/// Formal eigenpair
/// `lambda = c0 + c2 (xi - zeta)^2 + c3 h^{1/2}`,
/// `f = u0 + (xi - zeta) u1 + (xi - zeta)^2 u2 + h^{1/2} u3`.
#[derive(Debug, Clone)]
pub struct ApproxEigenpair {
    pub zeta: f64,
    pub kappa: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub u0: Vec<f64>,
    pub u1: Vec<f64>,
    pub u2: Vec<f64>,
    pub u3: Vec<f64>,
    /// `<v_k, u0>` for `k = 1, 2, 3` before each resolvent call.
    pub orthogonality: [f64; 3],
}

impl ApproxEigenpair {
    pub fn lambda_app(&self, xi: f64, h: f64) -> f64 {
        let d = xi - self.zeta;
        self.c0 + self.c1 * d + self.c2 * d * d + self.c3 * h.sqrt()
    }

    pub fn f_app(&self, xi: f64, h: f64) -> Vec<f64> {
        let d = xi - self.zeta;
        let s = h.sqrt();
        (0..self.u0.len())
            .map(|i| self.u0[i] + d * self.u1[i] + d * d * self.u2[i] + s * self.u3[i])
            .collect()
    }
}

/// Grid spacing on which the formal eigenpair is built. The third source
/// term is orthogonal to the ground state only up to `O(delta^2)`, and this
/// spacing keeps that defect below the default orthogonality tolerance.
pub const APPROX_DELTA: f64 = 2.5e-4;

fn check_orthogonal(bundle: &GroundStateBundle, v: &[f64], tol: f64) -> Result<f64> {
    let along = inner(&bundle.system, v, &bundle.phi)?;
    let norm = inner(&bundle.system, v, v)?.sqrt();
    if along.abs() > tol * norm.max(f64::MIN_POSITIVE) {
        return Err(Error::NotOrthogonal { inner: along });
    }
    Ok(along)
}

/// Builds the formal eigenpair with the default orthogonality tolerance.
pub fn build_approx_eigenpair(
    bundle: &GroundStateBundle,
    kappa: f64,
    m3: f64,
) -> Result<ApproxEigenpair> {
    build_approx_eigenpair_with(bundle, kappa, m3, ORTHOGONALITY_TOL)
}

/// Builds the formal eigenpair; each source term must be orthogonal to the
/// ground state to `orth_tol` relative to its norm.
pub fn build_approx_eigenpair_with(
    bundle: &GroundStateBundle,
    kappa: f64,
    m3: f64,
    orth_tol: f64,
) -> Result<ApproxEigenpair> {
    if !kappa.is_finite() || !m3.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kappa and m3 must be finite, got {kappa}, {m3}"
        )));
    }
    let phi = &bundle.phi;
    let s = bundle.shifted_coordinate();
    let n = phi.len();

    let v1: Vec<f64> = (0..n).map(|i| s[i] * phi[i]).collect();
    let o1 = check_orthogonal(bundle, &v1, orth_tol)?;
    let r1 = regularized_resolvent(bundle, &v1)?;
    let u1: Vec<f64> = r1.iter().map(|x| -2.0 * x).collect();

    let c2 = 1.0 - 4.0 * inner(&bundle.system, &v1, &r1)?;
    let v2: Vec<f64> = (0..n)
        .map(|i| 4.0 * s[i] * r1[i] + (c2 - 1.0) * phi[i])
        .collect();
    let o2 = check_orthogonal(bundle, &v2, orth_tol)?;
    let u2 = regularized_resolvent(bundle, &v2)?;

    let c3 = kappa * m3;
    let (u3, o3) = if kappa == 0.0 {
        (vec![0.0; n], 0.0)
    } else {
        // (1/sigma)[(s)^3 - zeta^2 s] = tau s (s + zeta), written without 1/sigma
        let dphi = gradient(&bundle.grid, phi)?;
        let params = bundle.params();
        let v3: Vec<f64> = bundle
            .grid
            .nodes()
            .enumerate()
            .map(|(i, t)| {
                let st = params.sigma(t) * t;
                -kappa * (dphi[i] + t * s[i] * (st + 2.0 * bundle.zeta) * phi[i]) + c3 * phi[i]
            })
            .collect();
        let o3 = check_orthogonal(bundle, &v3, orth_tol)?;
        (regularized_resolvent(bundle, &v3)?, o3)
    };

    Ok(ApproxEigenpair {
        zeta: bundle.zeta,
        kappa,
        c0: bundle.beta,
        c1: 0.0,
        c2,
        c3,
        u0: phi.clone(),
        u1,
        u2,
        u3,
        orthogonality: [o1, o2, o3],
    })
}

/// One evaluation of the approximate-eigenpair residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualRow {
    pub h: f64,
    pub offset: f64,
    pub residual: f64,
}

/// Residual norms of the formal eigenpair and their fitted exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualScaling {
    /// Rows at `xi = zeta` for every `h`.
    pub at_minimum: Vec<ResidualRow>,
    /// Rows at the smallest `h` for every offset.
    pub at_small_h: Vec<ResidualRow>,
    /// Rows over the full `(h, offset)` product.
    pub mixed: Vec<ResidualRow>,
    /// Log-log slope in `h` at `xi = zeta` (expected 1).
    pub slope_h: f64,
    /// Log-log slope in the offset at the smallest `h` (expected 3).
    pub slope_offset: f64,
    /// Largest ratio of a residual in the `h^{1/2} |xi - zeta|` dominated
    /// regime to the bound `C max(h^{1/2} x, x^3, h)`, with `C` fixed by the
    /// most dominated sample; `None` when no sample falls in that regime.
    pub mixed_ratio: Option<f64>,
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x.ln(), y.abs().ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn residual_norm(
    pair: &ApproxEigenpair,
    bundle: &GroundStateBundle,
    kappa: f64,
    h: f64,
    offset: f64,
) -> Result<f64> {
    let xi = bundle.zeta + offset;
    let params = WeightedParams::for_grid(bundle.a, kappa, h)?;
    let sys = weighted_system_on(&params, xi, &bundle.grid)?;
    let f = pair.f_app(xi, h);
    let r = apply_shifted(&sys, pair.lambda_app(xi, h), &f)?;
    Ok((bundle.grid.delta() * r.iter().map(|x| x * x).sum::<f64>()).sqrt())
}

/// Applies the discrete weighted operator to the formal eigenpair over the
/// grid of `h` values and `xi` offsets and fits the residual exponents.
pub fn residual_scaling(
    pair: &ApproxEigenpair,
    bundle: &GroundStateBundle,
    kappa: f64,
    h_values: &[f64],
    xi_offsets: &[f64],
) -> Result<ResidualScaling> {
    if h_values.len() < 2 || xi_offsets.len() < 2 {
        return Err(Error::InvalidArgument(
            "need at least two h values and two offsets".into(),
        ));
    }
    if let Some(h) = h_values.iter().find(|h| !(**h > 0.0 && **h <= 0.1)) {
        return Err(Error::InvalidArgument(format!(
            "h must lie in (0, 0.1], got {h}"
        )));
    }
    if let Some(x) = xi_offsets
        .iter()
        .find(|x| !(x.abs() > 0.0 && x.abs() < 1.0))
    {
        return Err(Error::InvalidArgument(format!(
            "offsets must satisfy 0 < |xi - zeta| < 1, got {x}"
        )));
    }
    let row = |h: f64, offset: f64| -> Result<ResidualRow> {
        Ok(ResidualRow {
            h,
            offset,
            residual: residual_norm(pair, bundle, kappa, h, offset)?,
        })
    };
    let at_minimum: Vec<ResidualRow> = h_values
        .par_iter()
        .map(|&h| row(h, 0.0))
        .collect::<Result<_>>()?;
    let h_small = h_values.iter().cloned().fold(f64::INFINITY, f64::min);
    let at_small_h: Vec<ResidualRow> = xi_offsets
        .par_iter()
        .map(|&x| row(h_small, x))
        .collect::<Result<_>>()?;
    let combos: Vec<(f64, f64)> = h_values
        .iter()
        .flat_map(|&h| xi_offsets.iter().map(move |&x| (h, x)))
        .collect();
    let mixed: Vec<ResidualRow> = combos
        .par_iter()
        .map(|&(h, x)| row(h, x))
        .collect::<Result<_>>()?;

    let slope_h = loglog_slope(
        &at_minimum
            .iter()
            .map(|r| (r.h, r.residual))
            .collect::<Vec<_>>(),
    );
    let slope_offset = loglog_slope(
        &at_small_h
            .iter()
            .map(|r| (r.offset.abs(), r.residual))
            .collect::<Vec<_>>(),
    );

    let bound = |r: &ResidualRow| {
        let x = r.offset.abs();
        (r.h.sqrt() * x).max(x.powi(3)).max(r.h)
    };
    let dominated: Vec<&ResidualRow> = mixed
        .iter()
        .filter(|r| {
            let x = r.offset.abs();
            r.h.sqrt() * x >= x.powi(3).max(r.h)
        })
        .collect();
    // anchor on the sample deepest inside the regime
    let dominance = |r: &ResidualRow| {
        let x = r.offset.abs();
        r.h.sqrt() * x / x.powi(3).max(r.h)
    };
    let anchor = dominated
        .iter()
        .copied()
        .max_by(|p, q| dominance(p).total_cmp(&dominance(q)));
    let mixed_ratio = anchor.map(|anchor| {
        let c = anchor.residual / bound(anchor);
        dominated
            .iter()
            .map(|r| r.residual / (c * bound(r)))
            .fold(0.0_f64, f64::max)
    });

    Ok(ResidualScaling {
        at_minimum,
        at_small_h,
        mixed,
        slope_h,
        slope_offset,
        mixed_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specdisc::Discretization;

    fn bundle(a: f64) -> GroundStateBundle {
        ground_state_bundle(a, &Discretization::with_delta(0.01)).unwrap()
    }

    #[test]
    fn resolvent_of_ground_state_is_zero() {
        let b = bundle(-0.5);
        let r = regularized_resolvent(&b, &b.phi).unwrap();
        assert!(r.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn first_moment_nearly_vanishes_on_coarse_grid() {
        let b = bundle(-0.5);
        assert!(moment(&b, 1).unwrap().abs() < 1e-4);
        assert_eq!(moment_closed(&b, 1).unwrap(), 0.0);
        assert!(moment(&b, 0).is_err());
        assert!(moment_closed(&b, 4).is_err());
    }

    #[test]
    fn third_moment_negative() {
        let b = bundle(-0.5);
        assert!(moment(&b, 3).unwrap() < 0.0);
        assert!(moment_closed(&b, 3).unwrap() < 0.0);
    }

    #[test]
    fn zero_curvature_has_no_third_corrector() {
        let b = bundle(-0.5);
        let m3 = moment(&b, 3).unwrap();
        let p = build_approx_eigenpair(&b, 0.0, m3).unwrap();
        assert_eq!(p.c1, 0.0);
        assert_eq!(p.c3, 0.0);
        assert!(p.u3.iter().all(|x| *x == 0.0));
        assert_eq!(p.c0, b.beta);
    }

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [0.1, 0.2, 0.4]
            .iter()
            .map(|&x| (x, 3.0 * x * x * x))
            .collect();
        assert!((loglog_slope(&pts) - 3.0).abs() < 1e-12);
    }
}
