use magstep::bandmin::minimize_band_refined_with;
use magstep::curvature::expansion_fit;
use magstep::glfields::{classify, critical_fields};
use magstep::moments::moments_refined;
use magstep::robin::{de_gennes_refined, theta0_refined};
use magstep::specdisc::{Discretization, Refinement};
use magstep::stepband::{band_curve, StepParams};
use magstep::verify::{CriterionResult, Suite, CRITERIA};

use crate::args::*;
use crate::output::{num, num_list, Cell, Table};
use crate::CliError;

fn grid_params(t: &mut Table, d: &Discretization) {
    t.param("delta", num(d.delta));
    t.param("tol", num(d.tol));
    t.param("margin", num(d.margin));
    t.param("length", d.length.map(num).unwrap_or_else(|| "auto".into()));
}

fn refined(grid: &GridArgs, t: &mut Table) -> Result<Refinement, CliError> {
    let r = grid.refinement();
    r.validate()?;
    grid_params(t, &r.base);
    t.param("levels", num_list(&r.deltas));
    Ok(r)
}

fn nonempty(key: &str, xs: &[f64]) -> Result<(), CliError> {
    if xs.is_empty() {
        return Err(CliError::Config(format!(
            "`{key}` needs at least one value"
        )));
    }
    Ok(())
}

pub fn band_curve_cmd(args: &BandCurveArgs) -> Result<Table, CliError> {
    let mut t = Table::new("band-curve", &["xi", "mu", "phi0", "dphi0", "gamma"]);
    let params = StepParams::new(args.a)?;
    let disc = args.grid.discretization(0.005);
    t.param("a", num(args.a));
    t.param("xi", args.xi.to_string());
    grid_params(&mut t, &disc);
    if args.a > 0.0 {
        t.warnings.push(format!(
            "infimum not attained: for a > 0 the band decreases towards {} as xi -> +inf",
            args.a
        ));
    }
    let xi = args.xi.values();
    t.info("rows", xi.len());
    for p in band_curve(params, &xi, &disc) {
        let p = p?;
        t.push(vec![
            p.xi.into(),
            p.mu.into(),
            p.phi0.into(),
            p.dphi0_right.into(),
            p.gamma.into(),
        ]);
    }
    Ok(t)
}

pub fn minimize_cmd(args: &MinimizeArgs) -> Result<Table, CliError> {
    let mut t = Table::new(
        "minimize",
        &[
            "a",
            "zeta",
            "beta",
            "gamma_min",
            "mu2",
            "mu2_closed",
            "second",
            "lower",
            "upper",
            "bounds_hold",
            "local_minima",
            "bracket_lo",
            "bracket_hi",
        ],
    );
    nonempty("a", &args.a)?;
    t.param("a", num_list(&args.a));
    let r = refined(&args.grid, &mut t)?;
    for &a in &args.a {
        StepParams::new(a)?;
    }
    let theta0 = theta0_refined(&r)?;
    t.info("theta0", theta0);
    for &a in &args.a {
        let m = minimize_band_refined_with(a, &r, theta0)?;
        let c = &m.checks;
        t.push(vec![
            a.into(),
            m.zeta.into(),
            m.beta.into(),
            m.gamma_min.into(),
            m.mu2.into(),
            m.mu2_closed.into(),
            m.second.into(),
            (a.abs() * theta0).into(),
            a.abs().min(theta0).into(),
            (c.lower_bound && c.below_abs_a && c.below_theta0).into(),
            m.local_minima.into(),
            m.bracket.0.into(),
            m.bracket.1.into(),
        ]);
    }
    Ok(t)
}

pub fn degennes_cmd(args: &DegennesArgs) -> Result<Table, CliError> {
    let mut t = Table::new(
        "degennes",
        &[
            "gamma",
            "theta",
            "xi_min",
            "identity_error",
            "curvature",
            "curvature_check",
            "bracket_lo",
            "bracket_hi",
        ],
    );
    nonempty("gamma", &args.gamma)?;
    t.param("gamma", num_list(&args.gamma));
    let r = refined(&args.grid, &mut t)?;
    for &g in &args.gamma {
        let d = de_gennes_refined(g, &r)?;
        t.push(vec![
            g.into(),
            d.theta.into(),
            d.xi_min.into(),
            (d.xi_min + (d.theta + g * g).sqrt()).into(),
            d.curvature.into(),
            d.curvature_check.into(),
            d.bracket.0.into(),
            d.bracket.1.into(),
        ]);
    }
    Ok(t)
}

pub fn moments_cmd(args: &MomentsArgs) -> Result<Table, CliError> {
    let mut t = Table::new(
        "moments",
        &["a", "m1", "m2", "m3", "m1_closed", "m2_closed", "m3_closed"],
    );
    nonempty("a", &args.a)?;
    t.param("a", num_list(&args.a));
    let r = refined(&args.grid, &mut t)?;
    for &a in &args.a {
        let m = moments_refined(a, &r)?;
        let (q, c) = (m.quadrature, m.closed);
        t.push(vec![
            a.into(),
            q[0].into(),
            q[1].into(),
            q[2].into(),
            c[0].into(),
            c[1].into(),
            c[2].into(),
        ]);
    }
    Ok(t)
}

pub fn weighted_cmd(args: &WeightedArgs) -> Result<Table, CliError> {
    let mut t = Table::new(
        "weighted-sweep",
        &[
            "h",
            "beta_wk",
            "xi_star",
            "half_length",
            "remainder",
            "fitted_remainder",
        ],
    );
    t.param("a", num(args.a));
    t.param("kappa", num(args.kappa));
    t.param("h", num_list(&args.h));
    let r = refined(&args.grid, &mut t)?;
    let fit = expansion_fit(args.a, args.kappa, &args.h, &r)?;
    t.info("beta", fit.beta);
    t.info("zeta", fit.zeta);
    t.info("m3", fit.m3);
    t.info("predicted_slope", fit.predicted);
    t.info("slope", fit.slope);
    t.info("next_coefficient", fit.next_coefficient);
    t.info("relative_error", fit.relative_error);
    t.info("remainder_exponent", fit.remainder_exponent);
    t.info("fitted_remainder_exponent", fit.fitted_remainder_exponent);
    for p in &fit.points {
        t.push(vec![
            p.h.into(),
            p.beta_wk.into(),
            p.xi_star.into(),
            p.half_length.into(),
            p.remainder.into(),
            p.fitted_remainder.into(),
        ]);
    }
    Ok(t)
}

pub fn fields_cmd(args: &FieldsArgs) -> Result<Table, CliError> {
    let mut cols = vec!["a", "theta0", "beta", "bc1", "bc2", "bc3"];
    if !args.b.is_empty() {
        cols.extend(["b", "edge", "boundary1", "boundary2"]);
    }
    let mut t = Table::new("critical-fields", &cols);
    nonempty("a", &args.a)?;
    t.param("a", num_list(&args.a));
    if !args.b.is_empty() {
        t.param("b", num_list(&args.b));
    }
    let r = refined(&args.grid, &mut t)?;
    for &a in &args.a {
        if !(-1.0..0.0).contains(&a) {
            return Err(magstep::Error::InvalidArgument(format!(
                "critical fields need a in [-1, 0), got {a}"
            ))
            .into());
        }
    }
    let theta0 = theta0_refined(&r)?;
    for &a in &args.a {
        let beta = minimize_band_refined_with(a, &r, theta0)?.beta;
        let f = critical_fields(a, theta0, beta)?;
        let base: Vec<Cell> = vec![
            a.into(),
            theta0.into(),
            beta.into(),
            f.bc1.into(),
            f.bc2.into(),
            f.bc3.into(),
        ];
        if args.b.is_empty() {
            t.push(base);
            continue;
        }
        for &b in &args.b {
            let reg = classify(&f, b)?;
            let mut row = base.clone();
            row.extend([
                b.into(),
                reg.edge.into(),
                reg.boundary1.into(),
                reg.boundary2.into(),
            ]);
            t.push(row);
        }
    }
    Ok(t)
}

pub fn verify_cmd(args: &VerifyArgs) -> Result<(Vec<CriterionResult>, String), CliError> {
    let r = args.grid.refinement();
    r.validate()?;
    let ids: Vec<u32> = if args.criteria.is_empty() {
        CRITERIA.iter().map(|c| c.0).collect()
    } else {
        args.criteria.clone()
    };
    if let Some(bad) = ids.iter().find(|id| !CRITERIA.iter().any(|c| c.0 == **id)) {
        return Err(CliError::Config(format!("`criteria`: no criterion {bad}")));
    }
    let suite = Suite::new(r);
    let mut text = format!(
        "# magstep {} verify, levels {}\n",
        magstep::VERSION,
        num_list(&r.deltas)
    );
    let mut results = Vec::new();
    for id in ids {
        let res = suite.run(id).expect("id checked above");
        text += &res.line();
        text.push('\n');
        results.push(res);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    text += &format!("{passed}/{} criteria passed\n", results.len());
    Ok((results, text))
}
