//! Critical fields of the Ginzburg–Landau energy for the step field and
//! the classification of which energy contributions survive at a given
//! field strength `b`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalFields {
    pub a: f64,
    /// `max(1/|a|, 1/Theta_0)`.
    pub bc1: f64,
    /// `1/beta_a`.
    pub bc2: f64,
    /// `1/(|a| Theta_0)`.
    pub bc3: f64,
    pub theta0: f64,
    pub beta_a: f64,
}

/// Builds the three critical fields. For `a` in `(-1, 0)` the strict
/// ordering `bc1 < bc2 < bc3` is enforced; at `a = -1` the fields collapse
/// onto `1/Theta_0` and the check is waived.
pub fn critical_fields(a: f64, theta0: f64, beta_a: f64) -> Result<CriticalFields> {
    if !(-1.0..0.0).contains(&a) {
        return Err(Error::InvalidArgument(format!(
            "critical fields need a in [-1, 0), got a = {a}"
        )));
    }
    for (name, v) in [("theta0", theta0), ("beta_a", beta_a)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "{name} must be positive and finite, got {v}"
            )));
        }
    }
    let abs_a = a.abs();
    let bc1 = (1.0 / abs_a).max(1.0 / theta0);
    let bc2 = 1.0 / beta_a;
    let bc3 = 1.0 / (abs_a * theta0);
    if a != -1.0 && !(bc1 < bc2 && bc2 < bc3) {
        return Err(Error::FieldOrdering { bc1, bc2, bc3 });
    }
    Ok(CriticalFields {
        a,
        bc1,
        bc2,
        bc3,
        theta0,
        beta_a,
    })
}

/// Which contributions vanish at a field strength `b`. A value exactly at
/// a threshold counts as vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regime {
    /// Edge term, zero iff `b >= 1/beta_a`.
    pub edge: bool,
    /// Contribution of the boundary part on the unit-field side, zero iff `b >= 1/Theta_0`.
    pub boundary1: bool,
    /// Contribution of the boundary part on the `a`-field side, zero iff `b |a| >= 1/Theta_0`.
    pub boundary2: bool,
}

impl Regime {
    pub fn all_vanish(&self) -> bool {
        self.edge && self.boundary1 && self.boundary2
    }
}

pub fn classify(fields: &CriticalFields, b: f64) -> Result<Regime> {
    if !(b.is_finite() && b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "field strength must be positive, got b = {b}"
        )));
    }
    // `b |a| >= 1/Theta_0` is tested as `b >= bc3` so that `b = bc3` is not
    // lost to rounding in the product
    Ok(Regime {
        edge: b >= fields.bc2,
        boundary1: b >= 1.0 / fields.theta0,
        boundary2: b >= fields.bc3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const THETA0: f64 = 0.590106124950;
    const BETA_HALF: f64 = 0.391237469113;

    #[test]
    fn third_field_at_half() {
        let f = critical_fields(-0.5, THETA0, BETA_HALF).unwrap();
        assert!((f.bc3 - 1.0 / (0.5 * THETA0)).abs() < 1e-14);
        assert!((f.bc3 - 3.389).abs() < 1e-3);
        assert_eq!(f.bc1, 2.0);
    }

    #[test]
    fn first_field_is_theta_bound_near_minus_one() {
        let f = critical_fields(-0.9, THETA0, 0.5589824649).unwrap();
        assert_eq!(f.bc1, 1.0 / THETA0);
    }

    #[test]
    fn ordering_waived_at_minus_one() {
        let f = critical_fields(-1.0, THETA0, THETA0).unwrap();
        assert_eq!(f.bc1, f.bc2);
        assert_eq!(f.bc2, f.bc3);
    }

    #[test]
    fn inconsistent_spectra_rejected() {
        // beta above Theta_0 breaks bc1 < bc2
        assert!(matches!(
            critical_fields(-0.5, THETA0, 0.7),
            Err(Error::FieldOrdering { .. })
        ));
        assert!(critical_fields(0.5, THETA0, BETA_HALF).is_err());
    }

    #[test]
    fn regimes_between_thresholds() {
        let f = critical_fields(-0.5, THETA0, BETA_HALF).unwrap();
        let r = classify(&f, f.bc3).unwrap();
        assert!(r.all_vanish());
        assert!(!classify(&f, f.bc3 * (1.0 - 1e-12)).unwrap().boundary2);
        let mid = 0.5 * (f.bc2 + f.bc3);
        assert_eq!(
            classify(&f, mid).unwrap(),
            Regime {
                edge: true,
                boundary1: true,
                boundary2: false
            }
        );
        let low = 0.5 * (f.bc1 + f.bc2);
        assert_eq!(
            classify(&f, low).unwrap(),
            Regime {
                edge: false,
                boundary1: true,
                boundary2: false
            }
        );
        assert!(classify(&f, 0.0).is_err());
    }
}
