//! Minimal length from the generalized uncertainty relation and upper bounds
//! on the deformation parameters from the measured first-level energy.

use std::fmt;

use thiserror::Error;

use crate::cli::sci;
use crate::constants::{wavenumber, Constants, Experiment};

/// The τ bound printed alongside the measured data; not derivable from the
/// stated inputs under either reading of the energy budget.
pub const TAU_PAPER: f64 = 6.26e8;

/// The θ bound as printed (m²); the engine value from the same inputs is ~2.5% larger.
pub const THETA_PAPER: f64 = 0.755e-13;

/// The printed minimal-length bound (m).
pub const MIN_LENGTH_PAPER: f64 = 1.87e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundsError {
    #[error("tau must be finite and non-negative, got {0}")]
    NegativeTau(f64),
    #[error("theta must be finite and non-negative, got {0}")]
    NegativeTheta(f64),
    #[error(
        "theta* = {theta} m^2 exceeds the theta bound {theta_max} m^2, leaving no room for tau"
    )]
    InfeasibleTheta { theta: f64, theta_max: f64 },
    #[error("transverse wavenumber is zero (v_mean = 0): the shift leaves theta unconstrained")]
    ZeroWavenumber,
}

/// `θ √τ √(1 + τ ⟨y⟩²)`: the smallest Δx on the boundary
/// `Δx Δy = θ/2 (1 + τ⟨y⟩² + τ Δy²)`, reached at `Δy² = (1 + τ⟨y⟩²)/τ`.
pub fn min_uncertainty_x(theta: f64, tau: f64, y_mean: f64) -> Result<f64, BoundsError> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(BoundsError::NegativeTau(tau));
    }
    if !(theta.is_finite() && theta >= 0.0) {
        return Err(BoundsError::NegativeTheta(theta));
    }
    Ok(theta * tau.sqrt() * (1.0 + tau * y_mean * y_mean).sqrt())
}

/// `2 ΔE₁ / (m g k)`.
pub fn theta_upper(c: &Constants, e: &Experiment) -> f64 {
    let (coeff_theta, _, rhs) = feasible_region(c, e);
    rhs / coeff_theta
}

/// `(m g k / 2, ħ²/2m, ΔE₁)`: admissible `(θ, τ)` satisfy
/// `coeff_theta·θ + coeff_tau·τ <= rhs`.
pub fn feasible_region(c: &Constants, e: &Experiment) -> (f64, f64, f64) {
    let k = wavenumber(c, e);
    (
        c.mass * c.g_accel * k / 2.0,
        c.hbar * c.hbar / (2.0 * c.mass),
        e.delta_e1_exp,
    )
}

/// How the energy budget is split between θ and τ when bounding τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TauConvention {
    /// All of ΔE₁ attributed to τ (θ = 0).
    FullBudget,
    /// What remains of ΔE₁ after θ* has taken its share.
    Residual(f64),
    /// The printed value, quoted rather than derived.
    Paper,
}

impl TauConvention {
    /// Residual budget left by the printed θ bound.
    pub fn residual_default() -> Self {
        TauConvention::Residual(THETA_PAPER)
    }

    pub fn label(&self) -> &'static str {
        match self {
            TauConvention::FullBudget => "full",
            TauConvention::Residual(_) => "residual",
            TauConvention::Paper => "paper",
        }
    }
}

impl fmt::Display for TauConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TauConvention::Residual(t) => write!(f, "residual(theta*={t:e})"),
            other => f.write_str(other.label()),
        }
    }
}

pub fn tau_upper(
    c: &Constants,
    e: &Experiment,
    convention: TauConvention,
) -> Result<f64, BoundsError> {
    let (coeff_theta, coeff_tau, rhs) = feasible_region(c, e);
    match convention {
        TauConvention::FullBudget => Ok(rhs / coeff_tau),
        TauConvention::Residual(theta) => {
            if !(theta.is_finite() && theta >= 0.0) {
                return Err(BoundsError::NegativeTheta(theta));
            }
            let left = rhs - coeff_theta * theta;
            if left < 0.0 {
                return Err(BoundsError::InfeasibleTheta {
                    theta,
                    theta_max: rhs / coeff_theta,
                });
            }
            Ok(left / coeff_tau)
        }
        TauConvention::Paper => Ok(TAU_PAPER),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub theta_max: f64,
    pub tau_max: f64,
    pub tau_convention: TauConvention,
    pub coeff_theta: f64,
    pub coeff_tau: f64,
    /// `theta_max · √tau_max`.
    pub min_length_bound: f64,
    /// Both derivable τ bounds, reported whatever the convention.
    pub tau_full_budget: f64,
    pub tau_residual: f64,
    /// True when the printed τ matches neither derivable bound to 1%.
    pub convention_gap: bool,
}

/// Report with θ from the engine's own bound.
pub fn bound_report(
    c: &Constants,
    e: &Experiment,
    convention: TauConvention,
) -> Result<BoundReport, BoundsError> {
    bound_report_with_theta(c, e, convention, theta_upper(c, e))
}

/// Report with an externally supplied θ bound (e.g. the printed one).
pub fn bound_report_with_theta(
    c: &Constants,
    e: &Experiment,
    convention: TauConvention,
    theta_max: f64,
) -> Result<BoundReport, BoundsError> {
    let (coeff_theta, coeff_tau, _) = feasible_region(c, e);
    if coeff_theta == 0.0 {
        return Err(BoundsError::ZeroWavenumber);
    }
    if !(theta_max.is_finite() && theta_max >= 0.0) {
        return Err(BoundsError::NegativeTheta(theta_max));
    }
    let tau_max = tau_upper(c, e, convention)?;
    let tau_full_budget = tau_upper(c, e, TauConvention::FullBudget)?;
    let residual_theta = match convention {
        TauConvention::Residual(t) => t,
        _ => THETA_PAPER.min(theta_upper(c, e)),
    };
    let tau_residual = tau_upper(c, e, TauConvention::Residual(residual_theta))?;
    let near = |a: f64| ((TAU_PAPER - a) / TAU_PAPER).abs() < 0.01;
    Ok(BoundReport {
        theta_max,
        tau_max,
        tau_convention: convention,
        coeff_theta,
        coeff_tau,
        min_length_bound: min_uncertainty_x(theta_max, tau_max, 0.0)?,
        tau_full_budget,
        tau_residual,
        convention_gap: !near(tau_full_budget) && !near(tau_residual),
    })
}

impl BoundReport {
    /// `key=value` lines in a fixed order.
    pub fn kv_lines(&self) -> Vec<(&'static str, String)> {
        vec![
            ("theta_max", sci(self.theta_max)),
            ("tau_max", sci(self.tau_max)),
            ("tau_convention", self.tau_convention.to_string()),
            ("min_length_bound", sci(self.min_length_bound)),
            ("coeff_theta", sci(self.coeff_theta)),
            ("coeff_tau", sci(self.coeff_tau)),
            ("tau_full_budget", sci(self.tau_full_budget)),
            ("tau_residual", sci(self.tau_residual)),
            ("tau_paper", sci(TAU_PAPER)),
            ("tau_convention_gap", self.convention_gap.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    fn defaults() -> (Constants, Experiment) {
        (Constants::default(), Experiment::default())
    }

    #[test]
    fn minimal_length_examples() {
        assert_eq!(min_uncertainty_x(7.74e-14, 0.0, 3.0).unwrap(), 0.0);
        let m = min_uncertainty_x(7.74e-14, 6.26e8, 0.0).unwrap();
        assert!(rel(m, 1.94e-9) < 0.005);
        let m = min_uncertainty_x(0.755e-13, 6.26e8, 0.0).unwrap();
        assert!(rel(m, 1.89e-9) < 0.005);
        assert_eq!(
            min_uncertainty_x(1e-14, -1.0, 0.0),
            Err(BoundsError::NegativeTau(-1.0))
        );
    }

    /// Golden-section search along the boundary curve of the uncertainty
    /// relation, independent of the closed form.
    fn boundary_minimum(theta: f64, tau: f64, y: f64) -> f64 {
        let a0 = 1.0 + tau * y * y;
        let dx = |dy: f64| theta / 2.0 * (a0 / dy + tau * dy);
        let guess = (a0 / tau).sqrt();
        let (mut lo, mut hi) = (guess * 1e-3, guess * 1e3);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..300 {
            let m1 = hi - r * (hi - lo);
            let m2 = lo + r * (hi - lo);
            if dx(m1) < dx(m2) {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        dx(0.5 * (lo + hi))
    }

    #[test]
    fn closed_form_is_the_boundary_minimum() {
        for &(theta, tau, y) in &[
            (7.74e-14, 6.26e8, 0.0),
            (7.74e-14, 6.26e8, 3e-5),
            (1e-20, 1e10, -2e-6),
            (2.0, 0.5, 1.5),
        ] {
            let exact = min_uncertainty_x(theta, tau, y).unwrap();
            assert!(rel(boundary_minimum(theta, tau, y), exact) < 1e-12);
        }
    }

    #[test]
    fn theta_bound() {
        let (c, e) = defaults();
        let t = theta_upper(&c, &e);
        let by_hand = 2.0 * 6.55e-32 / (1.675e-27 * 9.81 * 1.028e8);
        assert!(rel(t, by_hand) < 1e-3);
        assert!(rel(t, 7.74e-14) < 0.005);
        assert!(rel(t, THETA_PAPER) < 0.05);
        let doubled = Experiment {
            delta_e1_exp: 2.0 * e.delta_e1_exp,
            ..e
        };
        assert!(rel(theta_upper(&c, &doubled), 2.0 * t) < 1e-14);
        let faster = Experiment {
            v_mean: 2.0 * e.v_mean,
            ..e
        };
        assert!(rel(theta_upper(&c, &faster), t / 2.0) < 1e-14);
    }

    #[test]
    fn feasible_half_plane() {
        let (c, e) = defaults();
        let (a, b, rhs) = feasible_region(&c, &e);
        assert!(rel(a, 8.46e-19) < 0.005);
        assert!(rel(b, 3.34e-42) < 0.005);
        assert_eq!(rhs, 6.55e-32);
        assert!(0.0 <= rhs);
        assert!(rel(a * theta_upper(&c, &e), rhs) < 1e-14);
    }

    #[test]
    fn tau_conventions() {
        let (c, e) = defaults();
        let full = tau_upper(&c, &e, TauConvention::FullBudget).unwrap();
        assert!(rel(full, 1.96e10) < 0.005);
        let residual = tau_upper(&c, &e, TauConvention::residual_default()).unwrap();
        // (6.55e-32 - 8.4466e-19 * 0.755e-13) / 3.3477e-42
        assert!(rel(residual, 5.16e8) < 0.005);
        assert_eq!(tau_upper(&c, &e, TauConvention::Paper).unwrap(), 6.26e8);
        assert!(residual <= TAU_PAPER && TAU_PAPER <= full);
        assert!(matches!(
            tau_upper(&c, &e, TauConvention::Residual(1e-12)),
            Err(BoundsError::InfeasibleTheta { .. })
        ));
        // saturated θ leaves nothing for τ
        let none = tau_upper(&c, &e, TauConvention::Residual(theta_upper(&c, &e))).unwrap();
        assert!(none.abs() < 1e-6 * full);
    }

    #[test]
    fn reports() {
        let (c, e) = defaults();
        let r = bound_report_with_theta(&c, &e, TauConvention::Paper, THETA_PAPER).unwrap();
        assert!(rel(r.min_length_bound, 1.89e-9) < 0.005);
        assert!(rel(r.min_length_bound, MIN_LENGTH_PAPER) < 0.015);
        assert!(r.convention_gap);

        let r = bound_report(&c, &e, TauConvention::Paper).unwrap();
        assert!(rel(r.min_length_bound, MIN_LENGTH_PAPER) < 0.05);

        let r = bound_report(&c, &e, TauConvention::FullBudget).unwrap();
        assert!(rel(r.min_length_bound, 1.08e-8) < 0.01);
        assert_eq!(r.min_length_bound, r.theta_max * r.tau_max.sqrt());

        let still = Experiment { v_mean: 0.0, ..e };
        assert_eq!(theta_upper(&c, &still), f64::INFINITY);
        assert_eq!(
            bound_report(&c, &still, TauConvention::FullBudget),
            Err(BoundsError::ZeroWavenumber)
        );

        let r = bound_report_with_theta(&c, &e, TauConvention::FullBudget, 0.0).unwrap();
        assert_eq!(r.min_length_bound, 0.0);
        let keys: Vec<_> = r.kv_lines().into_iter().map(|(k, _)| k).collect();
        assert_eq!(
            &keys[..6],
            &[
                "theta_max",
                "tau_max",
                "tau_convention",
                "min_length_bound",
                "coeff_theta",
                "coeff_tau"
            ]
        );
    }

    proptest! {
        #[test]
        fn theta_bound_monotone(
            de in 1e-33f64..1e-30, m in 1e-28f64..1e-25, g in 0.1f64..100.0,
            v in 0.1f64..100.0, f in 1.01f64..3.0,
        ) {
            let c = Constants { hbar: 1.059e-34, mass: m, g_accel: g };
            let e = Experiment { delta_e1_exp: de, v_mean: v };
            let t = theta_upper(&c, &e);
            let more_energy = theta_upper(&c, &Experiment { delta_e1_exp: de * f, ..e });
            let heavier = theta_upper(&Constants { mass: m * f, ..c }, &e);
            let stronger = theta_upper(&Constants { g_accel: g * f, ..c }, &e);
            let faster = theta_upper(&c, &Experiment { v_mean: v * f, ..e });
            prop_assert!(more_energy > t);
            prop_assert!(heavier < t && stronger < t && faster < t);
        }

        #[test]
        fn minimum_at_zero_mean(theta in 1e-20f64..1e-10, tau in 1e4f64..1e12, y in -1e-3f64..1e-3) {
            let base = min_uncertainty_x(theta, tau, 0.0).unwrap();
            let at_y = min_uncertainty_x(theta, tau, y).unwrap();
            prop_assert!(at_y >= base);
            if y != 0.0 && tau * y * y > 1e-15 {
                prop_assert!(at_y > base);
            }
        }

        #[test]
        fn linear_in_theta(theta in 1e-20f64..1e-10, tau in 0.0f64..1e12, y in -1e-3f64..1e-3, l in 0.01f64..100.0) {
            let a = min_uncertainty_x(l * theta, tau, y).unwrap();
            let b = l * min_uncertainty_x(theta, tau, y).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * b.abs());
        }

        #[test]
        fn dimensionless_combination(theta in 1e-20f64..1e-10, tau in 1.0f64..1e12, l in 0.01f64..100.0) {
            let a = min_uncertainty_x(l * theta, tau / (l * l), 0.0).unwrap();
            let b = min_uncertainty_x(theta, tau, 0.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-14 * b);
        }
    }
}
