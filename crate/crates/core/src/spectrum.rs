//! Energy levels of the gravitational well in the commutative, flat
//! noncommutative and position-dependent cases, and the symbolic reduction of
//! the deformed Hamiltonian that yields the shift formulas.

use std::fmt;

use thiserror::Error;

use crate::airy::{airy_zero, AiryError};
use crate::constants::Constants;
use crate::reps::RepMap;
use crate::symalg::{heisenberg, AlgebraError, OpExpr, Param, ParamScalar, Truncation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error(transparent)]
    Airy(#[from] AiryError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("{name} must be finite and non-negative, got {value}")]
    NegativeParameter { name: &'static str, value: f64 },
    #[error("level index must be >= 1")]
    NoLevels,
    #[error("Hamiltonian reduction needs a representation on {expected}, {rep} maps into {found}")]
    WrongTarget {
        rep: String,
        expected: String,
        found: String,
    },
}

/// Deformation parameters: `theta` in m^2, `tau` in m^-2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeformationParams {
    theta: f64,
    tau: f64,
}

impl DeformationParams {
    pub fn new(theta: f64, tau: f64) -> Result<Self, SpectrumError> {
        for (name, value) in [("theta", theta), ("tau", tau)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(SpectrumError::NegativeParameter { name, value });
            }
        }
        Ok(DeformationParams { theta, tau })
    }

    pub fn commutative() -> Self {
        DeformationParams::default()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

/// `E_n,k = -(m g^2 hbar^2 / 2)^(1/3) r_n + hbar^2 k^2 / 2m`.
pub fn energy_level(n: u32, k: f64, c: &Constants) -> Result<f64, SpectrumError> {
    if n == 0 {
        return Err(SpectrumError::NoLevels);
    }
    let r = airy_zero(n)?.value;
    Ok(-c.energy_scale() * r + transverse_energy(k, c))
}

/// Free motion along y: `hbar^2 k^2 / 2m`.
pub fn transverse_energy(k: f64, c: &Constants) -> f64 {
    c.hbar * c.hbar * k * k / (2.0 * c.mass)
}

/// `-theta m g k / 2`; the same for every level.
pub fn shift_flat_nc(k: f64, p: &DeformationParams, c: &Constants) -> f64 {
    -p.theta * c.mass * c.g_accel * k / 2.0
}

/// `(-theta m g k / 2, -tau hbar^2 / 2m)`.
pub fn shift_posdep(k: f64, p: &DeformationParams, c: &Constants) -> (f64, f64) {
    (
        shift_flat_nc(k, p, c),
        -p.tau * c.hbar * c.hbar / (2.0 * c.mass),
    )
}

/// Which terms of the exactly expanded Hamiltonian are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct NeglectPolicy {
    /// Keep only terms of joint degree <= 1 in `theta` and `tau`.
    pub first_order: bool,
    /// Drop every monomial containing one of these generators.
    pub drop_generators: Vec<String>,
    /// Parameters set to zero.
    pub vanishing: Vec<Param>,
}

impl NeglectPolicy {
    /// First order in (theta, tau), `y_s`-bearing monomials dropped.
    pub fn first_order_without_ys() -> Self {
        NeglectPolicy {
            first_order: true,
            drop_generators: vec!["y_s".to_string()],
            vanishing: Vec::new(),
        }
    }

    /// Exact expansion, nothing dropped.
    pub fn exact() -> Self {
        NeglectPolicy {
            first_order: false,
            drop_generators: Vec::new(),
            vanishing: Vec::new(),
        }
    }

    pub fn with_vanishing(mut self, params: &[Param]) -> Self {
        self.vanishing.extend_from_slice(params);
        self
    }

    pub fn apply(&self, h: &OpExpr) -> Result<OpExpr, AlgebraError> {
        let mut t = if self.first_order {
            Truncation::first_order_deformation()
        } else {
            Truncation::none()
        };
        for &p in &self.vanishing {
            t = t.cap(p, 0);
        }
        let mut out = h.truncate(&t);
        for g in &self.drop_generators {
            out = out.without_generator(g)?;
        }
        Ok(out)
    }
}

impl Default for NeglectPolicy {
    fn default() -> Self {
        NeglectPolicy::first_order_without_ys()
    }
}

impl fmt::Display for NeglectPolicy {
    /// One rule per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.first_order {
            writeln!(
                f,
                "drop terms of joint degree >= 2 in (theta, tau), including theta*tau"
            )?;
        }
        for g in &self.drop_generators {
            writeln!(
                f,
                "drop monomials containing {g} (<{g}> = 0, no shift along the field)"
            )?;
        }
        for p in &self.vanishing {
            writeln!(f, "set {} = 0", p.symbol())?;
        }
        if !self.first_order && self.drop_generators.is_empty() && self.vanishing.is_empty() {
            writeln!(f, "exact expansion, nothing dropped")?;
        }
        write!(f, "keep p_ys, p_xs^2, p_ys^2, x_s and constants")
    }
}

/// Builds `p_x^2/2m + p_y^2/2m + m g x` from the images of a representation
/// whose source generators are ordered `(x, y, p_x, p_y)`.
pub fn represented_hamiltonian(rep: &RepMap) -> Result<OpExpr, SpectrumError> {
    let src = rep.source();
    let names = src.generators();
    let x = OpExpr::generator(src, &names[0])?;
    let px = OpExpr::generator(src, &names[2])?;
    let py = OpExpr::generator(src, &names[3])?;
    let kinetic = ParamScalar::rational(1, 2).times(Param::Mass, -1);
    let potential = ParamScalar::param(Param::Mass).times(Param::Gravity, 1);
    let h = px
        .pow(2)
        .scale(&kinetic)
        .add(&py.pow(2).scale(&kinetic))?
        .add(&x.scale(&potential))?;
    Ok(rep.apply(&h)?)
}

/// `H0 = p_xs^2/2m + p_ys^2/2m + m g x_s` in the Heisenberg algebra.
pub fn commutative_hamiltonian() -> OpExpr {
    let h = heisenberg();
    let kinetic = ParamScalar::rational(1, 2).times(Param::Mass, -1);
    OpExpr::sum_of_words(
        &h,
        &[
            (kinetic.clone(), &["p_xs", "p_xs"]),
            (kinetic, &["p_ys", "p_ys"]),
            (
                ParamScalar::param(Param::Mass).times(Param::Gravity, 1),
                &["x_s"],
            ),
        ],
    )
    .expect("built-in Hamiltonian")
}

/// Expands the represented Hamiltonian exactly, then applies `policy`.
pub fn reduce_hamiltonian(rep: &RepMap, policy: &NeglectPolicy) -> Result<OpExpr, SpectrumError> {
    let h = heisenberg();
    if **rep.target() != *h {
        return Err(SpectrumError::WrongTarget {
            rep: rep.name().to_string(),
            expected: h.name().to_string(),
            found: rep.target().name().to_string(),
        });
    }
    Ok(policy.apply(&represented_hamiltonian(rep)?)?)
}

/// Energy shift of a reduced Hamiltonian on a plane wave `exp(i k y)`:
/// the `p_ys` coefficient times `hbar k` plus the constant term, with the
/// parameters evaluated numerically. Terms of `H0` are skipped.
pub fn plane_wave_shift(
    reduced: &OpExpr,
    k: f64,
    p: &DeformationParams,
    c: &Constants,
) -> Result<f64, SpectrumError> {
    let values = [c.hbar, p.theta, p.tau, c.mass, c.g_accel];
    let correction = reduced.sub(&commutative_hamiltonian())?;
    let constant = correction.coefficient(&[])?.evaluate(&values).re;
    let linear = correction.coefficient(&["p_ys"])?.evaluate(&values).re;
    Ok(constant + linear * c.hbar * k)
}

/// One row of the spectrum table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub n: u32,
    pub k: f64,
    pub e_commutative: f64,
    pub shift_theta: f64,
    pub shift_tau: f64,
    pub e_total: f64,
}

pub fn spectrum_point(
    n: u32,
    k: f64,
    p: &DeformationParams,
    c: &Constants,
) -> Result<SpectrumPoint, SpectrumError> {
    let e_commutative = energy_level(n, k, c)?;
    let (shift_theta, shift_tau) = shift_posdep(k, p, c);
    Ok(SpectrumPoint {
        n,
        k,
        e_commutative,
        shift_theta,
        shift_tau,
        e_total: e_commutative + shift_theta + shift_tau,
    })
}

/// Levels `1..=n_max` at transverse wavenumber `k`.
pub fn spectrum_table(
    n_max: u32,
    k: f64,
    p: &DeformationParams,
    c: &Constants,
) -> Result<Vec<SpectrumPoint>, SpectrumError> {
    if n_max == 0 {
        return Err(SpectrumError::NoLevels);
    }
    (1..=n_max).map(|n| spectrum_point(n, k, p, c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{wavenumber, Experiment};
    use crate::reps::{bopp_sym, rep1, rep2_composed};

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ground_state_energy() {
        let c = Constants::default();
        let e1 = energy_level(1, 0.0, &c).unwrap();
        // -(m g^2 hbar^2/2)^(1/3) * r_1 with r_1 = -2.3381074
        let by_hand =
            (1.675e-27 * 9.81f64.powi(2) * 1.059e-34f64.powi(2) / 2.0).cbrt() * 2.338_107_4;
        assert!(rel(e1, by_hand) < 1e-7);
        assert!(rel(e1, 2.26e-31) < 0.005);
        // about 1.41 peV
        assert!(rel(e1 / 1.602_176_634e-19 * 1e12, 1.41) < 0.005);
        assert_eq!(energy_level(0, 0.0, &c), Err(SpectrumError::NoLevels));
    }

    #[test]
    fn transverse_kinetic_term() {
        let c = Constants::default();
        let k = 1.03e8;
        let diff = energy_level(1, k, &c).unwrap() - energy_level(1, 0.0, &c).unwrap();
        assert!(rel(diff, 3.55e-26) < 0.005);
        // vanishing gravity leaves the free particle
        let free = Constants {
            g_accel: 1e-30,
            ..c
        };
        let e = energy_level(1, k, &free).unwrap();
        assert!(rel(e, transverse_energy(k, &c)) < 1e-12);
    }

    #[test]
    fn flat_shift_examples() {
        let c = Constants::default();
        let k = wavenumber(&c, &Experiment::default());
        assert_eq!(shift_flat_nc(k, &DeformationParams::commutative(), &c), 0.0);
        let p = DeformationParams::new(7.74e-14, 0.0).unwrap();
        assert!(rel(shift_flat_nc(k, &p, &c), -6.55e-32) < 0.005);
        let coeff = c.mass * c.g_accel * k / 2.0;
        assert!(rel(coeff, 8.46e-19) < 0.005);
    }

    #[test]
    fn posdep_shift_examples() {
        let c = Constants::default();
        let k = 1.028e8;
        assert_eq!(
            shift_posdep(k, &DeformationParams::commutative(), &c),
            (0.0, 0.0)
        );
        let coeff = c.hbar * c.hbar / (2.0 * c.mass);
        assert!(rel(coeff, 3.34e-42) < 0.005);
        let p = DeformationParams::new(0.0, 6.26e8).unwrap();
        let (t, s) = shift_posdep(k, &p, &c);
        assert_eq!(t, 0.0);
        assert!(rel(s, -2.09e-33) < 0.005);
    }

    #[test]
    fn negative_parameters_rejected() {
        assert!(DeformationParams::new(-1.0, 0.0).is_err());
        assert!(DeformationParams::new(0.0, -1e-3).is_err());
        assert!(DeformationParams::new(f64::NAN, 0.0).is_err());
    }

    fn expected_reduction(with_tau: bool) -> OpExpr {
        let h = heisenberg();
        let mut parts: Vec<(ParamScalar, &[&str])> = vec![(
            ParamScalar::rational(-1, 2)
                .times(Param::Theta, 1)
                .times(Param::Mass, 1)
                .times(Param::Gravity, 1)
                .times(Param::Hbar, -1),
            &["p_ys"],
        )];
        if with_tau {
            parts.push((
                ParamScalar::rational(-1, 2)
                    .times(Param::Tau, 1)
                    .times(Param::Hbar, 2)
                    .times(Param::Mass, -1),
                &[],
            ));
        }
        commutative_hamiltonian()
            .add(&OpExpr::sum_of_words(&h, &parts).unwrap())
            .unwrap()
    }

    #[test]
    fn reduction_of_position_dependent_hamiltonian() {
        let reduced = reduce_hamiltonian(&rep2_composed(), &NeglectPolicy::default()).unwrap();
        assert_eq!(reduced, expected_reduction(true), "{reduced}");
    }

    #[test]
    fn reduction_of_flat_hamiltonian() {
        let reduced = reduce_hamiltonian(&bopp_sym(), &NeglectPolicy::default()).unwrap();
        assert_eq!(reduced, expected_reduction(false));
        // the flat case needs no approximation at all
        let exact = reduce_hamiltonian(&bopp_sym(), &NeglectPolicy::exact()).unwrap();
        assert_eq!(exact, expected_reduction(false));
    }

    #[test]
    fn reduction_without_deformation_is_h0() {
        let policy = NeglectPolicy::exact().with_vanishing(&[Param::Theta, Param::Tau]);
        for rep in [bopp_sym(), rep2_composed()] {
            assert_eq!(
                reduce_hamiltonian(&rep, &policy).unwrap(),
                commutative_hamiltonian()
            );
        }
    }

    #[test]
    fn exact_expansion_keeps_dropped_terms() {
        let exact = reduce_hamiltonian(&rep2_composed(), &NeglectPolicy::exact()).unwrap();
        let reduced = reduce_hamiltonian(&rep2_composed(), &NeglectPolicy::default()).unwrap();
        let dropped = exact.sub(&reduced).unwrap();
        assert!(!dropped.is_zero());
        // everything dropped carries y_s or is beyond first order
        for (word, coeff) in dropped.terms() {
            let beyond_first = coeff.terms().all(|(e, _)| e[1] + e[2] >= 2);
            assert!(word.contains(&"y_s") || beyond_first, "{word:?} {coeff}");
        }
    }

    #[test]
    fn reduction_needs_heisenberg_target() {
        let err = reduce_hamiltonian(&rep1(), &NeglectPolicy::default()).unwrap_err();
        assert!(matches!(err, SpectrumError::WrongTarget { .. }));
    }

    #[test]
    fn symbolic_and_closed_form_shifts_agree() {
        let c = Constants::default();
        let k = wavenumber(&c, &Experiment::default());
        let p = DeformationParams::new(3.0e-14, 2.0e8).unwrap();
        let reduced = reduce_hamiltonian(&rep2_composed(), &NeglectPolicy::default()).unwrap();
        let symbolic = plane_wave_shift(&reduced, k, &p, &c).unwrap();
        let (a, b) = shift_posdep(k, &p, &c);
        assert!(rel(symbolic, a + b) < 1e-12);
    }

    #[test]
    fn table_rows() {
        let c = Constants::default();
        let rows = spectrum_table(2, 0.0, &DeformationParams::commutative(), &c).unwrap();
        assert_eq!(rows.len(), 2);
        let gap = rows[1].e_total - rows[0].e_total;
        let r1 = -2.338_107_410_459_767;
        let r2 = -4.087_949_444_130_971;
        assert!(rel(gap, c.energy_scale() * (r1 - r2)) < 1e-10);
        assert!(rel(gap, 1.69e-31) < 0.01);

        let p = DeformationParams::new(7.74e-14, 1e8).unwrap();
        let k = 1.028e8;
        let rows = spectrum_table(5, k, &p, &c).unwrap();
        for w in rows.windows(2) {
            assert_eq!(w[0].shift_theta, w[1].shift_theta);
            assert_eq!(w[0].shift_tau, w[1].shift_tau);
            assert!(w[1].e_commutative > w[0].e_commutative);
        }
        for r in &rows {
            assert_eq!(r.e_total, r.e_commutative + r.shift_theta + r.shift_tau);
            assert!(r.shift_theta <= 0.0 && r.shift_tau <= 0.0);
        }
        assert_eq!(spectrum_table(0, k, &p, &c), Err(SpectrumError::NoLevels));
    }

    #[test]
    fn policy_is_listed() {
        let text = NeglectPolicy::default().to_string();
        assert!(text.contains("y_s"));
        assert!(text.contains("theta*tau"));
    }
}
