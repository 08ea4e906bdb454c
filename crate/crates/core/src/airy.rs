//! Airy function Ai on the real line, its derivative, its zeros, and the
//! eigenstate normalization integral of the gravitational well.
//!
//! Evaluation is split in four regions:
//!
//! * `-4 <= z <= 3`: Maclaurin series;
//! * `z < -8` or `z >= 8`: asymptotic expansions, truncated at the smallest term;
//! * `-8 <= z < -4`: Taylor steps of `y'' = z y` from the series values at `-4`;
//! * `3 < z < 8`: Taylor steps taken downward from the asymptotic values at
//!   `z = 8`. Ai is dominant in that direction, so the stepping is stable.
//!
//! The series loses digits to cancellation (against Bi for positive `z`,
//! between oscillating terms for negative `z`) well before the asymptotic
//! expansions reach full accuracy near `|z| = 8`; the stepped regions fill the gap.

// Reference constants keep all published digits.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

use thiserror::Error;

use crate::constants::Constants;
use crate::quadrature::{integrate, QuadError};

/// Ai(0) = 3^(-2/3) / Gamma(2/3).
pub const AI0: f64 = 0.355_028_053_887_817_239_260_063_186_004_183_176_397_979_174_199_18;
/// -Ai'(0) = 3^(-1/3) / Gamma(1/3).
pub const AIP0: f64 = 0.258_819_403_792_806_798_405_183_560_189_203_963_479_091_138_354_93;

/// Lower end of the Maclaurin region.
pub const SERIES_NEG: f64 = -4.0;
/// End of the negative asymptotic region.
pub const ASYMPTOTIC_NEG: f64 = -8.0;
/// Upper end of the Maclaurin region.
pub const SERIES_POS: f64 = 3.0;
/// Start of the positive asymptotic region, anchor of the Taylor steps.
pub const ASYMPTOTIC_POS: f64 = 8.0;

const TAYLOR_STEP: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AiryError {
    #[error("Airy zero index must be >= 1, got {0}")]
    ZeroIndex(u32),
    #[error("Newton and bisection both failed to isolate zero {n} near {seed}")]
    NoRoot { n: u32, seed: f64 },
    #[error(transparent)]
    Quadrature(#[from] QuadError),
}

/// `(Ai(z), Ai'(z))` from the Maclaurin series.
pub fn series(z: f64) -> (f64, f64) {
    // Ai = c1 f - c2 g with f = sum 3^k (1/3)_k z^(3k)/(3k)!, g = sum 3^k (2/3)_k z^(3k+1)/(3k+1)!
    let z3 = z * z * z;
    let (mut f, mut g) = (1.0, z);
    let (mut df, mut dg) = (0.0, 1.0);
    let (mut tf, mut tg) = (1.0, z);
    let mut k = 0.0;
    loop {
        k += 1.0;
        tf *= z3 / ((3.0 * k - 1.0) * (3.0 * k));
        tg *= z3 / ((3.0 * k) * (3.0 * k + 1.0));
        f += tf;
        g += tg;
        if z != 0.0 {
            df += 3.0 * k * tf / z;
            dg += (3.0 * k + 1.0) * tg / z;
        }
        let small = |t: f64, s: f64| t.abs() <= 1e-17 * s.abs().max(1e-300);
        if k > 2.0 && small(tf, f) && small(tg, g) {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    (AI0 * f - AIP0 * g, AI0 * df - AIP0 * dg)
}

/// `u_k` and `v_k` coefficients of the asymptotic expansions, up to the
/// smallest term for the given `zeta`.
fn asymptotic_coefficients(zeta: f64) -> (Vec<f64>, Vec<f64>) {
    let mut u = vec![1.0];
    let mut v = vec![1.0];
    let mut last = 1.0;
    for k in 1..60 {
        let kf = k as f64;
        let uk = u[k - 1] * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0)
            / ((2.0 * kf - 1.0) * 216.0 * kf);
        let vk = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk;
        let term = uk / zeta.powi(k as i32);
        if term > last || term < 1e-18 {
            break;
        }
        last = term;
        u.push(uk);
        v.push(vk);
    }
    (u, v)
}

/// `(Ai(z), Ai'(z))` from the large-|z| asymptotic expansions.
pub fn asymptotic(z: f64) -> (f64, f64) {
    let x = z.abs();
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (u, v) = asymptotic_coefficients(zeta);
    let quarter = x.powf(0.25);
    if z > 0.0 {
        let (mut su, mut sv, mut p) = (0.0, 0.0, 1.0);
        for (k, (uk, vk)) in u.iter().zip(&v).enumerate() {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            su += sign * uk * p;
            sv += sign * vk * p;
            p /= zeta;
        }
        let e = (-zeta).exp() / (2.0 * PI.sqrt());
        (e / quarter * su, -e * quarter * sv)
    } else {
        // even/odd parts: sum (-1)^k c_{2k}/zeta^{2k}, sum (-1)^k c_{2k+1}/zeta^{2k+1}
        let (mut ue, mut uo, mut ve, mut vo) = (0.0, 0.0, 0.0, 0.0);
        let mut p = 1.0;
        for (k, (uk, vk)) in u.iter().zip(&v).enumerate() {
            let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 0 {
                ue += sign * uk * p;
                ve += sign * vk * p;
            } else {
                uo += sign * uk * p;
                vo += sign * vk * p;
            }
            p /= zeta;
        }
        let phase = zeta - PI / 4.0;
        let (s, c) = phase.sin_cos();
        let ai = (c * ue + s * uo) / (PI.sqrt() * quarter);
        let aip = quarter / PI.sqrt() * (s * ve - c * vo);
        (ai, aip)
    }
}

/// One Taylor step of `y'' = z y` from `z0` by `h`.
fn taylor_step(z0: f64, y: f64, dy: f64, h: f64) -> (f64, f64) {
    // a_{n+2} = (z0 a_n + a_{n-1}) / ((n+1)(n+2))
    let (mut a_prev, mut a0, mut a1) = (0.0, y, dy);
    let (mut val, mut der) = (y + dy * h, dy);
    let mut hp = h; // h^(n+1) for the coefficient a_{n+2}
    let mut n = 0.0;
    loop {
        let a2 = (z0 * a0 + a_prev) / ((n + 1.0) * (n + 2.0));
        der += (n + 2.0) * a2 * hp;
        hp *= h;
        val += a2 * hp;
        let scale = val.abs().max(der.abs()).max(1e-300);
        if n > 4.0 && (a2 * hp).abs() < 1e-18 * scale && (a1 * hp).abs() < 1e-17 * scale {
            break;
        }
        if n > 120.0 {
            break;
        }
        a_prev = a0;
        a0 = a1;
        a1 = a2;
        n += 1.0;
    }
    (val, der)
}

fn stepped(z: f64) -> (f64, f64) {
    let mut at = if z > 0.0 { ASYMPTOTIC_POS } else { SERIES_NEG };
    let (mut y, mut dy) = if z > 0.0 { asymptotic(at) } else { series(at) };
    while at != z {
        let h = (z - at).clamp(-TAYLOR_STEP, TAYLOR_STEP);
        (y, dy) = taylor_step(at, y, dy, h);
        at = if (z - at).abs() <= TAYLOR_STEP {
            z
        } else {
            at + h
        };
    }
    (y, dy)
}

/// `(Ai(z), Ai'(z))`.
pub fn ai_and_prime(z: f64) -> (f64, f64) {
    if !(ASYMPTOTIC_NEG..ASYMPTOTIC_POS).contains(&z) {
        asymptotic(z)
    } else if (SERIES_NEG..=SERIES_POS).contains(&z) {
        series(z)
    } else {
        stepped(z)
    }
}

pub fn ai(z: f64) -> f64 {
    ai_and_prime(z).0
}

pub fn ai_prime(z: f64) -> f64 {
    ai_and_prime(z).1
}

/// A negative real zero of Ai (or of Ai').
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AiryZero {
    pub n: u32,
    pub value: f64,
    /// |Ai(value)| (or |Ai'(value)| for derivative zeros).
    pub residual: f64,
}

/// `-(3 pi (4n - 1) / 8)^(2/3)`, the leading asymptotic location of the n-th zero.
pub fn zero_seed(n: u32) -> f64 {
    -(3.0 * PI * (4.0 * n as f64 - 1.0) / 8.0).powf(2.0 / 3.0)
}

const BRACKET: f64 = 0.2;

/// Newton on `f` with derivative `df`, kept inside `[lo, hi]` by bisection.
fn polish(f: impl Fn(f64) -> (f64, f64), seed: f64, lo: f64, hi: f64) -> Option<f64> {
    let (mut lo, mut hi) = (lo, hi);
    let (flo, fhi) = (f(lo).0, f(hi).0);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let lo_sign = flo.signum();
    let mut z = seed;
    for _ in 0..200 {
        let (v, d) = f(z);
        if v == 0.0 {
            return Some(z);
        }
        if v.signum() == lo_sign {
            lo = z;
        } else {
            hi = z;
        }
        let mut next = z - v / d;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 1e-15 * z.abs().max(1.0) {
            return Some(next);
        }
        z = next;
    }
    Some(z)
}

/// n-th zero of Ai, `n >= 1`. Zeros decrease: `r_1 > r_2 > ...`.
pub fn airy_zero(n: u32) -> Result<AiryZero, AiryError> {
    if n == 0 {
        return Err(AiryError::ZeroIndex(n));
    }
    let seed = zero_seed(n);
    let value = polish(
        |z| {
            let (a, ap) = ai_and_prime(z);
            (a, ap)
        },
        seed,
        seed - BRACKET,
        seed + BRACKET,
    )
    .ok_or(AiryError::NoRoot { n, seed })?;
    Ok(AiryZero {
        n,
        value,
        residual: ai(value).abs(),
    })
}

/// n-th zero of Ai', `n >= 1`, seeded by `-(3 pi (4n - 3) / 8)^(2/3)`.
pub fn airy_prime_zero(n: u32) -> Result<AiryZero, AiryError> {
    if n == 0 {
        return Err(AiryError::ZeroIndex(n));
    }
    let seed = -(3.0 * PI * (4.0 * n as f64 - 3.0) / 8.0).powf(2.0 / 3.0);
    // Ai'' = z Ai
    let value = polish(
        |z| {
            let (a, ap) = ai_and_prime(z);
            (ap, z * a)
        },
        seed,
        seed - 0.3,
        seed + 0.3,
    )
    .ok_or(AiryError::NoRoot { n, seed })?;
    Ok(AiryZero {
        n,
        value,
        residual: ai_prime(value).abs(),
    })
}

/// Width of the quadrature window above a zero; Ai^2 beyond it is negligible.
pub const INTEGRATION_SPAN: f64 = 40.0;

/// `int_{from}^{inf} Ai(z)^2 dz` by adaptive quadrature on
/// `[from, from + INTEGRATION_SPAN]` plus the leading asymptotic tail
/// `exp(-4/3 b^(3/2)) / (8 pi b)` beyond.
pub fn integral_ai_squared(from: f64) -> Result<f64, AiryError> {
    let b = from + INTEGRATION_SPAN;
    let body = integrate(|z| ai(z).powi(2), from, b, 1e-14, 1e-13, 4000)?;
    let tail = if b > 0.0 {
        (-4.0 / 3.0 * b * b.sqrt()).exp() / (8.0 * PI * b)
    } else {
        0.0
    };
    Ok(body.value + tail)
}

/// Normalization of the n-th eigenstate `psi_n(x) = alpha_n Ai(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub zero: AiryZero,
    /// `int_{r_n}^inf Ai^2` by quadrature.
    pub integral: f64,
    /// `Ai'(r_n)^2`, the closed form of the same integral.
    pub closed_form: f64,
    /// `alpha_n`, m^(-1/2).
    pub alpha: f64,
}

/// `alpha_n = [ (hbar^2 / 2 m^2 g)^(1/3) int_{r_n}^inf Ai^2 ]^(-1/2)`.
pub fn normalization(n: u32, c: &Constants) -> Result<Normalization, AiryError> {
    let zero = airy_zero(n)?;
    let integral = integral_ai_squared(zero.value)?;
    let closed_form = ai_prime(zero.value).powi(2);
    let alpha = (c.length_scale() * integral).powf(-0.5);
    Ok(Normalization {
        zero,
        integral,
        closed_form,
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from an independent arbitrary-precision evaluation.
    const TABLE: [(f64, f64, f64); 17] = [
        (-15.0, 0.27821749087082893, 0.27237420430864202),
        (-12.5, -0.27627456138116025, -0.41933133041950516),
        (-10.0, 0.040241238486443191, 0.99626504413279006),
        (-8.5, -0.33029023763020888, -0.032313348284639136),
        (-7.9, 0.041701883617386709, 0.94004299802628024),
        (-6.0, -0.32914517362982311, 0.34593548728134289),
        (-3.3, -0.41718093737455014, -0.070963617177835884),
        (-1.0, 0.53556088329235212, -0.010160567116645209),
        (0.0, 0.35502805388781724, -0.2588194037928068),
        (0.5, 0.23169360648083349, -0.22491053266468389),
        (2.0, 0.034924130423274379, -0.053090384433653632),
        (3.5, 0.002584098786989635, -0.0050044139679525828),
        (4.7, 0.00021286092135859744, -0.00047218363998626406),
        (6.0, 9.9476943602528896e-6, -2.4765200397034955e-5),
        (7.5, 1.9172560675134308e-7, -5.3127139597205447e-7),
        (8.5, 1.0997009755195507e-8, -3.2377254404476023e-8),
        (10.0, 1.1047532552898686e-10, -3.5206336767389236e-10),
    ];

    #[test]
    fn matches_reference_table() {
        for (z, a, ap) in TABLE {
            let (va, vap) = ai_and_prime(z);
            // relative to the local envelope so points near zeros are fair
            let env_a = a.abs().max(if z < 0.0 { 0.3 } else { 0.0 });
            let env_ap = ap.abs().max(if z < 0.0 { 0.5 } else { 0.0 });
            assert!((va - a).abs() <= 1e-10 * env_a, "Ai({z}) = {va}, want {a}");
            assert!(
                (vap - ap).abs() <= 1e-10 * env_ap,
                "Ai'({z}) = {vap}, want {ap}"
            );
        }
    }

    #[test]
    fn values_at_origin() {
        assert!((ai(0.0) - 0.355_028_053_8).abs() < 1e-10);
        assert!((ai_prime(0.0) + 0.258_819_403_8).abs() < 1e-10);
    }

    #[test]
    fn decay_for_positive_argument() {
        assert!((ai(5.0) - 1.083_444_281_360_744e-4).abs() / 1.0834e-4 < 1e-10);
        let mut prev = ai(1.0);
        let mut z = 1.0;
        while z < 30.0 {
            z += 0.25;
            let next = ai(z);
            assert!(next < prev && next >= 0.0);
            assert!(ai_prime(z) < 0.0);
            prev = next;
        }
        assert!(ai_prime(60.0) <= 0.0 && ai_prime(60.0) > -1e-100);
    }

    #[test]
    fn branches_agree_at_seams() {
        for z in [SERIES_NEG - 1.0, ASYMPTOTIC_NEG + 1.5] {
            let (a, ap) = series(z);
            let (b, bp) = stepped(z);
            assert!((a - b).abs() < 1e-12 && (ap - bp).abs() < 1e-12, "{z}");
        }
        let (a, ap) = stepped(ASYMPTOTIC_NEG + 1e-9);
        let (b, bp) = asymptotic(ASYMPTOTIC_NEG);
        assert!((a - b).abs() < 1e-9 && (ap - bp).abs() < 1e-9);
        let (a, ap) = series(SERIES_POS);
        let (b, bp) = stepped(SERIES_POS);
        assert!((a - b).abs() < 1e-9 * a.abs());
        assert!((ap - bp).abs() < 1e-9 * ap.abs());
        let (a, ap) = stepped(ASYMPTOTIC_POS - 1e-9);
        let (b, bp) = asymptotic(ASYMPTOTIC_POS);
        assert!((a - b).abs() < 1e-8 * a.abs());
        assert!((ap - bp).abs() < 1e-8 * ap.abs());
    }

    #[test]
    fn airy_equation_residual() {
        // Ai'' from an eighth-order central difference of ai
        const W: [f64; 5] = [
            -205.0 / 72.0,
            8.0 / 5.0,
            -1.0 / 5.0,
            8.0 / 315.0,
            -1.0 / 560.0,
        ];
        let h = 0.05;
        let mut z = -10.0;
        while z <= 5.0 {
            let mut second = W[0] * ai(z);
            for (k, w) in W.iter().enumerate().skip(1) {
                let d = k as f64 * h;
                second += w * (ai(z + d) + ai(z - d));
            }
            second /= h * h;
            assert!((second - z * ai(z)).abs() < 1e-8, "z = {z}");
            z += 0.125;
        }
    }

    #[test]
    fn zeros_match_reference() {
        let expected = [
            (1, -2.338_107_410_459_767),
            (2, -4.087_949_444_130_970_6),
            (5, -7.944_133_587_120_853),
            (10, -12.828_776_752_865_757),
            (20, -20.537_332_907_677_566),
        ];
        for (n, r) in expected {
            let z = airy_zero(n).unwrap();
            assert!((z.value - r).abs() < 1e-11, "n = {n}: {}", z.value);
            assert!(z.residual <= 1e-12);
            assert!((z.value - zero_seed(n)).abs() < 0.2);
        }
        assert_eq!(airy_zero(0), Err(AiryError::ZeroIndex(0)));
        assert!((ai_prime(airy_zero(1).unwrap().value) - 0.701_210_822_7).abs() < 1e-9);
    }

    #[test]
    fn zeros_decrease_and_interlace() {
        let zeros: Vec<f64> = (1..=10).map(|n| airy_zero(n).unwrap().value).collect();
        let dzeros: Vec<f64> = (1..=10)
            .map(|n| airy_prime_zero(n).unwrap().value)
            .collect();
        assert!((dzeros[0] + 1.018_792_971_647_471).abs() < 1e-11);
        assert!((dzeros[9] + 12.384_788_371_845_747).abs() < 1e-11);
        for n in 0..10 {
            assert!(dzeros[n] > zeros[n]);
            if n + 1 < 10 {
                assert!(zeros[n] > zeros[n + 1]);
                assert!(zeros[n] > dzeros[n + 1]);
            }
        }
    }

    #[test]
    fn normalization_identity() {
        for n in 1..=10 {
            let z = airy_zero(n).unwrap();
            let quad = integral_ai_squared(z.value).unwrap();
            let closed = ai_prime(z.value).powi(2);
            assert!((quad - closed).abs() < 1e-8, "n = {n}: {quad} vs {closed}");
        }
        let n1 = normalization(1, &Constants::default()).unwrap();
        assert!((n1.integral - 0.491_696_617_900_628_85).abs() < 1e-9);
    }

    #[test]
    fn normalization_large_n_asymptotics() {
        let z = airy_zero(20).unwrap();
        let quad = integral_ai_squared(z.value).unwrap();
        let approx = (-z.value).sqrt() / PI;
        assert!((quad - approx).abs() / approx < 0.02);
    }

    #[test]
    fn normalization_scales_with_gravity() {
        let c = Constants::default();
        let doubled = Constants {
            g_accel: 2.0 * c.g_accel,
            ..c
        };
        let a = normalization(3, &c).unwrap();
        let b = normalization(3, &doubled).unwrap();
        assert_eq!(a.integral, b.integral);
        assert!((b.alpha / a.alpha - 2f64.powf(1.0 / 6.0)).abs() < 1e-12);
        // psi_n normalized: alpha^2 * l0 * integral = 1
        assert!((a.alpha.powi(2) * c.length_scale() * a.integral - 1.0).abs() < 1e-12);
    }
}
