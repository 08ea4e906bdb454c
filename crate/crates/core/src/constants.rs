//! Physical constants, the neutron measurement, and the `key = value` config format.
//!
//! Everything is SI. Defaults are the neutron values used for the bound
//! arithmetic, including the rounded `hbar = 1.059e-34 J s` (CODATA is
//! `1.054571817e-34`, available through a config override).

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

/// Reduced Planck constant used by default, J s.
pub const HBAR_DEFAULT: f64 = 1.059e-34;
/// CODATA 2018 reduced Planck constant, J s.
pub const HBAR_CODATA: f64 = 1.054_571_817e-34;
/// Neutron mass, kg.
pub const NEUTRON_MASS: f64 = 1.675e-27;
/// Standard gravitational acceleration used by default, m/s^2.
pub const G_ACCEL_DEFAULT: f64 = 9.81;
/// Experimental resolution of the first gravitational level, J.
pub const DELTA_E1_EXP: f64 = 6.55e-32;
/// Mean horizontal neutron speed, m/s.
pub const V_MEAN_DEFAULT: f64 = 6.5;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, found {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given more than once")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: value for `{key}` is not a number: {value:?}")]
    BadNumber {
        line: usize,
        key: String,
        value: String,
    },
    #[error("invalid {field} = {value}: must be finite and strictly positive")]
    Invalid { field: &'static str, value: f64 },
    #[error("invalid {field} = {value}: must be finite and non-negative")]
    Negative { field: &'static str, value: f64 },
}

/// Fundamental constants entering every energy formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Particle mass, kg.
    pub mass: f64,
    /// Gravitational acceleration, m/s^2.
    pub g_accel: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Constants {
            hbar: HBAR_DEFAULT,
            mass: NEUTRON_MASS,
            g_accel: G_ACCEL_DEFAULT,
        }
    }
}

impl Constants {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("hbar", self.hbar)?;
        positive("mass", self.mass)?;
        positive("g_accel", self.g_accel)
    }

    /// Gravitational length scale `(hbar^2 / (2 m^2 g))^(1/3)`, m.
    pub fn length_scale(&self) -> f64 {
        (self.hbar * self.hbar / (2.0 * self.mass * self.mass * self.g_accel)).cbrt()
    }

    /// Gravitational energy scale `(m g^2 hbar^2 / 2)^(1/3)`, J.
    ///
    /// Equals `m g` times [`Constants::length_scale`].
    pub fn energy_scale(&self) -> f64 {
        (self.mass * self.g_accel * self.g_accel * self.hbar * self.hbar / 2.0).cbrt()
    }
}

/// The measurement the bounds are confronted with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Experiment {
    /// Energy resolution of the first level, J.
    pub delta_e1_exp: f64,
    /// Mean horizontal speed, m/s. Zero is allowed and gives `k = 0`.
    pub v_mean: f64,
}

impl Default for Experiment {
    fn default() -> Self {
        Experiment {
            delta_e1_exp: DELTA_E1_EXP,
            v_mean: V_MEAN_DEFAULT,
        }
    }
}

impl Experiment {
    pub fn validate(&self) -> Result<(), ConfigError> {
        positive("delta_e1_exp", self.delta_e1_exp)?;
        if !(self.v_mean.is_finite() && self.v_mean >= 0.0) {
            return Err(ConfigError::Negative {
                field: "v_mean",
                value: self.v_mean,
            });
        }
        Ok(())
    }
}

fn positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Invalid { field, value })
    }
}

/// Transverse wavenumber `k = m <v_y> / hbar`, 1/m.
pub fn wavenumber(c: &Constants, e: &Experiment) -> f64 {
    c.mass * e.v_mean / c.hbar
}

const KEYS: [&str; 5] = ["hbar", "mass", "g_accel", "delta_e1_exp", "v_mean"];

/// Parses config text. Absent keys keep their defaults.
pub fn parse_config(text: &str) -> Result<(Constants, Experiment), ConfigError> {
    let mut c = Constants::default();
    let mut e = Experiment::default();
    let mut seen = [false; KEYS.len()];

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line,
            text: raw.to_string(),
        })?;
        let key = key.trim();
        let value = value.trim();
        let slot = KEYS
            .iter()
            .position(|k| *k == key)
            .ok_or_else(|| ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })?;
        if std::mem::replace(&mut seen[slot], true) {
            return Err(ConfigError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        let number: f64 = value.parse().map_err(|_| ConfigError::BadNumber {
            line,
            key: key.to_string(),
            value: value.to_string(),
        })?;
        match slot {
            0 => c.hbar = number,
            1 => c.mass = number,
            2 => c.g_accel = number,
            3 => e.delta_e1_exp = number,
            _ => e.v_mean = number,
        }
    }

    c.validate()?;
    e.validate()?;
    Ok((c, e))
}

pub fn load_config(path: impl AsRef<Path>) -> Result<(Constants, Experiment), ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

/// Writes every key. `f64`'s `Display` is the shortest representation that
/// parses back to the same bits, so the output round-trips exactly.
pub fn to_config_string(c: &Constants, e: &Experiment) -> String {
    let mut out = String::new();
    let values = [c.hbar, c.mass, c.g_accel, e.delta_e1_exp, e.v_mean];
    for (key, value) in KEYS.iter().zip(values) {
        let _ = writeln!(out, "{key} = {value:e}");
    }
    out
}
