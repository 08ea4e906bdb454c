//! Finite-difference eigensolver for the linear-potential well with hard
//! walls at `0` and `x_max`, used as an oracle for the Airy spectrum.
//!
//! The Hamiltonian is scaled by `hbar^2 / (2 m x_max^2)` on the unit interval,
//! giving `-d^2/du^2 + s u` with `s = 2 m^2 g x_max^3 / hbar^2`; the
//! tridiagonal matrix is diagonalized by Sturm-sequence bisection.

use thiserror::Error;

use crate::airy::{ai_prime, airy_zero, integral_ai_squared, AiryError};
use crate::constants::Constants;
use crate::spectrum::{energy_level, SpectrumError};

/// Wall position used when none is given (m). The n-th classical turning
/// point sits at `-r_n l0`, about 47 µm for n = 5 with neutron constants.
pub const DEFAULT_X_MAX: f64 = 100e-6;
pub const DEFAULT_POINTS: usize = 4000;
pub const MIN_POINTS: usize = 200;
/// Largest admissible fraction of a level's Airy probability beyond the wall.
pub const MAX_TAIL_MASS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FdError {
    #[error("grid needs at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("x_max must be finite and positive, got {0}")]
    BadExtent(f64),
    #[error("at least one level must be requested")]
    NoLevels,
    #[error(
        "x_max = {x_max:e} m is too small for level {level}: \
         {tail_mass:e} of its probability lies beyond the wall"
    )]
    GridTooSmall {
        level: u32,
        x_max: f64,
        tail_mass: f64,
    },
    #[error("level {level} requested but the grid has only {available} interior points")]
    TooManyLevels { level: u32, available: usize },
    #[error(transparent)]
    Airy(#[from] AiryError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
}

/// Uniform grid on `[0, x_max]`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    x_max: f64,
    n_points: usize,
}

impl Grid1D {
    pub fn new(x_max: f64, n_points: usize) -> Result<Self, FdError> {
        if !(x_max.is_finite() && x_max > 0.0) {
            return Err(FdError::BadExtent(x_max));
        }
        if n_points < MIN_POINTS {
            return Err(FdError::TooFewPoints(n_points));
        }
        Ok(Grid1D { x_max, n_points })
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.x_max / (self.n_points - 1) as f64
    }

    /// Same extent, spacing halved.
    pub fn refined(&self) -> Grid1D {
        Grid1D {
            x_max: self.x_max,
            n_points: 2 * self.n_points - 1,
        }
    }

    /// Fraction of level `n`'s exact (wall-free) probability beyond `x_max`.
    pub fn tail_mass(&self, n: u32, c: &Constants) -> Result<f64, FdError> {
        let r = airy_zero(n)?.value;
        let z = self.x_max / c.length_scale() + r;
        if z <= 0.0 {
            return Ok(1.0);
        }
        Ok(integral_ai_squared(z)? / ai_prime(r).powi(2))
    }

    /// Checks that levels `1..=n_levels` are unaffected by the far wall.
    /// Without gravity the problem is a box and there is nothing to check.
    pub fn validate_for(&self, n_levels: u32, c: &Constants) -> Result<(), FdError> {
        if n_levels == 0 {
            return Err(FdError::NoLevels);
        }
        let available = self.n_points - 2;
        if n_levels as usize > available {
            return Err(FdError::TooManyLevels {
                level: n_levels,
                available,
            });
        }
        if c.g_accel == 0.0 {
            return Ok(());
        }
        for n in 1..=n_levels {
            let tail_mass = self.tail_mass(n, c)?;
            if tail_mass > MAX_TAIL_MASS {
                return Err(FdError::GridTooSmall {
                    level: n,
                    x_max: self.x_max,
                    tail_mass,
                });
            }
        }
        Ok(())
    }
}

impl Default for Grid1D {
    fn default() -> Self {
        Grid1D {
            x_max: DEFAULT_X_MAX,
            n_points: DEFAULT_POINTS,
        }
    }
}

/// Scaled tridiagonal matrix: diagonal entries and the constant off-diagonal.
struct Tridiagonal {
    diag: Vec<f64>,
    off: f64,
    /// Energy of one scaled unit, J.
    unit: f64,
}

impl Tridiagonal {
    fn new(grid: &Grid1D, c: &Constants) -> Self {
        let m = grid.n_points - 2;
        let h = 1.0 / (grid.n_points - 1) as f64;
        let x = grid.x_max;
        let s = 2.0 * c.mass * c.mass * c.g_accel * x * x * x / (c.hbar * c.hbar);
        let diag = (1..=m).map(|i| 2.0 / (h * h) + s * i as f64 * h).collect();
        Tridiagonal {
            diag,
            off: -1.0 / (h * h),
            unit: c.hbar * c.hbar / (2.0 * c.mass * x * x),
        }
    }

    /// Number of eigenvalues strictly below `lambda`.
    fn count_below(&self, lambda: f64) -> usize {
        let e2 = self.off * self.off;
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            q = if i == 0 {
                d - lambda
            } else {
                d - lambda - e2 / q
            };
            if q == 0.0 {
                q = -f64::EPSILON * (d.abs() + self.off.abs());
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k`-th smallest eigenvalue (1-based) by bisection.
    fn eigenvalue(&self, k: usize) -> f64 {
        let spread = 2.0 * self.off.abs();
        let mut lo = self.diag.iter().cloned().fold(f64::INFINITY, f64::min) - spread;
        let mut hi = self.diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + spread;
        while hi - lo > 4.0 * f64::EPSILON * (lo.abs() + hi.abs()) {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an eigenvalue estimate by inverse iteration.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let shift = lambda * (1.0 + 1e-10) + 1e-12;
        let mut v = vec![1.0; self.diag.len()];
        for _ in 0..4 {
            v = self.solve_shifted(shift, &v);
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
        }
        v
    }

    /// Thomas algorithm for `(T - shift) x = rhs`.
    fn solve_shifted(&self, shift: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let e = self.off;
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut denom = self.diag[0] - shift;
        c[0] = e / denom;
        d[0] = rhs[0] / denom;
        for i in 1..n {
            denom = self.diag[i] - shift - e * c[i - 1];
            if denom == 0.0 {
                denom = f64::EPSILON * e.abs();
            }
            c[i] = e / denom;
            d[i] = (rhs[i] - e * d[i - 1]) / denom;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }
}

/// Lowest `n_levels` eigenvalues (J), ascending.
pub fn fd_eigenvalues(n_levels: u32, grid: &Grid1D, c: &Constants) -> Result<Vec<f64>, FdError> {
    grid.validate_for(n_levels, c)?;
    let t = Tridiagonal::new(grid, c);
    Ok((1..=n_levels as usize)
        .map(|k| t.eigenvalue(k) * t.unit)
        .collect())
}

/// Eigenvector of level `n` at the interior grid points, unit 2-norm.
pub fn fd_eigenvector(n: u32, grid: &Grid1D, c: &Constants) -> Result<Vec<f64>, FdError> {
    grid.validate_for(n, c)?;
    let t = Tridiagonal::new(grid, c);
    Ok(t.eigenvector(t.eigenvalue(n as usize)))
}

/// Number of discrete eigenvalues strictly below `energy` (J).
pub fn count_below(energy: f64, grid: &Grid1D, c: &Constants) -> usize {
    let t = Tridiagonal::new(grid, c);
    t.count_below(energy / t.unit)
}

/// Sign changes along a vector, skipping exact zeros.
pub fn sign_changes(v: &[f64]) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for &x in v {
        if x != 0.0 {
            if last != 0.0 && (x > 0.0) != (last > 0.0) {
                changes += 1;
            }
            last = x;
        }
    }
    changes
}

/// One row of the finite-difference vs Airy comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelCheck {
    pub n: u32,
    pub fd: f64,
    pub airy: f64,
    pub rel_error: f64,
}

pub fn compare_with_airy(
    n_levels: u32,
    grid: &Grid1D,
    c: &Constants,
) -> Result<Vec<LevelCheck>, FdError> {
    let fd = fd_eigenvalues(n_levels, grid, c)?;
    fd.into_iter()
        .zip(1..)
        .map(|(fd, n)| {
            let airy = energy_level(n, 0.0, c)?;
            Ok(LevelCheck {
                n,
                fd,
                airy,
                rel_error: ((fd - airy) / airy).abs(),
            })
        })
        .collect()
}
