//! Command-line front end.
//!
//! Exit codes: 0 success, 1 a must-pass verification failed, 2 usage,
//! configuration or domain error.

use std::ffi::OsString;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bounds::{bound_report, min_uncertainty_x, tau_upper, theta_upper, TauConvention};
use crate::constants::{load_config, wavenumber, Constants, Experiment};
use crate::fdcheck::{compare_with_airy, Grid1D, DEFAULT_POINTS, DEFAULT_X_MAX};
use crate::reps::{run_suite, Suite};
use crate::spectrum::{spectrum_table, DeformationParams, NeglectPolicy};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "gqwell",
    version,
    about = "Gravitational quantum well in deformed Heisenberg algebras"
)]
struct Cli {
    /// Constants/experiment file (`key = value` lines); defaults if absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output layout.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Csv,
    Kv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Energy levels with the deformation shifts (CSV by default).
    Spectrum(SpectrumArgs),
    /// Upper bounds on theta, tau and the minimal length.
    Bounds(BoundsArgs),
    /// Exact checks of the commutation relations, Jacobi identity and hermiticity.
    Verify(VerifyArgs),
    /// Minimal position uncertainty theta*sqrt(tau)*sqrt(1 + tau*<y>^2).
    Minlength(MinlengthArgs),
    /// Finite-difference eigenvalues against the Airy spectrum.
    Check(CheckArgs),
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[arg(long, default_value_t = 5)]
    nmax: u32,
    /// m^2
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    theta: f64,
    /// m^-2
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    /// Transverse wavenumber, 1/m; defaults to m*v_mean/hbar.
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ConventionArg {
    Full,
    Residual,
    Paper,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long, value_enum, default_value_t = ConventionArg::Residual)]
    tau_convention: ConventionArg,
    /// theta* for the residual convention, m^2 (default: the printed theta bound).
    #[arg(long)]
    theta_star: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SuiteArg {
    All,
    Bopp,
    Rep1,
    Rep2,
    Jacobi,
    Hermiticity,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = SuiteArg::All)]
    suite: SuiteArg,
}

#[derive(Debug, Args)]
struct MinlengthArgs {
    /// m^2; defaults to the theta bound.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// m^-2; defaults to the tau bound of --tau-convention.
    #[arg(long, allow_negative_numbers = true)]
    tau: Option<f64>,
    /// <y>, m
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    y_mean: f64,
    #[arg(long, value_enum, default_value_t = ConventionArg::Residual)]
    tau_convention: ConventionArg,
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 3)]
    levels: u32,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    points: usize,
    /// Wall position, m.
    #[arg(long, default_value_t = DEFAULT_X_MAX)]
    xmax: f64,
}

/// Parses `argv` (program name first) and runs against the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// As [`run`], writing to the given streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli, out) {
        Ok(code) => code,
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: writing output: {e}");
            EXIT_USAGE
        }
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

enum Failure {
    Usage(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

/// `%.12e` as printf writes it: signed exponent of at least two digits.
pub fn sci(x: f64) -> String {
    // no "-0" in data columns
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x:.12e}");
    match s.split_once('e') {
        Some((mantissa, exp)) => {
            let (sign, digits) = match exp.strip_prefix('-') {
                Some(d) => ('-', d),
                None => ('+', exp),
            };
            format!("{mantissa}e{sign}{digits:0>2}")
        }
        None => s,
    }
}

fn banner(out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "# gqwell {}", env!("CARGO_PKG_VERSION"))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let (c, e) = match &cli.config {
        Some(path) => load_config(path).map_err(usage)?,
        None => (Constants::default(), Experiment::default()),
    };
    match &cli.command {
        Command::Spectrum(a) => spectrum(a, cli.format.unwrap_or(Format::Csv), &c, &e, out),
        Command::Bounds(a) => bounds(a, cli.format.unwrap_or(Format::Table), &c, &e, out),
        Command::Verify(a) => verify(a, cli.format.unwrap_or(Format::Table), out),
        Command::Minlength(a) => minlength(a, cli.format.unwrap_or(Format::Kv), &c, &e, out),
        Command::Check(a) => check(a, cli.format.unwrap_or(Format::Table), &c, out),
    }
}

fn spectrum(
    a: &SpectrumArgs,
    format: Format,
    c: &Constants,
    e: &Experiment,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let p = DeformationParams::new(a.theta, a.tau).map_err(usage)?;
    let k = a.k.unwrap_or_else(|| wavenumber(c, e));
    if !k.is_finite() {
        return Err(Failure::Usage(format!("k must be finite, got {k}")));
    }
    let rows = spectrum_table(a.nmax, k, &p, c).map_err(usage)?;
    banner(out)?;
    let header = [
        "n",
        "k",
        "e_commutative_J",
        "shift_theta_J",
        "shift_tau_J",
        "e_total_J",
    ];
    let cells = |r: &crate::spectrum::SpectrumPoint| {
        [
            r.n.to_string(),
            sci(r.k),
            sci(r.e_commutative),
            sci(r.shift_theta),
            sci(r.shift_tau),
            sci(r.e_total),
        ]
    };
    match format {
        Format::Csv => {
            writeln!(out, "{}", header.join(","))?;
            for r in &rows {
                writeln!(out, "{}", cells(r).join(","))?;
            }
        }
        Format::Table => {
            writeln!(
                out,
                "{:>3} {:>19} {:>19} {:>19} {:>19} {:>19}",
                header[0], header[1], header[2], header[3], header[4], header[5]
            )?;
            for r in &rows {
                let c = cells(r);
                writeln!(
                    out,
                    "{:>3} {:>19} {:>19} {:>19} {:>19} {:>19}",
                    c[0], c[1], c[2], c[3], c[4], c[5]
                )?;
            }
        }
        Format::Kv => {
            for r in &rows {
                let c = cells(r);
                for (key, value) in header.iter().zip(&c).skip(1) {
                    writeln!(out, "n{}.{key}={value}", r.n)?;
                }
            }
        }
    }
    writeln!(out, "# neglect policy:")?;
    for line in NeglectPolicy::default().to_string().lines() {
        writeln!(out, "#   {line}")?;
    }
    Ok(EXIT_OK)
}

fn convention(arg: ConventionArg, theta_star: Option<f64>) -> TauConvention {
    match arg {
        ConventionArg::Full => TauConvention::FullBudget,
        ConventionArg::Paper => TauConvention::Paper,
        ConventionArg::Residual => match theta_star {
            Some(t) => TauConvention::Residual(t),
            None => TauConvention::residual_default(),
        },
    }
}

fn bounds(
    a: &BoundsArgs,
    format: Format,
    c: &Constants,
    e: &Experiment,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let report = bound_report(c, e, convention(a.tau_convention, a.theta_star)).map_err(usage)?;
    let kv = report.kv_lines();
    banner(out)?;
    match format {
        Format::Table => {
            let rows = [
                ("theta bound", report.theta_max, "m^2"),
                ("tau bound", report.tau_max, "m^-2"),
                ("  full budget", report.tau_full_budget, "m^-2"),
                ("  residual", report.tau_residual, "m^-2"),
                ("  printed", crate::bounds::TAU_PAPER, "m^-2"),
                ("theta coefficient", report.coeff_theta, "J/m^2"),
                ("tau coefficient", report.coeff_tau, "J m^2"),
                ("minimal length bound", report.min_length_bound, "m"),
            ];
            for (name, value, unit) in rows {
                writeln!(out, "{name:<22} {:>19} {unit}", sci(value))?;
            }
            writeln!(out, "{:<22} {}", "tau convention", report.tau_convention)?;
            if report.convention_gap {
                writeln!(out, "# printed tau matches neither derivable convention")?;
            }
            writeln!(out)?;
            for (k, v) in &kv {
                writeln!(out, "{k}={v}")?;
            }
        }
        Format::Kv => {
            for (k, v) in &kv {
                writeln!(out, "{k}={v}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "key,value")?;
            for (k, v) in &kv {
                writeln!(out, "{k},{v}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs, format: Format, out: &mut dyn Write) -> Result<i32, Failure> {
    let suite = match a.suite {
        SuiteArg::All => Suite::All,
        SuiteArg::Bopp => Suite::Bopp,
        SuiteArg::Rep1 => Suite::Rep1,
        SuiteArg::Rep2 => Suite::Rep2,
        SuiteArg::Jacobi => Suite::Jacobi,
        SuiteArg::Hermiticity => Suite::Hermiticity,
    };
    let sections = run_suite(suite).map_err(usage)?;
    let mut failed = false;
    banner(out)?;
    if format == Format::Csv {
        writeln!(out, "section,relation,kind,status,residual")?;
    }
    for s in &sections {
        let kind = if s.must_pass {
            "must-pass"
        } else {
            "report-only"
        };
        if format == Format::Table {
            writeln!(out, "{} [{kind}]", s.report.title)?;
        }
        for claim in &s.report.claims {
            let status = if claim.passed { "PASS" } else { "FAIL" };
            failed |= s.must_pass && !claim.passed;
            match format {
                Format::Table => writeln!(
                    out,
                    "  {:<40} {status}  residual: {}",
                    claim.label, claim.residual
                )?,
                Format::Csv => writeln!(
                    out,
                    "\"{}\",\"{}\",{kind},{status},\"{}\"",
                    s.report.title, claim.label, claim.residual
                )?,
                Format::Kv => writeln!(
                    out,
                    "{} | {}={status} ({kind}) residual={}",
                    s.report.title, claim.label, claim.residual
                )?,
            }
        }
    }
    let must: Vec<_> = sections.iter().filter(|s| s.must_pass).collect();
    let passed = must
        .iter()
        .flat_map(|s| &s.report.claims)
        .filter(|c| c.passed)
        .count();
    let total = must.iter().map(|s| s.report.claims.len()).sum::<usize>();
    writeln!(out, "# must-pass: {passed}/{total} claims hold")?;
    Ok(if failed { EXIT_VERIFY_FAILED } else { EXIT_OK })
}

fn minlength(
    a: &MinlengthArgs,
    format: Format,
    c: &Constants,
    e: &Experiment,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let theta = a.theta.unwrap_or_else(|| theta_upper(c, e));
    let tau = match a.tau {
        Some(t) => t,
        None => tau_upper(c, e, convention(a.tau_convention, None)).map_err(usage)?,
    };
    let length = min_uncertainty_x(theta, tau, a.y_mean).map_err(usage)?;
    let kv = [
        ("theta", sci(theta)),
        ("tau", sci(tau)),
        ("y_mean", sci(a.y_mean)),
        ("min_length", sci(length)),
    ];
    banner(out)?;
    match format {
        Format::Csv => {
            writeln!(out, "theta,tau,y_mean,min_length")?;
            let values: Vec<_> = kv.iter().map(|(_, v)| v.as_str()).collect();
            writeln!(out, "{}", values.join(","))?;
        }
        Format::Kv | Format::Table => {
            for (k, v) in kv {
                writeln!(out, "{k}={v}")?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn check(
    a: &CheckArgs,
    format: Format,
    c: &Constants,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let grid = Grid1D::new(a.xmax, a.points).map_err(usage)?;
    let rows = compare_with_airy(a.levels, &grid, c).map_err(usage)?;
    banner(out)?;
    writeln!(
        out,
        "# x_max={} points={} spacing={}",
        sci(grid.x_max()),
        grid.n_points(),
        sci(grid.spacing())
    )?;
    match format {
        Format::Csv | Format::Kv => {
            writeln!(out, "n,fd_J,airy_J,rel_error")?;
            for r in &rows {
                writeln!(
                    out,
                    "{},{},{},{}",
                    r.n,
                    sci(r.fd),
                    sci(r.airy),
                    sci(r.rel_error)
                )?;
            }
        }
        Format::Table => {
            writeln!(
                out,
                "{:>3} {:>19} {:>19} {:>19}",
                "n", "fd_J", "airy_J", "rel_error"
            )?;
            for r in &rows {
                writeln!(
                    out,
                    "{:>3} {:>19} {:>19} {:>19}",
                    r.n,
                    sci(r.fd),
                    sci(r.airy),
                    sci(r.rel_error)
                )?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("gqwell").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn printf_style_scientific() {
        assert_eq!(sci(2.26e-31), "2.260000000000e-31");
        assert_eq!(sci(1.028e8), "1.028000000000e+08");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(-0.0), "0.000000000000e+00");
        assert_eq!(sci(-6.55e-32), "-6.550000000000e-32");
        assert_eq!(sci(1e100), "1.000000000000e+100");
    }

    #[test]
    fn spectrum_single_row() {
        let (code, out, _) = run_capture(&[
            "spectrum", "--nmax", "1", "--theta", "0", "--tau", "0", "--k", "0",
        ]);
        assert_eq!(code, 0);
        let mut lines = out.lines().filter(|l| !l.starts_with('#'));
        assert_eq!(
            lines.next().unwrap(),
            "n,k,e_commutative_J,shift_theta_J,shift_tau_J,e_total_J"
        );
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 6);
        let e: f64 = row[5].parse().unwrap();
        assert!(((e - 2.26e-31) / 2.26e-31).abs() < 0.005);
        assert!(lines.next().is_none());
        assert!(out.contains("# neglect policy:"));
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run_capture(&["frobnicate"]).0, 2);
        assert_eq!(run_capture(&["spectrum", "--bogus"]).0, 2);
        assert_eq!(run_capture(&["spectrum", "--theta", "-1"]).0, 2);
        assert_eq!(run_capture(&["spectrum", "--nmax", "0"]).0, 2);
        assert_eq!(run_capture(&["check", "--points", "10"]).0, 2);
        assert_eq!(
            run_capture(&["check", "--levels", "3", "--xmax", "6e-5"]).0,
            2
        );
        assert_eq!(run_capture(&["bounds", "--theta-star", "1e-12"]).0, 2);
        let (code, _, err) = run_capture(&["bounds", "--config", "/nonexistent/gqwell.conf"]);
        assert_eq!(code, 2);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn help_is_success() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("spectrum"));
    }

    #[test]
    fn bounds_kv_block() {
        let (code, out, _) =
            run_capture(&["bounds", "--tau-convention", "paper", "--format", "kv"]);
        assert_eq!(code, 0);
        let get = |key: &str| {
            out.lines()
                .find_map(|l| l.strip_prefix(&format!("{key}=")))
                .unwrap()
                .to_string()
        };
        let l: f64 = get("min_length_bound").parse().unwrap();
        assert!(((l - 1.87e-9) / 1.87e-9).abs() < 0.05);
        assert_eq!(get("tau_convention"), "paper");
        assert_eq!(get("tau_convention_gap"), "true");
        for key in ["theta_max", "tau_max", "coeff_theta", "coeff_tau"] {
            get(key);
        }
    }

    #[test]
    fn minlength_defaults() {
        let (code, out, _) = run_capture(&["minlength", "--theta", "7.74e-14", "--tau", "6.26e8"]);
        assert_eq!(code, 0);
        assert!(out.contains("min_length=1.93"));
        let (code, _, _) = run_capture(&["minlength", "--tau", "-1"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn check_table() {
        let (code, out, _) = run_capture(&[
            "check", "--levels", "2", "--points", "1000", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let rows: Vec<_> = out.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "n,fd_J,airy_J,rel_error");
        assert_eq!(rows.len(), 3);
    }
}
