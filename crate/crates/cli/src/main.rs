//! Command-line front end: batch sampling to CSV, density evaluation,
//! verification suites, and HCIZ checks, reproducible under a fixed seed.

// `!(x > y)` guards are deliberate: they fail closed on NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod verify;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rank1horn::densities::{hciz, DensityQuery};
use rank1horn::oracle::{
    hciz_monte_carlo, sample_additive_oracle, sample_diagonal_entries,
    sample_multiplicative_oracle, sample_projection_oracle, sample_quadratic_form_oracle,
    sample_quadratic_form_secular,
};
use rank1horn::secular::{
    sample_additive_secular, sample_multiplicative_secular, sample_projection_secular,
};
use rank1horn::{AngularSpectrum, Error, Field, RngState, SpectrumSpec};
use rayon::prelude::*;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::f64::consts::TAU;

#[derive(Parser)]
#[command(
    name = "rank1horn",
    version,
    about = "Samplers, closed-form densities, and verification for rank-one randomized eigenvalue ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw eigenvalue samples and write them as CSV
    Sample(SampleArgs),
    /// Evaluate a closed-form density at one point
    Density(DensityArgs),
    /// Run verification suites; one JSON report per line, exit 4 on failure
    Verify(VerifyArgs),
    /// Evaluate the HCIZ integral, optionally with a Monte Carlo check
    Hciz(HcizArgs),
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum CaseArg {
    Additive,
    Projection,
    Multiplicative,
    Quadform,
    Diag,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FieldArg {
    Real,
    Complex,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::Real => Field::Real,
            FieldArg::Complex => Field::Complex,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Secular,
    Oracle,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum TestArg {
    Ks,
    Normalization,
    Roundtrip,
    Jacobian,
    Constraints,
    All,
}

#[derive(Args)]
struct SampleArgs {
    /// Which ensemble to sample
    #[arg(long, value_enum)]
    case: CaseArg,
    /// Spectrum as inline JSON ({"values":[...],"multiplicities":[...]} or
    /// a bare array) or a path to a JSON file; angles in radians
    #[arg(long)]
    spectrum: String,
    /// Rank-one shift for the additive case
    #[arg(long)]
    b: Option<f64>,
    /// Rotation phase for the multiplicative case, in (0, 2pi)
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
    field: FieldArg,
    #[arg(long, value_enum, default_value_t = MethodArg::Secular)]
    method: MethodArg,
    /// Number of rows to draw
    #[arg(long)]
    n: usize,
    /// RNG seed; falls back to RANK1HORN_SEED, then 0
    #[arg(long)]
    seed: Option<u64>,
    /// Base RNG stream id; row i uses stream base + i
    #[arg(long, default_value_t = 0)]
    streams: u64,
    /// Worker threads; output is identical for every choice
    #[arg(long)]
    threads: Option<usize>,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DensityArgs {
    #[arg(long, value_enum)]
    case: CaseArg,
    #[arg(long)]
    spectrum: String,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, value_enum, default_value_t = FieldArg::Complex)]
    field: FieldArg,
    /// Evaluation point: comma-separated free coordinates
    #[arg(long)]
    at: String,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value_t = TestArg::All)]
    test: TestArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Draws per distribution test
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HcizArgs {
    /// First eigenvalue list, comma separated
    #[arg(long)]
    x: String,
    /// Second eigenvalue list, comma separated
    #[arg(long)]
    y: String,
    /// Also print a Monte Carlo estimate from this many Haar draws
    #[arg(long)]
    mc: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Run(Error),
    Io(std::io::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Run(_) | Failure::Io(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "{m}"),
            Failure::Run(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        // malformed problem statements are argument errors, not numerics
        match e {
            Error::InvalidInput(_)
            | Error::DuplicateEigenvalue(..)
            | Error::NonPositiveMultiplicity
            | Error::OrderViolation
            | Error::NonPositiveParameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sample(args) => cmd_sample(args),
        Command::Density(args) => cmd_density(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Hciz(args) => cmd_hciz(args),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

#[derive(serde::Deserialize)]
struct SpectrumInput {
    values: Vec<f64>,
    #[serde(default)]
    multiplicities: Option<Vec<usize>>,
}

/// Accepts inline JSON or a file path holding the same JSON.
fn parse_spectrum(text: &str) -> Result<SpectrumInput, Failure> {
    let body = text.trim();
    let owned;
    let json = if body.starts_with('{') || body.starts_with('[') {
        body
    } else {
        owned = std::fs::read_to_string(body)
            .map_err(|e| usage(format!("cannot read spectrum file {body}: {e}")))?;
        owned.trim_start().trim_end()
    };
    if json.starts_with('[') {
        let values: Vec<f64> = serde_json::from_str(json)
            .map_err(|e| usage(format!("bad spectrum JSON: {e}")))?;
        Ok(SpectrumInput {
            values,
            multiplicities: None,
        })
    } else {
        serde_json::from_str(json).map_err(|e| usage(format!("bad spectrum JSON: {e}")))
    }
}

fn real_spectrum(input: SpectrumInput) -> Result<SpectrumSpec, Failure> {
    let mults = input
        .multiplicities
        .unwrap_or_else(|| vec![1; input.values.len()]);
    SpectrumSpec::sorted(input.values, mults).map_err(|e| usage(format!("bad spectrum: {e}")))
}

fn angular_spectrum(input: SpectrumInput) -> Result<AngularSpectrum, Failure> {
    let mults = input
        .multiplicities
        .unwrap_or_else(|| vec![1; input.values.len()]);
    if mults.len() != input.values.len() {
        return Err(usage("angles and multiplicities must have equal length"));
    }
    let mut pairs: Vec<(f64, usize)> = input.values.into_iter().zip(mults).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (angles, mults): (Vec<f64>, Vec<usize>) = pairs.into_iter().unzip();
    AngularSpectrum::new(angles, mults).map_err(|e| usage(format!("bad angular spectrum: {e}")))
}

fn parse_floats(text: &str, what: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| usage(format!("bad {what} value '{t}': {e}")))
        })
        .collect()
}

enum Ensemble {
    Additive {
        spec: SpectrumSpec,
        b: f64,
        field: Field,
    },
    Projection {
        spec: SpectrumSpec,
        field: Field,
    },
    Multiplicative {
        spec: AngularSpectrum,
        phi: f64,
    },
    QuadForm {
        spec: SpectrumSpec,
        field: Field,
    },
    Diag {
        spec: SpectrumSpec,
    },
}

impl Ensemble {
    fn header(&self) -> String {
        let (prefix, count) = match self {
            Ensemble::Additive { spec, .. } | Ensemble::Projection { spec, .. } => {
                ("eig", spec.total_dim())
            }
            Ensemble::Multiplicative { spec, .. } => ("angle", spec.total_dim()),
            Ensemble::QuadForm { .. } => ("x", 1),
            Ensemble::Diag { spec } => ("x", spec.total_dim()),
        };
        let mut h = String::from("sample_index");
        for k in 1..=count {
            h.push_str(&format!(",{prefix}_{k}"));
        }
        h
    }

    fn draw(&self, method: MethodArg, rng: &mut RngState) -> rank1horn::Result<Vec<f64>> {
        match self {
            Ensemble::Additive { spec, b, field } => {
                let s = match method {
                    MethodArg::Secular => sample_additive_secular(spec, *b, *field, rng)?,
                    MethodArg::Oracle => sample_additive_oracle(spec, *b, *field, rng)?,
                };
                Ok(s.full_spectrum())
            }
            Ensemble::Projection { spec, field } => {
                let s = match method {
                    MethodArg::Secular => sample_projection_secular(spec, *field, rng)?,
                    MethodArg::Oracle => sample_projection_oracle(spec, *field, rng)?,
                };
                Ok(s.full_spectrum())
            }
            Ensemble::Multiplicative { spec, phi } => {
                let s = match method {
                    MethodArg::Secular => sample_multiplicative_secular(spec, *phi, rng)?,
                    MethodArg::Oracle => sample_multiplicative_oracle(spec, *phi, rng)?,
                };
                Ok(s.full_spectrum())
            }
            Ensemble::QuadForm { spec, field } => {
                let v = match method {
                    MethodArg::Secular => sample_quadratic_form_secular(spec, *field, rng)?,
                    MethodArg::Oracle => sample_quadratic_form_oracle(spec, *field, rng)?,
                };
                Ok(vec![v])
            }
            Ensemble::Diag { spec } => Ok(sample_diagonal_entries(spec, rng)?.eigenvalues),
        }
    }
}

fn build_ensemble(
    case: CaseArg,
    spectrum: &str,
    b: Option<f64>,
    phi: Option<f64>,
    field: FieldArg,
    method: MethodArg,
) -> Result<Ensemble, Failure> {
    let input = parse_spectrum(spectrum)?;
    match case {
        CaseArg::Additive => {
            let b = b.ok_or_else(|| usage("--case additive requires --b"))?;
            if !(b > 0.0) || !b.is_finite() {
                return Err(usage(format!("--b must be a positive real, got {b}")));
            }
            Ok(Ensemble::Additive {
                spec: real_spectrum(input)?,
                b,
                field: field.into(),
            })
        }
        CaseArg::Projection => Ok(Ensemble::Projection {
            spec: real_spectrum(input)?,
            field: field.into(),
        }),
        CaseArg::Multiplicative => {
            let phi = phi.ok_or_else(|| usage("--case multiplicative requires --phi"))?;
            if !(phi > 0.0 && phi < TAU) {
                return Err(usage(format!("--phi must lie in (0, 2pi), got {phi}")));
            }
            if field == FieldArg::Real {
                return Err(usage(
                    "the multiplicative ensemble is defined over the complex field only",
                ));
            }
            Ok(Ensemble::Multiplicative {
                spec: angular_spectrum(input)?,
                phi,
            })
        }
        CaseArg::Quadform => Ok(Ensemble::QuadForm {
            spec: real_spectrum(input)?,
            field: field.into(),
        }),
        CaseArg::Diag => {
            if method == MethodArg::Secular {
                return Err(usage(
                    "--case diag has no secular route; use --method oracle",
                ));
            }
            Ok(Ensemble::Diag {
                spec: real_spectrum(input)?,
            })
        }
    }
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<ExitCode, Failure> {
    if args.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let ens = build_ensemble(
        args.case,
        &args.spectrum,
        args.b,
        args.phi,
        args.field,
        args.method,
    )?;
    let seed = args.seed.unwrap_or_else(RngState::seed_from_env);
    let method = args.method;
    let draw_all = || -> Result<Vec<String>, Error> {
        (0..args.n)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngState::with_stream(seed, args.streams + i as u64);
                let vals = ens.draw(method, &mut rng)?;
                let mut row = i.to_string();
                for v in vals {
                    row.push(',');
                    row.push_str(&format!("{v:.16e}"));
                }
                Ok(row)
            })
            .collect()
    };
    let rows = match args.threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| usage(format!("cannot build thread pool: {e}")))?;
            pool.install(draw_all)?
        }
        None => draw_all()?,
    };
    let mut content = ens.header();
    content.push('\n');
    for row in rows {
        content.push_str(&row);
        content.push('\n');
    }
    write_output(&args.out, &content)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_density(args: DensityArgs) -> Result<ExitCode, Failure> {
    let input = parse_spectrum(&args.spectrum)?;
    let point = parse_floats(&args.at, "--at")?;
    let query = match args.case {
        CaseArg::Additive => {
            let b = args.b.ok_or_else(|| usage("--case additive requires --b"))?;
            DensityQuery::Additive {
                spectrum: real_spectrum(input)?,
                field: args.field.into(),
                shift: b,
                point,
            }
        }
        CaseArg::Projection => DensityQuery::Projection {
            spectrum: real_spectrum(input)?,
            field: args.field.into(),
            point,
        },
        CaseArg::Multiplicative => {
            let phi = args
                .phi
                .ok_or_else(|| usage("--case multiplicative requires --phi"))?;
            DensityQuery::Multiplicative {
                spectrum: angular_spectrum(input)?,
                phase: phi,
                point,
            }
        }
        CaseArg::Quadform => {
            if point.len() != 1 {
                return Err(usage("--case quadform takes a single --at value"));
            }
            DensityQuery::QuadraticForm {
                spectrum: real_spectrum(input)?,
                point: point[0],
            }
        }
        CaseArg::Diag => {
            if point.len() != 2 {
                return Err(usage(
                    "--case diag takes two --at values (the two largest entries)",
                ));
            }
            DensityQuery::DiagonalEntries {
                spectrum: real_spectrum(input)?,
                point: (point[0], point[1]),
            }
        }
    };
    let value = query.evaluate()?;
    println!("{value:.14e}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_hciz(args: HcizArgs) -> Result<ExitCode, Failure> {
    let x = parse_floats(&args.x, "--x")?;
    let y = parse_floats(&args.y, "--y")?;
    let value = hciz(&x, &y)?;
    println!("{value:.14e}");
    if let Some(draws) = args.mc {
        if draws == 0 {
            return Err(usage("--mc must be at least 1"));
        }
        let seed = args.seed.unwrap_or_else(RngState::seed_from_env);
        let mut rng = RngState::new(seed);
        let (mean, se) = hciz_monte_carlo(&x, &y, draws, &mut rng)?;
        println!("{mean:.14e} {se:.6e}");
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode, Failure> {
    if args.n < 100 {
        return Err(usage("--n must be at least 100 for meaningful tests"));
    }
    let seed = args.seed.unwrap_or_else(RngState::seed_from_env);
    let reports = verify::run_suite(args.test, seed, args.n)?;
    let mut content = String::new();
    let mut all_pass = true;
    for r in &reports {
        all_pass &= r.pass;
        content.push_str(&r.to_json_line());
        content.push('\n');
    }
    write_output(&args.out, &content)?;
    if all_pass {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(4))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_parses_object_and_bare_array() {
        let s = parse_spectrum(r#"{"values":[2,0],"multiplicities":[3,1]}"#).unwrap();
        assert_eq!(s.values, vec![2.0, 0.0]);
        assert_eq!(s.multiplicities, Some(vec![3, 1]));
        let s = parse_spectrum("[1, 0.5, -1]").unwrap();
        assert_eq!(s.values, vec![1.0, 0.5, -1.0]);
        assert_eq!(s.multiplicities, None);
        assert!(parse_spectrum("/nonexistent/path.json").is_err());
    }

    #[test]
    fn angular_input_is_sorted_ascending() {
        let input = SpectrumInput {
            values: vec![4.0, 0.5, 2.0],
            multiplicities: Some(vec![1, 2, 1]),
        };
        let spec = angular_spectrum(input).unwrap();
        assert_eq!(spec.angles(), &[0.5, 2.0, 4.0]);
        assert_eq!(spec.multiplicities(), &[2, 1, 1]);
    }

    #[test]
    fn ensemble_validation_rejects_bad_combinations() {
        let check = |case, spectrum, b, phi, field, method| {
            matches!(
                build_ensemble(case, spectrum, b, phi, field, method),
                Err(Failure::Usage(_))
            )
        };
        assert!(check(
            CaseArg::Additive,
            "[1,0]",
            None,
            None,
            FieldArg::Complex,
            MethodArg::Secular
        ));
        assert!(check(
            CaseArg::Multiplicative,
            "[0,3]",
            None,
            Some(1.0),
            FieldArg::Real,
            MethodArg::Secular
        ));
        assert!(check(
            CaseArg::Multiplicative,
            "[0,3]",
            None,
            Some(7.0),
            FieldArg::Complex,
            MethodArg::Secular
        ));
        assert!(check(
            CaseArg::Diag,
            "[1,0]",
            None,
            None,
            FieldArg::Complex,
            MethodArg::Secular
        ));
    }

    #[test]
    fn headers_name_columns_by_case() {
        let ens = build_ensemble(
            CaseArg::Additive,
            r#"{"values":[1,0],"multiplicities":[2,1]}"#,
            Some(1.0),
            None,
            FieldArg::Complex,
            MethodArg::Secular,
        )
        .unwrap();
        assert_eq!(ens.header(), "sample_index,eig_1,eig_2,eig_3");
        let ens = build_ensemble(
            CaseArg::Quadform,
            "[1,0]",
            None,
            None,
            FieldArg::Complex,
            MethodArg::Secular,
        )
        .unwrap();
        assert_eq!(ens.header(), "sample_index,x_1");
        let ens = build_ensemble(
            CaseArg::Multiplicative,
            "[0.5,2.5]",
            None,
            Some(1.0),
            FieldArg::Complex,
            MethodArg::Oracle,
        )
        .unwrap();
        assert_eq!(ens.header(), "sample_index,angle_1,angle_2");
    }
}
