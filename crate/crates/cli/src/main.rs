//! `o21`: batch front-end for sector spectra, identity checks, CSCO labels
//! and o(2,1) series classification.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use o21_core::algebra::verify_algebra_capped;
use o21_core::classify::{classify, RepParams, DEFAULT_INT_TOL};
use o21_core::csco::{verify_csco_capped, CscoReport};
use o21_core::fock::check_sector_size;
use o21_core::spectral::{degeneracy, sector_spectrum_capped, SpectrumReport, DEFAULT_EIGEN_TOL};
use o21_core::{Error, DEFAULT_DIMENSION_CAP};

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_CAP: u8 = 3;

const DEFAULT_IDENTITY_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "o21", version, about = "Angular momentum spectra in q dimensions via o(2,1)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonalize L² on every sector n = 0..=n_max.
    Spectrum(RunArgs),
    /// Check the operator identities on sectors 0..=n_max.
    VerifyAlgebra(RunArgs),
    /// Label each sector with the chain L_q², …, L_3², L_12.
    Csco(RunArgs),
    /// Classify an o(2,1) representation (Φ, E₀).
    Classify(ClassifyArgs),
    /// Tabulate SO(q') irrep dimensions for 2 ≤ q' ≤ q, ℓ ≤ n_max.
    DegeneracyTable(RunArgs),
}

#[derive(Args, Clone, Debug)]
struct RunArgs {
    /// Number of spatial dimensions (bosonic modes).
    #[arg(long)]
    q: usize,
    #[arg(long, default_value_t = 8)]
    n_max: usize,
    /// Defaults to 1e-10 for identities and 1e-8 for eigenvalues.
    #[arg(long)]
    tol: Option<f64>,
    /// Largest sector dimension allowed.
    #[arg(long, env = "O21_CAP", default_value_t = DEFAULT_DIMENSION_CAP)]
    cap: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, env = "O21_WORKERS", default_value_t = 0)]
    workers: usize,
}

#[derive(Args, Clone, Debug)]
struct ClassifyArgs {
    #[arg(long, allow_negative_numbers = true)]
    phi: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    phi_im: f64,
    #[arg(long, allow_negative_numbers = true)]
    e0: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 0.0)]
    e0_im: f64,
    #[arg(long, default_value_t = DEFAULT_INT_TOL)]
    int_tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// Validated settings for one run.
#[derive(Debug, Clone)]
struct RunConfig {
    q: usize,
    n_max: usize,
    tol: f64,
    dimension_cap: usize,
    output_format: Format,
    output_path: Option<PathBuf>,
    parallel_workers: usize,
}

enum Failure {
    Config(String),
    Cap(String),
    Fail(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::DimensionCap { .. } | Error::Overflow(_) => Failure::Cap(e.to_string()),
            Error::InvalidDimension { .. }
            | Error::InvalidTolerance(_)
            | Error::NMaxTooSmall { .. }
            | Error::ModeOutOfRange { .. }
            | Error::InvalidGenerator { .. }
            | Error::InvalidSubdimension { .. } => Failure::Config(e.to_string()),
            _ => Failure::Fail(e.to_string()),
        }
    }
}

impl RunConfig {
    fn from_args(args: &RunArgs, default_tol: f64, min_q: usize) -> Result<Self, Failure> {
        if args.q < min_q {
            return Err(Failure::Config(format!("--q must be at least {min_q}, got {}", args.q)));
        }
        let tol = args.tol.unwrap_or(default_tol);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(Failure::Config(format!("--tol must be positive, got {tol}")));
        }
        if args.cap < 1 {
            return Err(Failure::Config("--cap must be at least 1".into()));
        }
        Ok(Self {
            q: args.q,
            n_max: args.n_max,
            tol,
            dimension_cap: args.cap,
            output_format: args.format,
            output_path: args.out.clone(),
            parallel_workers: args.workers,
        })
    }

    /// Reject the run up front if any sector up to `top` exceeds the cap.
    fn check_cap(&self, top: usize) -> Result<(), Failure> {
        for n in 0..=top {
            check_sector_size(self.q, n, self.dimension_cap)?;
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool, Failure> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallel_workers)
            .build()
            .map_err(|e| Failure::Fail(format!("thread pool: {e}")))
    }
}

fn emit(path: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| Failure::Fail(format!("stdout: {e}")))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn verdict(pass: bool) -> Result<(), Failure> {
    if pass {
        Ok(())
    } else {
        Err(Failure::Fail("one or more checks failed".into()))
    }
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<(), Failure> {
    cfg.check_cap(cfg.n_max)?;
    let reports: Vec<SpectrumReport> = cfg.pool()?.install(|| {
        use rayon::prelude::*;
        (0..=cfg.n_max)
            .into_par_iter()
            .map(|n| sector_spectrum_capped(cfg.q, n, cfg.tol, cfg.dimension_cap))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let text = match cfg.output_format {
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut s = String::from("q,n,ell,eigenvalue,multiplicity,expected_multiplicity,max_residual,pass\n");
            for r in &reports {
                for l in &r.lines {
                    s += &format!(
                        "{},{},{},{},{},{},{:e},{}\n",
                        r.q, r.n, l.ell, l.eigenvalue, l.multiplicity, l.expected_multiplicity, l.max_residual, r.pass
                    );
                }
            }
            s
        }
    };
    emit(cfg.output_path.as_ref(), &text)?;
    verdict(reports.iter().all(|r| r.pass))
}

fn cmd_verify_algebra(cfg: &RunConfig) -> Result<(), Failure> {
    if cfg.n_max < 2 {
        return Err(Failure::Config(format!("--n-max must be at least 2, got {}", cfg.n_max)));
    }
    cfg.check_cap(cfg.n_max + 2)?;
    let report = cfg
        .pool()?
        .install(|| verify_algebra_capped(cfg.q, cfg.n_max, cfg.tol, cfg.dimension_cap))?;
    let text = match cfg.output_format {
        Format::Json => to_json(&report),
        Format::Csv => {
            let mut s = String::from("identity,n,residual,pass\n");
            for c in &report.identities {
                for r in &c.sectors {
                    s += &format!("\"{}\",{},{:e},{}\n", c.name, r.n, r.residual, r.residual < report.tol);
                }
            }
            s
        }
    };
    emit(cfg.output_path.as_ref(), &text)?;
    verdict(report.pass)
}

fn cmd_csco(cfg: &RunConfig) -> Result<(), Failure> {
    cfg.check_cap(cfg.n_max)?;
    let reports: Vec<CscoReport> = cfg.pool()?.install(|| {
        use rayon::prelude::*;
        (0..=cfg.n_max)
            .into_par_iter()
            .map(|n| verify_csco_capped(cfg.q, n, cfg.tol, cfg.dimension_cap))
            .collect::<Result<Vec<_>, _>>()
    })?;
    let text = match cfg.output_format {
        Format::Json => to_json(&reports),
        Format::Csv => {
            let mut s = String::from("q,n,ells,m,residual\n");
            for r in &reports {
                for l in &r.labels {
                    let ells: Vec<String> = l.ells.iter().map(usize::to_string).collect();
                    s += &format!("{},{},{},{},{:e}\n", r.q, r.n, ells.join(";"), l.m, l.residual);
                }
            }
            s
        }
    };
    emit(cfg.output_path.as_ref(), &text)?;
    verdict(reports.iter().all(|r| r.pass))
}

#[derive(Serialize)]
struct DegeneracyRow {
    q: usize,
    ell: usize,
    degeneracy: u64,
}

fn cmd_degeneracy_table(cfg: &RunConfig) -> Result<(), Failure> {
    let mut rows = Vec::new();
    for q in 2..=cfg.q {
        for ell in 0..=cfg.n_max {
            rows.push((q, ell, degeneracy(q, ell)?));
        }
    }
    let text = match cfg.output_format {
        Format::Json => {
            let v: Vec<DegeneracyRow> = rows
                .iter()
                .map(|&(q, ell, degeneracy)| DegeneracyRow { q, ell, degeneracy })
                .collect();
            to_json(&v)
        }
        Format::Csv => {
            let mut s = String::from("q,ell,degeneracy\n");
            for (q, ell, d) in rows {
                s += &format!("{q},{ell},{d}\n");
            }
            s
        }
    };
    emit(cfg.output_path.as_ref(), &text)
}

fn cmd_classify(args: &ClassifyArgs) -> Result<(), Failure> {
    if !(args.int_tol > 0.0 && args.int_tol.is_finite()) {
        return Err(Failure::Config(format!("--int-tol must be positive, got {}", args.int_tol)));
    }
    let params = RepParams::new(Complex64::new(args.phi, args.phi_im), Complex64::new(args.e0, args.e0_im));
    emit(args.out.as_ref(), &to_json(&classify(params, args.int_tol)))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(&RunConfig::from_args(a, DEFAULT_EIGEN_TOL, 2)?),
        Command::VerifyAlgebra(a) => cmd_verify_algebra(&RunConfig::from_args(a, DEFAULT_IDENTITY_TOL, 1)?),
        Command::Csco(a) => cmd_csco(&RunConfig::from_args(a, DEFAULT_EIGEN_TOL, 1)?),
        Command::DegeneracyTable(a) => cmd_degeneracy_table(&RunConfig::from_args(a, DEFAULT_EIGEN_TOL, 2)?),
        Command::Classify(a) => cmd_classify(a),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Cap(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_CAP)
        }
        Err(Failure::Fail(msg)) => {
            eprintln!("FAIL: {msg}");
            ExitCode::from(EXIT_FAIL)
        }
    }
}
