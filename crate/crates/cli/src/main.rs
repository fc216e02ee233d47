//! Command-line front end: generate domains, verify single domains, and run
//! batch configurations into deterministic CSV/JSON reports.
//!
//! Exit codes: 0 all checks hold, 1 configuration or I/O error, 2 a numeric
//! check failed (a slack fell below `-slack_tol` or an identity defect
//! exceeded `identity_tol`).

mod config;
mod report;
mod runner;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use sha2::{Digest, Sha256};

use config::{
    parse_density_flag, parse_k_flag, parse_potential_flag, DomainSpec, OutputSpec, ReportFormat,
    RunConfig, Tolerances,
};
use report::{render, ReportMeta, ReportRow};
use runner::{execute, KMode, RunnerError};

#[derive(Parser)]
#[command(
    name = "specbound",
    version,
    about = "Spectra of lattice Schrödinger operators and their universal eigenvalue bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch configuration and write its report.
    Run {
        /// Path to a JSON run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Generate a domain file.
    Gen {
        #[arg(long, value_enum)]
        shape: Shape,
        /// Box side lengths, e.g. 3x3 or 4x2x2.
        #[arg(long)]
        dims: Option<String>,
        /// L-shape arm width (≥ 2).
        #[arg(long)]
        arm: Option<u32>,
        /// Lattice dimension for random domains.
        #[arg(long)]
        n: Option<usize>,
        /// Vertex count for random domains.
        #[arg(long)]
        size: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify one domain file and print a slack table.
    Verify {
        /// Domain file to check.
        domain: PathBuf,
        /// zero | const:c | file:p | uniform:v
        #[arg(long, default_value = "zero")]
        potential: String,
        /// one | const:c | file:p | uniform:lo,hi
        #[arg(long)]
        rho: Option<String>,
        /// all | comma-separated orders
        #[arg(long, default_value = "all")]
        k: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report path; defaults to report.csv / report.json.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Csv)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Shape {
    Box,
    Lshape,
    Random,
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => match run_command(&config) {
            Ok(failures) => exit_for(failures),
            Err(e) => fail(e),
        },
        Command::Gen {
            shape,
            dims,
            arm,
            n,
            size,
            seed,
            out,
        } => match gen_command(shape, dims, arm, n, size, seed, out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Command::Verify {
            domain,
            potential,
            rho,
            k,
            seed,
            out,
            format,
        } => match verify_command(domain, potential, rho, k, seed, out, format) {
            Ok(failures) => exit_for(failures),
            Err(e) => fail(e),
        },
    }
}

fn exit_for(failures: usize) -> ExitCode {
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn fail(e: RunnerError) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        RunnerError::Config(_) => ExitCode::from(1),
        RunnerError::Numeric(_) => ExitCode::from(2),
    }
}

fn run_command(config_path: &Path) -> Result<usize, RunnerError> {
    let (config, bytes) = RunConfig::from_file(config_path).map_err(RunnerError::Config)?;
    let base_dir = config_path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();

    let outcome = execute(&config, &base_dir, KMode::Intersect)?;
    let meta = ReportMeta {
        tool: "specbound",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: hex_sha256(&bytes),
        seed: config.seed,
    };
    let text = render(config.output.format, &meta, &outcome.rows);
    std::fs::write(&config.output.path, text)
        .with_context(|| format!("cannot write report {}", config.output.path))
        .map_err(RunnerError::Config)?;
    Ok(outcome.failures)
}

fn gen_command(
    shape: Shape,
    dims: Option<String>,
    arm: Option<u32>,
    n: Option<usize>,
    size: Option<usize>,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let spec = match shape {
        Shape::Box => {
            let dims = dims.ok_or_else(|| anyhow!("--shape box requires --dims"))?;
            let sides = dims
                .split('x')
                .map(|s| s.trim().parse::<u32>().map_err(Into::into))
                .collect::<Result<Vec<u32>>>()
                .with_context(|| format!("invalid --dims \"{dims}\""))?;
            DomainSpec::BoxShape(sides)
        }
        Shape::Lshape => {
            DomainSpec::LShape(arm.ok_or_else(|| anyhow!("--shape lshape requires --arm"))?)
        }
        Shape::Random => DomainSpec::Random {
            n: n.ok_or_else(|| anyhow!("--shape random requires --n"))?,
            size: size.ok_or_else(|| anyhow!("--shape random requires --size"))?,
            seed,
        },
    };
    let domain = spec.realize(Path::new("."))?;
    let text = domain.to_json();
    match out {
        Some(path) => std::fs::write(&path, text)
            .with_context(|| format!("cannot write domain file {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn verify_command(
    domain: PathBuf,
    potential: String,
    rho: Option<String>,
    k: String,
    seed: u64,
    out: Option<PathBuf>,
    format: ReportFormat,
) -> Result<usize, RunnerError> {
    let potential = parse_potential_flag(&potential).map_err(RunnerError::Config)?;
    let density =
        parse_density_flag(rho.as_deref().unwrap_or("one")).map_err(RunnerError::Config)?;
    let k_range = parse_k_flag(&k).map_err(RunnerError::Config)?;
    let out = out.unwrap_or_else(|| match format {
        ReportFormat::Csv => PathBuf::from("report.csv"),
        ReportFormat::Json => PathBuf::from("report.json"),
    });

    let config = RunConfig {
        domains: vec![DomainSpec::File(domain.display().to_string())],
        potential,
        density,
        k_range,
        tolerances: Tolerances::default(),
        output: OutputSpec {
            path: out.display().to_string(),
            format,
        },
        seed,
    };

    let outcome = execute(&config, Path::new("."), KMode::Strict)?;
    print_table(&outcome.rows);

    let canonical = serde_json::to_vec(&config).expect("config serialization cannot fail");
    let meta = ReportMeta {
        tool: "specbound",
        version: env!("CARGO_PKG_VERSION"),
        config_sha256: hex_sha256(&canonical),
        seed: config.seed,
    };
    let text = render(format, &meta, &outcome.rows);
    std::fs::write(&out, text)
        .with_context(|| format!("cannot write report {}", out.display()))
        .map_err(RunnerError::Config)?;

    if outcome.failures == 0 {
        println!("all checks passed");
    } else {
        println!("{} check(s) FAILED", outcome.failures);
    }
    Ok(outcome.failures)
}

fn print_table(rows: &[ReportRow]) {
    println!(
        "{:<24} {:>3} {:>5} {:<20} {:>14} {:>14} {:>14}  flags",
        "domain", "k", "N", "check", "lhs", "rhs", "slack"
    );
    for r in rows {
        let fmt = |x: Option<f64>| {
            x.map(|v| format!("{v: >14.6e}"))
                .unwrap_or_else(|| " ".repeat(14))
        };
        let mut flags = Vec::new();
        if r.trivial == Some(true) {
            flags.push("trivial");
        }
        if r.degenerate_gap == Some(true) {
            flags.push("degenerate-gap");
        }
        println!(
            "{:<24} {:>3} {:>5} {:<20} {} {} {}  {}",
            r.domain_id,
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.num_vertices,
            r.theorem,
            fmt(r.lhs),
            fmt(r.rhs),
            fmt(r.slack),
            flags.join(",")
        );
    }
}

fn hex_sha256(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
