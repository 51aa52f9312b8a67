use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use eqlines_core::numerics::{format_rational, parse_rational, Rational};
use eqlines_core::pipeline::{
    bound_for_angle, bound_for_dimension, known_values, table_scan, verify_table3, write_csv,
    write_json, OutputFormat, RunConfig,
};
use eqlines_core::sdp_model::{build_equiangular_sdp, export_sdpa};
use eqlines_core::Error;

#[derive(Parser, Debug)]
#[command(version, about = "Upper bounds on equiangular line systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bound for one dimension, or for one angle in that dimension.
    Bound {
        #[arg(long)]
        n: u32,
        /// Cosine of the angle, e.g. 1/5.
        #[arg(long, value_parser = angle)]
        angle: Option<Rational>,
        /// Degree cap of the program.
        #[arg(long, default_value_t = 5)]
        p: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Bounds for every dimension in a range.
    Scan {
        #[arg(long)]
        from: u32,
        #[arg(long)]
        to: u32,
        #[arg(long, default_value_t = 5)]
        p: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Write the program for (n, angle) in SDPA sparse format.
    ExportSdpa {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = angle)]
        angle: Rational,
        #[arg(long, default_value_t = 5)]
        p: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Tabulated lower and upper bounds.
    Known {
        #[arg(long)]
        n: u32,
    },
    /// Recompute rows of the SDP table and diff them.
    #[command(name = "verify-table3")]
    VerifyTable3 {
        #[arg(long, value_delimiter = ',', required = true)]
        rows: Vec<u32>,
    },
}

fn angle(text: &str) -> Result<Rational, String> {
    parse_rational(text).ok_or_else(|| format!("expected a fraction like 1/5, got {text:?}"))
}

enum Failure {
    Usage(String),
    Solver(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Solver { .. } | Error::Internal(_) => Failure::Solver(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn config(p: u32, format: Format) -> RunConfig {
    RunConfig {
        p,
        format: format.into(),
        ..RunConfig::default()
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Bound { n, angle: Some(a), p, format } => {
            let b = bound_for_angle(n, &a, &config(p, format))?;
            match format {
                Format::Csv => {
                    writeln!(out, "n,angle,sdp_raw,per_angle_bound,method")?;
                    writeln!(
                        out,
                        "{n},{},{:.6},{},{}",
                        format_rational(&b.angle),
                        b.sdp_raw,
                        b.per_angle_bound,
                        b.method
                    )?;
                }
                Format::Json => {
                    serde_json::to_writer_pretty(&mut out, &b).map_err(Error::from)?;
                    writeln!(out)?;
                }
            }
        }
        Command::Bound { n, angle: None, p, format } => {
            let report = bound_for_dimension(n, &config(p, format))?;
            match format {
                Format::Csv => write_csv(&[Ok(report)], &mut out)?,
                Format::Json => write_json(&[Ok(report)], &mut out)?,
            }
        }
        Command::Scan { from, to, p, format, out: path, jobs } => {
            let mut cfg = config(p, format);
            if let Some(j) = jobs {
                cfg.jobs = j;
            }
            let rows = match path {
                Some(path) => {
                    let mut file = BufWriter::new(File::create(&path)?);
                    let rows = table_scan(from, to, &cfg, &mut file)?;
                    file.flush()?;
                    rows
                }
                None => table_scan(from, to, &cfg, &mut out)?,
            };
            let failed: Vec<String> = rows
                .iter()
                .filter_map(|r| r.as_ref().err())
                .map(|(n, msg)| format!("n = {n}: {msg}"))
                .collect();
            if !failed.is_empty() {
                return Err(Failure::Solver(failed.join("\n")));
            }
        }
        Command::ExportSdpa { n, angle, p, out: path } => {
            let prob = build_equiangular_sdp(n, &angle, p)?;
            std::fs::write(&path, export_sdpa(&prob))?;
        }
        Command::Known { n } => match known_values(n) {
            Some(e) => {
                let angles: Vec<String> = e.angle_inverse.iter().map(|d| format!("1/{d}")).collect();
                writeln!(out, "n,lower,upper,angles")?;
                writeln!(out, "{},{},{},{}", e.n, e.lower, e.upper, angles.join(" "))?;
            }
            None => return Err(Failure::Usage(format!("no tabulated values for n = {n}"))),
        },
        Command::VerifyTable3 { rows } => {
            let report = verify_table3(&rows, &RunConfig::default())?;
            writeln!(out, "n,column,expected,computed,pass")?;
            for row in &report.rows {
                if let Some(e) = &row.error {
                    writeln!(out, "{},error,,,false  # {e}", row.n)?;
                }
                for c in &row.cells {
                    writeln!(out, "{},{},{},{},{}", row.n, c.column, c.expected, c.computed, c.pass)?;
                }
            }
            let failed: Vec<String> = report
                .rows
                .iter()
                .filter(|r| !r.informational && !r.pass())
                .map(|r| r.n.to_string())
                .collect();
            if !failed.is_empty() {
                return Err(Failure::Solver(format!("rows failing: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Solver(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
