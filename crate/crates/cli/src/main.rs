use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind as ClapErrorKind;
use clap::{Parser, Subcommand};
use hfsim_cli::analyze::{analyze_file, analyze_reference, AnalysisOptions, Reference, DEFAULT_BINS, DEFAULT_THRESHOLDS};
use hfsim_cli::commands::{self, parse_year_month};
use hfsim_cli::CliError;
use hfsim_core::congestion::SsnTable;
use hfsim_core::stats::KT0B_BANDWIDTH_HZ;

/// Whole-HF-band interference simulator.
#[derive(Debug, Parser)]
#[command(name = "hfsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a scenario, synthesize it and analyze the result.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides scenario.seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides run.workers; 0 uses every core.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// APD, level crossings and power histogram of a sample file.
    Analyze {
        #[arg(long = "in", required_unless_present = "reference", conflicts_with = "reference")]
        input: Option<PathBuf>,
        /// Load resistance, ohms.
        #[arg(long = "r")]
        r: f64,
        #[arg(long, default_value_t = DEFAULT_THRESHOLDS)]
        thresholds: usize,
        /// Analyze a built-in reference signal instead of a file.
        #[arg(long)]
        reference: Option<Reference>,
        /// Output directory; defaults to the input's directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// kT0B reference bandwidth, Hz.
        #[arg(long, default_value_t = KT0B_BANDWIDTH_HZ)]
        bandwidth: f64,
        #[arg(long, default_value_t = DEFAULT_BINS)]
        bins: usize,
    },
    /// Sunspot-number tables.
    Ssn {
        #[command(subcommand)]
        command: SsnCommand,
    },
    /// Regenerate a sample file from a run manifest.
    Replay {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Debug, Subcommand)]
enum SsnCommand {
    /// Convert a WDC/SILSO or SWPC monthly file to the canonical CSV.
    Import {
        file: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Exit 0 even when some lines are rejected.
        #[arg(long)]
        skip_invalid: bool,
    },
    /// Print monthly values for a range.
    Show {
        /// Canonical table; defaults to the shipped one.
        #[arg(long)]
        table: Option<PathBuf>,
        /// YYYY-MM.
        #[arg(long)]
        from: String,
        /// YYYY-MM; defaults to --from.
        #[arg(long)]
        to: Option<String>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { config, out, seed, workers } => {
            let report = commands::simulate(&config, &out, seed, workers)?;
            println!(
                "simulated {} interferers, {} samples at {} Hz -> {}",
                report.manifest.interferers.len(),
                report.header.samples,
                report.header.sample_rate,
                report.sample_path.display()
            );
            for f in &report.analysis.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Analyze { input, r, thresholds, reference, out, bandwidth, bins } => {
            let opts = AnalysisOptions { load_ohms: r, thresholds, bandwidth_hz: bandwidth, bins };
            let analysis = match (input, reference) {
                (_, Some(reference)) => {
                    let out = out.unwrap_or_else(|| PathBuf::from("."));
                    analyze_reference(reference, &opts, &out)?
                }
                (Some(input), None) => {
                    let out = out.unwrap_or_else(|| {
                        input.parent().map(|p| p.to_path_buf()).filter(|p| !p.as_os_str().is_empty()).unwrap_or_else(|| ".".into())
                    });
                    analyze_file(&input, &opts, &out)?
                }
                (None, None) => return Err(CliError::usage("give --in or --reference")),
            };
            println!("analyzed {} samples at {} Hz", analysis.samples, analysis.sample_rate);
            for f in &analysis.files {
                println!("wrote {}", f.display());
            }
        }
        Command::Ssn { command: SsnCommand::Import { file, out, skip_invalid } } => {
            let summary = commands::ssn_import(&file, &out)?;
            for (line, reason) in &summary.rejected {
                eprintln!("{}:{line}: rejected: {reason}", file.display());
            }
            println!("imported {} months -> {}", summary.table.len(), out.display());
            if !summary.rejected.is_empty() && !skip_invalid {
                return Err(CliError::data(format!(
                    "{} line(s) of {} rejected (first at line {})",
                    summary.rejected.len(),
                    file.display(),
                    summary.rejected[0].0
                )));
            }
        }
        Command::Ssn { command: SsnCommand::Show { table, from, to } } => {
            let table = match table {
                Some(p) => SsnTable::load(p)?,
                None => SsnTable::shipped(),
            };
            let from = parse_year_month(&from)?;
            let to = match to {
                Some(t) => parse_year_month(&t)?,
                None => from,
            };
            println!("year,month,ssn");
            for (y, m, v) in commands::ssn_show(&table, from, to)? {
                println!("{y},{m},{v}");
            }
        }
        Command::Replay { manifest, out, workers } => {
            let (header, path) = commands::replay(&manifest, &out, workers)?;
            println!("replayed {} samples -> {}", header.samples, path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ClapErrorKind::DisplayHelp | ClapErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let err = CliError::usage(first);
            eprintln!("hfsim: error: {err}");
            return ExitCode::from(err.exit_code() as u8);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hfsim: error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
