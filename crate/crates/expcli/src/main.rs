use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nhkr_expcli::{
    compare_report, emit_results, read_results, run_scenario, run_selftest, write_rows, CliError, ExperimentConfig,
    Format, Overrides, Result, Scenario,
};

const EXIT_REPORT_FAILED: u8 = 4;

#[derive(Parser)]
#[command(name = "nhkr", version, about = "OTOC experiments for the non-Hermitian kicked rotor at resonance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write one row per (lambda, t) sample.
    Run {
        /// JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: Option<String>,
        /// Comma-separated lambda values.
        #[arg(long, value_delimiter = ',')]
        lambda: Option<Vec<f64>>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        tmax: Option<usize>,
        /// Output file; standard output when neither this nor the config sets one.
        #[arg(long)]
        out: Option<String>,
        /// csv or json; defaults from the output extension.
        #[arg(long)]
        format: Option<String>,
    },
    /// Compare a results file against the closed forms.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        /// Print the checks as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the randomized invariant checks.
    Selftest {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run {
            config,
            scenario,
            lambda,
            k,
            epsilon,
            tmax,
            out,
            format,
        } => {
            let mut cfg = ExperimentConfig::from_path(&config)?;
            Overrides {
                scenario: scenario.as_deref().map(str::parse::<Scenario>).transpose()?,
                lambdas: lambda,
                k,
                epsilon,
                t_max: tmax,
                out,
            }
            .apply(&mut cfg);
            let format = format.as_deref().map(str::parse::<Format>).transpose()?;
            let rows = run_scenario(&cfg)?;
            if cfg.output_path.is_empty() {
                let stdout = std::io::stdout();
                write_rows(&rows, format.unwrap_or(Format::Csv), stdout.lock(), Path::new("<stdout>"))?;
            } else {
                let path = PathBuf::from(&cfg.output_path);
                emit_results(&rows, format.unwrap_or_else(|| Format::from_path(&path)), &path)?;
                log::info!("wrote {} rows to {}", rows.len(), path.display());
            }
            Ok(0)
        }
        Command::Report { input, json } => {
            let rows = read_results(&input)?;
            let report = compare_report(&rows);
            let mut stdout = std::io::stdout().lock();
            let io_err = |source| CliError::Io {
                path: PathBuf::from("<stdout>"),
                source,
            };
            if json {
                let text = serde_json::to_string_pretty(&report).map_err(|source| CliError::Json {
                    path: PathBuf::from("<stdout>"),
                    source,
                })?;
                writeln!(stdout, "{text}").map_err(io_err)?;
            } else {
                write!(stdout, "{}", report.table()).map_err(io_err)?;
            }
            Ok(if report.passed() { 0 } else { EXIT_REPORT_FAILED })
        }
        Command::Selftest { cases, seed } => {
            let summary = run_selftest(cases, seed);
            for r in &summary.results {
                println!(
                    "{:<22} {:>6} cases  {:>4} failed  worst {:.3e} x tol  {}",
                    r.name,
                    r.cases,
                    r.failures,
                    r.worst,
                    if r.passed() { "PASS" } else { "FAIL" }
                );
                if let Some(f) = &r.first_failure {
                    println!("    {f}");
                }
            }
            Ok(if summary.passed() { 0 } else { EXIT_REPORT_FAILED })
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
