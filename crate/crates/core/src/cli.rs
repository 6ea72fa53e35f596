//! Command-line surface: `solve`, `sweep`, `verify` and `thresholds`.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, SweepSpec};
use crate::equilibrium;
use crate::error::{Error, Result};
use crate::output;
use crate::scenario::{self, Bandwidth, Mode, ScenarioFile};
use crate::verify;

#[derive(Debug, Parser)]
#[command(
    name = "spectrum-cournot",
    version,
    about = "Equilibria and welfare of a two-provider spectrum-sharing market with overlapping coverage"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one bandwidth and print the result as JSON.
    Solve {
        #[command(flatten)]
        source: Source,
        /// Bandwidth; required when the scenario describes a sweep.
        #[arg(long)]
        w: Option<f64>,
    },
    /// Sweep the bandwidth and write a CSV table.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suites on the scenario's market.
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Print the bandwidths at which each provider enters the overlap.
    Thresholds {
        #[command(flatten)]
        source: Source,
    },
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Scenario file in `key=value` format.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Built-in scenario: symmetric_small_ab, symmetric_large_ab,
    /// asymmetric_small_ab or asymmetric_large_ab.
    #[arg(long)]
    preset: Option<String>,
}

impl Source {
    fn load(&self) -> Result<ScenarioFile> {
        if let Some(path) = &self.scenario {
            let bytes = std::fs::read(path)?;
            return scenario::parse_scenario(&bytes);
        }
        let name = self.preset.as_deref().unwrap_or_default();
        scenario::preset(name).ok_or_else(|| Error::Validation {
            field: "preset".into(),
            message: format!("unknown preset `{name}`"),
        })
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Solve { source, w } => {
            let sc = source.load()?;
            let w = match (w, sc.bandwidth) {
                (Some(w), _) | (None, Bandwidth::Single(w)) => w,
                (None, Bandwidth::Sweep { .. }) => {
                    return Err(Error::Validation {
                        field: "w".into(),
                        message: "scenario describes a sweep; pass --w".into(),
                    })
                }
            };
            let cfg = sc.market_config(w)?;
            let json = match sc.mode {
                Mode::Competition => output::solve_json(&equilibrium::solve_numeric(&cfg)?, None),
                Mode::Cooperation => {
                    output::solve_json(&equilibrium::solve_cooperation(&cfg)?, None)
                }
                Mode::Both => output::solve_json(
                    &equilibrium::solve_numeric(&cfg)?,
                    Some(&equilibrium::solve_cooperation(&cfg)?),
                ),
            };
            writeln!(out, "{json}")?;
            Ok(0)
        }
        Command::Sweep { source, out: path } => {
            let sc = source.load()?;
            let table = analysis::sweep(&sc.sweep_spec()?)?;
            let csv = output::emit_sweep_csv(&table, sc.mode);
            match path {
                Some(p) => std::fs::write(p, csv)?,
                None => out.write_all(&csv)?,
            }
            Ok(0)
        }
        Command::Verify { source, seed } => {
            let sc = source.load()?;
            let report = verify::run_suite(&sc, seed)?;
            write!(out, "{}", report.render())?;
            Ok(if report.passed() { 0 } else { 2 })
        }
        Command::Thresholds { source } => {
            let sc = source.load()?;
            let spec = match sc.bandwidth {
                Bandwidth::Sweep { .. } => sc.sweep_spec()?,
                Bandwidth::Single(_) => SweepSpec::default_grid(sc.sizes()?, false),
            };
            let spec = SweepSpec {
                include_cooperation: false,
                ..spec
            };
            let table = analysis::sweep(&spec)?;
            writeln!(out, "{}", output::format_thresholds(&table.thresholds))?;
            Ok(0)
        }
    }
}

/// Runs the tool on `argv` (program name first). Data goes to `out`,
/// diagnostics to `err`. Returns the process exit code: 0 on success, 1 on
/// usage or validation errors, 2 on solver failures.
pub fn run_cli<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    0
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    1
                }
            };
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
