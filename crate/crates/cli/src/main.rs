mod analyze;
mod repl;
mod serve;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use gridpilot_core::harness::sim::{simulate, AuditScript, LatencyProfile};
use gridpilot_core::tcat::replay;
use gridpilot_core::workbook::sheet_from_csv;
use gridpilot_core::{CommandSet, EventLog, SessionConfig, Workbook};

#[derive(Parser)]
#[command(name = "gridpilot", version, about = "Spreadsheet audit navigation engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SessionOpts {
    /// Scan dwell per cell in milliseconds.
    #[arg(long, default_value_t = 1000)]
    dwell_ms: u32,
    /// Stop scans on the first cell unlike the previous one.
    #[arg(long)]
    smart: bool,
    /// Use the conventional dictation command set instead of iVoice.
    #[arg(long)]
    baseline: bool,
    /// Extra values-only sheet from a CSV file, as NAME=PATH.
    #[arg(long = "csv", value_name = "NAME=PATH")]
    csv: Vec<String>,
}

impl SessionOpts {
    fn config(&self) -> SessionConfig {
        SessionConfig {
            technology: if self.baseline { CommandSet::Baseline } else { CommandSet::IVoice },
            dwell_ms: self.dwell_ms,
            smart_scan: self.smart,
            ..SessionConfig::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Interactive audit on stdin/stdout.
    Audit {
        workbook: PathBuf,
        #[command(flatten)]
        opts: SessionOpts,
        /// Write the activity log here when the session ends.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Take timestamps from `@<ms>` line prefixes instead of the wall clock.
        #[arg(long)]
        manual_clock: bool,
        /// Do not print the grid after each command.
        #[arg(long)]
        no_grid: bool,
    },
    /// WebSocket session service on /session.
    Serve {
        workbook: PathBuf,
        #[arg(long)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[command(flatten)]
        opts: SessionOpts,
        /// Directory for session logs.
        #[arg(long, default_value = ".")]
        log_dir: PathBuf,
    },
    /// Re-run a log against its workbook and check it reproduces exactly.
    Replay { log: PathBuf, workbook: PathBuf },
    /// Coverage, error, timing and rank-sum report over session logs.
    Analyze {
        logs: Vec<PathBuf>,
        #[arg(long)]
        workbook: PathBuf,
        #[arg(long, num_args = 1..)]
        group_a: Vec<PathBuf>,
        #[arg(long, num_args = 1..)]
        group_b: Vec<PathBuf>,
        /// Count a cell as reviewed on total rather than single-visit time.
        #[arg(long)]
        cumulative: bool,
        /// Also write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Baseline vs iVoice latency model.
    Simulate {
        #[arg(long)]
        script: PathBuf,
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn load_workbook(path: &Path, csv: &[String]) -> Result<Workbook> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let mut wb = Workbook::load(&bytes).with_context(|| format!("loading {}", path.display()))?;
    for spec in csv {
        let Some((name, file)) = spec.split_once('=') else {
            bail!("--csv expects NAME=PATH, got `{spec}`");
        };
        let reader = fs::File::open(file).with_context(|| format!("opening {file}"))?;
        wb.add_sheet(sheet_from_csv(name, reader)?)?;
    }
    Ok(wb)
}

fn load_log(path: &Path) -> Result<EventLog> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EventLog::from_jsonl(&text).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Audit {
            workbook,
            opts,
            log,
            manual_clock,
            no_grid,
        } => {
            let wb = load_workbook(&workbook, &opts.csv)?;
            repl::run(wb, opts.config(), log.as_deref(), manual_clock, !no_grid)
        }
        Command::Serve {
            workbook,
            port,
            host,
            opts,
            log_dir,
        } => {
            let wb = load_workbook(&workbook, &opts.csv)?;
            fs::create_dir_all(&log_dir)?;
            serve::run(wb, opts.config(), &host, port, log_dir)
        }
        Command::Replay { log, workbook } => {
            let wb = load_workbook(&workbook, &[])?;
            let log = load_log(&log)?;
            let session = replay(&log, &wb)?;
            println!(
                "replay ok: {} events, cursor {}, {} marked",
                log.events().len(),
                session.cursor(),
                session.error_marks().len()
            );
            Ok(())
        }
        Command::Analyze {
            logs,
            workbook,
            group_a,
            group_b,
            cumulative,
            json,
        } => {
            let wb = load_workbook(&workbook, &[])?;
            analyze::run(&wb, &logs, &group_a, &group_b, cumulative, json.as_deref())
        }
        Command::Simulate { script, profile, json } => {
            let script: AuditScript = serde_json::from_str(&fs::read_to_string(&script)?)
                .with_context(|| format!("parsing {}", script.display()))?;
            let profile: LatencyProfile<f64> = match profile {
                Some(p) => serde_json::from_str(&fs::read_to_string(&p)?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => LatencyProfile::default(),
            };
            let report = simulate(&script, &profile)?;
            if json {
                println!("{}", serde_json::to_string_pretty(&report)?);
            } else {
                print!("{}", report.to_text());
                if let Some(ratio) = report.scan_per_cell_ratio() {
                    println!("scan per-cell ratio (baseline/ivoice): {ratio:.2}");
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
