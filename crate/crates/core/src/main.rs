use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use recordgraph::cli::{self, Config, Overrides, Status};
use recordgraph::{output, Error, Result};

#[derive(Parser)]
#[command(name = "recordgraph", version, about = "Record graphs of random walks and their tree models")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    samples: Option<usize>,
    #[arg(long, global = true)]
    radius: Option<usize>,
    /// Node budget for exploration and tree growth.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Classify explorations of the record graph across drift regimes.
    Phase {
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Compare the record ball of 0 with the predicted tree family.
    Compare,
    /// Mass transport check over the built-in function family.
    Mtp,
    /// Derived offspring laws and constants of an increment law.
    Analytics,
    /// Encode, decode or round-trip succession codes.
    Codec {
        #[command(subcommand)]
        action: CodecAction,
    },
    /// Draw samples from a sampler and write them as JSON lines.
    Simulate,
}

#[derive(Subcommand)]
enum CodecAction {
    /// Code of a finite tree given in text form.
    Encode {
        #[arg(long)]
        tree: String,
    },
    /// Tree decoded from a code sequence (`lo=K` optional, then the values).
    Decode {
        #[arg(long, allow_hyphen_values = true)]
        seq: String,
    },
    /// Encode and decode record trees of random walks and compare with the increments.
    Roundtrip,
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn report<C: Serialize, R: Serialize>(common: &Common, command: &str, cfg: &C, status: Status, result: &R) -> Result<Status> {
    let mut text = output::to_json_pretty(&cli::envelope(command, cfg, status, result))?;
    text.push('\n');
    emit(common, &text)?;
    Ok(status)
}

fn load<T: Config>(common: &Common, o: &Overrides) -> Result<T> {
    cli::load_config(common.config.as_deref(), o)
}

fn run(args: &Cli) -> Result<Status> {
    let c = &args.common;
    if let Some(n) = c.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    let o = Overrides { seed: c.seed, samples: c.samples, radius: c.radius, budget: c.budget };
    match &args.command {
        Command::Phase { format } => {
            let cfg: cli::PhaseConfig = load(c, &o)?;
            let (rows, status) = cli::run_phase(&cfg)?;
            match format {
                Format::Csv => {
                    emit(c, &cli::phase_csv(&cfg, &rows)?)?;
                    Ok(status)
                }
                Format::Json => report(c, "phase", &cfg, status, &rows),
            }
        }
        Command::Compare => {
            let cfg: cli::CompareConfig = load(c, &o)?;
            let (r, status) = cli::run_compare(&cfg)?;
            report(c, "compare", &cfg, status, &r)
        }
        Command::Mtp => {
            let cfg: cli::MtpConfig = load(c, &o)?;
            let (r, status) = cli::run_mtp(&cfg)?;
            report(c, "mtp", &cfg, status, &r)
        }
        Command::Analytics => {
            let cfg: cli::AnalyticsConfig = load(c, &o)?;
            let (r, status) = cli::run_analytics(&cfg)?;
            report(c, "analytics", &cfg, status, &r)
        }
        Command::Codec { action } => match action {
            CodecAction::Encode { tree } => {
                emit(c, &cli::encode_tree(tree)?.to_text())?;
                Ok(Status::Pass)
            }
            CodecAction::Decode { seq } => {
                emit(c, &format!("{}\n", cli::decode_sequence(seq)?))?;
                Ok(Status::Pass)
            }
            CodecAction::Roundtrip => {
                let cfg: cli::CodecConfig = load(c, &o)?;
                let (r, status) = cli::run_codec(&cfg)?;
                report(c, "codec-roundtrip", &cfg, status, &r)
            }
        },
        Command::Simulate => {
            let cfg: cli::SimulateConfig = load(c, &o)?;
            emit(c, &cli::run_simulate(&cfg)?)?;
            Ok(Status::Pass)
        }
    }
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let code = match run(&args) {
        Ok(status) => status.exit_code(),
        Err(e) => {
            eprintln!("error: {e}");
            cli::error_exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
