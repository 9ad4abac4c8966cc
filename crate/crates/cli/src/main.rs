//! `cdistill`: evaluate, plan and simulate Clifford-scrambling entanglement
//! distillation from the command line.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

mod commands;
mod config;
mod error;
mod table;

use commands::evaluate::{EvaluateArgs, EvaluateConfig};
use commands::markov::{MarkovArgs, MarkovConfig};
use commands::mc::{McArgs, McConfig};
use commands::plan::{PlanArgs, PlanConfig};
use commands::repeater::{RepeaterArgs, RepeaterConfig};
use commands::sweep::{self, SweepArgs};
use commands::{execute, Command};
use config::Params;
use error::CliError;
use table::Table;

#[derive(Parser)]
#[command(name = "cdistill", version, about = "Entanglement distillation by random bilocal Clifford circuits")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Performance of one distillation round
    Evaluate {
        #[command(flatten)]
        args: EvaluateArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Cheapest concatenated protocol reaching a target infidelity
    Plan {
        #[command(flatten)]
        args: PlanArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Finite-depth scrambling via the error-weight Markov chain
    Markov {
        #[command(flatten)]
        args: MarkovArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Monte Carlo estimate of one round
    Mc {
        #[command(flatten)]
        args: McArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Nested repeater chain with distillation between swaps
    Repeater {
        #[command(flatten)]
        args: RepeaterArgs,
        #[command(flatten)]
        io: Io,
    },
    /// Grid sweep over another command's parameters
    Sweep {
        #[command(flatten)]
        args: SweepArgs,
        #[command(flatten)]
        io: Io,
    },
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Args)]
struct Io {
    /// Config document (TOML, or JSON with a .json extension); flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Output file; stdout when omitted
    #[arg(long, short)]
    output: Option<PathBuf>,
}

impl Io {
    fn params(&self) -> Result<Params, CliError> {
        self.config.as_deref().map_or(Ok(Params::new()), config::load)
    }
}

fn with_flags<T: Serialize>(io: &Io, flags: &T) -> Result<Params, CliError> {
    let mut params = io.params()?;
    params.extend(config::flags_to_params(flags)?);
    Ok(params)
}

fn dispatch<C: Command, T: Serialize>(io: &Io, flags: &T) -> Result<(Value, Table), CliError> {
    execute::<C>(with_flags(io, flags)?)
}

fn render(out: impl Write, format: Format, config: &Value, table: &Table) -> Result<(), CliError> {
    match format {
        Format::Json => table::write_json(out, config, table),
        Format::Csv => table::write_csv(out, config, table),
    }
}

fn write(io: &Io, config: &Value, table: &Table) -> Result<(), CliError> {
    if let Some(path) = &io.output {
        let file = File::create(path)
            .map_err(|e| CliError::Internal(format!("cannot create {}: {e}", path.display())))?;
        return render(BufWriter::new(file), io.format, config, table);
    }
    let mut buf = Vec::new();
    render(&mut buf, io.format, config, table)?;
    let mut stdout = io::stdout().lock();
    match stdout.write_all(&buf).and_then(|()| stdout.flush()) {
        // a reader that stops early, such as `head`, is not a failure
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => Ok(r?),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (io, result) = match &cli.command {
        Cmd::Evaluate { args, io } => (io, dispatch::<EvaluateConfig, _>(io, args)),
        Cmd::Plan { args, io } => (io, dispatch::<PlanConfig, _>(io, args)),
        Cmd::Markov { args, io } => (io, dispatch::<MarkovConfig, _>(io, args)),
        Cmd::Mc { args, io } => (io, dispatch::<McConfig, _>(io, args)),
        Cmd::Repeater { args, io } => (io, dispatch::<RepeaterConfig, _>(io, args)),
        Cmd::Sweep { args, io } => (io, io.params().and_then(|p| sweep::merge_flags(p, args)).and_then(sweep::execute)),
    };
    let (config, table) = result?;
    write(io, &config, &table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // a panic inside a model is an internal failure, not a crash with code 101
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("cdistill: {e}");
            ExitCode::from(e.exit_code())
        }
        Err(_) => ExitCode::from(CliError::Internal(String::new()).exit_code()),
    }
}
