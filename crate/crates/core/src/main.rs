use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use irs_auction_core::auction::Mechanism;
use irs_auction_core::harness::{
    read_rows_csv, run_experiment, summarize, trace_trial, write_rows_csv, write_summary_csv,
    ExperimentSpec, Method, Preset,
};
use irs_auction_core::Error;

#[derive(Parser)]
#[command(name = "irs-auction", version, about = "IRS allocation auctions: experiments and traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct SpecArgs {
    /// Experiment spec (TOML). Defaults to the chosen preset.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Built-in spec used when --spec is absent.
    #[arg(long, value_enum, default_value_t = PresetArg::Desk)]
    preset: PresetArg,
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of Monte Carlo trials per sweep value.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated subset of successive,simultaneous,exhaustive,random.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// Override any spec field, e.g. --set network.num_irs=6 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum PresetArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum MechanismArg {
    Successive,
    Simultaneous,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write per-trial results as CSV.
    Run {
        #[command(flatten)]
        spec: SpecArgs,
        /// Output CSV; a `<out>.manifest.toml` with the resolved spec is written next to it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate a results CSV into per-(method, sweep value) mean and standard error.
    Summarize {
        /// Results CSV written by `run`.
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one trial's auction and write its per-round log as JSON lines.
    Trace {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 0)]
        trial: usize,
        /// Index into the sweep values.
        #[arg(long, default_value_t = 0)]
        sweep_index: usize,
        #[arg(long, value_enum, default_value_t = MechanismArg::Successive)]
        method: MechanismArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl SpecArgs {
    fn resolve(&self) -> Result<ExperimentSpec, Error> {
        let mut overrides = self.overrides.clone();
        if let Some(seed) = self.seed {
            overrides.push(format!("seed={seed}"));
        }
        if let Some(trials) = self.trials {
            overrides.push(format!("trials={trials}"));
        }
        if let Some(methods) = &self.methods {
            let parsed = methods
                .iter()
                .map(|m| m.parse::<Method>().map(|m| format!("\"{m}\"")))
                .collect::<Result<Vec<_>, _>>()?;
            overrides.push(format!("methods=[{}]", parsed.join(",")));
        }
        match &self.spec {
            Some(path) => ExperimentSpec::load(path, &overrides),
            None => {
                let preset = match self.preset {
                    PresetArg::Desk => Preset::Desk,
                    PresetArg::Paper => Preset::Paper,
                };
                ExperimentSpec::preset(preset).with_overrides(&overrides)
            }
        }
    }
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { spec, out } => {
            let spec = spec.resolve()?;
            let rows = run_experiment(&spec)?;
            write_rows_csv(&rows, output(out.as_deref())?)?;
            if let Some(out) = out {
                let mut manifest = out.into_os_string();
                manifest.push(".manifest.toml");
                std::fs::write(manifest, spec.to_toml()?)?;
            }
        }
        Command::Summarize { input, out } => {
            let rows = read_rows_csv(File::open(input)?)?;
            write_summary_csv(&summarize(&rows)?, output(out.as_deref())?)?;
        }
        Command::Trace {
            spec,
            trial,
            sweep_index,
            method,
            out,
        } => {
            let spec = spec.resolve()?;
            let value = *spec.sweep.values.get(sweep_index).ok_or_else(|| {
                Error::InvalidSpec(format!(
                    "sweep index {sweep_index} out of range ({} values)",
                    spec.sweep.values.len()
                ))
            })?;
            let mechanism = match method {
                MechanismArg::Successive => Mechanism::SuccessiveAdvance,
                MechanismArg::Simultaneous => Mechanism::SimultaneousMultiRound,
            };
            let outcome = trace_trial(&spec, value, trial, mechanism)?;
            let mut w = output(out.as_deref())?;
            outcome.trace.write_jsonl(&mut w)?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
