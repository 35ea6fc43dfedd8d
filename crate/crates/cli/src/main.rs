//! macrostate — batch analytics over daily price/volume CSV series.
//!
//! Subcommands:
//! - `compute` — per-symbol, per-period macrostate reports as JSON
//! - `diagram` — rank a universe for one year into a risk diagram (CSV/SVG)
//! - `series`  — rolling macrostate series plus peak flags per symbol (CSV)
//! - `synth`   — seeded synthetic fixture CSV (geometric Brownian motion)
//!
//! Flags override an optional `key = value` config file (`--config`). Data
//! goes to files under `--out`; diagnostics to stderr; `--stdout` echoes
//! produced files to standard output. Exit status: 0 all succeeded,
//! 2 some symbols failed, 1 nothing succeeded.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use chrono::NaiveDate;
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use macrostate::indicator::{Bucketing, TermMode};
use macrostate::market_data::GapPolicy;
use macrostate::synthetic::{GbmSpec, ShockSpec};

use commands::{parse_date, IoOptions, SynthOptions};
use config::{pick, pick_switch, resolve_formats, resolve_input, resolve_out, FileConfig};

#[derive(Parser)]
#[command(
    name = "macrostate",
    version,
    about = "Activity-entropy analytics for daily price/volume series"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Per-period macrostate reports for each symbol, written as JSON
    Compute(ComputeArgs),
    /// Rank a universe for one year into a risk diagram (CSV, optional SVG)
    Diagram(DiagramArgs),
    /// Rolling macrostate series and peak summary per symbol (CSV)
    Series(SeriesArgs),
    /// Generate a synthetic fixture CSV from a seeded generator
    Synth(SynthArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// CSV file or directory of <SYMBOL>.csv files
    #[arg(long)]
    input: Option<PathBuf>,
    /// Output directory (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Zero-volume handling: skip, carry or fail (default: skip)
    #[arg(long = "gap-policy")]
    gap_policy: Option<GapPolicy>,
    /// Use absolute volatility terms |Vol_n| instead of signed ones
    #[arg(long)]
    abs: bool,
    /// Output formats, comma-separated subset of csv,svg,json
    #[arg(long, value_delimiter = ',')]
    format: Vec<String>,
    /// Optional key = value config file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Echo produced files to standard output as well
    #[arg(long)]
    stdout: bool,
}

impl CommonArgs {
    fn resolve(&self) -> Result<IoOptions> {
        let cfg = FileConfig::load(self.config.as_deref())?;
        Ok(IoOptions {
            input: resolve_input(self.input.clone(), &cfg)?,
            out: resolve_out(self.out.clone(), &cfg)?,
            gap_policy: pick(self.gap_policy, &cfg, "gap-policy")?.unwrap_or_default(),
            mode: if pick_switch(self.abs, &cfg, "abs")? {
                TermMode::Absolute
            } else {
                TermMode::Signed
            },
            formats: resolve_formats(&self.format, &cfg)?,
            echo_stdout: pick_switch(self.stdout, &cfg, "stdout")?,
        })
    }

    fn file_config(&self) -> Result<FileConfig> {
        FileConfig::load(self.config.as_deref())
    }
}

#[derive(Args)]
struct ComputeArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Calendar bucketing: yearly or monthly (default: yearly)
    #[arg(long)]
    bucket: Option<Bucketing>,
}

#[derive(Args)]
struct DiagramArgs {
    /// Calendar year to rank, e.g. 2008
    year: i32,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct SeriesArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Rolling window length in transitions (required, no default)
    #[arg(long)]
    window: Option<usize>,
    /// Window advance in transitions (default: 1)
    #[arg(long)]
    step: Option<usize>,
    /// Peak threshold factor over the median |p_m| (required, no default)
    #[arg(long = "peak-factor")]
    peak_factor: Option<f64>,
}

#[derive(Args)]
struct SynthArgs {
    /// Symbol name; the fixture is written to <out>/<SYMBOL>.csv
    symbol: String,
    /// Generator seed (required, no default)
    #[arg(long)]
    seed: Option<u64>,
    /// Number of weekday bars to generate (required, no default)
    #[arg(long)]
    days: Option<usize>,
    /// First calendar date, YYYY-MM-DD (default: 2000-01-03)
    #[arg(long, value_parser = parse_date)]
    start: Option<NaiveDate>,
    /// Initial price (default: 100)
    #[arg(long)]
    price0: Option<f64>,
    /// Drift per day (default: 0)
    #[arg(long)]
    drift: Option<f64>,
    /// Volatility per sqrt(day) (default: 0)
    #[arg(long)]
    vol: Option<f64>,
    /// Median daily volume (default: 10000)
    #[arg(long)]
    vmed: Option<f64>,
    /// Log-space volume dispersion (default: 0)
    #[arg(long)]
    vsig: Option<f64>,
    /// First shocked day, 0-based bar offset
    #[arg(long = "shock-start")]
    shock_start: Option<usize>,
    /// Shock length in bars
    #[arg(long = "shock-days")]
    shock_days: Option<usize>,
    /// Volume multiplier inside the shock window (default: 1)
    #[arg(long = "shock-vmul")]
    shock_vmul: Option<f64>,
    /// Fractional price jump on the first shock day (default: 0)
    #[arg(long = "shock-jump")]
    shock_jump: Option<f64>,
    /// Output directory (default: current directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional key = value config file; flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Echo the produced file to standard output as well
    #[arg(long)]
    stdout: bool,
}

impl SynthArgs {
    fn resolve(&self) -> Result<SynthOptions> {
        let cfg = FileConfig::load(self.config.as_deref())?;
        let Some(seed) = pick(self.seed, &cfg, "seed")? else {
            bail!("--seed is required (flag or config file)");
        };
        let Some(n_days) = pick(self.days, &cfg, "days")? else {
            bail!("--days is required (flag or config file)");
        };
        let start_date = pick(self.start, &cfg, "start")?
            .unwrap_or_else(|| NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid default date"));
        let spec = GbmSpec {
            seed,
            n_days,
            start_date,
            initial_price: pick(self.price0, &cfg, "price0")?.unwrap_or(100.0),
            drift: pick(self.drift, &cfg, "drift")?.unwrap_or(0.0),
            volatility: pick(self.vol, &cfg, "vol")?.unwrap_or(0.0),
            volume_median: pick(self.vmed, &cfg, "vmed")?.unwrap_or(10_000.0),
            volume_sigma: pick(self.vsig, &cfg, "vsig")?.unwrap_or(0.0),
        };

        let shock_start = pick(self.shock_start, &cfg, "shock-start")?;
        let shock_days = pick(self.shock_days, &cfg, "shock-days")?;
        let shock = match (shock_start, shock_days) {
            (None, None) => None,
            (Some(start_index), Some(duration)) => Some(ShockSpec {
                start_index,
                duration,
                volume_multiplier: pick(self.shock_vmul, &cfg, "shock-vmul")?.unwrap_or(1.0),
                price_jump: pick(self.shock_jump, &cfg, "shock-jump")?.unwrap_or(0.0),
            }),
            _ => bail!("--shock-start and --shock-days must be given together"),
        };

        Ok(SynthOptions {
            symbol: self.symbol.clone(),
            spec,
            shock,
            out: resolve_out(self.out.clone(), &cfg)?,
            echo_stdout: pick_switch(self.stdout, &cfg, "stdout")?,
        })
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Compute(args) => {
            let io = args.common.resolve()?;
            let cfg = args.common.file_config()?;
            let bucketing = pick(args.bucket, &cfg, "bucket")?.unwrap_or_default();
            commands::compute(&io, bucketing)
        }
        Command::Diagram(args) => {
            let io = args.common.resolve()?;
            commands::diagram(&io, args.year)
        }
        Command::Series(args) => {
            let io = args.common.resolve()?;
            let cfg = args.common.file_config()?;
            let Some(window) = pick(args.window, &cfg, "window")? else {
                bail!("--window is required (flag or config file)");
            };
            let Some(peak_factor) = pick(args.peak_factor, &cfg, "peak-factor")? else {
                bail!("--peak-factor is required (flag or config file)");
            };
            let step = pick(args.step, &cfg, "step")?.unwrap_or(1);
            commands::series(&io, window, step, peak_factor)
        }
        Command::Synth(args) => commands::synth(&args.resolve()?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) =>
        {
            e.exit()
        }
        Err(e) => {
            // usage errors count as total failure, not partial
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
