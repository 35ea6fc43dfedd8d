//! The four subcommand drivers. Data goes to files, diagnostics to stderr;
//! `--stdout` additionally echoes every produced file to standard output.
//! Exit status: 0 all symbols succeeded, 2 some failed, 1 none succeeded.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{Datelike, NaiveDate};

use macrostate::diagram::{build_diagram, emit_csv, emit_svg};
use macrostate::indicator::{
    detect_peaks, period_macrostate_terms, rolling_macrostate_terms, Bucketing, MacrostateReport,
    TermMode,
};
use macrostate::market_data::{
    clean_series, parse_series, serialize_series, universe_files, GapPolicy, IngestReport,
    SymbolSeries,
};
use macrostate::numfmt::{cap_value, format_value};
use macrostate::synthetic::{generate, inject_shock, GbmSpec, ShockSpec};

use crate::config::Format;

/// Default canvas for diagram SVGs.
const SVG_WIDTH: usize = 900;
const SVG_HEIGHT: usize = 600;

/// Resolved options shared by the file-consuming commands.
pub struct IoOptions {
    pub input: PathBuf,
    pub out: PathBuf,
    pub gap_policy: GapPolicy,
    pub mode: TermMode,
    pub formats: std::collections::BTreeSet<Format>,
    pub echo_stdout: bool,
}

/// Exit status from per-symbol outcomes: 0 all, 2 partial, 1 none.
fn status_for(total: usize, failed: usize) -> u8 {
    if failed == 0 {
        0
    } else if failed >= total {
        1
    } else {
        2
    }
}

/// Symbols and paths behind `--input`: either one CSV file (symbol = stem)
/// or a directory of `<SYMBOL>.csv` files, sorted by symbol.
fn list_inputs(input: &Path) -> Result<Vec<(String, PathBuf)>> {
    if input.is_dir() {
        let files = universe_files(input)
            .with_context(|| format!("cannot list input directory {}", input.display()))?;
        if files.is_empty() {
            bail!("no input CSV files found in {}", input.display());
        }
        Ok(files)
    } else if input.is_file() {
        let Some(stem) = input.file_stem().and_then(|s| s.to_str()) else {
            bail!("cannot derive a symbol from {}", input.display());
        };
        Ok(vec![(stem.to_string(), input.to_path_buf())])
    } else {
        bail!("unreadable input path: {}", input.display())
    }
}

/// Parse and clean one symbol file, folding the gap count into the report.
fn load_series(
    path: &Path,
    symbol: &str,
    gap_policy: GapPolicy,
) -> Result<(SymbolSeries, IngestReport)> {
    let file = fs::File::open(path)
        .with_context(|| format!("cannot read input file {}", path.display()))?;
    let (series, mut report) = parse_series(std::io::BufReader::new(file), symbol)
        .with_context(|| format!("while parsing {}", path.display()))?;
    for (line, reason) in &report.rejected {
        eprintln!("{symbol}: {} line {line} rejected: {reason}", path.display());
    }
    let cleaned = clean_series(&series.with_gap_policy(gap_policy))
        .with_context(|| format!("while cleaning {}", path.display()))?;
    report.gaps_handled = cleaned.gaps_handled;
    if report.gaps_handled > 0 {
        eprintln!(
            "{symbol}: resolved {} zero-volume bar(s) under policy `{gap_policy}`",
            report.gaps_handled
        );
    }
    Ok((cleaned.series, report))
}

fn write_output(path: &Path, content: &str, echo_stdout: bool) -> Result<()> {
    fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))?;
    if echo_stdout {
        print!("{content}");
    }
    Ok(())
}

/// Round the float fields through the 10-significant-digit output cap so
/// the JSON bytes match every other text output of the tool.
fn capped(report: &MacrostateReport) -> MacrostateReport {
    MacrostateReport {
        p_m: cap_value(report.p_m),
        min_vol: cap_value(report.min_vol),
        max_vol: cap_value(report.max_vol),
        ..report.clone()
    }
}

pub fn compute(io: &IoOptions, bucketing: Bucketing) -> Result<u8> {
    let inputs = list_inputs(&io.input)?;
    fs::create_dir_all(&io.out)
        .with_context(|| format!("cannot create output directory {}", io.out.display()))?;

    let mut failed = 0usize;
    for (symbol, path) in &inputs {
        match compute_one(symbol, path, io, bucketing) {
            Ok(()) => {}
            Err(e) => {
                eprintln!("{symbol}: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} symbol(s) failed", inputs.len());
    }
    Ok(status_for(inputs.len(), failed))
}

fn compute_one(symbol: &str, path: &Path, io: &IoOptions, bucketing: Bucketing) -> Result<()> {
    let (series, _report) = load_series(path, symbol, io.gap_policy)?;
    let periods = period_macrostate_terms(&series, bucketing, io.mode)?;
    if periods.skipped_buckets > 0 {
        eprintln!(
            "{symbol}: skipped {} bucket(s) with fewer than 2 bars",
            periods.skipped_buckets
        );
    }
    let reports: Vec<MacrostateReport> = periods.reports.iter().map(capped).collect();
    let mut json = serde_json::to_string_pretty(&reports).context("serializing reports")?;
    json.push('\n');
    write_output(
        &io.out.join(format!("{symbol}.macrostate.json")),
        &json,
        io.echo_stdout,
    )?;
    Ok(())
}

pub fn diagram(io: &IoOptions, year: i32) -> Result<u8> {
    let inputs = list_inputs(&io.input)?;
    fs::create_dir_all(&io.out)
        .with_context(|| format!("cannot create output directory {}", io.out.display()))?;

    let mut included: Vec<MacrostateReport> = Vec::new();
    let mut failed = 0usize;
    for (symbol, path) in &inputs {
        let yearly = load_series(path, symbol, io.gap_policy)
            .and_then(|(series, _)| Ok(period_macrostate_terms(&series, Bucketing::Yearly, io.mode)?));
        match yearly {
            Ok(periods) => {
                match periods.reports.into_iter().find(|r| r.period_start.year() == year) {
                    Some(report) => included.push(report),
                    None => eprintln!("{symbol}: no report for {year}, excluded"),
                }
            }
            Err(e) => {
                eprintln!("{symbol}: {e:#}");
                failed += 1;
            }
        }
    }

    if included.is_empty() {
        eprintln!("no computable symbols for period {year}");
        return Ok(1);
    }

    let diagram = build_diagram(&included)?;
    write_output(
        &io.out.join(format!("diagram_{year}.csv")),
        &emit_csv(&diagram),
        io.echo_stdout,
    )?;
    if io.formats.contains(&Format::Svg) {
        let svg = emit_svg(&diagram, SVG_WIDTH, SVG_HEIGHT)?;
        write_output(&io.out.join(format!("diagram_{year}.svg")), &svg, io.echo_stdout)?;
    }
    Ok(if failed > 0 { 2 } else { 0 })
}

pub fn series(io: &IoOptions, window: usize, step: usize, peak_factor: f64) -> Result<u8> {
    let inputs = list_inputs(&io.input)?;
    fs::create_dir_all(&io.out)
        .with_context(|| format!("cannot create output directory {}", io.out.display()))?;

    let mut failed = 0usize;
    for (symbol, path) in &inputs {
        match series_one(symbol, path, io, window, step, peak_factor) {
            Ok(()) => {}
            Err(e) => {
                eprintln!("{symbol}: {e:#}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} of {} symbol(s) failed", inputs.len());
    }
    Ok(status_for(inputs.len(), failed))
}

fn series_one(
    symbol: &str,
    path: &Path,
    io: &IoOptions,
    window: usize,
    step: usize,
    peak_factor: f64,
) -> Result<()> {
    let (series, _) = load_series(path, symbol, io.gap_policy)?;
    let rolling = rolling_macrostate_terms(&series, window, step, io.mode)?;

    let mut rolling_csv = String::from("date,p_m\n");
    for point in &rolling {
        rolling_csv.push_str(&format!("{},{}\n", point.date, format_value(point.p_m)));
    }
    write_output(
        &io.out.join(format!("{symbol}.rolling.csv")),
        &rolling_csv,
        io.echo_stdout,
    )?;

    let peaks = detect_peaks(&rolling, peak_factor)?;
    let mut peaks_csv = String::from("start,end,peak\n");
    for run in &peaks {
        peaks_csv.push_str(&format!("{},{},{}\n", run.start, run.end, format_value(run.peak)));
    }
    write_output(
        &io.out.join(format!("{symbol}.peaks.csv")),
        &peaks_csv,
        io.echo_stdout,
    )?;
    Ok(())
}

/// Everything `synth` needs, fully resolved.
pub struct SynthOptions {
    pub symbol: String,
    pub spec: GbmSpec,
    pub shock: Option<ShockSpec>,
    pub out: PathBuf,
    pub echo_stdout: bool,
}

pub fn synth(opts: &SynthOptions) -> Result<u8> {
    let mut series = generate(&opts.spec, &opts.symbol)?;
    if let Some(shock) = &opts.shock {
        series = inject_shock(&series, shock)?;
    }
    fs::create_dir_all(&opts.out)
        .with_context(|| format!("cannot create output directory {}", opts.out.display()))?;
    write_output(
        &opts.out.join(format!("{}.csv", opts.symbol)),
        &serialize_series(&series),
        opts.echo_stdout,
    )?;
    Ok(0)
}

/// Parse an ISO `YYYY-MM-DD` argument.
pub fn parse_date(s: &str) -> Result<NaiveDate, String> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .map_err(|_| format!("invalid date `{s}` (expected YYYY-MM-DD)"))
}
