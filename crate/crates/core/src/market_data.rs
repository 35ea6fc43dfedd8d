//! Ingestion and normalization of per-symbol price/volume series.
//!
//! Input format: UTF-8 CSV with header `date,close,volume`, ISO-8601 dates,
//! decimal literals, LF or CRLF line endings. Rows may arrive unsorted;
//! parsing sorts them. Malformed rows are rejected and itemized rather than
//! aborting the file, except that a bad header, a duplicate date, or a file
//! with no accepted rows at all are hard errors.
//!
//! Zero-volume bars make the downstream volatility term undefined (it divides
//! by the previous activity), so they must be resolved by [`clean_series`]
//! under an explicit [`GapPolicy`] before the kernel runs.

use std::fmt;
use std::io::Read;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::Serialize;
use thiserror::Error;

use crate::numfmt::format_value;

/// Expected CSV header line.
pub const CSV_HEADER: &str = "date,close,volume";

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("malformed header: expected `{CSV_HEADER}`, found `{found}`")]
    MalformedHeader { found: String },
    #[error("no accepted rows")]
    NoAcceptedRows,
    #[error("duplicate timestamp {date} in series `{symbol}`")]
    DuplicateTimestamp { symbol: String, date: NaiveDate },
    #[error("symbol must be a non-empty string")]
    EmptySymbol,
    #[error("bars must be strictly increasing by timestamp (offending date {date})")]
    UnorderedBars { date: NaiveDate },
    #[error("invalid bar on {date}: {reason}")]
    InvalidBar { date: NaiveDate, reason: &'static str },
    #[error("zero-volume bar on {date} with gap policy `fail`")]
    ZeroVolumeBar { date: NaiveDate },
    #[error("insufficient observations: {got} bar(s) after cleaning, need at least 2")]
    InsufficientObservations { got: usize },
    #[error("input is not valid UTF-8")]
    InvalidUtf8,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// One daily observation of a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bar {
    pub date: NaiveDate,
    /// Close price, currency units per share. Must be positive.
    pub price: f64,
    /// Shares traded. Non-negative; real-valued to accept pre-aggregated feeds.
    pub volume: f64,
}

impl Bar {
    pub fn new(date: NaiveDate, price: f64, volume: f64) -> Result<Self, MarketDataError> {
        let bar = Bar { date, price, volume };
        match bar.check() {
            Some(reason) => Err(MarketDataError::InvalidBar { date, reason }),
            None => Ok(bar),
        }
    }

    /// Reason this bar violates its invariants, if any.
    pub fn check(&self) -> Option<&'static str> {
        if !self.price.is_finite() {
            Some("non-finite price")
        } else if self.price <= 0.0 {
            Some("non-positive price")
        } else if !self.volume.is_finite() {
            Some("non-finite volume")
        } else if self.volume < 0.0 {
            Some("negative volume")
        } else {
            None
        }
    }
}

/// How zero-volume (non-trading) bars are resolved before the kernel runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GapPolicy {
    /// Drop zero-volume bars.
    #[default]
    Skip,
    /// Replace a zero volume with the previous accepted bar's volume
    /// (price kept). Leading zero-volume bars have no donor and are dropped.
    CarryForward,
    /// Any zero-volume bar is a hard error.
    Fail,
}

impl std::str::FromStr for GapPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "skip" => Ok(GapPolicy::Skip),
            "carry" | "carry_forward" => Ok(GapPolicy::CarryForward),
            "fail" => Ok(GapPolicy::Fail),
            other => Err(format!("unknown gap policy `{other}` (expected skip|carry|fail)")),
        }
    }
}

impl fmt::Display for GapPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GapPolicy::Skip => write!(f, "skip"),
            GapPolicy::CarryForward => write!(f, "carry"),
            GapPolicy::Fail => write!(f, "fail"),
        }
    }
}

/// A validated, calendar-ordered series of bars for one symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSeries {
    pub symbol: String,
    pub bars: Vec<Bar>,
    pub gap_policy: GapPolicy,
}

impl SymbolSeries {
    /// Validating constructor: symbol non-empty, bars valid and strictly
    /// increasing by date.
    pub fn new(
        symbol: impl Into<String>,
        bars: Vec<Bar>,
        gap_policy: GapPolicy,
    ) -> Result<Self, MarketDataError> {
        let symbol = symbol.into();
        if symbol.is_empty() {
            return Err(MarketDataError::EmptySymbol);
        }
        for bar in &bars {
            if let Some(reason) = bar.check() {
                return Err(MarketDataError::InvalidBar { date: bar.date, reason });
            }
        }
        for pair in bars.windows(2) {
            if pair[1].date <= pair[0].date {
                if pair[1].date == pair[0].date {
                    return Err(MarketDataError::DuplicateTimestamp {
                        symbol,
                        date: pair[1].date,
                    });
                }
                return Err(MarketDataError::UnorderedBars { date: pair[1].date });
            }
        }
        Ok(SymbolSeries { symbol, bars, gap_policy })
    }

    pub fn with_gap_policy(mut self, gap_policy: GapPolicy) -> Self {
        self.gap_policy = gap_policy;
        self
    }

    pub fn len(&self) -> usize {
        self.bars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bars.is_empty()
    }
}

/// What happened while parsing one input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestReport {
    /// Data rows read (header and blank lines excluded).
    pub rows_read: usize,
    pub rows_accepted: usize,
    /// Rejected rows as (1-based physical line number, reason).
    pub rejected: Vec<(usize, String)>,
    /// Zero-volume bars resolved by [`clean_series`]; zero straight after parse.
    pub gaps_handled: usize,
}

/// Parse a CSV byte stream into a sorted, validated series plus a report.
///
/// Rejected rows are recorded, not fatal, unless every row is rejected.
/// Duplicate dates among accepted rows and a bad header are hard errors.
pub fn parse_series<R: Read>(
    mut input: R,
    symbol: &str,
) -> Result<(SymbolSeries, IngestReport), MarketDataError> {
    if symbol.is_empty() {
        return Err(MarketDataError::EmptySymbol);
    }
    let mut raw = Vec::new();
    input.read_to_end(&mut raw)?;
    let text = String::from_utf8(raw).map_err(|_| MarketDataError::InvalidUtf8)?;

    let mut lines = text.split('\n').enumerate();
    let header = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line.trim_end_matches('\r').trim();
                if line.is_empty() {
                    continue;
                }
                break line.to_string();
            }
            None => {
                return Err(MarketDataError::MalformedHeader { found: String::new() })
            }
        }
    };
    if header != CSV_HEADER {
        return Err(MarketDataError::MalformedHeader { found: header });
    }

    let mut report = IngestReport::default();
    let mut bars: Vec<Bar> = Vec::new();
    for (index, line) in lines {
        let line = line.trim_end_matches('\r').trim();
        if line.is_empty() {
            continue;
        }
        report.rows_read += 1;
        match parse_row(line) {
            Ok(bar) => {
                bars.push(bar);
                report.rows_accepted += 1;
            }
            Err(reason) => report.rejected.push((index + 1, reason.to_string())),
        }
    }

    if bars.is_empty() {
        return Err(MarketDataError::NoAcceptedRows);
    }

    // Exchange exports vary in ordering; enforce the invariant here.
    bars.sort_by_key(|b| b.date);
    for pair in bars.windows(2) {
        if pair[0].date == pair[1].date {
            return Err(MarketDataError::DuplicateTimestamp {
                symbol: symbol.to_string(),
                date: pair[0].date,
            });
        }
    }

    let series = SymbolSeries {
        symbol: symbol.to_string(),
        bars,
        gap_policy: GapPolicy::default(),
    };
    Ok((series, report))
}

fn parse_row(line: &str) -> Result<Bar, &'static str> {
    let mut fields = line.split(',');
    let (date, price, volume) = match (fields.next(), fields.next(), fields.next(), fields.next())
    {
        (Some(d), Some(p), Some(v), None) => (d.trim(), p.trim(), v.trim()),
        _ => return Err("wrong field count (expected 3)"),
    };
    let date = NaiveDate::parse_from_str(date, "%Y-%m-%d").map_err(|_| "invalid date")?;
    let price: f64 = price.parse().map_err(|_| "invalid price")?;
    let volume: f64 = volume.parse().map_err(|_| "invalid volume")?;
    Bar::new(date, price, volume).map_err(|e| match e {
        MarketDataError::InvalidBar { reason, .. } => reason,
        _ => "invalid bar",
    })
}

/// A cleaned series together with the number of zero-volume bars resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Cleaned {
    pub series: SymbolSeries,
    pub gaps_handled: usize,
}

/// Resolve zero-volume bars according to the series' gap policy.
///
/// The output never contains a zero-volume bar and always has at least two
/// bars; anything less is an error because no volatility term can be formed.
pub fn clean_series(series: &SymbolSeries) -> Result<Cleaned, MarketDataError> {
    let mut bars: Vec<Bar> = Vec::with_capacity(series.bars.len());
    let mut gaps_handled = 0usize;

    for bar in &series.bars {
        if bar.volume > 0.0 {
            bars.push(*bar);
            continue;
        }
        match series.gap_policy {
            GapPolicy::Skip => gaps_handled += 1,
            GapPolicy::CarryForward => {
                gaps_handled += 1;
                if let Some(prev) = bars.last() {
                    bars.push(Bar { volume: prev.volume, ..*bar });
                }
                // A leading zero-volume bar has no donor volume and is dropped.
            }
            GapPolicy::Fail => {
                return Err(MarketDataError::ZeroVolumeBar { date: bar.date });
            }
        }
    }

    if bars.len() < 2 {
        return Err(MarketDataError::InsufficientObservations { got: bars.len() });
    }

    Ok(Cleaned {
        series: SymbolSeries {
            symbol: series.symbol.clone(),
            bars,
            gap_policy: series.gap_policy,
        },
        gaps_handled,
    })
}

/// Re-serialize a series in the input CSV format: LF endings, values as
/// shortest round-trip decimals capped at 10 significant digits.
pub fn serialize_series(series: &SymbolSeries) -> String {
    let mut out = String::with_capacity(series.bars.len() * 32 + CSV_HEADER.len() + 1);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for bar in &series.bars {
        out.push_str(&format!(
            "{},{},{}\n",
            bar.date.format("%Y-%m-%d"),
            format_value(bar.price),
            format_value(bar.volume)
        ));
    }
    out
}

/// Enumerate `<SYMBOL>.csv` files of a universe directory, sorted by symbol.
/// The symbol is the file stem; non-CSV entries are ignored.
pub fn universe_files(dir: &Path) -> std::io::Result<Vec<(String, PathBuf)>> {
    let mut found = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        if path.extension().and_then(|e| e.to_str()) != Some("csv") {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            found.push((stem.to_string(), path.clone()));
        }
    }
    found.sort();
    Ok(found)
}
