//! The numerical kernel: activity, normalized volatility, and the macrostate
//! parameter, in whole-period, calendar-bucketed, and rolling forms.
//!
//! For a cleaned series of bars the pipeline is
//!
//! ```text
//! a_t      = price_t * volume_t                       (activity)
//! Vol_n(t) = (a_t - a_{t-1}) / a_{t-1}                (normalized volatility)
//! P_M      = (1/N) * sum of the N volatility terms    (macrostate parameter)
//! ```
//!
//! A series of M bars yields N = M - 1 transition terms. Terms are signed;
//! the absolute-value variant exists only as an explicit opt-in
//! ([`TermMode::Absolute`]) because the signed form is the defined quantity.
//! All sums use compensated accumulation (see [`crate::sum`]).

use chrono::{Datelike, Days, Months, NaiveDate};
use serde::Serialize;
use thiserror::Error;

use crate::market_data::{Bar, SymbolSeries};
use crate::sum::compensated_mean;

#[derive(Debug, Error)]
pub enum IndicatorError {
    #[error("insufficient observations: need at least {needed}, got {got}")]
    InsufficientObservations { needed: usize, got: usize },
    #[error("non-positive activity on {date}")]
    NonPositiveActivity { date: NaiveDate },
    #[error("no computable periods")]
    NoComputablePeriods,
    #[error("rolling window of {window} transition(s) larger than the {available} available")]
    WindowTooLarge { window: usize, available: usize },
    #[error("{0}")]
    InvalidParameter(String),
    #[error("empty rolling series")]
    EmptyRolling,
}

/// Activity `a_t = price * volume` of one observation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActivityPoint {
    pub date: NaiveDate,
    pub activity: f64,
}

/// One normalized volatility term. The date is that of `a_t`, the later
/// observation of the pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolatilityPoint {
    pub date: NaiveDate,
    pub vol_n: f64,
}

/// Macrostate parameter of one symbol over one period, with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacrostateReport {
    pub symbol: String,
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
    pub p_m: f64,
    pub n_transitions: usize,
    pub min_vol: f64,
    pub max_vol: f64,
}

/// Calendar partitioning for [`period_macrostate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Bucketing {
    #[default]
    Yearly,
    Monthly,
}

impl std::str::FromStr for Bucketing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yearly" => Ok(Bucketing::Yearly),
            "monthly" => Ok(Bucketing::Monthly),
            other => Err(format!("unknown bucketing `{other}` (expected yearly|monthly)")),
        }
    }
}

/// Signed terms are the defined quantity; absolute terms are an explicit
/// deviation that makes the parameter a non-negative disorder magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TermMode {
    #[default]
    Signed,
    Absolute,
}

/// Per-bucket reports plus how many buckets were too short to compute.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodMacrostates {
    pub reports: Vec<MacrostateReport>,
    /// Buckets holding fewer than 2 bars, omitted from `reports`.
    pub skipped_buckets: usize,
}

/// One rolling-window macrostate value, stamped with the window's last date.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RollingPoint {
    pub date: NaiveDate,
    pub p_m: f64,
}

/// A contiguous run of rolling values above the peak threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakRun {
    pub start: NaiveDate,
    pub end: NaiveDate,
    /// Largest |p_m| inside the run.
    pub peak: f64,
}

/// Activity `a_t = p_t * V_t` for every bar, order preserved.
pub fn activity_series(series: &SymbolSeries) -> Result<Vec<ActivityPoint>, IndicatorError> {
    if series.bars.is_empty() {
        return Err(IndicatorError::InsufficientObservations { needed: 1, got: 0 });
    }
    Ok(activities_of(&series.bars))
}

fn activities_of(bars: &[Bar]) -> Vec<ActivityPoint> {
    bars.iter()
        .map(|b| ActivityPoint { date: b.date, activity: b.price * b.volume })
        .collect()
}

/// Normalized volatility `(a_t - a_{t-1}) / a_{t-1}` between consecutive
/// activities. Output length is input length minus one.
pub fn normalized_volatility(
    activities: &[ActivityPoint],
) -> Result<Vec<VolatilityPoint>, IndicatorError> {
    if activities.len() < 2 {
        return Err(IndicatorError::InsufficientObservations {
            needed: 2,
            got: activities.len(),
        });
    }
    if let Some(bad) = activities.iter().find(|a| a.activity <= 0.0 || a.activity.is_nan()) {
        return Err(IndicatorError::NonPositiveActivity { date: bad.date });
    }
    Ok(activities
        .windows(2)
        .map(|pair| VolatilityPoint {
            date: pair[1].date,
            vol_n: (pair[1].activity - pair[0].activity) / pair[0].activity,
        })
        .collect())
}

/// Map terms to their absolute values (dates kept).
pub fn absolute_terms(vols: &[VolatilityPoint]) -> Vec<VolatilityPoint> {
    vols.iter()
        .map(|v| VolatilityPoint { date: v.date, vol_n: v.vol_n.abs() })
        .collect()
}

fn apply_mode(vols: Vec<VolatilityPoint>, mode: TermMode) -> Vec<VolatilityPoint> {
    match mode {
        TermMode::Signed => vols,
        TermMode::Absolute => absolute_terms(&vols),
    }
}

/// Mean, count and extrema of the volatility terms; the period spans the
/// first to the last term timestamp.
pub fn macrostate_parameter(
    symbol: &str,
    vols: &[VolatilityPoint],
) -> Result<MacrostateReport, IndicatorError> {
    if vols.is_empty() {
        return Err(IndicatorError::InsufficientObservations { needed: 1, got: 0 });
    }
    let p_m = compensated_mean(vols.iter().map(|v| v.vol_n)).expect("non-empty");
    let mut min_vol = f64::INFINITY;
    let mut max_vol = f64::NEG_INFINITY;
    for v in vols {
        min_vol = min_vol.min(v.vol_n);
        max_vol = max_vol.max(v.vol_n);
    }
    Ok(MacrostateReport {
        symbol: symbol.to_string(),
        period_start: vols[0].date,
        period_end: vols[vols.len() - 1].date,
        p_m,
        n_transitions: vols.len(),
        min_vol,
        max_vol,
    })
}

/// Per-calendar-bucket macrostate reports (signed terms).
///
/// Bars are partitioned by year or month; transitions never straddle a
/// bucket boundary. Buckets with fewer than 2 bars are skipped and counted.
/// Report periods are the calendar bucket bounds, so every symbol computed
/// for the same bucket carries an identical period.
pub fn period_macrostate(
    series: &SymbolSeries,
    bucketing: Bucketing,
) -> Result<PeriodMacrostates, IndicatorError> {
    period_macrostate_terms(series, bucketing, TermMode::Signed)
}

/// [`period_macrostate`] with an explicit term mode.
pub fn period_macrostate_terms(
    series: &SymbolSeries,
    bucketing: Bucketing,
    mode: TermMode,
) -> Result<PeriodMacrostates, IndicatorError> {
    let mut reports = Vec::new();
    let mut skipped_buckets = 0usize;

    for (start, end, bars) in bucket_ranges(&series.bars, bucketing) {
        if bars.len() < 2 {
            skipped_buckets += 1;
            continue;
        }
        let vols = apply_mode(normalized_volatility(&activities_of(bars))?, mode);
        let mut report = macrostate_parameter(&series.symbol, &vols)?;
        report.period_start = start;
        report.period_end = end;
        reports.push(report);
    }

    if reports.is_empty() {
        return Err(IndicatorError::NoComputablePeriods);
    }
    Ok(PeriodMacrostates { reports, skipped_buckets })
}

/// Contiguous per-bucket slices of a date-sorted bar array, with the
/// calendar bounds of each bucket. Buckets appear in chronological order.
fn bucket_ranges(bars: &[Bar], bucketing: Bucketing) -> Vec<(NaiveDate, NaiveDate, &[Bar])> {
    let key = |d: NaiveDate| match bucketing {
        Bucketing::Yearly => (d.year(), 0),
        Bucketing::Monthly => (d.year(), d.month()),
    };
    let bounds = |d: NaiveDate| -> (NaiveDate, NaiveDate) {
        match bucketing {
            Bucketing::Yearly => (
                NaiveDate::from_ymd_opt(d.year(), 1, 1).expect("valid year start"),
                NaiveDate::from_ymd_opt(d.year(), 12, 31).expect("valid year end"),
            ),
            Bucketing::Monthly => {
                let first =
                    NaiveDate::from_ymd_opt(d.year(), d.month(), 1).expect("valid month start");
                let last = first
                    .checked_add_months(Months::new(1))
                    .and_then(|next| next.checked_sub_days(Days::new(1)))
                    .expect("valid month end");
                (first, last)
            }
        }
    };

    let mut out = Vec::new();
    let mut range_start = 0usize;
    for i in 1..=bars.len() {
        if i == bars.len() || key(bars[i].date) != key(bars[range_start].date) {
            let (start, end) = bounds(bars[range_start].date);
            out.push((start, end, &bars[range_start..i]));
            range_start = i;
        }
    }
    out
}

/// Rolling macrostate parameter over windows of `window` transitions,
/// advancing by `step` (signed terms).
pub fn rolling_macrostate(
    series: &SymbolSeries,
    window: usize,
    step: usize,
) -> Result<Vec<RollingPoint>, IndicatorError> {
    rolling_macrostate_terms(series, window, step, TermMode::Signed)
}

/// [`rolling_macrostate`] with an explicit term mode.
pub fn rolling_macrostate_terms(
    series: &SymbolSeries,
    window: usize,
    step: usize,
    mode: TermMode,
) -> Result<Vec<RollingPoint>, IndicatorError> {
    if window == 0 {
        return Err(IndicatorError::InvalidParameter("window must be at least 1".into()));
    }
    if step == 0 {
        return Err(IndicatorError::InvalidParameter("step must be at least 1".into()));
    }
    let vols = apply_mode(normalized_volatility(&activity_series(series)?)?, mode);
    if window > vols.len() {
        return Err(IndicatorError::WindowTooLarge { window, available: vols.len() });
    }

    let mut out = Vec::with_capacity((vols.len() - window) / step + 1);
    let mut i = 0usize;
    while i + window <= vols.len() {
        let slice = &vols[i..i + window];
        out.push(RollingPoint {
            date: slice[window - 1].date,
            p_m: compensated_mean(slice.iter().map(|v| v.vol_n)).expect("non-empty window"),
        });
        i += step;
    }
    Ok(out)
}

/// Flag crisis-regime peaks in a rolling series.
///
/// The baseline is the median of |p_m| over the whole series; maximal
/// contiguous runs with |p_m| strictly above `factor * baseline` are
/// reported with the largest |p_m| inside each run. A zero baseline makes
/// any strictly positive |p_m| qualify.
pub fn detect_peaks(
    rolling: &[RollingPoint],
    factor: f64,
) -> Result<Vec<PeakRun>, IndicatorError> {
    if rolling.is_empty() {
        return Err(IndicatorError::EmptyRolling);
    }
    if factor <= 0.0 || factor.is_nan() {
        return Err(IndicatorError::InvalidParameter(format!(
            "peak factor must be positive, got {factor}"
        )));
    }

    let mut magnitudes: Vec<f64> = rolling.iter().map(|p| p.p_m.abs()).collect();
    magnitudes.sort_by(f64::total_cmp);
    let baseline = median_of_sorted(&magnitudes);
    let threshold = factor * baseline;

    let mut runs = Vec::new();
    let mut current: Option<(usize, f64)> = None; // (run start index, run max |p_m|)
    for (i, point) in rolling.iter().enumerate() {
        let magnitude = point.p_m.abs();
        if magnitude > threshold {
            current = match current {
                Some((start, peak)) => Some((start, peak.max(magnitude))),
                None => Some((i, magnitude)),
            };
        } else if let Some((start, peak)) = current.take() {
            runs.push(PeakRun { start: rolling[start].date, end: rolling[i - 1].date, peak });
        }
    }
    if let Some((start, peak)) = current {
        runs.push(PeakRun {
            start: rolling[start].date,
            end: rolling[rolling.len() - 1].date,
            peak,
        });
    }
    Ok(runs)
}

fn median_of_sorted(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
