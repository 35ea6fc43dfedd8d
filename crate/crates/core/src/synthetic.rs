//! Deterministic synthetic market generator for tests, fixtures and demos.
//!
//! Prices follow the exact discretization of geometric Brownian motion,
//!
//! ```text
//! p_{t+1} = p_t * exp((drift - volatility^2 / 2) + volatility * z_t)
//! ```
//!
//! with standard-normal draws `z_t`; volumes are log-normal around a median.
//! The generator is fully reproducible: the pseudo-random source is
//! SplitMix64 (Steele, Lea & Flood 2014) and normal deviates come from the
//! Acklam rational approximation of the inverse normal CDF applied to one
//! uniform per draw, so the draw count per day is fixed and the stream is
//! straightforward to reproduce in any language. Identical specs yield
//! bit-identical series.

use chrono::{Datelike, Days, NaiveDate, Weekday};
use thiserror::Error;

use crate::market_data::{Bar, GapPolicy, SymbolSeries};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
    #[error("shock window out of range: start {start} + duration {duration} exceeds {len} bars")]
    ShockOutOfRange { start: usize, duration: usize, len: usize },
    #[error("non-positive price after shock on {date}")]
    NonPositivePrice { date: NaiveDate },
    #[error("invalid shock: {0}")]
    InvalidShock(String),
}

/// Parameters of a synthetic geometric-Brownian daily series.
#[derive(Debug, Clone, PartialEq)]
pub struct GbmSpec {
    pub seed: u64,
    pub n_days: usize,
    pub start_date: NaiveDate,
    pub initial_price: f64,
    /// Drift per day.
    pub drift: f64,
    /// Volatility per sqrt(day); zero gives the deterministic path.
    pub volatility: f64,
    pub volume_median: f64,
    /// Log-space dispersion of volumes; zero gives constant volume.
    pub volume_sigma: f64,
}

impl GbmSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |msg: &str| Err(SynthError::InvalidSpec(msg.to_string()));
        if self.n_days < 2 {
            return fail("n_days must be >= 2");
        }
        if !self.initial_price.is_finite() || self.initial_price <= 0.0 {
            return fail("initial_price must be positive and finite");
        }
        if !self.drift.is_finite() {
            return fail("drift must be finite");
        }
        if !self.volatility.is_finite() || self.volatility < 0.0 {
            return fail("volatility must be non-negative and finite");
        }
        if !self.volume_median.is_finite() || self.volume_median <= 0.0 {
            return fail("volume_median must be positive and finite");
        }
        if !self.volume_sigma.is_finite() || self.volume_sigma < 0.0 {
            return fail("volume_sigma must be non-negative and finite");
        }
        Ok(())
    }
}

/// A crisis shock: volumes multiplied across a window of bars, price jumped
/// on the first shock day.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShockSpec {
    /// 0-based bar offset of the first shocked day.
    pub start_index: usize,
    /// Number of shocked days, at least 1.
    pub duration: usize,
    pub volume_multiplier: f64,
    /// Fractional price jump applied on the first shock day
    /// (price becomes `price * (1 + price_jump)`).
    pub price_jump: f64,
}

/// SplitMix64 pseudo-random generator (Steele, Lea & Flood 2014).
///
/// Public so that fixtures and ports can reproduce the exact stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw strictly inside (0, 1): the top 53 bits offset by half
    /// an ulp, so the inverse CDF below never sees 0 or 1.
    pub fn next_uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9007199254740992.0)
    }

    /// Standard normal draw via [`inverse_normal_cdf`]; exactly one uniform
    /// is consumed per call.
    pub fn next_normal(&mut self) -> f64 {
        inverse_normal_cdf(self.next_uniform())
    }
}

/// Acklam's rational approximation of the standard normal inverse CDF.
/// Absolute relative error below 1.15e-9 over (0, 1), which is far inside
/// the noise floor of anything generated from it.
pub fn inverse_normal_cdf(p: f64) -> f64 {
    debug_assert!(p > 0.0 && p < 1.0);

    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Generate a weekday-calendar series from a spec. Pure in the spec: equal
/// specs give bit-identical output.
pub fn generate(spec: &GbmSpec, symbol: &str) -> Result<SymbolSeries, SynthError> {
    spec.validate()?;

    // Independent sub-streams for prices and volumes, both derived from the
    // master seed, keep the two paths decoupled from each other's draw count.
    let mut master = SplitMix64::new(spec.seed);
    let mut price_rng = SplitMix64::new(master.next_u64());
    let mut volume_rng = SplitMix64::new(master.next_u64());

    let step = spec.drift - spec.volatility * spec.volatility / 2.0;
    let mut bars = Vec::with_capacity(spec.n_days);
    let mut date = next_weekday_on_or_after(spec.start_date);
    let mut price = spec.initial_price;

    for day in 0..spec.n_days {
        if day > 0 {
            price *= (step + spec.volatility * price_rng.next_normal()).exp();
            date = next_weekday_on_or_after(date + Days::new(1));
        }
        let volume = spec.volume_median * (spec.volume_sigma * volume_rng.next_normal()).exp();
        if !price.is_finite() || price <= 0.0 {
            return Err(SynthError::InvalidSpec(format!(
                "price path left the representable range on day {day}"
            )));
        }
        bars.push(Bar { date, price, volume });
    }

    Ok(SymbolSeries {
        symbol: symbol.to_string(),
        bars,
        gap_policy: GapPolicy::default(),
    })
}

fn next_weekday_on_or_after(mut date: NaiveDate) -> NaiveDate {
    while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
        date = date + Days::new(1);
    }
    date
}

/// Apply a crisis shock to a series: volumes multiplied inside the window,
/// price additionally jumped on the first shock day. Bars outside the
/// window are untouched.
pub fn inject_shock(series: &SymbolSeries, shock: &ShockSpec) -> Result<SymbolSeries, SynthError> {
    if shock.duration < 1 {
        return Err(SynthError::InvalidShock("duration must be at least 1".into()));
    }
    if !shock.volume_multiplier.is_finite() || shock.volume_multiplier <= 0.0 {
        return Err(SynthError::InvalidShock("volume_multiplier must be positive".into()));
    }
    if !shock.price_jump.is_finite() {
        return Err(SynthError::InvalidShock("price_jump must be finite".into()));
    }
    let end = shock
        .start_index
        .checked_add(shock.duration)
        .filter(|&e| e <= series.bars.len())
        .ok_or(SynthError::ShockOutOfRange {
            start: shock.start_index,
            duration: shock.duration,
            len: series.bars.len(),
        })?;

    let mut bars = series.bars.clone();
    for bar in &mut bars[shock.start_index..end] {
        bar.volume *= shock.volume_multiplier;
    }
    let first = &mut bars[shock.start_index];
    first.price *= 1.0 + shock.price_jump;
    if !first.price.is_finite() || first.price <= 0.0 {
        return Err(SynthError::NonPositivePrice { date: first.date });
    }

    Ok(SymbolSeries {
        symbol: series.symbol.clone(),
        bars,
        gap_policy: series.gap_policy,
    })
}
