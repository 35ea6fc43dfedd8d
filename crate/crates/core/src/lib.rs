//! Market-activity entropy analytics.
//!
//! The quantity of interest is the *macrostate parameter* `P_M` of a traded
//! asset: the arithmetic mean of the normalized one-step changes of the
//! activity `a_t = p_t * V_t` (close price times transacted volume),
//!
//! ```text
//! Vol_n(t) = (a_t - a_{t-1}) / a_{t-1}
//! P_M      = (1/N) * sum_{t=1..N} Vol_n(t)
//! ```
//!
//! Its magnitude reads as the disorder (entropy) of the asset's trading
//! activity; ranking a universe of symbols by it yields an investment risk
//! diagram, and tracking it over rolling windows exposes crisis regimes.
//!
//! Module map:
//! - [`market_data`] — CSV ingestion, validation, gap handling, re-serialization.
//! - [`indicator`] — the numerical kernel: activity, normalized volatility,
//!   per-period and rolling macrostate parameter, peak detection.
//! - [`diagram`] — risk ranking, band assignment, CSV/SVG emission.
//! - [`synthetic`] — seeded geometric-Brownian fixture generator with
//!   injectable crisis shocks.

pub mod diagram;
pub mod indicator;
pub mod market_data;
pub mod numfmt;
pub mod sum;
pub mod synthetic;
