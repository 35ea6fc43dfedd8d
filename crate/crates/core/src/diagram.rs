//! Investment risk diagrams: rank a universe of symbols by the magnitude of
//! their period macrostate parameter, assign within-universe quartile bands,
//! and emit the ranking as CSV or a standalone SVG bar chart.
//!
//! Ranking uses |p_m|: a large negative activity collapse is as much
//! disorder as a large expansion. Signed values stay visible in labels and
//! CSV. Both emitters produce deterministic bytes for a given diagram.

use std::fmt;

use chrono::NaiveDate;
use thiserror::Error;

use crate::indicator::MacrostateReport;

/// Minimum SVG canvas width in pixels.
pub const MIN_SVG_WIDTH: usize = 200;
/// Minimum SVG canvas height in pixels.
pub const MIN_SVG_HEIGHT: usize = 150;

#[derive(Debug, Error)]
pub enum DiagramError {
    #[error("empty universe: at least one report is required")]
    EmptyUniverse,
    #[error("mixed periods: symbol(s) {symbols:?} do not share the period {expected_start}..{expected_end}")]
    MixedPeriods {
        symbols: Vec<String>,
        expected_start: NaiveDate,
        expected_end: NaiveDate,
    },
    #[error(
        "svg dimensions {width}x{height} below minimum {MIN_SVG_WIDTH}x{MIN_SVG_HEIGHT}"
    )]
    DimensionsTooSmall { width: usize, height: usize },
}

/// Within-universe risk band, ordered low < moderate < elevated < high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Band {
    Low,
    Moderate,
    Elevated,
    High,
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Band::Low => write!(f, "low"),
            Band::Moderate => write!(f, "moderate"),
            Band::Elevated => write!(f, "elevated"),
            Band::High => write!(f, "high"),
        }
    }
}

/// One ranked symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskEntry {
    pub symbol: String,
    pub p_m: f64,
    /// 1-based position in descending |p_m| order.
    pub rank: usize,
    pub band: Band,
}

/// A ranked universe for one period.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskDiagram {
    pub period_start: NaiveDate,
    pub period_end: NaiveDate,
    /// Sorted by descending |p_m|, ties broken by ascending symbol.
    pub entries: Vec<RiskEntry>,
    /// Build timestamp; metadata only, never rendered into outputs.
    pub generated_at: NaiveDate,
}

/// Rank reports of one common period into a risk diagram.
///
/// Bands are within-universe quartiles of |p_m| by rank position: the
/// entry at 1-based rank r occupies the quartile `floor(4*(r-1)/n)`, so a
/// 40-symbol universe splits 10/10/10/10 and with fewer than four symbols
/// the boundaries collapse toward `high` (a singleton is banded high).
pub fn build_diagram(reports: &[MacrostateReport]) -> Result<RiskDiagram, DiagramError> {
    let first = reports.first().ok_or(DiagramError::EmptyUniverse)?;
    let (start, end) = (first.period_start, first.period_end);
    let offenders: Vec<String> = reports
        .iter()
        .filter(|r| r.period_start != start || r.period_end != end)
        .map(|r| r.symbol.clone())
        .collect();
    if !offenders.is_empty() {
        return Err(DiagramError::MixedPeriods {
            symbols: offenders,
            expected_start: start,
            expected_end: end,
        });
    }

    let mut ranked: Vec<&MacrostateReport> = reports.iter().collect();
    ranked.sort_by(|a, b| {
        b.p_m
            .abs()
            .total_cmp(&a.p_m.abs())
            .then_with(|| a.symbol.cmp(&b.symbol))
    });

    let n = ranked.len();
    let entries = ranked
        .into_iter()
        .enumerate()
        .map(|(i, report)| RiskEntry {
            symbol: report.symbol.clone(),
            p_m: report.p_m,
            rank: i + 1,
            band: band_for_position(i, n),
        })
        .collect();

    Ok(RiskDiagram {
        period_start: start,
        period_end: end,
        entries,
        generated_at: chrono::Utc::now().date_naive(),
    })
}

fn band_for_position(index: usize, universe: usize) -> Band {
    match index * 4 / universe {
        0 => Band::High,
        1 => Band::Elevated,
        2 => Band::Moderate,
        _ => Band::Low,
    }
}

/// Render the diagram as CSV: header `rank,symbol,p_m,band`, rows in rank
/// order, p_m with 6 decimal places, LF endings.
pub fn emit_csv(diagram: &RiskDiagram) -> String {
    let mut out = String::from("rank,symbol,p_m,band\n");
    for entry in &diagram.entries {
        out.push_str(&format!(
            "{},{},{:.6},{}\n",
            entry.rank,
            entry.symbol,
            unsign_zero(entry.p_m),
            entry.band
        ));
    }
    out
}

fn unsign_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// Render the diagram as a self-contained SVG horizontal bar chart.
///
/// Bar length is |p_m| scaled to the universe maximum; entries with a
/// negative signed p_m carry an extra `neg` class (translucent fill with a
/// dashed outline). Fonts are referenced by generic family only.
pub fn emit_svg(
    diagram: &RiskDiagram,
    width_px: usize,
    height_px: usize,
) -> Result<String, DiagramError> {
    if width_px < MIN_SVG_WIDTH || height_px < MIN_SVG_HEIGHT {
        return Err(DiagramError::DimensionsTooSmall { width: width_px, height: height_px });
    }

    const MARGIN_LEFT: f64 = 80.0;
    const MARGIN_RIGHT: f64 = 70.0;
    const MARGIN_TOP: f64 = 28.0;
    const MARGIN_BOTTOM: f64 = 12.0;

    let plot_w = width_px as f64 - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = height_px as f64 - MARGIN_TOP - MARGIN_BOTTOM;
    let n = diagram.entries.len() as f64;
    let row_h = plot_h / n;
    let bar_h = (row_h * 0.68).max(1.0);
    let max_mag = diagram
        .entries
        .iter()
        .map(|e| e.p_m.abs())
        .fold(0.0_f64, f64::max);

    let mut svg = String::new();
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width_px}\" height=\"{height_px}\" \
         viewBox=\"0 0 {width_px} {height_px}\">\n"
    ));
    svg.push_str(
        "<style>\n\
         text { font-family: sans-serif; font-size: 11px; fill: #1a1a1a; }\n\
         .title { font-size: 13px; font-weight: bold; }\n\
         .band-high { fill: #c0392b; }\n\
         .band-elevated { fill: #e67e22; }\n\
         .band-moderate { fill: #d4ac0d; }\n\
         .band-low { fill: #27ae60; }\n\
         .neg { fill-opacity: 0.45; stroke: #444444; stroke-dasharray: 3 2; }\n\
         .axis { stroke: #888888; stroke-width: 1; }\n\
         </style>\n",
    );
    svg.push_str(&format!(
        "<text class=\"title\" x=\"8\" y=\"18\">Investment risk {} to {}</text>\n",
        diagram.period_start, diagram.period_end
    ));
    svg.push_str(&format!(
        "<line class=\"axis\" x1=\"{ml}\" y1=\"{top}\" x2=\"{ml}\" y2=\"{bottom}\"/>\n",
        ml = fmt_px(MARGIN_LEFT),
        top = fmt_px(MARGIN_TOP),
        bottom = fmt_px(MARGIN_TOP + plot_h),
    ));

    for (i, entry) in diagram.entries.iter().enumerate() {
        let y = MARGIN_TOP + i as f64 * row_h;
        let bar_y = y + (row_h - bar_h) / 2.0;
        let text_y = y + row_h / 2.0 + 4.0;
        let len = if max_mag > 0.0 {
            entry.p_m.abs() / max_mag * plot_w
        } else {
            0.0
        };
        let mut class = format!("band-{}", entry.band);
        if entry.p_m < 0.0 {
            class.push_str(" neg");
        }
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\" text-anchor=\"end\">{sym}</text>\n",
            x = fmt_px(MARGIN_LEFT - 6.0),
            y = fmt_px(text_y),
            sym = escape_xml(&entry.symbol),
        ));
        svg.push_str(&format!(
            "<rect class=\"{class}\" x=\"{x}\" y=\"{y}\" width=\"{w}\" height=\"{h}\"/>\n",
            x = fmt_px(MARGIN_LEFT),
            y = fmt_px(bar_y),
            w = fmt_px(len),
            h = fmt_px(bar_h),
        ));
        svg.push_str(&format!(
            "<text x=\"{x}\" y=\"{y}\">{value:.6}</text>\n",
            x = fmt_px(MARGIN_LEFT + len + 4.0),
            y = fmt_px(text_y),
            value = unsign_zero(entry.p_m),
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn fmt_px(v: f64) -> String {
    format!("{v:.2}")
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            other => out.push(other),
        }
    }
    out
}
