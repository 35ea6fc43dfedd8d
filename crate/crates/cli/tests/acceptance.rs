//! Acceptance suite. Each test implements one release criterion at its
//! stated tolerance and prints a PASS line; a failed assertion is the FAIL.
//!
//! Run with `cargo test -p macrostate-cli --test acceptance -- --nocapture`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use chrono::{Days, NaiveDate};
use tempfile::TempDir;

use macrostate::diagram::{build_diagram, emit_csv, emit_svg, Band};
use macrostate::indicator::{
    activity_series, detect_peaks, macrostate_parameter, normalized_volatility,
    period_macrostate, rolling_macrostate, Bucketing, MacrostateReport,
};
use macrostate::market_data::{clean_series, parse_series, serialize_series, Bar, GapPolicy,
    SymbolSeries};
use macrostate::synthetic::{generate, inject_shock, GbmSpec, ShockSpec, SplitMix64};

const TOLERANCE: f64 = 1e-12;

fn pass(name: &str) {
    println!("ACCEPTANCE {name}: PASS");
}

fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2008, 1, 2).unwrap()
}

fn relative_error(a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    (a - b).abs() / a.abs().max(b.abs())
}

/// Random positive-activity series, 2..=50 bars, driven by the seeded
/// generator so the suite is reproducible.
fn random_series(rng: &mut SplitMix64, max_len: usize) -> SymbolSeries {
    let len = 2 + (rng.next_u64() as usize) % (max_len - 1);
    let bars = (0..len)
        .map(|i| Bar {
            date: day0() + Days::new(i as u64),
            price: 0.01 + rng.next_uniform() * 100.0,
            volume: 1.0 + rng.next_uniform() * 1_000_000.0,
        })
        .collect();
    SymbolSeries { symbol: "R".into(), bars, gap_policy: GapPolicy::Skip }
}

/// Independently coded single-pass brute force of the defining formula,
/// straight from raw bars with naive accumulation.
fn brute_force_macrostate(bars: &[Bar]) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for t in 1..bars.len() {
        let previous = bars[t - 1].price * bars[t - 1].volume;
        let current = bars[t].price * bars[t].volume;
        sum += (current - previous) / previous;
        count += 1;
    }
    sum / count as f64
}

fn kernel_macrostate(series: &SymbolSeries) -> MacrostateReport {
    let vols = normalized_volatility(&activity_series(series).unwrap()).unwrap();
    macrostate_parameter(&series.symbol, &vols).unwrap()
}

#[test]
fn acceptance_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0xACCE_0001);
    for case in 0..1000 {
        let series = random_series(&mut rng, 50);
        let kernel = kernel_macrostate(&series).p_m;
        let oracle = brute_force_macrostate(&series.bars);
        let err = relative_error(kernel, oracle);
        assert!(
            err <= TOLERANCE,
            "case {case}: kernel {kernel} vs oracle {oracle} (rel err {err:e})"
        );
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    pass("oracle equivalence (1000 series, 1e-12 relative)");
}

#[test]
fn acceptance_closed_form_cases() {
    // constant activity: exactly zero
    let constant = SymbolSeries {
        symbol: "C".into(),
        bars: (0..20)
            .map(|i| Bar { date: day0() + Days::new(i), price: 12.5, volume: 4000.0 })
            .collect(),
        gap_policy: GapPolicy::Skip,
    };
    assert_eq!(kernel_macrostate(&constant).p_m, 0.0);

    // activity doubling daily: every term 1.0 and mean 1.0
    let doubling = SymbolSeries {
        symbol: "D".into(),
        bars: (0..30)
            .map(|i| Bar {
                date: day0() + Days::new(i),
                price: 1.0,
                volume: (2.0_f64).powi(i as i32),
            })
            .collect(),
        gap_policy: GapPolicy::Skip,
    };
    let vols = normalized_volatility(&activity_series(&doubling).unwrap()).unwrap();
    for v in &vols {
        assert!((v.vol_n - 1.0).abs() <= TOLERANCE, "{}", v.vol_n);
    }
    assert!((kernel_macrostate(&doubling).p_m - 1.0).abs() <= TOLERANCE);

    // the same closed form through the synthetic generator
    let spec = GbmSpec {
        seed: 9,
        n_days: 40,
        start_date: day0(),
        initial_price: 50.0,
        drift: std::f64::consts::LN_2,
        volatility: 0.0,
        volume_median: 300.0,
        volume_sigma: 0.0,
    };
    let series = generate(&spec, "D2").unwrap();
    let vols = normalized_volatility(&activity_series(&series).unwrap()).unwrap();
    for v in &vols {
        assert!((v.vol_n - 1.0).abs() <= TOLERANCE, "{}", v.vol_n);
    }
    assert!((kernel_macrostate(&series).p_m - 1.0).abs() <= TOLERANCE);

    pass("closed-form cases (constant -> 0 exact, doubling -> 1 within 1e-12)");
}

#[test]
fn acceptance_scale_invariance() {
    let mut rng = SplitMix64::new(0xACCE_0002);
    let universe: Vec<SymbolSeries> = (0..100)
        .map(|i| {
            let mut s = random_series(&mut rng, 50);
            s.symbol = format!("S{i:03}");
            s
        })
        .collect();

    let reports_of = |series_list: &[SymbolSeries]| -> Vec<MacrostateReport> {
        series_list
            .iter()
            .map(|s| {
                period_macrostate(s, Bucketing::Yearly).unwrap().reports.remove(0)
            })
            .collect()
    };
    let base_reports = reports_of(&universe);
    let base_diagram = build_diagram(&base_reports).unwrap();

    for k in 0..10 {
        let factor = 0.01 + rng.next_uniform() * 99.99;
        let scale_price = k % 2 == 0;
        let scaled: Vec<SymbolSeries> = universe
            .iter()
            .map(|s| SymbolSeries {
                symbol: s.symbol.clone(),
                bars: s
                    .bars
                    .iter()
                    .map(|b| Bar {
                        date: b.date,
                        price: if scale_price { b.price * factor } else { b.price },
                        volume: if scale_price { b.volume } else { b.volume * factor },
                    })
                    .collect(),
                gap_policy: s.gap_policy,
            })
            .collect();

        for (original, rescaled) in universe.iter().zip(&scaled) {
            let vols = normalized_volatility(&activity_series(original).unwrap()).unwrap();
            let vols_scaled =
                normalized_volatility(&activity_series(rescaled).unwrap()).unwrap();
            for (a, b) in vols.iter().zip(&vols_scaled) {
                assert!(
                    relative_error(a.vol_n, b.vol_n) <= TOLERANCE,
                    "factor {factor}: {} vs {}",
                    a.vol_n,
                    b.vol_n
                );
            }
            let pm = kernel_macrostate(original).p_m;
            let pm_scaled = kernel_macrostate(rescaled).p_m;
            assert!(relative_error(pm, pm_scaled) <= TOLERANCE);
        }

        let scaled_diagram = build_diagram(&reports_of(&scaled)).unwrap();
        for (a, b) in base_diagram.entries.iter().zip(&scaled_diagram.entries) {
            assert_eq!(a.symbol, b.symbol, "rank order changed at factor {factor}");
            assert_eq!(a.rank, b.rank);
            assert_eq!(a.band, b.band);
        }
    }
    pass("scale invariance (100 series x 10 factors, terms/p_m 1e-12, ranks identical)");
}

#[test]
fn acceptance_crisis_sensitivity() {
    // zero-volatility baseline, 45 weekday bars, x10 volume shock on 20 days
    let spec = GbmSpec {
        seed: 7,
        n_days: 45,
        start_date: day0(),
        initial_price: 100.0,
        drift: 0.0,
        volatility: 0.0,
        volume_median: 10_000.0,
        volume_sigma: 0.0,
    };
    let onset = 15usize;
    let baseline = generate(&spec, "CRISIS").unwrap();
    let shocked = inject_shock(
        &baseline,
        &ShockSpec {
            start_index: onset,
            duration: 20,
            volume_multiplier: 10.0,
            price_jump: 0.0,
        },
    )
    .unwrap();

    let window = 10usize;
    let rolling = rolling_macrostate(&shocked, window, 1).unwrap();

    // the maximum must fall within the shock-onset window
    let max_pm = rolling.iter().map(|p| p.p_m).fold(f64::NEG_INFINITY, f64::max);
    let onset_start = shocked.bars[onset].date;
    let onset_end = shocked.bars[onset + window - 1].date;
    for point in rolling.iter().filter(|p| p.p_m == max_pm) {
        assert!(
            onset_start <= point.date && point.date <= onset_end,
            "maximum at {} outside onset window {onset_start}..{onset_end}",
            point.date
        );
    }
    // oracle: the entry step is (10a - a)/a = 9, diluted over the window
    assert!((max_pm - 9.0 / window as f64).abs() <= TOLERANCE, "{max_pm}");

    let runs = detect_peaks(&rolling, 3.0).unwrap();
    assert_eq!(runs.len(), 1, "expected exactly one peak run, got {runs:?}");
    assert!(
        runs[0].start <= onset_end && onset_start <= runs[0].end,
        "run {:?} does not overlap the onset window {onset_start}..{onset_end}",
        runs[0]
    );
    pass("crisis sensitivity (rolling max inside onset, one peak run overlapping it)");
}

#[test]
fn acceptance_window_degeneracy() {
    let mut rng = SplitMix64::new(0xACCE_0003);
    for _ in 0..50 {
        let series = random_series(&mut rng, 40);
        let global = kernel_macrostate(&series);
        let rolled = rolling_macrostate(&series, global.n_transitions, 1).unwrap();
        assert_eq!(rolled.len(), 1);
        assert_eq!(rolled[0].p_m, global.p_m, "exact equality required");
    }
    pass("window degeneracy (full window == global value, exact)");
}

#[test]
fn acceptance_diagram_contract() {
    let started = Instant::now();
    let reports: Vec<MacrostateReport> = (0..40)
        .map(|i| {
            let spec = GbmSpec {
                seed: 1000 + i as u64,
                n_days: 200,
                start_date: day0(),
                initial_price: 20.0 + i as f64,
                drift: 0.0002,
                volatility: 0.01 + 0.002 * i as f64,
                volume_median: 5_000.0,
                volume_sigma: 0.4,
            };
            let series = generate(&spec, &format!("S{i:02}")).unwrap();
            period_macrostate(&series, Bucketing::Yearly).unwrap().reports.remove(0)
        })
        .collect();

    let diagram = build_diagram(&reports).unwrap();
    let csv = emit_csv(&diagram);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "rank,symbol,p_m,band");
    assert_eq!(lines.len(), 41, "40 data rows expected");
    for (i, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{},", i + 1)), "rank not contiguous: {line}");
    }
    for band in [Band::High, Band::Elevated, Band::Moderate, Band::Low] {
        let count = lines[1..]
            .iter()
            .filter(|l| l.ends_with(&format!(",{band}")))
            .count();
        assert_eq!(count, 10, "band {band} not a quartile");
    }

    let svg = emit_svg(&diagram, 900, 600).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("well-formed XML");
    assert_eq!(doc.root_element().tag_name().name(), "svg");

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() < 2.0, "took {elapsed:?}");
    pass("diagram contract (40 rows, ranks 1-40, bands 10/10/10/10, well-formed SVG)");
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_macrostate")
}

fn run_in(dir: &Path, args: &[&str]) -> (i32, String) {
    let output = Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    (
        output.status.code().expect("exit code"),
        String::from_utf8_lossy(&output.stderr).into_owned(),
    )
}

fn snapshot(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut files: Vec<(PathBuf, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            let bytes = std::fs::read(&path).unwrap();
            (PathBuf::from(path.file_name().unwrap()), bytes)
        })
        .collect();
    files.sort();
    files
}

#[test]
fn acceptance_round_trip_and_determinism() {
    // fixed point of parse -> clean -> re-serialize -> parse
    let spec = GbmSpec {
        seed: 31337,
        n_days: 120,
        start_date: day0(),
        initial_price: 73.21,
        drift: 0.0004,
        volatility: 0.025,
        volume_median: 12_345.0,
        volume_sigma: 0.7,
    };
    let raw = serialize_series(&generate(&spec, "RT").unwrap());
    let once = {
        let (parsed, _) = parse_series(raw.as_bytes(), "RT").unwrap();
        serialize_series(&clean_series(&parsed).unwrap().series)
    };
    let twice = {
        let (parsed, _) = parse_series(once.as_bytes(), "RT").unwrap();
        serialize_series(&clean_series(&parsed).unwrap().series)
    };
    assert_eq!(once, twice, "serialize/parse/clean must reach a fixed point");

    // every CLI command is byte-deterministic across two consecutive runs
    let work = TempDir::new().unwrap();
    let data = work.path().join("data");
    std::fs::create_dir_all(&data).unwrap();
    for (symbol, seed) in [("AAA", "11"), ("BBB", "22"), ("CCC", "33")] {
        let (code, stderr) = run_in(
            work.path(),
            &[
                "synth", symbol, "--seed", seed, "--days", "90",
                "--start", "2008-01-01", "--vol", "0.03", "--vsig", "0.5",
                "--drift", "0.001", "--out", "data",
            ],
        );
        assert_eq!(code, 0, "{stderr}");
    }

    let command_sets: Vec<Vec<&str>> = vec![
        vec!["synth", "DET", "--seed", "5", "--days", "50", "--vol", "0.02",
             "--vsig", "0.3", "--shock-start", "10", "--shock-days", "5",
             "--shock-vmul", "4.0", "--out", "OUT"],
        vec!["compute", "--input", "data", "--out", "OUT", "--bucket", "monthly"],
        vec!["diagram", "2008", "--input", "data", "--out", "OUT", "--format", "csv,svg"],
        vec!["series", "--input", "data", "--out", "OUT", "--window", "10",
             "--step", "2", "--peak-factor", "3.0"],
    ];
    for args in &command_sets {
        let mut snapshots = Vec::new();
        for out_dir in ["run1", "run2"] {
            let concrete: Vec<&str> =
                args.iter().map(|a| if *a == "OUT" { out_dir } else { *a }).collect();
            let (code, stderr) = run_in(work.path(), &concrete);
            assert_eq!(code, 0, "{concrete:?}: {stderr}");
            snapshots.push(snapshot(&work.path().join(out_dir)));
        }
        assert_eq!(snapshots[0], snapshots[1], "{args:?} not byte-deterministic");
        assert!(!snapshots[0].is_empty());
        for d in ["run1", "run2"] {
            std::fs::remove_dir_all(work.path().join(d)).unwrap();
        }
    }
    pass("round-trip fixed point and CLI byte-determinism");
}

#[test]
fn acceptance_failure_taxonomy() {
    let work = TempDir::new().unwrap();
    let write = |rel: &str, content: &str| {
        let path = work.path().join(rel);
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, content).unwrap();
    };
    let valid = "date,close,volume\n2008-01-02,10,100\n2008-01-03,11,90\n2008-01-04,12,80\n";

    // corrupt file alone: total failure, path named
    write("solo/BAD.csv", "nonsense header\n1,2,3\n");
    let (code, stderr) = run_in(work.path(), &["compute", "--input", "solo/BAD.csv", "--out", "o1"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("BAD.csv"), "{stderr}");

    // corrupt file next to a valid one: partial failure, valid output written
    write("mixed/GOOD.csv", valid);
    write("mixed/BAD.csv", "nonsense header\n1,2,3\n");
    let (code, stderr) = run_in(work.path(), &["compute", "--input", "mixed", "--out", "o2"]);
    assert_eq!(code, 2, "{stderr}");
    assert!(work.path().join("o2/GOOD.macrostate.json").exists());
    assert!(stderr.contains("BAD"), "{stderr}");

    // zero volume under the fail policy: error names the date
    write("gap/GAP.csv", "date,close,volume\n2008-01-02,10,100\n2008-01-03,10,0\n2008-01-04,10,90\n");
    let (code, stderr) = run_in(
        work.path(),
        &["compute", "--input", "gap/GAP.csv", "--out", "o3", "--gap-policy", "fail"],
    );
    assert_eq!(code, 1);
    assert!(stderr.contains("2008-01-03"), "{stderr}");

    // oversized window: per-symbol failure -> partial exit, both counts stated
    write("win/SHORT.csv", valid);
    write(
        "win/LONGER.csv",
        &{
            let mut s = String::from("date,close,volume\n");
            for i in 0..30 {
                let date = day0() + Days::new(i);
                s.push_str(&format!("{date},10,{}\n", 100 + i));
            }
            s
        },
    );
    let (code, stderr) = run_in(
        work.path(),
        &["series", "--input", "win", "--out", "o4", "--window", "20", "--peak-factor", "3.0"],
    );
    assert_eq!(code, 2, "{stderr}");
    assert!(stderr.contains("20") && stderr.contains('2'), "{stderr}");
    // the same window against only the short file: nothing succeeds
    let (code, _) = run_in(
        work.path(),
        &["series", "--input", "win/SHORT.csv", "--out", "o5", "--window", "20",
          "--peak-factor", "3.0"],
    );
    assert_eq!(code, 1);

    // unknown year: no computable symbols
    write("year/OK.csv", valid);
    let (code, stderr) = run_in(work.path(), &["diagram", "1990", "--input", "year", "--out", "o6"]);
    assert_eq!(code, 1);
    assert!(stderr.contains("no computable symbols for period 1990"), "{stderr}");

    pass("failure taxonomy (exit codes 1/2 with path/date/count messages)");
}
