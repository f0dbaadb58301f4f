//! CSV and SVG artifact emission for sweeps and benchmarks.
//!
//! Numbers are written with Rust's default float formatting (shortest
//! round-trip, `.` decimal point), so files are byte-reproducible for
//! identical inputs.

use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::bench::BenchReport;
use crate::sweep::{AggregateRow, SweepOutput, TrialRecord};

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("writing {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("writing {path}: {source}")]
    Csv { path: String, source: csv::Error },
}

const TRIALS_HEADER: [&str; 11] = [
    "shots",
    "alpha",
    "trial",
    "circuit_kind",
    "basis",
    "tau_hat",
    "std_err",
    "rejected",
    "l2_error",
    "time_opt_s",
    "time_noopt_s",
];

const AGGREGATE_HEADER: [&str; 9] = [
    "shots",
    "alpha",
    "circuit_kind",
    "golden_rate",
    "reject_rate",
    "l2_median",
    "l2_mean",
    "time_opt_mean_s",
    "time_noopt_mean_s",
];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> OutputError + '_ {
    move |source| OutputError::Csv {
        path: path.display().to_string(),
        source,
    }
}

fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), OutputError> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_err(path))?;
    writer.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        writer.write_record(row).map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))?;
    Ok(())
}

pub fn write_trials_csv(path: &Path, records: &[TrialRecord]) -> Result<(), OutputError> {
    let rows: Vec<Vec<String>> = records
        .iter()
        .map(|r| {
            vec![
                r.shots.to_string(),
                r.alpha.to_string(),
                r.trial.to_string(),
                r.circuit_kind.clone(),
                r.basis.clone(),
                r.tau_hat.to_string(),
                r.std_err.to_string(),
                r.rejected.to_string(),
                r.l2_error.to_string(),
                r.time_opt_s.to_string(),
                r.time_noopt_s.to_string(),
            ]
        })
        .collect();
    write_csv(path, &TRIALS_HEADER, &rows)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> Result<(), OutputError> {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.shots.to_string(),
                r.alpha.to_string(),
                r.circuit_kind.clone(),
                r.golden_rate.to_string(),
                r.reject_rate.to_string(),
                r.l2_median.to_string(),
                r.l2_mean.to_string(),
                r.time_opt_mean_s.to_string(),
                r.time_noopt_mean_s.to_string(),
            ]
        })
        .collect();
    write_csv(path, &AGGREGATE_HEADER, &rows)
}

/// Writes trials.csv and aggregate.csv (plus rate/error plots when asked)
/// into `out_dir`, creating it if needed. Returns the paths written.
pub fn write_sweep_outputs(
    out_dir: &Path,
    output: &SweepOutput,
    plots: bool,
) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();

    let trials = out_dir.join("trials.csv");
    write_trials_csv(&trials, &output.records)?;
    written.push(trials);

    let aggregate = out_dir.join("aggregate.csv");
    write_aggregate_csv(&aggregate, &output.aggregates)?;
    written.push(aggregate);

    if plots {
        let rates = out_dir.join("rates.svg");
        fs::write(&rates, rate_plot(&output.aggregates)).map_err(io_err(&rates))?;
        written.push(rates);
        let l2 = out_dir.join("l2.svg");
        fs::write(&l2, l2_plot(&output.aggregates)).map_err(io_err(&l2))?;
        written.push(l2);
    }

    let notes = out_dir.join("notes.txt");
    fs::write(&notes, TIMING_NOTES).map_err(io_err(&notes))?;
    written.push(notes);
    Ok(written)
}

/// Writes bench_trials.csv and bench_summary.csv into `out_dir`.
pub fn write_bench_outputs(out_dir: &Path, report: &BenchReport) -> Result<Vec<PathBuf>, OutputError> {
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let mut written = Vec::new();

    let trials = out_dir.join("bench_trials.csv");
    let rows: Vec<Vec<String>> = report
        .trials
        .iter()
        .map(|t| {
            vec![
                t.trial.to_string(),
                t.time_opt_s.to_string(),
                t.time_noopt_s.to_string(),
                t.downstream_executed.to_string(),
                t.downstream_skipped.to_string(),
                t.x_golden.to_string(),
            ]
        })
        .collect();
    write_csv(
        &trials,
        &[
            "trial",
            "time_opt_s",
            "time_noopt_s",
            "downstream_executed",
            "downstream_skipped",
            "x_golden",
        ],
        &rows,
    )?;
    written.push(trials);

    let summary = out_dir.join("bench_summary.csv");
    write_csv(
        &summary,
        &[
            "alpha",
            "shots",
            "trials",
            "time_opt_mean_s",
            "time_opt_stderr_s",
            "time_noopt_mean_s",
            "time_noopt_stderr_s",
        ],
        &[vec![
            report.alpha.to_string(),
            report.shots.to_string(),
            report.trials.len().to_string(),
            report.time_opt_mean_s.to_string(),
            report.time_opt_stderr_s.to_string(),
            report.time_noopt_mean_s.to_string(),
            report.time_noopt_stderr_s.to_string(),
        ]],
    )?;
    written.push(summary);

    let notes = out_dir.join("notes.txt");
    fs::write(&notes, TIMING_NOTES).map_err(io_err(&notes))?;
    written.push(notes);
    Ok(written)
}

const TIMING_NOTES: &str = "Timing methodology: wall times come from a monotonic clock around \
simulation, sampling, testing, and reconstruction (parsing and file output \
excluded). Every trial is recorded; there is no warm-up discard. Aggregate \
means are computed from the per-trial columns.\n";

/// Rejection rate of the all-X basis versus log2(shots), one line per
/// (circuit kind, alpha).
pub fn rate_plot(rows: &[AggregateRow]) -> String {
    svg_line_plot(
        "rejection rate of the all-X basis",
        "log2(shots)",
        "rejection rate",
        &series_by_kind_alpha(rows, |r| r.reject_rate),
        Some((0.0, 1.0)),
    )
}

/// Median l2 reconstruction error versus log2(shots), one line per
/// (circuit kind, alpha).
pub fn l2_plot(rows: &[AggregateRow]) -> String {
    svg_line_plot(
        "median l2 error vs shots",
        "log2(shots)",
        "median l2 error",
        &series_by_kind_alpha(rows, |r| r.l2_median),
        None,
    )
}

fn series_by_kind_alpha(
    rows: &[AggregateRow],
    value: impl Fn(&AggregateRow) -> f64,
) -> Vec<(String, Vec<(f64, f64)>)> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in rows {
        if !keys
            .iter()
            .any(|(k, a)| *k == r.circuit_kind && *a == r.alpha)
        {
            keys.push((r.circuit_kind.clone(), r.alpha));
        }
    }
    keys.iter()
        .map(|(kind, alpha)| {
            let mut points: Vec<(f64, f64)> = rows
                .iter()
                .filter(|r| r.circuit_kind == *kind && r.alpha == *alpha)
                .map(|r| ((r.shots as f64).log2(), value(r)))
                .collect();
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            (format!("{kind} alpha={alpha}"), points)
        })
        .collect()
}

const PALETTE: [&str; 6] = [
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377",
];

/// Minimal static line plot; deterministic output for deterministic input.
fn svg_line_plot(
    title: &str,
    x_label: &str,
    y_label: &str,
    series: &[(String, Vec<(f64, f64)>)],
    y_range: Option<(f64, f64)>,
) -> String {
    let (width, height) = (640.0, 420.0);
    let (left, right, top, bottom) = (60.0, 180.0, 40.0, 50.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let xs: Vec<f64> = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)).collect();
    let ys: Vec<f64> = series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)).collect();
    let (x_min, x_max) = span(&xs);
    let (y_min, y_max) = y_range.unwrap_or_else(|| span(&ys));
    let x_of = |x: f64| {
        if x_max > x_min {
            left + (x - x_min) / (x_max - x_min) * plot_w
        } else {
            left + plot_w / 2.0
        }
    };
    let y_of = |y: f64| {
        if y_max > y_min {
            top + plot_h - (y - y_min) / (y_max - y_min) * plot_h
        } else {
            top + plot_h / 2.0
        }
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        left + plot_w / 2.0
    ));
    // Axes.
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{x_label}</text>\n",
        left + plot_w / 2.0,
        height - 12.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{y_label}</text>\n",
        top + plot_h / 2.0,
        top + plot_h / 2.0
    ));

    // Ticks: one per distinct x, four spans on y.
    let mut x_ticks = xs.clone();
    x_ticks.sort_by(|a, b| a.total_cmp(b));
    x_ticks.dedup();
    for t in &x_ticks {
        let px = x_of(*t);
        svg.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{0:.1}\" x2=\"{px:.1}\" y2=\"{1:.1}\" stroke=\"black\"/>\n",
            top + plot_h,
            top + plot_h + 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{t}</text>\n",
            top + plot_h + 18.0
        ));
    }
    for i in 0..=4 {
        let v = y_min + (y_max - y_min) * i as f64 / 4.0;
        let py = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{left}\" y2=\"{py:.1}\" stroke=\"black\"/>\n",
            left - 4.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{v:.3}</text>\n",
            left - 8.0,
            py + 4.0
        ));
    }

    for (i, (label, points)) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let path: Vec<String> = points
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", x_of(*x), y_of(*y)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            path.join(" ")
        ));
        for (x, y) in points {
            svg.push_str(&format!(
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{color}\"/>\n",
                x_of(*x),
                y_of(*y)
            ));
        }
        let ly = top + 14.0 * i as f64;
        svg.push_str(&format!(
            "<line x1=\"{0:.1}\" y1=\"{ly:.1}\" x2=\"{1:.1}\" y2=\"{ly:.1}\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            width - right + 10.0,
            width - right + 30.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\">{label}</text>\n",
            width - right + 36.0,
            ly + 4.0
        ));
    }
    svg.push_str("</svg>\n");
    svg
}

fn span(values: &[f64]) -> (f64, f64) {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in values {
        min = min.min(v);
        max = max.max(v);
    }
    if values.is_empty() {
        (0.0, 1.0)
    } else {
        (min.min(0.0), max)
    }
}
