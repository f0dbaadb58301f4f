//! Parameter sweeps over (shots, alpha) grids with per-trial records and
//! aggregate tables.
//!
//! A sweep is a pure function of its config up to wall-clock columns: every
//! trial derives its own seed stream from (master_seed, shots, alpha, trial),
//! so execution order and worker count cannot change any sampled value.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::generators::{lookup, CircuitGenerator};
use crate::metrics::{l2_distance, reference_distribution, reference_expectation, MetricsError};
use goldcut_core::cutting::normalize_distribution;
use goldcut_core::detector::{
    detect_and_reconstruct, DetectError, DetectOptions, ReconstructionTarget,
};
use goldcut_core::pauli::{Observable, PauliParseError};
use goldcut_core::seed::{derive_seed, trial_seed};

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("shots_grid must be non-empty")]
    EmptyShotsGrid,
    #[error("alpha_grid must be non-empty")]
    EmptyAlphaGrid,
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error("shots value 0 not allowed")]
    ZeroShots,
    #[error("alpha {0} outside (0, 1)")]
    BadAlpha(f64),
    #[error("expectation mode requires an `observable` entry like \"Z|ZZ\"")]
    MissingObservable,
    #[error("observable must be two Pauli strings joined by one '|'")]
    BadObservablePair,
    #[error("unknown circuit source {0:?} (expected golden, nongolden, both, or a .qct path)")]
    UnknownSource(String),
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Pauli(#[from] PauliParseError),
    #[error(transparent)]
    Detect(#[from] DetectError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    Expectation,
    Distribution,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub shots_grid: Vec<u64>,
    pub alpha_grid: Vec<f64>,
    pub trials: u64,
    pub master_seed: u64,
    pub mode: SweepMode,
    /// "golden", "nongolden", "both", or a path to a circuit file.
    #[serde(default = "default_source")]
    pub circuit_source: String,
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// "O_f1|O_f2", required in expectation mode.
    #[serde(default)]
    pub observable: Option<String>,
    #[serde(default)]
    pub merge_iz: bool,
    /// Clamp-and-renormalize reconstructed distributions before the l2
    /// comparison.
    #[serde(default)]
    pub normalize: bool,
}

fn default_source() -> String {
    "both".to_owned()
}

fn default_theta() -> f64 {
    0.5
}

/// One trials.csv row; field order matches the CSV header.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub shots: u64,
    pub alpha: f64,
    pub trial: u64,
    pub circuit_kind: String,
    pub basis: String,
    pub tau_hat: f64,
    pub std_err: f64,
    pub rejected: bool,
    pub l2_error: f64,
    pub time_opt_s: f64,
    pub time_noopt_s: f64,
}

/// One aggregate.csv row: one (shots, alpha, circuit kind) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub shots: u64,
    pub alpha: f64,
    pub circuit_kind: String,
    /// Fraction of trials whose all-X basis was classified golden.
    pub golden_rate: f64,
    pub reject_rate: f64,
    pub l2_median: f64,
    pub l2_mean: f64,
    pub time_opt_mean_s: f64,
    pub time_noopt_mean_s: f64,
}

pub struct SweepOutput {
    pub records: Vec<TrialRecord>,
    pub aggregates: Vec<AggregateRow>,
}

/// Splits "O_f1|O_f2" into per-fragment observables. Either side may be
/// empty, meaning the width-0 scalar (identity on that fragment).
pub fn parse_observable_pair(text: &str) -> Result<(Observable, Observable), SweepError> {
    let mut parts = text.split('|');
    match (parts.next(), parts.next(), parts.next()) {
        (Some(left), Some(right), None) => Ok((
            Observable::single(left.trim().parse()?),
            Observable::single(right.trim().parse()?),
        )),
        _ => Err(SweepError::BadObservablePair),
    }
}

enum Source {
    Builtin(&'static dyn CircuitGenerator),
    Fixed { kind: String, text: String },
}

impl Source {
    fn kind(&self) -> &str {
        match self {
            Source::Builtin(g) => g.name(),
            Source::Fixed { kind, .. } => kind,
        }
    }

    fn text(&self, theta: f64, circuit_seed: u64) -> String {
        match self {
            Source::Builtin(g) => g.generate(theta, circuit_seed),
            Source::Fixed { text, .. } => text.clone(),
        }
    }
}

fn resolve_sources(source: &str) -> Result<Vec<Source>, SweepError> {
    if source == "both" {
        let golden = lookup("golden").expect("builtin registry");
        let nongolden = lookup("nongolden").expect("builtin registry");
        return Ok(vec![Source::Builtin(golden), Source::Builtin(nongolden)]);
    }
    if let Some(g) = lookup(source) {
        return Ok(vec![Source::Builtin(g)]);
    }
    let path = Path::new(source);
    if source.ends_with(".qct") || path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| SweepError::Io {
            path: source.to_owned(),
            source: e,
        })?;
        let kind = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| source.to_owned());
        return Ok(vec![Source::Fixed { kind, text }]);
    }
    Err(SweepError::UnknownSource(source.to_owned()))
}

fn validate(config: &SweepConfig) -> Result<(), SweepError> {
    if config.shots_grid.is_empty() {
        return Err(SweepError::EmptyShotsGrid);
    }
    if config.alpha_grid.is_empty() {
        return Err(SweepError::EmptyAlphaGrid);
    }
    if config.trials == 0 {
        return Err(SweepError::ZeroTrials);
    }
    if config.shots_grid.iter().any(|&m| m == 0) {
        return Err(SweepError::ZeroShots);
    }
    if let Some(&a) = config
        .alpha_grid
        .iter()
        .find(|a| !(0.0 < **a && **a < 1.0))
    {
        return Err(SweepError::BadAlpha(a));
    }
    if config.mode == SweepMode::Expectation && config.observable.is_none() {
        return Err(SweepError::MissingObservable);
    }
    Ok(())
}

/// Everything one (shots, alpha, trial) cell needs; independent of every
/// other cell so the work can be fanned out in any order.
fn run_trial(
    config: &SweepConfig,
    sources: &[Source],
    target_obs: Option<&(Observable, Observable)>,
    shots: u64,
    alpha: f64,
    trial: u64,
) -> Result<Vec<TrialRecord>, SweepError> {
    let base = trial_seed(config.master_seed, shots, alpha, trial);
    let mut rows = Vec::new();
    for (ki, source) in sources.iter().enumerate() {
        let circuit_seed = derive_seed(base, &[ki as u64, 0]);
        let run_seed = derive_seed(base, &[ki as u64, 1]);
        let text = source.text(config.theta, circuit_seed);
        let target = match (config.mode, target_obs) {
            (SweepMode::Distribution, _) => ReconstructionTarget::Distribution,
            (SweepMode::Expectation, Some((o_f1, o_f2))) => ReconstructionTarget::Expectation {
                o_f1: o_f1.clone(),
                o_f2: o_f2.clone(),
            },
            (SweepMode::Expectation, None) => return Err(SweepError::MissingObservable),
        };
        let opts = DetectOptions {
            alpha,
            shots,
            seed: run_seed,
            optimization: true,
            merge_iz: config.merge_iz,
        };
        let report = detect_and_reconstruct(&text, &target, &opts)?;
        let noopt = detect_and_reconstruct(
            &text,
            &target,
            &DetectOptions {
                optimization: false,
                ..opts
            },
        )?;

        let l2_error = match config.mode {
            SweepMode::Distribution => {
                let got = report.result.distribution().expect("distribution mode");
                let reference = reference_distribution(&text)?;
                if config.normalize {
                    l2_distance(&normalize_distribution(got), &reference)?
                } else {
                    l2_distance(got, &reference)?
                }
            }
            SweepMode::Expectation => {
                let (o_f1, o_f2) = target_obs.expect("checked above");
                let got = report.result.expectation().expect("expectation mode");
                (got - reference_expectation(&text, o_f1, o_f2)?).abs()
            }
        };

        for outcome in &report.outcomes {
            rows.push(TrialRecord {
                shots,
                alpha,
                trial,
                circuit_kind: source.kind().to_owned(),
                basis: outcome.basis.to_string(),
                tau_hat: outcome.estimate.tau_hat,
                std_err: outcome.estimate.std_err,
                rejected: outcome.rejected,
                l2_error,
                time_opt_s: report.wall_time,
                time_noopt_s: noopt.wall_time,
            });
        }
    }
    Ok(rows)
}

pub fn run_sweep(config: &SweepConfig) -> Result<SweepOutput, SweepError> {
    validate(config)?;
    let sources = resolve_sources(&config.circuit_source)?;
    let target_obs = match &config.observable {
        Some(s) => Some(parse_observable_pair(s)?),
        None => None,
    };

    let mut jobs = Vec::new();
    for &shots in &config.shots_grid {
        for &alpha in &config.alpha_grid {
            for trial in 0..config.trials {
                jobs.push((shots, alpha, trial));
            }
        }
    }

    // collect() keeps job order, so the records come out sorted by
    // (shots index, alpha index, trial) regardless of scheduling.
    let per_job: Vec<Vec<TrialRecord>> = jobs
        .par_iter()
        .map(|&(shots, alpha, trial)| {
            run_trial(config, &sources, target_obs.as_ref(), shots, alpha, trial)
        })
        .collect::<Result<_, _>>()?;
    let records: Vec<TrialRecord> = per_job.into_iter().flatten().collect();

    let aggregates = aggregate(config, &sources, &records);
    Ok(SweepOutput {
        records,
        aggregates,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Collapses per-trial rows into one row per (shots, alpha, kind) cell.
/// Rates are exact means of the per-trial 0/1 columns for the all-X basis.
fn aggregate(config: &SweepConfig, sources: &[Source], records: &[TrialRecord]) -> Vec<AggregateRow> {
    let mut cells: BTreeMap<(usize, usize, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for record in records {
        let si = config
            .shots_grid
            .iter()
            .position(|&m| m == record.shots)
            .expect("record shots from grid");
        let ai = config
            .alpha_grid
            .iter()
            .position(|&a| a == record.alpha)
            .expect("record alpha from grid");
        let ki = sources
            .iter()
            .position(|s| s.kind() == record.circuit_kind)
            .expect("record kind from sources");
        cells.entry((si, ai, ki)).or_default().push(record);
    }

    let mut rows = Vec::new();
    for ((si, ai, ki), cell) in cells {
        let reference_basis = "X".repeat(cell[0].basis.len());
        let reference: Vec<&&TrialRecord> = cell
            .iter()
            .filter(|r| r.basis == reference_basis)
            .collect();
        let n = reference.len() as f64;
        let rejected = reference.iter().filter(|r| r.rejected).count() as f64;
        let mut l2: Vec<f64> = reference.iter().map(|r| r.l2_error).collect();
        let l2_mean = mean(&l2);
        rows.push(AggregateRow {
            shots: config.shots_grid[si],
            alpha: config.alpha_grid[ai],
            circuit_kind: sources[ki].kind().to_owned(),
            golden_rate: (n - rejected) / n,
            reject_rate: rejected / n,
            l2_median: median(&mut l2),
            l2_mean,
            time_opt_mean_s: mean(&reference.iter().map(|r| r.time_opt_s).collect::<Vec<_>>()),
            time_noopt_mean_s: mean(
                &reference.iter().map(|r| r.time_noopt_s).collect::<Vec<_>>(),
            ),
        });
    }
    rows
}
