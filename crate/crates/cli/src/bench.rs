//! Wall-time comparison of the skip-optimized and always-run paths.
//!
//! Runs strictly single-threaded: timing pairs share one core so scheduler
//! contention cannot skew the on/off comparison.

use goldcut_core::detector::{
    detect_and_reconstruct, DetectError, DetectOptions, ReconstructionTarget,
};
use goldcut_core::pauli::Pauli;
use goldcut_core::seed::trial_seed;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("trials must be at least 1")]
    ZeroTrials,
    #[error(transparent)]
    Detect(#[from] DetectError),
}

/// One seeded run timed twice: optimization on, then off.
#[derive(Clone, Debug)]
pub struct BenchTrial {
    pub trial: u64,
    pub time_opt_s: f64,
    pub time_noopt_s: f64,
    pub downstream_executed: u64,
    pub downstream_skipped: u64,
    /// The all-X basis was classified golden (and skipped).
    pub x_golden: bool,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub alpha: f64,
    pub shots: u64,
    pub trials: Vec<BenchTrial>,
    pub time_opt_mean_s: f64,
    pub time_opt_stderr_s: f64,
    pub time_noopt_mean_s: f64,
    pub time_noopt_stderr_s: f64,
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn bench_runtime(
    circuit_text: &str,
    alpha: f64,
    shots: u64,
    trials: u64,
    seed: u64,
) -> Result<BenchReport, BenchError> {
    if trials == 0 {
        return Err(BenchError::ZeroTrials);
    }
    let mut rows = Vec::with_capacity(trials as usize);
    for trial in 0..trials {
        let opts = DetectOptions {
            alpha,
            shots,
            seed: trial_seed(seed, shots, alpha, trial),
            optimization: true,
            merge_iz: false,
        };
        let opt = detect_and_reconstruct(circuit_text, &ReconstructionTarget::Distribution, &opts)?;
        let noopt = detect_and_reconstruct(
            circuit_text,
            &ReconstructionTarget::Distribution,
            &DetectOptions {
                optimization: false,
                ..opts
            },
        )?;
        let x_golden = opt
            .skipped_bases
            .iter()
            .any(|b| !b.labels().is_empty() && b.labels().iter().all(|p| *p == Pauli::X));
        rows.push(BenchTrial {
            trial,
            time_opt_s: opt.wall_time,
            time_noopt_s: noopt.wall_time,
            downstream_executed: opt.downstream_runs_executed,
            downstream_skipped: opt.downstream_runs_skipped,
            x_golden,
        });
    }
    let (time_opt_mean_s, time_opt_stderr_s) =
        mean_and_stderr(&rows.iter().map(|r| r.time_opt_s).collect::<Vec<_>>());
    let (time_noopt_mean_s, time_noopt_stderr_s) =
        mean_and_stderr(&rows.iter().map(|r| r.time_noopt_s).collect::<Vec<_>>());
    Ok(BenchReport {
        alpha,
        shots,
        trials: rows,
        time_opt_mean_s,
        time_opt_stderr_s,
        time_noopt_mean_s,
        time_noopt_stderr_s,
    })
}
