use std::fmt::Display;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

use goldcut_cli::bench::bench_runtime;
use goldcut_cli::output::{write_bench_outputs, write_sweep_outputs};
use goldcut_cli::sweep::{parse_observable_pair, run_sweep, SweepConfig, SweepError};
use goldcut_core::cutting::normalize_distribution;
use goldcut_core::detector::{
    detect_and_reconstruct, savings_summary, DetectError, DetectOptions, DetectionReport,
    ReconstructionTarget,
};
use goldcut_core::stats::{b_upper_bound, required_shots};

#[derive(Parser)]
#[command(
    name = "goldcut",
    version,
    about = "Cut a quantum circuit, detect statistically negligible cut bases online, \
             and reconstruct observables or output distributions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run detection and reconstruction on one circuit file
    Run(RunArgs),
    /// Run a (shots, alpha) grid of trials and write CSV/plot artifacts
    Sweep(SweepArgs),
    /// Time the skip optimization against the always-run path
    Bench(BenchArgs),
    /// Shots needed for a target estimation accuracy
    Plan(PlanArgs),
}

#[derive(Args)]
#[command(group(ArgGroup::new("target").required(true).args(["obs", "distribution"])))]
struct RunArgs {
    /// Circuit file with a `cut` directive
    circuit: PathBuf,
    /// Factored observable "O_f1|O_f2" (Pauli strings; either side may be empty)
    #[arg(long)]
    obs: Option<String>,
    /// Reconstruct the full output distribution instead of an observable
    #[arg(long)]
    distribution: bool,
    /// Significance level of the per-basis golden test, in (0, 1)
    #[arg(long)]
    alpha: f64,
    /// Shots per fragment execution
    #[arg(long)]
    shots: u64,
    #[arg(long)]
    seed: u64,
    /// Keep executing bases even when they test golden
    #[arg(long = "no-golden-opt")]
    no_golden_opt: bool,
    /// Share upstream executions between bases that differ only by I vs Z
    #[arg(long = "merge-iz")]
    merge_iz: bool,
    /// Clamp negatives and renormalize the reconstructed distribution
    #[arg(long)]
    normalize: bool,
    /// Print the full report as JSON
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// TOML sweep config
    #[arg(long)]
    config: PathBuf,
    /// Output directory for trials.csv and aggregate.csv
    #[arg(long)]
    out: PathBuf,
    /// Also write rates.svg and l2.svg
    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct BenchArgs {
    circuit: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    shots: u64,
    #[arg(long)]
    trials: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(ArgGroup::new("bound").args(["upstream_qubits", "b"])))]
struct PlanArgs {
    /// Half-width of the tolerated deviation of tau_hat from tau
    #[arg(long)]
    epsilon: f64,
    /// Tolerated probability of exceeding epsilon
    #[arg(long)]
    delta: f64,
    /// Upstream output qubit count; bounds |tau| by 1.5(1 - 2^-n)
    #[arg(long = "upstream-qubits")]
    upstream_qubits: Option<u32>,
    /// Explicit bound on |tau| (default 1.5, the worst case)
    #[arg(long)]
    b: Option<f64>,
}

/// Exit code 2 for bad input (usage, config, circuit text), 3 for failures
/// at run time (simulation internals, artifact I/O).
enum Failure {
    Usage(String),
    Runtime(String),
}

fn usage<E: Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime<E: Display>(e: E) -> Failure {
    Failure::Runtime(e.to_string())
}

fn from_detect(e: DetectError) -> Failure {
    match e {
        DetectError::NoCut
        | DetectError::BadAlpha(_)
        | DetectError::ZeroShots
        | DetectError::ObservableWidth { .. }
        | DetectError::Parse(_)
        | DetectError::Structure(_) => usage(e),
        DetectError::Cutting(_) | DetectError::Stats(_) => runtime(e),
    }
}

fn from_sweep(e: SweepError) -> Failure {
    match e {
        SweepError::Detect(inner) => from_detect(inner),
        SweepError::Io { .. } | SweepError::Metrics(_) => runtime(e),
        _ => usage(e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Plan(args) => cmd_plan(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

#[derive(Serialize)]
struct RunJson<'a> {
    #[serde(flatten)]
    report: &'a DetectionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    normalized_distribution: Option<&'a [f64]>,
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.circuit)
        .map_err(|e| usage(format!("reading {}: {e}", args.circuit.display())))?;
    let target = match &args.obs {
        Some(pair) => {
            let (o_f1, o_f2) = parse_observable_pair(pair).map_err(usage)?;
            ReconstructionTarget::Expectation { o_f1, o_f2 }
        }
        None => ReconstructionTarget::Distribution,
    };
    let opts = DetectOptions {
        alpha: args.alpha,
        shots: args.shots,
        seed: args.seed,
        optimization: !args.no_golden_opt,
        merge_iz: args.merge_iz,
    };
    let report = detect_and_reconstruct(&text, &target, &opts).map_err(from_detect)?;
    let normalized = if args.normalize {
        report.result.distribution().map(normalize_distribution)
    } else {
        None
    };

    if args.json {
        let wrapper = RunJson {
            report: &report,
            normalized_distribution: normalized.as_deref(),
        };
        println!(
            "{}",
            serde_json::to_string_pretty(&wrapper).map_err(runtime)?
        );
        return Ok(());
    }

    println!("circuit: {}", args.circuit.display());
    println!(
        "cuts: {}   alpha: {}   shots per execution: {}   seed: {}",
        report.n_cuts, args.alpha, args.shots, args.seed
    );
    println!("per-basis decisions:");
    for outcome in &report.outcomes {
        println!("  {outcome}");
    }
    if report.skipped_bases.is_empty() {
        println!("skipped bases: none");
    } else {
        let names: Vec<String> = report.skipped_bases.iter().map(|b| b.to_string()).collect();
        println!("skipped bases: {}", names.join(", "));
    }
    let savings = savings_summary(&report);
    println!(
        "upstream executions: {}   downstream variants: {} executed, {} skipped ({:.1}% saved)",
        report.upstream_executions,
        savings.downstream_runs_executed,
        savings.downstream_runs_skipped,
        100.0 * savings.skip_fraction
    );
    println!("wall time: {:.6} s", report.wall_time);

    match (&report.result, &normalized) {
        (goldcut_core::detector::ReconstructionResult::Expectation(v), _) => {
            println!("expectation value: {v:.10}");
        }
        (goldcut_core::detector::ReconstructionResult::Distribution(q), norm) => {
            let q = norm.as_deref().unwrap_or(q);
            let label = if norm.is_some() {
                "reconstructed distribution (normalized)"
            } else {
                "reconstructed distribution (raw)"
            };
            println!("{label}:");
            let n = q.len().trailing_zeros() as usize;
            for (i, p) in q.iter().enumerate() {
                let bits: String = (0..n)
                    .map(|qubit| if (i >> qubit) & 1 == 1 { '1' } else { '0' })
                    .collect();
                println!("  {bits}  {p:+.8}");
            }
        }
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| usage(format!("reading {}: {e}", args.config.display())))?;
    let config: SweepConfig = toml::from_str(&text)
        .map_err(|e| usage(format!("parsing {}: {e}", args.config.display())))?;
    let output = run_sweep(&config).map_err(from_sweep)?;
    let written = write_sweep_outputs(&args.out, &output, args.plots).map_err(runtime)?;
    println!(
        "{} trial rows, {} aggregate rows",
        output.records.len(),
        output.aggregates.len()
    );
    println!("shots alpha kind golden_rate reject_rate l2_median");
    for row in &output.aggregates {
        println!(
            "{} {} {} {:.4} {:.4} {:.6}",
            row.shots, row.alpha, row.circuit_kind, row.golden_rate, row.reject_rate, row.l2_median
        );
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.circuit)
        .map_err(|e| usage(format!("reading {}: {e}", args.circuit.display())))?;
    if args.trials == 0 {
        return Err(usage("trials must be at least 1"));
    }
    let report = bench_runtime(&text, args.alpha, args.shots, args.trials, args.seed)
        .map_err(|e| match e {
            goldcut_cli::bench::BenchError::ZeroTrials => usage(e),
            goldcut_cli::bench::BenchError::Detect(inner) => from_detect(inner),
        })?;
    let written = write_bench_outputs(&args.out, &report).map_err(runtime)?;
    println!(
        "optimization on:  {:.6} s ± {:.6} (mean ± standard error, {} trials)",
        report.time_opt_mean_s,
        report.time_opt_stderr_s,
        report.trials.len()
    );
    println!(
        "optimization off: {:.6} s ± {:.6}",
        report.time_noopt_mean_s, report.time_noopt_stderr_s
    );
    if report.time_noopt_mean_s > 0.0 {
        println!(
            "mean saving: {:.1}%",
            100.0 * (1.0 - report.time_opt_mean_s / report.time_noopt_mean_s)
        );
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> Result<(), Failure> {
    let bound = match (args.upstream_qubits, args.b) {
        (Some(n), None) => b_upper_bound(n),
        (None, Some(b)) => b,
        (None, None) => 1.5,
        (Some(_), Some(_)) => unreachable!("clap group forbids both"),
    };
    let plan = required_shots(args.epsilon, args.delta, bound).map_err(usage)?;
    println!("tau bound b: {}", plan.bound);
    println!(
        "required shots per execution: {}",
        plan.required_shots
    );
    println!(
        "guarantee: P(|tau_hat - tau| > {}) <= {} for every execution at that shot count",
        plan.epsilon, plan.delta
    );
    Ok(())
}
