//! End-to-end pipeline: run every upstream basis, test each contribution
//! against zero, skip the downstream variants of bases that test as
//! negligible, and reconstruct from whatever survives.
//!
//! The same upstream samples feed both the hypothesis test and the
//! reconstruction weights, so detection costs no extra executions; the
//! price is the selection bias of reusing tested samples, which is
//! accepted by design.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::circuit::{bipartition, parse_circuit, ParseError, StructureError};
use crate::cutting::{
    enumerate_bases, enumerate_signs, reconstruct_distribution, reconstruct_expectation,
    run_downstream_in_frame, run_upstream_in_frame, BasisElement, CuttingError, DownstreamTable,
    UpstreamResult, UpstreamTable,
};
use crate::pauli::{Observable, Pauli, PauliString, Sign};
use crate::seed::{downstream_seed, upstream_seed};
use crate::stats::{
    estimate_tau, test_golden, Chi, EigenstringDistribution, HypothesisOutcome, StatsError,
    TauTerm,
};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("circuit has no cut; nothing to detect")]
    NoCut,
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    BadAlpha(f64),
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("{which} observable has width {got}, fragment expects {expected}")]
    ObservableWidth {
        which: &'static str,
        got: usize,
        expected: usize,
    },
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Cutting(#[from] CuttingError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// What to reconstruct: a factored observable expectation, or the full
/// output bitstring distribution.
#[derive(Clone, Debug)]
pub enum ReconstructionTarget {
    Expectation { o_f1: Observable, o_f2: Observable },
    Distribution,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ReconstructionResult {
    Expectation(f64),
    Distribution(Vec<f64>),
}

impl ReconstructionResult {
    pub fn expectation(&self) -> Option<f64> {
        match self {
            ReconstructionResult::Expectation(v) => Some(*v),
            ReconstructionResult::Distribution(_) => None,
        }
    }

    pub fn distribution(&self) -> Option<&[f64]> {
        match self {
            ReconstructionResult::Expectation(_) => None,
            ReconstructionResult::Distribution(q) => Some(q),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectOptions {
    /// Per-basis significance level of the golden test.
    pub alpha: f64,
    /// Shots per fragment execution (each upstream setting and each
    /// downstream variant gets this many).
    pub shots: u64,
    pub seed: u64,
    /// When false, every downstream variant runs regardless of the tests.
    pub optimization: bool,
    /// Share upstream executions between bases that differ only by I vs Z
    /// (their circuits coincide): 3^K runs instead of 4^K.
    pub merge_iz: bool,
}

impl Default for DetectOptions {
    fn default() -> DetectOptions {
        DetectOptions {
            alpha: 0.1,
            shots: 1 << 13,
            seed: 0,
            optimization: true,
            merge_iz: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectionReport {
    /// One outcome per basis, in lexicographic basis order.
    pub outcomes: Vec<HypothesisOutcome>,
    pub skipped_bases: BTreeSet<BasisElement>,
    pub n_cuts: usize,
    /// Upstream fragment executions performed (4^K per observable term,
    /// or 3^K with merge_iz).
    pub upstream_executions: u64,
    /// Downstream (basis, eigenstring) variants executed / skipped;
    /// executed + skipped always equals 8^K.
    pub downstream_runs_executed: u64,
    pub downstream_runs_skipped: u64,
    pub result: ReconstructionResult,
    /// Seconds spent on simulation, sampling, testing, and reconstruction
    /// (parsing and output excluded).
    pub wall_time: f64,
    pub options: DetectOptions,
}

/// Merges an upstream run of the execution basis (I read as Z) into the
/// requested basis by pinning I-labeled cut signs to +1.
fn pin_identity(res: &UpstreamResult, basis: &BasisElement) -> UpstreamResult {
    let mut counts = BTreeMap::new();
    for (&(b1, r), &c) in &res.counts {
        let mut pinned = r;
        for (i, p) in basis.labels().iter().enumerate() {
            if *p == Pauli::I {
                pinned.set(i, Sign::Plus);
            }
        }
        *counts.entry((b1, pinned)).or_insert(0) += c;
    }
    UpstreamResult {
        basis: basis.clone(),
        frame: res.frame.clone(),
        term: res.term,
        counts,
        shots: res.shots,
    }
}

fn decide_basis(
    target: &ReconstructionTarget,
    basis: &BasisElement,
    results: &[UpstreamResult],
    f1_coeffs: &[f64],
    n_out: usize,
    k: usize,
    alpha: f64,
) -> Result<HypothesisOutcome, DetectError> {
    let r_mask = (((1u64 << k) - 1) << n_out) as u32;
    match target {
        ReconstructionTarget::Expectation { .. } => {
            // With I positions pinned at classification time, every term's
            // functional is the plain parity of the joint eigenstring.
            let terms = results
                .iter()
                .zip(f1_coeffs)
                .map(|(res, &coeff)| {
                    Ok(TauTerm {
                        coeff,
                        dist: EigenstringDistribution::new(res.joint_counts(), res.shots)?,
                        chi: Chi::parity(n_out + k),
                    })
                })
                .collect::<Result<Vec<_>, StatsError>>()?;
            let est = estimate_tau(basis, &terms)?;
            Ok(test_golden(&est, alpha)?)
        }
        ReconstructionTarget::Distribution => {
            // Distribution reconstruction needs the contribution to vanish
            // for every upstream output projector, so each observed output
            // bitstring is tested on its own at a Bonferroni-corrected
            // level; the basis survives if any component rejects.
            let dist = EigenstringDistribution::new(results[0].joint_counts(), results[0].shots)?;
            let aggregate = estimate_tau(
                basis,
                &[TauTerm {
                    coeff: 1.0,
                    dist: dist.clone(),
                    chi: Chi::parity_over(r_mask),
                }],
            )?;
            let level = (alpha / (1u64 << n_out) as f64).max(f64::MIN_POSITIVE);
            let b1_mask = ((1u64 << n_out) - 1) as u32;
            let mut seen = BTreeSet::new();
            let mut rejected = false;
            for key in dist.counts().keys() {
                let component = key.mask() & b1_mask;
                if !seen.insert(component) {
                    continue;
                }
                let est = estimate_tau(
                    basis,
                    &[TauTerm {
                        coeff: 1.0,
                        dist: dist.clone(),
                        chi: Chi::selected(b1_mask, component, r_mask),
                    }],
                )?;
                if test_golden(&est, level)?.rejected {
                    rejected = true;
                    break;
                }
            }
            Ok(HypothesisOutcome {
                basis: basis.clone(),
                estimate: aggregate,
                alpha,
                rejected,
            })
        }
    }
}

/// Parses, bipartitions, runs all upstream settings, tests every basis,
/// runs downstream variants for the surviving bases (all of them when
/// `optimization` is off), and reconstructs. Deterministic given the seed.
pub fn detect_and_reconstruct(
    circuit_text: &str,
    target: &ReconstructionTarget,
    opts: &DetectOptions,
) -> Result<DetectionReport, DetectError> {
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(DetectError::BadAlpha(opts.alpha));
    }
    if opts.shots == 0 {
        return Err(DetectError::ZeroShots);
    }
    let (circuit, cut) = parse_circuit(circuit_text)?;
    let cut = cut.ok_or(DetectError::NoCut)?;
    let frag = bipartition(&circuit, &cut)?;
    let k = frag.n_cuts();
    let n_out = frag.upstream_outputs.len();

    let (f1_frames, f2_frames): (Vec<(f64, PauliString)>, Vec<(f64, PauliString)>) = match target {
        ReconstructionTarget::Expectation { o_f1, o_f2 } => {
            if o_f1.width() != n_out {
                return Err(DetectError::ObservableWidth {
                    which: "upstream",
                    got: o_f1.width(),
                    expected: n_out,
                });
            }
            if o_f2.width() != frag.downstream_width() {
                return Err(DetectError::ObservableWidth {
                    which: "downstream",
                    got: o_f2.width(),
                    expected: frag.downstream_width(),
                });
            }
            (o_f1.terms().to_vec(), o_f2.terms().to_vec())
        }
        ReconstructionTarget::Distribution => (
            vec![(1.0, PauliString::all_z(n_out))],
            vec![(1.0, PauliString::all_z(frag.downstream_width()))],
        ),
    };
    let f1_coeffs: Vec<f64> = f1_frames.iter().map(|(a, _)| *a).collect();

    let started = Instant::now();
    let bases = enumerate_bases(k)?;

    // Upstream phase: one run per (basis, term), or per (execution basis,
    // term) when merging I with Z.
    let mut upstream_results: Vec<UpstreamResult> = Vec::with_capacity(bases.len() * f1_frames.len());
    let mut upstream_executions = 0u64;
    let mut merged: HashMap<(u64, usize), UpstreamResult> = HashMap::new();
    for (bi, basis) in bases.iter().enumerate() {
        for (t, (_, frame)) in f1_frames.iter().enumerate() {
            let res = if opts.merge_iz {
                let exec = basis.execution_basis();
                if !merged.contains_key(&(exec.index(), t)) {
                    let run = run_upstream_in_frame(
                        &frag,
                        &exec,
                        frame,
                        t,
                        opts.shots,
                        upstream_seed(opts.seed, exec.index(), t as u64),
                    )?;
                    upstream_executions += 1;
                    merged.insert((exec.index(), t), run);
                }
                pin_identity(&merged[&(exec.index(), t)], basis)
            } else {
                upstream_executions += 1;
                run_upstream_in_frame(
                    &frag,
                    basis,
                    frame,
                    t,
                    opts.shots,
                    upstream_seed(opts.seed, bi as u64, t as u64),
                )?
            };
            upstream_results.push(res);
        }
    }

    // Testing phase.
    let mut outcomes = Vec::with_capacity(bases.len());
    for (bi, basis) in bases.iter().enumerate() {
        let results = &upstream_results[bi * f1_frames.len()..(bi + 1) * f1_frames.len()];
        outcomes.push(decide_basis(
            target, basis, results, &f1_coeffs, n_out, k, opts.alpha,
        )?);
    }
    let skipped_bases: BTreeSet<BasisElement> = if opts.optimization {
        outcomes
            .iter()
            .filter(|o| !o.rejected)
            .map(|o| o.basis.clone())
            .collect()
    } else {
        BTreeSet::new()
    };

    // Downstream phase for surviving bases.
    let signs = enumerate_signs(k);
    let mut down_tables: Vec<DownstreamTable> = Vec::new();
    let mut executed = 0u64;
    let mut skipped_count = 0u64;
    for (bi, basis) in bases.iter().enumerate() {
        if skipped_bases.contains(basis) {
            skipped_count += signs.len() as u64;
            continue;
        }
        for s in &signs {
            executed += 1;
            for (t, (_, frame)) in f2_frames.iter().enumerate() {
                let run = run_downstream_in_frame(
                    &frag,
                    basis,
                    s,
                    frame,
                    t,
                    opts.shots,
                    downstream_seed(opts.seed, bi as u64, s.mask() as u64, t as u64),
                )?;
                down_tables.push(run.table());
            }
        }
    }

    let up_tables: Vec<UpstreamTable> = upstream_results.iter().map(UpstreamResult::table).collect();
    let result = match target {
        ReconstructionTarget::Expectation { o_f1, o_f2 } => ReconstructionResult::Expectation(
            reconstruct_expectation(&up_tables, &down_tables, o_f1, o_f2, &skipped_bases)?,
        ),
        ReconstructionTarget::Distribution => ReconstructionResult::Distribution(
            reconstruct_distribution(&up_tables, &down_tables, &frag, &skipped_bases)?,
        ),
    };
    let wall_time = started.elapsed().as_secs_f64();

    Ok(DetectionReport {
        outcomes,
        skipped_bases,
        n_cuts: k,
        upstream_executions,
        downstream_runs_executed: executed,
        downstream_runs_skipped: skipped_count,
        result,
        wall_time,
        options: *opts,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SavingsSummary {
    pub downstream_runs_executed: u64,
    pub downstream_runs_skipped: u64,
    /// Fraction of downstream variants skipped, in [0, 1].
    pub skip_fraction: f64,
    pub wall_time: f64,
}

pub fn savings_summary(report: &DetectionReport) -> SavingsSummary {
    let executed = report.downstream_runs_executed;
    let skipped = report.downstream_runs_skipped;
    let total = executed + skipped;
    SavingsSummary {
        downstream_runs_executed: executed,
        downstream_runs_skipped: skipped,
        skip_fraction: if total == 0 {
            0.0
        } else {
            skipped as f64 / total as f64
        },
        wall_time: report.wall_time,
    }
}
