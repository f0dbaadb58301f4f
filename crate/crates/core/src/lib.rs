//! Quantum circuit cutting with online detection of negligible
//! measurement bases.
//!
//! A circuit is bipartitioned at a single temporal boundary crossing K
//! qubit wires. Each of the 4^K measurement bases on those wires yields an
//! upstream execution (measure at the cut) and 2^K downstream executions
//! (prepare eigenstates at the cut). The parity-weighted upstream
//! contribution of a basis can be exactly zero by construction; a
//! per-basis hypothesis test spots such bases from the upstream samples
//! alone, and their downstream executions are skipped without biasing the
//! reconstructed expectation value or bitstring distribution beyond shot
//! noise.
//!
//! Module layout:
//! - [`sim`]: dense statevector simulator, sampling, eigenstate
//!   preparation, measurement-frame rotations.
//! - [`circuit`]: circuit values, the `.qct` text format, and bipartition
//!   into fragments.
//! - [`pauli`]: Pauli labels, observables, ±1 eigenstrings, parities.
//! - [`cutting`]: basis enumeration, fragment execution, reconstruction.
//! - [`stats`]: the contribution estimator, its standard error, normal
//!   quantiles, the golden-basis test, and Hoeffding shot budgets.
//! - [`detector`]: the end-to-end run-test-skip-reconstruct pipeline.
//! - [`seed`]: deterministic seed derivation for all execution streams.

pub mod circuit;
pub mod cutting;
pub mod detector;
pub mod pauli;
pub mod seed;
pub mod sim;
pub mod stats;

pub use circuit::{bipartition, parse_circuit, serialize_circuit, Circuit, CutSpec, FragmentPair};
pub use cutting::{
    enumerate_bases, enumerate_signs, reconstruct_distribution, reconstruct_expectation,
    BasisElement,
};
pub use detector::{
    detect_and_reconstruct, savings_summary, DetectOptions, DetectionReport, ReconstructionResult,
    ReconstructionTarget,
};
pub use pauli::{Eigenstring, Observable, Pauli, PauliString, Sign};
pub use stats::{normal_quantile, required_shots, test_golden, HypothesisOutcome, TauEstimate};
