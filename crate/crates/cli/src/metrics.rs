//! Reconstruction-quality metrics and exact references.

use goldcut_core::circuit::{bipartition, parse_circuit, ParseError, StructureError};
use goldcut_core::pauli::{Observable, Pauli, PauliString};
use goldcut_core::sim::{exact_expectation, exact_probabilities, run_circuit, SimError, StateVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("distributions have different sizes: {left} vs {right}")]
    SizeMismatch { left: usize, right: usize },
    #[error("circuit has no cut")]
    NoCut,
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("observable construction failed: {0}")]
    Observable(#[from] goldcut_core::pauli::ObservableError),
}

/// Euclidean distance between two distributions over the same support.
pub fn l2_distance(p: &[f64], q: &[f64]) -> Result<f64, MetricsError> {
    if p.len() != q.len() {
        return Err(MetricsError::SizeMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    Ok(p.iter()
        .zip(q)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Exact output distribution of the circuit simulated uncut (any cut line
/// in the text is ignored). This is the reference the sampled
/// reconstructions are judged against.
pub fn reference_distribution(circuit_text: &str) -> Result<Vec<f64>, MetricsError> {
    let (circuit, _) = parse_circuit(circuit_text)?;
    let state = run_circuit(&circuit, StateVector::zero(circuit.n_qubits()))?;
    Ok(exact_probabilities(&state))
}

/// Exact uncut expectation of the factored observable O_f1 (x) O_f2, with
/// each fragment label embedded back onto its original qubit.
pub fn reference_expectation(
    circuit_text: &str,
    o_f1: &Observable,
    o_f2: &Observable,
) -> Result<f64, MetricsError> {
    let (circuit, cut) = parse_circuit(circuit_text)?;
    let cut = cut.ok_or(MetricsError::NoCut)?;
    let frag = bipartition(&circuit, &cut)?;
    let mut terms = Vec::new();
    for (a, s1) in o_f1.terms() {
        for (b, s2) in o_f2.terms() {
            let mut labels = vec![Pauli::I; circuit.n_qubits()];
            for (map, l) in frag.upstream_outputs.iter().zip(s1.labels()) {
                labels[map.original] = *l;
            }
            for (map, l) in frag.downstream_outputs.iter().zip(s2.labels()) {
                labels[map.original] = *l;
            }
            terms.push((a * b, PauliString(labels)));
        }
    }
    let full = Observable::new(terms)?;
    let state = run_circuit(&circuit, StateVector::zero(circuit.n_qubits()))?;
    Ok(exact_expectation(&state, &full)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::golden_circuit;
    use approx::assert_abs_diff_eq;

    #[test]
    fn l2_examples() {
        assert_eq!(l2_distance(&[0.5, 0.5], &[0.5, 0.5]).unwrap(), 0.0);
        assert_abs_diff_eq!(
            l2_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(),
            2.0f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            l2_distance(&[0.5, 0.5], &[0.75, 0.25]).unwrap(),
            (2.0f64 * 0.0625).sqrt(),
            epsilon = 1e-15
        );
        assert!(matches!(
            l2_distance(&[1.0], &[0.5, 0.5]),
            Err(MetricsError::SizeMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn reference_distribution_examples() {
        let bell = reference_distribution("qubits 2\nh 0\ncx 0 1\n").unwrap();
        assert_abs_diff_eq!(bell[0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(bell[3], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(bell[1], 0.0, epsilon = 1e-12);

        let idle = reference_distribution("qubits 3\nx 1\n").unwrap();
        assert_eq!(idle[0b010], 1.0);

        let p = reference_distribution(&golden_circuit(0.5, 7)).unwrap();
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reference_expectation_embeds_labels() {
        // Bell circuit: <Z (x) Z> = 1 with the empty upstream observable.
        let text = "qubits 2\nh 0\ncut 0\ncx 0 1\n";
        let scalar = Observable::single(PauliString::default());
        let zz = Observable::single("ZZ".parse().unwrap());
        assert_abs_diff_eq!(
            reference_expectation(text, &scalar, &zz).unwrap(),
            1.0,
            epsilon = 1e-12
        );
        // Golden benchmark: upstream output is q0, downstream (q1, q2);
        // <Z_q0> from the upstream side only.
        let text = golden_circuit(0.5, 7);
        let z = Observable::single("Z".parse().unwrap());
        let ii = Observable::single("II".parse().unwrap());
        let want = 0.5f64.cos() * 0.5f64.cos(); // RX then RY on |0>
        assert_abs_diff_eq!(
            reference_expectation(&text, &z, &ii).unwrap(),
            want,
            epsilon = 1e-12
        );
    }
}
