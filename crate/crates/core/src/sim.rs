//! Dense statevector simulation.
//!
//! States live in a flat `Vec<Complex64>` of length 2^n indexed by bitstring,
//! with qubit 0 as the lowest-order bit of the index. Measurement sampling is
//! multinomial over exact amplitudes via inverse-CDF lookup on a cumulative
//! table, which keeps sampled counts reproducible for a fixed seed across
//! platforms.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::circuit::Circuit;
use crate::pauli::{Observable, Pauli, Sign};

/// Norm drift tolerated on a statevector before it is considered corrupt.
pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("controlled gate control and target must differ (both {0})")]
    DegenerateControlledGate(usize),
    #[error("amplitude vector length {0} is not a power of two")]
    BadLength(usize),
    #[error("state norm {0} deviates from 1 beyond tolerance")]
    NotNormalized(f64),
    #[error("gate angle is not finite")]
    NonFiniteAngle,
    #[error("shots must be at least 1")]
    ZeroShots,
    #[error("observable width {got} does not match register width {expected}")]
    ObservableWidth { got: usize, expected: usize },
    #[error("circuit declares {circuit} qubits but the state has {state}")]
    CircuitWidthMismatch { circuit: usize, state: usize },
}

/// One gate from the fixed set. Rotation angles are radians.
///
/// `Sdg` (the adjoint of S) is not part of the text format; it exists so
/// that Y-basis measurement rotations can be expressed exactly, without a
/// global-phase stand-in.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Gate {
    Rx { target: usize, angle: f64 },
    Ry { target: usize, angle: f64 },
    Rz { target: usize, angle: f64 },
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    Cx { control: usize, target: usize },
}

impl Gate {
    pub fn targets(&self) -> Vec<usize> {
        match *self {
            Gate::Rx { target, .. }
            | Gate::Ry { target, .. }
            | Gate::Rz { target, .. }
            | Gate::H(target)
            | Gate::X(target)
            | Gate::Y(target)
            | Gate::Z(target)
            | Gate::S(target)
            | Gate::Sdg(target) => vec![target],
            Gate::Cx { control, target } => vec![control, target],
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), SimError> {
        if let Gate::Cx { control, target } = *self {
            if control == target {
                return Err(SimError::DegenerateControlledGate(control));
            }
        }
        if let Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } = *self {
            if !angle.is_finite() {
                return Err(SimError::NonFiniteAngle);
            }
        }
        for q in self.targets() {
            if q >= n_qubits {
                return Err(SimError::QubitOutOfRange {
                    qubit: q,
                    n_qubits,
                });
            }
        }
        Ok(())
    }

    /// 2x2 matrix of a single-qubit gate; `None` for CX.
    pub fn matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        Some(match *self {
            Gate::Rx { angle, .. } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                [
                    [Complex64::new(c, 0.0), Complex64::new(0.0, -s)],
                    [Complex64::new(0.0, -s), Complex64::new(c, 0.0)],
                ]
            }
            Gate::Ry { angle, .. } => {
                let (c, s) = ((angle / 2.0).cos(), (angle / 2.0).sin());
                [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ]
            }
            Gate::Rz { angle, .. } => [
                [Complex64::from_polar(1.0, -angle / 2.0), zero],
                [zero, Complex64::from_polar(1.0, angle / 2.0)],
            ],
            Gate::H(_) => {
                let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                [[h, h], [h, -h]]
            }
            Gate::X(_) => [[zero, one], [one, zero]],
            Gate::Y(_) => [[zero, -i], [i, zero]],
            Gate::Z(_) => [[one, zero], [zero, -one]],
            Gate::S(_) => [[one, zero], [zero, i]],
            Gate::Sdg(_) => [[one, zero], [zero, -i]],
            Gate::Cx { .. } => return None,
        })
    }
}

/// Pure state of an n-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// |0...0> on n qubits.
    pub fn zero(n_qubits: usize) -> StateVector {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<StateVector, SimError> {
        let len = amps.len();
        if len == 0 || len & (len - 1) != 0 {
            return Err(SimError::BadLength(len));
        }
        let state = StateVector {
            n_qubits: len.trailing_zeros() as usize,
            amps,
        };
        let norm = state.norm_sqr().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Applies one gate in place.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<(), SimError> {
        gate.validate(self.n_qubits)?;
        match *gate {
            Gate::Cx { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for idx in 0..self.amps.len() {
                    // Visit each swapped pair once, from its target-0 member.
                    if idx & cbit != 0 && idx & tbit == 0 {
                        self.amps.swap(idx, idx | tbit);
                    }
                }
            }
            _ => {
                let m = gate.matrix().expect("single-qubit gate");
                let target = gate.targets()[0];
                let step = 1usize << target;
                let mut base = 0;
                while base < self.amps.len() {
                    for off in base..base + step {
                        let a0 = self.amps[off];
                        let a1 = self.amps[off + step];
                        self.amps[off] = m[0][0] * a0 + m[0][1] * a1;
                        self.amps[off + step] = m[1][0] * a0 + m[1][1] * a1;
                    }
                    base += step << 1;
                }
            }
        }
        Ok(())
    }

    pub fn apply_all(&mut self, gates: &[Gate]) -> Result<(), SimError> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Probability of the computational-basis outcome `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }
}

/// Runs all gates of `circuit` on `initial` and returns the final state.
pub fn run_circuit(circuit: &Circuit, mut initial: StateVector) -> Result<StateVector, SimError> {
    if circuit.n_qubits() != initial.n_qubits() {
        return Err(SimError::CircuitWidthMismatch {
            circuit: circuit.n_qubits(),
            state: initial.n_qubits(),
        });
    }
    initial.apply_all(circuit.gates())?;
    Ok(initial)
}

/// Exact outcome probabilities |amp|^2 for every basis index.
pub fn exact_probabilities(state: &StateVector) -> Vec<f64> {
    state.amps.iter().map(|a| a.norm_sqr()).collect()
}

/// Draws `shots` computational-basis outcomes and returns sparse counts.
///
/// Sampling walks a cumulative probability table with one uniform draw per
/// shot (inverse CDF). The RNG is ChaCha8 seeded from `seed`, so the counts
/// are a pure function of (state, shots, seed).
pub fn sample_bitstrings(
    state: &StateVector,
    shots: u64,
    seed: u64,
) -> Result<BTreeMap<u64, u64>, SimError> {
    if shots == 0 {
        return Err(SimError::ZeroShots);
    }
    let mut cumulative = Vec::with_capacity(state.amps.len());
    let mut acc = 0.0;
    for a in &state.amps {
        acc += a.norm_sqr();
        cumulative.push(acc);
    }
    // Guard the top of the table against rounding drift so every draw lands.
    if let Some(last) = cumulative.last_mut() {
        *last = f64::max(*last, 1.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for _ in 0..shots {
        let u: f64 = rng.random();
        let idx = cumulative.partition_point(|&c| c <= u);
        *counts.entry(idx as u64).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Gates mapping the eigenbasis of `p` on `wire` to the computational basis,
/// to be appended before a Z-frame measurement: X -> [H], Y -> [Sdg, H],
/// Z and I -> []. The identity label is read in the Z frame; its outcomes
/// both carry eigenvalue +1 (see `Pauli::sign_of_bit`).
pub fn measurement_rotation(p: Pauli, wire: usize) -> Vec<Gate> {
    match p {
        Pauli::I | Pauli::Z => vec![],
        Pauli::X => vec![Gate::H(wire)],
        Pauli::Y => vec![Gate::Sdg(wire), Gate::H(wire)],
    }
}

/// Gates preparing from |0> the eigenstate of `p` with eigenvalue `sign`.
/// For I the "+1 state" is |0> and the "-1 state" is |1>; both are genuine
/// +1 eigenstates, the sign only selects which one.
pub fn prepare_eigenstate(p: Pauli, sign: Sign, wire: usize) -> Vec<Gate> {
    let mut gates = Vec::new();
    if sign == Sign::Minus {
        gates.push(Gate::X(wire));
    }
    match p {
        Pauli::I | Pauli::Z => {}
        Pauli::X => gates.push(Gate::H(wire)),
        Pauli::Y => {
            gates.push(Gate::H(wire));
            gates.push(Gate::S(wire));
        }
    }
    gates
}

/// <psi|O|psi> for a Pauli-sum observable; real for any such observable.
pub fn exact_expectation(state: &StateVector, observable: &Observable) -> Result<f64, SimError> {
    if observable.width() != state.n_qubits() {
        return Err(SimError::ObservableWidth {
            got: observable.width(),
            expected: state.n_qubits(),
        });
    }
    let mut total = 0.0;
    for (coeff, string) in observable.terms() {
        let transformed = apply_pauli_string(state, string);
        let inner: Complex64 = state
            .amps
            .iter()
            .zip(&transformed.amps)
            .map(|(a, b)| a.conj() * b)
            .sum();
        debug_assert!(inner.im.abs() < 1e-9);
        total += coeff * inner.re;
    }
    Ok(total)
}

/// S|psi> for a Pauli string S (width checked by callers).
fn apply_pauli_string(state: &StateVector, string: &crate::pauli::PauliString) -> StateVector {
    let n = state.n_qubits;
    let mut flip_mask = 0usize;
    let mut z_mask = 0usize;
    let mut y_mask = 0usize;
    for (q, p) in string.labels().iter().enumerate() {
        match p {
            Pauli::I => {}
            Pauli::X => flip_mask |= 1 << q,
            Pauli::Y => {
                flip_mask |= 1 << q;
                y_mask |= 1 << q;
            }
            Pauli::Z => z_mask |= 1 << q,
        }
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); state.amps.len()];
    for (idx, &a) in state.amps.iter().enumerate() {
        let out = idx ^ flip_mask;
        // Z contributes (-1) per set bit; Y contributes i * (-1)^bit.
        let z_parity = ((idx & z_mask).count_ones() & 1) as i32;
        let y_minus = ((idx & y_mask).count_ones() & 1) as i32;
        let y_count = (y_mask.count_ones() % 4) as i32;
        let mut phase = Complex64::new(1.0, 0.0);
        phase *= match y_count {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        if (z_parity + y_minus) % 2 == 1 {
            phase = -phase;
        }
        amps[out] += phase * a;
    }
    StateVector { n_qubits: n, amps }
}

/// Density matrix on n qubits, row-major `2^n x 2^n`. Used by the exact
/// decomposition oracles and tests rather than the sampling pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn zeros(n_qubits: usize) -> DensityMatrix {
        let dim = 1usize << n_qubits;
        DensityMatrix {
            n_qubits,
            entries: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// |psi><psi| (or vv' for a sub-normalized vector).
    pub fn from_vector(n_qubits: usize, v: &[Complex64]) -> DensityMatrix {
        let dim = 1usize << n_qubits;
        assert_eq!(v.len(), dim);
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(v[r] * v[c].conj());
            }
        }
        DensityMatrix { n_qubits, entries }
    }

    pub fn from_pure(state: &StateVector) -> DensityMatrix {
        DensityMatrix::from_vector(state.n_qubits, &state.amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        let dim = self.dim();
        self.entries[row * dim + col] = value;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let dim = self.dim();
        for r in 0..dim {
            for c in r..dim {
                if (self.get(r, c) - self.get(c, r).conj()).norm() > tol {
                    return false;
                }
            }
        }
        true
    }

    /// self += weight * other.
    pub fn add_scaled(&mut self, weight: f64, other: &DensityMatrix) {
        assert_eq!(self.n_qubits, other.n_qubits);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            *a += weight * b;
        }
    }

    /// Tensor product; `self`'s qubits keep their indices, `other`'s are
    /// shifted up by `self.n_qubits()`.
    pub fn kron(&self, other: &DensityMatrix) -> DensityMatrix {
        let n = self.n_qubits + other.n_qubits;
        let (da, db) = (self.dim(), other.dim());
        let mut out = DensityMatrix::zeros(n);
        let dim = 1usize << n;
        for ra in 0..da {
            for ca in 0..da {
                let va = self.get(ra, ca);
                for rb in 0..db {
                    for cb in 0..db {
                        let row = ra | rb << self.n_qubits;
                        let col = ca | cb << self.n_qubits;
                        out.entries[row * dim + col] = va * other.get(rb, cb);
                    }
                }
            }
        }
        out
    }

    /// Relabels qubits: output qubit `perm[i]` is input qubit i.
    pub fn permute_qubits(&self, perm: &[usize]) -> DensityMatrix {
        assert_eq!(perm.len(), self.n_qubits);
        let dim = self.dim();
        let remap = |idx: usize| -> usize {
            let mut out = 0usize;
            for (i, &p) in perm.iter().enumerate() {
                out |= (idx >> i & 1) << p;
            }
            out
        };
        let mut out = DensityMatrix::zeros(self.n_qubits);
        for r in 0..dim {
            for c in 0..dim {
                out.entries[remap(r) * dim + remap(c)] = self.get(r, c);
            }
        }
        out
    }

    /// tr(O rho) for a Pauli-sum observable.
    pub fn expectation(&self, observable: &Observable) -> Result<f64, SimError> {
        if observable.width() != self.n_qubits {
            return Err(SimError::ObservableWidth {
                got: observable.width(),
                expected: self.n_qubits,
            });
        }
        let dim = self.dim();
        let mut total = Complex64::new(0.0, 0.0);
        for (coeff, string) in observable.terms() {
            // tr(S rho) = sum_r <r| S rho |r>; S maps |c> to phase * |c ^ flip>.
            let mut flip_mask = 0usize;
            let mut z_mask = 0usize;
            let mut y_mask = 0usize;
            for (q, p) in string.labels().iter().enumerate() {
                match p {
                    Pauli::I => {}
                    Pauli::X => flip_mask |= 1 << q,
                    Pauli::Y => {
                        flip_mask |= 1 << q;
                        y_mask |= 1 << q;
                    }
                    Pauli::Z => z_mask |= 1 << q,
                }
            }
            let y_count = (y_mask.count_ones() % 4) as i32;
            for c in 0..dim {
                let r = c ^ flip_mask;
                let z_parity = ((c & z_mask).count_ones() & 1) as i32;
                let y_minus = ((c & y_mask).count_ones() & 1) as i32;
                let mut phase = match y_count {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
                if (z_parity + y_minus) % 2 == 1 {
                    phase = -phase;
                }
                total += coeff * phase * self.get(c, r);
            }
        }
        Ok(total.re)
    }
}
