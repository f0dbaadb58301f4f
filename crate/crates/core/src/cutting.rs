//! Measure-and-prepare circuit cutting.
//!
//! A cut with K wires expands into 4^K measurement bases over {I, X, Y, Z}.
//! For each basis the upstream fragment is executed once per upstream
//! observable term, measuring the cut wires in the basis; the downstream
//! fragment is executed once per (eigenstring, term) pair, preparing the
//! corresponding cut-wire eigenstates. The identity resolves as
//! I = |0><0| + |1><1|: both outcomes and both preparations carry
//! eigenvalue +1, which is why upstream sampling pins I-labeled signs to
//! plus while downstream preparation weights ignore I positions.
//!
//! Reconstruction combines the tables as
//!
//! ```text
//! tr(O rho)   = 2^-K * sum_M  [sum_r Par(r) <O_f1>_{M,r}] [sum_s w_M(s) <O_f2>_{M,s}]
//! q(b1, b2)   = 2^-K * sum_M  [sum_r Par(r) p_M(b1, r)]   [sum_s w_M(s) p_{M,s}(b2)]
//! ```
//!
//! with a fixed lexicographic summation order (bases, then eigenstrings in
//! mask order) so results are bit-reproducible.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::circuit::FragmentPair;
use crate::pauli::{Eigenstring, Observable, Pauli, PauliString};
use crate::sim::{
    exact_probabilities, measurement_rotation, prepare_eigenstate, run_circuit,
    sample_bitstrings, StateVector,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CuttingError {
    #[error("basis has {got} labels but the cut has {expected} wires")]
    BasisWidth { got: usize, expected: usize },
    #[error("eigenstring has {got} signs but the cut has {expected} wires")]
    EigenstringWidth { got: usize, expected: usize },
    #[error("frame has {got} labels but the fragment measures {expected} wires")]
    FrameWidth { got: usize, expected: usize },
    #[error("observable width {got} does not match {expected} fragment output wires")]
    ObservableWidth { got: usize, expected: usize },
    #[error("cut count {0} exceeds the supported maximum of 16")]
    TooManyCuts(usize),
    #[error("no basis information: no tables and no skipped bases")]
    EmptyInputs,
    #[error("missing fragment results: {}", .0.join(", "))]
    MissingVariants(Vec<String>),
    #[error("simulation failed: {0}")]
    Sim(#[from] crate::sim::SimError),
}

/// Measurement basis for the K cut wires; label i applies to cut wire i.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisElement(Vec<Pauli>);

impl BasisElement {
    pub fn new(labels: Vec<Pauli>) -> BasisElement {
        BasisElement(labels)
    }

    pub fn labels(&self) -> &[Pauli] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Lexicographic ordinal with I=0, X=1, Y=2, Z=3 and position 0 as the
    /// most significant digit; the all-I basis is 0.
    pub fn index(&self) -> u64 {
        self.0
            .iter()
            .fold(0u64, |acc, p| acc * 4 + *p as u64)
    }

    /// Same labels with every I replaced by Z: the circuit actually
    /// executed, since I is read in the Z frame.
    pub fn execution_basis(&self) -> BasisElement {
        BasisElement(
            self.0
                .iter()
                .map(|p| if *p == Pauli::I { Pauli::Z } else { *p })
                .collect(),
        )
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl Serialize for BasisElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// All 4^K bases in lexicographic order (I < X < Y < Z), all-I first.
pub fn enumerate_bases(k: usize) -> Result<Vec<BasisElement>, CuttingError> {
    if k > 16 {
        return Err(CuttingError::TooManyCuts(k));
    }
    let count = 1u64 << (2 * k);
    let mut out = Vec::with_capacity(count as usize);
    for idx in 0..count {
        let labels = (0..k)
            .map(|i| {
                let digit = (idx >> (2 * (k - 1 - i))) & 3;
                Pauli::ALL[digit as usize]
            })
            .collect();
        out.push(BasisElement(labels));
    }
    Ok(out)
}

/// All 2^K eigenstrings in canonical mask order (all-plus first).
pub fn enumerate_signs(k: usize) -> Vec<Eigenstring> {
    (0..1u32 << k)
        .map(|mask| Eigenstring::from_mask(mask, k))
        .collect()
}

/// Reconstruction weight of a downstream preparation: the product of signs
/// over non-I positions. I contributes +1 regardless of which of its two
/// (+1)-eigenstates was prepared.
pub fn prep_weight(basis: &BasisElement, signs: &Eigenstring) -> f64 {
    debug_assert_eq!(basis.len(), signs.len());
    let mut w = 1.0;
    for (i, p) in basis.labels().iter().enumerate() {
        if *p != Pauli::I {
            w *= signs.get(i).value();
        }
    }
    w
}

/// Sampled upstream execution: joint counts over (output eigenstring b1,
/// cut eigenstring r). Output signs follow `frame`, cut signs follow the
/// basis; I positions are pinned to +1 on both parts.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpstreamResult {
    pub basis: BasisElement,
    pub frame: PauliString,
    pub term: usize,
    pub counts: BTreeMap<(Eigenstring, Eigenstring), u64>,
    pub shots: u64,
}

impl UpstreamResult {
    /// Joint distribution keyed by the concatenated eigenstring b1 ++ r,
    /// the form the hypothesis test consumes.
    pub fn joint_counts(&self) -> BTreeMap<Eigenstring, u64> {
        let mut out = BTreeMap::new();
        for (&(b1, r), &c) in &self.counts {
            *out.entry(b1.concat(&r)).or_insert(0) += c;
        }
        out
    }

    pub fn table(&self) -> UpstreamTable {
        let m = self.shots as f64;
        UpstreamTable {
            basis: self.basis.clone(),
            term: self.term,
            weights: self
                .counts
                .iter()
                .map(|(&k, &c)| (k, c as f64 / m))
                .collect(),
        }
    }
}

/// Sampled downstream execution for one (basis, preparation, term) variant:
/// counts over output eigenstrings of all downstream wires.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DownstreamResult {
    pub basis: BasisElement,
    pub prep: Eigenstring,
    pub frame: PauliString,
    pub term: usize,
    pub counts: BTreeMap<Eigenstring, u64>,
    pub shots: u64,
}

impl DownstreamResult {
    pub fn table(&self) -> DownstreamTable {
        let m = self.shots as f64;
        DownstreamTable {
            basis: self.basis.clone(),
            prep: self.prep,
            term: self.term,
            weights: self
                .counts
                .iter()
                .map(|(&k, &c)| (k, c as f64 / m))
                .collect(),
        }
    }
}

/// Probability-weighted upstream table; produced from sampled counts or
/// from exact amplitudes. Reconstruction consumes these.
#[derive(Clone, Debug, PartialEq)]
pub struct UpstreamTable {
    pub basis: BasisElement,
    pub term: usize,
    pub weights: BTreeMap<(Eigenstring, Eigenstring), f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DownstreamTable {
    pub basis: BasisElement,
    pub prep: Eigenstring,
    pub term: usize,
    pub weights: BTreeMap<Eigenstring, f64>,
}

fn check_basis(frag: &FragmentPair, basis: &BasisElement) -> Result<(), CuttingError> {
    if basis.len() != frag.n_cuts() {
        return Err(CuttingError::BasisWidth {
            got: basis.len(),
            expected: frag.n_cuts(),
        });
    }
    Ok(())
}

/// Upstream circuit for a basis: fragment gates, then measurement rotations
/// for the output frame and the cut labels.
fn upstream_state(
    frag: &FragmentPair,
    basis: &BasisElement,
    frame: &PauliString,
) -> Result<StateVector, CuttingError> {
    check_basis(frag, basis)?;
    if frame.len() != frag.upstream_outputs.len() {
        return Err(CuttingError::FrameWidth {
            got: frame.len(),
            expected: frag.upstream_outputs.len(),
        });
    }
    let mut state = run_circuit(&frag.upstream, StateVector::zero(frag.upstream_width()))?;
    for (out, label) in frag.upstream_outputs.iter().zip(frame.labels()) {
        state.apply_all(&measurement_rotation(*label, out.wire))?;
    }
    for (role, label) in frag.cut_roles.iter().zip(basis.labels()) {
        state.apply_all(&measurement_rotation(*label, role.upstream_wire))?;
    }
    Ok(state)
}

/// Maps a sampled computational-basis index to (b1 signs, r signs).
fn classify_upstream(
    frag: &FragmentPair,
    basis: &BasisElement,
    frame: &PauliString,
    index: u64,
) -> (Eigenstring, Eigenstring) {
    let mut b1 = Eigenstring::plus(frag.upstream_outputs.len());
    for (i, (out, label)) in frag
        .upstream_outputs
        .iter()
        .zip(frame.labels())
        .enumerate()
    {
        b1.set(i, label.sign_of_bit(index >> out.wire & 1 == 1));
    }
    let mut r = Eigenstring::plus(frag.n_cuts());
    for (i, (role, label)) in frag.cut_roles.iter().zip(basis.labels()).enumerate() {
        r.set(i, label.sign_of_bit(index >> role.upstream_wire & 1 == 1));
    }
    (b1, r)
}

/// Samples the upstream fragment in the given basis with outputs read in
/// `frame`; `term` tags which upstream observable term the frame belongs to.
pub fn run_upstream_in_frame(
    frag: &FragmentPair,
    basis: &BasisElement,
    frame: &PauliString,
    term: usize,
    shots: u64,
    seed: u64,
) -> Result<UpstreamResult, CuttingError> {
    let state = upstream_state(frag, basis, frame)?;
    let raw = sample_bitstrings(&state, shots, seed)?;
    let mut counts: BTreeMap<(Eigenstring, Eigenstring), u64> = BTreeMap::new();
    for (idx, c) in raw {
        *counts
            .entry(classify_upstream(frag, basis, frame, idx))
            .or_insert(0) += c;
    }
    Ok(UpstreamResult {
        basis: basis.clone(),
        frame: frame.clone(),
        term,
        counts,
        shots,
    })
}

/// Distribution-mode upstream sampling: outputs are read in the Z frame.
pub fn run_upstream(
    frag: &FragmentPair,
    basis: &BasisElement,
    shots: u64,
    seed: u64,
) -> Result<UpstreamResult, CuttingError> {
    let frame = PauliString::all_z(frag.upstream_outputs.len());
    run_upstream_in_frame(frag, basis, &frame, 0, shots, seed)
}

/// Exact (infinite-shot) upstream table.
pub fn exact_upstream_in_frame(
    frag: &FragmentPair,
    basis: &BasisElement,
    frame: &PauliString,
    term: usize,
) -> Result<UpstreamTable, CuttingError> {
    let state = upstream_state(frag, basis, frame)?;
    let mut weights: BTreeMap<(Eigenstring, Eigenstring), f64> = BTreeMap::new();
    for (idx, p) in exact_probabilities(&state).iter().enumerate() {
        if *p > 0.0 {
            *weights
                .entry(classify_upstream(frag, basis, frame, idx as u64))
                .or_insert(0.0) += p;
        }
    }
    Ok(UpstreamTable {
        basis: basis.clone(),
        term,
        weights,
    })
}

pub fn exact_upstream(
    frag: &FragmentPair,
    basis: &BasisElement,
) -> Result<UpstreamTable, CuttingError> {
    let frame = PauliString::all_z(frag.upstream_outputs.len());
    exact_upstream_in_frame(frag, basis, &frame, 0)
}

/// Downstream circuit for a (basis, eigenstring) variant: cut-wire
/// eigenstate preparations, fragment gates, then output measurement
/// rotations for `frame`.
fn downstream_state(
    frag: &FragmentPair,
    basis: &BasisElement,
    prep: &Eigenstring,
    frame: &PauliString,
) -> Result<StateVector, CuttingError> {
    check_basis(frag, basis)?;
    if prep.len() != frag.n_cuts() {
        return Err(CuttingError::EigenstringWidth {
            got: prep.len(),
            expected: frag.n_cuts(),
        });
    }
    if frame.len() != frag.downstream_width() {
        return Err(CuttingError::FrameWidth {
            got: frame.len(),
            expected: frag.downstream_width(),
        });
    }
    let mut state = StateVector::zero(frag.downstream_width());
    for (i, label) in basis.labels().iter().enumerate() {
        state.apply_all(&prepare_eigenstate(*label, prep.get(i), i))?;
    }
    state.apply_all(frag.downstream.gates())?;
    for (wire, label) in frame.labels().iter().enumerate() {
        state.apply_all(&measurement_rotation(*label, wire))?;
    }
    Ok(state)
}

fn classify_downstream(frame: &PauliString, index: u64) -> Eigenstring {
    let mut e = Eigenstring::plus(frame.len());
    for (wire, label) in frame.labels().iter().enumerate() {
        e.set(wire, label.sign_of_bit(index >> wire & 1 == 1));
    }
    e
}

pub fn run_downstream_in_frame(
    frag: &FragmentPair,
    basis: &BasisElement,
    prep: &Eigenstring,
    frame: &PauliString,
    term: usize,
    shots: u64,
    seed: u64,
) -> Result<DownstreamResult, CuttingError> {
    let state = downstream_state(frag, basis, prep, frame)?;
    let raw = sample_bitstrings(&state, shots, seed)?;
    let mut counts: BTreeMap<Eigenstring, u64> = BTreeMap::new();
    for (idx, c) in raw {
        *counts.entry(classify_downstream(frame, idx)).or_insert(0) += c;
    }
    Ok(DownstreamResult {
        basis: basis.clone(),
        prep: *prep,
        frame: frame.clone(),
        term,
        counts,
        shots,
    })
}

/// Distribution-mode downstream sampling: outputs are read in the Z frame.
pub fn run_downstream(
    frag: &FragmentPair,
    basis: &BasisElement,
    prep: &Eigenstring,
    shots: u64,
    seed: u64,
) -> Result<DownstreamResult, CuttingError> {
    let frame = PauliString::all_z(frag.downstream_width());
    run_downstream_in_frame(frag, basis, prep, &frame, 0, shots, seed)
}

pub fn exact_downstream_in_frame(
    frag: &FragmentPair,
    basis: &BasisElement,
    prep: &Eigenstring,
    frame: &PauliString,
    term: usize,
) -> Result<DownstreamTable, CuttingError> {
    let state = downstream_state(frag, basis, prep, frame)?;
    let mut weights: BTreeMap<Eigenstring, f64> = BTreeMap::new();
    for (idx, p) in exact_probabilities(&state).iter().enumerate() {
        if *p > 0.0 {
            *weights
                .entry(classify_downstream(frame, idx as u64))
                .or_insert(0.0) += p;
        }
    }
    Ok(DownstreamTable {
        basis: basis.clone(),
        prep: *prep,
        term,
        weights,
    })
}

pub fn exact_downstream(
    frag: &FragmentPair,
    basis: &BasisElement,
    prep: &Eigenstring,
) -> Result<DownstreamTable, CuttingError> {
    let frame = PauliString::all_z(frag.downstream_width());
    exact_downstream_in_frame(frag, basis, prep, &frame, 0)
}

/// Splits an observable over the full circuit into per-fragment strings:
/// each original qubit's label lands on the fragment wire that owns that
/// qubit's output. Returns (coefficient, upstream string over output wires,
/// downstream string over all downstream wires) per term.
pub fn pauli_split(
    observable: &Observable,
    frag: &FragmentPair,
) -> Result<Vec<(f64, PauliString, PauliString)>, CuttingError> {
    if observable.width() != frag.total_qubits {
        return Err(CuttingError::ObservableWidth {
            got: observable.width(),
            expected: frag.total_qubits,
        });
    }
    let mut out = Vec::with_capacity(observable.terms().len());
    for (coeff, string) in observable.terms() {
        let f1 = PauliString(
            frag.upstream_outputs
                .iter()
                .map(|m| string.labels()[m.original])
                .collect(),
        );
        let f2 = PauliString(
            frag.downstream_outputs
                .iter()
                .map(|m| string.labels()[m.original])
                .collect(),
        );
        out.push((*coeff, f1, f2));
    }
    Ok(out)
}

fn infer_cut_count(
    upstream: &[UpstreamTable],
    skipped: &BTreeSet<BasisElement>,
) -> Result<usize, CuttingError> {
    upstream
        .first()
        .map(|t| t.basis.len())
        .or_else(|| skipped.iter().next().map(|b| b.len()))
        .ok_or(CuttingError::EmptyInputs)
}

/// Reconstructs tr(O rho) for O = O_f1 (x) O_f2 from fragment tables,
/// treating every basis in `skipped` as contributing exactly zero.
///
/// Required coverage for each basis M outside `skipped`: one upstream table
/// per O_f1 term, and one downstream table per (eigenstring, O_f2 term).
pub fn reconstruct_expectation(
    upstream: &[UpstreamTable],
    downstream: &[DownstreamTable],
    o_f1: &Observable,
    o_f2: &Observable,
    skipped: &BTreeSet<BasisElement>,
) -> Result<f64, CuttingError> {
    let k = infer_cut_count(upstream, skipped)?;
    let up_idx: HashMap<(u64, usize), &UpstreamTable> = upstream
        .iter()
        .map(|t| ((t.basis.index(), t.term), t))
        .collect();
    let down_idx: HashMap<(u64, u32, usize), &DownstreamTable> = downstream
        .iter()
        .map(|t| ((t.basis.index(), t.prep.mask(), t.term), t))
        .collect();

    let signs = enumerate_signs(k);
    let mut missing = Vec::new();
    let mut total = 0.0;
    for basis in enumerate_bases(k)? {
        if skipped.contains(&basis) {
            continue;
        }
        let mut up = 0.0;
        for (t1, (coeff, _)) in o_f1.terms().iter().enumerate() {
            match up_idx.get(&(basis.index(), t1)) {
                Some(table) => {
                    let mut acc = 0.0;
                    for (&(b1, r), &w) in &table.weights {
                        acc += b1.parity() * r.parity() * w;
                    }
                    up += coeff * acc;
                }
                None => missing.push(format!("upstream {basis} term {t1}")),
            }
        }
        let mut down = 0.0;
        for s in &signs {
            let w_prep = prep_weight(&basis, s);
            for (t2, (coeff, _)) in o_f2.terms().iter().enumerate() {
                match down_idx.get(&(basis.index(), s.mask(), t2)) {
                    Some(table) => {
                        let mut acc = 0.0;
                        for (&b2, &w) in &table.weights {
                            acc += b2.parity() * w;
                        }
                        down += w_prep * coeff * acc;
                    }
                    None => missing.push(format!("downstream {basis} {s} term {t2}")),
                }
            }
        }
        total += up * down;
    }
    if !missing.is_empty() {
        return Err(CuttingError::MissingVariants(missing));
    }
    Ok(total / (1u64 << k) as f64)
}

/// Reconstructs the full-circuit output quasi-distribution over 2^N
/// bitstrings (qubit 0 = lowest-order bit) from Z-frame tables (term 0).
/// Entries may be slightly negative at finite shots; see
/// [`normalize_distribution`]. Skipped bases contribute zero.
pub fn reconstruct_distribution(
    upstream: &[UpstreamTable],
    downstream: &[DownstreamTable],
    frag: &FragmentPair,
    skipped: &BTreeSet<BasisElement>,
) -> Result<Vec<f64>, CuttingError> {
    let k = frag.n_cuts();
    let up_idx: HashMap<u64, &UpstreamTable> = upstream
        .iter()
        .filter(|t| t.term == 0)
        .map(|t| (t.basis.index(), t))
        .collect();
    let down_idx: HashMap<(u64, u32), &DownstreamTable> = downstream
        .iter()
        .filter(|t| t.term == 0)
        .map(|t| ((t.basis.index(), t.prep.mask()), t))
        .collect();

    let signs = enumerate_signs(k);
    let mut q = vec![0.0; 1usize << frag.total_qubits];
    let mut missing = Vec::new();
    for basis in enumerate_bases(k)? {
        if skipped.contains(&basis) {
            continue;
        }
        // A(b1) = sum_r Par(r) p(b1, r); in the Z frame the eigenstring mask
        // is exactly the outcome bitstring.
        let mut a: BTreeMap<u32, f64> = BTreeMap::new();
        match up_idx.get(&basis.index()) {
            Some(table) => {
                for (&(b1, r), &w) in &table.weights {
                    *a.entry(b1.mask()).or_insert(0.0) += r.parity() * w;
                }
            }
            None => missing.push(format!("upstream {basis}")),
        }
        let mut d: BTreeMap<u32, f64> = BTreeMap::new();
        for s in &signs {
            let w_prep = prep_weight(&basis, s);
            match down_idx.get(&(basis.index(), s.mask())) {
                Some(table) => {
                    for (&b2, &w) in &table.weights {
                        *d.entry(b2.mask()).or_insert(0.0) += w_prep * w;
                    }
                }
                None => missing.push(format!("downstream {basis} {s}")),
            }
        }
        for (&b1, &av) in &a {
            if av == 0.0 {
                continue;
            }
            for (&b2, &dv) in &d {
                q[frag.embed_outputs(b1 as u64, b2 as u64) as usize] += av * dv;
            }
        }
    }
    if !missing.is_empty() {
        return Err(CuttingError::MissingVariants(missing));
    }
    let scale = 1.0 / (1u64 << k) as f64;
    for v in &mut q {
        *v *= scale;
    }
    Ok(q)
}

/// Clamps negative quasi-probabilities to zero and renormalizes. Returns
/// the input unchanged (as zeros) when everything clamps away.
pub fn normalize_distribution(q: &[f64]) -> Vec<f64> {
    let clamped: Vec<f64> = q.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clamped.iter().sum();
    if total <= 0.0 {
        return clamped;
    }
    clamped.into_iter().map(|v| v / total).collect()
}
