//! Exactness of the cut-and-reconstruct identity on random circuits.
//!
//! Two independent checks:
//! 1. Reconstruction from exact (infinite-shot) fragment tables equals
//!    direct simulation of the uncut circuit.
//! 2. The measure-and-prepare decomposition reassembles the uncut density
//!    matrix itself: rho = 2^-K sum_{M,r,s} w(M,r) w(M,s)
//!    rho_f1(M,r) (x) rho_f2(M,s), built here from projectors and partial
//!    traces without touching the reconstruction code under test.

use std::collections::BTreeSet;
use std::f64::consts::TAU;

use goldcut_core::circuit::{bipartition, Circuit, CutSpec, FragmentPair};
use goldcut_core::cutting::{
    enumerate_bases, enumerate_signs, exact_downstream_in_frame, exact_upstream_in_frame,
    pauli_split, reconstruct_distribution, reconstruct_expectation, BasisElement,
};
use goldcut_core::pauli::{Eigenstring, Observable, Pauli, PauliString, Sign};
use goldcut_core::sim::{
    exact_expectation, exact_probabilities, measurement_rotation, prepare_eigenstate, run_circuit,
    DensityMatrix, Gate, StateVector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_gate(rng: &mut ChaCha8Rng, allowed: &[usize]) -> Gate {
    let q = allowed[rng.random_range(0..allowed.len())];
    match rng.random_range(0..7u32) {
        0 => Gate::Rx {
            target: q,
            angle: rng.random_range(0.0..TAU),
        },
        1 => Gate::Ry {
            target: q,
            angle: rng.random_range(0.0..TAU),
        },
        2 => Gate::Rz {
            target: q,
            angle: rng.random_range(0.0..TAU),
        },
        3 => Gate::H(q),
        4 => Gate::S(q),
        5 => Gate::X(q),
        _ => {
            if allowed.len() >= 2 {
                let mut q2 = allowed[rng.random_range(0..allowed.len())];
                while q2 == q {
                    q2 = allowed[rng.random_range(0..allowed.len())];
                }
                Gate::Cx {
                    control: q,
                    target: q2,
                }
            } else {
                Gate::H(q)
            }
        }
    }
}

/// Random circuit with a valid cut: `k` cut qubits plus a random set of
/// extra upstream qubits; prefix gates stay on the upstream side, suffix
/// gates on the cut-plus-remaining side.
fn random_cut_circuit(seed: u64, n_qubits: usize, k: usize) -> (Circuit, CutSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qubits: Vec<usize> = (0..n_qubits).collect();
    for i in (1..qubits.len()).rev() {
        let j = rng.random_range(0..=i);
        qubits.swap(i, j);
    }
    let cut_qubits = qubits[..k].to_vec();
    let extra = rng.random_range(0..=(n_qubits - k));
    let upstream_set = qubits[..k + extra].to_vec();
    let downstream_set: Vec<usize> = qubits[..k]
        .iter()
        .chain(&qubits[k + extra..])
        .copied()
        .collect();

    let prefix = rng.random_range(1..=6);
    let suffix = rng.random_range(1..=6);
    let mut gates = Vec::new();
    for _ in 0..prefix {
        gates.push(random_gate(&mut rng, &upstream_set));
    }
    let cut_position = gates.len();
    for _ in 0..suffix {
        gates.push(random_gate(&mut rng, &downstream_set));
    }
    (
        Circuit::new(n_qubits, gates).unwrap(),
        CutSpec {
            cut_qubits,
            cut_position,
        },
    )
}

fn random_pauli_string(rng: &mut ChaCha8Rng, n: usize) -> PauliString {
    PauliString(
        (0..n)
            .map(|_| Pauli::ALL[rng.random_range(0..4usize)])
            .collect(),
    )
}

fn exact_tables(
    frag: &FragmentPair,
    o_f1: &Observable,
    o_f2: &Observable,
) -> (
    Vec<goldcut_core::cutting::UpstreamTable>,
    Vec<goldcut_core::cutting::DownstreamTable>,
) {
    let k = frag.n_cuts();
    let mut ups = Vec::new();
    let mut downs = Vec::new();
    for basis in enumerate_bases(k).unwrap() {
        for (t1, (_, string)) in o_f1.terms().iter().enumerate() {
            ups.push(exact_upstream_in_frame(frag, &basis, string, t1).unwrap());
        }
        for s in enumerate_signs(k) {
            for (t2, (_, string)) in o_f2.terms().iter().enumerate() {
                downs.push(exact_downstream_in_frame(frag, &basis, &s, string, t2).unwrap());
            }
        }
    }
    (ups, downs)
}

#[test]
fn exact_reconstruction_matches_uncut_simulation() {
    for seed in 0..20u64 {
        let n = 3 + (seed % 3) as usize;
        let k = 1 + (seed % 2) as usize;
        let (circuit, cut) = random_cut_circuit(seed, n, k);
        let frag = bipartition(&circuit, &cut).unwrap();
        let uncut = run_circuit(&circuit, StateVector::zero(n)).unwrap();

        // Distribution identity, entry by entry.
        let z1 = Observable::single(PauliString::all_z(frag.upstream_outputs.len()));
        let z2 = Observable::single(PauliString::all_z(frag.downstream_width()));
        let (ups, downs) = exact_tables(&frag, &z1, &z2);
        let q = reconstruct_distribution(&ups, &downs, &frag, &BTreeSet::new()).unwrap();
        let p = exact_probabilities(&uncut);
        assert_eq!(q.len(), p.len());
        let mut total = 0.0;
        for (b, (&got, &want)) in q.iter().zip(&p).enumerate() {
            assert!(
                (got - want).abs() < 1e-10,
                "seed {seed}: entry {b}: {got} vs {want}"
            );
            total += got;
        }
        assert!((total - 1.0).abs() < 1e-9, "seed {seed}: sum {total}");

        // Expectation identity for two random Pauli strings.
        let mut rng = ChaCha8Rng::seed_from_u64(!seed);
        for _ in 0..2 {
            let string = random_pauli_string(&mut rng, n);
            let obs = Observable::single(string.clone());
            let split = pauli_split(&obs, &frag).unwrap();
            let (a, s1, s2) = &split[0];
            let o_f1 = Observable::new(vec![(*a, s1.clone())]).unwrap();
            let o_f2 = Observable::single(s2.clone());
            let (ups, downs) = exact_tables(&frag, &o_f1, &o_f2);
            let got =
                reconstruct_expectation(&ups, &downs, &o_f1, &o_f2, &BTreeSet::new()).unwrap();
            let want = exact_expectation(&uncut, &obs).unwrap();
            assert!(
                (got - want).abs() < 1e-10,
                "seed {seed}: <{string}>: {got} vs {want}"
            );
        }
    }
}

#[test]
fn factored_multi_term_observables_reconstruct_exactly() {
    // A case with nonempty upstream outputs: O = O_f1 (x) O_f2 with two
    // terms on each side, compared against the full-width observable on
    // the uncut circuit.
    let (circuit, frag) = (0..)
        .map(|seed| {
            let (circuit, cut) = random_cut_circuit(seed, 4, 1);
            let frag = bipartition(&circuit, &cut).unwrap();
            (circuit, frag)
        })
        .find(|(_, frag)| !frag.upstream_outputs.is_empty())
        .unwrap();
    let n_out = frag.upstream_outputs.len();
    let dw = frag.downstream_width();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let o_f1 = Observable::new(vec![
        (0.5, random_pauli_string(&mut rng, n_out)),
        (-0.25, random_pauli_string(&mut rng, n_out)),
    ])
    .unwrap();
    let o_f2 = Observable::new(vec![
        (1.0, random_pauli_string(&mut rng, dw)),
        (0.75, random_pauli_string(&mut rng, dw)),
    ])
    .unwrap();

    // Embed the product observable back onto original qubit positions.
    let mut full_terms = Vec::new();
    for (a, s1) in o_f1.terms() {
        for (b, s2) in o_f2.terms() {
            let mut labels = vec![Pauli::I; circuit.n_qubits()];
            for (map, l) in frag.upstream_outputs.iter().zip(s1.labels()) {
                labels[map.original] = *l;
            }
            for (map, l) in frag.downstream_outputs.iter().zip(s2.labels()) {
                labels[map.original] = *l;
            }
            full_terms.push((a * b, PauliString(labels)));
        }
    }
    let full = Observable::new(full_terms).unwrap();

    let (ups, downs) = exact_tables(&frag, &o_f1, &o_f2);
    let got = reconstruct_expectation(&ups, &downs, &o_f1, &o_f2, &BTreeSet::new()).unwrap();
    let uncut = run_circuit(&circuit, StateVector::zero(circuit.n_qubits())).unwrap();
    let want = exact_expectation(&uncut, &full).unwrap();
    assert!((got - want).abs() < 1e-10, "{got} vs {want}");
}

/// Projective partial trace: keeps `keep` wires, projects each wire in
/// `cut_wires` onto the listed computational-basis bit values, and traces
/// those wires out.
fn project_trace(
    rho: &DensityMatrix,
    keep: &[usize],
    cut_wires: &[usize],
    allowed_bits: &[Vec<usize>],
) -> DensityMatrix {
    let mut combos: Vec<usize> = vec![0];
    for (&w, bits) in cut_wires.iter().zip(allowed_bits) {
        combos = combos
            .iter()
            .flat_map(|&c| bits.iter().map(move |&b| c | (b << w)))
            .collect();
    }

    let dim_out = 1usize << keep.len();
    let embed = |bits: usize| -> usize {
        let mut idx = 0usize;
        for (i, &w) in keep.iter().enumerate() {
            idx |= ((bits >> i) & 1) << w;
        }
        idx
    };
    let mut out = DensityMatrix::zeros(keep.len());
    for r in 0..dim_out {
        for c in 0..dim_out {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for &cc in &combos {
                acc += rho.get(embed(r) | cc, embed(c) | cc);
            }
            out.set(r, c, acc);
        }
    }
    out
}

fn eig_weight(basis: &BasisElement, e: &Eigenstring) -> f64 {
    basis
        .labels()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            if *p == Pauli::I {
                1.0
            } else {
                e.get(i).value()
            }
        })
        .product()
}

#[test]
fn decomposition_reassembles_the_uncut_density_matrix() {
    for seed in [0u64, 1, 2, 5, 8, 11] {
        let n = 3 + (seed % 2) as usize;
        let k = 1 + (seed % 2) as usize;
        let (circuit, cut) = random_cut_circuit(seed.wrapping_mul(31).wrapping_add(4), n, k);
        let frag = bipartition(&circuit, &cut).unwrap();
        let n_out = frag.upstream_outputs.len();
        let dw = frag.downstream_width();

        let upstream_state = run_circuit(&frag.upstream, StateVector::zero(frag.upstream_width()))
            .unwrap();
        let keep: Vec<usize> = frag.upstream_outputs.iter().map(|m| m.wire).collect();
        let cut_wires: Vec<usize> = frag.cut_roles.iter().map(|r| r.upstream_wire).collect();

        let mut assembled = DensityMatrix::zeros(n_out + dw);
        for basis in enumerate_bases(k).unwrap() {
            // Rotate the cut wires into the measurement frame once per basis.
            let mut rotated = upstream_state.clone();
            for (role, label) in frag.cut_roles.iter().zip(basis.labels()) {
                rotated
                    .apply_all(&measurement_rotation(*label, role.upstream_wire))
                    .unwrap();
            }
            let rho_rot = DensityMatrix::from_pure(&rotated);

            for r in enumerate_signs(k) {
                // One projector bit per sign slot. For I the two slots are
                // the two basis states, both with eigenvalue +1, so the
                // pair sums to the identity resolution.
                let allowed: Vec<Vec<usize>> = (0..k)
                    .map(|i| match r.get(i) {
                        Sign::Plus => vec![0],
                        Sign::Minus => vec![1],
                    })
                    .collect();
                let rho_f1 = project_trace(&rho_rot, &keep, &cut_wires, &allowed);

                for s in enumerate_signs(k) {
                    let mut down = StateVector::zero(dw);
                    for (i, label) in basis.labels().iter().enumerate() {
                        down.apply_all(&prepare_eigenstate(*label, s.get(i), i)).unwrap();
                    }
                    down.apply_all(frag.downstream.gates()).unwrap();
                    let rho_f2 = DensityMatrix::from_pure(&down);

                    let weight = eig_weight(&basis, &r) * eig_weight(&basis, &s);
                    assembled.add_scaled(weight, &rho_f1.kron(&rho_f2));
                }
            }
        }
        let scale = 1.0 / (1u64 << k) as f64;
        let mut perm = vec![0usize; n_out + dw];
        for (i, m) in frag.upstream_outputs.iter().enumerate() {
            perm[i] = m.original;
        }
        for (i, m) in frag.downstream_outputs.iter().enumerate() {
            perm[n_out + i] = m.original;
        }
        let assembled = assembled.permute_qubits(&perm);

        let uncut = run_circuit(&circuit, StateVector::zero(n)).unwrap();
        let rho_uncut = DensityMatrix::from_pure(&uncut);
        let dim = 1usize << n;
        for row in 0..dim {
            for col in 0..dim {
                let got = scale * assembled.get(row, col);
                let want = rho_uncut.get(row, col);
                assert!(
                    (got - want).norm() < 1e-10,
                    "seed {seed}: ({row},{col}): {got} vs {want}"
                );
            }
        }
    }
}
