//! Builtin circuit generators.
//!
//! The two benchmark circuits share a 3-qubit upstream prepared by single-
//! qubit rotations with the cut on qubit 1, followed by a seeded random
//! two-qubit downstream section. In the `golden` variant the cut qubit's
//! state has no X component, so the X measurement basis contributes
//! exactly zero; `nongolden` adds one more rotation that moves the Bloch
//! vector off the Y-Z plane, making every basis matter.

use std::f64::consts::TAU;
use std::fmt::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A named source of circuit text. `theta` sets the fixed rotation angles;
/// `seed` drives any randomized structure, so equal arguments always yield
/// identical text.
pub trait CircuitGenerator: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn generate(&self, theta: f64, seed: u64) -> String;
}

struct Golden;
struct NonGolden;

impl CircuitGenerator for Golden {
    fn name(&self) -> &'static str {
        "golden"
    }
    fn description(&self) -> &'static str {
        "3-qubit benchmark whose cut qubit has a zero X component"
    }
    fn generate(&self, theta: f64, seed: u64) -> String {
        golden_circuit(theta, seed)
    }
}

impl CircuitGenerator for NonGolden {
    fn name(&self) -> &'static str {
        "nongolden"
    }
    fn description(&self) -> &'static str {
        "golden benchmark plus an extra rotation that makes X detectable"
    }
    fn generate(&self, theta: f64, seed: u64) -> String {
        nongolden_circuit(theta, seed)
    }
}

pub static GENERATORS: &[&dyn CircuitGenerator] = &[&Golden, &NonGolden];

pub fn lookup(name: &str) -> Option<&'static dyn CircuitGenerator> {
    GENERATORS.iter().copied().find(|g| g.name() == name)
}

fn upstream_lines(theta: f64, extra_ry: bool) -> String {
    let mut text = String::from("qubits 3\n");
    writeln!(text, "rx 0 {theta}").unwrap();
    writeln!(text, "rx 1 {theta}").unwrap();
    writeln!(text, "ry 0 {theta}").unwrap();
    if extra_ry {
        writeln!(text, "ry 1 {theta}").unwrap();
    }
    text.push_str("cut 1\n");
    text
}

/// Four seeded layers on qubits 1-2: one random single-qubit gate per
/// layer (rotation angles uniform in [0, 2pi)), then a CX with probability
/// one half. The draw order per layer is fixed: qubit, angle, gate kind,
/// CX coin.
fn random_downstream(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::new();
    for _ in 0..4 {
        let q = rng.random_range(1..=2usize);
        let angle = rng.random_range(0.0..TAU);
        match rng.random_range(0..5u32) {
            0 => writeln!(out, "rx {q} {angle}"),
            1 => writeln!(out, "ry {q} {angle}"),
            2 => writeln!(out, "rz {q} {angle}"),
            3 => writeln!(out, "h {q}"),
            _ => writeln!(out, "s {q}"),
        }
        .unwrap();
        if rng.random::<bool>() {
            out.push_str("cx 1 2\n");
        }
    }
    out
}

/// RX(theta) on q0 and q1, RY(theta) on q0, cut on q1, random downstream.
/// The cut qubit sees only RX, so its Bloch vector stays in the Y-Z plane
/// and the X basis is golden for every theta.
pub fn golden_circuit(theta: f64, downstream_seed: u64) -> String {
    let mut text = upstream_lines(theta, false);
    text.push_str(&random_downstream(downstream_seed));
    text
}

/// The golden circuit with an additional RY(theta) on the cut qubit before
/// the cut; its X component becomes sin(theta)cos(theta).
pub fn nongolden_circuit(theta: f64, downstream_seed: u64) -> String {
    let mut text = upstream_lines(theta, true);
    text.push_str(&random_downstream(downstream_seed));
    text
}

/// Seeded random circuit with a valid cut, for corpus-style tests: `k` cut
/// qubits plus a random set of extra upstream qubits, gates drawn on the
/// legal side of the boundary.
pub fn random_cut_circuit(seed: u64, n_qubits: usize, k: usize) -> String {
    use goldcut_core::circuit::{serialize_circuit, Circuit, CutSpec};
    use goldcut_core::sim::Gate;

    assert!(k >= 1 && k <= n_qubits);
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

    let gate = |rng: &mut ChaCha8Rng, allowed: &[usize]| -> Gate {
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
    };

    let prefix = rng.random_range(1..=6);
    let suffix = rng.random_range(1..=6);
    let mut gates = Vec::new();
    for _ in 0..prefix {
        gates.push(gate(&mut rng, &upstream_set));
    }
    let cut_position = gates.len();
    for _ in 0..suffix {
        gates.push(gate(&mut rng, &downstream_set));
    }
    let circuit = Circuit::new(n_qubits, gates).expect("generated gates are in range");
    serialize_circuit(
        &circuit,
        Some(&CutSpec {
            cut_qubits,
            cut_position,
        }),
    )
}
