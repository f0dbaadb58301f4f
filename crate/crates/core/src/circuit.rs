//! Circuit representation, the `.qct` text format, and bipartition of a cut
//! circuit into an upstream/downstream fragment pair.
//!
//! Format, one directive per line (`#` starts a comment, blank lines are
//! ignored):
//!
//! ```text
//! qubits 3
//! rx 0 0.5
//! h 2
//! cut 1
//! cx 1 2
//! ```
//!
//! `qubits <n>` must come first. Gate mnemonics are lowercase: `rx`, `ry`,
//! `rz` take a target and an angle in radians; `h x y z s` take a target;
//! `cx` takes control then target. A single `cut <q...>` line marks the
//! temporal boundary: every gate above it is upstream, every gate below is
//! downstream, and the listed qubits are the only wires allowed to cross.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::sim::Gate;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize, gates: Vec<Gate>) -> Result<Circuit, StructureError> {
        if n_qubits == 0 {
            return Err(StructureError::NoQubits);
        }
        for (i, g) in gates.iter().enumerate() {
            g.validate(n_qubits)
                .map_err(|source| StructureError::BadGate { index: i, source })?;
        }
        Ok(Circuit { n_qubits, gates })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }
}

/// Cut declaration: `cut_position` counts gates before the boundary,
/// `cut_qubits` are the wires that cross it (order defines the downstream
/// wire order and the basis-label order).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutSpec {
    pub cut_qubits: Vec<usize>,
    pub cut_position: usize,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("circuit must have at least one qubit")]
    NoQubits,
    #[error("gate {index}: {source}")]
    BadGate {
        index: usize,
        source: crate::sim::SimError,
    },
    #[error("cut position {position} exceeds gate count {gates}")]
    CutPositionOutOfRange { position: usize, gates: usize },
    #[error("cut qubit {0} out of range")]
    CutQubitOutOfRange(usize),
    #[error("cut qubit {0} listed twice")]
    DuplicateCutQubit(usize),
    #[error("cut declares no qubits")]
    EmptyCut,
    #[error("gate {index} ({gate}) after the cut touches upstream-only qubit {qubit}")]
    GateSpansCut {
        index: usize,
        gate: String,
        qubit: usize,
    },
}

/// Where each fragment wire came from and where its output goes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutRole {
    pub original: usize,
    pub upstream_wire: usize,
    pub downstream_wire: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WireMap {
    pub wire: usize,
    pub original: usize,
}

/// A cut circuit split at the boundary.
///
/// Upstream wires are the qubits touched before the cut plus the cut qubits,
/// renumbered in ascending original order. Downstream wires start with the K
/// cut qubits in cut-list order, followed by the remaining downstream qubits
/// ascending (qubits no gate touches are assigned downstream). Every original
/// qubit's final output is owned by exactly one fragment wire: non-cut
/// upstream wires end at the boundary measurement, cut wires continue as
/// downstream wires 0..K.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FragmentPair {
    pub upstream: Circuit,
    pub downstream: Circuit,
    pub cut_roles: Vec<CutRole>,
    /// Non-cut upstream wires, ascending, with their original qubits.
    pub upstream_outputs: Vec<WireMap>,
    /// All downstream wires, ascending, with their original qubits.
    pub downstream_outputs: Vec<WireMap>,
    pub total_qubits: usize,
}

impl FragmentPair {
    pub fn n_cuts(&self) -> usize {
        self.cut_roles.len()
    }

    pub fn upstream_width(&self) -> usize {
        self.upstream.n_qubits()
    }

    pub fn downstream_width(&self) -> usize {
        self.downstream.n_qubits()
    }

    /// Upstream wire indices of the cuts, in cut-list order.
    pub fn upstream_cut_wires(&self) -> Vec<usize> {
        self.cut_roles.iter().map(|r| r.upstream_wire).collect()
    }

    /// Index into the full 2^N outcome space for a pair of fragment
    /// outcomes. `b1` is bit i = outcome of upstream_outputs[i]; `b2` is
    /// bit i = outcome of downstream wire i.
    pub fn embed_outputs(&self, b1: u64, b2: u64) -> u64 {
        let mut out = 0u64;
        for (i, m) in self.upstream_outputs.iter().enumerate() {
            out |= (b1 >> i & 1) << m.original;
        }
        for (i, m) in self.downstream_outputs.iter().enumerate() {
            out |= (b2 >> i & 1) << m.original;
        }
        out
    }
}

fn remap_gate(gate: &Gate, map: &dyn Fn(usize) -> usize) -> Gate {
    match *gate {
        Gate::Rx { target, angle } => Gate::Rx {
            target: map(target),
            angle,
        },
        Gate::Ry { target, angle } => Gate::Ry {
            target: map(target),
            angle,
        },
        Gate::Rz { target, angle } => Gate::Rz {
            target: map(target),
            angle,
        },
        Gate::H(t) => Gate::H(map(t)),
        Gate::X(t) => Gate::X(map(t)),
        Gate::Y(t) => Gate::Y(map(t)),
        Gate::Z(t) => Gate::Z(map(t)),
        Gate::S(t) => Gate::S(map(t)),
        Gate::Sdg(t) => Gate::Sdg(map(t)),
        Gate::Cx { control, target } => Gate::Cx {
            control: map(control),
            target: map(target),
        },
    }
}

/// Splits a circuit at the cut into an upstream/downstream fragment pair.
pub fn bipartition(circuit: &Circuit, cut: &CutSpec) -> Result<FragmentPair, StructureError> {
    if cut.cut_qubits.is_empty() {
        return Err(StructureError::EmptyCut);
    }
    if cut.cut_position > circuit.gates.len() {
        return Err(StructureError::CutPositionOutOfRange {
            position: cut.cut_position,
            gates: circuit.gates.len(),
        });
    }
    let mut cut_set = BTreeSet::new();
    for &q in &cut.cut_qubits {
        if q >= circuit.n_qubits {
            return Err(StructureError::CutQubitOutOfRange(q));
        }
        if !cut_set.insert(q) {
            return Err(StructureError::DuplicateCutQubit(q));
        }
    }

    let (pre, post) = circuit.gates.split_at(cut.cut_position);
    let mut pre_touched = BTreeSet::new();
    for g in pre {
        pre_touched.extend(g.targets());
    }
    for (offset, g) in post.iter().enumerate() {
        for q in g.targets() {
            if pre_touched.contains(&q) && !cut_set.contains(&q) {
                return Err(StructureError::GateSpansCut {
                    index: cut.cut_position + offset,
                    gate: format!("{g:?}"),
                    qubit: q,
                });
            }
        }
    }

    // Upstream owns everything touched before the cut plus the cut wires.
    let upstream_qubits: BTreeSet<usize> = pre_touched.union(&cut_set).copied().collect();
    // Downstream owns the cut wires plus everything else (touched after the
    // cut or touched never).
    let downstream_rest: Vec<usize> = (0..circuit.n_qubits)
        .filter(|q| !upstream_qubits.contains(q) || cut_set.contains(q))
        .filter(|q| !cut_set.contains(q))
        .collect();

    let upstream_order: Vec<usize> = upstream_qubits.iter().copied().collect();
    let up_wire = |orig: usize| upstream_order.iter().position(|&q| q == orig).unwrap();

    let mut downstream_order: Vec<usize> = cut.cut_qubits.clone();
    downstream_order.extend(downstream_rest.iter().copied());
    let down_wire = |orig: usize| downstream_order.iter().position(|&q| q == orig).unwrap();

    let upstream_gates: Vec<Gate> = pre.iter().map(|g| remap_gate(g, &up_wire)).collect();
    let downstream_gates: Vec<Gate> = post.iter().map(|g| remap_gate(g, &down_wire)).collect();

    let cut_roles = cut
        .cut_qubits
        .iter()
        .enumerate()
        .map(|(i, &q)| CutRole {
            original: q,
            upstream_wire: up_wire(q),
            downstream_wire: i,
        })
        .collect();
    let upstream_outputs = upstream_order
        .iter()
        .enumerate()
        .filter(|(_, q)| !cut_set.contains(q))
        .map(|(wire, &original)| WireMap { wire, original })
        .collect();
    let downstream_outputs = downstream_order
        .iter()
        .enumerate()
        .map(|(wire, &original)| WireMap { wire, original })
        .collect();

    Ok(FragmentPair {
        upstream: Circuit::new(upstream_order.len(), upstream_gates)?,
        downstream: Circuit::new(downstream_order.len(), downstream_gates)?,
        cut_roles,
        upstream_outputs,
        downstream_outputs,
        total_qubits: circuit.n_qubits,
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseErrorKind {
    #[error("expected `qubits <n>` before any other directive")]
    MissingQubitsHeader,
    #[error("duplicate `qubits` directive")]
    DuplicateQubitsHeader,
    #[error("invalid qubit count {0:?}")]
    BadQubitCount(String),
    #[error("unknown mnemonic {0:?}")]
    UnknownMnemonic(String),
    #[error("{mnemonic} expects {expected} argument(s), got {got}")]
    BadArity {
        mnemonic: String,
        expected: usize,
        got: usize,
    },
    #[error("invalid qubit index {0:?}")]
    BadQubitIndex(String),
    #[error("qubit {qubit} out of range (circuit has {n_qubits})")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("invalid angle {0:?}")]
    BadAngle(String),
    #[error("cx control and target must differ")]
    DegenerateCx,
    #[error("duplicate cut qubit {0}")]
    DuplicateCutQubit(usize),
    #[error("only one cut line is allowed")]
    DuplicateCut,
    #[error("gate touches upstream-only qubit {0} after the cut")]
    GateAfterCutTouchesUpstream(usize),
    #[error("circuit has no `qubits` header")]
    EmptyInput,
}

fn err(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError { line, kind }
}

/// Parses circuit text. Returns the circuit and the cut declaration, if any.
pub fn parse_circuit(text: &str) -> Result<(Circuit, Option<CutSpec>), ParseError> {
    let mut n_qubits: Option<usize> = None;
    let mut gates: Vec<Gate> = Vec::new();
    let mut cut: Option<CutSpec> = None;
    let mut pre_cut_touched: BTreeSet<usize> = BTreeSet::new();
    let mut touched: BTreeSet<usize> = BTreeSet::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let mnemonic = tokens[0];
        let args = &tokens[1..];

        if mnemonic == "qubits" {
            if n_qubits.is_some() {
                return Err(err(lineno, ParseErrorKind::DuplicateQubitsHeader));
            }
            if args.len() != 1 {
                return Err(err(
                    lineno,
                    ParseErrorKind::BadArity {
                        mnemonic: "qubits".into(),
                        expected: 1,
                        got: args.len(),
                    },
                ));
            }
            let n: usize = args[0]
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| err(lineno, ParseErrorKind::BadQubitCount(args[0].into())))?;
            n_qubits = Some(n);
            continue;
        }

        let n = n_qubits.ok_or_else(|| err(lineno, ParseErrorKind::MissingQubitsHeader))?;
        let parse_qubit = |tok: &str| -> Result<usize, ParseError> {
            let q: usize = tok
                .parse()
                .map_err(|_| err(lineno, ParseErrorKind::BadQubitIndex(tok.into())))?;
            if q >= n {
                return Err(err(
                    lineno,
                    ParseErrorKind::QubitOutOfRange {
                        qubit: q,
                        n_qubits: n,
                    },
                ));
            }
            Ok(q)
        };

        if mnemonic == "cut" {
            if cut.is_some() {
                return Err(err(lineno, ParseErrorKind::DuplicateCut));
            }
            if args.is_empty() {
                return Err(err(
                    lineno,
                    ParseErrorKind::BadArity {
                        mnemonic: "cut".into(),
                        expected: 1,
                        got: 0,
                    },
                ));
            }
            let mut qubits = Vec::new();
            for tok in args {
                let q = parse_qubit(tok)?;
                if qubits.contains(&q) {
                    return Err(err(lineno, ParseErrorKind::DuplicateCutQubit(q)));
                }
                qubits.push(q);
            }
            pre_cut_touched = touched.clone();
            cut = Some(CutSpec {
                cut_qubits: qubits,
                cut_position: gates.len(),
            });
            continue;
        }

        let arity = match mnemonic {
            "rx" | "ry" | "rz" | "cx" => 2,
            "h" | "x" | "y" | "z" | "s" => 1,
            other => return Err(err(lineno, ParseErrorKind::UnknownMnemonic(other.into()))),
        };
        if args.len() != arity {
            return Err(err(
                lineno,
                ParseErrorKind::BadArity {
                    mnemonic: mnemonic.into(),
                    expected: arity,
                    got: args.len(),
                },
            ));
        }

        let gate = match mnemonic {
            "rx" | "ry" | "rz" => {
                let target = parse_qubit(args[0])?;
                let angle: f64 = args[1]
                    .parse()
                    .ok()
                    .filter(|a: &f64| a.is_finite())
                    .ok_or_else(|| err(lineno, ParseErrorKind::BadAngle(args[1].into())))?;
                match mnemonic {
                    "rx" => Gate::Rx { target, angle },
                    "ry" => Gate::Ry { target, angle },
                    _ => Gate::Rz { target, angle },
                }
            }
            "cx" => {
                let control = parse_qubit(args[0])?;
                let target = parse_qubit(args[1])?;
                if control == target {
                    return Err(err(lineno, ParseErrorKind::DegenerateCx));
                }
                Gate::Cx { control, target }
            }
            "h" => Gate::H(parse_qubit(args[0])?),
            "x" => Gate::X(parse_qubit(args[0])?),
            "y" => Gate::Y(parse_qubit(args[0])?),
            "z" => Gate::Z(parse_qubit(args[0])?),
            _ => Gate::S(parse_qubit(args[0])?),
        };

        if let Some(c) = &cut {
            for q in gate.targets() {
                if pre_cut_touched.contains(&q) && !c.cut_qubits.contains(&q) {
                    return Err(err(lineno, ParseErrorKind::GateAfterCutTouchesUpstream(q)));
                }
            }
        }
        touched.extend(gate.targets());
        gates.push(gate);
    }

    let n = n_qubits.ok_or_else(|| err(text.lines().count().max(1), ParseErrorKind::EmptyInput))?;
    let circuit = Circuit::new(n, gates).expect("parser enforces gate validity");
    Ok((circuit, cut))
}

/// Canonical text form: lowercase mnemonics, single spaces, no comments.
/// Angles print in shortest round-trip notation, so parse(serialize(c))
/// reproduces `c` exactly for any circuit over the format's gate set.
/// `Sdg` has no mnemonic of its own (it only arises internally from
/// measurement rotations) and is written as the equal matrix `z` then `s`.
pub fn serialize_circuit(circuit: &Circuit, cut: Option<&CutSpec>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "qubits {}", circuit.n_qubits);
    for (i, gate) in circuit.gates.iter().enumerate() {
        if let Some(c) = cut {
            if c.cut_position == i {
                let _ = writeln!(out, "cut {}", join_usize(&c.cut_qubits));
            }
        }
        let line = match *gate {
            Gate::Rx { target, angle } => format!("rx {target} {angle}"),
            Gate::Ry { target, angle } => format!("ry {target} {angle}"),
            Gate::Rz { target, angle } => format!("rz {target} {angle}"),
            Gate::H(t) => format!("h {t}"),
            Gate::X(t) => format!("x {t}"),
            Gate::Y(t) => format!("y {t}"),
            Gate::Z(t) => format!("z {t}"),
            Gate::S(t) => format!("s {t}"),
            Gate::Sdg(t) => format!("z {t}\ns {t}"), // Sdg = Z then S, exactly
            Gate::Cx { control, target } => format!("cx {control} {target}"),
        };
        let _ = writeln!(out, "{line}");
    }
    if let Some(c) = cut {
        if c.cut_position == circuit.gates.len() {
            let _ = writeln!(out, "cut {}", join_usize(&c.cut_qubits));
        }
    }
    out
}

fn join_usize(v: &[usize]) -> String {
    v.iter()
        .map(|q| q.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}
