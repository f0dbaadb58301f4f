//! Deterministic seed derivation. Every sampling site in the pipeline gets
//! its own seed derived from a master seed and the variant's ordinal
//! coordinates, so results are reproducible and independent of execution
//! order or of which variants end up skipped.

/// SplitMix64 finalizer; a cheap, well-mixed 64-bit permutation.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds the parts into the master seed one at a time. Changing any part
/// (or its position) yields an unrelated stream.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut s = splitmix64(master);
    for (i, p) in parts.iter().enumerate() {
        s = splitmix64(s ^ splitmix64(p.wrapping_add(i as u64 + 1)));
    }
    s
}

/// Stream tags keep the different sampling sites out of each other's way.
pub mod stream {
    pub const UPSTREAM: u64 = 0x7570;
    pub const DOWNSTREAM: u64 = 0x646f;
    pub const CIRCUIT: u64 = 0x6369;
    pub const TRIAL: u64 = 0x7472;
}

/// Seed for the upstream execution of basis `basis_index` (lexicographic
/// ordinal) under observable term `term`.
pub fn upstream_seed(master: u64, basis_index: u64, term: u64) -> u64 {
    derive_seed(master, &[stream::UPSTREAM, basis_index, term])
}

/// Seed for the downstream execution of (basis, eigenstring, term), with the
/// eigenstring identified by its mask ordinal.
pub fn downstream_seed(master: u64, basis_index: u64, prep_index: u64, term: u64) -> u64 {
    derive_seed(master, &[stream::DOWNSTREAM, basis_index, prep_index, term])
}

/// Per-trial seed for sweep cells: a pure function of
/// (master seed, shots, alpha, trial index).
pub fn trial_seed(master: u64, shots: u64, alpha: f64, trial: u64) -> u64 {
    derive_seed(master, &[stream::TRIAL, shots, alpha.to_bits(), trial])
}
