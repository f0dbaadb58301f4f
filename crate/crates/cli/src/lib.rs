//! Experiment harness around `goldcut-core`: builtin benchmark circuits,
//! (shots, alpha) sweep grids, runtime benchmarks, and CSV/SVG emission.

pub mod bench;
pub mod generators;
pub mod metrics;
pub mod output;
pub mod sweep;
