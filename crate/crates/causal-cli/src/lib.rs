//! Library side of the CLI: deterministic benchmark instances, the scaling
//! harness, and report assembly. The binary in `main.rs` is a thin argument
//! layer over this and `causal-core`.

pub mod bench;

pub use bench::{run_layered_chain_bench, BenchConfig, BenchReport, BenchRow};
