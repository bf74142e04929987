//! Benchmark-only crate; see `benches/core_algorithms.rs`.
