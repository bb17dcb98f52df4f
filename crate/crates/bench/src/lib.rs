//! Criterion benchmarks for `hobj`; see `benches/core.rs`.
