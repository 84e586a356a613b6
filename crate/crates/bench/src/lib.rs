//! Criterion benchmarks for the `irrinv` solver; see `benches/solver.rs`.
