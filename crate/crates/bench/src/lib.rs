//! Criterion benchmarks for hrm-core live under `benches/`.
