//! Criterion benchmarks for `kslab-core`; see `benches/`.
