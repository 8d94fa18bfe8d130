//! Criterion benchmarks for `shellstat-core`; see `benches/`.
