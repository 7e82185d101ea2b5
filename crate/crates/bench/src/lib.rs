//! Criterion benchmarks for the ripd kernels; see `benches/`.
