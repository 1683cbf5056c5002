//! Criterion benchmarks for the impurity CFT engine; see `benches/`.
