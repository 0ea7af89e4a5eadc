//! Benchmark-only crate; see `benches/curvature.rs`.
