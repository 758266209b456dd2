//! Benchmark harness crate; see `benches/checker.rs`.
