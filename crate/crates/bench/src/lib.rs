//! Criterion benchmarks for the metric, beamforming and simulation kernels.
//! See `benches/kernels.rs`.
