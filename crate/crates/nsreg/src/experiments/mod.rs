//! Benchmark problem generators: sparse recovery (BPDN) and ODE parameter
//! estimation, plus the seedable RNG they share.

pub mod bpdn;
pub mod fh;
pub mod rng;
