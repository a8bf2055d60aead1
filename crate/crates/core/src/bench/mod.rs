//! Benchmark harness: metrics, estimators and the experiment runners.

mod estimators;
mod experiment;
mod metrics;

pub use estimators::*;
pub use experiment::*;
pub use metrics::*;
