//! Harness around `rdc-core`: instance files, generators, the
//! end-to-end pipeline and the benchmark runner. The `rdc` binary is a
//! thin wrapper over these modules.

pub mod bench;
pub mod format;
pub mod generate;
pub mod pipeline;
