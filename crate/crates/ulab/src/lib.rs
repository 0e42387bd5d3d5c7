//! Experiment harness over the core library: JSON-configured norm and
//! counting computations, seed-deterministic verification suites, and the
//! trend experiments (count decay, control sanity, bounds search, degree
//! lowering), all exposed through the `ulab` binary.

pub mod cli;
pub mod config;
pub mod experiments;
pub mod report;
pub mod suites;
