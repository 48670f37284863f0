//! Batch harness around the `liepose` estimators: scenario files in,
//! trace CSVs, statistics reports, and plots out. The binary in this
//! crate is a thin argument layer over these modules, which are public so
//! integration tests can drive whole runs in process.

pub mod config;
pub mod error;
pub mod euler;
pub mod plot;
pub mod runner;
pub mod stats;
pub mod trace;
