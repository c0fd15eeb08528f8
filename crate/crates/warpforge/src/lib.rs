//! File formats, native and Wasm execution, campaign driving and reporting
//! around `warpforge-core`.

pub mod bootstrap;
pub mod config;
pub mod driver;
pub mod harness;
pub mod native;
pub mod process;
pub mod report;
pub mod store;
