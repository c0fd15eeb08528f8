//! Generates C programs whose run times split WebAssembly runtimes apart,
//! steering toward programs whose time ratios stray furthest from the seeds'.
//!
//! This crate is the IO-free core: the MiniC frontend, operator extraction,
//! seed usage profiling, program synthesis, ratio scoring and the campaign
//! state machine. Process execution, file formats and the CLI live in the
//! `warpforge` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod campaign;
pub mod cost;
pub mod dist;
pub mod minic;
pub mod operator;
pub mod profile;
pub mod seedgen;
pub mod synth;
