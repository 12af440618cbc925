//! Deterministic core of the verisure generate/verify/debug loop for RTL.
//!
//! Everything here is allocation-only and free of IO so it can be embedded
//! anywhere; the `verisure` crate adds simulators, provers, model backends
//! and the command line.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod verilog;
pub mod agents;
pub mod bench;
pub mod contract;
pub mod formal;
pub mod patch;
pub mod rtl_graph;
pub mod simlog;
pub mod trace;
