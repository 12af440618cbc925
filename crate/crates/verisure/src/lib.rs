//! Drivers around `verisure-core`: simulator, prover and model backends,
//! problem manifests, the repair session and the benchmark runner.

pub mod benchmark;
pub mod cli;
pub mod config;
pub mod llm;
pub mod manifest;
pub mod prover;
pub mod session;
pub mod sim;

pub use verisure_core as core;
