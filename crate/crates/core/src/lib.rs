//! Makespan-optimal scheduling of independent processes on machines with
//! `B` big and `S` small cores.
//!
//! A process may split its work between a big and a small core
//! ([`model::FractionalAssignment`]); [`general::solve`] finds the split with
//! the least makespan and [`packing::pack`] lays it out as per-core
//! timelines. [`heuristics`] holds the whole-process baselines and
//! [`oracle`] the brute-force checks.

pub mod analytic;
pub mod cli;
pub mod error;
pub mod general;
pub mod heuristics;
pub mod model;
pub mod oracle;
pub mod packing;

pub use error::{Error, Result};
pub use model::{FractionalAssignment, Machine, ProcessSpec, Workload};
