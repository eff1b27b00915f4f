//! Trait-structured stochastic population dynamics.
//!
//! An event-driven individual-based simulator with full genealogy, the
//! deterministic nonlocal PDE that the population approaches in the
//! large-population limit, the stationary eigenproblem of that PDE, path
//! samplers for growth-weighted (spinal) processes and their time reversal,
//! and the statistical machinery for comparing sampled ancestral lineages
//! against the reversed-process law.

pub mod cli;
pub mod config;
pub mod ibm;
pub mod model;
pub mod operators;
pub mod pde;
pub mod rng;
pub mod spine;
pub mod stats;
