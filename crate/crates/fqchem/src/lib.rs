//! Resource estimation for first-quantized plane-wave chemistry on a
//! fault-tolerant quantum computer.
//!
//! The crate prices two phase-estimation algorithms for the electronic
//! structure Hamiltonian in a plane-wave basis — a direct qubitized walk and
//! an interaction-picture (truncated Dyson series) walk — down to exact
//! per-step Toffoli counts and itemized logical-qubit ledgers, and optimizes
//! the free precision parameters under an RMS energy error target.
//!
//! Most capabilities have a runnable example under `examples/`; the `fqchem`
//! binary exposes the same operations as subcommands (`estimate`, `sweep`,
//! `reproduce`, `presets`).

pub mod arith;
pub mod cli;
pub mod error;
pub mod interaction;
pub mod momentum;
pub mod qubitization;
pub mod report;
pub mod scenario;

pub use error::{Error, Result};
pub use report::{Algorithm, CostModel, CostReport};
pub use scenario::{derive, from_rs, preset, presets, DerivedGeometry, NuclearSpecies, System};
