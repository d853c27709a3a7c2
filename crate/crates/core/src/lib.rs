//! Simulation and validation toolkit for the one-dimensional exclusion
//! process with long jumps coupled to slow or fast reservoirs.
//!
//! The crate has three layers: an exact continuous-time Monte Carlo engine
//! for the finite particle system ([`sim`]), solvers and diagnostics for
//! the five limiting equations the system converges to under diffusive or
//! subdiffusive rescaling ([`pde`], [`stationary`]), and an experiment
//! harness that runs seed-parallel ensembles and compares them against the
//! predicted hydrodynamic profiles ([`harness`]).

mod alias;
mod fenwick;

pub mod error;
pub mod exec;
pub mod harness;
pub mod kernel;
pub mod params;
pub mod pde;
pub mod profile;
pub mod sim;
pub mod stationary;

pub use error::{Error, Result};
pub use kernel::JumpKernel;
pub use params::{ModelParams, ReservoirVariant};
pub use profile::Profile;
