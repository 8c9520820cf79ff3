//! Truncated Fock-space simulation of three-mode parametric down-conversion
//! coupled to three qubits: composite-space bookkeeping, sparse operator
//! assembly, time-dependent Schrödinger evolution, nongaussian entanglement
//! witnesses, and the conservation-law checks that certify all of it.
//!
//! The crate is `no_std` + `alloc`; everything here is pure computation. IO,
//! parameter sweeps, and the CLI live in the companion `spdc3-cli` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dynamics;
pub mod fock;
pub mod observables;
pub mod operators;
pub mod qubit;
pub mod rng;
pub mod sparse;

pub use dynamics::{evolve, evolve_observed, EvolutionSpec, Method, TrajectoryResult};
pub use fock::{BasisIndex, ConfigError, Space, SpaceConfig, StateVector};
pub use observables::{MomentSet, ObservableRecord, ObservableSet, WitnessValues};
pub use operators::{
    commutator_norm, parity_projector, parity_projector_literal, HamiltonianModel,
};
pub use sparse::SparseOperator;
