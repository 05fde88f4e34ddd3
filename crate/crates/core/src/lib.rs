//! Simulation of a type-II quantum computer running Metropolis dynamics for the
//! 1D and 2D Ising model.
//!
//! Each lattice site is a small quantum register. A node's on-site spin, copies
//! of its neighbours, probability qubits prepared in `√(1−P)|0⟩ + √P|1⟩` and
//! ancillas are loaded, a reversible circuit is applied, and the new spin is
//! either measured ([`engine::Mode::OneShot`]) or its expectation value streamed
//! onward ([`engine::Mode::Ensemble`]). A plain Metropolis oracle
//! ([`engine::Mode::Classical`]) shares the schedule and random numbers.

pub mod accuracy;
pub mod circuits;
pub mod engine;
pub mod lattice;
pub mod qstate;
pub mod rng;

pub use circuits::{Dim, IsingParams};
pub use engine::{Mode, SweepConfig, SweepRecord};
pub use lattice::{SpinLattice, SpinMode};
pub use qstate::{Circuit, GateOp, QuantumRegister};
