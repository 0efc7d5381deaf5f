//! Quantum battery built from the ground or thermal state of a finite XYZ
//! spin-1/2 chain, charged by a uniform transverse field.
//!
//! The crate covers the whole pipeline at exact-diagonalization scale
//! (N up to ~12): Hamiltonian construction and spectral normalization
//! ([`model`]), dense linear algebra ([`linalg`]), initial states
//! ([`states`]), charging dynamics and power maximization ([`dynamics`]),
//! quenched disorder averages ([`disorder`]), entanglement and order
//! parameters ([`observables`]) and derived figures of merit such as the
//! interaction advantage, critical-point detection and finite-size scaling
//! ([`analysis`]).

pub mod analysis;
pub mod disorder;
pub mod dynamics;
pub mod error;
pub mod linalg;
pub mod model;
pub mod observables;
pub mod parallel;
pub mod states;

pub use dynamics::{battery_power, power_max, OptimizerConfig, PowerResult};
pub use error::{Error, Result};
pub use linalg::{DenseOperator, EigenDecomposition, C64};
pub use model::{DisorderSpec, DisorderTarget, ModelParams, NormalizedHamiltonian};
pub use states::{BiasKind, QuantumState, StatePrep, SymmetryBias};
