//! Variable-step L1⁺ Crank–Nicolson solvers for time-fractional phase-field
//! equations with a staggered linear relaxation of the potential.

// `!(x > 0.0)` style guards are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod convergence;
pub mod diagnostics;
pub mod experiment;
pub mod initial;
pub mod kernels;
pub mod mesh;
pub mod models;
pub mod potentials;
pub mod quadrature;
pub mod snapshot;
pub mod special;
pub mod spectral;

pub use diagnostics::DiagnosticsRecord;
pub use initial::InitialData;
pub use kernels::{DifferenceHistory, HistoryValue, KernelRow, ModifiedKernelRow};
pub use mesh::{AdaptiveController, AdaptiveParams, TemporalMesh};
pub use models::{ModelError, ModelKind, ModelParams, Simulation, SolverConfig, StepPlan};
pub use potentials::AuxRelation;
pub use spectral::{PeriodicGrid, ScalarField};
