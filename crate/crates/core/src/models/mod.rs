//! The three relaxed L1⁺-CN phase-field schemes.
//!
//! Each model is written as `∂ₜ^α φ = -M 𝒢 μ + f` with a mobility operator
//! `𝒢` (`I - Π`, `-Δ` or `I`) and `μ = ℒφ + F'(φ)` where `ℒ` is `-ε²Δ` or
//! `(1 + Δ)²`.

pub mod mms;
pub mod operator;
pub mod solver;
pub mod stepper;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::kernels::KernelError;
use crate::mesh::MeshError;
use crate::potentials::{AuxRelation, ShConstants};
use crate::spectral::{PeriodicGrid, ScalarField, SpectralError};

pub use operator::StepOperator;
pub use solver::{SolveFailure, SolveStats, SolverConfig};
pub use stepper::{ModelState, Simulation, StepPlan};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    Params(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error("step {step}: {failure}")]
    Solver { step: usize, failure: SolveFailure },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    /// Volume-conserved Allen–Cahn.
    AllenCahn,
    CahnHilliard,
    SwiftHohenberg,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [
        ModelKind::AllenCahn,
        ModelKind::CahnHilliard,
        ModelKind::SwiftHohenberg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::AllenCahn => "TFAC_VC",
            ModelKind::CahnHilliard => "TFCH",
            ModelKind::SwiftHohenberg => "TFSH",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tfac_vc" | "tfac" | "ac" | "allen-cahn" | "allen_cahn" => Ok(ModelKind::AllenCahn),
            "tfch" | "ch" | "cahn-hilliard" | "cahn_hilliard" => Ok(ModelKind::CahnHilliard),
            "tfsh" | "sh" | "swift-hohenberg" | "swift_hohenberg" => Ok(ModelKind::SwiftHohenberg),
            other => Err(ModelError::Params(format!("unknown model '{other}'"))),
        }
    }
}

/// Physical and discretization parameters of one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub kind: ModelKind,
    /// Fractional order `α ∈ (0, 1]`.
    pub alpha: f64,
    pub mobility: f64,
    /// Interface width (Allen–Cahn and Cahn–Hilliard).
    pub epsilon: f64,
    pub g: f64,
    pub delta: f64,
    pub stabilizer: f64,
}

impl ModelParams {
    /// Defaults of the manufactured-solution study: `M = 0.01`, `ε = 0.25`,
    /// `g = 1`, `δ = 0.2`, `S = 2`.
    pub fn new(kind: ModelKind, alpha: f64) -> Self {
        Self {
            kind,
            alpha,
            mobility: 0.01,
            epsilon: 0.25,
            g: 1.0,
            delta: 0.2,
            stabilizer: 2.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Params(msg));
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.mobility > 0.0 && self.mobility.is_finite()) {
            return bad(format!("mobility must be positive, got {}", self.mobility));
        }
        if self.kind != ModelKind::SwiftHohenberg && !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.g.is_finite() && self.delta.is_finite() && self.stabilizer.is_finite()) {
            return bad("g, delta and S must be finite".into());
        }
        Ok(())
    }

    /// Kernel order `ν = 1 - α` of the L1⁺ weights.
    pub fn kernel_order(&self) -> f64 {
        1.0 - self.alpha
    }

    pub fn sh_constants(&self) -> ShConstants {
        ShConstants::new(self.g, self.delta)
    }

    pub fn relation(&self) -> AuxRelation {
        match self.kind {
            ModelKind::AllenCahn => AuxRelation::allen_cahn(self.stabilizer),
            ModelKind::CahnHilliard => AuxRelation::cahn_hilliard(self.stabilizer),
            ModelKind::SwiftHohenberg => AuxRelation::swift_hohenberg(&self.sh_constants(), self.stabilizer),
        }
    }

    /// Fourier symbol of `ℒ`.
    pub fn linear_symbol(&self, grid: &Arc<PeriodicGrid>) -> Vec<f64> {
        let eps2 = self.epsilon * self.epsilon;
        match self.kind {
            ModelKind::SwiftHohenberg => grid.symbol(|k| (1.0 - k) * (1.0 - k)),
            _ => grid.symbol(|k| eps2 * k),
        }
    }

    /// Fourier symbol of `𝒢`.
    pub fn mobility_symbol(&self, grid: &Arc<PeriodicGrid>) -> Vec<f64> {
        match self.kind {
            ModelKind::AllenCahn => grid.symbol(|k| if k == 0.0 { 0.0 } else { 1.0 }),
            ModelKind::CahnHilliard => grid.symbol(|k| k),
            ModelKind::SwiftHohenberg => grid.symbol(|_| 1.0),
        }
    }

    pub fn apply_linear(&self, u: &ScalarField) -> ScalarField {
        match self.kind {
            ModelKind::SwiftHohenberg => u.one_plus_lap_sq(),
            _ => u.laplacian().scaled(-self.epsilon * self.epsilon),
        }
    }

    pub fn apply_mobility(&self, u: &ScalarField) -> ScalarField {
        match self.kind {
            ModelKind::AllenCahn => u.mean_free(),
            ModelKind::CahnHilliard => u.laplacian().scaled(-1.0),
            ModelKind::SwiftHohenberg => u.clone(),
        }
    }

    /// `μ = ℒφ + F'(φ)` with the original potential.
    pub fn chemical_potential(&self, phi: &ScalarField) -> ScalarField {
        let rel = self.relation();
        let mut mu = self.apply_linear(phi);
        for (m, &p) in mu.values_mut().iter_mut().zip(phi.values()) {
            *m += rel.derivative(p);
        }
        mu
    }

    /// Whether the spatial mean of `φ` is conserved by the flow.
    pub fn conserves_mass(&self) -> bool {
        self.kind != ModelKind::SwiftHohenberg
    }
}
