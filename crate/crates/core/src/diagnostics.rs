//! Energies, conservation and consistency measures, and observed orders.

use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

use crate::kernels::{functional_a, DifferenceHistory, KernelError};
use crate::mesh::TemporalMesh;
use crate::models::{ModelKind, ModelParams};
use crate::potentials::AuxRelation;
use crate::spectral::ScalarField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("error and level lists differ in length ({errors} vs {levels})")]
    Lengths { errors: usize, levels: usize },
    #[error("errors must be positive and finite, got {0}")]
    NonPositive(f64),
}

/// Quadratic (interfacial) part of the energy.
fn interfacial_energy(params: &ModelParams, phi: &ScalarField) -> f64 {
    match params.kind {
        ModelKind::SwiftHohenberg => 0.5 * phi.inner(&phi.one_plus_lap_sq()),
        _ => 0.5 * params.epsilon * params.epsilon * phi.gradient_energy(),
    }
}

/// `E[φ]`
pub fn energy_original(params: &ModelParams, phi: &ScalarField) -> f64 {
    let rel = params.relation();
    let bulk = phi.map(|p| rel.density(p)).integral();
    interfacial_energy(params, phi) + bulk
}

/// `Ẽ[φ, r]`; equals `E[φ]` when `r = N(φ)`.
pub fn energy_modified(params: &ModelParams, phi: &ScalarField, r: &ScalarField) -> f64 {
    let rel = params.relation();
    let bulk = phi.zip_map(r, |p, q| rel.modified_density(p, q)).integral();
    interfacial_energy(params, phi) + bulk
}

/// Maps an increment into the space whose norm the dissipation law uses:
/// `L²` for Allen–Cahn and Swift–Hohenberg, `H⁻¹` (via `(-Δ)^{-1/2}`) for
/// Cahn–Hilliard.
pub fn energy_metric(params: &ModelParams, u: &ScalarField) -> ScalarField {
    match params.kind {
        ModelKind::CahnHilliard => {
            let symbol = u.grid().symbol(|k| if k == 0.0 { 0.0 } else { 1.0 / k.sqrt() });
            u.apply_symbol(&symbol)
        }
        _ => u.clone(),
    }
}

/// `Ẽ_α = Ẽ + 𝒜_{1-α}(∇_τφⁿ)/M`, where `history` holds metric-mapped increments.
pub fn energy_variational(
    params: &ModelParams,
    energy_modified: f64,
    history: &DifferenceHistory<ScalarField>,
    mesh: &TemporalMesh,
    n: usize,
) -> Result<f64, KernelError> {
    if n == 0 {
        return Ok(energy_modified);
    }
    let a = functional_a(history, mesh, n, params.kernel_order())?;
    Ok(energy_modified + a / params.mobility)
}

/// `‖r - N((φ_a + φ_b)/2)‖_{L²}`.
pub fn aux_gap(rel: &AuxRelation, r: &ScalarField, phi_a: &ScalarField, phi_b: &ScalarField) -> f64 {
    let mid = phi_a.zip_map(phi_b, |a, b| 0.5 * (a + b));
    (r - &rel.closure_field(&mid)).norm_l2()
}

/// `log(e_i / e_{i+1}) / log(N_{i+1} / N_i)` for consecutive levels.
pub fn observed_orders(errors: &[f64], levels: &[usize]) -> Result<Vec<f64>, DiagnosticsError> {
    if errors.len() != levels.len() {
        return Err(DiagnosticsError::Lengths {
            errors: errors.len(),
            levels: levels.len(),
        });
    }
    if let Some(&bad) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(DiagnosticsError::NonPositive(bad));
    }
    Ok(errors
        .windows(2)
        .zip(levels.windows(2))
        .map(|(e, n)| (e[0] / e[1]).ln() / (n[1] as f64 / n[0] as f64).ln())
        .collect())
}

/// Per-step diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub step: usize,
    pub time: f64,
    pub tau: f64,
    pub energy: f64,
    pub energy_modified: f64,
    pub energy_variational: f64,
    pub mass: f64,
    /// `|⟨φⁿ - φ⁰, 1⟩|`
    pub mass_drift: f64,
    /// `‖r^{n-1/2} - N(φ^{n-1/2})‖`
    pub aux_gap: f64,
    /// `‖r^{n-1/2} - N(φ^{n-1})‖`, kept for comparison.
    pub aux_gap_node: f64,
    pub iterations: usize,
    pub residual: f64,
}

pub const DIAGNOSTICS_HEADER: &str = "n,t,tau,E,E_mod,E_var,mass,mass_drift,aux_gap,iters,residual";

impl DiagnosticsRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{:e}",
            self.step,
            self.time,
            self.tau,
            self.energy,
            self.energy_modified,
            self.energy_variational,
            self.mass,
            self.mass_drift,
            self.aux_gap,
            self.iterations,
            self.residual
        )
    }
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::with_capacity(128 * (records.len() + 1));
    out.push_str(DIAGNOSTICS_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}
