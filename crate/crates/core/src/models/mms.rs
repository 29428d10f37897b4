//! Manufactured solution `φ = (1 - ω_{1+σ}(t)) (¼ sin 2x cos 2y + 0.45)`.

use std::sync::Arc;

use super::ModelParams;
use crate::quadrature::GAUSS_LEGENDRE_8;
use crate::special::omega;
use crate::spectral::{PeriodicGrid, ScalarField};

/// How the source is sampled on a step `[t_n, t_{n+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceSampling {
    /// Evaluate at `t_{n+1/2}`.
    #[default]
    Midpoint,
    /// Average over the step: exact for the Caputo part, Gauss–Legendre for the rest.
    IntervalAverage,
}

pub fn profile(x: f64, y: f64) -> f64 {
    0.25 * (2.0 * x).sin() * (2.0 * y).cos() + 0.45
}

/// `1 - ω_{1+σ}(t)`
pub fn temporal_factor(t: f64, sigma: f64) -> f64 {
    1.0 - omega(1.0 + sigma, t)
}

/// Caputo derivative of order `α` of the temporal factor: `-ω_{1+σ-α}(t)`.
pub fn caputo_factor(t: f64, sigma: f64, alpha: f64) -> f64 {
    -omega(1.0 + sigma - alpha, t)
}

/// Manufactured-solution problem for one model.
#[derive(Debug, Clone)]
pub struct Manufactured {
    params: ModelParams,
    sigma: f64,
    grid: Arc<PeriodicGrid>,
    profile: ScalarField,
    sampling: SourceSampling,
}

impl Manufactured {
    pub fn new(params: ModelParams, sigma: f64, grid: &Arc<PeriodicGrid>) -> Self {
        Self {
            params,
            sigma,
            grid: Arc::clone(grid),
            profile: ScalarField::from_fn(grid, profile),
            sampling: SourceSampling::Midpoint,
        }
    }

    pub fn with_sampling(mut self, sampling: SourceSampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn exact(&self, t: f64) -> ScalarField {
        self.profile.scaled(temporal_factor(t, self.sigma))
    }

    /// `N(φ_e(t))`, the auxiliary variable of the exact solution.
    pub fn exact_aux(&self, t: f64) -> ScalarField {
        self.params.relation().closure_field(&self.exact(t))
    }

    /// `M 𝒢 μ(φ_e(t))` with the original potential.
    fn spatial_part(&self, t: f64) -> ScalarField {
        let mu = self.params.chemical_potential(&self.exact(t));
        self.params.apply_mobility(&mu).scaled(self.params.mobility)
    }

    /// `f(t) = ∂ₜ^α φ_e + M 𝒢 μ(φ_e)`.
    pub fn source_at(&self, t: f64) -> ScalarField {
        let mut f = self.spatial_part(t);
        f.add_scaled(caputo_factor(t, self.sigma, self.params.alpha), &self.profile);
        f
    }

    /// Source sample for the step `[t0, t1]`.
    pub fn step_source(&self, t0: f64, t1: f64) -> ScalarField {
        match self.sampling {
            SourceSampling::Midpoint => self.source_at(0.5 * (t0 + t1)),
            SourceSampling::IntervalAverage => {
                let tau = t1 - t0;
                let beta = 2.0 + self.sigma - self.params.alpha;
                let caputo_avg = -(omega(beta, t1) - omega(beta, t0)) / tau;
                let mut acc = self.profile.scaled(caputo_avg);
                let (mid, half) = (0.5 * (t0 + t1), 0.5 * tau);
                for &(x, w) in GAUSS_LEGENDRE_8.iter() {
                    acc.add_scaled(0.5 * w, &self.spatial_part(mid + half * x));
                }
                acc
            }
        }
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }
}
