//! The simulation behind the page, kept free of JavaScript types so it can
//! be tested natively.

use std::f64::consts::PI;

use fracphase::diagnostics::diagnostics_csv;
use fracphase::{
    AdaptiveController, AdaptiveParams, InitialData, ModelKind, ModelParams, PeriodicGrid, Simulation, SolverConfig,
    StepPlan,
};

/// What the page lets the user choose.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoSettings {
    pub model: ModelKind,
    pub alpha: f64,
    pub grid: usize,
    pub seed: u64,
    pub horizon: f64,
}

impl DemoSettings {
    pub fn new(model: ModelKind, alpha: f64) -> Self {
        Self {
            model,
            alpha,
            grid: 64,
            seed: 7,
            horizon: 50.0,
        }
    }
}

/// Model parameters, box length, initial data and controller for a model.
///
/// Allen–Cahn and Cahn–Hilliard coarsen from small noise on `[0, 2π]²`;
/// Swift–Hohenberg grows a pattern on `(0, 32)²`.
fn preset(s: &DemoSettings) -> (ModelParams, f64, InitialData, AdaptiveParams) {
    let mut params = ModelParams::new(s.model, s.alpha);
    let nu = params.kernel_order();
    match s.model {
        ModelKind::SwiftHohenberg => {
            params.mobility = 0.6;
            params.g = 0.5;
            params.delta = -0.25;
            let ap = AdaptiveParams {
                lambda: 1e3,
                tau_min: 1e-5,
                tau_max: 1.0,
                kernel_order: nu,
            };
            (params, 32.0, InitialData::Pattern, ap)
        }
        kind => {
            if kind == ModelKind::CahnHilliard {
                params.epsilon = 0.5;
            }
            let ap = AdaptiveParams {
                lambda: 100.0,
                tau_min: 1e-3,
                tau_max: 0.5,
                kernel_order: nu,
            };
            (params, 2.0 * PI, InitialData::Random, ap)
        }
    }
}

pub struct DemoEngine {
    settings: DemoSettings,
    sim: Simulation,
    halted: Option<String>,
}

impl DemoEngine {
    pub fn new(settings: DemoSettings) -> Result<Self, String> {
        let (params, length, init, adaptive) = preset(&settings);
        let grid = PeriodicGrid::square(settings.grid, length).map_err(|e| e.to_string())?;
        let phi0 = init.build(&grid, settings.seed);
        let controller = AdaptiveController::new(adaptive, settings.horizon).map_err(|e| e.to_string())?;
        let sim = Simulation::new(params, phi0, StepPlan::Adaptive(controller), SolverConfig::default())
            .map_err(|e| e.to_string())?;
        Ok(Self {
            settings,
            sim,
            halted: None,
        })
    }

    pub fn settings(&self) -> &DemoSettings {
        &self.settings
    }

    /// Takes up to `steps` steps and returns how many were taken. A solver
    /// failure halts the engine; the message is kept in [`Self::halted`].
    pub fn advance(&mut self, steps: usize) -> usize {
        let mut taken = 0;
        while taken < steps && self.halted.is_none() {
            match self.sim.step() {
                Ok(Some(_)) => taken += 1,
                Ok(None) => break,
                Err(e) => self.halted = Some(e.to_string()),
            }
        }
        taken
    }

    pub fn halted(&self) -> Option<&str> {
        self.halted.as_deref()
    }

    pub fn finished(&self) -> bool {
        self.halted.is_some() || self.sim.finished()
    }

    pub fn time(&self) -> f64 {
        self.sim.time()
    }

    pub fn step_count(&self) -> usize {
        self.sim.state().step
    }

    pub fn field(&self) -> &[f64] {
        self.sim.phi().values()
    }

    /// Latest `[t, τ, E, Ẽ, Ẽ_α, mass drift, aux gap]`.
    pub fn latest(&self) -> [f64; 7] {
        let r = self.sim.records().last().expect("initial record");
        [
            r.time,
            r.tau,
            r.energy,
            r.energy_modified,
            r.energy_variational,
            r.mass_drift,
            r.aux_gap,
        ]
    }

    /// `(t, Ẽ)` pairs of every step so far, flattened.
    pub fn energy_trace(&self) -> Vec<f64> {
        self.sim
            .records()
            .iter()
            .flat_map(|r| [r.time, r.energy_modified])
            .collect()
    }

    pub fn diagnostics_csv(&self) -> String {
        diagnostics_csv(self.sim.records())
    }

    /// RGBA pixels of the field (row `iy` is image row `iy`), on a blue-white-red
    /// scale stretched over the current range.
    pub fn rgba(&self) -> Vec<u8> {
        let values = self.field();
        let (lo, hi) = values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut out = Vec::with_capacity(4 * values.len());
        for &v in values {
            out.extend_from_slice(&colour((v - lo) / span));
            out.push(255);
        }
        out
    }
}

/// Diverging map on `[0, 1]`: blue, white at ½, red.
pub fn colour(x: f64) -> [u8; 3] {
    let x = if x.is_finite() { x.clamp(0.0, 1.0) } else { 0.5 };
    let (cold, warm) = ([33.0, 102.0, 172.0], [178.0, 24.0, 43.0]);
    let (end, w) = if x < 0.5 { (cold, 1.0 - 2.0 * x) } else { (warm, 2.0 * x - 1.0) };
    end.map(|c: f64| (255.0 + (c - 255.0) * w).round() as u8)
}
