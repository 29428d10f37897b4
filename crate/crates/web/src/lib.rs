//! Browser bindings. Build with `wasm-pack build --target web` and serve `www/`.

pub mod engine;

use fracphase::ModelKind;
use wasm_bindgen::prelude::*;

pub use engine::{DemoEngine, DemoSettings};

#[wasm_bindgen]
pub struct Demo {
    engine: DemoEngine,
}

#[wasm_bindgen]
impl Demo {
    /// `model` is `TFAC_VC`, `TFCH` or `TFSH` (short names work too).
    #[wasm_bindgen(constructor)]
    pub fn new(model: &str, alpha: f64, grid: usize, seed: u64, horizon: f64) -> Result<Demo, JsError> {
        let model: ModelKind = model.parse().map_err(|e: fracphase::ModelError| JsError::new(&e.to_string()))?;
        let settings = DemoSettings {
            grid,
            seed,
            horizon,
            ..DemoSettings::new(model, alpha)
        };
        let engine = DemoEngine::new(settings).map_err(|e| JsError::new(&e))?;
        Ok(Demo { engine })
    }

    pub fn advance(&mut self, steps: usize) -> usize {
        self.engine.advance(steps)
    }

    pub fn finished(&self) -> bool {
        self.engine.finished()
    }

    pub fn halted(&self) -> Option<String> {
        self.engine.halted().map(str::to_string)
    }

    pub fn time(&self) -> f64 {
        self.engine.time()
    }

    #[wasm_bindgen(js_name = stepCount)]
    pub fn step_count(&self) -> usize {
        self.engine.step_count()
    }

    pub fn size(&self) -> usize {
        self.engine.settings().grid
    }

    /// `[t, tau, E, E_mod, E_var, mass_drift, aux_gap]` of the latest step.
    pub fn latest(&self) -> Vec<f64> {
        self.engine.latest().to_vec()
    }

    pub fn field(&self) -> Vec<f64> {
        self.engine.field().to_vec()
    }

    pub fn rgba(&self) -> Vec<u8> {
        self.engine.rgba()
    }

    #[wasm_bindgen(js_name = energyTrace)]
    pub fn energy_trace(&self) -> Vec<f64> {
        self.engine.energy_trace()
    }

    #[wasm_bindgen(js_name = diagnosticsCsv)]
    pub fn diagnostics_csv(&self) -> String {
        self.engine.diagnostics_csv()
    }
}
