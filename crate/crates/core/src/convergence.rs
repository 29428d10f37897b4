//! Temporal convergence studies against the manufactured solution.

use std::sync::Arc;

use serde::Serialize;

use crate::diagnostics::observed_orders;
use crate::mesh::TemporalMesh;
use crate::models::mms::{Manufactured, SourceSampling};
use crate::models::{ModelError, ModelParams, Simulation, SolverConfig, StepPlan};
use crate::spectral::PeriodicGrid;

/// One convergence table: a model, a manufactured solution and a list of mesh sizes.
#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub params: ModelParams,
    pub sigma: f64,
    /// Mesh grading `γ` in `tₙ = (n/N)^γ T`.
    pub grading: f64,
    pub horizon: f64,
    pub levels: Vec<usize>,
    pub grid: Arc<PeriodicGrid>,
    pub solver: SolverConfig,
    pub sampling: SourceSampling,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelError {
    pub steps: usize,
    /// `‖φᴺ - φ(T)‖_∞`
    pub phi: f64,
    /// `‖r^{N-1/2} - N(φ(t_{N-1/2}))‖_∞`
    pub aux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub levels: Vec<LevelError>,
    /// Orders between consecutive levels; empty for a single level.
    pub phi_orders: Vec<f64>,
    pub aux_orders: Vec<f64>,
}

impl ConvergenceTable {
    pub fn finest_phi_order(&self) -> Option<f64> {
        self.phi_orders.last().copied()
    }

    pub fn finest_aux_order(&self) -> Option<f64> {
        self.aux_orders.last().copied()
    }

    /// Console layout with columns `N`, error and order for `φ` and `r`.
    pub fn render(&self) -> String {
        let mut out = format!(
            "{:>6}  {:>12}  {:>6}  {:>12}  {:>6}\n",
            "N", "err(phi)", "order", "err(r)", "order"
        );
        for (i, lvl) in self.levels.iter().enumerate() {
            let order = |v: &[f64]| match i.checked_sub(1).and_then(|j| v.get(j)) {
                Some(o) => format!("{o:6.2}"),
                None => format!("{:>6}", "--"),
            };
            out.push_str(&format!(
                "{:>6}  {:>12.4e}  {}  {:>12.4e}  {}\n",
                lvl.steps,
                lvl.phi,
                order(&self.phi_orders),
                lvl.aux,
                order(&self.aux_orders)
            ));
        }
        out
    }

    /// Rows `N,err_phi,order_phi,err_r,order_r` with empty orders on the first row.
    pub fn csv(&self) -> String {
        let mut out = String::from("N,err_phi,order_phi,err_r,order_r\n");
        for (i, lvl) in self.levels.iter().enumerate() {
            let order = |v: &[f64]| {
                i.checked_sub(1)
                    .and_then(|j| v.get(j))
                    .map(|o| format!("{o}"))
                    .unwrap_or_default()
            };
            out.push_str(&format!(
                "{},{:e},{},{:e},{}\n",
                lvl.steps,
                lvl.phi,
                order(&self.phi_orders),
                lvl.aux,
                order(&self.aux_orders)
            ));
        }
        out
    }
}

impl ConvergenceStudy {
    /// Defaults of the manufactured-solution tables: `T = 1` on `[0, 2π]²`
    /// with midpoint source sampling.
    pub fn new(params: ModelParams, sigma: f64, grading: f64, levels: Vec<usize>, grid: Arc<PeriodicGrid>) -> Self {
        Self {
            params,
            sigma,
            grading,
            horizon: 1.0,
            levels,
            grid,
            solver: SolverConfig::default(),
            sampling: SourceSampling::Midpoint,
        }
    }

    /// Runs a single level.
    pub fn run_level(&self, steps: usize) -> Result<LevelError, ModelError> {
        let mesh = TemporalMesh::graded(self.horizon, steps, self.grading)?;
        let mms = Manufactured::new(self.params, self.sigma, &self.grid).with_sampling(self.sampling);
        let t_half = 0.5 * (mesh.time(steps - 1) + mesh.time(steps));
        let mut sim = Simulation::new(self.params, mms.exact(0.0), StepPlan::Fixed(mesh), self.solver)?
            .with_source(mms.clone());
        sim.run()?;
        Ok(LevelError {
            steps,
            phi: (sim.phi() - &mms.exact(self.horizon)).norm_linf(),
            aux: (sim.aux() - &mms.exact_aux(t_half)).norm_linf(),
        })
    }

    /// Runs every level, each on its own thread.
    pub fn run(&self) -> Result<ConvergenceTable, ModelError> {
        let results: Vec<Result<LevelError, ModelError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = self
                .levels
                .iter()
                .map(|&n| scope.spawn(move || self.run_level(n)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("convergence worker panicked"))
                .collect()
        });
        let levels = results.into_iter().collect::<Result<Vec<_>, _>>()?;
        let steps: Vec<usize> = levels.iter().map(|l| l.steps).collect();
        let orders = |errs: Vec<f64>| observed_orders(&errs, &steps).unwrap_or_default();
        Ok(ConvergenceTable {
            phi_orders: orders(levels.iter().map(|l| l.phi).collect()),
            aux_orders: orders(levels.iter().map(|l| l.aux).collect()),
            levels,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;
    use std::f64::consts::PI;

    #[test]
    fn second_order_on_a_small_problem() {
        let grid = PeriodicGrid::square(16, 2.0 * PI).unwrap();
        let p = ModelParams::new(ModelKind::SwiftHohenberg, 0.6);
        let table = ConvergenceStudy::new(p, 2.0, 1.0, vec![8, 16, 32], grid).run().unwrap();
        assert_eq!(table.levels.len(), 3);
        let o = table.finest_phi_order().unwrap();
        assert!((1.8..2.2).contains(&o), "{}", table.render());
        let csv = table.csv();
        assert!(csv.starts_with("N,err_phi,order_phi,err_r,order_r\n8,"));
        assert_eq!(csv.lines().nth(1).unwrap().split(',').nth(2), Some(""));
    }

    #[test]
    fn single_level_has_no_orders() {
        let grid = PeriodicGrid::square(8, 2.0 * PI).unwrap();
        let p = ModelParams::new(ModelKind::AllenCahn, 0.5);
        let table = ConvergenceStudy::new(p, 1.0, 1.0, vec![4], grid).run().unwrap();
        assert!(table.phi_orders.is_empty() && table.aux_orders.is_empty());
        assert!(table.render().contains("--"));
    }
}
