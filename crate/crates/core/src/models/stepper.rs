//! Time stepping on a prescribed or adaptive mesh.

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::kernels::{DifferenceHistory, KernelRow};
use crate::mesh::{AdaptiveController, TemporalMesh};
use crate::potentials::AuxRelation;
use crate::spectral::ScalarField;

use super::mms::Manufactured;
use super::{ModelError, ModelKind, ModelParams, SolverConfig, StepOperator};

/// Where the next time node comes from.
#[derive(Debug, Clone)]
pub enum StepPlan {
    Fixed(TemporalMesh),
    Adaptive(AdaptiveController),
}

impl StepPlan {
    pub fn horizon(&self) -> f64 {
        match self {
            StepPlan::Fixed(mesh) => mesh.horizon(),
            StepPlan::Adaptive(c) => c.horizon(),
        }
    }
}

/// Everything carried from one step to the next.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub step: usize,
    pub phi: ScalarField,
    pub phi0: ScalarField,
    /// `r^{n-1/2}`
    pub r_half: ScalarField,
    /// `∇_τφᵏ` for `k = 1..n`.
    pub history: DifferenceHistory<ScalarField>,
    /// Nodes `t₀..tₙ` visited so far.
    pub mesh: TemporalMesh,
}

impl ModelState {
    pub fn time(&self) -> f64 {
        self.mesh.time(self.step)
    }
}

/// One trajectory of a relaxed L1⁺-CN scheme.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: ModelParams,
    relation: AuxRelation,
    solver: SolverConfig,
    plan: StepPlan,
    source: Option<Manufactured>,
    state: ModelState,
    /// Increments mapped into the dissipation metric (only differs for Cahn–Hilliard).
    metric_history: Option<DifferenceHistory<ScalarField>>,
    mass0: f64,
    records: Vec<DiagnosticsRecord>,
}

impl Simulation {
    pub fn new(
        params: ModelParams,
        phi0: ScalarField,
        plan: StepPlan,
        solver: SolverConfig,
    ) -> Result<Self, ModelError> {
        params.validate()?;
        solver.validate().map_err(ModelError::Params)?;
        let relation = params.relation();
        let (_, r_minus) = relation.init(&phi0);
        let energy = diagnostics::energy_original(&params, &phi0);
        let mass0 = phi0.integral();
        let initial = DiagnosticsRecord {
            step: 0,
            time: 0.0,
            tau: 0.0,
            energy,
            energy_modified: diagnostics::energy_modified(&params, &phi0, &r_minus),
            energy_variational: energy,
            mass: mass0,
            mass_drift: 0.0,
            aux_gap: 0.0,
            aux_gap_node: 0.0,
            iterations: 0,
            residual: 0.0,
        };
        let metric_history = (params.kind == ModelKind::CahnHilliard).then(DifferenceHistory::new);
        Ok(Self {
            params,
            relation,
            solver,
            plan,
            source: None,
            state: ModelState {
                step: 0,
                phi: phi0.clone(),
                phi0,
                r_half: r_minus,
                history: DifferenceHistory::new(),
                mesh: TemporalMesh::from_nodes(vec![0.0])?,
            },
            metric_history,
            mass0,
            records: vec![initial],
        })
    }

    /// Adds the manufactured source `f` to every step.
    pub fn with_source(mut self, source: Manufactured) -> Self {
        self.source = Some(source);
        self
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn state(&self) -> &ModelState {
        &self.state
    }

    pub fn phi(&self) -> &ScalarField {
        &self.state.phi
    }

    pub fn time(&self) -> f64 {
        self.state.time()
    }

    pub fn mesh(&self) -> &TemporalMesh {
        &self.state.mesh
    }

    pub fn records(&self) -> &[DiagnosticsRecord] {
        &self.records
    }

    pub fn finished(&self) -> bool {
        match &self.plan {
            StepPlan::Fixed(mesh) => self.state.step >= mesh.num_steps(),
            StepPlan::Adaptive(c) => c.finished(),
        }
    }

    fn next_node(&mut self) -> Option<f64> {
        let n = self.state.step;
        match &mut self.plan {
            StepPlan::Fixed(mesh) => (n < mesh.num_steps()).then(|| mesh.time(n + 1)),
            StepPlan::Adaptive(c) => {
                let grad = if n == 0 {
                    0.0
                } else {
                    self.state.history.get(n).norm_l2() / self.state.mesh.tau(n)
                };
                c.next_step(grad)?;
                c.nodes().last().copied()
            }
        }
    }

    /// Advances one step. Returns `None` once the horizon is reached.
    pub fn step(&mut self) -> Result<Option<&DiagnosticsRecord>, ModelError> {
        let Some(t_next) = self.next_node() else {
            return Ok(None);
        };
        let n = self.state.step;
        let t_n = self.state.time();
        let nu = self.params.kernel_order();
        let state = &mut self.state;

        let r_next = self.relation.advance(&state.r_half, &state.phi);
        state.mesh.push_node(t_next)?;
        let row = KernelRow::compute(&state.mesh, n + 1, nu)?;
        let op = StepOperator::from_aux(&self.params, row.leading(), &r_next);
        let zero = ScalarField::zeros(state.phi.grid());
        let lagged = row.lagged_sum(&state.history, &zero)?;
        let source = self.source.as_ref().map(|m| m.step_source(t_n, t_next));
        let rhs = op.rhs(&state.phi, &lagged, source.as_ref());
        let (phi_next, stats) = op
            .solve(&rhs, &state.phi, &self.solver)
            .map_err(|failure| ModelError::Solver { step: n + 1, failure })?;

        let increment = &phi_next - &state.phi;
        if let Some(metric) = &mut self.metric_history {
            metric.push(diagnostics::energy_metric(&self.params, &increment));
        }
        state.history.push(increment);

        let energy_modified = diagnostics::energy_modified(&self.params, &phi_next, &r_next);
        let metric = self.metric_history.as_ref().unwrap_or(&state.history);
        let energy_variational =
            diagnostics::energy_variational(&self.params, energy_modified, metric, &state.mesh, n + 1)?;
        let mass = phi_next.integral();
        let record = DiagnosticsRecord {
            step: n + 1,
            time: t_next,
            tau: t_next - t_n,
            energy: diagnostics::energy_original(&self.params, &phi_next),
            energy_modified,
            energy_variational,
            mass,
            mass_drift: (mass - self.mass0).abs(),
            aux_gap: diagnostics::aux_gap(&self.relation, &r_next, &state.phi, &phi_next),
            aux_gap_node: (&r_next - &self.relation.closure_field(&state.phi)).norm_l2(),
            iterations: stats.iterations,
            residual: stats.residual,
        };

        state.phi = phi_next;
        state.r_half = r_next;
        state.step = n + 1;
        self.records.push(record);
        Ok(self.records.last())
    }

    /// Steps to the horizon.
    pub fn run(&mut self) -> Result<(), ModelError> {
        while self.step()?.is_some() {}
        Ok(())
    }

    /// Steps until the current time is at least `t` (or the horizon is reached).
    pub fn run_until(&mut self, t: f64) -> Result<(), ModelError> {
        while self.time() < t {
            if self.step()?.is_none() {
                break;
            }
        }
        Ok(())
    }

    /// `r^{n-1/2}`, the auxiliary value used by the latest step.
    pub fn aux(&self) -> &ScalarField {
        &self.state.r_half
    }
}
