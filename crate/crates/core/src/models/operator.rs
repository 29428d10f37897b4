//! The linear system solved for `φ^{n+1}` in one relaxed step.
//!
//! With `w = r^{n+1/2} + S` frozen, the step reads
//!
//! ```text
//! b₀ v + (M/2) 𝒢[ℒv + c·w·v] = b₀ φⁿ - Σ_{k<n+1} b_{n+1-k} ∇_τφᵏ
//!                              - (M/2) 𝒢[ℒφⁿ + c·w·φⁿ] - M 𝒢[ĉ(w)] + f
//! ```
//!
//! where `c` and `ĉ` come from the completed-square form of the potential.

use rustfft::num_complex::Complex64;

use super::solver::{self, PreconditionedOperator, SolveFailure, SolveStats, SolverConfig};
use super::ModelParams;
use crate::potentials::AuxRelation;
use crate::spectral::ScalarField;

#[derive(Debug, Clone)]
pub struct StepOperator {
    params: ModelParams,
    relation: AuxRelation,
    b0: f64,
    w: ScalarField,
    linear: Vec<f64>,
    mobility: Vec<f64>,
    preconditioner: Vec<f64>,
}

impl StepOperator {
    /// `w` is the frozen coefficient `r^{n+1/2} + S`.
    pub fn new(params: &ModelParams, b0: f64, w: ScalarField) -> Self {
        let grid = w.grid();
        let relation = params.relation();
        let linear = params.linear_symbol(grid);
        let mobility = params.mobility_symbol(grid);
        let c_bar = relation.linear_coupling() * w.mean();
        let half_m = 0.5 * params.mobility;
        let preconditioner = linear
            .iter()
            .zip(&mobility)
            .map(|(&l, &g)| {
                let s = b0 + half_m * g * (l + c_bar);
                if s.abs() < 1e-8 * b0 {
                    b0
                } else {
                    s
                }
            })
            .collect();
        Self {
            params: *params,
            relation,
            b0,
            w,
            linear,
            mobility,
            preconditioner,
        }
    }

    /// Builds `w = r + S` from the staggered auxiliary value.
    pub fn from_aux(params: &ModelParams, b0: f64, r_half: &ScalarField) -> Self {
        let s = params.stabilizer;
        Self::new(params, b0, r_half.map(|r| r + s))
    }

    pub fn leading(&self) -> f64 {
        self.b0
    }

    pub fn coefficient(&self) -> &ScalarField {
        &self.w
    }

    /// `𝒢[ℒv + c·w·v]`, evaluated with one inverse transform.
    pub fn spatial(&self, v: &ScalarField) -> ScalarField {
        let grid = v.grid();
        let c = self.relation.linear_coupling();
        let coupled = v.zip_map(&self.w, |a, b| c * a * b);
        let v_hat = grid.forward(v.values());
        let coupled_hat = grid.forward(coupled.values());
        let combined: Vec<Complex64> = v_hat
            .iter()
            .zip(&coupled_hat)
            .enumerate()
            .map(|(i, (a, b))| (a * self.linear[i] + b) * self.mobility[i])
            .collect();
        ScalarField::from_values(grid, grid.inverse(combined)).expect("grid-shaped spectrum")
    }

    /// `A v = b₀ v + (M/2) 𝒢[ℒv + c·w·v]`.
    pub fn apply(&self, v: &ScalarField) -> ScalarField {
        let mut out = self.spatial(v);
        let half_m = 0.5 * self.params.mobility;
        for (o, &x) in out.values_mut().iter_mut().zip(v.values()) {
            *o = self.b0 * x + half_m * *o;
        }
        out
    }

    /// Right-hand side for the step from `φⁿ`, given the lagged history sum
    /// and an optional source sample.
    pub fn rhs(&self, phi_n: &ScalarField, lagged: &ScalarField, source: Option<&ScalarField>) -> ScalarField {
        let m = self.params.mobility;
        let explicit = self.spatial(phi_n);
        let constant = self
            .params
            .apply_mobility(&self.w.map(|w| self.relation.constant_part(w)));
        let mut out = phi_n.scaled(self.b0);
        out.add_scaled(-1.0, lagged);
        out.add_scaled(-0.5 * m, &explicit);
        out.add_scaled(-m, &constant);
        if let Some(f) = source {
            out.add_scaled(1.0, f);
        }
        out
    }

    /// Symbol of the constant-coefficient surrogate (`w` replaced by its mean).
    pub fn preconditioner_symbol(&self) -> &[f64] {
        &self.preconditioner
    }

    /// Solves `A v = rhs` and, for mass-conserving models, pins the mean of
    /// `v` to `mean(rhs)/b₀`, which is exactly what the zero mode of the
    /// equation states.
    pub fn solve(
        &self,
        rhs: &ScalarField,
        guess: &ScalarField,
        cfg: &SolverConfig,
    ) -> Result<(ScalarField, SolveStats), SolveFailure> {
        let (mut v, mut stats) = solver::solve(self, rhs, guess, cfg)?;
        if self.params.conserves_mass() {
            let shift = rhs.mean() / self.b0 - v.mean();
            v.add_constant(shift);
            let b_norm = rhs.norm_l2();
            if b_norm > 0.0 {
                stats.residual = (rhs - &self.apply(&v)).norm_l2() / b_norm;
            }
        }
        Ok((v, stats))
    }
}

impl PreconditionedOperator for StepOperator {
    fn apply(&self, v: &ScalarField) -> ScalarField {
        StepOperator::apply(self, v)
    }

    fn precondition(&self, r: &ScalarField) -> ScalarField {
        r.diagonal_solve(0.0, &self.preconditioner)
            .expect("preconditioner symbol is guarded away from zero")
    }
}
