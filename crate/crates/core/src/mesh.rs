//! Nonuniform temporal meshes, the step-ratio bound and the adaptive step controller.

use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("horizon must be positive and finite, got {0}")]
    Horizon(f64),
    #[error("number of steps must be at least 1")]
    NoSteps,
    #[error("grading exponent must be >= 1, got {0}")]
    Grading(f64),
    #[error("nodes must start at 0 and increase strictly (violated at index {0})")]
    Nodes(usize),
    #[error("invalid adaptive parameters: {0}")]
    Adaptive(String),
}

/// Time nodes `0 = t_0 < t_1 < ... < t_N = T`.
///
/// Steps are 1-based (`tau(k) = t_k - t_{k-1}`), matching the kernel indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMesh {
    nodes: Vec<f64>,
}

impl TemporalMesh {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self, MeshError> {
        if nodes.is_empty() || nodes[0] != 0.0 {
            return Err(MeshError::Nodes(0));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(MeshError::Nodes(i + 1));
            }
        }
        Ok(Self { nodes })
    }

    /// Appends the node `t_{N+1}`.
    pub fn push_node(&mut self, t: f64) -> Result<(), MeshError> {
        let last = *self.nodes.last().unwrap_or(&0.0);
        if !(t > last) || !t.is_finite() {
            return Err(MeshError::Nodes(self.nodes.len()));
        }
        self.nodes.push(t);
        Ok(())
    }

    /// `t_n = n T / N`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self, MeshError> {
        check_horizon(horizon, steps)?;
        let nodes = (0..=steps)
            .map(|n| {
                if n == steps {
                    horizon
                } else {
                    n as f64 * horizon / steps as f64
                }
            })
            .collect();
        Ok(Self { nodes })
    }

    /// `t_n = (n/N)^γ T`, concentrating nodes near the initial layer.
    pub fn graded(horizon: f64, steps: usize, grading: f64) -> Result<Self, MeshError> {
        check_horizon(horizon, steps)?;
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(MeshError::Grading(grading));
        }
        if grading == 1.0 {
            return Self::uniform(horizon, steps);
        }
        let nodes = (0..=steps)
            .map(|n| match n {
                0 => 0.0,
                n if n == steps => horizon,
                n => horizon * (n as f64 / steps as f64).powf(grading),
            })
            .collect();
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn num_steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("mesh has at least one node")
    }

    pub fn time(&self, n: usize) -> f64 {
        self.nodes[n]
    }

    /// `τ_k` for `1 <= k <= N`.
    pub fn tau(&self, k: usize) -> f64 {
        self.nodes[k] - self.nodes[k - 1]
    }

    /// `ρ_k = τ_k / τ_{k-1}` for `2 <= k <= N`.
    pub fn ratio(&self, k: usize) -> Option<f64> {
        (k >= 2 && k <= self.num_steps()).then(|| self.tau(k) / self.tau(k - 1))
    }

    pub fn steps(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Checks `ρ_{k+1} >= H_ν(ρ_k)` for every `k >= 2`.
    pub fn check(&self, nu: f64) -> AdmissibilityReport {
        let mut entries = Vec::new();
        for k in 2..self.num_steps() {
            let rho = self.tau(k) / self.tau(k - 1);
            let next = self.tau(k + 1) / self.tau(k);
            let bound = ratio_bound(nu, rho);
            entries.push(RatioCheck {
                k,
                rho,
                next_rho: next,
                bound,
                ok: next >= bound,
            });
        }
        AdmissibilityReport { order: nu, entries }
    }

    /// CSV with header `k,t,tau,rho` (`rho` empty for `k <= 1`).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,t,tau,rho\n");
        for (k, t) in self.nodes.iter().enumerate() {
            let tau = if k == 0 {
                String::new()
            } else {
                format!("{:e}", self.tau(k))
            };
            let rho = self.ratio(k).map(|r| format!("{r:e}")).unwrap_or_default();
            let _ = writeln!(out, "{k},{t:e},{tau},{rho}");
        }
        out
    }
}

fn check_horizon(horizon: f64, steps: usize) -> Result<(), MeshError> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(MeshError::Horizon(horizon));
    }
    if steps == 0 {
        return Err(MeshError::NoSteps);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCheck {
    pub k: usize,
    pub rho: f64,
    pub next_rho: f64,
    pub bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibilityReport {
    pub order: f64,
    pub entries: Vec<RatioCheck>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(|e| e.ok)
    }

    pub fn violations(&self) -> impl Iterator<Item = &RatioCheck> {
        self.entries.iter().filter(|e| !e.ok)
    }
}

// h(s) = (1+s)^{1+ν} - s^{1+ν} - 1, written with expm1 so small ν keeps its digits.
fn ratio_h(nu: f64, s: f64) -> f64 {
    (1.0 + s) * (nu * s.ln_1p()).exp_m1() - s * (nu * s.ln()).exp_m1()
}

/// Lower bound `H_ν(ρ)` on the next step ratio.
///
/// `ν = 0` is the integer-order case and imposes no constraint.
pub fn ratio_bound(nu: f64, rho: f64) -> f64 {
    debug_assert!((0.0..1.0).contains(&nu) && rho > 0.0);
    if nu == 0.0 {
        return 0.0;
    }
    let numerator = 2.0 * ratio_h(nu, rho) - ratio_h(nu, 2.0 * rho);
    let denominator = rho.powf(nu) * (4.0 - 2f64.powf(1.0 + nu));
    let base = numerator / denominator;
    if !(base > 0.0) {
        return 0.0;
    }
    (base.ln() / nu).exp()
}

/// Parameters of the feed-forward adaptive controller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    pub lambda: f64,
    pub tau_min: f64,
    pub tau_max: f64,
    pub kernel_order: f64,
}

impl AdaptiveParams {
    pub fn validate(&self) -> Result<(), MeshError> {
        if !(self.tau_min > 0.0 && self.tau_min <= self.tau_max && self.tau_max.is_finite()) {
            return Err(MeshError::Adaptive(format!(
                "need 0 < tau_min <= tau_max, got {} and {}",
                self.tau_min, self.tau_max
            )));
        }
        if !(self.lambda >= 0.0) {
            return Err(MeshError::Adaptive(format!("lambda must be >= 0, got {}", self.lambda)));
        }
        if !(0.0..1.0).contains(&self.kernel_order) {
            return Err(MeshError::Adaptive(format!(
                "kernel order must lie in [0, 1), got {}",
                self.kernel_order
            )));
        }
        Ok(())
    }

    /// `max{τ_min, τ_max / sqrt(1 + λ‖∂_τφ‖²)}`.
    pub fn gradient_step(&self, grad_norm: f64) -> f64 {
        let proposal = self.tau_max / (1.0 + self.lambda * grad_norm * grad_norm).sqrt();
        proposal.max(self.tau_min)
    }
}

/// Next step from the gradient-sensitive proposal and the ratio bound,
/// clamped to `τ_max`. Horizon truncation is left to [`AdaptiveController`].
pub fn adaptive_next_step(tau_n: f64, rho_n: f64, grad_norm: f64, p: &AdaptiveParams) -> f64 {
    let floor = ratio_bound(p.kernel_order, rho_n) * tau_n;
    p.gradient_step(grad_norm).max(floor).min(p.tau_max)
}

/// Builds an adaptive mesh one node at a time.
#[derive(Debug, Clone)]
pub struct AdaptiveController {
    params: AdaptiveParams,
    horizon: f64,
    nodes: Vec<f64>,
}

impl AdaptiveController {
    pub fn new(params: AdaptiveParams, horizon: f64) -> Result<Self, MeshError> {
        params.validate()?;
        if !(horizon >= 0.0) || !horizon.is_finite() {
            return Err(MeshError::Horizon(horizon));
        }
        Ok(Self {
            params,
            horizon,
            nodes: vec![0.0],
        })
    }

    pub fn params(&self) -> &AdaptiveParams {
        &self.params
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn finished(&self) -> bool {
        *self.nodes.last().unwrap() >= self.horizon
    }

    /// Proposes and commits the next step. `grad_norm` is `‖∂_τφ^n‖` for the
    /// latest step (ignored for the first one). Returns `None` at the horizon.
    pub fn next_step(&mut self, grad_norm: f64) -> Option<f64> {
        if self.finished() {
            return None;
        }
        let n = self.nodes.len() - 1;
        let t_n = self.nodes[n];
        let remaining = self.horizon - t_n;
        let p = &self.params;

        let (proposal, previous) = match n {
            0 => (p.tau_min, None),
            1 => (p.gradient_step(grad_norm).min(p.tau_max), Some((self.nodes[1], None))),
            _ => {
                let tau_n = t_n - self.nodes[n - 1];
                let rho_n = tau_n / (self.nodes[n - 1] - self.nodes[n - 2]);
                (adaptive_next_step(tau_n, rho_n, grad_norm, p), Some((tau_n, Some(rho_n))))
            }
        };

        let tau = if proposal >= remaining {
            remaining
        } else if remaining - proposal < proposal {
            // A short tail would break the ratio bound on the final step:
            // split the remainder in two equal steps, or take it at once if
            // half of it is already below the bound.
            let half = 0.5 * remaining;
            let floor = match previous {
                Some((tau_n, Some(rho_n))) => ratio_bound(p.kernel_order, rho_n) * tau_n,
                _ => 0.0,
            };
            if half >= floor {
                half
            } else {
                remaining
            }
        } else {
            proposal
        };

        let mut next = if tau == remaining { self.horizon } else { t_n + tau };
        if let Some((tau_n, Some(rho_n))) = previous {
            // Rounding in t_n + τ can leave the committed ratio an ulp below
            // the bound; move the node up until the recomputed ratio passes.
            let bound = ratio_bound(p.kernel_order, rho_n);
            while next < self.horizon && (next - t_n) / tau_n < bound {
                next = next.next_up();
            }
        }
        self.nodes.push(next);
        Some(next - t_n)
    }

    pub fn to_mesh(&self) -> Result<TemporalMesh, MeshError> {
        TemporalMesh::from_nodes(self.nodes.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uniform_nodes() {
        let m = TemporalMesh::uniform(1.0, 4).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = TemporalMesh::uniform(1.0, 1).unwrap();
        assert_eq!(m.nodes(), &[0.0, 1.0]);
        let m = TemporalMesh::uniform(500.0, 1000).unwrap();
        for k in 1..=1000 {
            assert!((m.tau(k) - 0.5).abs() < 1e-12);
        }
        for k in 2..=1000 {
            assert!((m.ratio(k).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_rejects_bad_input() {
        assert_eq!(TemporalMesh::uniform(0.0, 3), Err(MeshError::Horizon(0.0)));
        assert_eq!(TemporalMesh::uniform(-1.0, 3), Err(MeshError::Horizon(-1.0)));
        assert_eq!(TemporalMesh::uniform(1.0, 0), Err(MeshError::NoSteps));
    }

    #[test]
    fn graded_nodes_and_ratios() {
        let m = TemporalMesh::graded(1.0, 4, 2.0).unwrap();
        let want = [0.0, 1.0 / 16.0, 4.0 / 16.0, 9.0 / 16.0, 1.0];
        for (a, b) in m.nodes().iter().zip(want) {
            assert!((a - b).abs() <= 1e-16);
        }
        let ratios: Vec<f64> = (2..=4).map(|k| m.ratio(k).unwrap()).collect();
        for (a, b) in ratios.iter().zip([3.0, 5.0 / 3.0, 7.0 / 5.0]) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(
            TemporalMesh::graded(1.0, 8, 1.0).unwrap(),
            TemporalMesh::uniform(1.0, 8).unwrap()
        );
        assert_eq!(TemporalMesh::graded(1.0, 8, 0.5), Err(MeshError::Grading(0.5)));
    }

    #[test]
    fn from_nodes_validation() {
        assert!(TemporalMesh::from_nodes(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TemporalMesh::from_nodes(vec![0.1, 0.5]).is_err());
        assert!(TemporalMesh::from_nodes(vec![0.0, 0.5, 2.0]).is_ok());
    }

    #[test]
    fn ratio_bound_values() {
        // reference values from direct double-precision evaluation of the
        // unsimplified formula, cross-checked at 30 digits
        assert!((ratio_bound(0.5, 1.0) - 0.060_903_821_838_310_93).abs() < 1e-13);
        assert!((ratio_bound(0.3, 1.0) - 1.434_094_152_165_928e-3).abs() < 1e-14);
        assert_eq!(ratio_bound(0.0, 2.0), 0.0);
    }

    #[test]
    fn check_mesh_cases() {
        let m = TemporalMesh::uniform(1.0, 10).unwrap();
        assert!(m.check(0.5).passed());
        let m = TemporalMesh::from_nodes(vec![0.0, 1.0, 2.0, 2.0001]).unwrap();
        assert!(m.check(0.0).passed());
        assert!(!m.check(0.5).passed());
        assert_eq!(m.check(0.5).violations().count(), 1);
    }

    #[test]
    fn graded_mesh_golden_admissibility() {
        // γ = 3.33, N = 16, ν = 0.4: every k in 2..=15 passes; the tightest
        // bound is at k = 2 (ρ_2 ≈ 9.056, H ≈ 0.11796 against ρ_3 ≈ 3.174).
        let m = TemporalMesh::graded(1.0, 16, 3.33).unwrap();
        let report = m.check(0.4);
        assert_eq!(report.entries.len(), 14);
        assert!(report.passed());
        let first = report.entries[0];
        assert_eq!(first.k, 2);
        assert!((first.rho - 9.056_106_996_174_627).abs() < 1e-9);
        assert!((first.bound - 0.117_960_869_246_153_5).abs() < 1e-9);
        assert!((first.next_rho - 3.173_801_902_402_142).abs() < 1e-9);
    }

    #[test]
    fn adaptive_step_examples() {
        let p = AdaptiveParams {
            lambda: 100.0,
            tau_min: 1e-3,
            tau_max: 0.5,
            kernel_order: 0.6,
        };
        assert_eq!(adaptive_next_step(0.1, 1.0, 0.0, &p), 0.5);
        assert!((adaptive_next_step(1e-3, 1.0, 1e9, &p) - 1e-3).abs() < 1e-15);

        let got = adaptive_next_step(0.1, 1.0, 3.0, &p);
        let gradient_branch = 0.5 / 901f64.sqrt();
        let ratio_branch = ratio_bound(0.6, 1.0) * 0.1;
        assert!((gradient_branch - 0.016_666).abs() < 1e-5);
        assert_eq!(got, gradient_branch.max(ratio_branch));
    }

    #[test]
    fn controller_lands_on_horizon() {
        let p = AdaptiveParams {
            lambda: 10.0,
            tau_min: 0.01,
            tau_max: 0.3,
            kernel_order: 0.5,
        };
        let mut c = AdaptiveController::new(p, 2.0).unwrap();
        assert_eq!(c.next_step(5.0), Some(0.01));
        while c.next_step(0.5).is_some() {}
        let m = c.to_mesh().unwrap();
        assert_eq!(m.horizon(), 2.0);
        assert!(m.check(0.5).passed());
        assert!(m.steps().iter().all(|&t| t <= 0.3 + 1e-15));
    }

    proptest! {
        #[test]
        fn ratio_bound_finite_nonnegative(nu in 0.0f64..0.999, rho in 1e-3f64..1e3) {
            let h = ratio_bound(nu, rho);
            prop_assert!(h.is_finite() && h >= 0.0);
        }

        #[test]
        fn adaptive_step_bounded_and_monotone(
            tau in 1e-4f64..1.0, rho in 0.01f64..100.0,
            g1 in 0.0f64..100.0, dg in 0.0f64..100.0,
            lambda in 0.0f64..1e4, nu in 0.0f64..0.99,
        ) {
            let p = AdaptiveParams { lambda, tau_min: 1e-3, tau_max: 0.5, kernel_order: nu };
            let a = adaptive_next_step(tau.min(0.5), rho, g1, &p);
            let b = adaptive_next_step(tau.min(0.5), rho, g1 + dg, &p);
            prop_assert!(a >= p.tau_min * (1.0 - 1e-12) && a <= p.tau_max);
            prop_assert!(b <= a);
        }

        #[test]
        fn controller_meshes_are_admissible(
            grads in proptest::collection::vec(0.0f64..50.0, 1..200),
            nu in 0.0f64..0.99, horizon in 0.5f64..20.0,
        ) {
            let p = AdaptiveParams { lambda: 100.0, tau_min: 1e-3, tau_max: 0.5, kernel_order: nu };
            let mut c = AdaptiveController::new(p, horizon).unwrap();
            let mut i = 0;
            while c.next_step(grads[i % grads.len()]).is_some() { i += 1; }
            let m = c.to_mesh().unwrap();
            prop_assert_eq!(m.horizon(), horizon);
            prop_assert!(m.check(nu).passed());
        }
    }
}
