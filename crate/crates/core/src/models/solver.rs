//! Restarted, right-preconditioned GMRES with a damped fixed-point fallback.

use std::fmt;

use crate::spectral::ScalarField;

/// A linear operator on grid functions with an approximate inverse.
pub trait PreconditionedOperator {
    fn apply(&self, v: &ScalarField) -> ScalarField;
    fn precondition(&self, r: &ScalarField) -> ScalarField;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Target `‖b - Ax‖ / ‖b‖`.
    pub tolerance: f64,
    /// Budget of operator applications across all restart cycles and the fallback.
    pub max_iterations: usize,
    pub restart: usize,
    /// Damping `θ` of the fixed-point fallback.
    pub damping: f64,
    /// A restart cycle that reduces the residual by less than this fraction
    /// counts as stagnation.
    pub stagnation: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-12,
            max_iterations: 500,
            restart: 40,
            damping: 0.8,
            stagnation: 1e-3,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-6) {
            return Err(format!("solver tolerance must lie in (0, 1e-6], got {}", self.tolerance));
        }
        if self.max_iterations == 0 || self.restart == 0 {
            return Err("solver iteration limits must be positive".into());
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
    pub used_fallback: bool,
}

/// Both iterations failed; carries the relative residual after each cycle
/// or fallback sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveFailure {
    pub residuals: Vec<f64>,
}

impl fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "linear solve did not converge (relative residual {:e} after {} checkpoints)",
            self.residuals.last().copied().unwrap_or(f64::NAN),
            self.residuals.len()
        )
    }
}

impl std::error::Error for SolveFailure {}

fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else {
        let h = a.hypot(b);
        (a / h, b / h)
    }
}

/// Solves `A x = b` starting from `guess`.
pub fn solve<A: PreconditionedOperator>(
    op: &A,
    b: &ScalarField,
    guess: &ScalarField,
    cfg: &SolverConfig,
) -> Result<(ScalarField, SolveStats), SolveFailure> {
    let b_norm = b.norm_l2();
    if b_norm == 0.0 {
        return Ok((
            ScalarField::zeros(b.grid()),
            SolveStats {
                iterations: 0,
                residual: 0.0,
                used_fallback: false,
            },
        ));
    }
    let mut x = guess.clone();
    let mut iterations = 0;
    let mut history = Vec::new();

    loop {
        let r = b - &op.apply(&x);
        let beta = r.norm_l2();
        let rel = beta / b_norm;
        if rel <= cfg.tolerance {
            return Ok((
                x,
                SolveStats {
                    iterations,
                    residual: rel,
                    used_fallback: false,
                },
            ));
        }
        let stalled = history
            .last()
            .is_some_and(|&prev: &f64| rel > prev * (1.0 - cfg.stagnation));
        history.push(rel);
        if stalled || iterations >= cfg.max_iterations {
            break;
        }

        let m = cfg.restart.min(cfg.max_iterations - iterations);
        let mut basis = vec![r.scaled(1.0 / beta)];
        let mut h = vec![vec![0.0; m]; m + 1];
        let (mut cs, mut sn) = (vec![0.0; m], vec![0.0; m]);
        let mut g = vec![0.0; m + 1];
        g[0] = beta;
        let mut used = 0;
        for j in 0..m {
            let mut w = op.apply(&op.precondition(&basis[j]));
            for (i, v) in basis.iter().enumerate() {
                h[i][j] = w.inner(v);
                w.add_scaled(-h[i][j], v);
            }
            h[j + 1][j] = w.norm_l2();
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let (c, s) = givens(h[j][j], h[j + 1][j]);
            cs[j] = c;
            sn[j] = s;
            h[j][j] = c * h[j][j] + s * h[j + 1][j];
            let next_norm = h[j + 1][j];
            h[j + 1][j] = 0.0;
            g[j + 1] = -s * g[j];
            g[j] *= c;
            iterations += 1;
            used = j + 1;
            if g[j + 1].abs() <= cfg.tolerance * b_norm || next_norm == 0.0 {
                break;
            }
            basis.push(w.scaled(1.0 / next_norm));
        }
        let mut y = vec![0.0; used];
        for i in (0..used).rev() {
            let tail: f64 = (i + 1..used).map(|k| h[i][k] * y[k]).sum();
            y[i] = (g[i] - tail) / h[i][i];
        }
        let mut update = ScalarField::zeros(b.grid());
        for (yi, v) in y.iter().zip(&basis) {
            update.add_scaled(*yi, v);
        }
        x.add_scaled(1.0, &op.precondition(&update));
    }

    // Damped preconditioned Richardson: x ← x + θ P⁻¹(b - A x).
    let start = *history.last().unwrap();
    while iterations < cfg.max_iterations {
        let r = b - &op.apply(&x);
        let rel = r.norm_l2() / b_norm;
        history.push(rel);
        if rel <= cfg.tolerance {
            return Ok((
                x,
                SolveStats {
                    iterations,
                    residual: rel,
                    used_fallback: true,
                },
            ));
        }
        if !rel.is_finite() || rel > 1e6 * start.max(1.0) {
            break;
        }
        x.add_scaled(cfg.damping, &op.precondition(&r));
        iterations += 1;
    }
    Err(SolveFailure { residuals: history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    /// `(a + c(x) - Δ) u` with the constant-coefficient inverse as preconditioner.
    struct Helmholtz {
        a: f64,
        coeff: ScalarField,
        precond: bool,
    }

    impl PreconditionedOperator for Helmholtz {
        fn apply(&self, v: &ScalarField) -> ScalarField {
            let mut out = v.scaled(self.a);
            out.add_scaled(-1.0, &v.laplacian());
            &out + &self.coeff.mul_pointwise(v)
        }
        fn precondition(&self, r: &ScalarField) -> ScalarField {
            if !self.precond {
                return r.clone();
            }
            let symbol = r.grid().symbol(|k| k + self.coeff.mean());
            r.diagonal_solve(self.a, &symbol).unwrap()
        }
    }

    fn grid() -> Arc<PeriodicGrid> {
        PeriodicGrid::square(16, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn constant_coefficient_converges_in_one_iteration() {
        let g = grid();
        let op = Helmholtz { a: 2.0, coeff: ScalarField::constant(&g, 0.5), precond: true };
        let b = ScalarField::from_fn(&g, |x, y| x.sin() + (3.0 * y).cos());
        let (x, stats) = solve(&op, &b, &ScalarField::zeros(&g), &SolverConfig::default()).unwrap();
        assert!(stats.iterations <= 1, "{stats:?}");
        assert!((&op.apply(&x) - &b).norm_l2() <= 1e-12 * b.norm_l2());
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = grid();
        let op = Helmholtz { a: 2.0, coeff: ScalarField::constant(&g, 0.5), precond: true };
        let b = ScalarField::zeros(&g);
        let (x, stats) = solve(&op, &b, &ScalarField::constant(&g, 1.0), &SolverConfig::default()).unwrap();
        assert_eq!(x.norm_linf(), 0.0);
        assert_eq!(stats.iterations, 0);
    }

    #[test]
    fn variable_coefficient_reaches_tolerance() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let coeff = ScalarField::from_values(&g, (0..g.len()).map(|_| rng.gen_range(0.0..2.0)).collect()).unwrap();
        let b = ScalarField::from_values(&g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        for precond in [true, false] {
            let op = Helmholtz { a: 1.0, coeff: coeff.clone(), precond };
            let cfg = SolverConfig { restart: 10, ..SolverConfig::default() };
            let (x, stats) = solve(&op, &b, &ScalarField::zeros(&g), &cfg).unwrap();
            assert!((&op.apply(&x) - &b).norm_l2() <= 1.5e-12 * b.norm_l2(), "{stats:?}");
            assert!(!stats.used_fallback);
        }
    }

    #[test]
    fn stagnation_triggers_fallback() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let coeff = ScalarField::from_values(&g, (0..g.len()).map(|_| rng.gen_range(0.0..0.2)).collect()).unwrap();
        let b = ScalarField::from_values(&g, (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let op = Helmholtz { a: 1.0, coeff, precond: true };
        // a restart length of one with an absurd stagnation threshold forces the switch
        let cfg = SolverConfig { restart: 1, stagnation: 0.999_999, ..SolverConfig::default() };
        let (x, stats) = solve(&op, &b, &ScalarField::zeros(&g), &cfg).unwrap();
        assert!(stats.used_fallback);
        assert!((&op.apply(&x) - &b).norm_l2() <= 1e-12 * b.norm_l2());
    }

    #[test]
    fn failure_reports_history() {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let coeff = ScalarField::from_values(&g, (0..g.len()).map(|_| rng.gen_range(0.0..2.0)).collect()).unwrap();
        let op = Helmholtz { a: 1.0, coeff, precond: false };
        let b = ScalarField::from_fn(&g, |x, _| x.cos());
        let cfg = SolverConfig { max_iterations: 2, restart: 1, ..SolverConfig::default() };
        let err = solve(&op, &b, &ScalarField::zeros(&g), &cfg).unwrap_err();
        assert!(!err.residuals.is_empty());
        assert!(err.to_string().contains("did not converge"));
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig { tolerance: 1e-3, ..SolverConfig::default() }.validate().is_err());
        assert!(SolverConfig { max_iterations: 0, ..SolverConfig::default() }.validate().is_err());
    }
}
