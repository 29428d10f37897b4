//! L1⁺ discrete convolution kernels on nonuniform meshes.
//!
//! For step `n` and order `ν` the row holds
//!
//! ```text
//! b_{n-k} = 1/(τ_n τ_k) ∫_{t_{n-1}}^{t_n} ∫_{t_{k-1}}^{min(t_k, t)} ω_ν(t - s) ds dt,   1 <= k <= n,
//! ```
//!
//! so that the interval-averaged Caputo derivative of order `1 - ν` is
//! `Σ_k b_{n-k} ∇_τ u^k`. The module also provides the modified kernels and
//! the two quadratic functionals of the discrete gradient structure.

use thiserror::Error;

use crate::mesh::TemporalMesh;
use crate::quadrature::{adaptive_gauss_kronrod, gauss_legendre_8, QuadratureFailure};
use crate::special::{gamma, omega};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("step index {n} outside 1..={max}")]
    StepOutOfRange { n: usize, max: usize },
    #[error("kernel index k = {k} outside 1..={n}")]
    IndexOutOfRange { k: usize, n: usize },
    #[error("kernel order {0} outside [0, 1]")]
    Order(f64),
    #[error("history holds {have} increments, need at least {need}")]
    HistoryLength { have: usize, need: usize },
    #[error("quadrature did not converge (estimate {}, error {})", .0.estimate, .0.error)]
    Quadrature(QuadratureFailure),
}

/// One row `b_0, ..., b_{n-1}` of L1⁺ weights; `b_{n-k}` multiplies `∇_τ u^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRow {
    order: f64,
    step: usize,
    weights: Vec<f64>,
}

impl KernelRow {
    pub fn compute(mesh: &TemporalMesh, n: usize, nu: f64) -> Result<Self, KernelError> {
        if n == 0 || n > mesh.num_steps() {
            return Err(KernelError::StepOutOfRange {
                n,
                max: mesh.num_steps(),
            });
        }
        if !(0.0..=1.0).contains(&nu) {
            return Err(KernelError::Order(nu));
        }
        let tau_n = mesh.tau(n);
        let mut weights = vec![0.0; n];
        if nu == 0.0 {
            weights[0] = 1.0 / tau_n;
            return Ok(Self {
                order: nu,
                step: n,
                weights,
            });
        }
        weights[0] = tau_n.powf(nu - 1.0) / gamma(nu + 2.0);
        for k in 1..n {
            let gap = mesh.time(n - 1) - mesh.time(k);
            let tau_k = mesh.tau(k);
            weights[n - k] = mixed_difference(nu, gap, tau_n, tau_k) / (tau_n * tau_k);
        }
        Ok(Self {
            order: nu,
            step: n,
            weights,
        })
    }

    /// Builds a row directly from weights (diagnostics and test hooks).
    pub fn from_weights(order: f64, weights: Vec<f64>) -> Self {
        Self {
            order,
            step: weights.len(),
            weights,
        }
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `b_0`, the weight of the current (implicit) increment.
    pub fn leading(&self) -> f64 {
        self.weights[0]
    }

    pub fn modified(&self) -> ModifiedKernelRow {
        let mut weights = self.weights.clone();
        weights[0] *= 2.0;
        ModifiedKernelRow { weights }
    }

    /// `Σ_{k=1}^{n-1} b_{n-k} u^k`: the history part, without `b_0 ∇_τ u^n`.
    pub fn lagged_sum<T: HistoryValue>(
        &self,
        history: &DifferenceHistory<T>,
        zero: &T,
    ) -> Result<T, KernelError> {
        let n = self.step;
        if history.len() + 1 < n {
            return Err(KernelError::HistoryLength {
                have: history.len(),
                need: n - 1,
            });
        }
        let mut acc = zero.zero_like();
        for k in 1..n {
            let w = self.weights[n - k];
            if w != 0.0 {
                acc.axpy(w, history.get(k));
            }
        }
        Ok(acc)
    }
}

/// `b̃_0 = 2 b_0`, `b̃_j = b_j` for `j >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModifiedKernelRow {
    weights: Vec<f64>,
}

impl ModifiedKernelRow {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_monotone(&self) -> bool {
        self.weights.windows(2).all(|w| w[0] >= w[1])
    }
}

/// `∫_0^{τ_n} ∫_0^{τ_k} ω_ν(gap + x + y) dy dx` for `gap >= 0`.
///
/// Equal to the second difference of `ω_{ν+2}`, which cancels badly when a
/// step is short compared with the gap; those directions are integrated
/// with Gauss–Legendre instead, where the integrand is analytic well beyond
/// the interval.
fn mixed_difference(nu: f64, gap: f64, tau_n: f64, tau_k: f64) -> f64 {
    let short_n = tau_n <= 0.5 * gap;
    let short_k = tau_k <= 0.5 * gap;
    let w1 = |t: f64| omega(nu + 1.0, t);
    match (short_n, short_k) {
        (false, false) => {
            let w2 = |t: f64| omega(nu + 2.0, t);
            let (short, long) = if tau_n <= tau_k { (tau_n, tau_k) } else { (tau_k, tau_n) };
            if short <= 0.5 * (gap + long) {
                // the outer difference in the long direction is smooth
                let smooth = gauss_legendre_8(|x| w1(gap + long + x), 0.0, short);
                smooth - (w2(gap + short) - w2(gap))
            } else {
                (w2(gap + tau_n + tau_k) - w2(gap + tau_k)) - (w2(gap + tau_n) - w2(gap))
            }
        }
        (false, true) => gauss_legendre_8(|y| w1(gap + y + tau_n) - w1(gap + y), 0.0, tau_k),
        (true, false) => gauss_legendre_8(|x| w1(gap + x + tau_k) - w1(gap + x), 0.0, tau_n),
        (true, true) => gauss_legendre_8(
            |x| gauss_legendre_8(|y| omega(nu, gap + x + y), 0.0, tau_k),
            0.0,
            tau_n,
        ),
    }
}

/// Reference weight `b_{n-k}` by adaptive double quadrature of the defining
/// integral. Independent of [`KernelRow::compute`]; slow.
pub fn kernel_oracle(mesh: &TemporalMesh, n: usize, k: usize, nu: f64) -> Result<f64, KernelError> {
    if n == 0 || n > mesh.num_steps() {
        return Err(KernelError::StepOutOfRange {
            n,
            max: mesh.num_steps(),
        });
    }
    if k == 0 || k > n {
        return Err(KernelError::IndexOutOfRange { k, n });
    }
    if !(nu > 0.0 && nu <= 1.0) {
        return Err(KernelError::Order(nu));
    }
    // Power substitutions v = w^q and t = t_{n-1} + τ_n u^q remove the
    // weak singularities of the integrand at s = t and at t = t_{n-1}.
    let q = (2.0 / nu).ceil();
    let gamma_nu = gamma(nu);
    let (t_lo, t_hi) = (mesh.time(k - 1), mesh.time(k));
    let (start, tau_n) = (mesh.time(n - 1), mesh.tau(n));

    let inner = |t: f64| -> Result<f64, QuadratureFailure> {
        let hi = t_hi.min(t);
        if hi <= t_lo {
            return Ok(0.0);
        }
        if t - hi >= hi - t_lo {
            // far from the singularity; substituting would cancel digits
            return adaptive_gauss_kronrod(|s| omega(nu, t - s), t_lo, hi, 0.0, 1e-14, 400);
        }
        let w_lo = (t - hi).max(0.0).powf(1.0 / q);
        let w_hi = (t - t_lo).powf(1.0 / q);
        let scale = (t - t_lo).powf(nu) / gamma_nu;
        adaptive_gauss_kronrod(
            |w| q * w.powf(q * nu - 1.0) / gamma_nu,
            w_lo,
            w_hi,
            1e-15 * scale,
            1e-14,
            400,
        )
    };

    let failure = std::cell::Cell::new(None);
    let outer = adaptive_gauss_kronrod(
        |u| {
            let t = start + tau_n * u.powf(q);
            match inner(t) {
                Ok(v) => v * tau_n * q * u.powf(q - 1.0),
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            }
        },
        0.0,
        1.0,
        0.0,
        1e-13,
        400,
    )
    .map_err(KernelError::Quadrature)?;
    if let Some(e) = failure.get() {
        return Err(KernelError::Quadrature(e));
    }
    Ok(outer / (tau_n * mesh.tau(k)))
}

/// Elements of a real inner-product space stored in a history.
pub trait HistoryValue: Clone {
    fn zero_like(&self) -> Self;
    /// `self += a * x`
    fn axpy(&mut self, a: f64, x: &Self);
    fn inner(&self, other: &Self) -> f64;
    fn norm_sq(&self) -> f64 {
        self.inner(self)
    }
}

impl HistoryValue for f64 {
    fn zero_like(&self) -> Self {
        0.0
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        *self += a * x;
    }
    fn inner(&self, other: &Self) -> f64 {
        self * other
    }
}

/// Append-only list of increments `u^1, ..., u^n` (1-based access).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DifferenceHistory<T> {
    increments: Vec<T>,
}

impl<T: HistoryValue> DifferenceHistory<T> {
    pub fn new() -> Self {
        Self {
            increments: Vec::new(),
        }
    }

    pub fn from_increments(increments: Vec<T>) -> Self {
        Self { increments }
    }

    pub fn push(&mut self, u: T) {
        self.increments.push(u);
    }

    pub fn len(&self) -> usize {
        self.increments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.increments.is_empty()
    }

    /// `u^k`, `1 <= k <= len`.
    pub fn get(&self, k: usize) -> &T {
        &self.increments[k - 1]
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.increments.iter()
    }

    /// `Σ_{j=from}^{to} u^j`, or `None` when the range is empty.
    pub fn partial_sum(&self, from: usize, to: usize) -> Option<T> {
        if from > to || from == 0 {
            return None;
        }
        let mut acc = self.get(from).clone();
        for j in from + 1..=to {
            acc.axpy(1.0, self.get(j));
        }
        Some(acc)
    }
}

fn check_len<T>(history: &DifferenceHistory<T>, need: usize) -> Result<(), KernelError> {
    if history.increments.len() < need {
        return Err(KernelError::HistoryLength {
            have: history.increments.len(),
            need,
        });
    }
    Ok(())
}

/// `𝒜_ν(u^n)` for the first `n` increments of `history`, from the modified row `n`.
pub fn functional_a_with<T: HistoryValue>(
    history: &DifferenceHistory<T>,
    n: usize,
    row: &ModifiedKernelRow,
) -> Result<f64, KernelError> {
    check_len(history, n)?;
    if n == 0 {
        return Ok(0.0);
    }
    let bt = row.weights();
    let mut suffix = history.get(n).clone();
    let mut acc = 0.0;
    for k in (1..n).rev() {
        acc += 0.5 * (bt[n - k - 1] - bt[n - k]) * suffix.norm_sq();
        suffix.axpy(1.0, history.get(k));
    }
    acc += 0.5 * bt[n - 1] * suffix.norm_sq();
    Ok(acc)
}

/// `𝒜_ν(u^n) = ½ Σ_{k=1}^{n-1} (b̃_{n-k-1} - b̃_{n-k}) ‖Σ_{j>k} u^j‖² + ½ b̃_{n-1} ‖Σ_j u^j‖²`.
pub fn functional_a<T: HistoryValue>(
    history: &DifferenceHistory<T>,
    mesh: &TemporalMesh,
    n: usize,
    nu: f64,
) -> Result<f64, KernelError> {
    if n == 0 {
        return Ok(0.0);
    }
    let row = KernelRow::compute(mesh, n, nu)?.modified();
    functional_a_with(history, n, &row)
}

/// The remainder functional `ℛ_ν(u^n)`, built from modified rows `n-1` and `n`.
pub fn functional_r<T: HistoryValue>(
    history: &DifferenceHistory<T>,
    mesh: &TemporalMesh,
    n: usize,
    nu: f64,
) -> Result<f64, KernelError> {
    if n < 2 {
        return Err(KernelError::StepOutOfRange {
            n,
            max: mesh.num_steps(),
        });
    }
    check_len(history, n - 1)?;
    let prev = KernelRow::compute(mesh, n - 1, nu)?.modified();
    let cur = KernelRow::compute(mesh, n, nu)?.modified();
    let (b1, b2) = (prev.weights(), cur.weights());
    let mut suffix = history.get(n - 1).clone();
    let mut acc = 0.0;
    for k in (1..=n - 2).rev() {
        let c = b1[n - 2 - k] - b1[n - 1 - k] - b2[n - 1 - k] + b2[n - k];
        acc += 0.5 * c * suffix.norm_sq();
        suffix.axpy(1.0, history.get(k));
    }
    acc += 0.5 * (b1[n - 2] - b2[n - 1]) * suffix.norm_sq();
    Ok(acc)
}

/// Residual of the discrete gradient structure at step `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgsResidual {
    /// `⟨Σ_k b_{n-k} u^k, u^n⟩`
    pub lhs: f64,
    pub a_current: f64,
    pub a_previous: f64,
    pub r: f64,
}

impl DgsResidual {
    pub fn absolute(&self) -> f64 {
        (self.lhs - (self.a_current - self.a_previous + self.r)).abs()
    }

    /// Residual over the magnitude of the largest term.
    pub fn relative(&self) -> f64 {
        let scale = self
            .lhs
            .abs()
            .max(self.a_current.abs())
            .max(self.a_previous.abs())
            .max(self.r.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.absolute() / scale
        }
    }
}

/// Evaluates both sides of `⟨Σ b u, u^n⟩ = 𝒜(u^n) - 𝒜(u^{n-1}) + ℛ(u^n)`.
pub fn dgs_residual<T: HistoryValue>(
    history: &DifferenceHistory<T>,
    mesh: &TemporalMesh,
    n: usize,
    nu: f64,
) -> Result<DgsResidual, KernelError> {
    if n < 2 {
        return Err(KernelError::StepOutOfRange {
            n,
            max: mesh.num_steps(),
        });
    }
    check_len(history, n)?;
    let row = KernelRow::compute(mesh, n, nu)?;
    let current = history.get(n);
    let mut conv = current.zero_like();
    for k in 1..=n {
        conv.axpy(row.weights()[n - k], history.get(k));
    }
    Ok(DgsResidual {
        lhs: conv.inner(current),
        a_current: functional_a_with(history, n, &row.modified())?,
        a_previous: functional_a(history, mesh, n - 1, nu)?,
        r: functional_r(history, mesh, n, nu)?,
    })
}
