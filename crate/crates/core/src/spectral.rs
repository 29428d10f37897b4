//! Periodic rectangular grids, grid functions and Fourier-diagonal operators.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::kernels::HistoryValue;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid counts must be even and at least 4, got {nx}x{ny}")]
    Counts { nx: usize, ny: usize },
    #[error("domain lengths must be positive and finite, got {lx} x {ly}")]
    Lengths { lx: f64, ly: f64 },
    #[error("expected {expected} values, got {got}")]
    Length { expected: usize, got: usize },
    #[error("operator symbol vanishes at mode ({mx}, {my})")]
    SingularMode { mx: i64, my: i64 },
}

/// A periodic `Lx × Ly` domain sampled on an `Nx × Ny` grid.
///
/// Values are stored row-major with index `iy * nx + ix` at the node
/// `(ix Lx/Nx, iy Ly/Ny)`. The grid owns its FFT plans, so it is shared
/// between fields through an [`Arc`].
pub struct PeriodicGrid {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
    k2: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .field("lx", &self.lx)
            .field("ly", &self.ly)
            .finish()
    }
}

/// Signed mode number of FFT index `i` on an `n`-point grid: `[-n/2, n/2)`.
fn mode_number(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

impl PeriodicGrid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Arc<Self>, SpectralError> {
        if nx < 4 || ny < 4 || !nx.is_multiple_of(2) || !ny.is_multiple_of(2) {
            return Err(SpectralError::Counts { nx, ny });
        }
        if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
            return Err(SpectralError::Lengths { lx, ly });
        }
        let mut planner = FftPlanner::new();
        let mut k2 = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            let ky = 2.0 * PI * mode_number(iy, ny) as f64 / ly;
            for ix in 0..nx {
                let kx = 2.0 * PI * mode_number(ix, nx) as f64 / lx;
                k2.push(kx * kx + ky * ky);
            }
        }
        Ok(Arc::new(Self {
            nx,
            ny,
            lx,
            ly,
            k2,
            fwd_x: planner.plan_fft_forward(nx),
            inv_x: planner.plan_fft_inverse(nx),
            fwd_y: planner.plan_fft_forward(ny),
            inv_y: planner.plan_fft_inverse(ny),
        }))
    }

    /// The square `[0, L]²` with `n × n` nodes.
    pub fn square(n: usize, l: f64) -> Result<Arc<Self>, SpectralError> {
        Self::new(n, n, l, l)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lx(&self) -> f64 {
        self.lx
    }

    pub fn ly(&self) -> f64 {
        self.ly
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }

    pub fn cell_area(&self) -> f64 {
        self.area() / self.len() as f64
    }

    /// Coordinates of node `(ix, iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        (
            ix as f64 * self.lx / self.nx as f64,
            iy as f64 * self.ly / self.ny as f64,
        )
    }

    /// `|k|²` per mode, in the same layout as field values.
    pub fn wavenumbers_sq(&self) -> &[f64] {
        &self.k2
    }

    /// Evaluates an isotropic symbol `f(|k|²)` on every mode.
    pub fn symbol(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.k2.iter().map(|&k| f(k)).collect()
    }

    pub fn same_shape(&self, other: &PeriodicGrid) -> bool {
        self.nx == other.nx && self.ny == other.ny && self.lx == other.lx && self.ly == other.ly
    }

    fn transpose(&self, src: &[Complex64], rows: usize, cols: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                out[c * rows + r] = src[r * cols + c];
            }
        }
        out
    }

    /// Unnormalized forward 2-D DFT.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fwd_x.process(&mut buf);
        let mut cols = self.transpose(&buf, self.ny, self.nx);
        self.fwd_y.process(&mut cols);
        self.transpose(&cols, self.nx, self.ny)
    }

    /// Inverse of [`forward`](Self::forward), keeping the real part.
    pub fn inverse(&self, spectrum: Vec<Complex64>) -> Vec<f64> {
        let mut cols = self.transpose(&spectrum, self.ny, self.nx);
        self.inv_y.process(&mut cols);
        let mut buf = self.transpose(&cols, self.nx, self.ny);
        self.inv_x.process(&mut buf);
        let scale = 1.0 / self.len() as f64;
        buf.iter().map(|c| c.re * scale).collect()
    }
}

/// Real grid function on a [`PeriodicGrid`].
#[derive(Clone)]
pub struct ScalarField {
    grid: Arc<PeriodicGrid>,
    values: Vec<f64>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ScalarField({}x{}, max |u| = {:e})",
            self.grid.nx,
            self.grid.ny,
            self.norm_linf()
        )
    }
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        self.grid.same_shape(&other.grid) && self.values == other.values
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<PeriodicGrid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: &Arc<PeriodicGrid>, c: f64) -> Self {
        Self {
            grid: Arc::clone(grid),
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: &Arc<PeriodicGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for iy in 0..grid.ny {
            for ix in 0..grid.nx {
                let (x, y) = grid.point(ix, iy);
                values.push(f(x, y));
            }
        }
        Self {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn from_values(grid: &Arc<PeriodicGrid>, values: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != grid.len() {
            return Err(SpectralError::Length {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid: Arc::clone(grid),
            values,
        })
    }

    pub fn grid(&self) -> &Arc<PeriodicGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// Pointwise product.
    pub fn mul_pointwise(&self, other: &Self) -> Self {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self += a * x`
    pub fn add_scaled(&mut self, a: f64, x: &Self) {
        for (u, &v) in self.values.iter_mut().zip(&x.values) {
            *u += a * v;
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        for u in &mut self.values {
            *u += c;
        }
    }

    /// Multiplies every Fourier mode by `symbol[mode]`.
    pub fn apply_symbol(&self, symbol: &[f64]) -> Self {
        let mut spec = self.grid.forward(&self.values);
        for (c, &s) in spec.iter_mut().zip(symbol) {
            *c *= s;
        }
        Self {
            grid: Arc::clone(&self.grid),
            values: self.grid.inverse(spec),
        }
    }

    pub fn laplacian(&self) -> Self {
        let symbol: Vec<f64> = self.grid.k2.iter().map(|&k| -k).collect();
        self.apply_symbol(&symbol)
    }

    /// `(1 + Δ)² u`
    pub fn one_plus_lap_sq(&self) -> Self {
        self.apply_symbol(&self.grid.symbol(|k| (1.0 - k) * (1.0 - k)))
    }

    /// Solves `(a + symbol) u = self` mode by mode.
    pub fn diagonal_solve(&self, a: f64, symbol: &[f64]) -> Result<Self, SpectralError> {
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let mut spec = self.grid.forward(&self.values);
        for (i, c) in spec.iter_mut().enumerate() {
            let d = a + symbol[i];
            if d == 0.0 || !d.is_finite() {
                return Err(SpectralError::SingularMode {
                    mx: mode_number(i % nx, nx),
                    my: mode_number(i / nx, ny),
                });
            }
            *c /= d;
        }
        Ok(Self {
            grid: Arc::clone(&self.grid),
            values: self.grid.inverse(spec),
        })
    }

    /// `∫ u` by the cell-weight (trapezoidal) rule.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_area()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Discrete L² inner product `Σ u v ΔA`.
    pub fn inner(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.cell_area()
    }

    pub fn norm_l2(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn norm_linf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫ |∇u|²`, evaluated spectrally as `-⟨Δu, u⟩`.
    pub fn gradient_energy(&self) -> f64 {
        -self.laplacian().inner(self)
    }

    /// Removes the spatial mean: `(I - Π) u`.
    pub fn mean_free(&self) -> Self {
        let m = self.mean();
        self.map(|v| v - m)
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: &ScalarField) -> ScalarField {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<&ScalarField> for f64 {
    type Output = ScalarField;
    fn mul(self, rhs: &ScalarField) -> ScalarField {
        rhs.scaled(self)
    }
}

impl HistoryValue for ScalarField {
    fn zero_like(&self) -> Self {
        ScalarField::zeros(&self.grid)
    }
    fn axpy(&mut self, a: f64, x: &Self) {
        self.add_scaled(a, x);
    }
    fn inner(&self, other: &Self) -> f64 {
        ScalarField::inner(self, other)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(n: usize) -> Arc<PeriodicGrid> {
        PeriodicGrid::square(n, 2.0 * PI).unwrap()
    }

    fn random_field(g: &Arc<PeriodicGrid>, rng: &mut ChaCha8Rng) -> ScalarField {
        let v = (0..g.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        ScalarField::from_values(g, v).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        (a - b).norm_linf()
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(PeriodicGrid::new(3, 4, 1.0, 1.0).is_err());
        assert!(PeriodicGrid::new(2, 4, 1.0, 1.0).is_err());
        assert!(PeriodicGrid::new(4, 4, 0.0, 1.0).is_err());
        assert!(PeriodicGrid::new(8, 6, 1.0, 2.0).is_ok());
    }

    #[test]
    fn laplacian_eigenfunctions() {
        let g = grid(16);
        let c = ScalarField::constant(&g, 3.0);
        assert!(c.laplacian().norm_linf() < 1e-13);
        let s = ScalarField::from_fn(&g, |x, _| x.sin());
        assert!(max_diff(&s.laplacian(), &s.scaled(-1.0)) < 1e-13);
        let m = ScalarField::from_fn(&g, |x, y| (2.0 * x).sin() * (2.0 * y).cos());
        assert!(max_diff(&m.laplacian(), &m.scaled(-8.0)) < 1e-13);
    }

    #[test]
    fn laplacian_on_rectangle() {
        let g = PeriodicGrid::new(16, 8, 4.0, 2.0).unwrap();
        let k = 2.0 * PI / 4.0;
        let u = ScalarField::from_fn(&g, |x, y| (k * x).cos() * (PI * y).sin());
        let want = u.scaled(-(k * k + PI * PI));
        assert!(max_diff(&u.laplacian(), &want) < 1e-12);
    }

    #[test]
    fn one_plus_lap_sq_cases() {
        let g = grid(16);
        // roundoff in the high modes is amplified by (1 - k²)²
        assert!(ScalarField::from_fn(&g, |x, _| x.sin()).one_plus_lap_sq().norm_linf() < 1e-11);
        let one = ScalarField::constant(&g, 1.0);
        assert!(max_diff(&one.one_plus_lap_sq(), &one) < 1e-13);
        let s2 = ScalarField::from_fn(&g, |x, _| (2.0 * x).sin());
        assert!(max_diff(&s2.one_plus_lap_sq(), &s2.scaled(9.0)) < 1e-12);
    }

    #[test]
    fn reductions() {
        let g = grid(32);
        assert!(ScalarField::from_fn(&g, |x, _| x.sin()).mean().abs() < 1e-15);
        let one = ScalarField::constant(&g, 1.0);
        assert!((one.inner(&one) - 4.0 * PI * PI).abs() < 1e-12);
        let prof = ScalarField::from_fn(&g, |x, y| 0.25 * (2.0 * x).sin() * (2.0 * y).cos() + 0.45);
        assert!((prof.norm_linf() - 0.7).abs() < 1e-15);
        let s = ScalarField::from_fn(&g, |x, _| x.sin());
        assert!((s.norm_l2() - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!((s.gradient_energy() - 2.0 * PI * PI).abs() < 1e-11);
    }

    #[test]
    fn diagonal_solve_cases() {
        let g = grid(16);
        let s = ScalarField::from_fn(&g, |x, _| x.sin());
        let minus_lap = g.symbol(|k| k);
        let u = s.diagonal_solve(1.0, &minus_lap).unwrap();
        assert!(max_diff(&u, &s.scaled(0.5)) < 1e-14);
        let zero = vec![0.0; g.len()];
        assert!(max_diff(&s.diagonal_solve(1.0, &zero).unwrap(), &s) < 1e-15);
        match s.diagonal_solve(0.0, &minus_lap) {
            Err(SpectralError::SingularMode { mx: 0, my: 0 }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn apply_then_solve_roundtrip() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rhs = random_field(&g, &mut rng);
        let (b0, m, eps) = (3.1, 0.7, 0.25);
        let symbol = g.symbol(|k| 0.5 * m * eps * eps * k);
        let u = rhs.diagonal_solve(b0, &symbol).unwrap();
        let back = &u.scaled(b0) + &u.apply_symbol(&symbol);
        assert!(max_diff(&back, &rhs) < 1e-13);
    }

    #[test]
    fn transform_roundtrip_and_structure() {
        let g = PeriodicGrid::new(16, 12, 3.0, 5.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let u = random_field(&g, &mut rng);
            let v = random_field(&g, &mut rng);
            let back = g.inverse(g.forward(u.values()));
            let err = u.values().iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-13 * u.norm_linf());
            let lu = u.laplacian();
            let asym = (lu.inner(&v) - u.inner(&v.laplacian())).abs();
            let scale = lu.norm_l2() * v.norm_l2() + u.norm_l2() * v.laplacian().norm_l2();
            assert!(asym < 1e-12 * scale);
            assert!(lu.integral().abs() < 1e-12 * lu.norm_l2());
        }
    }

    #[test]
    fn field_arithmetic() {
        let g = grid(8);
        let a = ScalarField::constant(&g, 2.0);
        let b = ScalarField::constant(&g, 5.0);
        assert_eq!((&a + &b).values()[3], 7.0);
        assert_eq!((&a - &b).values()[0], -3.0);
        assert_eq!((3.0 * &a).values()[1], 6.0);
        assert_eq!(a.mul_pointwise(&b).values()[2], 10.0);
        assert!(ScalarField::from_values(&g, vec![0.0; 5]).is_err());
    }
}
