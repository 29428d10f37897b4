//! Quartic free-energy densities and their completed-square relaxation.
//!
//! Every potential here is written as
//!
//! ```text
//! F(φ) = κ (p₂φ² + p₁φ + p₀)² + l₁φ + l₀
//! ```
//!
//! and the auxiliary variable tracks the shifted bracket
//! `r = p₂φ² + p₁φ + p₀ - S`. Replacing the square by `(r + S)` gives a
//! chemical potential that is linear in `φ` once `r` is frozen.

use thiserror::Error;

use crate::spectral::ScalarField;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("leading quartic coefficient must be positive, got {0}")]
    LeadingCoefficient(f64),
}

/// `F(φ) = (a1/4)φ⁴ + (a2/3)φ³ + (a3/2)φ² + a4φ + a5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarticPotential {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
    pub a5: f64,
}

impl QuarticPotential {
    pub fn value(&self, phi: f64) -> f64 {
        (((0.25 * self.a1 * phi + self.a2 / 3.0) * phi + 0.5 * self.a3) * phi + self.a4) * phi + self.a5
    }

    pub fn derivative(&self, phi: f64) -> f64 {
        ((self.a1 * phi + self.a2) * phi + self.a3) * phi + self.a4
    }

    /// Rewrites the polynomial as `(q1φ² + q2φ + q3)² + q4φ + q5`.
    pub fn complete(&self) -> Result<CompletedSquare, PotentialError> {
        if !(self.a1 > 0.0) {
            return Err(PotentialError::LeadingCoefficient(self.a1));
        }
        let q1 = 0.5 * self.a1.sqrt();
        let q2 = self.a2 / (3.0 * self.a1.sqrt());
        let q3 = (0.5 * self.a3 - q2 * q2) / (2.0 * q1);
        Ok(CompletedSquare {
            q1,
            q2,
            q3,
            q4: self.a4 - 2.0 * q2 * q3,
            q5: self.a5 - q3 * q3,
        })
    }
}

/// `F(φ) = (q1φ² + q2φ + q3)² + q4φ + q5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompletedSquare {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
    pub q5: f64,
}

impl CompletedSquare {
    /// Multiplies the square out again.
    pub fn expand(&self) -> QuarticPotential {
        let CompletedSquare { q1, q2, q3, q4, q5 } = *self;
        QuarticPotential {
            a1: 4.0 * q1 * q1,
            a2: 3.0 * 2.0 * q1 * q2,
            a3: 2.0 * (q2 * q2 + 2.0 * q1 * q3),
            a4: 2.0 * q2 * q3 + q4,
            a5: q3 * q3 + q5,
        }
    }
}

/// Swift–Hohenberg constants for `¼φ⁴ - (g/3)φ³ + (δ/2)φ²
/// = (½φ² - (g/3)φ + c1)² + c2 φ + c3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShConstants {
    pub g: f64,
    pub delta: f64,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

impl ShConstants {
    pub fn new(g: f64, delta: f64) -> Self {
        let c1 = 0.5 * delta - g * g / 9.0;
        Self {
            g,
            delta,
            c1,
            c2: g * delta / 3.0 - 2.0 * g * g * g / 27.0,
            c3: -c1 * c1,
        }
    }

    /// Largest coefficient mismatch of the expansion identity.
    pub fn expansion_residual(&self) -> f64 {
        let square = CompletedSquare {
            q1: 0.5,
            q2: -self.g / 3.0,
            q3: self.c1,
            q4: self.c2,
            q5: self.c3,
        }
        .expand();
        [
            square.a1 - 1.0,
            square.a2 + self.g,
            square.a3 - self.delta,
            square.a4,
            square.a5,
        ]
        .iter()
        .fold(0.0, |m: f64, d| m.max(d.abs()))
    }
}

/// Completed-square form of a potential together with the stabilizer `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxRelation {
    /// κ
    pub scale: f64,
    /// `(p₂, p₁, p₀)`
    pub square: [f64; 3],
    /// `(l₁, l₀)`
    pub tail: [f64; 2],
    pub stabilizer: f64,
}

impl AuxRelation {
    /// `¼(φ² - 1)²` with `r = φ² - 1 - S`.
    pub fn allen_cahn(stabilizer: f64) -> Self {
        Self {
            scale: 0.25,
            square: [1.0, 0.0, -1.0],
            tail: [0.0, 0.0],
            stabilizer,
        }
    }

    /// `¼φ²(1 - φ)²` with `r = φ(1 - φ) - S`.
    pub fn cahn_hilliard(stabilizer: f64) -> Self {
        Self {
            scale: 0.25,
            square: [-1.0, 1.0, 0.0],
            tail: [0.0, 0.0],
            stabilizer,
        }
    }

    /// `¼φ⁴ - (g/3)φ³ + (δ/2)φ²` with `r = ½φ² - (g/3)φ + c1 - S`.
    pub fn swift_hohenberg(sh: &ShConstants, stabilizer: f64) -> Self {
        Self {
            scale: 1.0,
            square: [0.5, -sh.g / 3.0, sh.c1],
            tail: [sh.c2, sh.c3],
            stabilizer,
        }
    }

    pub fn from_completed(cs: &CompletedSquare, stabilizer: f64) -> Self {
        Self {
            scale: 1.0,
            square: [cs.q1, cs.q2, cs.q3],
            tail: [cs.q4, cs.q5],
            stabilizer,
        }
    }

    fn bracket(&self, phi: f64) -> f64 {
        let [p2, p1, p0] = self.square;
        (p2 * phi + p1) * phi + p0
    }

    /// `N(φ)`, the value `r` takes when the relaxation is exact.
    pub fn closure(&self, phi: f64) -> f64 {
        self.bracket(phi) - self.stabilizer
    }

    /// `F(φ)`
    pub fn density(&self, phi: f64) -> f64 {
        let b = self.bracket(phi);
        self.scale * b * b + self.tail[0] * phi + self.tail[1]
    }

    /// `F'(φ)`
    pub fn derivative(&self, phi: f64) -> f64 {
        let [p2, p1, _] = self.square;
        2.0 * self.scale * self.bracket(phi) * (2.0 * p2 * phi + p1) + self.tail[0]
    }

    /// Relaxed density `κ[2(r + S)N(φ) - r² + S²] + l₁φ + l₀`; equals `F(φ)` at `r = N(φ)`.
    pub fn modified_density(&self, phi: f64, r: f64) -> f64 {
        let s = self.stabilizer;
        self.scale * (2.0 * (r + s) * self.closure(phi) - r * r + s * s)
            + self.tail[0] * phi
            + self.tail[1]
    }

    /// Coefficient of `w φ` in the relaxed chemical potential, `w = r + S`.
    pub fn linear_coupling(&self) -> f64 {
        4.0 * self.scale * self.square[0]
    }

    /// The `φ`-independent part `2κp₁w + l₁` of the relaxed chemical potential.
    pub fn constant_part(&self, w: f64) -> f64 {
        2.0 * self.scale * self.square[1] * w + self.tail[0]
    }

    pub fn closure_field(&self, phi: &ScalarField) -> ScalarField {
        phi.map(|p| self.closure(p))
    }

    /// `r^{1/2} = r^{-1/2} = N(φ⁰)`.
    pub fn init(&self, phi0: &ScalarField) -> (ScalarField, ScalarField) {
        let r = self.closure_field(phi0);
        (r.clone(), r)
    }

    /// `r^{n+1/2} = 2N(φⁿ) - r^{n-1/2}`.
    pub fn advance(&self, r_prev_half: &ScalarField, phi_n: &ScalarField) -> ScalarField {
        phi_n.zip_map(r_prev_half, |p, r| 2.0 * self.closure(p) - r)
    }
}
