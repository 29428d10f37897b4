//! Initial data for the evolution experiments.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::models::mms;
use crate::spectral::{PeriodicGrid, ScalarField};

/// Which initial field an experiment starts from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialData {
    /// Independent uniform samples in `(-0.2, 0.2)` from a seeded generator.
    #[default]
    Random,
    /// The superposition of low modes used for the Swift–Hohenberg pattern run.
    Pattern,
    /// `¼ sin 2x cos 2y + 0.45`, the manufactured profile.
    Profile,
}

impl InitialData {
    pub const ALL: [InitialData; 3] = [InitialData::Random, InitialData::Pattern, InitialData::Profile];

    pub fn name(self) -> &'static str {
        match self {
            InitialData::Random => "random",
            InitialData::Pattern => "pattern",
            InitialData::Profile => "profile",
        }
    }

    pub fn build(self, grid: &Arc<PeriodicGrid>, seed: u64) -> ScalarField {
        match self {
            InitialData::Random => uniform_noise(grid, seed, 0.2),
            InitialData::Pattern => ScalarField::from_fn(grid, pattern),
            InitialData::Profile => ScalarField::from_fn(grid, mms::profile),
        }
    }
}

impl fmt::Display for InitialData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for InitialData {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        InitialData::ALL
            .into_iter()
            .find(|d| d.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| format!("unknown initial data '{s}' (expected random, pattern or profile)"))
    }
}

/// Uniform samples in `(-amplitude, amplitude)`, filled in storage order.
pub fn uniform_noise(grid: &Arc<PeriodicGrid>, seed: u64, amplitude: f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.len()).map(|_| rng.gen_range(-amplitude..amplitude)).collect();
    ScalarField::from_values(grid, values).expect("one sample per node")
}

/// Swift–Hohenberg starting pattern, written for the box `(0, 32)²`.
pub fn pattern(x: f64, y: f64) -> f64 {
    let l = 32.0;
    0.07 - 0.02 * ((x - 12.0) / l * 2.0 * PI).cos() * ((y - 1.0) / l * 2.0 * PI).sin()
        + 0.02 * ((x + 10.0) / l * PI).cos().powi(2) * ((y + 3.0) / l * PI).sin().powi(2)
        - 0.01 * (x / l * 4.0 * PI).sin().powi(2) * ((y - 6.0) / l * 4.0 * PI).sin().powi(2)
}
