//! Frequency-domain scalar Helmholtz solver.
//!
//! The unknown is the out-of-plane electric field under an `exp(-i w t)` time
//! convention. Open boundaries use stretched-coordinate PML on all four sides.

mod grid;
mod mode;
mod solver;

pub use grid::{PmlSpec, SimulationGrid, PML_TARGET_REFLECTION};
pub use mode::{solve_slab_mode, Cut, Direction, ModeProfile};
pub use solver::{solve_fields, FieldSolver};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EmError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("no guided mode with index {requested} ({found} guided)")]
    NoGuidedMode { requested: usize, found: usize },
    #[error("solver failure: {0}")]
    SolverFailure(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("port outside the non-absorbing interior: {0}")]
    OutsideInterior(String),
    #[error("invalid port: {0}")]
    InvalidPort(String),
    #[error("io: {0}")]
    Io(String),
}

/// Complex field on a grid, indexed like [`SimulationGrid::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    nx: usize,
    ny: usize,
    values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self { nx, ny, values: vec![Complex64::new(0.0, 0.0); nx * ny] }
    }

    pub(crate) fn from_values(nx: usize, ny: usize, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), nx * ny);
        Self { nx, ny, values }
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.ny + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.values[i * self.ny + j] = v;
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortRole {
    Source,
    Monitor,
}

/// How a source port drives the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Injection {
    /// Two-line total-field/scattered-field source launching the mode in its
    /// direction only, with unit modal amplitude per unit source amplitude.
    #[default]
    Directional,
    /// Current sheet equal to the profile on one line (radiates both ways).
    Line,
}

/// A modal port: source or monitor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortSpec {
    pub role: PortRole,
    pub mode: ModeProfile,
    /// Source phase (radians).
    pub phase: f64,
    /// Injected power for sources; ignored by monitors.
    pub weight: f64,
    #[serde(default)]
    pub injection: Injection,
}

impl PortSpec {
    pub fn source(mode: ModeProfile) -> Self {
        Self { role: PortRole::Source, mode, phase: 0.0, weight: 1.0, injection: Injection::Directional }
    }

    pub fn monitor(mode: ModeProfile) -> Self {
        Self { role: PortRole::Monitor, mode, phase: 0.0, weight: 1.0, injection: Injection::Directional }
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = phase;
        self
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_injection(mut self, injection: Injection) -> Self {
        self.injection = injection;
        self
    }

    /// Complex source amplitude `sqrt(weight) exp(i phase)`.
    pub fn amplitude(&self) -> Complex64 {
        Complex64::from_polar(self.weight.sqrt(), self.phase)
    }

    pub(crate) fn validate(&self) -> Result<(), EmError> {
        if !(self.weight >= 0.0) || !self.weight.is_finite() {
            return Err(EmError::InvalidPort(format!("weight {} must be finite and >= 0", self.weight)));
        }
        if self.mode.amplitude.len() != self.mode.cut.len {
            return Err(EmError::DimensionMismatch {
                expected: self.mode.cut.len,
                found: self.mode.amplitude.len(),
            });
        }
        Ok(())
    }
}

/// Modal coefficient `a = sum conj(m) E` on the monitor cut; `|a|^2` is the
/// power carried by the mode relative to a unit-amplitude source.
pub fn mode_overlap(field: &ComplexField, monitor: &PortSpec) -> Result<Complex64, EmError> {
    let cut = monitor.mode.cut;
    if cut.x >= field.nx || cut.y0 + cut.len > field.ny || monitor.mode.amplitude.len() != cut.len {
        return Err(EmError::DimensionMismatch { expected: field.ny, found: cut.y0 + cut.len });
    }
    Ok(cut
        .rows()
        .zip(&monitor.mode.amplitude)
        .map(|(j, m)| m.conj() * field.get(cut.x, j))
        .sum())
}
