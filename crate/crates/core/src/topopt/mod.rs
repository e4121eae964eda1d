//! Density-based topology optimization with adjoint gradients.

mod filter;
mod objective;
mod optimize;

pub use filter::{filter_and_project, project, project_derivative, ConicFilter, FilterChain};
pub use objective::{adjoint_gradient, evaluate_objective, ConditionResult, Evaluation, Gradient};
pub use optimize::{evaluate_final, optimize, optimize_with, HistoryRecord, OptimizationHistory, Schedule};

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::em::{EmError, PortSpec, SimulationGrid};
use crate::table;

/// Relative permittivity of the silica background.
pub const EPS_SILICA: f64 = 2.07;
/// Relative permittivity of silicon pixels.
pub const EPS_SILICON: f64 = 12.1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopoptError {
    #[error(transparent)]
    Em(#[from] EmError),
    #[error("objective diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("io: {0}")]
    Io(String),
}

/// Per-pixel material densities, pixel `(x, y)` stored at `x * py + y`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    px: usize,
    py: usize,
    pitch: f64,
    values: Vec<f64>,
}

impl DensityField {
    pub fn uniform(px: usize, py: usize, pitch: f64, value: f64) -> Self {
        Self { px, py, pitch, values: vec![value.clamp(0.0, 1.0); px * py] }
    }

    pub fn from_values(px: usize, py: usize, pitch: f64, values: Vec<f64>) -> Result<Self, TopoptError> {
        if values.len() != px * py {
            return Err(TopoptError::InvalidDensity(format!(
                "expected {} values, found {}",
                px * py,
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(TopoptError::InvalidDensity(format!("density {v} outside [0, 1]")));
        }
        if !(pitch > 0.0) {
            return Err(TopoptError::InvalidDensity(format!("pixel pitch {pitch} must be positive")));
        }
        Ok(Self { px, py, pitch, values })
    }

    pub fn px(&self) -> usize {
        self.px
    }

    pub fn py(&self) -> usize {
        self.py
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[x * self.py + y]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub(crate) fn with_values(&self, values: Vec<f64>) -> Self {
        Self { values, ..self.clone() }
    }

    /// Threshold every pixel at 0.5.
    pub fn binarized(&self) -> Self {
        self.with_values(self.values.iter().map(|&v| if v >= 0.5 { 1.0 } else { 0.0 }).collect())
    }

    /// Copy with every pixel outside `[0, 1]` clamped.
    pub fn clamped(&self) -> Self {
        self.with_values(self.values.iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    /// CSV with one row per y-line, top row = smallest y.
    pub fn write_csv<W: Write>(&self, w: W, header: &[String]) -> Result<(), TopoptError> {
        table::write_matrix(w, header, self.py, self.px, |row, col| self.get(col, row))
            .map_err(|e| TopoptError::Io(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R, pitch: f64) -> Result<Self, TopoptError> {
        let m = table::read_matrix(r).map_err(|e| TopoptError::Io(e.to_string()))?;
        let (py, px) = (m.rows, m.cols);
        let mut values = vec![0.0; px * py];
        for y in 0..py {
            for x in 0..px {
                values[x * py + y] = m.values[y * px + x];
            }
        }
        Self::from_values(px, py, pitch, values)
    }

    /// 8-bit grayscale PNG, silicon white, largest y on the top row.
    pub fn write_png<W: Write>(&self, w: W) -> Result<(), TopoptError> {
        let io = |e: png::EncodingError| TopoptError::Io(e.to_string());
        let mut enc = png::Encoder::new(w, self.px as u32, self.py as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut writer = enc.write_header().map_err(io)?;
        let mut data = Vec::with_capacity(self.px * self.py);
        for row in (0..self.py).rev() {
            for col in 0..self.px {
                data.push((self.get(col, row) * 255.0).round() as u8);
            }
        }
        writer.write_image_data(&data).map_err(io)?;
        writer.finish().map_err(io)
    }
}

/// Smoothing radius and projection parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    /// Conic kernel radius (m).
    pub radius: f64,
    pub beta: f64,
    pub eta: f64,
}

impl FilterSpec {
    pub const DEFAULT_RADIUS: f64 = 120e-9;

    pub fn new(radius: f64, beta: f64, eta: f64) -> Result<Self, TopoptError> {
        let spec = Self { radius, beta, eta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), TopoptError> {
        if !(self.radius >= 0.0) || !(self.beta >= 1.0) || !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(TopoptError::InvalidProblem(format!("invalid filter {self:?}")));
        }
        Ok(())
    }
}

impl Default for FilterSpec {
    fn default() -> Self {
        Self { radius: Self::DEFAULT_RADIUS, beta: 1.0, eta: 0.5 }
    }
}

/// Linear map from density to relative permittivity.
pub fn density_to_permittivity(rho_tilde: &[f64]) -> Vec<f64> {
    rho_tilde.iter().map(|r| EPS_SILICA + r * (EPS_SILICON - EPS_SILICA)).collect()
}

/// Placement of the pixel lattice inside the simulation grid: pixel `(x, y)`
/// covers cells `x0 + x*c .. x0 + (x+1)*c` by `y0 + y*c .. y0 + (y+1)*c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignRegion {
    pub x0: usize,
    pub y0: usize,
    pub px: usize,
    pub py: usize,
    pub cells_per_pixel: usize,
}

/// A monitored port with its goal power and penalty weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub label: String,
    pub monitor: PortSpec,
    pub goal: f64,
    pub weight: f64,
}

/// One excitation: sources at one wavelength and the targets they are judged by.
#[derive(Debug, Clone, PartialEq)]
pub struct ExcitationCondition {
    pub label: String,
    pub wavelength: f64,
    pub weight: f64,
    pub sources: Vec<PortSpec>,
    pub targets: Vec<Target>,
}

impl ExcitationCondition {
    pub fn injected_power(&self) -> f64 {
        self.sources.iter().map(|s| s.weight).sum()
    }
}

/// Geometry, design region and excitation conditions of one device.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub name: String,
    /// Background structure; cells of the design region are overwritten.
    pub grid: SimulationGrid,
    pub region: DesignRegion,
    pub pitch: f64,
    pub conditions: Vec<ExcitationCondition>,
    /// Smoothing and projection applied to raw densities; `None` uses them as is.
    pub filter: Option<FilterSpec>,
}

impl DesignProblem {
    pub fn validate(&self) -> Result<(), TopoptError> {
        let r = &self.region;
        if r.px == 0 || r.py == 0 || r.cells_per_pixel == 0 {
            return Err(TopoptError::InvalidProblem("empty design region".into()));
        }
        let (ix, iy) = (self.grid.interior_x(), self.grid.interior_y());
        let x1 = r.x0 + r.px * r.cells_per_pixel;
        let y1 = r.y0 + r.py * r.cells_per_pixel;
        if r.x0 < ix.start || x1 > ix.end || r.y0 < iy.start || y1 > iy.end {
            return Err(TopoptError::InvalidProblem("design region outside the grid interior".into()));
        }
        if let Some(f) = &self.filter {
            f.validate()?;
        }
        for c in &self.conditions {
            if !(c.weight >= 0.0) || c.targets.iter().any(|t| !(t.weight >= 0.0)) {
                return Err(TopoptError::InvalidProblem(format!("negative weight in {}", c.label)));
            }
            let injected = c.injected_power();
            if c.targets.iter().any(|t| t.goal < 0.0 || t.goal > injected + 1e-12) {
                return Err(TopoptError::InvalidProblem(format!("goal outside [0, injected] in {}", c.label)));
            }
        }
        Ok(())
    }

    pub fn check_density(&self, rho: &DensityField) -> Result<(), TopoptError> {
        if rho.px() != self.region.px || rho.py() != self.region.py {
            return Err(TopoptError::InvalidDensity(format!(
                "density is {}x{}, region is {}x{}",
                rho.px(),
                rho.py(),
                self.region.px,
                self.region.py
            )));
        }
        Ok(())
    }

    /// Background grid with the region filled from physical densities.
    pub fn grid_with(&self, rho_tilde: &[f64], wavelength: f64) -> Result<SimulationGrid, TopoptError> {
        let mut g = self.grid.with_wavelength(wavelength);
        let eps = density_to_permittivity(rho_tilde);
        let r = self.region;
        let c = r.cells_per_pixel;
        for x in 0..r.px {
            for y in 0..r.py {
                let e = eps[x * r.py + y];
                for i in r.x0 + x * c..r.x0 + (x + 1) * c {
                    for j in r.y0 + y * c..r.y0 + (y + 1) * c {
                        g.set_eps(i, j, e)?;
                    }
                }
            }
        }
        Ok(g)
    }

    /// Distinct wavelengths in first-appearance order, with their condition indices.
    pub fn wavelength_groups(&self) -> Vec<(f64, Vec<usize>)> {
        let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
        for (k, c) in self.conditions.iter().enumerate() {
            match groups.iter_mut().find(|(w, _)| w.to_bits() == c.wavelength.to_bits()) {
                Some((_, v)) => v.push(k),
                None => groups.push((c.wavelength, vec![k])),
            }
        }
        groups
    }

    /// Physical densities seen by the solver.
    pub fn physical_density(&self, rho: &DensityField) -> Vec<f64> {
        match self.filter {
            Some(spec) => FilterChain::new(spec, rho.px(), rho.py(), rho.pitch()).forward(rho.values()).1,
            None => rho.values().to_vec(),
        }
    }
}
