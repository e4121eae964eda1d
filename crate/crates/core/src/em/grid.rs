use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;

use super::EmError;
use crate::table;

/// Theoretical normal-incidence reflection targeted by [`PmlSpec::for_wavelength`].
pub const PML_TARGET_REFLECTION: f64 = 1e-4;

/// Polynomial-graded stretched-coordinate absorbing layer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PmlSpec {
    /// Layer thickness per side, in cells.
    pub cells: usize,
    /// Grading exponent.
    pub order: f64,
    /// Peak imaginary stretch at the outer wall.
    pub sigma_max: f64,
}

impl PmlSpec {
    /// Default thickness in cells.
    pub const DEFAULT_CELLS: usize = 15;
    /// Minimum thickness accepted by [`SimulationGrid::new`].
    pub const MIN_CELLS: usize = 8;

    /// Order-3 grading with the peak stretch chosen so a plane wave in vacuum
    /// sees [`PML_TARGET_REFLECTION`] after a round trip through the layer.
    pub fn for_wavelength(cells: usize, dx: f64, lambda0: f64) -> Self {
        let order = 3.0;
        let depth = cells as f64 * dx;
        let k0 = 2.0 * PI / lambda0;
        let sigma_max = (order + 1.0) * (1.0 / PML_TARGET_REFLECTION).ln() / (2.0 * k0 * depth);
        Self { cells, order, sigma_max }
    }

    /// Stretch factor at fractional depth `d` in [0, 1] into the layer.
    pub fn stretch(&self, d: f64) -> Complex64 {
        if d <= 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(1.0, self.sigma_max * d.min(1.0).powf(self.order))
        }
    }
}

/// Rectangular 2D domain of square cells with a relative-permittivity map.
///
/// Cell `(i, j)` has its center at `((i + 0.5) dx, (j + 0.5) dx)`; `i` runs along
/// the propagation axis x and `j` along the transverse axis y.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationGrid {
    dx: f64,
    nx: usize,
    ny: usize,
    lambda0: f64,
    eps_r: Vec<f64>,
    pml: PmlSpec,
}

impl SimulationGrid {
    /// Uniform grid filled with `eps_background`.
    pub fn new(
        dx: f64,
        nx: usize,
        ny: usize,
        lambda0: f64,
        eps_background: f64,
        pml: PmlSpec,
    ) -> Result<Self, EmError> {
        Self::from_eps(dx, nx, ny, lambda0, vec![eps_background; nx * ny], pml)
    }

    /// Grid with an explicit permittivity map indexed `i * ny + j`.
    pub fn from_eps(
        dx: f64,
        nx: usize,
        ny: usize,
        lambda0: f64,
        eps_r: Vec<f64>,
        pml: PmlSpec,
    ) -> Result<Self, EmError> {
        if !(dx > 0.0 && dx.is_finite()) {
            return Err(EmError::InvalidGrid(format!("cell size must be positive, got {dx}")));
        }
        if !(lambda0 > 0.0 && lambda0.is_finite()) {
            return Err(EmError::InvalidGrid(format!("wavelength must be positive, got {lambda0}")));
        }
        if pml.cells < PmlSpec::MIN_CELLS {
            return Err(EmError::InvalidGrid(format!(
                "absorbing layer needs at least {} cells, got {}",
                PmlSpec::MIN_CELLS,
                pml.cells
            )));
        }
        let min = 3 + 2 * pml.cells;
        if nx < min || ny < min {
            return Err(EmError::InvalidGrid(format!(
                "grid {nx}x{ny} too small for {} absorbing cells per side",
                pml.cells
            )));
        }
        if eps_r.len() != nx * ny {
            return Err(EmError::DimensionMismatch { expected: nx * ny, found: eps_r.len() });
        }
        if let Some(bad) = eps_r.iter().find(|e| !(**e >= 1.0)) {
            return Err(EmError::InvalidGrid(format!("permittivity {bad} below 1")));
        }
        Ok(Self { dx, nx, ny, lambda0, eps_r, pml })
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn pml(&self) -> PmlSpec {
        self.pml
    }

    /// Free-space wavenumber.
    pub fn k0(&self) -> f64 {
        2.0 * PI / self.lambda0
    }

    /// Same structure at another wavelength.
    pub fn with_wavelength(&self, lambda0: f64) -> Self {
        Self { lambda0, ..self.clone() }
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn eps(&self, i: usize, j: usize) -> f64 {
        self.eps_r[self.index(i, j)]
    }

    pub fn eps_values(&self) -> &[f64] {
        &self.eps_r
    }

    /// Overwrite one cell. Values below 1 are rejected.
    pub fn set_eps(&mut self, i: usize, j: usize, eps: f64) -> Result<(), EmError> {
        if !(eps >= 1.0) {
            return Err(EmError::InvalidGrid(format!("permittivity {eps} below 1")));
        }
        let k = self.index(i, j);
        self.eps_r[k] = eps;
        Ok(())
    }

    /// Column `i` of the permittivity map restricted to rows `y0..y1`.
    pub fn eps_line(&self, i: usize, y0: usize, y1: usize) -> &[f64] {
        let base = self.index(i, 0);
        &self.eps_r[base + y0..base + y1]
    }

    /// Cell-column range outside the absorbing layers.
    pub fn interior_x(&self) -> std::ops::Range<usize> {
        self.pml.cells..self.nx - self.pml.cells
    }

    /// Cell-row range outside the absorbing layers.
    pub fn interior_y(&self) -> std::ops::Range<usize> {
        self.pml.cells..self.ny - self.pml.cells
    }

    /// Stretch factors at the `n` cell centers of an axis.
    pub(crate) fn stretch_centers(&self, n: usize) -> Vec<Complex64> {
        (0..n).map(|k| self.stretch_at(n, k as f64 + 0.5)).collect()
    }

    /// Stretch factors at the `n + 1` cell faces of an axis; face `k` sits at `k * dx`.
    pub(crate) fn stretch_faces(&self, n: usize) -> Vec<Complex64> {
        (0..=n).map(|k| self.stretch_at(n, k as f64)).collect()
    }

    fn stretch_at(&self, n: usize, pos: f64) -> Complex64 {
        let l = self.pml.cells as f64;
        let n = n as f64;
        let depth = if pos < l {
            (l - pos) / l
        } else if pos > n - l {
            (pos - (n - l)) / l
        } else {
            0.0
        };
        self.pml.stretch(depth)
    }

    /// Write the permittivity map as CSV, one row per y-line.
    pub fn write_eps_csv<W: Write>(&self, w: W, header: &[String]) -> Result<(), EmError> {
        table::write_matrix(w, header, self.ny, self.nx, |row, col| self.eps(col, row))
            .map_err(|e| EmError::Io(e.to_string()))
    }

    /// Read a permittivity map written by [`Self::write_eps_csv`] and attach the
    /// remaining grid parameters.
    pub fn read_eps_csv<R: Read>(
        r: R,
        dx: f64,
        lambda0: f64,
        pml: PmlSpec,
    ) -> Result<Self, EmError> {
        let m = table::read_matrix(r).map_err(|e| EmError::Io(e.to_string()))?;
        let (ny, nx) = (m.rows, m.cols);
        let mut eps = vec![0.0; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                eps[i * ny + j] = m.values[j * nx + i];
            }
        }
        Self::from_eps(dx, nx, ny, lambda0, eps, pml)
    }
}
