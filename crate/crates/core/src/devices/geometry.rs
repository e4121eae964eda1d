use serde::{Deserialize, Serialize};

use super::DeviceError;
use crate::em::{Cut, Direction, ModeProfile, PmlSpec, SimulationGrid};
use crate::topopt::{DesignRegion, EPS_SILICA, EPS_SILICON};

/// Square design region between two straight rails entering from the left and
/// leaving to the right. All lengths in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    /// Side of the square design region.
    pub region_size: f64,
    pub wg_width: f64,
    /// Center-to-center rail separation.
    pub rail_spacing: f64,
    /// Straight lead length on each side of the region.
    pub lead_length: f64,
    /// Cladding above and below the region, inside the absorbing layers.
    pub margin: f64,
    pub pixel_pitch: f64,
    pub dx: f64,
    pub pml_cells: usize,
    /// Silicon film thickness; metadata only, the simulation is 2D.
    pub film_thickness: f64,
}

/// Which of the two rails a port sits on. `Top` is the larger y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rail {
    Top,
    Bottom,
}

/// Left (input) or right (output) side of the region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Input,
    Output,
}

impl DeviceGeometry {
    /// 10 x 10 um region, 9 um rail spacing, 20 nm pixels and cells.
    pub fn full() -> Self {
        Self {
            region_size: 10e-6,
            wg_width: 500e-9,
            rail_spacing: 9e-6,
            lead_length: 1.5e-6,
            margin: 1e-6,
            pixel_pitch: 20e-9,
            dx: 20e-9,
            pml_cells: PmlSpec::DEFAULT_CELLS,
            film_thickness: 220e-9,
        }
    }

    /// 4 x 4 um region, 2 um rail spacing, 40 nm pixels and cells.
    pub fn desk() -> Self {
        Self {
            region_size: 4e-6,
            rail_spacing: 2e-6,
            pixel_pitch: 40e-9,
            dx: 40e-9,
            ..Self::full()
        }
    }

    /// Whole cells covering `len`, rounded up.
    fn cells(&self, len: f64) -> usize {
        (len / self.dx - 1e-6).ceil().max(0.0) as usize
    }

    pub fn validate(&self) -> Result<(), DeviceError> {
        let positive = [self.region_size, self.wg_width, self.rail_spacing, self.lead_length, self.pixel_pitch, self.dx];
        if positive.iter().any(|v| !(*v > 0.0)) || self.margin < 0.0 {
            return Err(DeviceError::InvalidGeometry("lengths must be positive".into()));
        }
        if self.rail_spacing + self.wg_width > self.region_size + 2.0 * self.margin {
            return Err(DeviceError::InvalidGeometry(format!(
                "rails {} m apart do not fit a {} m region with {} m margins",
                self.rail_spacing, self.region_size, self.margin
            )));
        }
        let per_pixel = self.pixel_pitch / self.dx;
        if (per_pixel - per_pixel.round()).abs() > 1e-6 || per_pixel.round() < 1.0 {
            return Err(DeviceError::InvalidGeometry("pixel pitch must be a whole number of cells".into()));
        }
        let pixels = self.region_size / self.pixel_pitch;
        if (pixels - pixels.round()).abs() > 1e-6 {
            return Err(DeviceError::InvalidGeometry("region must be a whole number of pixels".into()));
        }
        Ok(())
    }

    pub fn pixels(&self) -> usize {
        (self.region_size / self.pixel_pitch).round() as usize
    }

    pub fn cells_per_pixel(&self) -> usize {
        (self.pixel_pitch / self.dx).round() as usize
    }

    pub(crate) fn layout(&self) -> Result<GridLayout, DeviceError> {
        self.validate()?;
        let p = self.pml_cells;
        let lead = self.cells(self.lead_length);
        let margin = self.cells(self.margin);
        let region = self.pixels() * self.cells_per_pixel();
        Ok(GridLayout {
            nx: 2 * p + 2 * lead + region,
            ny: 2 * p + 2 * margin + region,
            x0: p + lead,
            y0: p + margin,
            region,
        })
    }

    pub fn design_region(&self) -> Result<DesignRegion, DeviceError> {
        let l = self.layout()?;
        Ok(DesignRegion { x0: l.x0, y0: l.y0, px: self.pixels(), py: self.pixels(), cells_per_pixel: self.cells_per_pixel() })
    }

    /// Center of a rail, measured from the bottom grid edge.
    pub fn rail_center(&self, rail: Rail) -> Result<f64, DeviceError> {
        let l = self.layout()?;
        let mid = (l.y0 as f64 + l.region as f64 / 2.0) * self.dx;
        Ok(match rail {
            Rail::Top => mid + self.rail_spacing / 2.0,
            Rail::Bottom => mid - self.rail_spacing / 2.0,
        })
    }

    /// Background grid: silica with both rails running the full length; the
    /// region itself is silica until a density is applied. Rail edges falling
    /// inside a cell are area-averaged.
    pub fn background(&self, lambda0: f64) -> Result<SimulationGrid, DeviceError> {
        let l = self.layout()?;
        let pml = PmlSpec::for_wavelength(self.pml_cells, self.dx, lambda0);
        let mut grid = SimulationGrid::new(self.dx, l.nx, l.ny, lambda0, EPS_SILICA, pml)?;
        let centers = [self.rail_center(Rail::Top)?, self.rail_center(Rail::Bottom)?];
        for j in 0..l.ny {
            let (lo, hi) = (j as f64 * self.dx, (j + 1) as f64 * self.dx);
            let fill: f64 = centers
                .iter()
                .map(|c| {
                    let (a, b) = (c - self.wg_width / 2.0, c + self.wg_width / 2.0);
                    ((hi.min(b) - lo.max(a)) / self.dx).clamp(0.0, 1.0)
                })
                .sum::<f64>()
                .min(1.0);
            if fill <= 0.0 {
                continue;
            }
            let eps = EPS_SILICA + fill * (EPS_SILICON - EPS_SILICA);
            for i in (0..l.x0).chain(l.x0 + l.region..l.nx) {
                grid.set_eps(i, j, eps)?;
            }
        }
        Ok(grid)
    }

    /// Cut across one rail at a port location.
    ///
    /// Sources sit four cells inside the interior of the input lead, with the
    /// reflection monitor two cells behind them; output monitors sit four
    /// cells before the right absorbing layer.
    pub fn port_cut(&self, rail: Rail, side: Side, reflection: bool) -> Result<Cut, DeviceError> {
        let l = self.layout()?;
        let p = self.pml_cells;
        let x = match (side, reflection) {
            (Side::Input, false) => p + 4,
            (Side::Input, true) => p + 2,
            (Side::Output, false) => l.nx - p - 5,
            (Side::Output, true) => l.nx - p - 3,
        };
        let half = (self.rail_spacing / 2.0).min(1.5e-6);
        let center = self.rail_center(rail)?;
        let y0 = ((center - half) / self.dx).round() as usize;
        let y1 = ((center + half) / self.dx).round() as usize;
        let interior = (p, l.ny - p);
        let (y0, y1) = (y0.max(interior.0), y1.min(interior.1));
        Ok(Cut { x, y0, len: y1 - y0 })
    }

    /// Guided mode on `rail` at `side`, traveling in `direction`.
    pub fn port_mode(
        &self,
        grid: &SimulationGrid,
        rail: Rail,
        side: Side,
        direction: Direction,
        behind_source: bool,
    ) -> Result<ModeProfile, DeviceError> {
        let cut = self.port_cut(rail, side, behind_source)?;
        Ok(grid.port_mode(cut, direction, 0)?)
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct GridLayout {
    pub nx: usize,
    pub ny: usize,
    pub x0: usize,
    pub y0: usize,
    pub region: usize,
}
