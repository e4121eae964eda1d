use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{EmError, SimulationGrid};

/// Propagation sign along x.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

/// A vertical line of cells: column `x`, rows `y0..y0 + len`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub x: usize,
    pub y0: usize,
    pub len: usize,
}

impl Cut {
    pub fn rows(&self) -> std::ops::Range<usize> {
        self.y0..self.y0 + self.len
    }
}

/// Guided eigenmode sampled on a cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeProfile {
    pub cut: Cut,
    /// Unit-norm profile: `sum |a|^2 = 1`.
    pub amplitude: Vec<Complex64>,
    /// Effective index from the transverse eigenvalue.
    pub n_eff: f64,
    /// Propagation constant of the mode on the discrete lattice (rad/m).
    pub kx: f64,
    pub direction: Direction,
}

impl ModeProfile {
    /// Move the profile onto `cut`, which must have the profile's length.
    pub fn placed(mut self, cut: Cut, direction: Direction) -> Result<Self, EmError> {
        if cut.len != self.amplitude.len() {
            return Err(EmError::DimensionMismatch { expected: self.amplitude.len(), found: cut.len });
        }
        self.cut = cut;
        self.direction = direction;
        Ok(self)
    }

    /// Same profile multiplied by a complex factor (no renormalization).
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { amplitude: self.amplitude.iter().map(|a| a * factor).collect(), ..self.clone() }
    }
}

/// `mode_index`-th guided eigenmode of the transverse operator
/// `d2/dy2 + k0^2 eps(y)` with zero field beyond both ends of `eps_line`.
///
/// A mode is guided when its `n_eff^2` exceeds the permittivity at both ends of
/// the line. The returned profile sits on a placeholder cut at column 0;
/// use [`ModeProfile::placed`] or [`SimulationGrid::port_mode`] to position it.
pub fn solve_slab_mode(
    eps_line: &[f64],
    dx: f64,
    lambda0: f64,
    mode_index: usize,
) -> Result<ModeProfile, EmError> {
    let n = eps_line.len();
    if n < 3 {
        return Err(EmError::InvalidGrid(format!("mode line needs at least 3 cells, got {n}")));
    }
    let k0dx = 2.0 * PI / lambda0 * dx;
    let k0dx2 = k0dx * k0dx;
    let op = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            k0dx2 * eps_line[r] - 2.0
        } else if r.abs_diff(c) == 1 {
            1.0
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(op);
    let clad = eps_line[0].max(eps_line[n - 1]);
    let core = eps_line.iter().cloned().fold(f64::MIN, f64::max);
    let mut guided: Vec<(f64, usize)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter_map(|(k, &mu)| {
            let neff2 = mu / k0dx2;
            (neff2 > clad && neff2 < core).then_some((mu, k))
        })
        .collect();
    guided.sort_by(|a, b| b.0.total_cmp(&a.0));
    let found = guided.len();
    let &(mu, col) = guided
        .get(mode_index)
        .ok_or(EmError::NoGuidedMode { requested: mode_index, found })?;

    let v = eig.eigenvectors.column(col);
    let norm = v.norm();
    let peak = v.iter().cloned().fold(0.0_f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let sign = if peak < 0.0 { -1.0 } else { 1.0 };
    let amplitude = v.iter().map(|x| Complex64::new(sign * x / norm, 0.0)).collect();
    // Lattice dispersion of the 3-point second difference along x.
    let kx = (1.0 - mu / 2.0).acos() / dx;
    Ok(ModeProfile {
        cut: Cut { x: 0, y0: 0, len: n },
        amplitude,
        n_eff: mu.sqrt() / k0dx,
        kx,
        direction: Direction::Forward,
    })
}

impl SimulationGrid {
    /// Guided mode of the grid's own permittivity on `cut`.
    pub fn port_mode(
        &self,
        cut: Cut,
        direction: Direction,
        mode_index: usize,
    ) -> Result<ModeProfile, EmError> {
        self.check_cut(&cut)?;
        let line = self.eps_line(cut.x, cut.y0, cut.y0 + cut.len);
        solve_slab_mode(line, self.dx(), self.lambda0(), mode_index)?.placed(cut, direction)
    }

    pub(crate) fn check_cut(&self, cut: &Cut) -> Result<(), EmError> {
        let ix = self.interior_x();
        let iy = self.interior_y();
        let inside = ix.contains(&cut.x)
            && cut.len > 0
            && iy.contains(&cut.y0)
            && cut.y0 + cut.len <= iy.end;
        if inside {
            Ok(())
        } else {
            Err(EmError::OutsideInterior(format!("{cut:?}")))
        }
    }
}
