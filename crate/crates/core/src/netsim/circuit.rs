use std::f64::consts::PI;
use std::io::Write;
use std::ops::Range;

use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    coupler_matrix, crossover_matrix, mzi_matrix, resonator_matrix, BlockParams, DeviceParams, NetsimError,
    ResonatorParams,
};
use crate::fabric::{Actuation, CircuitLayout, Placement, PlacementKind};
use crate::routing::SwitchState;
use crate::table;

/// Reported crosstalk when every other output is dark.
pub const CROSSTALK_FLOOR_DB: f64 = -200.0;

/// Rail-to-rail field transmission at one wavelength.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    /// Wavelength (m).
    pub wavelength: f64,
    pub matrix: DMatrix<Complex64>,
}

impl TransferMatrix {
    pub fn power(&self, output: usize, input: usize) -> f64 {
        self.matrix[(output, input)].norm_sqr()
    }

    /// Largest entry of `T^H T - I` in magnitude.
    pub fn unitarity_error(&self) -> f64 {
        let n = self.matrix.ncols();
        (self.matrix.adjoint() * &self.matrix - DMatrix::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

enum Block {
    Pair(Matrix2<Complex64>),
    Shuffle(DMatrix<Complex64>),
}

fn actuation(state: &SwitchState, p: &Placement) -> Result<(Actuation, Option<f64>), NetsimError> {
    let id = p.control.expect("active placement has a control");
    let s = state.setting(id).ok_or(NetsimError::UnresolvedControl(id))?;
    Ok((s.actuation, s.delta_n))
}

fn resonator_at(params: &DeviceParams, p: &Placement, delta_n: f64) -> ResonatorParams {
    let lambda_r0 = p.color_nm.map_or(params.resonator.lambda_r0, |nm| nm * 1e-9);
    ResonatorParams { lambda_r0, delta_n, ..params.resonator }
}

fn shuffle_matrix(perm: &[usize], block: &BlockParams) -> DMatrix<Complex64> {
    let n = perm.len();
    let a = 10f64.powf(-block.insertion_loss_db / 20.0);
    let x = 10f64.powf(block.crosstalk_db / 20.0);
    let mut m = DMatrix::zeros(n, n);
    for (i, &o) in perm.iter().enumerate() {
        m[(o, i)] = Complex64::from(a);
        for q in [o.wrapping_sub(1), o + 1] {
            if q < n {
                m[(q, i)] = Complex64::from(x);
            }
        }
    }
    m
}

fn block(params: &DeviceParams, state: &SwitchState, p: &Placement, wavelength: f64) -> Result<Block, NetsimError> {
    let m = match p.kind {
        PlacementKind::Switch => {
            let (act, dn) = actuation(state, p)?;
            let dn = dn.unwrap_or(match act {
                Actuation::Cross => 0.0,
                Actuation::Bar => params.bar_delta_n,
            });
            resonator_matrix(&resonator_at(params, p, dn), wavelength)
        }
        PlacementKind::Mzi => {
            let phase = match actuation(state, p)?.0 {
                Actuation::Bar => 0.0,
                Actuation::Cross => PI,
            };
            mzi_matrix(&params.coupler, phase, wavelength)
        }
        PlacementKind::Filter => resonator_matrix(&resonator_at(params, p, 0.0), wavelength),
        PlacementKind::Crossover => crossover_matrix(&params.crossover, wavelength),
        PlacementKind::Coupler => coupler_matrix(&params.coupler, wavelength),
        PlacementKind::Shuffle => {
            let perm = p.permutation.as_deref().unwrap_or_default();
            return Ok(Block::Shuffle(shuffle_matrix(perm, &params.block)));
        }
    };
    Ok(Block::Pair(m))
}

/// Left-multiply rows `rail..` of `t` by the block.
fn apply(t: &mut DMatrix<Complex64>, rail: usize, b: &Block) {
    match b {
        Block::Pair(m) => {
            for k in 0..t.ncols() {
                let (a, c) = (t[(rail, k)], t[(rail + 1, k)]);
                t[(rail, k)] = m[(0, 0)] * a + m[(0, 1)] * c;
                t[(rail + 1, k)] = m[(1, 0)] * a + m[(1, 1)] * c;
            }
        }
        Block::Shuffle(m) => {
            let span = m.nrows();
            let rows = t.rows(rail, span).into_owned();
            t.rows_mut(rail, span).copy_from(&(m * rows));
        }
    }
}

/// Product of the column blocks over `columns`, earliest column applied first.
pub fn partial_response(
    layout: &CircuitLayout,
    state: &SwitchState,
    params: &DeviceParams,
    wavelength: f64,
    columns: Range<usize>,
) -> Result<DMatrix<Complex64>, NetsimError> {
    if columns.start > columns.end || columns.end > layout.columns.len() {
        return Err(NetsimError::ColumnRange { start: columns.start, end: columns.end, columns: layout.columns.len() });
    }
    let n = layout.n_rails;
    let mut t = DMatrix::identity(n, n);
    for c in columns {
        for p in &layout.columns[c].placements {
            apply(&mut t, p.rail, &block(params, state, p, wavelength)?);
        }
        for term in layout.terminators.iter().filter(|term| term.column == c) {
            t.row_mut(term.rail).fill(Complex64::from(0.0));
        }
    }
    Ok(t)
}

/// Whole-circuit transfer matrix at each wavelength.
pub fn circuit_response(
    layout: &CircuitLayout,
    state: &SwitchState,
    params: &DeviceParams,
    wavelengths: &[f64],
) -> Result<Vec<TransferMatrix>, NetsimError> {
    params.validate()?;
    for (id, _, _) in layout.controls() {
        state.setting(id).ok_or(NetsimError::UnresolvedControl(id))?;
    }
    wavelengths
        .par_iter()
        .map(|&w| {
            let matrix = partial_response(layout, state, params, w, 0..layout.columns.len())?;
            Ok(TransferMatrix { wavelength: w, matrix })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathMetrics {
    pub wavelength: f64,
    pub input: usize,
    pub output: usize,
    pub insertion_loss_db: f64,
    /// Brightest unintended output, relative to the input.
    pub crosstalk_db: f64,
}

/// Loss and worst crosstalk of each intended `(input rail, output rail)` path.
pub fn path_metrics(response: &TransferMatrix, intended: &[(usize, usize)]) -> Vec<PathMetrics> {
    let m = &response.matrix;
    intended
        .iter()
        .map(|&(i, o)| {
            let leak = (0..m.nrows()).filter(|&j| j != o).map(|j| m[(j, i)].norm()).fold(0.0, f64::max);
            let crosstalk_db = if leak > 0.0 { (20.0 * leak.log10()).max(CROSSTALK_FLOOR_DB) } else { CROSSTALK_FLOOR_DB };
            PathMetrics {
                wavelength: response.wavelength,
                input: i,
                output: o,
                insertion_loss_db: -20.0 * m[(o, i)].norm().log10(),
                crosstalk_db,
            }
        })
        .collect()
}

/// Columns `wavelength_nm`, then `|T_ji|^2` as `T{j}_{i}` in row-major order.
pub fn write_responses_csv<W: Write>(w: W, comments: &[String], responses: &[TransferMatrix]) -> Result<(), table::TableError> {
    let n = responses.first().map_or(0, |r| r.matrix.nrows());
    let mut columns = vec!["wavelength_nm".to_string()];
    columns.extend((0..n).flat_map(|j| (0..n).map(move |i| format!("T{j}_{i}"))));
    let rows = responses.iter().map(|r| {
        let mut row = vec![r.wavelength * 1e9];
        row.extend((0..n).flat_map(|j| (0..n).map(move |i| (j, i))).map(|(j, i)| r.power(j, i)));
        row
    });
    table::write_records(w, comments, &columns, rows)
}
