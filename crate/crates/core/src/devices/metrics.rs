use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{forward_condition, DeviceError, DeviceGeometry, Rail};
use crate::table;
use crate::topopt::{evaluate_final, DensityField, DesignProblem};

/// Reported crosstalk when every unintended port is dark.
pub const CROSSTALK_FLOOR_DB: f64 = -200.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceMetrics {
    pub label: String,
    /// Wavelength (m).
    pub wavelength: f64,
    /// Port labels, aligned with `ratios`.
    pub ports: Vec<String>,
    /// Port power over injected power.
    pub ratios: Vec<f64>,
    pub injected: f64,
    pub insertion_loss_db: f64,
    /// Worst unintended port, relative to injected power.
    pub crosstalk_db: f64,
}

/// Metrics from raw port powers.
///
/// `intended[k]` marks ports that should carry light. Loss is taken on their
/// summed power and crosstalk on the brightest remaining port, both relative
/// to `injected`.
pub fn metrics_from_powers(
    label: &str,
    wavelength: f64,
    ports: &[String],
    powers: &[f64],
    intended: &[bool],
    injected: f64,
) -> DeviceMetrics {
    let ratios: Vec<f64> = powers.iter().map(|p| p.max(0.0) / injected).collect();
    let wanted: f64 = ratios.iter().zip(intended).filter(|(_, i)| **i).map(|(r, _)| r).sum();
    let leak = ratios.iter().zip(intended).filter(|(_, i)| !**i).map(|(r, _)| *r).fold(0.0, f64::max);
    let crosstalk_db = if leak > 0.0 { (10.0 * leak.log10()).max(CROSSTALK_FLOOR_DB) } else { CROSSTALK_FLOOR_DB };
    DeviceMetrics {
        label: label.into(),
        wavelength,
        ports: ports.to_vec(),
        ratios,
        injected,
        // Gain is not physical for a passive device; clamp numerical overshoot.
        insertion_loss_db: (-10.0 * wanted.log10()).max(0.0),
        crosstalk_db,
    }
}

/// One metrics record per condition of `problem`, evaluated on `rho` as given.
///
/// Ports with a positive goal are intended. A condition with no positive goal
/// (the combiner) treats its brightest port as intended.
pub fn evaluate_device(rho: &DensityField, problem: &DesignProblem) -> Result<Vec<DeviceMetrics>, DeviceError> {
    let eval = evaluate_final(problem, rho)?;
    Ok(problem
        .conditions
        .iter()
        .zip(&eval.conditions)
        .map(|(cond, res)| {
            let ports: Vec<String> = cond.targets.iter().map(|t| t.label.clone()).collect();
            let mut intended: Vec<bool> = cond.targets.iter().map(|t| t.goal > 0.0).collect();
            if !intended.contains(&true) {
                if let Some(k) = res.powers.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).map(|(k, _)| k) {
                    intended[k] = true;
                }
            }
            metrics_from_powers(&cond.label, cond.wavelength, &ports, &res.powers, &intended, cond.injected_power())
        })
        .collect())
}

/// Top-input transmission to both outputs over a wavelength band.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Spectrum {
    /// Wavelengths (m).
    pub wavelengths: Vec<f64>,
    /// Power at the top output.
    pub through: Vec<f64>,
    /// Power at the bottom output.
    pub drop: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.wavelengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavelengths.is_empty()
    }

    /// Columns `wavelength_nm, P_through, P_drop`.
    pub fn write_csv<W: Write>(&self, w: W, comments: &[String]) -> Result<(), DeviceError> {
        let columns = ["wavelength_nm", "P_through", "P_drop"].map(String::from);
        let rows = (0..self.len()).map(|k| vec![self.wavelengths[k] * 1e9, self.through[k], self.drop[k]]);
        table::write_records(w, comments, &columns, rows).map_err(|e| DeviceError::InvalidSweep(e.to_string()))
    }
}

/// Sample points `start, start + step, ...` up to `stop` inclusive.
pub fn sweep_points(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, DeviceError> {
    if !(step > 0.0) || !(stop >= start) {
        return Err(DeviceError::InvalidSweep(format!("need step > 0 and stop >= start, got {start}..{stop} by {step}")));
    }
    if start < 1.5e-6 - 1e-15 || stop > 1.6e-6 + 1e-15 {
        return Err(DeviceError::InvalidSweep("band must lie within 1500-1600 nm".into()));
    }
    let n = ((stop - start) / step + 1e-6).floor() as usize + 1;
    Ok((0..n).map(|k| start + k as f64 * step).collect())
}

/// Sweep the top input of `rho` placed in `geom`, one solve per wavelength.
pub fn sweep_device(
    rho: &DensityField,
    geom: &DeviceGeometry,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<Spectrum, DeviceError> {
    let points = sweep_points(start, stop, step)?;
    let region = geom.design_region()?;
    let samples: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&w| {
            let cond = forward_condition(geom, w, Rail::Top, &[(Rail::Top, 0.0), (Rail::Bottom, 0.0)])?;
            let problem = DesignProblem {
                name: "sweep".into(),
                grid: geom.background(w)?,
                region,
                pitch: geom.pixel_pitch,
                conditions: vec![cond],
                filter: None,
            };
            let eval = evaluate_final(&problem, rho)?;
            let p = &eval.conditions[0].powers;
            Ok((p[0], p[1]))
        })
        .collect::<Result<_, DeviceError>>()?;
    let (through, drop) = samples.into_iter().unzip();
    Ok(Spectrum { wavelengths: points, through, drop })
}
