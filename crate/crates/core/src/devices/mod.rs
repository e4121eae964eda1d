//! The three 2x2 devices as design problems, plus their figures of merit.

mod geometry;
mod lorentz;
mod metrics;

pub use geometry::{DeviceGeometry, Rail, Side};
pub use lorentz::{find_resonances, fit_lorentzian, lorentzian, ResonanceFit};
pub use metrics::{evaluate_device, metrics_from_powers, sweep_device, sweep_points, DeviceMetrics, Spectrum};

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::em::{Direction, EmError, PortSpec};
use crate::topopt::{DensityField, DesignProblem, ExcitationCondition, Target, TopoptError};

/// Design wavelength of all three devices.
pub const CENTER_WAVELENGTH: f64 = 1.55e-6;
/// Through-port wavelengths of the resonator problem.
pub const SIDEBAND_WAVELENGTHS: [f64; 2] = [1.548e-6, 1.552e-6];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DeviceError {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error(transparent)]
    Em(#[from] EmError),
    #[error(transparent)]
    Topopt(#[from] TopoptError),
    #[error("no resonance: peak prominence {prominence_db:.2} dB below 3 dB")]
    NoResonance { prominence_db: f64 },
    #[error("only {samples} samples inside one linewidth, need at least 7")]
    InsufficientSampling { samples: usize },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DeviceKind {
    Splitter,
    Crossover,
    Resonator,
}

impl DeviceKind {
    pub fn problem(self, geom: &DeviceGeometry) -> Result<DesignProblem, DeviceError> {
        match self {
            Self::Splitter => make_splitter_problem(geom),
            Self::Crossover => make_crossover_problem(geom),
            Self::Resonator => make_resonator_problem(geom),
        }
    }
}

impl std::str::FromStr for DeviceKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "splitter" => Ok(Self::Splitter),
            "crossover" => Ok(Self::Crossover),
            "resonator" => Ok(Self::Resonator),
            other => Err(format!("unknown device {other:?}")),
        }
    }
}

/// Starting density for an optimization run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialDensity {
    Uniform { value: f64 },
    /// Annulus centered in the region: `high` inside, `low` elsewhere. Radius
    /// and width in meters.
    Ring { radius: f64, width: f64, high: f64, low: f64 },
}

impl Default for InitialDensity {
    fn default() -> Self {
        Self::Uniform { value: 0.5 }
    }
}

impl InitialDensity {
    pub fn build(&self, geom: &DeviceGeometry) -> Result<DensityField, DeviceError> {
        geom.validate()?;
        let n = geom.pixels();
        let pitch = geom.pixel_pitch;
        let field = match *self {
            Self::Uniform { value } => DensityField::from_values(n, n, pitch, vec![value; n * n])?,
            Self::Ring { radius, width, high, low } => {
                let c = n as f64 / 2.0;
                let values = (0..n * n)
                    .map(|k| {
                        let (x, y) = ((k / n) as f64 + 0.5 - c, (k % n) as f64 + 0.5 - c);
                        let d = x.hypot(y) * pitch;
                        if (d - radius).abs() < width / 2.0 {
                            high
                        } else {
                            low
                        }
                    })
                    .collect();
                DensityField::from_values(n, n, pitch, values)?
            }
        };
        Ok(field)
    }
}

fn rail_name(rail: Rail) -> &'static str {
    match rail {
        Rail::Top => "top",
        Rail::Bottom => "bottom",
    }
}

/// Condition fed at `input`, with `(output rail, goal)` targets.
fn forward_condition(
    geom: &DeviceGeometry,
    wavelength: f64,
    input: Rail,
    goals: &[(Rail, f64)],
) -> Result<ExcitationCondition, DeviceError> {
    let grid = geom.background(wavelength)?;
    let src = geom.port_mode(&grid, input, Side::Input, Direction::Forward, false)?;
    let targets = goals
        .iter()
        .map(|&(rail, goal)| {
            let m = geom.port_mode(&grid, rail, Side::Output, Direction::Forward, false)?;
            Ok(Target { label: format!("out_{}", rail_name(rail)), monitor: PortSpec::monitor(m), goal, weight: 1.0 })
        })
        .collect::<Result<Vec<_>, DeviceError>>()?;
    Ok(ExcitationCondition {
        label: format!("{}_in_{:.0}nm", rail_name(input), wavelength * 1e9),
        wavelength,
        weight: 1.0,
        sources: vec![PortSpec::source(src)],
        targets,
    })
}

fn problem(geom: &DeviceGeometry, name: &str, conditions: Vec<ExcitationCondition>) -> Result<DesignProblem, DeviceError> {
    let p = DesignProblem {
        name: name.into(),
        grid: geom.background(CENTER_WAVELENGTH)?,
        region: geom.design_region()?,
        pitch: geom.pixel_pitch,
        conditions,
        filter: None,
    };
    p.validate()?;
    Ok(p)
}

/// 50:50 splitting from either input at 1550 nm.
pub fn make_splitter_problem(geom: &DeviceGeometry) -> Result<DesignProblem, DeviceError> {
    let goals = [(Rail::Top, 0.5), (Rail::Bottom, 0.5)];
    let conditions = vec![
        forward_condition(geom, CENTER_WAVELENGTH, Rail::Top, &goals)?,
        forward_condition(geom, CENTER_WAVELENGTH, Rail::Bottom, &goals)?,
    ];
    problem(geom, "splitter", conditions)
}

/// Full transfer to the diagonally opposite output at 1550 nm.
pub fn make_crossover_problem(geom: &DeviceGeometry) -> Result<DesignProblem, DeviceError> {
    let conditions = vec![
        forward_condition(geom, CENTER_WAVELENGTH, Rail::Top, &[(Rail::Bottom, 1.0), (Rail::Top, 0.0)])?,
        forward_condition(geom, CENTER_WAVELENGTH, Rail::Bottom, &[(Rail::Top, 1.0), (Rail::Bottom, 0.0)])?,
    ];
    problem(geom, "crossover", conditions)
}

/// Top input dropped to the bottom output at 1550 nm and passed to the top
/// output at 1548 and 1552 nm.
pub fn make_resonator_problem(geom: &DeviceGeometry) -> Result<DesignProblem, DeviceError> {
    let mut conditions = vec![forward_condition(
        geom,
        CENTER_WAVELENGTH,
        Rail::Top,
        &[(Rail::Bottom, 1.0), (Rail::Top, 0.0)],
    )?];
    for w in SIDEBAND_WAVELENGTHS {
        conditions.push(forward_condition(geom, w, Rail::Top, &[(Rail::Top, 1.0), (Rail::Bottom, 0.0)])?);
    }
    problem(geom, "resonator", conditions)
}

/// A splitter driven backwards as a combiner: unit power into both outputs
/// with relative phase `+pi/2` and `-pi/2`, monitored at both inputs.
///
/// Goals are zero with zero weight; these conditions are for evaluation only.
pub fn make_combiner_problem(geom: &DeviceGeometry) -> Result<DesignProblem, DeviceError> {
    let grid = geom.background(CENTER_WAVELENGTH)?;
    let out = |rail| geom.port_mode(&grid, rail, Side::Output, Direction::Backward, false);
    let inp = |rail| geom.port_mode(&grid, rail, Side::Input, Direction::Backward, false);
    let mut conditions = Vec::new();
    for (label, phase) in [("combine_plus", FRAC_PI_2), ("combine_minus", -FRAC_PI_2)] {
        let targets = [Rail::Top, Rail::Bottom]
            .into_iter()
            .map(|rail| {
                Ok(Target {
                    label: format!("in_{}", rail_name(rail)),
                    monitor: PortSpec::monitor(inp(rail)?),
                    goal: 0.0,
                    weight: 0.0,
                })
            })
            .collect::<Result<Vec<_>, DeviceError>>()?;
        conditions.push(ExcitationCondition {
            label: label.into(),
            wavelength: CENTER_WAVELENGTH,
            weight: 1.0,
            sources: vec![
                PortSpec::source(out(Rail::Top)?),
                PortSpec::source(out(Rail::Bottom)?).with_phase(phase),
            ],
            targets,
        });
    }
    problem(geom, "combiner", conditions)
}
