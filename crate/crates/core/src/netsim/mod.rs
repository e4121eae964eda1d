//! Forward-only 2x2 behavioral models and the transfer-matrix engine.
//!
//! Time convention `exp(-i omega t)`. Entry `(j, i)` of a matrix is the field
//! transmission from input rail `i` to output rail `j`. Cross-coupled
//! amplitudes carry `+j` in the coupler, crossover and interferometer; in the
//! resonator the drop amplitude is real on resonance and the through amplitude
//! carries the quadrature.

mod circuit;

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fabric::ControlId;

pub use circuit::{
    circuit_response, partial_response, path_metrics, write_responses_csv, PathMetrics, TransferMatrix,
    CROSSTALK_FLOOR_DB,
};

const J: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetsimError {
    #[error("control {0} has no state")]
    UnresolvedControl(ControlId),
    #[error("invalid device parameters: {0}")]
    InvalidParams(String),
    #[error("column range {start}..{end} outside a {columns}-column layout")]
    ColumnRange { start: usize, end: usize, columns: usize },
}

fn db_to_power(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplerParams {
    /// Power fraction sent to the cross port.
    pub split_ratio: f64,
    pub excess_loss_db: f64,
    /// Least power either port receives, relative to the input.
    pub crosstalk_floor_db: f64,
}

impl CouplerParams {
    pub fn ideal() -> Self {
        Self { split_ratio: 0.5, excess_loss_db: 0.0, crosstalk_floor_db: -400.0 }
    }

    pub fn nominal() -> Self {
        Self { split_ratio: 0.5, excess_loss_db: 0.26, crosstalk_floor_db: -60.0 }
    }

    fn validate(&self) -> Result<(), NetsimError> {
        if !(0.0..=1.0).contains(&self.split_ratio) || !(self.excess_loss_db >= 0.0) {
            return Err(NetsimError::InvalidParams(format!("coupler {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossoverParams {
    pub insertion_loss_db: f64,
    /// Through-port leakage inside the band.
    pub crosstalk_db: f64,
    /// Full flat bandwidth (nm).
    pub bandwidth_nm: f64,
    pub center_nm: f64,
    /// Leakage growth outside the band (dB per nm).
    pub rolloff_db_per_nm: f64,
}

impl CrossoverParams {
    pub fn lossless() -> Self {
        Self { insertion_loss_db: 0.0, crosstalk_db: -400.0, ..Self::nominal() }
    }

    pub fn nominal() -> Self {
        Self { insertion_loss_db: 0.29, crosstalk_db: -27.0, bandwidth_nm: 28.0, center_nm: 1550.0, rolloff_db_per_nm: 2.0 }
    }

    fn validate(&self) -> Result<(), NetsimError> {
        if !(self.insertion_loss_db >= 0.0) || !(self.crosstalk_db <= -10.0) || !(self.bandwidth_nm >= 0.0) {
            return Err(NetsimError::InvalidParams(format!("crossover {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonatorParams {
    /// Untuned resonance (m).
    pub lambda_r0: f64,
    pub q: f64,
    pub drop_loss_db: f64,
    pub through_loss_db: f64,
    /// On-resonance drop over residual through power.
    pub extinction_db: f64,
    /// Group index relating index shift to resonance shift.
    pub n_g: f64,
    /// Applied index shift.
    pub delta_n: f64,
}

impl ResonatorParams {
    pub fn nominal() -> Self {
        Self {
            lambda_r0: 1.55e-6,
            q: 4500.0,
            drop_loss_db: 0.5,
            through_loss_db: 0.3,
            extinction_db: 20.0,
            n_g: 6.75,
            delta_n: 0.0,
        }
    }

    pub fn lossless() -> Self {
        Self { drop_loss_db: 0.0, through_loss_db: 0.0, extinction_db: 400.0, ..Self::nominal() }
    }

    /// Full width at half maximum (m).
    pub fn linewidth(&self) -> f64 {
        self.lambda_r0 / self.q
    }

    pub fn tuned_resonance(&self) -> f64 {
        self.lambda_r0 * (1.0 + self.delta_n / self.n_g)
    }

    fn validate(&self) -> Result<(), NetsimError> {
        let ok = self.q > 0.0
            && self.extinction_db > 0.0
            && self.lambda_r0 > 0.0
            && self.n_g > 0.0
            && self.drop_loss_db >= 0.0
            && self.through_loss_db >= 0.0;
        if !ok {
            return Err(NetsimError::InvalidParams(format!("resonator {self:?}")));
        }
        Ok(())
    }
}

/// Loss and leakage of an abstract shuffle block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockParams {
    pub insertion_loss_db: f64,
    /// Leakage into each neighbor of the intended output rail.
    pub crosstalk_db: f64,
}

impl BlockParams {
    pub fn lossless() -> Self {
        Self { insertion_loss_db: 0.0, crosstalk_db: -400.0 }
    }

    pub fn nominal() -> Self {
        Self { insertion_loss_db: 1.0, crosstalk_db: -30.0 }
    }
}

/// One parameter set for every device kind in a layout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub coupler: CouplerParams,
    pub crossover: CrossoverParams,
    /// Template for switches and filters; colored devices replace `lambda_r0`
    /// and the switch state sets `delta_n`.
    pub resonator: ResonatorParams,
    /// Index shift applied to a resonator switch in the bar state.
    pub bar_delta_n: f64,
    pub block: BlockParams,
}

impl DeviceParams {
    pub fn nominal() -> Self {
        Self {
            coupler: CouplerParams::nominal(),
            crossover: CrossoverParams::nominal(),
            resonator: ResonatorParams::nominal(),
            bar_delta_n: 0.003,
            block: BlockParams::nominal(),
        }
    }

    pub fn lossless() -> Self {
        Self {
            coupler: CouplerParams::ideal(),
            crossover: CrossoverParams::lossless(),
            resonator: ResonatorParams::lossless(),
            bar_delta_n: 0.003,
            block: BlockParams::lossless(),
        }
    }

    pub fn validate(&self) -> Result<(), NetsimError> {
        self.coupler.validate()?;
        self.crossover.validate()?;
        self.resonator.validate()?;
        if !(self.block.insertion_loss_db >= 0.0) {
            return Err(NetsimError::InvalidParams(format!("block {:?}", self.block)));
        }
        Ok(())
    }
}

/// `[[t, jc], [jc, t]]` scaled by the excess loss.
pub fn coupler_matrix(p: &CouplerParams, _wavelength: f64) -> Matrix2<Complex64> {
    let floor = db_to_power(p.crosstalk_floor_db).min(0.5);
    let kappa = p.split_ratio.clamp(floor, 1.0 - floor);
    let scale = db_to_power(-p.excess_loss_db).sqrt();
    let t = Complex64::from((1.0 - kappa).sqrt() * scale);
    let c = J * kappa.sqrt() * scale;
    Matrix2::new(t, c, c, t)
}

/// Cross and through powers of a crossover at `wavelength`.
pub fn crossover_powers(p: &CrossoverParams, wavelength: f64) -> (f64, f64) {
    let cross = db_to_power(-p.insertion_loss_db);
    let leak = db_to_power(p.crosstalk_db);
    let outside = (wavelength * 1e9 - p.center_nm).abs() - p.bandwidth_nm / 2.0;
    if outside <= 0.0 {
        return (cross, leak);
    }
    let total = cross + leak;
    let leak = db_to_power(p.crosstalk_db + p.rolloff_db_per_nm * outside).min(total / 2.0);
    (total - leak, leak)
}

/// `[[x, js], [js, x]]` with `|s|^2` the cross power and `|x|^2` the leakage.
pub fn crossover_matrix(p: &CrossoverParams, wavelength: f64) -> Matrix2<Complex64> {
    let (cross, leak) = crossover_powers(p, wavelength);
    let x = Complex64::from(leak.sqrt());
    let s = J * cross.sqrt();
    Matrix2::new(x, s, s, x)
}

/// All-forward add-drop resonator, `[[t, d], [d, t]]`.
///
/// With detuning `delta` from the tuned resonance and half-width `h`:
/// `t = sqrt(A_t) (j delta + h r) / (j delta + h)` and
/// `d = sqrt(A_d) h (1 - r) / (j delta + h)`, where `r` is the residual
/// through amplitude set by the extinction.
pub fn resonator_matrix(p: &ResonatorParams, wavelength: f64) -> Matrix2<Complex64> {
    let h = p.linewidth() / 2.0;
    let delta = wavelength - p.tuned_resonance();
    let r = 10f64.powf(-p.extinction_db / 20.0);
    let denom = J * delta + h;
    let t = db_to_power(-p.through_loss_db).sqrt() * (J * delta + h * r) / denom;
    let d = db_to_power(-p.drop_loss_db).sqrt() * h * (1.0 - r) / denom;
    Matrix2::new(t, d, d, t)
}

/// Coupler, phase shifter on the lower arm, coupler. `phase = 0` is bar and
/// `phase = pi` is cross.
pub fn mzi_matrix(coupler: &CouplerParams, phase: f64, wavelength: f64) -> Matrix2<Complex64> {
    let c = coupler_matrix(coupler, wavelength);
    let arms = Matrix2::new(Complex64::from(1.0), Complex64::from(0.0), Complex64::from(0.0), Complex64::from_polar(1.0, phase + PI));
    c * arms * c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power(m: &Matrix2<Complex64>, j: usize, i: usize) -> f64 {
        m[(j, i)].norm_sqr()
    }

    fn unitarity_error(m: &Matrix2<Complex64>) -> f64 {
        (m.adjoint() * m - Matrix2::identity()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn ideal_coupler_splits_evenly() {
        let m = coupler_matrix(&CouplerParams::ideal(), 1.55e-6);
        assert!((power(&m, 0, 0) - 0.5).abs() < 1e-12);
        assert!((power(&m, 1, 0) - 0.5).abs() < 1e-12);
        assert!(unitarity_error(&m) < 1e-12);
    }

    #[test]
    fn quadrature_inputs_combine_at_one_port() {
        let m = coupler_matrix(&CouplerParams::ideal(), 1.55e-6);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let out = |sign: f64| m * nalgebra::Vector2::new(Complex64::from(a), Complex64::from_polar(a, -sign * PI / 2.0));
        let plus = out(1.0);
        let minus = out(-1.0);
        assert!((plus[0].norm_sqr() - 1.0).abs() < 1e-12 && plus[1].norm_sqr() < 1e-12);
        assert!((minus[1].norm_sqr() - 1.0).abs() < 1e-12 && minus[0].norm_sqr() < 1e-12);
    }

    #[test]
    fn coupler_excess_loss() {
        let p = CouplerParams { excess_loss_db: 0.26, ..CouplerParams::ideal() };
        let m = coupler_matrix(&p, 1.55e-6);
        let total = power(&m, 0, 0) + power(&m, 1, 0);
        assert!((total - 10f64.powf(-0.026)).abs() < 1e-12);
    }

    #[test]
    fn crossover_powers_match_measured_pair() {
        let p = CrossoverParams { insertion_loss_db: 0.18, crosstalk_db: -25.0, ..CrossoverParams::nominal() };
        let m = crossover_matrix(&p, 1.55e-6);
        assert!((power(&m, 1, 0) - 0.959).abs() < 5e-4);
        assert!((power(&m, 0, 0) - 0.003).abs() < 5e-4);
    }

    #[test]
    fn ideal_crossover_is_a_permutation() {
        let p = CrossoverParams { insertion_loss_db: 0.0, crosstalk_db: f64::NEG_INFINITY, ..CrossoverParams::nominal() };
        let m = crossover_matrix(&p, 1.55e-6);
        assert_eq!(m[(0, 0)], Complex64::from(0.0));
        assert_eq!(m[(1, 1)], Complex64::from(0.0));
        assert_eq!(m[(0, 1)].norm(), 1.0);
        assert_eq!(m[(1, 0)].norm(), 1.0);
    }

    #[test]
    fn crossover_band_model() {
        let p = CrossoverParams::nominal();
        let center = crossover_powers(&p, 1.55e-6);
        let edge = crossover_powers(&p, 1.564e-6);
        assert_eq!(center, edge);
        let beyond = crossover_powers(&p, 1.565e-6);
        assert!((10.0 * beyond.1.log10() - (p.crosstalk_db + p.rolloff_db_per_nm)).abs() < 1e-9);
        assert!((beyond.0 + beyond.1 - (center.0 + center.1)).abs() < 1e-12);
        let far = crossover_powers(&p, 1.6e-6);
        assert!((far.0 - far.1).abs() < 1e-12);
    }

    #[test]
    fn resonator_on_resonance_and_half_width() {
        let p = ResonatorParams { extinction_db: f64::INFINITY, ..ResonatorParams::lossless() };
        let m = resonator_matrix(&p, p.lambda_r0);
        assert!((power(&m, 1, 0) - 1.0).abs() < 1e-12);
        assert!(power(&m, 0, 0) < 1e-24);
        let h = p.linewidth() / 2.0;
        for w in [p.lambda_r0 - h, p.lambda_r0 + h] {
            assert!((power(&resonator_matrix(&p, w), 1, 0) - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn index_shift_moves_resonance_two_linewidths() {
        let p = ResonatorParams { delta_n: 0.003, ..ResonatorParams::nominal() };
        let shift = p.tuned_resonance() - p.lambda_r0;
        assert!((shift - 0.689e-9).abs() < 0.001e-9);
        assert!((shift / p.linewidth() - 2.0).abs() < 0.01);
    }

    #[test]
    fn mzi_states() {
        let c = CouplerParams::ideal();
        let bar = mzi_matrix(&c, 0.0, 1.55e-6);
        assert!((power(&bar, 0, 0) - 1.0).abs() < 1e-12 && power(&bar, 1, 0) < 1e-24);
        let cross = mzi_matrix(&c, PI, 1.55e-6);
        assert!((power(&cross, 1, 0) - 1.0).abs() < 1e-12 && power(&cross, 0, 0) < 1e-24);
        let half = mzi_matrix(&c, PI / 2.0, 1.55e-6);
        assert!((power(&half, 0, 0) - 0.5).abs() < 1e-12);
        assert!(unitarity_error(&half) < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(DeviceParams::nominal().validate().is_ok());
        let mut p = DeviceParams::nominal();
        p.crossover.crosstalk_db = -5.0;
        assert!(p.validate().is_err());
        let mut p = DeviceParams::nominal();
        p.resonator.q = 0.0;
        assert!(p.validate().is_err());
    }
}
