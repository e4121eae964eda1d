use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use super::DeviceError;

/// Minimum peak height over the band floor.
pub const MIN_PROMINENCE_DB: f64 = 3.0;
/// Reported extinction when the fitted floor is zero.
pub const MAX_EXTINCTION_DB: f64 = 200.0;
/// Minimum samples inside one full linewidth.
pub const MIN_SAMPLES_PER_LINEWIDTH: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResonanceFit {
    /// Center wavelength (m).
    pub lambda_r: f64,
    pub q: f64,
    /// Full width at half maximum (m).
    pub fwhm: f64,
    /// Peak over floor.
    pub extinction_db: f64,
    pub peak: f64,
    pub floor: f64,
    /// RMS residual over the fitted peak height.
    pub fit_residual: f64,
}

/// `floor + (peak - floor) / (1 + (2 (lambda - lambda_r) Q / lambda_r)^2)`.
pub fn lorentzian(lambda: f64, lambda_r: f64, q: f64, peak: f64, floor: f64) -> f64 {
    let u = 2.0 * (lambda - lambda_r) * q / lambda_r;
    floor + (peak - floor) / (1.0 + u * u)
}

/// Mean of the lowest tenth of the samples (at least one).
fn band_floor(power: &[f64]) -> f64 {
    let mut sorted = power.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = (sorted.len() / 10).max(1);
    sorted[..n].iter().sum::<f64>() / n as f64
}

fn prominence_db(peak: f64, floor: f64) -> f64 {
    if peak <= 0.0 {
        0.0
    } else if floor <= 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak / floor).log10()
    }
}

/// Least-squares fit of a single Lorentzian peak to `power(wavelengths)`.
///
/// Wavelengths must be ascending.
pub fn fit_lorentzian(wavelengths: &[f64], power: &[f64]) -> Result<ResonanceFit, DeviceError> {
    if wavelengths.len() != power.len() || wavelengths.len() < MIN_SAMPLES_PER_LINEWIDTH {
        return Err(DeviceError::InsufficientSampling { samples: wavelengths.len().min(power.len()) });
    }
    if wavelengths.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(DeviceError::InvalidSweep("wavelengths must be strictly ascending".into()));
    }
    let floor0 = band_floor(power);
    let (k_pk, &peak0) = power.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
    let prominence = prominence_db(peak0, floor0);
    if !(prominence >= MIN_PROMINENCE_DB) {
        return Err(DeviceError::NoResonance { prominence_db: prominence });
    }

    // Initial width from the half-maximum crossings.
    let half = floor0 + (peak0 - floor0) / 2.0;
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> f64 {
        let mut prev = k_pk;
        for k in range {
            if power[k] < half {
                let t = (power[prev] - half) / (power[prev] - power[k]);
                return wavelengths[prev] + t * (wavelengths[k] - wavelengths[prev]);
            }
            prev = k;
        }
        wavelengths[prev]
    };
    let left = crossing(&mut (0..k_pk).rev());
    let right = crossing(&mut (k_pk + 1..power.len()));
    let min_step = wavelengths.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    let width0 = (right - left).max(min_step);

    // Work in units of the initial width around the peak and of the peak height.
    let center = wavelengths[k_pk];
    let xs: Vec<f64> = wavelengths.iter().map(|w| (w - center) / width0).collect();
    let ys: Vec<f64> = power.iter().map(|p| p / peak0).collect();
    let p = levenberg_marquardt(&xs, &ys, Vector4::new(floor0 / peak0, 1.0 - floor0 / peak0, 0.0, 0.5));

    let (floor, amp, x0, h) = (p[0] * peak0, p[1] * peak0, p[2], p[3].abs());
    let lambda_r = center + x0 * width0;
    let fwhm = 2.0 * h * width0;
    let (lo, hi) = (wavelengths[0], wavelengths[wavelengths.len() - 1]);
    if !(amp > 0.0) || !(fwhm > 0.0) || lambda_r < lo || lambda_r > hi {
        return Err(DeviceError::NoResonance { prominence_db: prominence });
    }
    let samples = wavelengths.iter().filter(|w| (*w - lambda_r).abs() <= fwhm / 2.0).count();
    if samples < MIN_SAMPLES_PER_LINEWIDTH {
        return Err(DeviceError::InsufficientSampling { samples });
    }
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (model(&p, *x) - y).powi(2)).sum::<f64>() / xs.len() as f64).sqrt();
    Ok(ResonanceFit {
        lambda_r,
        q: lambda_r / fwhm,
        fwhm,
        extinction_db: prominence_db(floor + amp, floor).min(MAX_EXTINCTION_DB),
        peak: floor + amp,
        floor,
        fit_residual: rms / p[1],
    })
}

/// `b + a / (1 + ((x - x0) / h)^2)` with `p = (b, a, x0, h)`.
fn model(p: &Vector4<f64>, x: f64) -> f64 {
    let u = (x - p[2]) / p[3];
    p[0] + p[1] / (1.0 + u * u)
}

fn jacobian_row(p: &Vector4<f64>, x: f64) -> Vector4<f64> {
    let (a, h) = (p[1], p[3]);
    let u = (x - p[2]) / h;
    let d = 1.0 + u * u;
    Vector4::new(1.0, 1.0 / d, 2.0 * a * u / (h * d * d), 2.0 * a * u * u / (h * d * d))
}

fn cost(p: &Vector4<f64>, xs: &[f64], ys: &[f64]) -> f64 {
    xs.iter().zip(ys).map(|(x, y)| (model(p, *x) - y).powi(2)).sum()
}

fn levenberg_marquardt(xs: &[f64], ys: &[f64], mut p: Vector4<f64>) -> Vector4<f64> {
    let mut damping = 1e-3;
    let mut current = cost(&p, xs, ys);
    for _ in 0..500 {
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (x, y) in xs.iter().zip(ys) {
            let j = jacobian_row(&p, *x);
            jtj += j * j.transpose();
            jtr += j * (y - model(&p, *x));
        }
        let mut improved = false;
        while damping < 1e12 {
            let mut lhs = jtj;
            for k in 0..4 {
                lhs[(k, k)] += damping * jtj[(k, k)].max(1e-12);
            }
            let Some(delta) = lhs.lu().solve(&jtr) else {
                damping *= 10.0;
                continue;
            };
            let mut trial = p + delta;
            // Transmission cannot go negative.
            trial[0] = trial[0].max(0.0);
            let c = cost(&trial, xs, ys);
            if c.is_finite() && c < current {
                let rel = (current - c) / current.max(f64::MIN_POSITIVE);
                p = trial;
                current = c;
                damping = (damping / 10.0).max(1e-12);
                improved = rel > 1e-14;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    p
}

/// Fit every peak standing at least 3 dB over the band floor.
///
/// Each contiguous run of samples above the threshold is one candidate, fitted
/// over a window three run-widths wide on each side, stopping short of the
/// neighboring runs. Candidates that fail the
/// fit are skipped.
pub fn find_resonances(wavelengths: &[f64], power: &[f64]) -> Vec<ResonanceFit> {
    if wavelengths.len() != power.len() || power.is_empty() {
        return Vec::new();
    }
    let floor = band_floor(power);
    let threshold = if floor > 0.0 { floor * 10f64.powf(MIN_PROMINENCE_DB / 10.0) } else { 0.0 };
    let mut runs = Vec::new();
    let mut start = None;
    for (k, &p) in power.iter().enumerate() {
        match (p > threshold, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                runs.push((s, k));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, power.len()));
    }
    (0..runs.len())
        .filter_map(|r| {
            let (s, e) = runs[r];
            let pad = 3 * (e - s).max(1);
            let prev_end = if r > 0 { runs[r - 1].1 } else { 0 };
            let next_start = runs.get(r + 1).map_or(power.len(), |n| n.0);
            let (lo, hi) = (s.saturating_sub(pad).max(prev_end), (e + pad).min(next_start));
            fit_lorentzian(&wavelengths[lo..hi], &power[lo..hi]).ok()
        })
        .collect()
}
