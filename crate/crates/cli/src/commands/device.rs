use photon_fabric::devices::{
    evaluate_device, find_resonances, make_combiner_problem, sweep_device, sweep_points, DeviceGeometry, DeviceKind,
    DeviceMetrics, ResonanceFit, Spectrum,
};
use photon_fabric::topopt::{optimize_with, DensityField, DesignProblem, Schedule};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::artifacts::{read_json, OutDir};
use crate::cache::SweepCache;
use crate::config::{default_init, EvaluateConfig, OptimizeConfig, Provenance, Scale, SweepConfig};
use crate::error::CliError;

fn port_labels(problem: &DesignProblem) -> Vec<String> {
    problem
        .conditions
        .iter()
        .flat_map(|c| c.targets.iter().map(move |t| format!("{}:{}", c.label, t.label)))
        .collect()
}

fn read_density(path: &std::path::Path, geom: &DeviceGeometry) -> Result<DensityField, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let rho = DensityField::read_csv(std::io::BufReader::new(file), geom.pixel_pitch)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let n = geom.pixels();
    if (rho.px(), rho.py()) != (n, n) {
        return Err(CliError::Config(format!(
            "{} holds a {}x{} design, the geometry needs {n}x{n}",
            path.display(),
            rho.px(),
            rho.py()
        )));
    }
    Ok(rho)
}

/// Metrics of `rho` as `device`; the splitter also reports its combiner mode.
fn device_metrics(device: DeviceKind, geom: &DeviceGeometry, rho: &DensityField) -> Result<Vec<DeviceMetrics>, CliError> {
    let mut metrics = evaluate_device(rho, &device.problem(geom)?)?;
    if device == DeviceKind::Splitter {
        metrics.extend(evaluate_device(rho, &make_combiner_problem(geom)?)?);
    }
    Ok(metrics)
}

#[derive(Serialize)]
struct OptimizeReport<'a> {
    config: &'a OptimizeConfig,
    iterations: usize,
    final_objective: Option<f64>,
    metrics: Vec<DeviceMetrics>,
}

pub fn optimize(cfg: &OptimizeConfig) -> Result<(), CliError> {
    if !(0.0..0.5).contains(&cfg.init_jitter) {
        return Err(CliError::Config(format!("init_jitter must lie in [0, 0.5), got {}", cfg.init_jitter)));
    }
    if cfg.scale == Scale::Full {
        eprintln!("warning: full-scale designs need hours of solver time per run; desk scale is the quick preset");
    }
    let provenance = Provenance::new("optimize", cfg);
    let geom = cfg.scale.geometry();
    let problem = cfg.device.problem(&geom)?;
    let start = cfg.init.unwrap_or_else(|| default_init(cfg.device, &geom)).build(&geom)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(cfg.seed);
    let jitter = cfg.init_jitter;
    let values = start.values().iter().map(|v| (v + rng.gen_range(-jitter..=jitter)).clamp(0.0, 1.0)).collect();
    let init = DensityField::from_values(start.px(), start.py(), start.pitch(), values)?;

    let (design, history) = optimize_with(&problem, &init, &Schedule::with_iterations(cfg.iterations), |r| {
        if r.iteration % 10 == 0 {
            eprintln!("iteration {:>4}  beta {:>4}  objective {:.6}", r.iteration, r.beta, r.objective);
        }
    })?;

    let out = OutDir::create(&cfg.out)?;
    let comments = provenance.comments();
    out.write("density.csv", |w| design.write_csv(w, &comments))?;
    out.write("density.png", |w| design.write_png(w))?;
    out.write("history.csv", |w| history.write_csv(w, &comments, &port_labels(&problem)))?;
    let report = OptimizeReport {
        config: cfg,
        iterations: history.len(),
        final_objective: history.records.last().map(|r| r.objective),
        metrics: device_metrics(cfg.device, &geom, &design)?,
    };
    out.write_json("metrics.json", &provenance, &report)
}

#[derive(Serialize)]
struct EvaluateReport<'a> {
    config: &'a EvaluateConfig,
    metrics: Vec<DeviceMetrics>,
}

pub fn evaluate(cfg: &EvaluateConfig) -> Result<(), CliError> {
    let provenance = Provenance::new("evaluate", cfg);
    let geom = cfg.scale.geometry();
    let rho = read_density(&cfg.density, &geom)?;
    let report = EvaluateReport { config: cfg, metrics: device_metrics(cfg.device, &geom, &rho)? };
    OutDir::create(&cfg.out)?.write_json("metrics.json", &provenance, &report)
}

#[derive(Serialize)]
struct Resonance {
    lambda_nm: f64,
    q: f64,
    fwhm_nm: f64,
    extinction_db: f64,
    fit_residual: f64,
}

impl From<&ResonanceFit> for Resonance {
    fn from(f: &ResonanceFit) -> Self {
        Self {
            lambda_nm: f.lambda_r * 1e9,
            q: f.q,
            fwhm_nm: f.fwhm * 1e9,
            extinction_db: f.extinction_db,
            fit_residual: f.fit_residual,
        }
    }
}

#[derive(Serialize)]
struct SweepReport<'a> {
    config: &'a SweepConfig,
    /// Peaks of the bottom-output (drop) spectrum.
    resonances: Vec<Resonance>,
}

/// Sweep with per-point reuse through the cache directory when one is set.
fn cached_sweep(rho: &DensityField, geom: &DeviceGeometry, start: f64, stop: f64, step: f64) -> Result<Spectrum, CliError> {
    let Some(cache) = SweepCache::from_env(rho, geom) else {
        return Ok(sweep_device(rho, geom, start, stop, step)?);
    };
    let points = sweep_points(start, stop, step)?;
    let samples = points
        .par_iter()
        .map(|&w| match cache.get(w) {
            Some(hit) => Ok(hit),
            None => {
                let s = sweep_device(rho, geom, w, w, 1.0)?;
                let powers = (s.through[0], s.drop[0]);
                cache.put(w, powers);
                Ok(powers)
            }
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let (through, drop) = samples.into_iter().unzip();
    Ok(Spectrum { wavelengths: points, through, drop })
}

pub fn sweep(cfg: &SweepConfig) -> Result<(), CliError> {
    let provenance = Provenance::new("sweep", cfg);
    let geom = cfg.scale.geometry();
    let rho = read_density(&cfg.density, &geom)?;
    let spectrum = cached_sweep(&rho, &geom, cfg.start_nm * 1e-9, cfg.stop_nm * 1e-9, cfg.step_nm * 1e-9)?;
    let fits = find_resonances(&spectrum.wavelengths, &spectrum.drop);
    let out = OutDir::create(&cfg.out)?;
    out.write("spectrum.csv", |w| spectrum.write_csv(w, &provenance.comments()))?;
    let report = SweepReport { config: cfg, resonances: fits.iter().map(Resonance::from).collect() };
    out.write_json("resonances.json", &provenance, &report)
}

/// Metrics records of an earlier optimize or evaluate run.
pub fn run_metrics(dir: &std::path::Path) -> Result<Vec<DeviceMetrics>, CliError> {
    #[derive(serde::Deserialize)]
    struct Stored {
        metrics: Vec<DeviceMetrics>,
    }
    Ok(read_json::<Stored>(&dir.join("metrics.json"))?.metrics)
}
