use std::path::Path;

use photon_fabric::devices::sweep_points;
use photon_fabric::fabric::{assign_colors, Actuation, count_components, generate, ArchitectureSpec, CircuitLayout, ComponentCounts};
use photon_fabric::netsim::{circuit_response, path_metrics, write_responses_csv, DeviceParams, PathMetrics};
use photon_fabric::routing::{realized, solve_state, trace_paths, verify, PathTrace, RouteRequest, SwitchState};
use photon_fabric::table;
use serde::{Deserialize, Serialize};

use crate::artifacts::{read_json, OutDir};
use crate::config::{CircuitConfig, Provenance, RouteConfig, SimulateConfig};
use crate::error::CliError;

fn read_layout(path: &Path) -> Result<CircuitLayout, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    CircuitLayout::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct Counts<'a> {
    config: &'a CircuitConfig,
    counts: ComponentCounts,
    palette: Vec<f64>,
}

pub fn circuit(cfg: &CircuitConfig) -> Result<(), CliError> {
    let provenance = Provenance::new("circuit", cfg);
    let spec = ArchitectureSpec { kind: cfg.kind, n: cfg.n, colors: cfg.colors };
    let mut layout = generate(&spec)?;
    if let Some(palette) = &cfg.palette {
        layout = assign_colors(&layout, palette)?;
    }
    let out = OutDir::create(&cfg.out)?;
    out.write_json("layout.json", &provenance, &layout)?;
    let counts = Counts { config: cfg, counts: count_components(&layout), palette: layout.palette() };
    out.write_json("counts.json", &provenance, &counts)
}

/// One request, or a list routed independently.
#[derive(Deserialize)]
#[serde(untagged)]
enum Requests {
    One(RouteRequest),
    Batch(Vec<RouteRequest>),
}

#[derive(Serialize)]
struct Verification<'a> {
    config: &'a RouteConfig,
    verified: bool,
    non_ambient: usize,
    /// Devices in the cross state.
    exchanges: usize,
    /// Output reached by each input, `null` when the light is absorbed or lost.
    realized: Option<Vec<Option<usize>>>,
    paths: Option<Vec<PathTrace>>,
}

pub fn route(cfg: &RouteConfig) -> Result<(), CliError> {
    let provenance = Provenance::new("route", cfg);
    let layout = read_layout(&cfg.layout)?;
    let requests: Requests = read_json(&cfg.request)?;
    let out = OutDir::create(&cfg.out)?;
    match requests {
        Requests::One(request) => {
            let state = solve_state(&layout, &request)?;
            let verified = verify(&layout, &state, &request)?;
            // Wavelength-routed fabrics have no single color-blind trace.
            let paths = (!layout.arch.kind.is_wavelength_routed()).then(|| trace_paths(&layout, &state, None)).transpose()?;
            out.write_json("state.json", &provenance, &state)?;
            let report = Verification {
                config: cfg,
                verified,
                non_ambient: state.non_ambient(&layout),
                exchanges: state.controls.values().filter(|s| s.actuation == Actuation::Cross).count(),
                realized: paths.as_deref().map(realized),
                paths,
            };
            out.write_json("verification.json", &provenance, &report)?;
            if !verified {
                return Err(CliError::Unroutable("solved state fails the trace check".into()));
            }
            Ok(())
        }
        Requests::Batch(requests) => {
            let rows: Vec<(bool, usize, bool)> = requests
                .iter()
                .map(|request| match solve_state(&layout, request) {
                    Ok(state) => Ok((verify(&layout, &state, request)?, state.non_ambient(&layout), true)),
                    Err(photon_fabric::routing::RoutingError::Unroutable(_)) => Ok((false, 0, false)),
                    Err(e) => Err(CliError::from(e)),
                })
                .collect::<Result<_, CliError>>()?;
            let columns = ["id", "solved", "verified", "non_ambient"].map(String::from);
            let records = rows.iter().enumerate().map(|(id, &(verified, non_ambient, solved))| {
                vec![id as f64, f64::from(u8::from(solved)), f64::from(u8::from(verified)), non_ambient as f64]
            });
            out.write("batch.csv", |w| table::write_records(w, &provenance.comments(), &columns, records))?;
            let failed = rows.iter().filter(|r| !r.0).count();
            if failed > 0 {
                return Err(CliError::Unroutable(format!("{failed} of {} requests not routed", rows.len())));
            }
            Ok(())
        }
    }
}

/// Intended `(input rail, output rail)` pairs at `wavelength_nm`.
fn intended_paths(layout: &CircuitLayout, state: &SwitchState, wavelength_nm: f64) -> Option<Vec<(usize, usize)>> {
    let color = layout.arch.kind.is_wavelength_routed().then_some(wavelength_nm);
    let traces = trace_paths(layout, state, color).ok()?;
    Some(traces.iter().filter(|t| t.output().is_some()).map(|t| (layout.inputs[t.input], t.rail)).collect())
}

pub fn simulate(cfg: &SimulateConfig) -> Result<(), CliError> {
    let provenance = Provenance::new("simulate", cfg);
    let layout = read_layout(&cfg.layout)?;
    let state: SwitchState = read_json(&cfg.state)?;
    let params = match &cfg.params {
        Some(path) => read_json(path)?,
        None => DeviceParams::nominal(),
    };
    let wavelengths = sweep_points(cfg.start_nm * 1e-9, cfg.stop_nm * 1e-9, cfg.step_nm * 1e-9)?;
    let responses = circuit_response(&layout, &state, &params, &wavelengths)?;

    let mut metrics: Vec<PathMetrics> = Vec::new();
    let mut untraced = false;
    for r in &responses {
        match intended_paths(&layout, &state, r.wavelength * 1e9) {
            Some(pairs) => metrics.extend(path_metrics(r, &pairs)),
            None => untraced = true,
        }
    }
    if untraced {
        eprintln!("warning: some wavelengths have no traceable path set; paths.csv omits them");
    }

    let out = OutDir::create(&cfg.out)?;
    let comments = provenance.comments();
    out.write("spectra.csv", |w| write_responses_csv(w, &comments, &responses))?;
    let columns = ["wavelength_nm", "input", "output", "insertion_loss_db", "crosstalk_db"].map(String::from);
    let records = metrics.iter().map(|m| {
        vec![m.wavelength * 1e9, m.input as f64, m.output as f64, m.insertion_loss_db, m.crosstalk_db]
    });
    out.write("paths.csv", |w| table::write_records(w, &comments, &columns, records))
}
