//! Acceptance report: one PASS/FAIL line per criterion. Exits non-zero when a
//! criterion outside `KNOWN_RED` fails.

use std::time::{Duration, Instant};

use num_complex::Complex64;
use photon_fabric::devices::{
    evaluate_device, fit_lorentzian, make_splitter_problem, metrics_from_powers, DeviceGeometry,
};
use photon_fabric::em::{mode_overlap, solve_fields, Cut, Direction, FieldSolver, Injection, PmlSpec, PortSpec, SimulationGrid};
use photon_fabric::fabric::{count_components, generate, Actuation, ArchitectureKind, ArchitectureSpec, CircuitLayout};
use photon_fabric::netsim::{circuit_response, partial_response, resonator_matrix, DeviceParams, ResonatorParams};
use photon_fabric::routing::{solve_state, trace_paths, verify, Permutation, RouteRequest, SwitchState};
use photon_fabric::topopt::{adjoint_gradient, evaluate_objective, optimize, DensityField, Schedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria whose stated figure cannot be reproduced from the stated inputs.
/// 8: the crossover's bottom-input crosstalk from 0.911:0.001 is -30.0 dB, not -29 dB.
const KNOWN_RED: &[usize] = &[8];

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn sized(kind: ArchitectureKind, n: usize) -> CircuitLayout {
    generate(&ArchitectureSpec::with_n(kind, n)).unwrap()
}

fn architecture_counts() -> Outcome {
    let cases: [(ArchitectureSpec, usize, Option<usize>, Option<usize>); 7] = [
        (ArchitectureSpec::with_n(ArchitectureKind::SpankeBenes, 8), 28, None, None),
        (ArchitectureSpec::with_n(ArchitectureKind::Piloss, 8), 64, Some(49), None),
        (ArchitectureSpec::new(ArchitectureKind::ClosBenes16), 40, None, None),
        (ArchitectureSpec::with_n(ArchitectureKind::Crosspoint, 8), 64, Some(0), Some(16)),
        (ArchitectureSpec::new(ArchitectureKind::Wss6x6x4), 48, Some(9), None),
        (ArchitectureSpec::new(ArchitectureKind::Wss8x8x3), 60, None, None),
        (ArchitectureSpec::new(ArchitectureKind::Wcc4x4x4), 48, Some(16), None),
    ];
    let mut wrong = Vec::new();
    for (spec, active, passive, rails) in cases {
        let c = count_components(&generate(&spec).unwrap());
        // Crosspoint's "0 crossovers" is about crossings; elsewhere passive covers crossovers and filters.
        let passive_found = if spec.kind == ArchitectureKind::Crosspoint { c.passive_crossovers } else { c.passive() };
        let ok = c.active == active
            && passive.is_none_or(|p| p == passive_found)
            && rails.is_none_or(|r| r == c.rails);
        if !ok {
            wrong.push(format!("{}: active {} passive {} rails {}", spec.kind, c.active, passive_found, c.rails));
        }
    }
    Outcome::new(wrong.is_empty(), if wrong.is_empty() { "7 architectures exact".into() } else { wrong.join("; ") })
}

fn routing_soundness() -> Outcome {
    let crosspoint = sized(ArchitectureKind::Crosspoint, 8);
    let spanke = sized(ArchitectureKind::SpankeBenes, 8);
    let (mut solved, mut failures, mut wrong_count) = (0, 0, 0);
    for p in Permutation::all(8) {
        let request = RouteRequest::Permutation(p);
        for layout in [&crosspoint, &spanke] {
            match solve_state(layout, &request) {
                Ok(state) if verify(layout, &state, &request).unwrap() => {
                    solved += 1;
                    if layout.arch.kind == ArchitectureKind::Crosspoint && state.non_ambient(layout) != 8 {
                        wrong_count += 1;
                    }
                }
                _ => failures += 1,
            }
        }
    }
    Outcome::new(
        failures == 0 && wrong_count == 0 && solved == 2 * 40_320,
        format!("{solved} verified, {failures} failed, {wrong_count} crosspoint states with non-ambient != 8"),
    )
}

fn piloss_uniformity() -> Outcome {
    let layout = sized(ArchitectureKind::Piloss, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut uneven = 0;
    let (mut min_x, mut max_x) = (usize::MAX, 0);
    for _ in 0..10_000 {
        let state = solve_state(&layout, &RouteRequest::Permutation(Permutation::random(8, &mut rng))).unwrap();
        let traces = trace_paths(&layout, &state, None).unwrap();
        if traces.iter().any(|t| t.controls.len() != 8) {
            uneven += 1;
        }
        for t in &traces {
            min_x = min_x.min(t.crossovers);
            max_x = max_x.max(t.crossovers);
        }
    }
    Outcome::new(
        uneven == 0,
        format!("{uneven} of 10000 permutations with a path off 8 switch elements; passive crossings per path span {min_x}..={max_x}"),
    )
}

fn adjoint_gradient_check() -> Outcome {
    let problem = make_splitter_problem(&DeviceGeometry::desk()).unwrap();
    let r = problem.region;
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let values = (0..r.px * r.py).map(|_| rng.gen_range(0.2..0.8)).collect();
    let rho = DensityField::from_values(r.px, r.py, problem.pitch, values).unwrap();
    let grad = adjoint_gradient(&problem, &rho).unwrap().values;
    let max = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    let h = 1e-3;
    let objective = |k: usize, delta: f64| {
        let mut v = rho.values().to_vec();
        v[k] += delta;
        let shifted = DensityField::from_values(rho.px(), rho.py(), rho.pitch(), v).unwrap();
        evaluate_objective(&problem, &shifted).unwrap().objective
    };
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 10 {
        let k = rng.gen_range(0..grad.len());
        if grad[k].abs() < 1e-6 * max {
            continue;
        }
        let fd = (objective(k, h) - objective(k, -h)) / (2.0 * h);
        worst = worst.max((fd - grad[k]).abs() / grad[k].abs());
        checked += 1;
    }
    Outcome::new(worst < 1e-2, format!("{checked} pixels on a {}x{} desk region, worst relative error {worst:.2e}", r.px, r.py))
}

const LAMBDA: f64 = 1.55e-6;

fn straight_guide(dx: f64, nx: usize, ny: usize, core: usize) -> SimulationGrid {
    let pml = PmlSpec::for_wavelength(PmlSpec::DEFAULT_CELLS, dx, LAMBDA);
    let mut g = SimulationGrid::new(dx, nx, ny, LAMBDA, 2.07, pml).unwrap();
    let j0 = (ny - core) / 2;
    for i in 0..nx {
        for j in j0..j0 + core {
            g.set_eps(i, j, 12.1).unwrap();
        }
    }
    g
}

fn forward_amplitude(g: &SimulationGrid, src_x: usize, mon_x: usize) -> Complex64 {
    let y = g.interior_y();
    let cut = |x| Cut { x, y0: y.start, len: y.len() };
    let src = g.port_mode(cut(src_x), Direction::Forward, 0).unwrap();
    let mon = g.port_mode(cut(mon_x), Direction::Forward, 0).unwrap();
    let field = solve_fields(g, &[PortSpec::source(src)]).unwrap();
    mode_overlap(&field, &PortSpec::monitor(mon)).unwrap()
}

fn solver_physics() -> Outcome {
    // Reciprocity between two guides at different heights joined by an asymmetric scatterer.
    let dx = 40e-9;
    let pml = PmlSpec::for_wavelength(PmlSpec::DEFAULT_CELLS, dx, LAMBDA);
    let mut g = SimulationGrid::new(dx, 110, 100, LAMBDA, 2.07, pml).unwrap();
    for i in 0..110 {
        for j in 0..100 {
            let left = i < 55 && (35..47).contains(&j);
            let right = i >= 50 && (52..64).contains(&j);
            let blob = (48..60).contains(&i) && (40..60).contains(&j) && (i * 7 + j * 3) % 5 != 0;
            if left || right || blob {
                g.set_eps(i, j, 12.1).unwrap();
            }
        }
    }
    let ma = g.port_mode(Cut { x: 25, y0: 21, len: 40 }, Direction::Forward, 0).unwrap();
    let mb = g.port_mode(Cut { x: 85, y0: 38, len: 40 }, Direction::Backward, 0).unwrap();
    let solver = FieldSolver::new(&g).unwrap();
    let line = |m: &photon_fabric::em::ModeProfile| PortSpec::source(m.clone()).with_injection(Injection::Line);
    let ea = solver.solve(&[line(&ma)]).unwrap();
    let eb = solver.solve(&[line(&mb)]).unwrap();
    let proj = |e: &photon_fabric::em::ComplexField, m: &photon_fabric::em::ModeProfile| -> Complex64 {
        m.cut.rows().zip(&m.amplitude).map(|(j, a)| a * e.get(m.cut.x, j)).sum()
    };
    let (s_ab, s_ba) = (proj(&ea, &mb), proj(&eb, &ma));
    let reciprocity = (s_ab - s_ba).norm() / s_ab.norm();

    let transmission = forward_amplitude(&straight_guide(20e-9, 180, 150, 25), 25, 150).norm_sqr();

    let a_short = forward_amplitude(&straight_guide(20e-9, 150, 150, 25), 25, 120);
    let a_long = forward_amplitude(&straight_guide(20e-9, 270, 150, 25), 25, 120);
    let reflection_db = 20.0 * ((a_short - a_long).norm() / a_long.norm()).log10();

    Outcome::new(
        reciprocity < 1e-6 && (0.97..=1.01).contains(&transmission) && reflection_db < -40.0,
        format!("reciprocity {reciprocity:.1e}, straight-guide transmission {transmission:.4}, PML reflection {reflection_db:.1} dB"),
    )
}

fn desk_splitter() -> Outcome {
    let geom = DeviceGeometry::desk();
    let problem = make_splitter_problem(&geom).unwrap();
    let n = geom.pixels();
    let init = DensityField::uniform(n, n, geom.pixel_pitch, 0.5);
    let (design, history) = optimize(&problem, &init, &Schedule::with_iterations(200)).unwrap();
    let metrics = evaluate_device(&design, &problem).unwrap();
    let ok = history.len() == 200 && metrics.iter().all(|m| m.ratios.iter().all(|&r| r >= 0.40));
    let ratios: Vec<String> =
        metrics.iter().map(|m| format!("{}: {:.3}:{:.3}", m.label, m.ratios[0], m.ratios[1])).collect();
    Outcome::new(ok, format!("{} (reference target 0.466:0.490 / 0.456:0.472 at full scale)", ratios.join(", ")))
}

fn resonator_model() -> Outcome {
    let p = ResonatorParams::nominal();
    let span = 6.0 * p.linewidth();
    let drop_fit = |params: &ResonatorParams| {
        let center = params.tuned_resonance();
        let wavelengths: Vec<f64> = (0..=1200).map(|k| center - span + 2.0 * span * k as f64 / 1200.0).collect();
        let drop: Vec<f64> = wavelengths.iter().map(|&w| resonator_matrix(params, w)[(1, 0)].norm_sqr()).collect();
        fit_lorentzian(&wavelengths, &drop).unwrap()
    };
    let base = drop_fit(&p);
    let shifted = drop_fit(&ResonatorParams { delta_n: 0.003, ..p });
    let q_err = (base.q - p.q).abs() / p.q;
    let center_err_nm = (base.lambda_r - p.lambda_r0).abs() * 1e9;
    let lines = (shifted.lambda_r - base.lambda_r) / p.linewidth();
    Outcome::new(
        q_err < 0.01 && center_err_nm < 0.01 && (lines - 2.0).abs() <= 0.02,
        format!("Q {:.1} ({:.3}% off), center off by {center_err_nm:.2e} nm, shift {lines:.4} linewidths", base.q, 100.0 * q_err),
    )
}

/// Computed figure rounded to the precision it is stated with.
fn at_stated_precision(value: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (value * scale).round() / scale
}

fn metric_arithmetic() -> Outcome {
    let labels = ["top".to_string(), "bottom".to_string()];
    let il = |powers: [f64; 2], intended: [bool; 2], injected: f64| {
        metrics_from_powers("m", 1.55e-6, &labels, &powers, &intended, injected)
    };
    // (name, computed, stated, decimals stated)
    let split_top = il([0.466, 0.490], [true, true], 1.0);
    let split_bottom = il([0.456, 0.472], [true, true], 1.0);
    let combine_a = il([1.840, 0.042], [true, false], 2.0);
    let combine_b = il([0.003, 1.882], [false, true], 2.0);
    let cross_top = il([0.003, 0.959], [false, true], 1.0);
    let cross_bottom = il([0.911, 0.001], [true, false], 1.0);
    let figures = [
        ("splitter top IL", split_top.insertion_loss_db, 0.20, 2),
        ("splitter bottom IL", split_bottom.insertion_loss_db, 0.32, 2),
        ("combiner A IL", combine_a.insertion_loss_db, 0.36, 2),
        ("combiner B IL", combine_b.insertion_loss_db, 0.26, 2),
        ("combiner A XT", combine_a.crosstalk_db, -16.8, 1),
        ("combiner B XT", combine_b.crosstalk_db, -28.2, 1),
        ("crossover top XT", cross_top.crosstalk_db, -25.0, 0),
        ("crossover bottom XT", cross_bottom.crosstalk_db, -29.0, 0),
    ];
    let mut off = Vec::new();
    for (name, computed, stated, decimals) in figures {
        if (at_stated_precision(computed, decimals) - stated).abs() > 0.05 {
            off.push(format!("{name} {computed:.2} dB vs {stated} dB"));
        }
    }
    let detail =
        if off.is_empty() { "8 figures match".to_string() } else { format!("{} of 8 off: {}", off.len(), off.join("; ")) };
    Outcome::new(off.is_empty(), detail)
}

fn random_state(layout: &CircuitLayout, rng: &mut ChaCha8Rng) -> SwitchState {
    let mut state = SwitchState::default();
    for (id, _, _) in layout.controls() {
        state.set(id, if rng.gen() { Actuation::Cross } else { Actuation::Bar });
    }
    state
}

fn transfer_engine() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_unitarity = 0.0f64;
    let mut kinds = 0;
    for kind in ArchitectureKind::ALL {
        let layout = generate(&ArchitectureSpec::new(kind)).unwrap();
        if !layout.terminators.is_empty() {
            continue;
        }
        kinds += 1;
        for _ in 0..4 {
            let state = random_state(&layout, &mut rng);
            let wavelengths = [1.540e-6, 1.548e-6, 1.550e-6, 1.5503e-6, 1.560e-6];
            for r in circuit_response(&layout, &state, &DeviceParams::lossless(), &wavelengths).unwrap() {
                worst_unitarity = worst_unitarity.max(r.unitarity_error());
            }
        }
    }

    // Every switch on resonance with negligible leakage: each path is a chain of drop
    // events and its loss in dB must split exactly at any column boundary.
    let layout = sized(ArchitectureKind::SpankeBenes, 8);
    let mut state = SwitchState::default();
    for (id, _, _) in layout.controls() {
        state.set(id, Actuation::Cross);
    }
    let mut params = DeviceParams::nominal();
    params.resonator.extinction_db = 400.0;
    let w = params.resonator.lambda_r0;
    let il = |m: f64| -10.0 * m.log10();
    let end = layout.columns.len();
    let whole = partial_response(&layout, &state, &params, w, 0..end).unwrap();
    let mut worst_additivity = 0.0f64;
    for cut in 1..end {
        let a = partial_response(&layout, &state, &params, w, 0..cut).unwrap();
        let b = partial_response(&layout, &state, &params, w, cut..end).unwrap();
        for i in 0..layout.n_rails {
            let mid = (0..layout.n_rails).max_by(|&x, &y| a[(x, i)].norm().total_cmp(&a[(y, i)].norm())).unwrap();
            let out = (0..layout.n_rails).max_by(|&x, &y| whole[(x, i)].norm().total_cmp(&whole[(y, i)].norm())).unwrap();
            let total = il(whole[(out, i)].norm_sqr());
            let parts = il(a[(mid, i)].norm_sqr()) + il(b[(out, mid)].norm_sqr());
            worst_additivity = worst_additivity.max((total - parts).abs());
        }
    }
    Outcome::new(
        worst_unitarity < 1e-9 && worst_additivity < 1e-9,
        format!("{kinds} absorber-free kinds, max |T^H T - I| {worst_unitarity:.1e}; cascaded IL split error {worst_additivity:.1e} dB"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("architecture counts", architecture_counts),
        ("routing soundness", routing_soundness),
        ("PILOSS uniformity", piloss_uniformity),
        ("adjoint gradient", adjoint_gradient_check),
        ("solver physics", solver_physics),
        ("desk splitter optimization", desk_splitter),
        ("resonator behavioral model", resonator_model),
        ("metric arithmetic", metric_arithmetic),
        ("transfer-matrix engine", transfer_engine),
    ];
    let budgets = [1, 60, 600, 300, 120, 7200, 10, 1, 10].map(Duration::from_secs);
    let mut unexpected = 0;
    for (k, ((name, run), budget)) in criteria.into_iter().zip(budgets).enumerate() {
        let number = k + 1;
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let within = elapsed <= budget;
        let pass = outcome.pass && within;
        let tag = match (pass, KNOWN_RED.contains(&number)) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        let timing = if within { String::new() } else { format!(", over the {}s budget", budget.as_secs()) };
        println!("criterion {number} {name}: {tag}: {}{timing} [{:.1}s]", outcome.detail, elapsed.as_secs_f64());
        if !pass && !KNOWN_RED.contains(&number) {
            unexpected += 1;
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed");
        std::process::exit(1);
    }
}
