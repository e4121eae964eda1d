use photon_fabric::devices::{
    evaluate_device, fit_lorentzian, lorentzian, make_crossover_problem, metrics_from_powers, sweep_device, DeviceGeometry,
    InitialDensity,
};
use photon_fabric::topopt::DensityField;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};

/// Silicon along the top rail only: a straight guide through the region.
fn straight_guide(geom: &DeviceGeometry) -> DensityField {
    let n = geom.pixels();
    let pitch = geom.pixel_pitch;
    let rail_y = (geom.region_size + geom.rail_spacing) / 2.0;
    let values = (0..n * n)
        .map(|k| {
            let y = ((k % n) as f64 + 0.5) * pitch;
            if (y - rail_y).abs() < geom.wg_width / 2.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    DensityField::from_values(n, n, pitch, values).unwrap()
}

#[test]
fn noisy_lorentzian_keeps_q_within_five_percent() {
    let (center, q) = (1.55e-6, 4500.0);
    let wavelengths: Vec<f64> = (0..=200).map(|k| 1.548e-6 + k as f64 * 0.02e-9).collect();
    let clean: Vec<f64> = wavelengths.iter().map(|&w| lorentzian(w, center, q, 1.0, 0.0)).collect();
    let noise = Normal::new(0.0, 0.01).unwrap();
    for seed in 0..100 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let noisy: Vec<f64> = clean.iter().map(|p| p + noise.sample(&mut rng)).collect();
        let fit = fit_lorentzian(&wavelengths, &noisy).unwrap();
        assert!((fit.q / q - 1.0).abs() < 0.05, "seed {seed}: Q = {}", fit.q);
        assert!((fit.lambda_r - center).abs() < 0.01e-9, "seed {seed}");
    }
}

#[test]
fn straight_guide_spectrum_is_flat() {
    let geom = DeviceGeometry::desk();
    let s = sweep_device(&straight_guide(&geom), &geom, 1.54e-6, 1.56e-6, 2e-9).unwrap();
    assert_eq!(s.len(), 11);
    let max = s.through.iter().copied().fold(f64::MIN, f64::max);
    let min = s.through.iter().copied().fold(f64::MAX, f64::min);
    assert!(max - min < 0.02 * max, "through {:?}", s.through);
    assert!(s.through.iter().all(|&t| t > 0.95 && t < 1.02), "through {:?}", s.through);
    assert!(s.drop.iter().all(|&d| d < 1e-3), "drop {:?}", s.drop);
}

#[test]
fn single_point_sweep_matches_evaluation() {
    let geom = DeviceGeometry::desk();
    let rho = InitialDensity::Ring { radius: 1.2e-6, width: 0.4e-6, high: 1.0, low: 0.0 }.build(&geom).unwrap();
    let s = sweep_device(&rho, &geom, 1.55e-6, 1.55e-6, 1e-9).unwrap();
    let m = &evaluate_device(&rho, &make_crossover_problem(&geom).unwrap()).unwrap()[0];
    // Crossover ports are listed as (bottom, top) for the top input.
    assert!((m.ratios[0] - s.drop[0]).abs() < 1e-9, "{} vs {}", m.ratios[0], s.drop[0]);
    assert!((m.ratios[1] - s.through[0]).abs() < 1e-9, "{} vs {}", m.ratios[1], s.through[0]);
}

#[test]
fn metrics_ignore_source_scaling() {
    let geom = DeviceGeometry::desk();
    let rho = InitialDensity::Ring { radius: 1.0e-6, width: 0.5e-6, high: 1.0, low: 0.0 }.build(&geom).unwrap();
    let problem = make_crossover_problem(&geom).unwrap();
    let mut scaled = problem.clone();
    for c in &mut scaled.conditions {
        for s in &mut c.sources {
            s.weight *= 7.5;
        }
    }
    let a = evaluate_device(&rho, &problem).unwrap();
    let b = evaluate_device(&rho, &scaled).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x.insertion_loss_db - y.insertion_loss_db).abs() < 1e-9);
        assert!((x.crosstalk_db - y.crosstalk_db).abs() < 1e-9);
        for (p, q) in x.ratios.iter().zip(&y.ratios) {
            assert!((p - q).abs() < 1e-9 * p.max(1e-12).max(1.0));
        }
    }
}

#[test]
#[ignore = "0.911:0.001 gives -30.0 dB; the stated -29 dB does not follow from the stated powers"]
fn crossover_bottom_input_crosstalk_matches_stated_figure() {
    let labels = ["top".to_string(), "bottom".to_string()];
    let m = metrics_from_powers("x", 1.55e-6, &labels, &[0.911, 0.001], &[true, false], 1.0);
    assert!((m.crosstalk_db.round() - -29.0).abs() <= 0.05, "{} dB", m.crosstalk_db);
}
