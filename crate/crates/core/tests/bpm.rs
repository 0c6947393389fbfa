use std::f64::consts::PI;

use eitfiber::bpm::{
    init_gaussian, init_profile, l2_distance, rms_width, Absorber, BpmGrid, BpmSolver, IndexMap, PropagationSettings,
    Propagator,
};
use eitfiber::config::presets;
use eitfiber::dressed::self_consistent_mode;
use eitfiber::fiber::{solve_mode, FiberGeometry, Geometry, TailModel};
use num_complex::Complex64;

fn passive(fixed: f64, length: f64, snapshots: usize) -> PropagationSettings {
    PropagationSettings {
        length,
        record_every: 100,
        snapshot_every: Some(snapshots),
        fit_fraction: 0.5,
        renormalize: false,
        fixed_reference: Some(fixed),
    }
}

#[test]
fn free_space_gaussian_spreads_as_predicted() {
    let lambda = 1e-6;
    let grid = BpmGrid::new(1024, 0.1e-6, 1e-8, lambda).unwrap();
    let n0 = 1.0;
    let index = IndexMap::uniform(&grid, Complex64::new(n0, 0.0));
    let mut field = init_gaussian(&grid, 3e-6);
    let sigma0 = rms_width(&grid, &field.a);
    let k = grid.k0() * n0;
    // Intensity rms width σ grows as σ0 sqrt(1 + (z/zR)²) with zR = 2kσ0².
    let z_r = 2.0 * k * sigma0 * sigma0;
    let mut solver = BpmSolver::new(grid.clone(), Propagator::Fresnel, Absorber::default());
    let record = solver.propagate(&mut field, &index, &passive(n0, 40e-6, 1000)).unwrap();
    for s in &record.snapshots {
        let expected = sigma0 * (1.0 + (s.z / z_r).powi(2)).sqrt();
        let got = rms_width(&grid, &s.field);
        assert!((got / expected - 1.0).abs() < 1e-4, "z = {}: {got} vs {expected}", s.z);
    }
}

#[test]
fn graded_index_focuses_at_quarter_period() {
    let lambda = 1e-6;
    let grid = BpmGrid::new(1024, 0.1e-6, 1e-8, lambda).unwrap();
    let n0 = 1.5;
    let g = 2e4;
    let index = IndexMap::from_fn(&grid, |x| Complex64::new(n0 * (1.0 - g * g * x * x).max(0.25).sqrt(), 0.0));
    let mut field = init_gaussian(&grid, 12e-6);
    let sigma0 = rms_width(&grid, &field.a);
    let k = grid.k0() * n0;
    // Eigenmode intensity rms width is 1/sqrt(2kg); a wider beam narrows to σe²/σ0.
    let sigma_e2 = 1.0 / (2.0 * k * g);
    let quarter = PI / (2.0 * g);
    let every = ((quarter / grid.dz).round() as usize) / 16;
    let mut solver = BpmSolver::new(grid.clone(), Propagator::Fresnel, Absorber::default());
    let record = solver.propagate(&mut field, &index, &passive(n0, 2.0 * quarter, every)).unwrap();
    let (z_min, w_min) = record
        .snapshots
        .iter()
        .map(|s| (s.z, rms_width(&grid, &s.field)))
        .fold((0.0, f64::INFINITY), |m, (z, w)| if w < m.1 { (z, w) } else { m });
    assert!((z_min / quarter - 1.0).abs() < 0.07, "focus at {z_min}, expected {quarter}");
    assert!((w_min / (sigma_e2 / sigma0) - 1.0).abs() < 0.02, "{w_min} vs {}", sigma_e2 / sigma0);
    let back = rms_width(&grid, &record.snapshots.last().unwrap().field);
    assert!((back / sigma0 - 1.0).abs() < 0.01, "half period width {back} vs {sigma0}");
}

#[test]
fn passive_run_conserves_energy_and_symmetry() {
    let fiber = FiberGeometry::new(0.5e-6, 1.43).unwrap();
    let grid = BpmGrid::for_fiber(fiber.radius, 16, 512, 2.4e-6, None).unwrap();
    let index = IndexMap::fiber(&grid, &fiber, |_| Complex64::new(1.12, 0.0));
    let mut field = init_gaussian(&grid, 1e-6);
    let e0 = grid.energy(&field.a);
    let mut solver = BpmSolver::new(grid.clone(), Propagator::Fresnel, Absorber::default());
    let settings = PropagationSettings { length: 5e-6, renormalize: false, ..Default::default() };
    solver.propagate(&mut field, &index, &settings).unwrap();
    let n = grid.num_x;
    let asym = (0..n).map(|j| (field.a[j] - field.a[n - 1 - j]).norm()).fold(0.0, f64::max);
    let peak = field.a.iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(asym < 1e-10 * peak, "asymmetry {asym}");
    // Radiation reaching the absorber is the only loss.
    let e1 = grid.energy(&field.a);
    assert!(e1 <= e0 * (1.0 + 1e-12));
    assert!(field.attenuation.abs() < 1e-12, "lens loss {}", field.attenuation);
}

#[test]
fn exact_slab_mode_is_stationary_and_beta_converges() {
    let fiber = FiberGeometry::new(0.5e-6, 1.43).unwrap();
    let lambda = 2.4e-6;
    let slab = solve_mode(&fiber, 1.12, lambda, Geometry::Planar, TailModel::Exponential).unwrap();
    let coarse = BpmGrid::for_fiber(fiber.radius, 20, 512, lambda, None).unwrap();
    let mut betas = Vec::new();
    for grid in [coarse.clone(), coarse.with_dz(0.5 * coarse.dz).unwrap()] {
        let index = IndexMap::fiber(&grid, &fiber, |_| Complex64::new(1.12, 0.0));
        let mut field = init_profile(&grid, |x| slab.field(x));
        let start = field.normalized_magnitude(&grid);
        let mut solver = BpmSolver::new(grid.clone(), Propagator::Fresnel, Absorber::default());
        let settings = PropagationSettings { length: 20e-6, record_every: 200, ..Default::default() };
        let record = solver.propagate(&mut field, &index, &settings).unwrap();
        let drift = l2_distance(&grid, &start, &field.normalized_magnitude(&grid));
        assert!(drift < 1e-4, "drift {drift}");
        assert!((record.beta / slab.beta - 1.0).abs() < 1e-3);
        betas.push(record.beta);
    }
    assert!((betas[0] / betas[1] - 1.0).abs() < 1e-5, "{betas:?}");
}

#[test]
fn dressed_attenuation_follows_outside_absorption() {
    let scenario = presets::load("ortho_h2").unwrap();
    let control = scenario.control_field().unwrap();
    let delta = scenario.scan.operating_detuning;
    let dressed = self_consistent_mode(
        &scenario.fiber,
        &scenario.medium,
        &control,
        scenario.omega0(),
        delta,
        &scenario.dressed_settings(),
    )
    .unwrap();
    let grid = BpmGrid::for_fiber(scenario.fiber.radius, 16, 512, scenario.probe_wavelength, None).unwrap();
    let medium = scenario.medium;
    let index = IndexMap::fiber(&grid, &scenario.fiber, |r| medium.index(control.rabi(r), delta).unwrap());
    let slab = solve_mode(
        &scenario.fiber,
        dressed.n_bar.re,
        scenario.probe_wavelength,
        Geometry::Planar,
        TailModel::Exponential,
    )
    .unwrap();
    let mut field = init_profile(&grid, |x| slab.field(x));
    let mut solver = BpmSolver::new(grid.clone(), Propagator::Fresnel, Absorber::default());
    let settings =
        PropagationSettings { length: 30e-6, record_every: 200, snapshot_every: Some(1), ..Default::default() };
    let record = solver.propagate(&mut field, &index, &settings).unwrap();

    // Lens loss 2k0<Im n> weighted by the local intensity, integrated along z by the trapezoid rule.
    let k0 = grid.k0();
    let rate = |a: &[Complex64]| {
        let (mut num, mut den) = (0.0, 0.0);
        for (v, n) in a.iter().zip(&index.n) {
            num += n.im * v.norm_sqr();
            den += v.norm_sqr();
        }
        2.0 * k0 * num / den
    };
    let window = (1.0 - settings.fit_fraction) * settings.length;
    let first = record.samples.iter().find(|s| s.z >= window).unwrap();
    let last = record.samples.last().unwrap();
    let inside: Vec<_> = record.snapshots.iter().filter(|s| s.z >= first.z - 1e-12 && s.z <= last.z + 1e-12).collect();
    assert!(inside.len() > 100);
    let integral: f64 =
        inside.windows(2).map(|w| 0.5 * (rate(&w[0].field) + rate(&w[1].field)) * (w[1].z - w[0].z)).sum();
    let accounted = last.attenuation - first.attenuation;
    assert!((accounted / integral - 1.0).abs() < 1e-3, "{accounted} vs {integral}");

    let averaged = 2.0 * k0 * dressed.b_outside * dressed.n_bar.im;
    assert!((record.attenuation_rate / averaged - 1.0).abs() < 0.02, "{} vs {averaged}", record.attenuation_rate);
}
