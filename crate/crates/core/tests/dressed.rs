use eitfiber::config::{presets, Scenario};
use eitfiber::dressed::{
    dispersion_scan, self_consistent_mode, self_consistent_mode_from, AveragingForm, DressedError, DressedMode,
    DressedSettings,
};
use eitfiber::medium::Medium;
use num_complex::Complex64;

fn fig2() -> Scenario {
    presets::load("fig2").unwrap()
}

fn solve(s: &Scenario, delta: f64) -> DressedMode {
    let control = s.control_field().unwrap();
    self_consistent_mode(&s.fiber, &s.medium, &control, s.omega0(), delta, &s.dressed_settings()).unwrap()
}

/// Composite Simpson average of the outside index over the converged profile,
/// with r = a + (R - a)u² so the grid crowds near the wall.
fn simpson_average(s: &Scenario, mode: &DressedMode, form: AveragingForm) -> Complex64 {
    let control = s.control_field().unwrap();
    let p = &mode.profile;
    let (a, end) = (p.radius, p.tail_extent());
    let n = 40_000;
    let h = 1.0 / n as f64;
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for i in 0..=n {
        let u = i as f64 * h;
        let r = a + (end - a) * u * u;
        let jac = 2.0 * (end - a) * u;
        let c = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let w = c * jac * p.shape(r).powi(2) * p.weight(r);
        let idx = s.medium.index(control.rabi(r), mode.delta).unwrap();
        num += w * match form {
            AveragingForm::Linear => idx,
            AveragingForm::Quadratic => idx * idx,
        };
        den += w;
    }
    match form {
        AveragingForm::Linear => num / den,
        AveragingForm::Quadratic => (num / den).sqrt(),
    }
}

#[test]
fn control_opens_transparency_window() {
    let s = fig2();
    assert_eq!(s.medium.ground_rate(), 0.0);
    let control = s.control_field().unwrap();
    let settings = s.dressed_settings();
    let deltas = s.detunings();
    assert_eq!(deltas.len(), 201);
    let on = dispersion_scan(&s.fiber, &s.medium, &control, s.omega0(), &deltas, &settings);
    let off = dispersion_scan(&s.fiber, &s.medium, &control.off(), s.omega0(), &deltas, &settings);
    assert_eq!(on.failures() + off.failures(), 0);

    let im = |m: &DressedMode| m.n_bar.im;
    let max_on = on.modes().map(im).fold(f64::MIN, f64::max);
    let center = on.modes().find(|m| m.delta == 0.0).unwrap();
    assert!(im(center) < 0.01 * max_on, "{} vs {max_on}", im(center));

    let peak = off.modes().max_by(|x, y| im(x).total_cmp(&im(y))).unwrap();
    assert_eq!(peak.delta, 0.0);
}

#[test]
fn dark_point_has_no_absorption() {
    let m = solve(&fig2(), 0.0);
    assert!(m.n_bar.im.abs() < 1e-12, "{}", m.n_bar.im);
    assert!((m.n_bar.re - 1.0).abs() < 1e-12);
}

#[test]
fn fixed_point_reproduces_its_own_average() {
    for (name, delta_over_gamma) in [("fig2", 0.4), ("fig2", -1.3), ("ortho_h2", -1e-3), ("ortho_h2", 0.02)] {
        let s = presets::load(name).unwrap();
        let m = solve(&s, delta_over_gamma * s.gamma());
        let oracle = simpson_average(&s, &m, s.conventions.averaging);
        assert!((m.n_bar - oracle).norm() < 1e-9, "{name} δ/γ = {delta_over_gamma}: {} vs {oracle}", m.n_bar);
        assert!((m.b_outside - m.profile.energy_fraction_outside_numeric().unwrap()).abs() < 1e-8);
    }
}

#[test]
fn quadratic_averaging_is_self_consistent() {
    let mut s = fig2();
    s.conventions.averaging = AveragingForm::Quadratic;
    let m = solve(&s, 0.7 * s.gamma());
    let oracle = simpson_average(&s, &m, AveragingForm::Quadratic);
    assert!((m.n_bar - oracle).norm() < 1e-9, "{} vs {oracle}", m.n_bar);
}

#[test]
fn starting_point_does_not_change_the_fixed_point() {
    let s = fig2();
    let control = s.control_field().unwrap();
    let settings = s.dressed_settings();
    let delta = 0.8 * s.gamma();
    let a = self_consistent_mode(&s.fiber, &s.medium, &control, s.omega0(), delta, &settings).unwrap();
    let start = Some(Complex64::new(1.05, 0.01));
    let b = self_consistent_mode_from(&s.fiber, &s.medium, &control, s.omega0(), delta, &settings, start).unwrap();
    assert!((a.n_bar - b.n_bar).norm() < 1e-9);
    assert!((a.beta / b.beta - 1.0).abs() < 1e-12);
}

#[test]
fn scan_is_identical_for_any_thread_count() {
    let s = fig2();
    let control = s.control_field().unwrap();
    let deltas = eitfiber::dressed::detuning_grid(-2.0 * s.gamma(), 2.0 * s.gamma(), 33);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| dispersion_scan(&s.fiber, &s.medium, &control, s.omega0(), &deltas, &s.dressed_settings()))
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn iteration_failures_are_reported() {
    let s = fig2();
    let control = s.control_field().unwrap();
    let tight = DressedSettings { max_iter: 2, tolerance: 1e-15, ..s.dressed_settings() };
    let err = self_consistent_mode(&s.fiber, &s.medium, &control, s.omega0(), 0.5 * s.gamma(), &tight).unwrap_err();
    match err {
        DressedError::NoConvergence { history, .. } => assert_eq!(history.len(), 2),
        other => panic!("unexpected {other}"),
    }
    let bad = DressedSettings { damping: 0.0, ..s.dressed_settings() };
    assert!(self_consistent_mode(&s.fiber, &s.medium, &control, s.omega0(), 0.0, &bad).is_err());

    // A dense enough medium pulls the averaged index above the fiber index.
    let Medium::Lambda(mut lambda) = s.medium else { unreachable!() };
    lambda.background_index = 1.42;
    lambda.xi = 50.0;
    let dense = Medium::Lambda(lambda);
    let r = self_consistent_mode(&s.fiber, &dense, &control.off(), s.omega0(), -0.5 * s.gamma(), &s.dressed_settings());
    assert!(matches!(r, Err(DressedError::BracketLost { .. } | DressedError::Fiber(_))), "{r:?}");
}
