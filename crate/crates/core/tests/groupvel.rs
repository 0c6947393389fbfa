use std::f64::consts::PI;

use eitfiber::config::presets;
use eitfiber::consistency::operating_report;
use eitfiber::dressed::self_consistent_mode;
use eitfiber::fiber::{solve_mode, Geometry};
use eitfiber::groupvel::{
    analytic_group_velocity_fiber, bulk_limit_group_velocity, numeric_group_velocity, AnalyticInputs,
    GroupVelocityError,
};
use eitfiber::medium::{LambdaEitMedium, SPEED_OF_LIGHT};

#[test]
fn stencil_recovers_analytic_derivative() {
    // β(ω) = (ω/c)(1 + A·tanh((ω - ω1)/w)) has a closed-form derivative.
    let (omega1, w, amp) = (1e15, 1e7, 1e-3);
    let beta = |o: f64| Ok::<_, ()>(o / SPEED_OF_LIGHT * (1.0 + amp * ((o - omega1) / w).tanh()));
    for o in [omega1 - 2e7, omega1, omega1 + 5e6] {
        let t = ((o - omega1) / w).tanh();
        let exact = (1.0 + amp * t + o * amp * (1.0 - t * t) / w) / SPEED_OF_LIGHT;
        let r = numeric_group_velocity(beta, o, 1e4).unwrap();
        assert!((r.dbeta_domega / exact - 1.0).abs() < 1e-5, "{} vs {exact}", r.dbeta_domega);
        assert!((r.v_g_refined * exact - 1.0).abs() < 1e-5);
        assert!(r.truncation_error < 1e-5);
    }
}

#[test]
fn bulk_formula_matches_group_index_of_lambda_medium() {
    let gamma = 2.0 * PI * 1e6;
    let m = LambdaEitMedium::new(1.0, 0.107, gamma, gamma, 0.0, 0.0).unwrap();
    let omega0 = 2.0 * PI * SPEED_OF_LIGHT / 780e-9;
    for rabi in [0.3 * gamma, gamma, 2.0 * gamma] {
        let h = 1e-4 * rabi;
        // n_g = n + ωp dn/dωp with dn/dωp = -dn/dδ.
        let dn = -(m.index(rabi, h).unwrap().re - m.index(rabi, -h).unwrap().re) / (2.0 * h);
        let v = SPEED_OF_LIGHT / (1.0 + omega0 * dn);
        let bulk = bulk_limit_group_velocity(omega0, gamma, 0.107, rabi);
        assert!((bulk.v_g / v - 1.0).abs() < 1e-5, "{} vs {v}", bulk.v_g);
    }
}

#[test]
fn analytic_formula_rejects_degenerate_inputs() {
    let p = AnalyticInputs {
        omega0: 7.85e14,
        gamma1: 1e7,
        xi: 0.07,
        rabi_wall: 7e6,
        radius: 0.5e-6,
        n_fiber: 1.43,
        n_bar: 1.12,
        b: 0.3,
        phi_p: 2e6,
        phi_c: 2e6,
        db_domega: 0.0,
    };
    assert!(matches!(analytic_group_velocity_fiber(&p), Err(GroupVelocityError::SingularDecay { .. })));
    let p = AnalyticInputs { phi_c: 1e6, rabi_wall: 0.0, ..p };
    assert!(analytic_group_velocity_fiber(&p).is_err());
}

#[test]
fn index_terms_add_up_to_the_averaged_index_derivative() {
    let s = presets::load("ortho_h2").unwrap();
    let r = operating_report(&s).unwrap();
    let t = r.terms;
    assert!(((t.material + t.profile) / t.averaged_index - 1.0).abs() < 1e-4, "{t:?}");
    assert!(r.numeric.truncation_error < 1e-2);
    assert!(!r.numeric.anomalous);
    assert!((r.delay - r.length / r.numeric.v_g).abs() < 1e-15);
}

#[test]
fn numeric_derivative_follows_the_chain_rule() {
    let s = presets::load("ortho_h2").unwrap();
    let control = s.control_field().unwrap();
    let settings = s.dressed_settings();
    let delta = s.scan.operating_detuning;
    let h = s.solver.stencil;
    let omega0 = s.omega0();
    let r = operating_report(&s).unwrap();

    // dβ/dω = ∂β/∂ω at fixed n̄ + ∂β/∂n̄ · dn̄/dω, each from the bare fiber equation.
    let mode = |d: f64| self_consistent_mode(&s.fiber, &s.medium, &control, omega0, d, &settings).unwrap();
    let (center, plus, minus) = (mode(delta), mode(delta - h), mode(delta + h));
    let dn_domega = (plus.n_bar.re - minus.n_bar.re) / (2.0 * h);
    let beta = |n: f64, omega: f64| {
        let lambda = 2.0 * PI * SPEED_OF_LIGHT / omega;
        solve_mode(&s.fiber, n, lambda, Geometry::Cylindrical, s.conventions.tail).unwrap().beta
    };
    let (n, omega) = (center.n_bar.re, center.omega);
    let dn = 1e-7;
    let dbeta_dn = (beta(n + dn, omega) - beta(n - dn, omega)) / (2.0 * dn);
    let dw = 1e-7 * omega;
    let dbeta_dw = (beta(n, omega + dw) - beta(n, omega - dw)) / (2.0 * dw);
    let chain = dbeta_dw + dbeta_dn * dn_domega;
    assert!((chain / r.numeric.dbeta_domega - 1.0).abs() < 1e-3, "{chain} vs {}", r.numeric.dbeta_domega);
}
