use eitfiber::medium::{
    beam_power, intensity, lambda_index, lambda_index_slope, ortho_index, xi_parameter, LambdaEitMedium, Medium,
    OrthoIndexForm, OrthoParaMedium,
};
use num_complex::Complex64;
use proptest::prelude::*;

/// Weak-probe Λ response from its two coupled linear equations, solved by Cramer's rule:
/// (γ1+γ2+iδ)σ - iGτ = iγ1 and -iGσ + (Γ - i(Δ-δ))τ = 0.
fn lambda_by_cramer(m: &LambdaEitMedium, rabi: f64, delta: f64) -> Complex64 {
    let i = Complex64::i();
    let a11 = Complex64::new(m.gamma1 + m.gamma2, delta);
    let a12 = -i * rabi;
    let a21 = -i * rabi;
    let a22 = Complex64::new(m.dephasing, -(m.control_detuning - delta));
    let det = a11 * a22 - a12 * a21;
    let sigma = i * m.gamma1 * a22 / det;
    m.background_index + 0.5 * m.xi * sigma
}

fn ortho(mixing: f64, form: OrthoIndexForm) -> OrthoParaMedium {
    OrthoParaMedium {
        density: 1.3e26,
        dipole: 7.3e-34,
        gamma_natural: 1.5e4,
        gamma_inhomogeneous: 1e7,
        mixing,
        zeeman: 0.0,
        control_detuning: 0.0,
        n_para: 1.12,
        form,
    }
}

#[test]
fn dark_point_is_exactly_transparent() {
    for rabi in [1e-3, 0.3, 1.0, 7.5] {
        let m = LambdaEitMedium::new(1.0, 0.107, 1.0, 1.0, 0.0, 0.0).unwrap();
        let n = lambda_index(&m, rabi, 0.0).unwrap();
        assert!(n.im.abs() < 1e-12 && (n.re - 1.0).abs() < 1e-12, "{n}");
        for form in [OrthoIndexForm::Exact, OrthoIndexForm::Linearized] {
            let h2 = ortho(0.0, form);
            let n = h2.index(rabi * h2.gamma(), 0.0).unwrap();
            assert!(n.im.abs() < 1e-12 && (n.re - 1.12).abs() < 1e-12, "{n}");
        }
    }
}

#[test]
fn absorption_without_control_peaks_on_resonance() {
    let m = LambdaEitMedium::new(1.0, 0.107, 1.0, 1.0, 0.0, 0.0).unwrap();
    let at = |d: f64| lambda_index(&m, 0.0, d).unwrap().im;
    let peak = at(0.0);
    assert!((peak - 0.107 / 4.0).abs() < 1e-15);
    for d in [-3.0, -0.5, 0.1, 2.0] {
        assert!(at(d) < peak);
    }
}

#[test]
fn ortho_slope_turns_anomalous_below_four_mixing_rates() {
    let mixing = 1.17e-3 * 1.0015e7;
    let m = Medium::OrthoPara(ortho(mixing, OrthoIndexForm::Linearized));
    let Medium::OrthoPara(h2) = m else { unreachable!() };
    let boundary = m.slope_sign_boundary();
    assert_eq!(boundary, 4.0 * mixing);
    assert!(h2.index_slope(0.9 * boundary) < 0.0);
    assert!(h2.index_slope(1.1 * boundary) > 0.0);
    assert!(h2.index_slope(boundary).abs() < 1e-30);
}

#[test]
fn xi_from_constants() {
    // N d²/(ħ ε0 γ) with CODATA values written out.
    let (n, d, g) = (1.3e26, 7.3e-34, 1.0015e7);
    let expected = n * d * d / (1.054_571_817e-34 * 8.854_187_812_8e-12 * g);
    assert!((xi_parameter(n, d, g).unwrap() / expected - 1.0).abs() < 1e-15);
    assert!((ortho(0.0, OrthoIndexForm::Exact).xi() / expected - 1.0).abs() < 1e-15);
}

#[test]
fn intensity_and_power_formulas() {
    // ½ n ε0 c E² for E = 1 V/m in vacuum.
    assert!((intensity(1.0, 1.0) - 0.5 * 8.854_187_812_8e-12 * 299_792_458.0).abs() < 1e-18);
    let p = beam_power(1.0, 2.0);
    assert!((p - std::f64::consts::PI).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lambda_index_matches_linear_system(
        gamma1 in 0.2f64..2.0,
        gamma2 in 0.2f64..2.0,
        dephasing in 0.0f64..0.2,
        control_detuning in -0.5f64..0.5,
        rabi in 0.05f64..3.0,
        delta in -3.0f64..3.0,
    ) {
        let m = LambdaEitMedium::new(1.0, 0.107, gamma1, gamma2, dephasing, control_detuning).unwrap();
        let got = lambda_index(&m, rabi, delta).unwrap();
        let want = lambda_by_cramer(&m, rabi, delta);
        prop_assert!((got - want).norm() < 1e-13, "{got} vs {want}");
    }

    #[test]
    fn lambda_slope_matches_finite_difference(
        dephasing in 0.0f64..0.1,
        rabi in 0.1f64..2.0,
    ) {
        let m = LambdaEitMedium::new(1.0, 0.107, 1.0, 1.0, dephasing, 0.0).unwrap();
        // Step small against the transparency window width G²/(γ1+γ2).
        let h = 1e-4 * rabi * rabi / 2.0;
        // ωp = ω0 - δ, so d/dωp = -d/dδ.
        let fd = -(lambda_index(&m, rabi, h).unwrap().re - lambda_index(&m, rabi, -h).unwrap().re) / (2.0 * h);
        let s = lambda_index_slope(&m, rabi);
        prop_assert!((fd - s).abs() < 1e-6 * s.abs().max(1e-6), "{fd} vs {s}");
    }

    #[test]
    fn ortho_slope_matches_finite_difference(
        mixing_frac in 0.0f64..3e-3,
        rabi_frac in 0.02f64..2.0,
    ) {
        let h2 = ortho(mixing_frac * 1.0015e7, OrthoIndexForm::Linearized);
        let g = h2.gamma();
        let rabi = rabi_frac * g;
        let h = 1e-4 * rabi * rabi / g;
        let fd = -(h2.index(rabi, h).unwrap().re - h2.index(rabi, -h).unwrap().re) / (2.0 * h);
        let s = h2.index_slope(rabi);
        let scale = h2.xi() / (2.0 * h2.n_para * g);
        prop_assert!((fd - s).abs() < 1e-5 * s.abs() + 1e-9 * scale, "{fd} vs {s}");
    }

    #[test]
    fn exact_and_linearized_forms_agree_to_second_order(
        re in -1.0f64..1.0,
        im in -1.0f64..1.0,
        xi in 1e-4f64..1e-2,
    ) {
        let sigma = Complex64::new(re, im);
        let exact = ortho_index(1.12, xi, sigma, OrthoIndexForm::Exact);
        let lin = ortho_index(1.12, xi, sigma, OrthoIndexForm::Linearized);
        let second = (xi * sigma).norm_sqr() / (8.0 * 1.12f64.powi(3));
        prop_assert!((exact - lin).norm() <= 1.01 * second + 1e-15);
    }
}
