//! Cross-checks of the built-in scenarios against the published figures.

use std::f64::consts::PI;

use thiserror::Error;

use crate::config::{presets, ConfigError, Scenario};
use crate::dressed::DressedError;
use crate::fiber::{self, FiberError, FiberGeometry, Geometry, TailModel};
use crate::groupvel::{self, GroupVelocityError, GroupVelocityReport};
use crate::medium::{self, sixlevel, Medium, MediumError};

#[derive(Debug, Error)]
pub enum CheckError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error(transparent)]
    Dressed(#[from] DressedError),
    #[error(transparent)]
    GroupVelocity(#[from] GroupVelocityError),
}

/// One comparison of a computed number with a published one.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub reference: f64,
    pub tolerance: String,
    pub pass: bool,
}

impl Check {
    fn within(name: &'static str, value: f64, reference: f64, abs: f64) -> Self {
        Self { name, value, reference, tolerance: format!("±{abs}"), pass: (value - reference).abs() <= abs }
    }

    fn relative(name: &'static str, value: f64, reference: f64, rel: f64) -> Self {
        let pass = ((value - reference) / reference).abs() <= rel;
        Self { name, value, reference, tolerance: format!("±{}%", rel * 100.0), pass }
    }

    fn factor(name: &'static str, value: f64, reference: f64, factor: f64) -> Self {
        let r = value / reference;
        Self { name, value, reference, tolerance: format!("factor {factor}"), pass: r >= 1.0 / factor && r <= factor }
    }
}

/// Group-velocity report at the scenario's operating detuning.
pub fn operating_report(scenario: &Scenario) -> Result<GroupVelocityReport, CheckError> {
    let control = scenario.control_field()?;
    Ok(groupvel::group_velocity_report(
        &scenario.fiber,
        &scenario.medium,
        &control,
        scenario.omega0(),
        scenario.scan.operating_detuning,
        scenario.solver.stencil,
        &scenario.dressed_settings(),
        scenario.group_velocity_length,
    )?)
}

/// Ground-level-6 population for a control of Rabi frequency γ, no probe.
pub fn ground_preparation(gamma: f64, mixing: f64) -> Result<f64, MediumError> {
    let params = sixlevel::SixLevelParams::uniform(gamma, mixing, 0.0);
    let drive = sixlevel::SixLevelDrive { control: gamma, probe: 0.0, delta: 0.0, control_detuning: 0.0 };
    Ok(sixlevel::steady_state(&params, &drive)?[5][5].re)
}

/// Fraction of the power outside a fiber at k·a = 1.31, n_f = 1.43, in vacuum.
pub fn thin_fiber_outside_fraction() -> Result<f64, FiberError> {
    let wavelength = 1e-6;
    let radius = 1.31 * wavelength / (2.0 * PI);
    let fiber = FiberGeometry::new(radius, 1.43)?;
    fiber::solve_mode(&fiber, 1.0, wavelength, Geometry::Cylindrical, TailModel::Exponential)?
        .energy_fraction_outside_numeric()
}

/// Run every check.
pub fn run() -> Result<Vec<Check>, CheckError> {
    let mut checks = Vec::new();

    let fig2 = presets::load("fig2")?;
    let probe = fiber::solve_mode(
        &fig2.fiber,
        fig2.medium.background_index(),
        fig2.probe_wavelength,
        Geometry::Cylindrical,
        fig2.conventions.tail,
    )?;
    checks.push(Check::within(
        "outside fraction b, 0.3 um fiber at 780 nm",
        probe.energy_fraction_outside_numeric()?,
        0.57,
        0.03,
    ));
    checks.push(Check::within("outside fraction at k a = 1.31", thin_fiber_outside_fraction()?, 0.49, 0.02));

    let ortho = presets::load("ortho_h2")?;
    let Medium::OrthoPara(h2) = ortho.medium else { unreachable!("ortho_h2 preset uses the ortho-para medium") };
    let decay = h2.gamma_natural;
    checks.push(Check::within("ground population rho66", ground_preparation(decay, 26.5)?, 0.97, 0.01));

    checks.push(Check::relative(
        "control power, 279 kW/cm^2 over 3 um (W)",
        medium::beam_power(279e7, 3e-6),
        19.7e-3,
        0.02,
    ));
    let i_eff = medium::intensity(medium::field_for_rabi(h2.gamma(), h2.dipole), h2.n_para);
    let i_nat = medium::intensity(medium::field_for_rabi(decay, h2.dipole), h2.n_para);
    checks.push(Check::relative("intensity ratio broadened/natural", i_eff / i_nat, 279e3 / 0.6, 0.05));

    let report = operating_report(&ortho)?;
    checks.push(Check::factor("group velocity (m/s)", report.numeric.v_g, 44.1, 2.5));
    checks.push(Check::relative(
        "delay over 50 um (s)",
        report.delay,
        ortho.group_velocity_length / report.numeric.v_g,
        0.01,
    ));
    let ratio = report.numeric.v_g / report.bulk.v_g;
    checks.push(Check {
        name: "fiber/bulk group velocity ratio",
        value: ratio,
        reference: 44.1 / 52.95,
        tolerance: "[0.5, 1)".into(),
        pass: (0.5..1.0).contains(&ratio),
    });
    let term_ratio = (report.terms.profile / report.terms.material).abs();
    checks.push(Check {
        name: "profile/material term ratio",
        value: term_ratio,
        reference: 1e-3,
        tolerance: "<= 1e-3".into(),
        pass: term_ratio <= 1e-3,
    });
    Ok(checks)
}
