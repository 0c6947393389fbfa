//! Group velocity of the dressed probe mode: numerical differentiation of
//! β(ωp), the analytic thin-fiber estimate and the bulk-medium limit.

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::dressed::{self, ControlField, DressedError, DressedMode, DressedSettings};
use crate::fiber::{self, FiberError, FiberGeometry};
use crate::medium::{Medium, SPEED_OF_LIGHT};
use crate::numeric;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GroupVelocityError {
    #[error(transparent)]
    Dressed(#[from] DressedError),
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error("probe and control decay constants coincide (φp = {phi_p:e}, φc = {phi_c:e})")]
    SingularDecay { phi_p: f64, phi_c: f64 },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Central-difference group velocity with a Richardson error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericGroupVelocity {
    /// 1/(dβ/dω) from the stencil ±h.
    pub v_g: f64,
    pub dbeta_domega: f64,
    /// Same with ±h/2.
    pub v_g_half_step: f64,
    /// Richardson-extrapolated velocity.
    pub v_g_refined: f64,
    /// |v(h) - v(h/2)| / |v(h/2)|.
    pub truncation_error: f64,
    /// dβ/dω < 0 (anomalous dispersion).
    pub anomalous: bool,
    pub step: f64,
}

/// Differentiate `beta_at(ω)` around `omega0` with step `h`.
pub fn numeric_group_velocity<F, E>(beta_at: F, omega0: f64, h: f64) -> Result<NumericGroupVelocity, E>
where
    F: Fn(f64) -> Result<f64, E> + Sync,
    E: Send,
{
    let offsets = [h, -h, 0.5 * h, -0.5 * h];
    let betas: Vec<f64> = offsets.par_iter().map(|&o| beta_at(omega0 + o)).collect::<Result<_, E>>()?;
    let d1 = (betas[0] - betas[1]) / (2.0 * h);
    let d2 = (betas[2] - betas[3]) / h;
    let refined = (4.0 * d2 - d1) / 3.0;
    let v1 = 1.0 / d1;
    let v2 = 1.0 / d2;
    Ok(NumericGroupVelocity {
        v_g: v1,
        dbeta_domega: d1,
        v_g_half_step: v2,
        v_g_refined: 1.0 / refined,
        truncation_error: ((v1 - v2) / v2).abs(),
        anomalous: d1 < 0.0,
        step: h,
    })
}

/// Bulk EIT group velocity 2cG0²/(ω0 γ1 ξ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkGroupVelocity {
    pub v_g: f64,
    /// G0 = 0: the formula gives stopped light.
    pub stopped: bool,
}

pub fn bulk_limit_group_velocity(omega0: f64, gamma1: f64, xi: f64, rabi: f64) -> BulkGroupVelocity {
    let v_g = 2.0 * SPEED_OF_LIGHT * rabi * rabi / (omega0 * gamma1 * xi);
    BulkGroupVelocity { v_g, stopped: rabi == 0.0 }
}

/// Inputs of the analytic thin-fiber group velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticInputs {
    pub omega0: f64,
    pub gamma1: f64,
    pub xi: f64,
    /// Rabi frequency at the wall, G0 = G(a).
    pub rabi_wall: f64,
    pub radius: f64,
    pub n_fiber: f64,
    pub n_bar: f64,
    pub b: f64,
    pub phi_p: f64,
    pub phi_c: f64,
    pub db_domega: f64,
}

/// 1/v = (ω0γ1ξ/2cG0²)·bφp²(1+2(φp-φc)a)/((φp-φc)²(1+2φp a)) - (ω0/c)(nf - n̄)∂b/∂ω.
pub fn analytic_group_velocity_fiber(p: &AnalyticInputs) -> Result<f64, GroupVelocityError> {
    let diff = p.phi_p - p.phi_c;
    if diff.abs() <= 1e-12 * p.phi_p.abs().max(p.phi_c.abs()) {
        return Err(GroupVelocityError::SingularDecay { phi_p: p.phi_p, phi_c: p.phi_c });
    }
    if !(p.rabi_wall > 0.0) {
        return Err(GroupVelocityError::InvalidParameter { name: "rabi_wall", value: p.rabi_wall });
    }
    let c = SPEED_OF_LIGHT;
    let a = p.radius;
    let first = p.omega0 * p.gamma1 * p.xi / (2.0 * c * p.rabi_wall * p.rabi_wall)
        * p.b
        * p.phi_p
        * p.phi_p
        * (1.0 + 2.0 * diff * a)
        / (diff * diff * (1.0 + 2.0 * p.phi_p * a));
    let second = p.omega0 / c * (p.n_fiber - p.n_bar) * p.db_domega;
    Ok(1.0 / (first - second))
}

/// Contributions to dβ/dωp (s/m) of the averaged-index model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TermDecomposition {
    /// Phase-index term n_eff/c.
    pub phase: f64,
    /// (ω/c)(n̄ - nf)∂b/∂ω.
    pub fraction: f64,
    /// (ω/c)·b⟨∂n_m/∂ω⟩.
    pub material: f64,
    /// (ω/c)·b·2⟨(n_m - n̄)E ∂E/∂ω⟩/⟨E²⟩.
    pub profile: f64,
    /// (ω/c)·b·∂n̄/∂ω from finite differences of the converged n̄.
    pub averaged_index: f64,
}

impl TermDecomposition {
    pub fn total(&self) -> f64 {
        self.phase + self.fraction + self.material + self.profile
    }
}

/// Dressed modes at ωp and ωp ± h.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    pub center: DressedMode,
    /// Mode at ωp + h (δ - h).
    pub plus: DressedMode,
    /// Mode at ωp - h (δ + h).
    pub minus: DressedMode,
    pub h: f64,
}

impl Stencil {
    pub fn solve(
        fiber: &FiberGeometry,
        medium: &Medium,
        control: &ControlField,
        omega0: f64,
        delta: f64,
        h: f64,
        settings: &DressedSettings,
    ) -> Result<Self, DressedError> {
        let deltas = [delta, delta - h, delta + h];
        let mut modes: Vec<DressedMode> = deltas
            .par_iter()
            .map(|&d| dressed::self_consistent_mode(fiber, medium, control, omega0, d, settings))
            .collect::<Result<_, _>>()?;
        let minus = modes.pop().expect("three modes");
        let plus = modes.pop().expect("three modes");
        let center = modes.pop().expect("three modes");
        Ok(Self { center, plus, minus, h })
    }
}

/// Split dβ/dωp into its fraction, material-dispersion and profile terms.
pub fn term_decomposition(
    stencil: &Stencil,
    fiber: &FiberGeometry,
    medium: &Medium,
    control: &ControlField,
    medium_extent: Option<f64>,
) -> Result<TermDecomposition, GroupVelocityError> {
    let c = SPEED_OF_LIGHT;
    let m = &stencil.center;
    let h = stencil.h;
    let prefactor = m.omega / c;
    let nf = fiber.n_fiber;
    let b = m.b_outside;
    let n_eff = nf * (1.0 - b) + b * m.n_bar.re;
    let db = (stencil.plus.b_outside - stencil.minus.b_outside) / (2.0 * h);
    let dn_bar = (stencil.plus.n_bar.re - stencil.minus.n_bar.re) / (2.0 * h);

    let a = fiber.radius;
    let mut end = m.profile.tail_extent();
    if let Some(r) = medium_extent {
        end = end.min(r);
    }
    let (pp, pm, p0) = (&stencil.plus.profile, &stencil.minus.profile, &m.profile);
    let index = |d: f64, r: f64| medium.index(control.rabi(r), d).map(|n| n.re).unwrap_or(f64::NAN);
    let integrand = |r: f64| {
        let e = p0.shape(r);
        let w = p0.weight(r);
        let de = (pp.shape(r) - pm.shape(r)) / (2.0 * h);
        let n = index(m.delta, r);
        let dn = (index(stencil.plus.delta, r) - index(stencil.minus.delta, r)) / (2.0 * h);
        [e * e * w, dn * e * e * w, 2.0 * (n - m.n_bar.re) * e * de * w]
    };
    let pieces = 24;
    let mut total = [0.0; 3];
    let mut lo = a;
    for i in 1..=pieces {
        let t = i as f64 / pieces as f64;
        let hi = if i == pieces { end } else { a + (end - a) * t * t };
        let part = numeric::integrate(integrand, lo, hi, 0.0, 1e-11).map_err(DressedError::from)?;
        for j in 0..3 {
            total[j] += part[j];
        }
        lo = hi;
    }
    if total.iter().any(|v| !v.is_finite()) {
        return Err(GroupVelocityError::InvalidParameter { name: "medium index", value: f64::NAN });
    }
    Ok(TermDecomposition {
        phase: n_eff / c,
        fraction: prefactor * (m.n_bar.re - nf) * db,
        material: prefactor * b * total[1] / total[0],
        profile: prefactor * b * total[2] / total[0],
        averaged_index: prefactor * b * dn_bar,
    })
}

/// ∂b/∂ωp from the closed-form outside fraction of the stencil probe modes.
/// Returns the derivative and whether the expansion was valid at all points.
pub fn closed_form_fraction_derivative(stencil: &Stencil) -> (f64, bool) {
    let eval = |m: &DressedMode| match fiber::energy_fraction_outside_closed_form(
        m.probe.kappa_f,
        m.profile.phi,
        m.probe.radius,
    ) {
        Ok(v) => (v, true),
        Err(FiberError::ExpansionInvalid { value, .. }) => (value, false),
        Err(_) => (f64::NAN, false),
    };
    let (bp, okp) = eval(&stencil.plus);
    let (bm, okm) = eval(&stencil.minus);
    ((bp - bm) / (2.0 * stencil.h), okp && okm)
}

/// Everything the `vg` command reports at one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupVelocityReport {
    pub omega0: f64,
    pub delta: f64,
    pub n_bar: Complex64,
    pub b_outside: f64,
    pub numeric: NumericGroupVelocity,
    pub analytic: Result<f64, GroupVelocityError>,
    /// The analytic formula assumes Γ = 0 and δ = 0.
    pub analytic_preconditions_met: bool,
    pub closed_form_valid: bool,
    pub bulk: BulkGroupVelocity,
    pub terms: TermDecomposition,
    /// The fraction term from the numeric ∂b/∂ω has the same sign as the one
    /// built from the closed-form ∂b/∂ω in the analytic formula.
    pub sign_conventions_agree: bool,
    pub length: f64,
    pub delay: f64,
}

/// Numeric, analytic and bulk group velocities plus the term split.
#[allow(clippy::too_many_arguments)]
pub fn group_velocity_report(
    fiber: &FiberGeometry,
    medium: &Medium,
    control: &ControlField,
    omega0: f64,
    delta: f64,
    h: f64,
    settings: &DressedSettings,
    length: f64,
) -> Result<GroupVelocityReport, GroupVelocityError> {
    if !(h > 0.0) {
        return Err(GroupVelocityError::InvalidParameter { name: "stencil step", value: h });
    }
    let beta_at = |omega: f64| {
        dressed::self_consistent_mode(fiber, medium, control, omega0, omega0 - omega, settings).map(|m| m.beta)
    };
    let numeric = numeric_group_velocity(beta_at, omega0 - delta, h)?;
    let stencil = Stencil::solve(fiber, medium, control, omega0, delta, h, settings)?;
    let terms = term_decomposition(&stencil, fiber, medium, control, settings.medium_extent)?;
    let (db_closed, closed_form_valid) = closed_form_fraction_derivative(&stencil);
    let m = &stencil.center;
    let inputs = AnalyticInputs {
        omega0,
        gamma1: medium.gamma(),
        xi: medium.xi(),
        rabi_wall: control.rabi_at_wall(),
        radius: fiber.radius,
        n_fiber: fiber.n_fiber,
        n_bar: m.n_bar.re,
        b: m.b_outside,
        phi_p: m.profile.phi,
        phi_c: control.mode.phi,
        db_domega: db_closed,
    };
    let analytic = analytic_group_velocity_fiber(&inputs);
    // Contribution of the fraction term to dβ/dω as it enters the analytic formula.
    let fraction_closed = -(omega0 / SPEED_OF_LIGHT) * (fiber.n_fiber - m.n_bar.re) * db_closed;
    let bulk = bulk_limit_group_velocity(omega0, medium.gamma(), medium.xi(), control.rabi_at_wall());
    Ok(GroupVelocityReport {
        omega0,
        delta,
        n_bar: m.n_bar,
        b_outside: m.b_outside,
        numeric,
        analytic,
        analytic_preconditions_met: medium.ground_rate() == 0.0 && delta == 0.0,
        closed_form_valid,
        bulk,
        terms,
        sign_conventions_agree: fraction_closed.signum() == terms.fraction.signum(),
        length,
        delay: length / numeric.v_g,
    })
}
