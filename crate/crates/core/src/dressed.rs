//! Probe mode dressed by the control-field-dependent index of the surrounding
//! medium, found by fixed-point iteration on the mode-averaged index.

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::fiber::{self, FiberError, FiberGeometry, Geometry, ModeSolution, TailModel};
use crate::medium::{Medium, MediumError, SPEED_OF_LIGHT};
use crate::numeric::{self, NumericError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DressedError {
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Medium(#[from] MediumError),
    #[error("averaging quadrature failed: {0}")]
    Quadrature(#[from] NumericError),
    #[error("averaged index {n_bar} leaves the guided range below n_f = {n_fiber}")]
    BracketLost { n_bar: Complex64, n_fiber: f64 },
    #[error("fixed point not reached after {} iterations (last step {last_step:e})", history.len())]
    NoConvergence { history: Vec<Complex64>, last_step: f64 },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Averaging of the outside index over the probe power.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AveragingForm {
    /// n̄ = ⟨n⟩.
    #[default]
    Linear,
    /// n̄ = sqrt(⟨n²⟩).
    Quadratic,
}

/// Where the configured control Rabi frequency is specified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RabiReference {
    #[default]
    Center,
    Wall,
}

/// Control field guided by the bare fiber: G(r) = G(0)·E_c(r)/E_c(0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlField {
    pub mode: ModeSolution,
    pub rabi_center: f64,
}

impl ControlField {
    pub fn new(
        fiber: &FiberGeometry,
        background_index: f64,
        wavelength: f64,
        tail: TailModel,
        reference: RabiReference,
        rabi: f64,
    ) -> Result<Self, DressedError> {
        if !(rabi.is_finite() && rabi >= 0.0) {
            return Err(DressedError::InvalidParameter { name: "rabi", value: rabi });
        }
        let mode = fiber::solve_mode(fiber, background_index, wavelength, Geometry::Cylindrical, tail)?;
        let rabi_center = match reference {
            RabiReference::Center => rabi,
            RabiReference::Wall => rabi / mode.shape(fiber.radius),
        };
        Ok(Self { mode, rabi_center })
    }

    /// Local Rabi frequency at radius r.
    pub fn rabi(&self, r: f64) -> f64 {
        self.rabi_center * self.mode.shape(r)
    }

    /// G0 = G(a), the Rabi frequency at the fiber wall.
    pub fn rabi_at_wall(&self) -> f64 {
        self.rabi(self.mode.radius)
    }

    /// Radius outside the fiber where G(r) falls to `rabi`, if any.
    pub fn radius_where(&self, rabi: f64) -> Option<f64> {
        let a = self.mode.radius;
        if rabi >= self.rabi(a) || rabi <= 0.0 {
            return None;
        }
        let hi = a + 800.0 / self.mode.phi;
        numeric::brent(|r| self.rabi(r) - rabi, a, hi, 1e-15 * hi, 200).ok()
    }

    /// Same mode with the control switched off.
    pub fn off(&self) -> Self {
        Self { mode: self.mode, rabi_center: 0.0 }
    }
}

/// Control mode from a peak field on the axis and the transition dipole.
pub fn control_mode(
    fiber: &FiberGeometry,
    background_index: f64,
    wavelength: f64,
    peak_field: f64,
    dipole: f64,
    tail: TailModel,
) -> Result<ControlField, DressedError> {
    let rabi = dipole * peak_field / crate::medium::HBAR;
    ControlField::new(fiber, background_index, wavelength, tail, RabiReference::Center, rabi)
}

/// Knobs of the dressed-mode iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedSettings {
    pub averaging: AveragingForm,
    /// Probe profile used for the average; β always comes from the fiber equation.
    pub geometry: Geometry,
    pub tail: TailModel,
    /// Outer radius of the medium; `None` for unbounded.
    pub medium_extent: Option<f64>,
    pub damping: f64,
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for DressedSettings {
    fn default() -> Self {
        Self {
            averaging: AveragingForm::Linear,
            geometry: Geometry::Cylindrical,
            tail: TailModel::Exponential,
            medium_extent: None,
            damping: 0.5,
            tolerance: 1e-10,
            max_iter: 200,
        }
    }
}

/// Self-consistent probe mode at one detuning.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedMode {
    pub delta: f64,
    /// Probe angular frequency ωp = ω0 - δ.
    pub omega: f64,
    pub beta: f64,
    pub n_bar: Complex64,
    /// Fiber-equation solution giving β.
    pub probe: ModeSolution,
    /// Profile used to average the outside index.
    pub profile: ModeSolution,
    pub b_outside: f64,
    pub iterations: usize,
    pub history: Vec<Complex64>,
}

impl DressedMode {
    /// Mode power attenuation rate 2 k b Im n̄ (1/m).
    pub fn attenuation(&self) -> f64 {
        2.0 * self.probe.k * self.b_outside * self.n_bar.im
    }
}

/// Mode-weighted average of the outside index for a fixed probe profile.
pub fn average_index(
    profile: &ModeSolution,
    control: &ControlField,
    medium: &Medium,
    delta: f64,
    form: AveragingForm,
    medium_extent: Option<f64>,
) -> Result<Complex64, DressedError> {
    let a = profile.radius;
    let mut end = profile.tail_extent();
    if let Some(r) = medium_extent {
        end = end.min(r);
    }
    if end <= a {
        return Err(DressedError::InvalidParameter { name: "medium_extent", value: end });
    }
    let failure: RefCell<Option<MediumError>> = RefCell::new(None);
    let integrand = |r: f64| {
        let e = profile.shape(r);
        let w = e * e * profile.weight(r);
        match medium.index(control.rabi(r), delta) {
            Ok(n) => {
                let v = match form {
                    AveragingForm::Linear => n,
                    AveragingForm::Quadratic => n * n,
                };
                [w, w * v.re, w * v.im]
            }
            Err(err) => {
                failure.borrow_mut().get_or_insert(err);
                [w, 0.0, 0.0]
            }
        }
    };
    // Pieces a few decay lengths long let the adaptive rule find the
    // narrow features where G(r) crosses the ground-state rate.
    let pieces = 24;
    let mut total = [0.0; 3];
    let mut lo = a;
    let span = end - a;
    for i in 1..=pieces {
        let t = i as f64 / pieces as f64;
        let hi = if i == pieces { end } else { a + span * t * t };
        let part = numeric::integrate(integrand, lo, hi, 0.0, 1e-13)?;
        for j in 0..3 {
            total[j] += part[j];
        }
        lo = hi;
    }
    if let Some(err) = failure.into_inner() {
        return Err(err.into());
    }
    let mean = Complex64::new(total[1], total[2]) / total[0];
    Ok(match form {
        AveragingForm::Linear => mean,
        AveragingForm::Quadratic => mean.sqrt(),
    })
}

fn probe_modes(
    fiber: &FiberGeometry,
    n_re: f64,
    wavelength: f64,
    settings: &DressedSettings,
) -> Result<(ModeSolution, ModeSolution), DressedError> {
    let probe = fiber::solve_mode(fiber, n_re, wavelength, Geometry::Cylindrical, settings.tail)?;
    let profile = match settings.geometry {
        Geometry::Cylindrical => probe,
        Geometry::Planar => fiber::solve_mode(fiber, n_re, wavelength, Geometry::Planar, settings.tail)?,
    };
    Ok((probe, profile))
}

/// Damped fixed-point iteration n̄ ← n̄ + λ(F(n̄) - n̄), starting from the
/// background index.
pub fn self_consistent_mode(
    fiber: &FiberGeometry,
    medium: &Medium,
    control: &ControlField,
    omega0: f64,
    delta: f64,
    settings: &DressedSettings,
) -> Result<DressedMode, DressedError> {
    self_consistent_mode_from(fiber, medium, control, omega0, delta, settings, None)
}

/// As [`self_consistent_mode`] with an optional starting index.
pub fn self_consistent_mode_from(
    fiber: &FiberGeometry,
    medium: &Medium,
    control: &ControlField,
    omega0: f64,
    delta: f64,
    settings: &DressedSettings,
    start: Option<Complex64>,
) -> Result<DressedMode, DressedError> {
    if !(settings.damping > 0.0 && settings.damping <= 1.0) {
        return Err(DressedError::InvalidParameter { name: "damping", value: settings.damping });
    }
    let omega = omega0 - delta;
    if !(omega > 0.0) {
        return Err(DressedError::InvalidParameter { name: "probe frequency", value: omega });
    }
    let wavelength = 2.0 * PI * SPEED_OF_LIGHT / omega;
    let mut n_bar = start.unwrap_or(Complex64::new(medium.background_index(), 0.0));
    let mut history = Vec::with_capacity(settings.max_iter);
    let mut last_step = f64::INFINITY;
    for it in 1..=settings.max_iter {
        if !(n_bar.re < fiber.n_fiber) || !n_bar.re.is_finite() {
            return Err(DressedError::BracketLost { n_bar, n_fiber: fiber.n_fiber });
        }
        let (probe, profile) = probe_modes(fiber, n_bar.re, wavelength, settings)?;
        let next = average_index(&profile, control, medium, delta, settings.averaging, settings.medium_extent)?;
        history.push(next);
        last_step = (next - n_bar).norm();
        if (next.re - n_bar.re).abs() < settings.tolerance && (next.im - n_bar.im).abs() < settings.tolerance {
            let (probe, profile) =
                if next.re == n_bar.re { (probe, profile) } else { probe_modes(fiber, next.re, wavelength, settings)? };
            return Ok(DressedMode {
                delta,
                omega,
                beta: probe.beta,
                n_bar: next,
                b_outside: profile.energy_fraction_outside()?,
                probe,
                profile,
                iterations: it,
                history,
            });
        }
        n_bar += settings.damping * (next - n_bar);
    }
    Err(DressedError::NoConvergence { history, last_step })
}

/// One row of a dispersion scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanPoint {
    pub delta: f64,
    pub result: Result<DressedMode, DressedError>,
}

/// Dressed modes over a detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub omega0: f64,
    pub gamma: f64,
    pub points: Vec<ScanPoint>,
}

impl ScanResult {
    /// Successful points only.
    pub fn modes(&self) -> impl Iterator<Item = &DressedMode> {
        self.points.iter().filter_map(|p| p.result.as_ref().ok())
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.result.is_err()).count()
    }
}

/// Solve every detuning independently (in parallel); results are identical
/// for any thread count.
pub fn dispersion_scan(
    fiber: &FiberGeometry,
    medium: &Medium,
    control: &ControlField,
    omega0: f64,
    deltas: &[f64],
    settings: &DressedSettings,
) -> ScanResult {
    let points = deltas
        .par_iter()
        .map(|&delta| ScanPoint {
            delta,
            result: self_consistent_mode(fiber, medium, control, omega0, delta, settings),
        })
        .collect();
    ScanResult { omega0, gamma: medium.gamma(), points }
}

/// Evenly spaced detunings from `lo` to `hi` inclusive.
pub fn detuning_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![0.5 * (lo + hi)];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}
