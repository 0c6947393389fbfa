//! Scenario files: TOML with mandatory unit tags, resolved into SI values.
//!
//! Widths (decay, inhomogeneous broadening, dephasing or mixing) are given as
//! full widths and stored as half-widths. Rates tagged "gamma" are relative
//! to the probe-transition half-width of the medium.

pub mod presets;
pub mod units;

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bpm::Propagator;
use crate::dressed::{AveragingForm, ControlField, DressedError, DressedSettings, RabiReference};
use crate::fiber::{FiberGeometry, Geometry, TailModel};
use crate::medium::{LambdaEitMedium, Medium, OrthoIndexForm, OrthoParaMedium, SPEED_OF_LIGHT};

pub use units::FrequencyConvention;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{0}")]
    Parse(String),
    #[error("{field}: value {value:?} has no unit tag")]
    MissingUnit { field: String, value: String },
    #[error("{field}: unknown unit {unit:?} (expected one of {expected})")]
    UnknownUnit { field: String, unit: String, expected: String },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
    #[error("unknown preset {0:?} (available: fig2, ortho_h2)")]
    UnknownPreset(String),
}

impl ConfigError {
    pub fn invalid(field: &str, reason: impl Into<String>) -> Self {
        Self::Invalid { field: field.to_string(), reason: reason.into() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    conventions: RawConventions,
    fiber: RawFiber,
    medium: RawMedium,
    probe: RawProbe,
    control: RawControl,
    #[serde(default)]
    scan: RawScan,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    group_velocity: RawGroupVelocity,
    #[serde(default)]
    bpm: RawBpm,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConventions {
    frequency_convention: Option<String>,
    zeta_c: Option<f64>,
    b_direction: Option<String>,
    averaging_form: Option<String>,
    averaging_geometry: Option<String>,
    tail_model: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFiber {
    radius: Option<String>,
    diameter: Option<String>,
    n_fiber: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "model", rename_all = "snake_case")]
enum RawMedium {
    Lambda {
        background_index: f64,
        xi: f64,
        gamma1_full: String,
        gamma2_full: String,
        dephasing_full: String,
        control_detuning: String,
    },
    OrthoPara {
        density: String,
        dipole: String,
        decay_full: String,
        inhomogeneous_full: String,
        mixing_full: String,
        zeeman: String,
        control_detuning: String,
        n_para: f64,
        #[serde(default)]
        index_form: Option<String>,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProbe {
    wavelength: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawControl {
    wavelength: String,
    #[serde(default)]
    reference: Option<String>,
    rabi: Option<String>,
    peak_field: Option<String>,
    dipole: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawScan {
    detuning_min: Option<String>,
    detuning_max: Option<String>,
    points: Option<usize>,
    operating_detuning: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    damping: Option<f64>,
    tolerance: Option<f64>,
    max_iterations: Option<usize>,
    stencil: Option<String>,
    medium_extent: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGroupVelocity {
    length: Option<String>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawBpm {
    cells_per_radius: Option<usize>,
    num_x: Option<usize>,
    dz: Option<String>,
    length: Option<String>,
    propagator: Option<String>,
    launch: Option<String>,
    launch_fwhm: Option<String>,
    record_every: Option<usize>,
    snapshots: Option<usize>,
    fit_fraction: Option<f64>,
    absorber_fraction: Option<f64>,
}

/// Which fraction of the power the reported b refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BDirection {
    #[default]
    Outside,
    Inside,
}

/// Switches between readings of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conventions {
    pub frequency: FrequencyConvention,
    pub zeta_c: f64,
    pub b_direction: BDirection,
    pub averaging: AveragingForm,
    pub geometry: Geometry,
    pub tail: TailModel,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            frequency: FrequencyConvention::Cycles,
            zeta_c: 2.405,
            b_direction: BDirection::Outside,
            averaging: AveragingForm::Linear,
            geometry: Geometry::Cylindrical,
            tail: TailModel::Exponential,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlSpec {
    pub wavelength: f64,
    pub reference: RabiReference,
    /// Rabi frequency at the reference point (rad/s).
    pub rabi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub detuning_min: f64,
    pub detuning_max: f64,
    pub points: usize,
    pub operating_detuning: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSpec {
    pub damping: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Finite-difference step in ωp (rad/s).
    pub stencil: f64,
    pub medium_extent: Option<f64>,
}

/// Initial field of a propagation run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Launch {
    #[default]
    Gaussian,
    /// Slab mode of the dressed index.
    Mode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpmSpec {
    pub cells_per_radius: usize,
    pub num_x: usize,
    pub dz: Option<f64>,
    pub length: f64,
    pub propagator: Propagator,
    pub launch: Launch,
    pub launch_fwhm: Option<f64>,
    pub record_every: usize,
    pub snapshots: usize,
    pub fit_fraction: f64,
    pub absorber_fraction: f64,
}

/// Fully resolved scenario in SI units (rates in rad/s, half-widths).
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: Option<String>,
    pub conventions: Conventions,
    pub fiber: FiberGeometry,
    pub medium: Medium,
    pub probe_wavelength: f64,
    pub control: ControlSpec,
    pub scan: ScanSpec,
    pub solver: SolverSpec,
    pub group_velocity_length: f64,
    pub bpm: BpmSpec,
}

fn choice<T: Copy>(field: &str, value: Option<&str>, default: T, options: &[(&str, T)]) -> Result<T, ConfigError> {
    match value {
        None => Ok(default),
        Some(v) => options.iter().find(|(k, _)| *k == v).map(|(_, t)| *t).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(k, _)| *k).collect();
            ConfigError::invalid(field, format!("unknown value {v:?} (expected {})", names.join(" | ")))
        }),
    }
}

fn name_of<T: PartialEq + Copy>(value: T, options: &[(&'static str, T)]) -> &'static str {
    options.iter().find(|(_, t)| *t == value).map(|(k, _)| *k).unwrap_or("?")
}

const B_DIRECTIONS: [(&str, BDirection); 2] = [("outside", BDirection::Outside), ("inside", BDirection::Inside)];
const AVERAGING: [(&str, AveragingForm); 2] =
    [("linear", AveragingForm::Linear), ("quadratic", AveragingForm::Quadratic)];
const GEOMETRIES: [(&str, Geometry); 2] = [("radial", Geometry::Cylindrical), ("planar", Geometry::Planar)];
const TAILS: [(&str, TailModel); 2] = [("exponential", TailModel::Exponential), ("bessel", TailModel::Bessel)];
const REFERENCES: [(&str, RabiReference); 2] = [("center", RabiReference::Center), ("wall", RabiReference::Wall)];
const PROPAGATORS: [(&str, Propagator); 2] = [("fresnel", Propagator::Fresnel), ("wide_angle", Propagator::WideAngle)];
const LAUNCHES: [(&str, Launch); 2] = [("gaussian", Launch::Gaussian), ("mode", Launch::Mode)];
const FORMS: [(&str, OrthoIndexForm); 2] =
    [("exact", OrthoIndexForm::Exact), ("linearized", OrthoIndexForm::Linearized)];

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(field, format!("must be non-negative and finite, got {v}")))
    }
}

impl Scenario {
    /// Parse and validate scenario text.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        Self::resolve(raw)
    }

    /// Read a scenario file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::from_toml(&text)
    }

    fn resolve(raw: RawScenario) -> Result<Self, ConfigError> {
        use units::*;
        let c = &raw.conventions;
        let frequency = match &c.frequency_convention {
            Some(s) => FrequencyConvention::parse("conventions.frequency_convention", s)?,
            None => FrequencyConvention::Cycles,
        };
        let conventions = Conventions {
            frequency,
            zeta_c: positive("conventions.zeta_c", c.zeta_c.unwrap_or(2.405))?,
            b_direction: choice(
                "conventions.b_direction",
                c.b_direction.as_deref(),
                BDirection::Outside,
                &B_DIRECTIONS,
            )?,
            averaging: choice(
                "conventions.averaging_form",
                c.averaging_form.as_deref(),
                AveragingForm::Linear,
                &AVERAGING,
            )?,
            geometry: choice(
                "conventions.averaging_geometry",
                c.averaging_geometry.as_deref(),
                Geometry::Cylindrical,
                &GEOMETRIES,
            )?,
            tail: choice("conventions.tail_model", c.tail_model.as_deref(), TailModel::Exponential, &TAILS)?,
        };

        let radius = match (&raw.fiber.radius, &raw.fiber.diameter) {
            (Some(r), None) => length("fiber.radius", r)?,
            (None, Some(d)) => 0.5 * length("fiber.diameter", d)?,
            _ => return Err(ConfigError::invalid("fiber", "give exactly one of radius or diameter")),
        };
        positive("fiber.radius", radius)?;
        if !(raw.fiber.n_fiber.is_finite() && raw.fiber.n_fiber >= 1.0) {
            return Err(ConfigError::invalid("fiber.n_fiber", format!("must be >= 1, got {}", raw.fiber.n_fiber)));
        }
        let fiber = FiberGeometry { radius, n_fiber: raw.fiber.n_fiber };

        let medium = match &raw.medium {
            RawMedium::Lambda { background_index, xi, gamma1_full, gamma2_full, dephasing_full, control_detuning } => {
                let g1 = 0.5 * rate("medium.gamma1_full", gamma1_full, frequency, None)?;
                let g2 = 0.5 * rate("medium.gamma2_full", gamma2_full, frequency, None)?;
                positive("medium.gamma1_full", g1)?;
                positive("medium.gamma2_full", g2)?;
                let dephasing = 0.5 * rate("medium.dephasing_full", dephasing_full, frequency, Some(g1))?;
                let detuning = rate("medium.control_detuning", control_detuning, frequency, Some(g1))?;
                Medium::Lambda(LambdaEitMedium {
                    background_index: positive("medium.background_index", *background_index)?,
                    xi: non_negative("medium.xi", *xi)?,
                    gamma1: g1,
                    gamma2: g2,
                    dephasing: non_negative("medium.dephasing_full", dephasing)?,
                    control_detuning: detuning,
                })
            }
            RawMedium::OrthoPara {
                density: n,
                dipole: d,
                decay_full,
                inhomogeneous_full,
                mixing_full,
                zeeman,
                control_detuning,
                n_para,
                index_form,
            } => {
                let natural = 0.5 * rate("medium.decay_full", decay_full, frequency, None)?;
                let inhom = 0.5 * rate("medium.inhomogeneous_full", inhomogeneous_full, frequency, None)?;
                non_negative("medium.decay_full", natural)?;
                non_negative("medium.inhomogeneous_full", inhom)?;
                let gamma = positive("medium.decay_full + medium.inhomogeneous_full", natural + inhom)?;
                let mixing = 0.5 * rate("medium.mixing_full", mixing_full, frequency, Some(gamma))?;
                Medium::OrthoPara(OrthoParaMedium {
                    density: positive("medium.density", density("medium.density", n)?)?,
                    dipole: positive("medium.dipole", dipole("medium.dipole", d)?)?,
                    gamma_natural: natural,
                    gamma_inhomogeneous: inhom,
                    mixing: non_negative("medium.mixing_full", mixing)?,
                    zeeman: rate("medium.zeeman", zeeman, frequency, Some(gamma))?,
                    control_detuning: rate("medium.control_detuning", control_detuning, frequency, Some(gamma))?,
                    n_para: positive("medium.n_para", *n_para)?,
                    form: choice("medium.index_form", index_form.as_deref(), OrthoIndexForm::Exact, &FORMS)?,
                })
            }
        };
        let gamma = medium.gamma();
        if fiber.n_fiber <= medium.background_index() {
            return Err(ConfigError::invalid(
                "fiber.n_fiber",
                format!("{} does not exceed the background index {}", fiber.n_fiber, medium.background_index()),
            ));
        }

        let probe_wavelength = positive("probe.wavelength", length("probe.wavelength", &raw.probe.wavelength)?)?;

        let rc = &raw.control;
        let reference = choice("control.reference", rc.reference.as_deref(), RabiReference::Center, &REFERENCES)?;
        let rabi = match (&rc.rabi, &rc.peak_field, &rc.dipole) {
            (Some(r), None, None) => rate("control.rabi", r, frequency, Some(gamma))?,
            (None, Some(e), Some(d)) => {
                field_strength("control.peak_field", e)? * dipole("control.dipole", d)? / crate::medium::HBAR
            }
            _ => return Err(ConfigError::invalid("control", "give either rabi, or peak_field together with dipole")),
        };
        let control = ControlSpec {
            wavelength: positive("control.wavelength", length("control.wavelength", &rc.wavelength)?)?,
            reference,
            rabi: non_negative("control.rabi", rabi)?,
        };

        let rs = &raw.scan;
        let opt_rate = |field: &str, v: &Option<String>, default: f64| -> Result<f64, ConfigError> {
            match v {
                Some(s) => rate(field, s, frequency, Some(gamma)),
                None => Ok(default),
            }
        };
        let scan = ScanSpec {
            detuning_min: opt_rate("scan.detuning_min", &rs.detuning_min, -3.0 * gamma)?,
            detuning_max: opt_rate("scan.detuning_max", &rs.detuning_max, 3.0 * gamma)?,
            points: rs.points.unwrap_or(201),
            operating_detuning: opt_rate("scan.operating_detuning", &rs.operating_detuning, 0.0)?,
        };
        if scan.points < 2 {
            return Err(ConfigError::invalid("scan.points", "need at least 2 points"));
        }
        if !(scan.detuning_max > scan.detuning_min) {
            return Err(ConfigError::invalid("scan.detuning_max", "must exceed scan.detuning_min"));
        }

        let so = &raw.solver;
        let damping = so.damping.unwrap_or(0.5);
        if !(damping > 0.0 && damping <= 1.0) {
            return Err(ConfigError::invalid("solver.damping", format!("must lie in (0, 1], got {damping}")));
        }
        let medium_extent = match &so.medium_extent {
            Some(s) => Some(positive("solver.medium_extent", length("solver.medium_extent", s)?)?),
            None => None,
        };
        if let Some(r) = medium_extent {
            if r <= fiber.radius {
                return Err(ConfigError::invalid("solver.medium_extent", "must exceed the fiber radius"));
            }
        }
        let solver = SolverSpec {
            damping,
            tolerance: positive("solver.tolerance", so.tolerance.unwrap_or(1e-10))?,
            max_iterations: so.max_iterations.unwrap_or(200).max(1),
            stencil: positive("solver.stencil", opt_rate("solver.stencil", &so.stencil, 1e-3 * gamma)?)?,
            medium_extent,
        };

        let group_velocity_length = match &raw.group_velocity.length {
            Some(s) => positive("group_velocity.length", length("group_velocity.length", s)?)?,
            None => 50e-6,
        };

        let rb = &raw.bpm;
        let opt_len = |field: &str, v: &Option<String>| -> Result<Option<f64>, ConfigError> {
            v.as_ref().map(|s| length(field, s).and_then(|x| positive(field, x))).transpose()
        };
        let bpm = BpmSpec {
            cells_per_radius: rb.cells_per_radius.unwrap_or(16),
            num_x: rb.num_x.unwrap_or(512),
            dz: opt_len("bpm.dz", &rb.dz)?,
            length: opt_len("bpm.length", &rb.length)?.unwrap_or(200e-6),
            propagator: choice("bpm.propagator", rb.propagator.as_deref(), Propagator::Fresnel, &PROPAGATORS)?,
            launch: choice("bpm.launch", rb.launch.as_deref(), Launch::Gaussian, &LAUNCHES)?,
            launch_fwhm: opt_len("bpm.launch_fwhm", &rb.launch_fwhm)?,
            record_every: rb.record_every.unwrap_or(1000).max(1),
            snapshots: rb.snapshots.unwrap_or(20),
            fit_fraction: rb.fit_fraction.unwrap_or(0.25),
            absorber_fraction: rb.absorber_fraction.unwrap_or(0.1),
        };
        if 2 * bpm.cells_per_radius < 16 {
            return Err(ConfigError::invalid("bpm.cells_per_radius", "need at least 16 samples across the core"));
        }
        if bpm.num_x < 256 || !bpm.num_x.is_power_of_two() {
            return Err(ConfigError::invalid("bpm.num_x", "must be a power of two >= 256"));
        }
        if !(bpm.fit_fraction > 0.0 && bpm.fit_fraction <= 1.0) {
            return Err(ConfigError::invalid("bpm.fit_fraction", "must lie in (0, 1]"));
        }
        if !(0.0..0.5).contains(&bpm.absorber_fraction) {
            return Err(ConfigError::invalid("bpm.absorber_fraction", "must lie in [0, 0.5)"));
        }

        Ok(Self {
            name: raw.name,
            description: raw.description,
            conventions,
            fiber,
            medium,
            probe_wavelength,
            control,
            scan,
            solver,
            group_velocity_length,
            bpm,
        })
    }

    /// Probe resonance ω0 = 2πc/λ0.
    pub fn omega0(&self) -> f64 {
        2.0 * std::f64::consts::PI * SPEED_OF_LIGHT / self.probe_wavelength
    }

    pub fn gamma(&self) -> f64 {
        self.medium.gamma()
    }

    pub fn dressed_settings(&self) -> DressedSettings {
        DressedSettings {
            averaging: self.conventions.averaging,
            geometry: self.conventions.geometry,
            tail: self.conventions.tail,
            medium_extent: self.solver.medium_extent,
            damping: self.solver.damping,
            tolerance: self.solver.tolerance,
            max_iter: self.solver.max_iterations,
        }
    }

    pub fn control_field(&self) -> Result<ControlField, DressedError> {
        ControlField::new(
            &self.fiber,
            self.medium.background_index(),
            self.control.wavelength,
            self.conventions.tail,
            self.control.reference,
            self.control.rabi,
        )
    }

    /// Detuning grid of the scan section.
    pub fn detunings(&self) -> Vec<f64> {
        crate::dressed::detuning_grid(self.scan.detuning_min, self.scan.detuning_max, self.scan.points)
    }

    /// Reported b for a computed outside fraction.
    pub fn reported_b(&self, outside: f64) -> f64 {
        match self.conventions.b_direction {
            BDirection::Outside => outside,
            BDirection::Inside => 1.0 - outside,
        }
    }

    /// Canonical TOML with every quantity in SI units; reloading it gives an
    /// identical scenario.
    pub fn to_toml(&self) -> String {
        let q = |v: f64, unit: &str| format!("\"{v:?} {unit}\"");
        let mut s = String::new();
        let _ = writeln!(s, "name = {:?}", self.name);
        if let Some(d) = &self.description {
            let _ = writeln!(s, "description = {d:?}");
        }
        let c = &self.conventions;
        let _ = writeln!(s, "\n[conventions]");
        let _ = writeln!(s, "frequency_convention = {:?}", c.frequency.name());
        let _ = writeln!(s, "zeta_c = {:?}", c.zeta_c);
        let _ = writeln!(s, "b_direction = {:?}", name_of(c.b_direction, &B_DIRECTIONS));
        let _ = writeln!(s, "averaging_form = {:?}", name_of(c.averaging, &AVERAGING));
        let _ = writeln!(s, "averaging_geometry = {:?}", name_of(c.geometry, &GEOMETRIES));
        let _ = writeln!(s, "tail_model = {:?}", name_of(c.tail, &TAILS));
        let _ = writeln!(s, "\n[fiber]\nradius = {}\nn_fiber = {:?}", q(self.fiber.radius, "m"), self.fiber.n_fiber);
        let _ = writeln!(s, "\n[medium]");
        match &self.medium {
            Medium::Lambda(m) => {
                let _ = writeln!(s, "model = \"lambda\"");
                let _ = writeln!(s, "background_index = {:?}", m.background_index);
                let _ = writeln!(s, "xi = {:?}", m.xi);
                let _ = writeln!(s, "gamma1_full = {}", q(2.0 * m.gamma1, "rad/s"));
                let _ = writeln!(s, "gamma2_full = {}", q(2.0 * m.gamma2, "rad/s"));
                let _ = writeln!(s, "dephasing_full = {}", q(2.0 * m.dephasing, "rad/s"));
                let _ = writeln!(s, "control_detuning = {}", q(m.control_detuning, "rad/s"));
            }
            Medium::OrthoPara(m) => {
                let _ = writeln!(s, "model = \"ortho_para\"");
                let _ = writeln!(s, "density = {}", q(m.density, "m^-3"));
                let _ = writeln!(s, "dipole = {}", q(m.dipole, "C m"));
                let _ = writeln!(s, "decay_full = {}", q(2.0 * m.gamma_natural, "rad/s"));
                let _ = writeln!(s, "inhomogeneous_full = {}", q(2.0 * m.gamma_inhomogeneous, "rad/s"));
                let _ = writeln!(s, "mixing_full = {}", q(2.0 * m.mixing, "rad/s"));
                let _ = writeln!(s, "zeeman = {}", q(m.zeeman, "rad/s"));
                let _ = writeln!(s, "control_detuning = {}", q(m.control_detuning, "rad/s"));
                let _ = writeln!(s, "n_para = {:?}", m.n_para);
                let _ = writeln!(s, "index_form = {:?}", name_of(m.form, &FORMS));
            }
        }
        let _ = writeln!(s, "\n[probe]\nwavelength = {}", q(self.probe_wavelength, "m"));
        let _ = writeln!(s, "\n[control]\nwavelength = {}", q(self.control.wavelength, "m"));
        let _ = writeln!(s, "reference = {:?}", name_of(self.control.reference, &REFERENCES));
        let _ = writeln!(s, "rabi = {}", q(self.control.rabi, "rad/s"));
        let sc = &self.scan;
        let _ = writeln!(s, "\n[scan]");
        let _ = writeln!(s, "detuning_min = {}", q(sc.detuning_min, "rad/s"));
        let _ = writeln!(s, "detuning_max = {}", q(sc.detuning_max, "rad/s"));
        let _ = writeln!(s, "points = {}", sc.points);
        let _ = writeln!(s, "operating_detuning = {}", q(sc.operating_detuning, "rad/s"));
        let so = &self.solver;
        let _ = writeln!(s, "\n[solver]");
        let _ = writeln!(s, "damping = {:?}", so.damping);
        let _ = writeln!(s, "tolerance = {:?}", so.tolerance);
        let _ = writeln!(s, "max_iterations = {}", so.max_iterations);
        let _ = writeln!(s, "stencil = {}", q(so.stencil, "rad/s"));
        if let Some(r) = so.medium_extent {
            let _ = writeln!(s, "medium_extent = {}", q(r, "m"));
        }
        let _ = writeln!(s, "\n[group_velocity]\nlength = {}", q(self.group_velocity_length, "m"));
        let b = &self.bpm;
        let _ = writeln!(s, "\n[bpm]");
        let _ = writeln!(s, "cells_per_radius = {}", b.cells_per_radius);
        let _ = writeln!(s, "num_x = {}", b.num_x);
        if let Some(dz) = b.dz {
            let _ = writeln!(s, "dz = {}", q(dz, "m"));
        }
        let _ = writeln!(s, "length = {}", q(b.length, "m"));
        let _ = writeln!(s, "propagator = {:?}", name_of(b.propagator, &PROPAGATORS));
        let _ = writeln!(s, "launch = {:?}", name_of(b.launch, &LAUNCHES));
        if let Some(w) = b.launch_fwhm {
            let _ = writeln!(s, "launch_fwhm = {}", q(w, "m"));
        }
        let _ = writeln!(s, "record_every = {}", b.record_every);
        let _ = writeln!(s, "snapshots = {}", b.snapshots);
        let _ = writeln!(s, "fit_fraction = {:?}", b.fit_fraction);
        let _ = writeln!(s, "absorber_fraction = {:?}", b.absorber_fraction);
        s
    }

    /// SHA-256 of the canonical form, hex-encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    /// Convention flags for provenance headers.
    pub fn convention_summary(&self) -> String {
        let c = &self.conventions;
        format!(
            "frequency_convention={} zeta_c={} b_direction={} averaging_form={} averaging_geometry={} tail_model={}",
            c.frequency.name(),
            c.zeta_c,
            name_of(c.b_direction, &B_DIRECTIONS),
            name_of(c.averaging, &AVERAGING),
            name_of(c.geometry, &GEOMETRIES),
            name_of(c.tail, &TAILS),
        )
    }
}
