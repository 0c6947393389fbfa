//! Optical response of the atomic or molecular medium around the fiber.
//!
//! All rates are half-widths in rad/s. Detuning δ = ω0 - ωp.

pub mod sixlevel;

use num_complex::Complex64;
use thiserror::Error;

pub use sixlevel::{liouvillian, steady_state, weak_probe_coherence, DensityMatrix, SixLevelDrive, SixLevelParams};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Vacuum permittivity (F/m).
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MediumError {
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("index denominator vanishes (|D| = {0:e})")]
    Singular(f64),
    #[error("steady-state solve failed: {0}")]
    SteadyState(String),
}

fn positive(name: &'static str, value: f64) -> Result<f64, MediumError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(MediumError::InvalidParameter { name, value })
    }
}

fn non_negative(name: &'static str, value: f64) -> Result<f64, MediumError> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(MediumError::InvalidParameter { name, value })
    }
}

/// Susceptibility scale ξ = N d²/(ħ ε0 γ).
pub fn xi_parameter(density: f64, dipole: f64, gamma: f64) -> Result<f64, MediumError> {
    positive("density", density)?;
    positive("dipole", dipole)?;
    positive("gamma", gamma)?;
    Ok(density * dipole * dipole / (HBAR * EPSILON_0 * gamma))
}

/// Field amplitude whose Rabi frequency d E/ħ equals `rabi`.
pub fn field_for_rabi(rabi: f64, dipole: f64) -> f64 {
    HBAR * rabi / dipole
}

/// Cycle-averaged intensity ½ n ε0 c |E|².
pub fn intensity(field: f64, index: f64) -> f64 {
    0.5 * index * EPSILON_0 * SPEED_OF_LIGHT * field * field
}

/// Power of a flat-top beam of the given intensity and diameter.
pub fn beam_power(intensity: f64, diameter: f64) -> f64 {
    intensity * std::f64::consts::PI * 0.25 * diameter * diameter
}

/// Three-level Λ medium in the weak-probe limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEitMedium {
    pub background_index: f64,
    pub xi: f64,
    /// Probe-transition half-width γ1.
    pub gamma1: f64,
    /// Control-transition half-width γ2.
    pub gamma2: f64,
    /// Ground-state dephasing Γ.
    pub dephasing: f64,
    /// Control detuning Δ.
    pub control_detuning: f64,
}

impl LambdaEitMedium {
    pub fn new(
        background_index: f64,
        xi: f64,
        gamma1: f64,
        gamma2: f64,
        dephasing: f64,
        control_detuning: f64,
    ) -> Result<Self, MediumError> {
        positive("background_index", background_index)?;
        non_negative("xi", xi)?;
        positive("gamma1", gamma1)?;
        positive("gamma2", gamma2)?;
        non_negative("dephasing", dephasing)?;
        if !control_detuning.is_finite() {
            return Err(MediumError::InvalidParameter { name: "control_detuning", value: control_detuning });
        }
        Ok(Self { background_index, xi, gamma1, gamma2, dephasing, control_detuning })
    }

    /// Complex index at Rabi frequency `rabi` and probe detuning `delta`.
    pub fn index(&self, rabi: f64, delta: f64) -> Result<Complex64, MediumError> {
        lambda_index(self, rabi, delta)
    }
}

/// n = n_bg + (ξ/2) iγ1(Γ - i(Δ-δ)) / [(γ1+γ2+iδ)(Γ - i(Δ-δ)) + G²].
pub fn lambda_index(m: &LambdaEitMedium, rabi: f64, delta: f64) -> Result<Complex64, MediumError> {
    let i = Complex64::i();
    if rabi == 0.0 {
        // Without control the ground-coherence factor cancels (two-level response).
        let den = Complex64::new(m.gamma1 + m.gamma2, delta);
        return Ok(m.background_index + 0.5 * m.xi * i * m.gamma1 / den);
    }
    let ground = Complex64::new(m.dephasing, -(m.control_detuning - delta));
    let den = Complex64::new(m.gamma1 + m.gamma2, delta) * ground + rabi * rabi;
    let scale = (m.gamma1 + m.gamma2).powi(2);
    if !(den.norm() > 1e-30 * scale) {
        return Err(MediumError::Singular(den.norm()));
    }
    Ok(m.background_index + 0.5 * m.xi * i * m.gamma1 * ground / den)
}

/// d(Re n)/dωp at two-photon resonance (Δ = δ = 0).
pub fn lambda_index_slope(m: &LambdaEitMedium, rabi: f64) -> f64 {
    let g2 = rabi * rabi;
    let gs = m.dephasing;
    0.5 * m.gamma1 * m.xi * (g2 - gs * gs) / (g2 + (m.gamma1 + m.gamma2) * gs).powi(2)
}

/// How the ortho/para index is formed from the coherence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrthoIndexForm {
    /// sqrt(n_para² + ξσ) on the principal branch.
    #[default]
    Exact,
    /// n_para + ξσ/(2 n_para).
    Linearized,
}

/// Six-level ortho-hydrogen dopant in a para-hydrogen host, weak probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrthoParaMedium {
    pub density: f64,
    pub dipole: f64,
    /// Natural half-width.
    pub gamma_natural: f64,
    /// Inhomogeneous half-width, added to the natural one.
    pub gamma_inhomogeneous: f64,
    /// Ground-state mixing rate Γ.
    pub mixing: f64,
    /// Zeeman shift Ω.
    pub zeeman: f64,
    /// Control detuning Δ.
    pub control_detuning: f64,
    pub n_para: f64,
    pub form: OrthoIndexForm,
}

impl OrthoParaMedium {
    pub fn validate(&self) -> Result<(), MediumError> {
        positive("density", self.density)?;
        positive("dipole", self.dipole)?;
        non_negative("gamma_natural", self.gamma_natural)?;
        non_negative("gamma_inhomogeneous", self.gamma_inhomogeneous)?;
        positive("gamma", self.gamma())?;
        non_negative("mixing", self.mixing)?;
        positive("n_para", self.n_para)?;
        for (name, v) in [("zeeman", self.zeeman), ("control_detuning", self.control_detuning)] {
            if !v.is_finite() {
                return Err(MediumError::InvalidParameter { name, value: v });
            }
        }
        Ok(())
    }

    /// Effective half-width γ used in the coherence.
    pub fn gamma(&self) -> f64 {
        self.gamma_natural + self.gamma_inhomogeneous
    }

    pub fn xi(&self) -> f64 {
        self.density * self.dipole * self.dipole / (HBAR * EPSILON_0 * self.gamma())
    }

    /// Normalized probe coherence σ26.
    pub fn coherence(&self, rabi: f64, delta: f64) -> Result<Complex64, MediumError> {
        weak_probe_coherence(self.gamma(), self.mixing, self.zeeman, rabi, delta, self.control_detuning)
    }

    pub fn index(&self, rabi: f64, delta: f64) -> Result<Complex64, MediumError> {
        let sigma = self.coherence(rabi, delta)?;
        Ok(ortho_index(self.n_para, self.xi(), sigma, self.form))
    }

    /// d(Re n)/dωp at δ = Δ = Ω = 0, from the linearized form.
    pub fn index_slope(&self, rabi: f64) -> f64 {
        let g = self.gamma();
        let gs = self.mixing;
        let g2 = rabi * rabi;
        let d0 = g2 + 4.0 * gs * (g + 2.0 * gs);
        self.xi() / (2.0 * self.n_para) * g * (g2 - 16.0 * gs * gs) / (d0 * d0)
    }
}

/// Index from the normalized coherence.
pub fn ortho_index(n_para: f64, xi: f64, sigma: Complex64, form: OrthoIndexForm) -> Complex64 {
    match form {
        OrthoIndexForm::Exact => (n_para * n_para + xi * sigma).sqrt(),
        OrthoIndexForm::Linearized => n_para + xi * sigma / (2.0 * n_para),
    }
}

/// Medium surrounding the fiber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Medium {
    Lambda(LambdaEitMedium),
    OrthoPara(OrthoParaMedium),
}

impl Medium {
    /// Complex index at local Rabi frequency `rabi` and probe detuning `delta`.
    pub fn index(&self, rabi: f64, delta: f64) -> Result<Complex64, MediumError> {
        match self {
            Medium::Lambda(m) => m.index(rabi, delta),
            Medium::OrthoPara(m) => m.index(rabi, delta),
        }
    }

    /// Index with the atoms removed.
    pub fn background_index(&self) -> f64 {
        match self {
            Medium::Lambda(m) => m.background_index,
            Medium::OrthoPara(m) => m.n_para,
        }
    }

    /// Probe-transition half-width that sets the detuning scale.
    pub fn gamma(&self) -> f64 {
        match self {
            Medium::Lambda(m) => m.gamma1,
            Medium::OrthoPara(m) => m.gamma(),
        }
    }

    pub fn xi(&self) -> f64 {
        match self {
            Medium::Lambda(m) => m.xi,
            Medium::OrthoPara(m) => m.xi(),
        }
    }

    /// Ground-state dephasing or mixing rate.
    pub fn ground_rate(&self) -> f64 {
        match self {
            Medium::Lambda(m) => m.dephasing,
            Medium::OrthoPara(m) => m.mixing,
        }
    }

    /// Rabi frequency below which the resonant index slope turns anomalous.
    pub fn slope_sign_boundary(&self) -> f64 {
        match self {
            Medium::Lambda(m) => m.dephasing,
            Medium::OrthoPara(m) => 4.0 * m.mixing,
        }
    }

    /// Same medium with the ground-state rate replaced.
    pub fn with_ground_rate(&self, rate: f64) -> Self {
        match *self {
            Medium::Lambda(mut m) => {
                m.dephasing = rate;
                Medium::Lambda(m)
            }
            Medium::OrthoPara(mut m) => {
                m.mixing = rate;
                Medium::OrthoPara(m)
            }
        }
    }
}
