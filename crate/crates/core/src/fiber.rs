//! Fundamental guided mode of a weakly guiding step-index fiber (cylindrical
//! LP01) and of the symmetric slab used by the two-dimensional propagator.

use std::f64::consts::PI;

use thiserror::Error;

use crate::numeric::{self, NumericError};
use crate::specfun::{self, J0_FIRST_ZERO};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FiberError {
    #[error("fiber index {n_fiber} must exceed the surrounding index {n_medium}")]
    NotGuiding { n_fiber: f64, n_medium: f64 },
    #[error("invalid {name}: {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("mode equation solve failed: {0}")]
    Solve(#[from] NumericError),
    #[error("closed-form fraction is outside its expansion range (kappa_f a = {kappa_f_a:.4} >= 2); value {value}")]
    ExpansionInvalid { kappa_f_a: f64, value: f64 },
    #[error("mode tail is not normalizable in double precision")]
    Unnormalizable,
    #[error("fiber is multimode at {wavelength:e} m: single-mode cutoff wavelength is {cutoff:e} m")]
    Multimode { wavelength: f64, cutoff: f64 },
}

/// Step-index fiber: radius and core index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberGeometry {
    pub radius: f64,
    pub n_fiber: f64,
}

impl FiberGeometry {
    pub fn new(radius: f64, n_fiber: f64) -> Result<Self, FiberError> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(FiberError::InvalidParameter { name: "radius", value: radius });
        }
        if !(n_fiber.is_finite() && n_fiber >= 1.0) {
            return Err(FiberError::InvalidParameter { name: "n_fiber", value: n_fiber });
        }
        Ok(Self { radius, n_fiber })
    }
}

/// Transverse geometry of the guided mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Geometry {
    /// Circular step-index fiber, weights r dr.
    #[default]
    Cylindrical,
    /// Symmetric slab of half-width a, weights dx.
    Planar,
}

/// Field model outside the core.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TailModel {
    /// J0(κf a) exp(-φ (r - a)) with φ = κm K1/K0 (slab: φ = κm).
    #[default]
    Exponential,
    /// J0(κf a) K0(κm r)/K0(κm a). Same as exponential for the slab.
    Bessel,
}

/// Single-mode cutoff wavelength 2πa·NA/ζc.
pub fn single_mode_cutoff(fiber: &FiberGeometry, n_medium: f64, zeta_c: f64) -> Result<f64, FiberError> {
    if fiber.n_fiber <= n_medium {
        return Err(FiberError::NotGuiding { n_fiber: fiber.n_fiber, n_medium });
    }
    if !(zeta_c > 0.0) {
        return Err(FiberError::InvalidParameter { name: "zeta_c", value: zeta_c });
    }
    let na = (fiber.n_fiber.powi(2) - n_medium.powi(2)).sqrt();
    Ok(2.0 * PI * fiber.radius * na / zeta_c)
}

/// Solved fundamental mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSolution {
    pub geometry: Geometry,
    pub tail: TailModel,
    pub radius: f64,
    pub n_fiber: f64,
    /// Real surrounding index the mode was solved against.
    pub n_medium: f64,
    /// Free-space wavenumber.
    pub k: f64,
    pub beta: f64,
    pub kappa_f: f64,
    /// Outside decay constant κm; may underflow to zero for very thin cores.
    pub kappa_m: f64,
    /// ln(κm a), finite even when κm underflows.
    pub ln_kappa_m_a: f64,
    /// Exponential-tail decay constant φ.
    pub phi: f64,
    /// Normalized frequency k a sqrt(nf² - nm²).
    pub varphi: f64,
    /// Residual of the characteristic equation divided by k.
    pub residual: f64,
    /// Constant multiplying the unnormalized shape to give unit power.
    pub norm: f64,
}

impl ModeSolution {
    pub fn wavelength(&self) -> f64 {
        2.0 * PI / self.k
    }

    pub fn effective_index(&self) -> f64 {
        self.beta / self.k
    }

    /// Eq.-6 style amplitude A such that the profile has unit power.
    pub fn amplitude(&self) -> f64 {
        let u = self.kappa_f * self.radius;
        if self.kappa_m == 0.0 {
            return f64::INFINITY;
        }
        self.norm * self.varphi * PI.sqrt() * specfun::j1(u) / self.kappa_m
    }

    /// Unnormalized field, equal to 1 on the axis.
    pub fn shape(&self, r: f64) -> f64 {
        let r = r.abs();
        let a = self.radius;
        match self.geometry {
            Geometry::Cylindrical => {
                if r <= a {
                    specfun::j0(self.kappa_f * r)
                } else {
                    specfun::j0(self.kappa_f * a) * self.tail_factor(r)
                }
            }
            Geometry::Planar => {
                if r <= a {
                    (self.kappa_f * r).cos()
                } else {
                    (self.kappa_f * a).cos() * (-self.phi * (r - a)).exp()
                }
            }
        }
    }

    /// Field normalized to unit power (2π∫E² r dr = 1 or ∫E² dx = 1).
    pub fn field(&self, r: f64) -> f64 {
        self.norm * self.shape(r)
    }

    /// Tail factor outside the core, equal to 1 at r = a.
    fn tail_factor(&self, r: f64) -> f64 {
        let a = self.radius;
        match self.tail {
            TailModel::Exponential => (-self.phi * (r - a)).exp(),
            TailModel::Bessel => {
                let w = self.ln_kappa_m_a.exp();
                if w < 1e-200 {
                    // K0(z) ≈ -ln(z/2) - γE for vanishing z.
                    let c = std::f64::consts::LN_2 - 0.577_215_664_901_532_9 - self.ln_kappa_m_a;
                    (c - (r / a).ln()) / c
                } else {
                    let z = w * r / a;
                    let (ka, _) = specfun::k01_scaled(w);
                    let (kr, _) = specfun::k01_scaled(z);
                    kr / ka * (-(z - w)).exp()
                }
            }
        }
    }

    /// Point where the tail has decayed by e^-40 in power (quadrature cutoff).
    pub fn tail_extent(&self) -> f64 {
        let rate = match (self.geometry, self.tail) {
            (Geometry::Cylindrical, TailModel::Bessel) => self.kappa_m.min(self.phi),
            _ => self.phi,
        };
        self.radius + 20.0 / rate
    }

    /// Transverse weight of the geometry.
    pub fn weight(&self, r: f64) -> f64 {
        match self.geometry {
            Geometry::Cylindrical => r,
            Geometry::Planar => 1.0,
        }
    }

    /// Unnormalized (inside, outside) power integrals of the shape.
    fn shape_power(&self) -> Result<(f64, f64), FiberError> {
        let a = self.radius;
        let u = self.kappa_f * a;
        match self.geometry {
            Geometry::Cylindrical => {
                let (j0, j1) = specfun::j01(u);
                let inside = 0.5 * a * a * (j0 * j0 + j1 * j1);
                let outside = match self.tail {
                    TailModel::Exponential => j0 * j0 * (a / (2.0 * self.phi) + 1.0 / (4.0 * self.phi * self.phi)),
                    TailModel::Bessel => {
                        let w = self.ln_kappa_m_a.exp();
                        if w < 1e-150 {
                            return Err(FiberError::Unnormalizable);
                        }
                        let ratio = specfun::k1_over_k0(w);
                        0.5 * a * a * j0 * j0 * (ratio * ratio - 1.0)
                    }
                };
                Ok((inside, outside))
            }
            Geometry::Planar => {
                let inside = if u == 0.0 { a } else { 0.5 * a + (2.0 * u).sin() / (4.0 * self.kappa_f) };
                let c = u.cos();
                Ok((inside, c * c / (2.0 * self.phi)))
            }
        }
    }

    /// Fraction of power outside the core by quadrature.
    pub fn energy_fraction_outside_numeric(&self) -> Result<f64, FiberError> {
        let a = self.radius;
        let f = |r: f64| {
            let e = self.shape(r);
            e * e * self.weight(r)
        };
        let inside = numeric::integrate_scalar(f, 0.0, a, 1e-12)?;
        let end = self.tail_extent();
        // Split the tail so the adaptive rule sees the decay scale.
        let mut outside = 0.0;
        let mut lo = a;
        let step = (end - a) / 8.0;
        for i in 1..=8 {
            let hi = if i == 8 { end } else { a + step * i as f64 };
            outside += numeric::integrate_scalar(f, lo, hi, 1e-12)?;
            lo = hi;
        }
        Ok(outside / (inside + outside))
    }

    /// Fraction of power outside the core from the analytic power integrals.
    pub fn energy_fraction_outside(&self) -> Result<f64, FiberError> {
        let (i, o) = self.shape_power()?;
        Ok(o / (i + o))
    }

    /// Closed-form small-argument estimate of the outside fraction.
    pub fn energy_fraction_outside_closed_form(&self) -> Result<f64, FiberError> {
        energy_fraction_outside_closed_form(self.kappa_f, self.phi, self.radius)
    }
}

/// Outside power fraction from the two-term J0 expansion inside and an
/// exponential tail outside.
pub fn energy_fraction_outside_closed_form(kappa_f: f64, phi: f64, radius: f64) -> Result<f64, FiberError> {
    let t = kappa_f * kappa_f * radius * radius / 4.0;
    let value = if t == 0.0 {
        // Limit of the bracket (1/(1-t)² + t - 1)/t → 3.
        1.0 / (1.0 + 2.0 * phi * phi * radius * radius / (1.0 + 2.0 * phi * radius))
    } else {
        let bracket = 1.0 / ((1.0 - t) * (1.0 - t)) + t - 1.0;
        let ratio = 8.0 * phi * phi / (3.0 * kappa_f * kappa_f * (1.0 + 2.0 * phi * radius));
        1.0 / (1.0 + ratio * bracket)
    };
    let kappa_f_a = kappa_f * radius;
    if kappa_f_a >= 2.0 {
        return Err(FiberError::ExpansionInvalid { kappa_f_a, value });
    }
    Ok(value)
}

/// Cylindrical characteristic function scaled by 1/a:
/// κf J1(κf a)/J0(κf a) - κm K1(κm a)/K0(κm a) with u = κf a, w = κm a.
fn cylindrical_residual(u: f64, ln_w: f64) -> f64 {
    let left = if u == 0.0 { 0.0 } else { u * specfun::j1_over_j0(u) };
    left - w_k1_over_k0(ln_w)
}

/// w K1(w)/K0(w) given ln w, valid when w underflows.
fn w_k1_over_k0(ln_w: f64) -> f64 {
    if ln_w < -600.0 {
        1.0 / (std::f64::consts::LN_2 - 0.577_215_664_901_532_9 - ln_w)
    } else {
        let w = ln_w.exp();
        w * specfun::k1_over_k0(w)
    }
}

/// Reject wavelengths below the single-mode cutoff; returns the cutoff.
pub fn require_single_mode(
    fiber: &FiberGeometry,
    n_medium: f64,
    wavelength: f64,
    zeta_c: f64,
) -> Result<f64, FiberError> {
    let cutoff = single_mode_cutoff(fiber, n_medium, zeta_c)?;
    if wavelength < cutoff {
        return Err(FiberError::Multimode { wavelength, cutoff });
    }
    Ok(cutoff)
}

/// Solve for the fundamental mode at free-space wavelength `wavelength`
/// surrounded by a medium of real index `n_medium`.
pub fn solve_mode(
    fiber: &FiberGeometry,
    n_medium: f64,
    wavelength: f64,
    geometry: Geometry,
    tail: TailModel,
) -> Result<ModeSolution, FiberError> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(FiberError::InvalidParameter { name: "wavelength", value: wavelength });
    }
    if !(n_medium.is_finite() && n_medium > 0.0) {
        return Err(FiberError::InvalidParameter { name: "n_medium", value: n_medium });
    }
    if fiber.n_fiber <= n_medium {
        return Err(FiberError::NotGuiding { n_fiber: fiber.n_fiber, n_medium });
    }
    let a = fiber.radius;
    let k = 2.0 * PI / wavelength;
    let varphi = k * a * (fiber.n_fiber.powi(2) - n_medium.powi(2)).sqrt();
    let (u, ln_w) = match geometry {
        Geometry::Cylindrical => solve_cylindrical(varphi)?,
        Geometry::Planar => solve_planar(varphi)?,
    };
    let w = ln_w.exp();
    let kappa_f = u / a;
    let kappa_m = w / a;
    let beta = k * n_medium * (1.0 + (kappa_m / (k * n_medium)).powi(2)).sqrt();
    let phi = match geometry {
        Geometry::Cylindrical => w_k1_over_k0(ln_w) / a,
        Geometry::Planar => kappa_m,
    };
    let residual = match geometry {
        Geometry::Cylindrical => cylindrical_residual(u, ln_w) / (a * k),
        Geometry::Planar => (u * u.sin() - w * u.cos()) / (a * k),
    };
    let mut sol = ModeSolution {
        geometry,
        tail: if geometry == Geometry::Planar { TailModel::Exponential } else { tail },
        radius: a,
        n_fiber: fiber.n_fiber,
        n_medium,
        k,
        beta,
        kappa_f,
        kappa_m,
        ln_kappa_m_a: ln_w,
        phi,
        varphi,
        residual,
        norm: 1.0,
    };
    let (i, o) = sol.shape_power().unwrap_or((f64::NAN, f64::NAN));
    let power = match geometry {
        Geometry::Cylindrical => 2.0 * PI * (i + o),
        Geometry::Planar => 2.0 * (i + o),
    };
    sol.norm = if power.is_finite() && power > 0.0 { 1.0 / power.sqrt() } else { f64::NAN };
    Ok(sol)
}

/// Returns (u, ln w) for the LP01 root with u² + w² = V².
fn solve_cylindrical(v: f64) -> Result<(f64, f64), FiberError> {
    if v >= 1.0 {
        // The root lies below the first J0 zero, where the residual has no pole.
        let hi = v.min(J0_FIRST_ZERO) * (1.0 - 1e-12);
        let f = |u: f64| {
            let w = (v * v - u * u).sqrt();
            cylindrical_residual(u, w.ln())
        };
        let u = numeric::brent(f, hi * 1e-9, hi, 1e-15 * v, 200)?;
        let w = (v * v - u * u).sqrt();
        Ok((u, w.ln()))
    } else {
        // Thin core: the root sits so close to cutoff that κm a may underflow,
        // so iterate on ln w instead.
        let (j0v, j1v) = specfun::j01(v);
        let estimate = std::f64::consts::LN_2 - 0.577_215_664_901_532_9 - j0v / (v * j1v);
        let lo = estimate.min(v.ln()) - 10.0;
        let hi = v.ln() - 1e-12;
        let u_of = |s: f64| {
            let w2 = if s < -300.0 { 0.0 } else { (2.0 * s).exp() };
            (v * v - w2).max(0.0).sqrt()
        };
        let f = |s: f64| cylindrical_residual(u_of(s), s);
        let s = numeric::brent(f, lo, hi, 1e-14 * lo.abs().max(1.0), 300)?;
        Ok((u_of(s), s))
    }
}

/// Returns (u, ln w) for the even TE0 slab root u tan u = w.
fn solve_planar(v: f64) -> Result<(f64, f64), FiberError> {
    let hi = v.min(0.5 * PI) * (1.0 - 1e-15);
    let f = |u: f64| {
        let w = (v * v - u * u).max(0.0).sqrt();
        u * u.sin() - w * u.cos()
    };
    let u = numeric::brent(f, 0.0, hi, 1e-16 * v, 200)?;
    let w = (v * v - u * u).sqrt();
    Ok((u, w.ln()))
}

/// Sampled transverse profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeProfile {
    pub r: Vec<f64>,
    pub field: Vec<f64>,
}

impl ModeProfile {
    /// Sample the unit-power field on [0, r_max] with `n` points.
    pub fn sample(sol: &ModeSolution, r_max: f64, n: usize) -> Self {
        let n = n.max(2);
        let r: Vec<f64> = (0..n).map(|i| r_max * i as f64 / (n - 1) as f64).collect();
        let field = r.iter().map(|&x| sol.field(x)).collect();
        Self { r, field }
    }
}
