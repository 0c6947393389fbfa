//! Two-dimensional (x, z) split-step Fourier beam propagation through a
//! slab cross-section of the fiber and its surrounding medium.
//!
//! The field is the slowly varying envelope A with E = A·exp(i∫K dz), where
//! K = k0·n̄ follows the mode-weighted mean index. The default Fresnel form
//! uses the paraxial kinetic operator and the lens exp(i(k0²Re n² - K²)dz/2K);
//! its eigenvalues are the exact scalar slab eigenvalues β with
//! β² = 2Kω - K² for phase rate ω.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::fiber::FiberGeometry;
use crate::numeric;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BpmError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("index map has {got} samples, grid has {expected}")]
    MapMismatch { expected: usize, got: usize },
    #[error("energy grew by a factor {growth:.6} in one step at z = {z:e} m in a passive medium")]
    Unstable { z: f64, growth: f64 },
    #[error("field became non-finite at z = {0:e} m")]
    NonFinite(f64),
}

/// Uniform cell-centered transverse grid, x_j = (j - N/2 + 1/2)·dx.
#[derive(Debug, Clone, PartialEq)]
pub struct BpmGrid {
    pub num_x: usize,
    pub dx: f64,
    pub dz: f64,
    pub wavelength: f64,
    pub x: Vec<f64>,
}

impl BpmGrid {
    /// Validates N (power of two, at least 256) and the step heuristic
    /// dz <= dx²·k0/2π, which keeps the kinetic phase at the grid Nyquist
    /// frequency below π/4 per step.
    pub fn new(num_x: usize, dx: f64, dz: f64, wavelength: f64) -> Result<Self, BpmError> {
        if num_x < 256 || !num_x.is_power_of_two() {
            return Err(BpmError::InvalidGrid(format!("num_x = {num_x} must be a power of two >= 256")));
        }
        for (name, v) in [("dx", dx), ("dz", dz), ("wavelength", wavelength)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(BpmError::InvalidGrid(format!("{name} = {v}")));
            }
        }
        let limit = dx * dx / wavelength;
        if dz > limit * (1.0 + 1e-12) {
            return Err(BpmError::InvalidGrid(format!("dz = {dz:e} m exceeds dx²·k/2π = {limit:e} m")));
        }
        let x = (0..num_x).map(|j| (j as f64 - num_x as f64 / 2.0 + 0.5) * dx).collect();
        Ok(Self { num_x, dx, dz, wavelength, x })
    }

    /// Grid resolving a fiber of radius a with `cells_per_radius` cells;
    /// dz defaults to the stability limit.
    pub fn for_fiber(
        radius: f64,
        cells_per_radius: usize,
        num_x: usize,
        wavelength: f64,
        dz: Option<f64>,
    ) -> Result<Self, BpmError> {
        if 2 * cells_per_radius < 16 {
            return Err(BpmError::InvalidGrid(format!(
                "{} samples across the core, need at least 16",
                2 * cells_per_radius
            )));
        }
        let dx = radius / cells_per_radius as f64;
        Self::new(num_x, dx, dz.unwrap_or(dx * dx / wavelength), wavelength)
    }

    pub fn k0(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.num_x as f64 * self.dx
    }

    /// Largest dz allowed by the step heuristic.
    pub fn max_stable_dz(&self) -> f64 {
        self.dx * self.dx / self.wavelength
    }

    /// Same grid with a different dz.
    pub fn with_dz(&self, dz: f64) -> Result<Self, BpmError> {
        Self::new(self.num_x, self.dx, dz, self.wavelength)
    }

    pub fn energy(&self, a: &[Complex64]) -> f64 {
        a.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx
    }
}

/// Complex refractive index sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexMap {
    pub n: Vec<Complex64>,
}

impl IndexMap {
    pub fn uniform(grid: &BpmGrid, n: Complex64) -> Self {
        Self { n: vec![n; grid.num_x] }
    }

    pub fn from_fn<F: Fn(f64) -> Complex64>(grid: &BpmGrid, f: F) -> Self {
        Self { n: grid.x.iter().map(|&x| f(x)).collect() }
    }

    /// Core of index nf for |x| < a, `outside(|x|)` beyond. Cells cut by the
    /// interface carry the cell average of n².
    pub fn fiber<F: Fn(f64) -> Complex64>(grid: &BpmGrid, fiber: &FiberGeometry, outside: F) -> Self {
        let a = fiber.radius;
        let nf2 = Complex64::new(fiber.n_fiber * fiber.n_fiber, 0.0);
        let n = grid
            .x
            .iter()
            .map(|&x| {
                let lo = x.abs() - 0.5 * grid.dx;
                let hi = x.abs() + 0.5 * grid.dx;
                if hi <= a {
                    Complex64::new(fiber.n_fiber, 0.0)
                } else if lo >= a {
                    outside(x.abs())
                } else {
                    let inside = (a - lo) / grid.dx;
                    let no = outside(a);
                    (inside * nf2 + (1.0 - inside) * no * no).sqrt()
                }
            })
            .collect();
        Self { n }
    }

    pub fn is_passive(&self) -> bool {
        self.n.iter().all(|v| v.im == 0.0)
    }
}

/// Form of the split-step operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Propagator {
    /// Paraxial kinetic step with the n² lens.
    #[default]
    Fresnel,
    /// exp(i(sqrt(K² - kx²) - K)dz) with the linear lens k0(n - n̄).
    WideAngle,
}

/// Field state during propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct BpmField {
    pub a: Vec<Complex64>,
    pub z: f64,
    /// ∫K dz accumulated so far.
    pub reference_phase: f64,
    /// -ln of the physical (lens) power transmission so far.
    pub attenuation: f64,
    /// ln of the cumulative factor restored by renormalization.
    pub restored: f64,
}

impl BpmField {
    pub fn new(a: Vec<Complex64>) -> Self {
        Self { a, z: 0.0, reference_phase: 0.0, attenuation: 0.0, restored: 0.0 }
    }

    /// |A| normalized to unit energy.
    pub fn normalized_magnitude(&self, grid: &BpmGrid) -> Vec<f64> {
        let e = grid.energy(&self.a).sqrt();
        self.a.iter().map(|v| v.norm() / e).collect()
    }

    /// Envelope value on the axis (mean of the two central cells).
    pub fn axis(&self) -> Complex64 {
        let n = self.a.len();
        0.5 * (self.a[n / 2 - 1] + self.a[n / 2])
    }
}

/// Gaussian whose intensity has the given FWHM, unit energy.
pub fn init_gaussian(grid: &BpmGrid, fwhm: f64) -> BpmField {
    let sigma = 0.5 * fwhm / 2f64.ln().sqrt();
    let a: Vec<Complex64> =
        grid.x.iter().map(|&x| Complex64::new((-0.5 * x * x / (sigma * sigma)).exp(), 0.0)).collect();
    let e = grid.energy(&a).sqrt();
    BpmField::new(a.into_iter().map(|v| v / e).collect())
}

/// Field from real samples f(x), normalized to unit energy.
pub fn init_profile<F: Fn(f64) -> f64>(grid: &BpmGrid, f: F) -> BpmField {
    let a: Vec<Complex64> = grid.x.iter().map(|&x| Complex64::new(f(x), 0.0)).collect();
    let e = grid.energy(&a).sqrt();
    BpmField::new(a.into_iter().map(|v| v / e).collect())
}

/// Adaptive reference index sqrt(∫|A|²(Re n)² / ∫|A|²).
pub fn adaptive_mean_index(field: &[Complex64], index: &IndexMap) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, n) in field.iter().zip(&index.n) {
        let w = a.norm_sqr();
        num += w * n.re * n.re;
        den += w;
    }
    (num / den).sqrt()
}

/// Scale the field to `target` energy; returns the amplitude factor.
pub fn renormalize(grid: &BpmGrid, field: &mut [Complex64], target: f64) -> f64 {
    let e = grid.energy(field);
    let s = (target / e).sqrt();
    for v in field.iter_mut() {
        *v *= s;
    }
    s
}

/// Absorbing layer: α(x) = α_max·t² over the outer fraction of each side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Absorber {
    /// Fraction of the half-width covered by the layer.
    pub fraction: f64,
    /// Peak power absorption per unit length times the layer width.
    pub strength: f64,
}

impl Default for Absorber {
    fn default() -> Self {
        Self { fraction: 0.1, strength: 20.0 }
    }
}

/// Settings of one propagation run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSettings {
    pub length: f64,
    /// Steps between evolution samples.
    pub record_every: usize,
    /// Steps between stored field snapshots, if any.
    pub snapshot_every: Option<usize>,
    /// Trailing fraction of the run used for the β fit and settled profile.
    pub fit_fraction: f64,
    /// Restore energy removed by the absorber and the kinetic step.
    pub renormalize: bool,
    /// Keep K fixed at k0·n instead of following the mean index.
    pub fixed_reference: Option<f64>,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        Self {
            length: 100e-6,
            record_every: 100,
            snapshot_every: None,
            fit_fraction: 0.5,
            renormalize: true,
            fixed_reference: None,
        }
    }
}

/// Evolution summary row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionSample {
    pub z: f64,
    pub energy: f64,
    pub attenuation: f64,
    pub n_bar: f64,
    /// ∫K dz + unwrapped arg A(0).
    pub axis_phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub z: f64,
    pub field: Vec<Complex64>,
}

/// Output of [`BpmSolver::propagate`].
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationRecord {
    pub samples: Vec<EvolutionSample>,
    pub snapshots: Vec<Snapshot>,
    pub steps: usize,
    /// Propagation constant fitted over the trailing window.
    pub beta: f64,
    /// Mean reference wavenumber over the window.
    pub reference_wavenumber: f64,
    /// Fitted power attenuation rate of the lens ledger (1/m).
    pub attenuation_rate: f64,
    /// Unit-energy |A| averaged over the trailing window.
    pub settled_profile: Vec<f64>,
}

impl PropagationRecord {
    pub fn effective_index(&self, grid: &BpmGrid) -> f64 {
        self.beta / grid.k0()
    }
}

/// Split-step propagator with cached FFT plans.
pub struct BpmSolver {
    pub grid: BpmGrid,
    pub propagator: Propagator,
    fft: Arc<dyn Fft<f64>>,
    ifft: Arc<dyn Fft<f64>>,
    scratch: Vec<Complex64>,
    kx2: Vec<f64>,
    absorption: Vec<f64>,
}

impl BpmSolver {
    pub fn new(grid: BpmGrid, propagator: Propagator, absorber: Absorber) -> Self {
        let n = grid.num_x;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(n);
        let ifft = planner.plan_fft_inverse(n);
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len().max(ifft.get_inplace_scratch_len())];
        let dk = 2.0 * PI / (n as f64 * grid.dx);
        let kx2 = (0..n)
            .map(|j| {
                let m = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                (m * dk).powi(2)
            })
            .collect();
        let half = grid.half_width();
        let layer = absorber.fraction * half;
        let absorption = grid
            .x
            .iter()
            .map(|&x| {
                let depth = x.abs() - (half - layer);
                if layer > 0.0 && depth > 0.0 {
                    let t = depth / layer;
                    absorber.strength / layer * t * t
                } else {
                    0.0
                }
            })
            .collect();
        Self { grid, propagator, fft, ifft, scratch, kx2, absorption }
    }

    /// Apply the homogeneous (diffraction) operator over dz with reference K.
    pub fn homogeneous_step(&mut self, field: &mut [Complex64], k_ref: f64, dz: f64) {
        self.fft.process_with_scratch(field, &mut self.scratch);
        let inv_n = 1.0 / self.grid.num_x as f64;
        match self.propagator {
            Propagator::Fresnel => {
                let c = -dz / (2.0 * k_ref);
                for (v, &k2) in field.iter_mut().zip(&self.kx2) {
                    *v *= Complex64::from_polar(inv_n, c * k2);
                }
            }
            Propagator::WideAngle => {
                let kk = k_ref * k_ref;
                for (v, &k2) in field.iter_mut().zip(&self.kx2) {
                    let f = if k2 < kk {
                        Complex64::from_polar(inv_n, ((kk - k2).sqrt() - k_ref) * dz)
                    } else {
                        Complex64::from_polar(inv_n * (-(k2 - kk).sqrt() * dz).exp(), -k_ref * dz)
                    };
                    *v *= f;
                }
            }
        }
        self.ifft.process_with_scratch(field, &mut self.scratch);
    }

    /// Apply the index lens over dz; returns the power transmission.
    pub fn lens_step(&self, field: &mut [Complex64], index: &IndexMap, k_ref: f64, dz: f64) -> f64 {
        let k0 = self.grid.k0();
        let mut before = 0.0;
        let mut after = 0.0;
        for (v, n) in field.iter_mut().zip(&index.n) {
            before += v.norm_sqr();
            let phase = match self.propagator {
                Propagator::Fresnel => (k0 * k0 * n.re * n.re - k_ref * k_ref) * dz / (2.0 * k_ref),
                Propagator::WideAngle => (k0 * n.re - k_ref) * dz,
            };
            *v *= Complex64::from_polar((-k0 * n.im * dz).exp(), phase);
            after += v.norm_sqr();
        }
        if before > 0.0 {
            after / before
        } else {
            1.0
        }
    }

    /// Precomputed factors for one reference wavenumber and step size.
    fn operators(&self, index: &IndexMap, k_ref: f64, dz: f64) -> Operators {
        let n = self.grid.num_x;
        let inv_n = 1.0 / n as f64;
        let kinetic = self
            .kx2
            .iter()
            .map(|&k2| match self.propagator {
                Propagator::Fresnel => Complex64::from_polar(inv_n, -dz * k2 / (2.0 * k_ref)),
                Propagator::WideAngle => {
                    let kk = k_ref * k_ref;
                    if k2 < kk {
                        Complex64::from_polar(inv_n, ((kk - k2).sqrt() - k_ref) * dz)
                    } else {
                        Complex64::from_polar(inv_n * (-(k2 - kk).sqrt() * dz).exp(), -k_ref * dz)
                    }
                }
            })
            .collect();
        let k0 = self.grid.k0();
        let half = 0.5 * dz;
        let lens = index
            .n
            .iter()
            .map(|v| {
                let phase = match self.propagator {
                    Propagator::Fresnel => (k0 * k0 * v.re * v.re - k_ref * k_ref) * half / (2.0 * k_ref),
                    Propagator::WideAngle => (k0 * v.re - k_ref) * half,
                };
                Complex64::from_polar((-k0 * v.im * half).exp(), phase)
            })
            .collect();
        let absorber = self.absorption.iter().map(|&a| (-0.5 * a * dz).exp()).collect();
        Operators { k_ref, kinetic, lens, absorber }
    }

    /// One symmetric step: half lens, diffraction, absorber, half lens.
    /// Returns the physical power transmission of the step.
    pub fn step(
        &mut self,
        field: &mut BpmField,
        index: &IndexMap,
        k_ref: f64,
        renormalize: bool,
    ) -> Result<f64, BpmError> {
        let ops = self.operators(index, k_ref, self.grid.dz);
        self.step_with(field, &ops, index.is_passive(), renormalize)
    }

    fn step_with(
        &mut self,
        field: &mut BpmField,
        ops: &Operators,
        passive: bool,
        renormalize: bool,
    ) -> Result<f64, BpmError> {
        let dz = self.grid.dz;
        let a = &mut field.a;
        let mut e0 = 0.0;
        let mut e_mid = 0.0;
        for (v, l) in a.iter_mut().zip(&ops.lens) {
            e0 += v.norm_sqr();
            *v *= l;
            e_mid += v.norm_sqr();
        }
        self.fft.process_with_scratch(a, &mut self.scratch);
        for (v, k) in a.iter_mut().zip(&ops.kinetic) {
            *v *= k;
        }
        self.ifft.process_with_scratch(a, &mut self.scratch);
        let mut e_abs = 0.0;
        let mut e1 = 0.0;
        for ((v, l), m) in a.iter_mut().zip(&ops.lens).zip(&ops.absorber) {
            *v *= m;
            e_abs += v.norm_sqr();
            *v *= l;
            e1 += v.norm_sqr();
        }
        if !e1.is_finite() {
            return Err(BpmError::NonFinite(field.z + dz));
        }
        if e0 > 0.0 && e1 > 1.01 * e0 && passive {
            return Err(BpmError::Unstable { z: field.z + dz, growth: e1 / e0 });
        }
        let t1 = if e0 > 0.0 { e_mid / e0 } else { 1.0 };
        let t2 = if e_abs > 0.0 { e1 / e_abs } else { 1.0 };
        let transmission = t1 * t2;
        if renormalize && e1 > 0.0 {
            let s = renormalize_to(a, e1, e0 * transmission);
            field.restored += 2.0 * s.ln();
        }
        field.z += dz;
        field.reference_phase += ops.k_ref * dz;
        field.attenuation -= transmission.ln();
        Ok(transmission)
    }

    /// Propagate over `settings.length`, tracking the axis phase for the β fit.
    pub fn propagate(
        &mut self,
        field: &mut BpmField,
        index: &IndexMap,
        settings: &PropagationSettings,
    ) -> Result<PropagationRecord, BpmError> {
        if index.n.len() != self.grid.num_x || field.a.len() != self.grid.num_x {
            return Err(BpmError::MapMismatch { expected: self.grid.num_x, got: index.n.len().min(field.a.len()) });
        }
        let k0 = self.grid.k0();
        let steps = (settings.length / self.grid.dz).round().max(1.0) as usize;
        let fit_start = ((1.0 - settings.fit_fraction.clamp(0.0, 1.0)) * steps as f64) as usize;
        let record_every = settings.record_every.max(1);
        let mut samples = Vec::new();
        let mut snapshots = Vec::new();
        let mut settled = vec![0.0; self.grid.num_x];
        let mut settled_count = 0usize;
        let mut unwrapped = field.axis().arg();
        let mut last_arg = unwrapped;
        let mut fit_z = Vec::new();
        let mut fit_phase = Vec::new();
        let mut fit_att = Vec::new();
        let mut k_sum = 0.0;
        let mut k_count = 0usize;
        let mut n_bar = settings.fixed_reference.unwrap_or_else(|| adaptive_mean_index(&field.a, index));
        let grid = self.grid.clone();
        let push_sample = |field: &BpmField, n_bar: f64, unwrapped: f64, samples: &mut Vec<EvolutionSample>| {
            samples.push(EvolutionSample {
                z: field.z,
                energy: grid.energy(&field.a),
                attenuation: field.attenuation,
                n_bar,
                axis_phase: field.reference_phase + unwrapped,
            });
        };
        push_sample(field, n_bar, unwrapped, &mut samples);
        if settings.snapshot_every.is_some() {
            snapshots.push(Snapshot { z: field.z, field: field.a.clone() });
        }
        let passive = index.is_passive();
        let mut ops = self.operators(index, k0 * n_bar, self.grid.dz);
        for step in 1..=steps {
            if (k0 * n_bar - ops.k_ref).abs() > 1e-7 * ops.k_ref {
                ops = self.operators(index, k0 * n_bar, self.grid.dz);
            }
            let k_ref = ops.k_ref;
            self.step_with(field, &ops, passive, settings.renormalize)?;
            let arg = field.axis().arg();
            let mut d = arg - last_arg;
            if d > PI {
                d -= 2.0 * PI;
            } else if d < -PI {
                d += 2.0 * PI;
            }
            unwrapped += d;
            last_arg = arg;
            if step >= fit_start {
                k_sum += k_ref;
                k_count += 1;
            }
            if step % record_every == 0 || step == steps {
                push_sample(field, n_bar, unwrapped, &mut samples);
                if step >= fit_start {
                    fit_z.push(field.z);
                    fit_phase.push(field.reference_phase + unwrapped);
                    fit_att.push(field.attenuation);
                    let e = grid.energy(&field.a).sqrt();
                    for (s, v) in settled.iter_mut().zip(&field.a) {
                        *s += v.norm() / e;
                    }
                    settled_count += 1;
                }
            }
            if let Some(every) = settings.snapshot_every {
                if every > 0 && step % every == 0 {
                    snapshots.push(Snapshot { z: field.z, field: field.a.clone() });
                }
            }
            if settings.fixed_reference.is_none() {
                n_bar = adaptive_mean_index(&field.a, index);
            }
        }
        let k_mean = if k_count > 0 { k_sum / k_count as f64 } else { k0 * n_bar };
        let (rate, _) = if fit_z.len() >= 2 { numeric::linear_fit(&fit_z, &fit_phase) } else { (f64::NAN, 0.0) };
        let beta = match self.propagator {
            Propagator::Fresnel => (2.0 * k_mean * rate - k_mean * k_mean).sqrt(),
            Propagator::WideAngle => rate,
        };
        let (attenuation_rate, _) =
            if fit_z.len() >= 2 { numeric::linear_fit(&fit_z, &fit_att) } else { (f64::NAN, 0.0) };
        if settled_count > 0 {
            for s in settled.iter_mut() {
                *s /= settled_count as f64;
            }
        }
        Ok(PropagationRecord {
            samples,
            snapshots,
            steps,
            beta,
            reference_wavenumber: k_mean,
            attenuation_rate,
            settled_profile: settled,
        })
    }
}

struct Operators {
    k_ref: f64,
    kinetic: Vec<Complex64>,
    lens: Vec<Complex64>,
    absorber: Vec<f64>,
}

fn renormalize_to(field: &mut [Complex64], current: f64, target: f64) -> f64 {
    let s = (target / current).sqrt();
    for v in field.iter_mut() {
        *v *= s;
    }
    s
}

/// L2 distance between two sampled profiles: sqrt(Σ(p - q)² dx).
pub fn l2_distance(grid: &BpmGrid, p: &[f64], q: &[f64]) -> f64 {
    (p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>() * grid.dx).sqrt()
}

/// RMS half-width sqrt(∫x²|A|²/∫|A|²).
pub fn rms_width(grid: &BpmGrid, a: &[Complex64]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, v) in grid.x.iter().zip(a) {
        let w = v.norm_sqr();
        num += x * x * w;
        den += w;
    }
    (num / den).sqrt()
}
