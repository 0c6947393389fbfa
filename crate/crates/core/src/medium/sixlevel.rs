//! Six-level master equation for the ortho-hydrogen Q1(0) system in a
//! magnetic field.
//!
//! Levels 1-3 are the excited (v = 1) magnetic sublevels and 4-6 the ground
//! (v = 0) ones; array index = level - 1. The control drives 2↔4 and 3↔5, the
//! probe drives 2↔6 and 1↔5. Rates are half-widths in rad/s, ħ = 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::MediumError;

pub const LEVELS: usize = 6;

/// Density matrix, `rho[a][b]` = ρ_{a+1, b+1}.
pub type DensityMatrix = [[Complex64; LEVELS]; LEVELS];

/// Decay and mixing rates of the six-level system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixLevelParams {
    /// Decay half-widths of levels 1, 2, 3.
    pub gamma: [f64; 3],
    /// Ground-state mixing rate Γ.
    pub mixing: f64,
    /// Zeeman shift Ω.
    pub zeeman: f64,
}

impl SixLevelParams {
    pub fn uniform(gamma: f64, mixing: f64, zeeman: f64) -> Self {
        Self { gamma: [gamma; 3], mixing, zeeman }
    }
}

/// Field couplings and detunings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixLevelDrive {
    /// Control Rabi frequency G; couplings G1 = G (3↔5), G2 = -G (2↔4).
    pub control: f64,
    /// Probe Rabi frequency g; couplings g1 = -g (2↔6), g2 = g (1↔5).
    pub probe: f64,
    /// Probe detuning δ.
    pub delta: f64,
    /// Control detuning Δ.
    pub control_detuning: f64,
}

/// Rotating-frame Hamiltonian H = diag(E') - [G2|2><4| + G1|3><5| + g1|2><6| + g2|1><5| + h.c.].
pub fn hamiltonian(p: &SixLevelParams, d: &SixLevelDrive) -> DensityMatrix {
    let z = Complex64::new(0.0, 0.0);
    let mut h = [[z; LEVELS]; LEVELS];
    let om = p.zeeman;
    let energies =
        [d.delta + om, d.delta + om, d.control_detuning - om, 2.0 * om + d.delta - d.control_detuning, 0.0, 0.0];
    for (i, e) in energies.iter().enumerate() {
        h[i][i] = Complex64::new(*e, 0.0);
    }
    let g1c = d.control;
    let g2c = -d.control;
    let g1p = -d.probe;
    let g2p = d.probe;
    let mut couple = |a: usize, b: usize, v: f64| {
        h[a][b] = Complex64::new(-v, 0.0);
        h[b][a] = Complex64::new(-v, 0.0);
    };
    couple(1, 3, g2c);
    couple(2, 4, g1c);
    couple(1, 5, g1p);
    couple(0, 4, g2p);
    h
}

fn vidx(a: usize, b: usize) -> usize {
    a * LEVELS + b
}

/// Liouvillian superoperator acting on the row-major vectorization of ρ.
///
/// Excited levels decay at 2γi and repopulate each ground level with
/// branching 1/3. Ground levels mix pairwise at 2Γ.
pub fn liouvillian(p: &SixLevelParams, d: &SixLevelDrive) -> DMatrix<Complex64> {
    let n = LEVELS * LEVELS;
    let h = hamiltonian(p, d);
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    let i = Complex64::i();
    for a in 0..LEVELS {
        for b in 0..LEVELS {
            let row = vidx(a, b);
            for c in 0..LEVELS {
                l[(row, vidx(c, b))] += -i * h[a][c];
                l[(row, vidx(a, c))] += i * h[c][b];
            }
            let rate = |lev: usize| if lev < 3 { p.gamma[lev] } else { 2.0 * p.mixing };
            l[(row, row)] -= Complex64::new(rate(a) + rate(b), 0.0);
        }
    }
    for g in 3..LEVELS {
        for e in 0..3 {
            l[(vidx(g, g), vidx(e, e))] += Complex64::new(2.0 / 3.0 * p.gamma[e], 0.0);
        }
        for other in 3..LEVELS {
            if other != g {
                l[(vidx(g, g), vidx(other, other))] += Complex64::new(2.0 * p.mixing, 0.0);
            }
        }
    }
    l
}

/// Apply the Liouvillian to ρ directly (no vectorization).
pub fn apply(p: &SixLevelParams, d: &SixLevelDrive, rho: &DensityMatrix) -> DensityMatrix {
    let l = liouvillian(p, d);
    let v = DVector::from_iterator(LEVELS * LEVELS, rho.iter().flat_map(|r| r.iter().copied()));
    let out = l * v;
    let mut res = [[Complex64::new(0.0, 0.0); LEVELS]; LEVELS];
    for a in 0..LEVELS {
        for b in 0..LEVELS {
            res[a][b] = out[vidx(a, b)];
        }
    }
    res
}

/// Steady state with unit trace.
pub fn steady_state(p: &SixLevelParams, d: &SixLevelDrive) -> Result<DensityMatrix, MediumError> {
    let n = LEVELS * LEVELS;
    let mut l = liouvillian(p, d);
    let mut rhs = DVector::<Complex64>::zeros(n);
    for c in 0..n {
        l[(0, c)] = Complex64::new(0.0, 0.0);
    }
    for a in 0..LEVELS {
        l[(0, vidx(a, a))] = Complex64::new(1.0, 0.0);
    }
    rhs[0] = Complex64::new(1.0, 0.0);
    let x = l.lu().solve(&rhs).ok_or_else(|| MediumError::SteadyState("singular Liouvillian".into()))?;
    let mut rho = [[Complex64::new(0.0, 0.0); LEVELS]; LEVELS];
    for a in 0..LEVELS {
        for b in 0..LEVELS {
            rho[a][b] = x[vidx(a, b)];
        }
    }
    for a in 0..LEVELS {
        for b in a..LEVELS {
            let m = 0.5 * (rho[a][b] + rho[b][a].conj());
            rho[a][b] = m;
            rho[b][a] = m.conj();
        }
    }
    if rho.iter().flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(MediumError::SteadyState("non-finite solution".into()));
    }
    Ok(rho)
}

/// Smallest eigenvalue of the Hermitian matrix ρ.
pub fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    let m = DMatrix::from_fn(LEVELS, LEVELS, |a, b| rho[a][b]);
    let eig = nalgebra::linalg::SymmetricEigen::new(m);
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Weak-probe coherence σ26 = γ ρ26 / g1 with all population in level 6:
/// iγ[4Γ + i(δ-Δ+2Ω)] / {(γ+2Γ+i(δ+Ω))(4Γ+i(δ-Δ+2Ω)) + G²}.
pub fn weak_probe_coherence(
    gamma: f64,
    mixing: f64,
    zeeman: f64,
    rabi: f64,
    delta: f64,
    control_detuning: f64,
) -> Result<Complex64, MediumError> {
    let ground = Complex64::new(4.0 * mixing, delta - control_detuning + 2.0 * zeeman);
    let excited = Complex64::new(gamma + 2.0 * mixing, delta + zeeman);
    let den = excited * ground + rabi * rabi;
    if !(den.norm() > 1e-30 * gamma * gamma) {
        return Err(MediumError::Singular(den.norm()));
    }
    Ok(Complex64::i() * gamma * ground / den)
}

/// σ26 extracted from the full steady state.
pub fn coherence_from_state(rho: &DensityMatrix, gamma2: f64, probe: f64) -> Complex64 {
    let g1 = -probe;
    gamma2 * rho[1][5] / g1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SixLevelParams {
        SixLevelParams::uniform(1.0, 0.0017, 0.0)
    }

    #[test]
    fn trace_is_preserved() {
        let d = SixLevelDrive { control: 1.0, probe: 0.1, delta: 0.3, control_detuning: 0.0 };
        let l = liouvillian(&params(), &d);
        for c in 0..36 {
            let mut s = Complex64::new(0.0, 0.0);
            for a in 0..LEVELS {
                s += l[(vidx(a, a), c)];
            }
            assert!(s.norm() < 1e-14, "column {c}: {s}");
        }
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let d = SixLevelDrive { control: 0.7, probe: 0.2, delta: -0.1, control_detuning: 0.4 };
        let h = hamiltonian(&SixLevelParams::uniform(1.0, 0.0, 0.3), &d);
        for a in 0..LEVELS {
            for b in 0..LEVELS {
                assert_eq!(h[a][b], h[b][a].conj());
            }
        }
    }

    #[test]
    fn steady_state_is_physical() {
        let d = SixLevelDrive { control: 1.0, probe: 0.05, delta: 0.2, control_detuning: 0.0 };
        let rho = steady_state(&params(), &d).unwrap();
        let tr: f64 = (0..LEVELS).map(|a| rho[a][a].re).sum();
        assert!((tr - 1.0).abs() < 1e-12);
        assert!(min_eigenvalue(&rho) > -1e-10);
        let r = apply(&params(), &d, &rho);
        let worst = r.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
        assert!(worst < 1e-10);
    }
}
