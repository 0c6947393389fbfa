#![allow(clippy::needless_range_loop)]

use eitfiber::medium::sixlevel::{
    apply, coherence_from_state, hamiltonian, min_eigenvalue, steady_state, weak_probe_coherence, DensityMatrix,
    SixLevelDrive, SixLevelParams,
};
use num_complex::Complex64;
use proptest::prelude::*;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn hermitian(values: &[f64]) -> DensityMatrix {
    let mut rho = [[c(0.0); 6]; 6];
    let mut k = 0;
    for a in 0..6 {
        rho[a][a] = c(values[k]);
        k += 1;
        for b in a + 1..6 {
            rho[a][b] = Complex64::new(values[k], values[k + 1]);
            rho[b][a] = rho[a][b].conj();
            k += 2;
        }
    }
    rho
}

/// Right-hand side of the master equation built from explicit matrix
/// products: -i[H, ρ] - Σγi{|i><i|, ρ} + (2/3)Σγi ρii Σ|j><j|
/// - 2Γ(Σ{|j><j|, ρ} - Σ_{i≠j} ρii |j><j|).
fn master_rhs(p: &SixLevelParams, d: &SixLevelDrive, rho: &DensityMatrix) -> DensityMatrix {
    let h = hamiltonian(p, d);
    let mut out = [[c(0.0); 6]; 6];
    for a in 0..6 {
        for b in 0..6 {
            let mut comm = c(0.0);
            for k in 0..6 {
                comm += h[a][k] * rho[k][b] - rho[a][k] * h[k][b];
            }
            out[a][b] = -I * comm;
        }
    }
    for e in 0..3 {
        for k in 0..6 {
            out[e][k] -= p.gamma[e] * rho[e][k];
            out[k][e] -= p.gamma[e] * rho[k][e];
        }
        for g in 3..6 {
            out[g][g] += 2.0 / 3.0 * p.gamma[e] * rho[e][e];
        }
    }
    for j in 3..6 {
        for k in 0..6 {
            out[j][k] -= 2.0 * p.mixing * rho[j][k];
            out[k][j] -= 2.0 * p.mixing * rho[k][j];
        }
        for i in 3..6 {
            if i != j {
                out[j][j] += 2.0 * p.mixing * rho[i][i];
            }
        }
    }
    out
}

/// The relevant lines of the rate equations as written out by hand, with the
/// probe coupling of level 2 taken as g1.
fn written_out(p: &SixLevelParams, d: &SixLevelDrive, r: &DensityMatrix) -> [(usize, usize, Complex64); 6] {
    let (g2c, g1p) = (-d.control, -d.probe);
    let gam = p.gamma;
    let gs = p.mixing;
    let (delta, cd, om) = (d.delta, d.control_detuning, p.zeeman);
    let at = |a: usize, b: usize| r[a - 1][b - 1];
    let feed = 2.0 / 3.0 * (gam[0] * at(1, 1) + gam[1] * at(2, 2) + gam[2] * at(3, 3));
    [
        (
            2,
            2,
            -2.0 * gam[1] * at(2, 2) + I * g2c * at(4, 2) - I * g2c * at(2, 4) + I * g1p * at(6, 2)
                - I * g1p * at(2, 6),
        ),
        (2, 4, -(gam[1] + 2.0 * gs + I * (cd - om)) * at(2, 4) + I * g2c * (at(4, 4) - at(2, 2)) + I * g1p * at(6, 4)),
        (
            2,
            6,
            -(gam[1] + 2.0 * gs + I * (delta + om)) * at(2, 6) + I * g2c * at(4, 6) + I * g1p * (at(6, 6) - at(2, 2)),
        ),
        (
            4,
            4,
            -4.0 * gs * at(4, 4) + 2.0 * gs * (at(5, 5) + at(6, 6)) + feed + I * g2c * at(2, 4) - I * g2c * at(4, 2),
        ),
        (4, 6, -(4.0 * gs + I * (delta - cd + 2.0 * om)) * at(4, 6) + I * g2c * at(2, 6) - I * g1p * at(4, 2)),
        (
            6,
            6,
            -4.0 * gs * at(6, 6) + 2.0 * gs * (at(4, 4) + at(5, 5)) + feed + I * g1p * at(2, 6) - I * g1p * at(6, 2),
        ),
    ]
}

fn matrix_values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 36)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn liouvillian_matches_explicit_master_equation(
        values in matrix_values(),
        gamma in prop::array::uniform3(0.1f64..2.0),
        mixing in 0.0f64..0.5,
        zeeman in -1.0f64..1.0,
        control in 0.0f64..2.0,
        probe in 0.0f64..0.5,
        delta in -2.0f64..2.0,
        control_detuning in -1.0f64..1.0,
    ) {
        let p = SixLevelParams { gamma, mixing, zeeman };
        let d = SixLevelDrive { control, probe, delta, control_detuning };
        let rho = hermitian(&values);
        let got = apply(&p, &d, &rho);
        let want = master_rhs(&p, &d, &rho);
        for a in 0..6 {
            for b in 0..6 {
                prop_assert!((got[a][b] - want[a][b]).norm() < 1e-12, "({a},{b}) {} vs {}", got[a][b], want[a][b]);
            }
        }
        for (a, b, v) in written_out(&p, &d, &rho) {
            prop_assert!((got[a - 1][b - 1] - v).norm() < 1e-12, "rho{a}{b}: {} vs {}", got[a - 1][b - 1], v);
        }
    }

    #[test]
    fn weak_probe_formula_matches_full_solve_without_mixing(
        control in 0.2f64..3.0,
        delta in -3.0f64..3.0,
    ) {
        let gamma = 1.0;
        let probe = 1e-3 * gamma;
        let p = SixLevelParams::uniform(gamma, 0.0, 0.0);
        let d = SixLevelDrive { control, probe, delta, control_detuning: 0.0 };
        let full = coherence_from_state(&steady_state(&p, &d).unwrap(), gamma, probe);
        let weak = weak_probe_coherence(gamma, 0.0, 0.0, control, delta, 0.0).unwrap();
        prop_assert!((full - weak).norm() <= 1e-3 * weak.norm(), "{full} vs {weak}");
    }
}

#[test]
fn weak_probe_formula_over_detuning_grid() {
    let gamma = 1.5e4;
    let probe = 1e-3 * gamma;
    let p = SixLevelParams::uniform(gamma, 0.0, 0.0);
    let mut worst = 0.0f64;
    for k in 0..50 {
        let delta = gamma * (-3.0 + 6.0 * k as f64 / 49.0);
        let d = SixLevelDrive { control: gamma, probe, delta, control_detuning: 0.0 };
        let rho = steady_state(&p, &d).unwrap();
        let full = coherence_from_state(&rho, gamma, probe);
        let weak = weak_probe_coherence(gamma, 0.0, 0.0, gamma, delta, 0.0).unwrap();
        worst = worst.max((full - weak).norm() / weak.norm());
    }
    assert!(worst < 1e-3, "worst relative difference {worst}");
}

#[test]
fn control_prepares_level_six() {
    let gamma = 1.5e4;
    let p = SixLevelParams::uniform(gamma, 26.5, 0.0);
    let d = SixLevelDrive { control: gamma, probe: 0.0, delta: 0.0, control_detuning: 0.0 };
    let rho = steady_state(&p, &d).unwrap();
    assert!((rho[5][5].re - 0.97).abs() < 0.01, "rho66 = {}", rho[5][5].re);
    assert!(min_eigenvalue(&rho) > -1e-12);
    let trace: f64 = (0..6).map(|a| rho[a][a].re).sum();
    assert!((trace - 1.0).abs() < 1e-12);
}

#[test]
fn steady_state_is_stationary() {
    let p = SixLevelParams { gamma: [1.0, 0.8, 1.2], mixing: 0.01, zeeman: 0.2 };
    let d = SixLevelDrive { control: 1.3, probe: 0.05, delta: 0.4, control_detuning: -0.1 };
    let rho = steady_state(&p, &d).unwrap();
    let rhs = master_rhs(&p, &d, &rho);
    let worst = rhs.iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
    assert!(worst < 1e-12, "{worst}");
}
