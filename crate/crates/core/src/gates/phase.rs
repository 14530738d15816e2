use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::units::HBAR;
use crate::ops::state::{QuantumState, StateData};

/// Minimum weight a propagated basis state must keep on its own ray.
pub const LEAKAGE_OVERLAP: f64 = 0.99;

/// Maps an angle into `[−π, π)`, so a CZ phase reads `−π`.
pub fn wrap_phase(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y >= PI {
        y - 2.0 * PI
    } else {
        y
    }
}

/// Smallest angular distance between two phases.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

/// `exp(i Σ_j s_j θ_j)` for every bitstring `s` of `θ.len()` qubits.
pub fn correction_factors(theta: &[f64]) -> Vec<C64> {
    let n = theta.len();
    (0..1usize << n)
        .map(|s| {
            let phase: f64 = (0..n).filter(|&j| (s >> (n - 1 - j)) & 1 == 1).map(|j| theta[j]).sum();
            C64::from_polar(1.0, phase)
        })
        .collect()
}

/// Undoes the single-dot Stark phases: multiplies each basis amplitude by
/// `exp(i Σ_j s_j η_jj t/ħ)`.
pub fn local_phase_correction(state: &QuantumState, eta_jj: &[f64], t: f64) -> Result<QuantumState> {
    let space = *state.space();
    if space.has_cavity() || space.levels_per_dot() != 2 {
        return Err(Error::InvalidSpace("phase correction acts on bare qubits".into()));
    }
    if eta_jj.len() != space.num_dots() {
        return Err(Error::DimensionMismatch { expected: space.num_dots(), found: eta_jj.len() });
    }
    let theta: Vec<f64> = eta_jj.iter().map(|e| e * t / HBAR).collect();
    let f = correction_factors(&theta);
    Ok(match state.data() {
        StateData::Pure(v) => {
            let out = nalgebra::DVector::from_fn(v.len(), |i, _| v[i] * f[i]);
            QuantumState::pure_unchecked(space, out)
        }
        StateData::Density(m) => {
            let out = nalgebra::DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, c)] * f[r] * f[c].conj());
            QuantumState::density_unchecked(space, out)
        }
    })
}

/// Amplitude of each two-qubit basis state on its own ray (vacuum waveguide,
/// no excitation), after checking for leakage.
pub fn ray_amplitudes(states: &[QuantumState; 4]) -> Result<[C64; 4]> {
    let mut out = [C64::new(0.0, 0.0); 4];
    for (b, s) in states.iter().enumerate() {
        let space = s.space();
        if space.num_dots() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: space.num_dots() });
        }
        let v = s
            .amplitudes()
            .ok_or_else(|| Error::InvalidState("phase extraction needs pure states".into()))?;
        let a = v[space.index_of_bits(b, 0)];
        let overlap = a.norm_sqr();
        if overlap < LEAKAGE_OVERLAP {
            return Err(Error::Leakage { state: b, overlap });
        }
        out[b] = a;
    }
    Ok(out)
}

/// `φ_gg − φ_fg − φ_gf + φ_ff` in `[−π, π)` from four propagated basis
/// states ordered `ff, fg, gf, gg`.
pub fn extract_conditional_phase(states: &[QuantumState; 4]) -> Result<f64> {
    let a = ray_amplitudes(states)?;
    Ok(conditional_from_amplitudes(&a))
}

pub fn conditional_from_amplitudes(a: &[C64; 4]) -> f64 {
    wrap_phase(a[3].arg() - a[1].arg() - a[2].arg() + a[0].arg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::space::HilbertSpace;
    use nalgebra::DVector;
    use proptest::prelude::*;

    fn states_with_phases(p: [f64; 4]) -> [QuantumState; 4] {
        let space = HilbertSpace::qubits(2).unwrap();
        std::array::from_fn(|b| {
            let mut v = DVector::zeros(4);
            v[b] = C64::from_polar(1.0, p[b]);
            QuantumState::pure(space, v).unwrap()
        })
    }

    #[test]
    fn wrapping_range() {
        assert_eq!(wrap_phase(-PI), -PI);
        assert!((wrap_phase(PI) + PI).abs() < 1e-15);
        assert!((wrap_phase(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert!((wrap_phase(0.1) - 0.1).abs() < 1e-16);
    }

    #[test]
    fn separable_pattern_has_no_conditional_phase() {
        let (a, b) = (0.37, -1.91);
        let phi = extract_conditional_phase(&states_with_phases([0.0, -a, -b, -a - b])).unwrap();
        assert!(phi.abs() < 1e-14);
    }

    #[test]
    fn cz_pattern() {
        let (a, b) = (0.37, 2.2);
        let phi = extract_conditional_phase(&states_with_phases([0.0, -a, -b, -a - b - PI])).unwrap();
        assert!(phase_distance(phi, -PI) < 1e-12);
    }

    #[test]
    fn stark_pattern_reduces_to_cross_term() {
        let et = 0.21;
        let phi = extract_conditional_phase(&states_with_phases([0.0, -et, -et, -4.0 * et])).unwrap();
        assert!((phi + 2.0 * et).abs() < 1e-14);
    }

    #[test]
    fn leakage_is_reported() {
        let space = HilbertSpace::qubits(2).unwrap();
        let mut states = states_with_phases([0.0; 4]);
        let s = 0.5f64.sqrt();
        states[2] = QuantumState::pure(space, DVector::from_vec(vec![C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(0.0, 0.0)])).unwrap();
        match extract_conditional_phase(&states) {
            Err(Error::Leakage { state, overlap }) => {
                assert_eq!(state, 2);
                assert!((overlap - 0.5).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn correction_identity_and_inverse() {
        let space = HilbertSpace::qubits(3).unwrap();
        let psi = QuantumState::plus_register(space).unwrap();
        let eta = [0.002, 0.003, 0.0011];
        assert_eq!(local_phase_correction(&psi, &eta, 0.0).unwrap(), psi);
        let there = local_phase_correction(&psi, &eta, 1234.0).unwrap();
        let back = local_phase_correction(&there, &eta, -1234.0).unwrap();
        assert!((back.amplitudes().unwrap() - psi.amplitudes().unwrap()).norm() < 1e-12);
        let rho = local_phase_correction(&psi.to_density(), &eta, 1234.0).unwrap();
        assert!((rho.density_matrix() - there.density_matrix()).norm() < 1e-14);
    }

    proptest! {
        #[test]
        fn conditional_phase_ignores_local_phases(p in prop::array::uniform4(-10.0f64..10.0), a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let base = extract_conditional_phase(&states_with_phases(p)).unwrap();
            let shifted = extract_conditional_phase(&states_with_phases([p[0], p[1] + a, p[2] + b, p[3] + a + b])).unwrap();
            prop_assert!(phase_distance(base, shifted) < 1e-9);
            prop_assert!((-PI..PI).contains(&base));
        }
    }
}
