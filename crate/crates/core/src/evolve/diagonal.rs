//! Exact propagation of Hamiltonians that are diagonal in the computational
//! basis.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::hamiltonians::EffModel;
use crate::model::units::HBAR;
use crate::ops::operator::LinearOperator;
use crate::ops::state::{QuantumState, StateData};

fn apply_phases(state: &QuantumState, phases: &[f64]) -> Result<QuantumState> {
    if state.space().dim() != phases.len() {
        return Err(Error::DimensionMismatch { expected: phases.len(), found: state.space().dim() });
    }
    let factors: Vec<C64> = phases.iter().map(|&p| C64::from_polar(1.0, -p)).collect();
    Ok(match state.data() {
        StateData::Pure(v) => {
            let out = v.zip_map(&nalgebra::DVector::from_column_slice(&factors), |a, f| a * f);
            QuantumState::pure_unchecked(*state.space(), out)
        }
        StateData::Density(m) => {
            let mut out = m.clone();
            for c in 0..out.ncols() {
                for r in 0..out.nrows() {
                    out[(r, c)] *= factors[r] * factors[c].conj();
                }
            }
            QuantumState::density_unchecked(*state.space(), out)
        }
    })
}

/// Propagates `state` from `t0` to `t1` under the diagonal tier using the
/// closed-form accumulated phases; no integration error.
pub fn diagonal_propagate(model: &EffModel, state: &QuantumState, t0: f64, t1: f64) -> Result<QuantumState> {
    let space = state.space();
    if space.has_cavity() || space.levels_per_dot() != 2 {
        return Err(Error::InvalidSpace("diagonal propagation acts on bare qubits".into()));
    }
    if space.num_dots() != model.num_dots() {
        return Err(Error::DimensionMismatch { expected: model.num_dots(), found: space.num_dots() });
    }
    apply_phases(state, &model.phases(t0, t1))
}

/// `exp(−iHt/ħ) state` for a static diagonal operator; anything with an
/// off-diagonal entry is rejected.
pub fn diagonal_propagate_static(h: &LinearOperator, state: &QuantumState, t: f64) -> Result<QuantumState> {
    if !h.is_diagonal() {
        return Err(Error::InvalidParameter("operator is not diagonal in the computational basis".into()));
    }
    if h.space() != state.space() {
        return Err(Error::SpaceMismatch);
    }
    let phases: Vec<f64> = h.diagonal().iter().map(|e| e.re * t / HBAR).collect();
    apply_phases(state, &phases)
}
