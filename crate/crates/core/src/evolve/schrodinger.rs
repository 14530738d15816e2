use log::{debug, warn};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ode::{Dopri5, OdeOptions};
use crate::error::{Error, Result};
use crate::model::units::HBAR;
use crate::model::Tier;
use crate::ops::hamiltonian::Hamiltonian;
use crate::ops::state::{QuantumState, StateData};

/// Drift at which a trajectory aborts instead of renormalizing.
pub const NORM_ABORT: f64 = 1e-5;
/// Drift above which renormalization is logged as a warning.
pub const NORM_WARN: f64 = 1e-7;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub tier: Tier,
    #[serde(rename = "t_final_ns")]
    pub t_final: f64,
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    #[serde(rename = "max_step_ns", default)]
    pub max_step: Option<f64>,
    #[serde(rename = "sample_times_ns", default)]
    pub sample_times: Option<Vec<f64>>,
}

fn default_rel_tol() -> f64 {
    1e-8
}

fn default_abs_tol() -> f64 {
    1e-10
}

impl EvolutionSpec {
    pub fn new(tier: Tier, t_final: f64) -> Self {
        EvolutionSpec {
            tier,
            t_final,
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_step: None,
            sample_times: None,
        }
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_samples(mut self, times: Vec<f64>) -> Self {
        self.sample_times = Some(times);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_final > 0.0) || !self.t_final.is_finite() {
            return Err(Error::InvalidParameter(format!("t_final must be positive, got {}", self.t_final)));
        }
        self.ode_options().validate()?;
        if let Some(ts) = &self.sample_times {
            if ts.iter().any(|&t| !(t >= 0.0 && t <= self.t_final)) {
                return Err(Error::InvalidParameter("sample times must lie in [0, t_final]".into()));
            }
        }
        Ok(())
    }

    pub fn ode_options(&self) -> OdeOptions {
        OdeOptions {
            rel_tol: self.rel_tol,
            abs_tol: self.abs_tol,
            max_step: self.max_step.unwrap_or(f64::INFINITY),
            ..OdeOptions::default()
        }
    }

    /// Sorted, deduplicated output times, always ending at `t_final`.
    pub fn output_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = self.sample_times.clone().unwrap_or_default();
        ts.push(self.t_final);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        ts
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub tier: Tier,
    pub times: Vec<f64>,
    pub states: Vec<QuantumState>,
    /// Largest norm (or trace) drift corrected along the run.
    pub max_drift: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &QuantumState {
        self.states.last().expect("trajectory holds at least one state")
    }
}

pub(crate) fn check_drift(drift: f64, t: f64) -> Result<()> {
    if !(drift <= NORM_ABORT) {
        return Err(Error::NormDrift { drift, t });
    }
    if drift > NORM_WARN {
        warn!("norm drift {drift:e} at t = {t} ns exceeds {NORM_WARN:e}; renormalizing");
    } else if drift > 0.0 {
        debug!("renormalizing after drift {drift:e} at t = {t} ns");
    }
    Ok(())
}

/// Integrates `iħ dψ/dt = H(t) ψ` from `t = 0`.
pub fn schrodinger_evolve(h: &Hamiltonian, psi0: &QuantumState, spec: &EvolutionSpec) -> Result<Trajectory> {
    spec.validate()?;
    if psi0.space() != h.space() {
        return Err(Error::SpaceMismatch);
    }
    let StateData::Pure(v) = psi0.data() else {
        return Err(Error::InvalidState("Schrödinger evolution needs a pure state".into()));
    };
    let space = *psi0.space();
    let mut y: Vec<C64> = v.iter().copied().collect();
    let mut ode = Dopri5::new(spec.ode_options());
    let s = C64::new(0.0, -1.0 / HBAR);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut t = 0.0;
    let mut max_drift = 0.0f64;
    for t_out in spec.output_times() {
        ode.integrate(
            |t, x, dx| {
                dx.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0));
                h.apply_acc(t, s, x, dx);
            },
            t,
            t_out,
            &mut y,
        )?;
        t = t_out;
        let norm = y.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let drift = (norm - 1.0).abs();
        check_drift(drift, t)?;
        max_drift = max_drift.max(drift);
        y.iter_mut().for_each(|a| *a /= norm);
        times.push(t);
        states.push(QuantumState::pure(space, DVector::from_column_slice(&y))?);
    }
    Ok(Trajectory { tier: spec.tier, times, states, max_drift })
}

/// Propagator `U(t1, t0)` of `iħ dU/dt = H(t) U`, integrated column by column.
pub fn propagator(h: &Hamiltonian, t0: f64, t1: f64, opts: &OdeOptions) -> Result<DMatrix<C64>> {
    let n = h.space().dim();
    let mut y: Vec<C64> = DMatrix::<C64>::identity(n, n).as_slice().to_vec();
    let s = C64::new(0.0, -1.0 / HBAR);
    Dopri5::new(*opts).integrate(
        |t, x, dx| {
            dx.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0));
            h.apply_cols_acc(t, s, x, n, dx);
        },
        t0,
        t1,
        &mut y,
    )?;
    Ok(DMatrix::from_column_slice(n, n, &y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::csr::CsrMatrix;
    use crate::ops::space::HilbertSpace;
    use std::f64::consts::PI;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn zero_hamiltonian_leaves_state_unchanged() {
        let space = HilbertSpace::qubits(2).unwrap();
        let h = Hamiltonian::new(space);
        let psi = QuantumState::plus_register(space).unwrap();
        let tr = schrodinger_evolve(&h, &psi, &EvolutionSpec::new(Tier::Eff, 10.0)).unwrap();
        assert_eq!(tr.final_state(), &psi);
    }

    #[test]
    fn diagonal_energy_gives_analytic_phase() {
        // E = 1 meV over t = πħ: phase e^{-iπ} = -1
        let space = HilbertSpace::qubits(1).unwrap();
        let mut h = Hamiltonian::new(space);
        h.add_static(CsrMatrix::from_triplets(2, vec![(0, 0, c(1.0))])).unwrap();
        let psi = QuantumState::basis(space, 0).unwrap();
        let spec = EvolutionSpec::new(Tier::Eff, PI * HBAR).with_tolerances(1e-11, 1e-13);
        let out = schrodinger_evolve(&h, &psi, &spec).unwrap();
        let amp = out.final_state().amplitudes().unwrap()[0];
        assert!((amp - c(-1.0)).norm() < 1e-9, "{amp}");
    }

    #[test]
    fn resonant_rabi_transfer() {
        // H = (Ω/2)(|1><0| + |0><1|) with Ω = 1 meV transfers fully at t = πħ/Ω
        let space = HilbertSpace::qubits(1).unwrap();
        let mut h = Hamiltonian::new(space);
        h.add_hermitian_pair(0.0, CsrMatrix::from_triplets(2, vec![(1, 0, c(0.5))])).unwrap();
        let psi = QuantumState::basis(space, 0).unwrap();
        let t = PI * HBAR;
        let samples: Vec<f64> = (1..10).map(|i| i as f64 * t / 10.0).collect();
        let spec = EvolutionSpec::new(Tier::Eff, t).with_tolerances(1e-11, 1e-13).with_samples(samples);
        let out = schrodinger_evolve(&h, &psi, &spec).unwrap();
        for (time, state) in out.times.iter().zip(&out.states) {
            let p1 = state.amplitudes().unwrap()[1].norm_sqr();
            let expected = (time / (2.0 * HBAR)).sin().powi(2);
            assert!((p1 - expected).abs() < 1e-9);
        }
        assert!(out.max_drift < 1e-7);
    }

    #[test]
    fn propagator_is_unitary_and_conserves_energy() {
        let space = HilbertSpace::new(1, 3, 2).unwrap();
        let h_static = CsrMatrix::from_triplets(
            space.dim(),
            vec![(0, 0, c(0.3)), (1, 4, C64::new(0.2, 0.1)), (4, 1, C64::new(0.2, -0.1)), (7, 7, c(-0.5))],
        );
        let mut h = Hamiltonian::new(space);
        h.add_static(h_static.clone()).unwrap();
        let u = propagator(&h, 0.0, 13.0, &OdeOptions::with_tolerances(1e-11, 1e-13)).unwrap();
        let id = DMatrix::<C64>::identity(space.dim(), space.dim());
        assert!((u.adjoint() * &u - id).norm() < 1e-8);
        let hd = h_static.to_dense();
        let psi = u.column(1).into_owned();
        let e = psi.dotc(&(&hd * &psi)).re;
        let e0 = hd[(1, 1)].re;
        assert!((e - e0).abs() <= 1e-8 * hd.norm());
    }

    #[test]
    fn rejects_invalid_specs() {
        let space = HilbertSpace::qubits(1).unwrap();
        let h = Hamiltonian::new(space);
        let psi = QuantumState::basis(space, 0).unwrap();
        assert!(schrodinger_evolve(&h, &psi, &EvolutionSpec::new(Tier::Eff, 0.0)).is_err());
        let bad = EvolutionSpec::new(Tier::Eff, 1.0).with_tolerances(-1.0, 1e-10);
        assert!(schrodinger_evolve(&h, &psi, &bad).is_err());
    }
}
