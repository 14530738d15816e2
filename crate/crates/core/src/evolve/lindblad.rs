use log::debug;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::ode::Dopri5;
use super::schrodinger::{EvolutionSpec, Trajectory};
use crate::error::{Error, Result};
use crate::model::units::HBAR;
use crate::ops::hamiltonian::Hamiltonian;
use crate::ops::operator::cavity_csr;
use crate::ops::state::{hermitian_defect, min_eigenvalue, QuantumState};

pub const TRACE_TOL: f64 = 1e-7;
pub const HERMITICITY_TOL: f64 = 1e-8;
pub const POSITIVITY_TOL: f64 = 1e-6;

/// Waveguide photon loss at rate `γ = 1/τ_w`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DecayRepr", into = "DecayRepr")]
pub struct DecayModel {
    gamma: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecayRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma_per_ns: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tau_w_ns: Option<f64>,
}

impl TryFrom<DecayRepr> for DecayModel {
    type Error = Error;

    fn try_from(r: DecayRepr) -> Result<Self> {
        match (r.gamma_per_ns, r.tau_w_ns) {
            (Some(g), None) => DecayModel::from_gamma(g),
            (None, Some(t)) => DecayModel::from_tau(t),
            (Some(g), Some(t)) => {
                let m = DecayModel::from_gamma(g)?;
                if (g * t - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidParameter(format!(
                        "gamma_per_ns = {g} and tau_w_ns = {t} disagree (γ must equal 1/τ_w)"
                    )));
                }
                Ok(m)
            }
            (None, None) => Err(Error::InvalidParameter("decay needs gamma_per_ns or tau_w_ns".into())),
        }
    }
}

impl From<DecayModel> for DecayRepr {
    fn from(m: DecayModel) -> Self {
        if m.gamma == 0.0 {
            DecayRepr { gamma_per_ns: Some(0.0), tau_w_ns: None }
        } else {
            DecayRepr { gamma_per_ns: Some(m.gamma), tau_w_ns: Some(1.0 / m.gamma) }
        }
    }
}

impl DecayModel {
    pub fn none() -> Self {
        DecayModel { gamma: 0.0 }
    }

    pub fn from_gamma(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!("decay rate must be finite and ≥ 0, got {gamma}")));
        }
        Ok(DecayModel { gamma })
    }

    /// `τ_w = ∞` gives no decay.
    pub fn from_tau(tau_w: f64) -> Result<Self> {
        if !(tau_w > 0.0) {
            return Err(Error::InvalidParameter(format!("decay time must be positive, got {tau_w}")));
        }
        Ok(DecayModel { gamma: 1.0 / tau_w })
    }

    /// Rate `γ`, 1/ns.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Decay time `τ_w`, ns (infinite without decay).
    pub fn tau_w(&self) -> f64 {
        1.0 / self.gamma
    }
}

pub(crate) struct DensityChecks {
    pub trace_drift: f64,
}

/// Verifies a density matrix against the engine tolerances, then
/// symmetrizes and renormalizes it in place.
pub(crate) fn check_density(rho: &mut DMatrix<C64>, t: f64) -> Result<DensityChecks> {
    let defect = hermitian_defect(rho);
    if defect > HERMITICITY_TOL {
        return Err(Error::Hermiticity { defect, t });
    }
    let trace: f64 = (0..rho.nrows()).map(|i| rho[(i, i)].re).sum();
    let drift = (trace - 1.0).abs();
    if !(drift <= TRACE_TOL) {
        return Err(Error::TraceDrift { drift, t });
    }
    let min = min_eigenvalue(rho);
    if min < -POSITIVITY_TOL {
        return Err(Error::Positivity { min_eigenvalue: min, t });
    }
    let sym = (&*rho + rho.adjoint()) * C64::new(0.5 / trace, 0.0);
    *rho = sym;
    if drift > 0.0 {
        debug!("trace drift {drift:e} at t = {t} ns corrected");
    }
    Ok(DensityChecks { trace_drift: drift })
}

/// Integrates `dρ/dt = −(i/ħ)[H(t), ρ] + γ(aρa† − ½{a†a, ρ})` from `t = 0`.
pub fn lindblad_evolve(
    h: &Hamiltonian,
    rho0: &QuantumState,
    decay: &DecayModel,
    spec: &EvolutionSpec,
) -> Result<Trajectory> {
    spec.validate()?;
    let space = *rho0.space();
    if &space != h.space() {
        return Err(Error::SpaceMismatch);
    }
    let (a, a_dag, num) = cavity_csr(&space)?;
    let n = space.dim();
    let mut y: Vec<C64> = rho0.density_matrix().as_slice().to_vec();
    let mut scratch = vec![C64::new(0.0, 0.0); n * n];
    let gamma = decay.gamma();
    let mi = C64::new(0.0, -1.0 / HBAR);
    let mut ode = Dopri5::new(spec.ode_options());
    let (mut times, mut states) = (Vec::new(), Vec::new());
    let mut t = 0.0;
    let mut max_drift = 0.0f64;
    for t_out in spec.output_times() {
        ode.integrate(
            |t, x, dx| {
                dx.iter_mut().for_each(|d| *d = C64::new(0.0, 0.0));
                h.apply_cols_acc(t, mi, x, n, dx);
                h.left_apply_acc(t, -mi, x, dx);
                if gamma > 0.0 {
                    scratch.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                    a.mul_cols_acc(C64::new(1.0, 0.0), x, n, &mut scratch);
                    a_dag.left_mul_cols_acc(C64::new(gamma, 0.0), &scratch, dx);
                    num.mul_cols_acc(C64::new(-0.5 * gamma, 0.0), x, n, dx);
                    num.left_mul_cols_acc(C64::new(-0.5 * gamma, 0.0), x, dx);
                }
            },
            t,
            t_out,
            &mut y,
        )?;
        t = t_out;
        let mut rho = DMatrix::from_column_slice(n, n, &y);
        let checks = check_density(&mut rho, t)?;
        max_drift = max_drift.max(checks.trace_drift);
        y.copy_from_slice(rho.as_slice());
        times.push(t);
        states.push(QuantumState::density(space, rho)?);
    }
    Ok(Trajectory { tier: spec.tier, times, states, max_drift })
}
