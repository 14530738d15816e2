//! Fock-cutoff convergence of the eff1 decoherence engine.

use serde::Serialize;

use super::blockwise::{fock_blockwise, BlockLayer, RegisterState};
use super::lindblad::DecayModel;
use super::ode::OdeOptions;
use crate::error::{Error, Result};
use crate::ops::state::{fidelity, trace_distance};

/// Threshold on the change between successive cutoffs.
pub const CONVERGENCE_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutoffStep {
    pub from: usize,
    pub to: usize,
    /// Trace distance between the two final registers.
    pub change: f64,
    /// Overlap fidelity between the two final registers.
    pub fidelity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub cutoffs: Vec<usize>,
    pub steps: Vec<CutoffStep>,
    pub converged: bool,
}

impl ConvergenceReport {
    pub fn last_change(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.change)
    }
}

/// Runs the scenario at every cutoff (sorted ascending) and compares
/// neighbours; converged when the last change is below [`CONVERGENCE_TOL`].
pub fn fock_convergence_check(
    layers: &[BlockLayer],
    decay: &DecayModel,
    cutoffs: &[usize],
    opts: &OdeOptions,
) -> Result<ConvergenceReport> {
    let mut cutoffs = cutoffs.to_vec();
    cutoffs.sort_unstable();
    cutoffs.dedup();
    if cutoffs.len() < 2 {
        return Err(Error::InvalidParameter("convergence needs at least two distinct cutoffs".into()));
    }
    let states = cutoffs
        .iter()
        .map(|&c| fock_blockwise(layers, decay, c, opts)?.to_state())
        .collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::new();
    for i in 1..states.len() {
        steps.push(CutoffStep {
            from: cutoffs[i - 1],
            to: cutoffs[i],
            change: trace_distance(&states[i - 1], &states[i])?,
            fidelity: fidelity(&states[i - 1], &states[i])?,
        });
    }
    let converged = steps.last().is_some_and(|s| s.change < CONVERGENCE_TOL);
    Ok(ConvergenceReport { cutoffs, steps, converged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::params::EffDot;
    use crate::model::units::HBAR;
    use num_complex::Complex64 as C64;

    fn pair(lambda: f64, delta: f64, t: f64) -> Vec<BlockLayer> {
        let d = EffDot { lambda: C64::new(lambda, 0.0), delta, dispersive: 1e-4 };
        vec![BlockLayer { duration: t, dots: vec![d, d] }]
    }

    fn opts() -> OdeOptions {
        OdeOptions::with_tolerances(1e-11, 1e-14)
    }

    #[test]
    fn undriven_cutoffs_agree_exactly() {
        let layers = vec![BlockLayer { duration: 10.0, dots: vec![EffDot::idle(); 2] }];
        let r = fock_convergence_check(&layers, &DecayModel::from_gamma(0.1).unwrap(), &[1, 2, 3], &opts()).unwrap();
        assert!(r.converged);
        assert!(r.steps.iter().all(|s| s.change == 0.0));
    }

    #[test]
    fn in_regime_gate_converges_between_three_and_four() {
        let (l, d) = (0.0025, 0.3);
        let t = std::f64::consts::PI * HBAR * d / (2.0 * l * l);
        let r = fock_convergence_check(&pair(l, d, t), &DecayModel::from_gamma(0.01).unwrap(), &[3, 4], &opts())
            .unwrap();
        assert!(r.converged, "{:?}", r.steps);
    }

    #[test]
    fn strong_drive_is_flagged() {
        let r = fock_convergence_check(&pair(0.1, 0.1, 40.0), &DecayModel::none(), &[2, 3], &opts()).unwrap();
        assert!(!r.converged);
        assert!(r.last_change() > 1e-3);
    }

    #[test]
    fn needs_two_cutoffs() {
        assert!(fock_convergence_check(&pair(0.01, 0.3, 1.0), &DecayModel::none(), &[3, 3], &opts()).is_err());
    }
}
