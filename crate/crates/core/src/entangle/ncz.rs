use num_complex::Complex64 as C64;
use serde::Serialize;

use super::graph::{complete_graph_layer, diagonal_unitary_phases};
use crate::error::{Error, Result};
use crate::gates::phase::wrap_phase;
use crate::gates::schedule::DriveSchedule;

/// Diagonal unitary produced by the NCZ recipe, compared entry by entry with
/// the N-controlled Z.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NczReport {
    pub num_controls: usize,
    pub num_dots: usize,
    /// Bitstring labels, dot 0 first, `g` as 1.
    pub basis: Vec<String>,
    /// Phase of each diagonal entry, `[−π, π)`.
    pub phases: Vec<f64>,
    /// Target phases: `−π` on the all-`g` state, 0 elsewhere.
    pub target_phases: Vec<f64>,
    /// `max_s |U_s − NCZ_s|`; zero iff the recipe realizes the gate.
    pub max_deviation: f64,
    /// `|Σ_s NCZ_s* U_s| / 2^n`.
    pub gate_fidelity: f64,
    /// Entries where `U` and the target differ by more than 1e-9.
    pub mismatched: Vec<String>,
}

/// All-pairs CZ on the `N + 1` dots, then all-pairs CZ on the `N` controls
/// (dots `0..N`); the last dot is the target.
pub fn ncz_schedule(num_controls: usize, lambda0: f64, ratio_min: f64) -> Result<Vec<DriveSchedule>> {
    if num_controls < 2 {
        return Err(Error::InvalidParameter("the NCZ recipe needs at least two controls".into()));
    }
    let n = num_controls + 1;
    let all: Vec<usize> = (0..n).collect();
    let controls: Vec<usize> = (0..num_controls).collect();
    Ok(vec![
        complete_graph_layer(n, &all, lambda0, ratio_min)?,
        complete_graph_layer(n, &controls, lambda0, ratio_min)?,
    ])
}

pub fn ncz_report(num_controls: usize, schedules: &[DriveSchedule]) -> Result<NczReport> {
    let phases = diagonal_unitary_phases(schedules, None)?;
    let n = num_controls + 1;
    if phases.len() != 1 << n {
        return Err(Error::DimensionMismatch { expected: n, found: phases.len().trailing_zeros() as usize });
    }
    let all_g = (1usize << n) - 1;
    let target: Vec<f64> = (0..1usize << n).map(|s| if s == all_g { -std::f64::consts::PI } else { 0.0 }).collect();
    let mut max_dev = 0.0f64;
    let mut overlap = C64::new(0.0, 0.0);
    let mut mismatched = Vec::new();
    let label = |s: usize| format!("{s:0n$b}");
    for s in 0..phases.len() {
        let u = C64::from_polar(1.0, phases[s]);
        let t = C64::from_polar(1.0, target[s]);
        let dev = (u - t).norm();
        if dev > 1e-9 {
            mismatched.push(label(s));
        }
        max_dev = max_dev.max(dev);
        overlap += t.conj() * u;
    }
    Ok(NczReport {
        num_controls,
        num_dots: n,
        basis: (0..1usize << n).map(label).collect(),
        phases: phases.iter().map(|&p| wrap_phase(p)).collect(),
        target_phases: target,
        max_deviation: max_dev,
        gate_fidelity: overlap.norm() / phases.len() as f64,
        mismatched,
    })
}
