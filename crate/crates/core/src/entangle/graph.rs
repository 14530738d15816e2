use std::collections::BTreeSet;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::blockwise::BlockLayer;
use crate::gates::schedule::{plan_scz, DriveSchedule};
use crate::model::hamiltonians::EffModel;
use crate::model::params::{eta_from, DotParams};
use crate::model::units::HBAR;
use crate::ops::space::HilbertSpace;
use crate::ops::state::QuantumState;

/// Largest register for state-vector oracles.
pub const MAX_ORACLE_QUBITS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub num_qubits: usize,
    pub edges: Vec<(usize, usize)>,
}

impl GraphSpec {
    /// Checks the edges and returns them as sorted, deduplicated `(lo, hi)`
    /// pairs.
    pub fn normalized_edges(&self) -> Result<Vec<(usize, usize)>> {
        let mut set = BTreeSet::new();
        for &(a, b) in &self.edges {
            if a == b {
                return Err(Error::InvalidParameter(format!("self-loop on qubit {a}")));
            }
            for q in [a, b] {
                if q >= self.num_qubits {
                    return Err(Error::SiteOutOfRange { index: q, num_dots: self.num_qubits });
                }
            }
            set.insert((a.min(b), a.max(b)));
        }
        Ok(set.into_iter().collect())
    }

    pub fn complete(num_qubits: usize) -> Self {
        let edges = (0..num_qubits).flat_map(|a| (a + 1..num_qubits).map(move |b| (a, b))).collect();
        GraphSpec { num_qubits, edges }
    }

    pub fn cycle(num_qubits: usize) -> Self {
        GraphSpec { num_qubits, edges: (0..num_qubits).map(|a| (a, (a + 1) % num_qubits)).collect() }
    }

    pub fn path(num_qubits: usize) -> Self {
        GraphSpec { num_qubits, edges: (1..num_qubits).map(|a| (a - 1, a)).collect() }
    }
}

fn bit(s: usize, n: usize, j: usize) -> bool {
    (s >> (n - 1 - j)) & 1 == 1
}

/// `Π_edges CZ |+⟩^⊗N`.
pub fn ideal_graph_state(spec: &GraphSpec) -> Result<QuantumState> {
    let n = spec.num_qubits;
    if n == 0 || n > MAX_ORACLE_QUBITS {
        return Err(Error::Capacity(format!("graph-state oracle supports 1..={MAX_ORACLE_QUBITS} qubits")));
    }
    let edges = spec.normalized_edges()?;
    let amp = 0.5f64.powf(n as f64 / 2.0);
    let v = DVector::from_fn(1 << n, |s, _| {
        let flips = edges.iter().filter(|&&(a, b)| bit(s, n, a) && bit(s, n, b)).count();
        C64::new(if flips % 2 == 0 { amp } else { -amp }, 0.0)
    });
    QuantumState::pure(HilbertSpace::qubits(n)?, v)
}

/// Greedy split of the edges into matchings, in edge order.
pub fn greedy_matchings(edges: &[(usize, usize)]) -> Vec<Vec<(usize, usize)>> {
    let mut layers: Vec<Vec<(usize, usize)>> = Vec::new();
    for &(a, b) in edges {
        let slot = layers.iter().position(|l| l.iter().all(|&(x, y)| x != a && x != b && y != a && y != b));
        match slot {
            Some(i) => layers[i].push((a, b)),
            None => layers.push(vec![(a, b)]),
        }
    }
    layers
}

/// One drive layer per matching; within a layer every pair runs as its own
/// group, so pairs never couple to each other.
pub fn graph_state_schedule(spec: &GraphSpec, lambda0: f64, ratio_min: f64) -> Result<Vec<DriveSchedule>> {
    let edges = spec.normalized_edges()?;
    greedy_matchings(&edges)
        .into_iter()
        .map(|layer| {
            let groups: Vec<Vec<(usize, usize)>> = layer.into_iter().map(|p| vec![p]).collect();
            plan_scz(spec.num_qubits, &groups, lambda0, ratio_min)
        })
        .collect()
}

/// All dots in `members` driven in a single group: every pair among them
/// picks up the CZ phase at once.
pub fn complete_graph_layer(num_dots: usize, members: &[usize], lambda0: f64, ratio_min: f64) -> Result<DriveSchedule> {
    if members.len() < 2 {
        return Err(Error::InvalidParameter("a complete-graph layer needs at least two dots".into()));
    }
    // plan one pair, then extend the group to every member
    let mut s = plan_scz(num_dots, &[vec![(members[0], members[1])]], lambda0, ratio_min)?;
    let template = s.segments[0].dots[members[0]];
    for &m in members {
        if m >= num_dots {
            return Err(Error::SiteOutOfRange { index: m, num_dots });
        }
        s.segments[0].dots[m] = template;
    }
    Ok(s)
}

pub fn complete_graph_schedule(num_qubits: usize, lambda0: f64, ratio_min: f64) -> Result<Vec<DriveSchedule>> {
    let members: Vec<usize> = (0..num_qubits).collect();
    Ok(vec![complete_graph_layer(num_qubits, &members, lambda0, ratio_min)?])
}

/// Runs `schedules` back to back as one schedule.
pub fn concatenate(schedules: &[DriveSchedule]) -> Result<DriveSchedule> {
    let (first, rest) = schedules
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("empty schedule list".into()))?;
    Ok(rest.iter().fold(first.clone(), |acc, s| acc.then(s)))
}

pub fn schedule_layers(schedules: &[DriveSchedule], hardware: Option<&[DotParams]>) -> Result<Vec<BlockLayer>> {
    concatenate(schedules)?.layers(hardware)
}

/// Phase of every computational basis state after running `schedules` on
/// the diagonal tier and undoing the single-dot Stark shifts of each layer.
pub fn diagonal_unitary_phases(schedules: &[DriveSchedule], hardware: Option<&[DotParams]>) -> Result<Vec<f64>> {
    let layers = schedule_layers(schedules, hardware)?;
    let n = layers[0].dots.len();
    if n > MAX_ORACLE_QUBITS {
        return Err(Error::Capacity(format!("diagonal execution supports up to {MAX_ORACLE_QUBITS} dots")));
    }
    let mut total = vec![0.0; 1 << n];
    for layer in &layers {
        let model = EffModel::from_eff(&layer.dots)?;
        let phases = model.phases(0.0, layer.duration);
        let theta: Vec<f64> = layer
            .dots
            .iter()
            .map(|d| Ok(eta_from(d.lambda, d.delta, d.lambda, d.delta)? * layer.duration / HBAR))
            .collect::<Result<_>>()?;
        for (s, p) in total.iter_mut().enumerate() {
            let local: f64 = (0..n).filter(|&j| bit(s, n, j)).map(|j| theta[j]).sum();
            *p += -phases[s] + local;
        }
    }
    Ok(total)
}

/// `|+⟩^⊗N` driven through `schedules` on the diagonal tier, with the local
/// corrections applied.
pub fn execute_eff(schedules: &[DriveSchedule], hardware: Option<&[DotParams]>) -> Result<QuantumState> {
    let phases = diagonal_unitary_phases(schedules, hardware)?;
    let n = phases.len().trailing_zeros() as usize;
    let amp = 0.5f64.powf(n as f64 / 2.0);
    let v = DVector::from_iterator(phases.len(), phases.iter().map(|&p| C64::from_polar(amp, p)));
    QuantumState::pure_normalized(HilbertSpace::qubits(n)?, v)
}
