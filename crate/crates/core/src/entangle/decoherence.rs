use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::cluster::{cluster_schedule, LatticeSpec};
use super::graph::{complete_graph_schedule, schedule_layers};
use super::ncz::ncz_schedule;
use crate::error::{Error, Result};
use crate::evolve::blockwise::{block_evolve, BlockEngine, BlockLayer, BlockRegister, MAX_DENSE_DOTS};
use crate::evolve::lindblad::DecayModel;
use crate::evolve::ode::OdeOptions;
use crate::gates::schedule::{DotDrive, DriveSchedule, Segment};
use crate::model::params::{eta_from, DotParams, EffDot};
use crate::model::units::HBAR;

/// Per-class amplitudes (exact) up to the dense limit, linear coherent
/// amplitudes beyond.
pub fn auto_engine(num_dots: usize) -> BlockEngine {
    if num_dots <= MAX_DENSE_DOTS {
        BlockEngine::Exact
    } else {
        BlockEngine::Coherent
    }
}

fn run(layers: &[BlockLayer], decay: &DecayModel, engine: BlockEngine, opts: &OdeOptions) -> Result<BlockRegister> {
    block_evolve(layers, decay, engine, opts)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct DecoherenceFidelity {
    /// `Tr(ρρ′)` between the decayed and the decay-free register.
    pub overlap: f64,
    /// `Tr(ρ′²)`; below one when the waveguide has not returned to vacuum.
    pub ideal_purity: f64,
    /// `Tr(ρρ′)/Tr(ρ′²)`, exactly one without decay.
    pub fidelity: f64,
}

/// Decay-free reference for a schedule, evaluated against any decay model.
#[derive(Clone, Debug)]
pub struct DecoherenceStudy {
    layers: Vec<BlockLayer>,
    engine: BlockEngine,
    opts: OdeOptions,
    ideal: BlockRegister,
    ideal_purity: f64,
}

impl DecoherenceStudy {
    pub fn new(
        schedules: &[DriveSchedule],
        hardware: Option<&[DotParams]>,
        engine: BlockEngine,
        opts: &OdeOptions,
    ) -> Result<Self> {
        Self::from_layers(schedule_layers(schedules, hardware)?, engine, opts)
    }

    pub fn from_layers(layers: Vec<BlockLayer>, engine: BlockEngine, opts: &OdeOptions) -> Result<Self> {
        let ideal = run(&layers, &DecayModel::none(), engine, opts)?;
        let ideal_purity = ideal.fidelity(&ideal)?;
        Ok(DecoherenceStudy { layers, engine, opts: *opts, ideal, ideal_purity })
    }

    pub fn num_dots(&self) -> usize {
        self.layers[0].dots.len()
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn duration(&self) -> f64 {
        self.layers.iter().map(|l| l.duration).sum()
    }

    pub fn engine(&self) -> BlockEngine {
        self.engine
    }

    pub fn evaluate(&self, decay: &DecayModel) -> Result<DecoherenceFidelity> {
        let (overlap, ideal_purity) = if decay.gamma() == 0.0 {
            (self.ideal_purity, self.ideal_purity)
        } else {
            let noisy = run(&self.layers, decay, self.engine, &self.opts)?;
            (noisy.fidelity(&self.ideal)?, self.ideal_purity)
        };
        Ok(DecoherenceFidelity { overlap, ideal_purity, fidelity: overlap / ideal_purity })
    }
}

/// Runs `schedules` on the flip-free tier with and without `decay` and
/// compares the registers.
pub fn decoherence_fidelity(
    schedules: &[DriveSchedule],
    decay: &DecayModel,
    hardware: Option<&[DotParams]>,
    engine: BlockEngine,
    opts: &OdeOptions,
) -> Result<DecoherenceFidelity> {
    DecoherenceStudy::new(schedules, hardware, engine, opts)?.evaluate(decay)
}

/// CZ between two physical dots as they are tuned: `λ` and `δ` follow from
/// the dot parameters and the gate lasts `πħ/(2η_AB)`.
pub fn hardware_cz_schedule(hardware: &[DotParams; 2]) -> Result<DriveSchedule> {
    let eff: Vec<EffDot> = hardware.iter().map(EffDot::from_params).collect::<Result<_>>()?;
    let eta = eta_from(eff[0].lambda, eff[0].delta, eff[1].lambda, eff[1].delta)?;
    if eta <= 0.0 {
        return Err(Error::InvalidParameter("the dots do not interact".into()));
    }
    let t = PI * HBAR / (2.0 * eta);
    let dots = eff
        .iter()
        .map(|d| {
            if d.lambda.im != 0.0 {
                return Err(Error::InvalidParameter("drive targets must have real λ".into()));
            }
            Ok(DotDrive::driven(d.lambda.re, d.delta, 1))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DriveSchedule::single(Segment { t_start: 0.0, t_end: t, dots }))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub tau_ratio: f64,
    pub gamma_per_ns: f64,
    pub fidelity: DecoherenceFidelity,
}

/// Decay rate for a point of the sweep: `γ = (τ_w/τ₀)/τ_w`.
pub fn sweep_decay(tau_ratio: f64, tau_w: f64) -> Result<DecayModel> {
    if !(tau_ratio >= 0.0 && tau_w > 0.0) {
        return Err(Error::InvalidParameter(format!("bad sweep point τ_w/τ₀ = {tau_ratio}, τ_w = {tau_w}")));
    }
    DecayModel::from_gamma(tau_ratio / tau_w)
}

pub fn decay_sweep(study: &DecoherenceStudy, tau_ratios: &[f64], tau_w: f64) -> Result<Vec<SweepPoint>> {
    tau_ratios
        .iter()
        .map(|&x| {
            let decay = sweep_decay(x, tau_w)?;
            Ok(SweepPoint { tau_ratio: x, gamma_per_ns: decay.gamma(), fidelity: study.evaluate(&decay)? })
        })
        .collect()
}

pub fn linspace(start: f64, end: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..points).map(|i| start + (end - start) * i as f64 / (points - 1) as f64).collect(),
    }
}

/// One row of the qubit-count study.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScalingCase {
    Cluster { rows: usize, cols: usize },
    /// Complete graph state on `qubits` dots.
    Graph { qubits: usize },
    /// NCZ recipe with `controls` control dots.
    Ncz { controls: usize },
}

impl ScalingCase {
    pub fn label(&self) -> String {
        match self {
            ScalingCase::Cluster { rows, cols } => format!("{rows}x{cols}"),
            ScalingCase::Graph { qubits } => format!("graph{qubits}"),
            ScalingCase::Ncz { controls } => format!("ncz{controls}"),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ScalingCase::Cluster { .. } => "cluster",
            ScalingCase::Graph { .. } => "graph",
            ScalingCase::Ncz { .. } => "ncz",
        }
    }

    pub fn num_qubits(&self) -> usize {
        match *self {
            ScalingCase::Cluster { rows, cols } => rows * cols,
            ScalingCase::Graph { qubits } => qubits,
            ScalingCase::Ncz { controls } => controls + 1,
        }
    }

    pub fn schedules(&self, lambda0: f64, ratio_min: f64) -> Result<Vec<DriveSchedule>> {
        match *self {
            ScalingCase::Cluster { rows, cols } => cluster_schedule(LatticeSpec { rows, cols }, lambda0, ratio_min),
            ScalingCase::Graph { qubits } => complete_graph_schedule(qubits, lambda0, ratio_min),
            ScalingCase::Ncz { controls } => ncz_schedule(controls, lambda0, ratio_min),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRow {
    pub kind: String,
    pub shape: String,
    pub qubits: usize,
    pub layers: usize,
    #[serde(rename = "duration_ns")]
    pub duration: f64,
    pub fidelity: DecoherenceFidelity,
}

/// Fidelity of one scaling case with every dot built from `dot`.
pub fn scaling_row(
    case: &ScalingCase,
    dot: Option<&DotParams>,
    lambda0: f64,
    ratio_min: f64,
    decay: &DecayModel,
    engine: BlockEngine,
    opts: &OdeOptions,
) -> Result<ScalingRow> {
    let schedules = case.schedules(lambda0, ratio_min)?;
    let hardware = dot.map(|d| vec![*d; case.num_qubits()]);
    let study = DecoherenceStudy::new(&schedules, hardware.as_deref(), engine, opts)?;
    Ok(ScalingRow {
        kind: case.kind().into(),
        shape: case.label(),
        qubits: case.num_qubits(),
        layers: schedules.len(),
        duration: study.duration(),
        fidelity: study.evaluate(decay)?,
    })
}

/// Drive amplitude a target needs on `dot`, for reporting.
pub fn required_rabi(dot: &DotParams, lambda: f64, delta: f64) -> Result<f64> {
    Ok(dot.realize(C64::new(lambda, 0.0), delta)?.omega.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::blockwise::brute_force_register;
    use crate::gates::schedule::plan_scz;

    fn opts() -> OdeOptions {
        OdeOptions::with_tolerances(1e-10, 1e-13)
    }

    fn fast_pair() -> Vec<DriveSchedule> {
        vec![plan_scz(2, &[vec![(0, 1)]], 0.02, 10.0).unwrap()]
    }

    #[test]
    fn no_decay_gives_unit_fidelity() {
        for engine in [BlockEngine::Fock { cutoff: 8 }, BlockEngine::Coherent, BlockEngine::Exact] {
            let f = decoherence_fidelity(&fast_pair(), &DecayModel::none(), None, engine, &opts()).unwrap();
            assert!((f.fidelity - 1.0).abs() < 1e-12);
            // planned gates return the waveguide to vacuum
            assert!((f.ideal_purity - 1.0).abs() < 1e-9, "{engine:?}: {f:?}");
        }
    }

    #[test]
    fn pair_matches_brute_force_lindblad() {
        let decay = DecayModel::from_gamma(0.2).unwrap();
        let layers = schedule_layers(&fast_pair(), None).unwrap();
        let f = decoherence_fidelity(&fast_pair(), &decay, None, BlockEngine::Fock { cutoff: 4 }, &opts()).unwrap();
        let noisy = brute_force_register(&layers, &decay, 4, &opts()).unwrap();
        let clean = brute_force_register(&layers, &DecayModel::none(), 4, &opts()).unwrap();
        let reference = crate::ops::state::fidelity(&noisy, &clean).unwrap()
            / crate::ops::state::fidelity(&clean, &clean).unwrap();
        assert!((f.fidelity - reference).abs() < 1e-4, "{} vs {reference}", f.fidelity);
        assert!(f.fidelity < 1.0);
    }

    #[test]
    fn engines_agree_for_uniform_dots() {
        let s = vec![plan_scz(3, &[vec![(0, 1)]], 0.02, 10.0).unwrap()];
        let decay = DecayModel::from_gamma(0.1).unwrap();
        let a = decoherence_fidelity(&s, &decay, None, BlockEngine::Fock { cutoff: 5 }, &opts()).unwrap();
        let b = decoherence_fidelity(&s, &decay, None, BlockEngine::Coherent, &opts()).unwrap();
        assert!((a.fidelity - b.fidelity).abs() < 1e-6, "{a:?} {b:?}");
    }

    #[test]
    fn transposed_lattices_match() {
        let decay = DecayModel::from_gamma(1e-4).unwrap();
        let dot = DotParams::symmetric(0.1, 10.0, 200.0, 200.3);
        let row = |r, c| {
            scaling_row(&ScalingCase::Cluster { rows: r, cols: c }, Some(&dot), 0.0025, 100.0, &decay, BlockEngine::Coherent, &opts())
                .unwrap()
        };
        let (a, b) = (row(2, 3), row(3, 2));
        assert_eq!(a.layers, b.layers);
        assert!((a.fidelity.fidelity - b.fidelity.fidelity).abs() < 1e-12);
    }

    #[test]
    fn hardware_schedule_lasts_half_conditional_period() {
        let hw = [DotParams::symmetric(0.1, 10.0, 200.0, 200.3), DotParams::symmetric(0.08, 13.75, 220.0, 220.3)];
        let s = hardware_cz_schedule(&hw).unwrap();
        let d = &s.segments[0].dots;
        let eta = eta_from(C64::new(d[0].lambda, 0.0), d[0].delta, C64::new(d[1].lambda, 0.0), d[1].delta).unwrap();
        assert!((2.0 * eta * s.t_end() / HBAR - PI).abs() < 1e-12);
        let realized = s.segments[0].realize(&hw).unwrap();
        for (r, h) in realized.iter().zip(&hw) {
            assert!((r.omega - h.omega).norm() < 1e-12);
        }
    }

    #[test]
    fn sweep_grid() {
        let g = linspace(0.0, 1.0, 20);
        assert_eq!(g.len(), 20);
        assert_eq!((g[0], g[19]), (0.0, 1.0));
        assert_eq!(sweep_decay(0.5, 2.0).unwrap().gamma(), 0.25);
        assert!(sweep_decay(-1.0, 1.0).is_err());
    }
}
