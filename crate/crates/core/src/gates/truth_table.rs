use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::phase::{conditional_from_amplitudes, correction_factors, ray_amplitudes, wrap_phase};
use super::schedule::{DotDrive, DriveSchedule, Segment};
use crate::error::{Error, Result};
use crate::evolve::diagonal::diagonal_propagate;
use crate::evolve::floquet::floquet_propagator;
use crate::evolve::ode::OdeOptions;
use crate::model::hamiltonians::{eff1_hamiltonian, full_rotating_hamiltonian, rotating_frame_phases, EffModel};
use crate::model::params::{eta_from, DotParams, EffDot};
use crate::model::units::HBAR;
use crate::model::Tier;
use crate::ops::space::HilbertSpace;
use crate::ops::state::QuantumState;

#[derive(Clone, Debug, Serialize)]
pub struct GateResult {
    pub tier: Tier,
    #[serde(rename = "t_gate_ns")]
    pub t_gate: f64,
    /// Phases of `ff, fg, gf, gg` after the local correction, in `[−π, π)`.
    pub phases: [f64; 4],
    pub conditional_phase: f64,
    pub fidelity_vs_ideal_cz: f64,
    /// Largest weight lost from a basis ray; zero on the diagonal tier.
    pub leakage: f64,
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GateOptions {
    pub fock_cutoff: usize,
    pub ode: OdeOptions,
}

impl Default for GateOptions {
    fn default() -> Self {
        GateOptions { fock_cutoff: 4, ode: OdeOptions::with_tolerances(1e-10, 1e-12) }
    }
}

/// `|Σ_b CZ_b* a_b| / 4` against `diag(1, 1, 1, −1)`.
pub fn cz_fidelity(a: &[C64; 4]) -> f64 {
    (a[0] + a[1] + a[2] - a[3]).norm() / 4.0
}

/// The two dots a gate acts on and the schedule restricted to them.
fn restrict_to_pair(schedule: &DriveSchedule) -> Result<([usize; 2], DriveSchedule)> {
    schedule.validate()?;
    let active = schedule.active_dots();
    let pair: [usize; 2] = match active.as_slice() {
        [a, b] => [*a, *b],
        // an empty schedule on two dots is the identity gate
        [] if schedule.num_dots() == 2 => [0, 1],
        _ => {
            return Err(Error::InvalidParameter(format!(
                "a truth table needs exactly two driven dots, the schedule drives {active:?}"
            )))
        }
    };
    let segments = schedule
        .segments
        .iter()
        .map(|s| Segment { t_start: s.t_start, t_end: s.t_end, dots: pair.iter().map(|&j| s.dots[j]).collect() })
        .collect();
    Ok((pair, DriveSchedule { segments, ..schedule.clone() }))
}

/// Single-dot Stark phases `Σ_segments η_jj t/ħ` accumulated by each dot.
fn local_phases(layers: &[(f64, Vec<EffDot>)]) -> Result<Vec<f64>> {
    let n = layers.first().map_or(0, |l| l.1.len());
    let mut theta = vec![0.0; n];
    for (dt, dots) in layers {
        for (j, d) in dots.iter().enumerate() {
            theta[j] += eta_from(d.lambda, d.delta, d.lambda, d.delta)? * dt / HBAR;
        }
    }
    Ok(theta)
}

fn pair_layers(schedule: &DriveSchedule, hardware: Option<&[DotParams]>) -> Result<Vec<(f64, Vec<EffDot>)>> {
    Ok(schedule.layers(hardware)?.into_iter().map(|l| (l.duration, l.dots)).collect())
}

fn propagate_basis(space: HilbertSpace, u: &DMatrix<C64>) -> Result<[QuantumState; 4]> {
    let mut out = Vec::with_capacity(4);
    for b in 0..4 {
        let col: DVector<C64> = u.column(space.index_of_bits(b, 0)).into_owned();
        out.push(QuantumState::pure_normalized(space, col)?);
    }
    Ok(out.try_into().expect("four basis states"))
}

/// Full-tier propagator over a sequence of segments, each integrated in the
/// frame co-rotating with its first driven dot and mapped back to the
/// interaction picture at the segment end.
fn full_propagator(segments: &[(f64, Vec<DotParams>)], space: HilbertSpace, opts: &OdeOptions) -> Result<DMatrix<C64>> {
    let mut u = DMatrix::<C64>::identity(space.dim(), space.dim());
    for (dt, dots) in segments {
        if *dt == 0.0 {
            continue;
        }
        let reference = dots
            .iter()
            .find(|d| d.omega != C64::new(0.0, 0.0))
            .map_or(0.0, |d| d.two_photon_detuning());
        let h = full_rotating_hamiltonian(dots, &space, reference)?;
        let step = floquet_propagator(&h, *dt, opts)?;
        let frame = DVector::from_vec(rotating_frame_phases(dots, &space, reference, *dt));
        u = DMatrix::from_diagonal(&frame) * step * u;
    }
    Ok(u)
}

/// Propagates `ff, fg, gf, gg` through `schedule` on `tier`, applies the
/// per-dot Stark correction and compares with `diag(1, 1, 1, −1)`.
///
/// `hardware` supplies the physical dots the targets are realized on. The
/// full tier requires it; without it the other tiers use the targets
/// directly, with no waveguide Stark shift.
/// Dots outside the driven pair are left in `|f⟩`.
pub fn cz_truth_table(
    schedule: &DriveSchedule,
    tier: Tier,
    hardware: Option<&[DotParams]>,
    opts: &GateOptions,
) -> Result<GateResult> {
    let (pair, sub) = restrict_to_pair(schedule)?;
    let hw: Option<Vec<DotParams>> = hardware
        .map(|h| {
            if h.len() != schedule.num_dots() {
                return Err(Error::DimensionMismatch { expected: schedule.num_dots(), found: h.len() });
            }
            Ok(pair.iter().map(|&j| h[j]).collect())
        })
        .transpose()?;
    if tier == Tier::Full && hw.is_none() {
        return Err(Error::TierMismatch(format!("the {tier} tier needs physical dot parameters")));
    }
    let layers = pair_layers(&sub, hw.as_deref())?;
    let theta = local_phases(&layers)?;
    let (amps, leakage) = match tier {
        Tier::Eff => {
            let space = HilbertSpace::qubits(2)?;
            let mut amps = [C64::new(0.0, 0.0); 4];
            for (b, amp) in amps.iter_mut().enumerate() {
                let mut psi = QuantumState::basis(space, b)?;
                for (dt, dots) in &layers {
                    psi = diagonal_propagate(&EffModel::from_eff(dots)?, &psi, 0.0, *dt)?;
                }
                *amp = psi.amplitudes().expect("pure")[b];
            }
            (amps, 0.0)
        }
        Tier::Eff1 => {
            let space = HilbertSpace::new(2, 2, opts.fock_cutoff)?;
            let mut u = DMatrix::<C64>::identity(space.dim(), space.dim());
            for (dt, dots) in &layers {
                if *dt > 0.0 {
                    u = floquet_propagator(&eff1_hamiltonian(dots, &space)?, *dt, &opts.ode)? * u;
                }
            }
            let a = ray_amplitudes(&propagate_basis(space, &u)?)?;
            (a, a.iter().map(|x| 1.0 - x.norm_sqr()).fold(0.0, f64::max))
        }
        Tier::Full => {
            let hw = hw.expect("checked above");
            let space = HilbertSpace::new(2, 3, opts.fock_cutoff)?;
            let mut segs = Vec::new();
            let mut t = 0.0;
            for s in &sub.segments {
                if s.t_start > t {
                    let idle = Segment { t_start: t, t_end: s.t_start, dots: vec![DotDrive::idle(); 2] };
                    segs.push((idle.duration(), idle.realize(&hw)?));
                }
                segs.push((s.duration(), s.realize(&hw)?));
                t = s.t_end;
            }
            let u = full_propagator(&segs, space, &opts.ode)?;
            let a = ray_amplitudes(&propagate_basis(space, &u)?)?;
            (a, a.iter().map(|x| 1.0 - x.norm_sqr()).fold(0.0, f64::max))
        }
    };
    let f = correction_factors(&theta);
    let corrected: [C64; 4] = std::array::from_fn(|b| amps[b] * f[b]);
    Ok(GateResult {
        tier,
        t_gate: sub.t_end(),
        phases: corrected.map(|a| wrap_phase(a.arg())),
        conditional_phase: conditional_from_amplitudes(&corrected),
        fidelity_vs_ideal_cz: cz_fidelity(&corrected),
        leakage,
    })
}

/// Cross-group conditional phase (radians) between groups `m` and `n` at
/// time `t`: `(2η_mn/δ_mn) sin(δ_mn t/ħ)` with `δ_J = Jδ₀`, `λ_J = √J λ₀`.
pub fn null_gate_residual_at(m: u32, n: u32, t: f64, lambda0: f64, delta0: f64) -> Result<f64> {
    if m == n {
        return Err(Error::InvalidParameter("null gate needs distinct groups".into()));
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("group labels start at 1".into()));
    }
    let (dm, dn) = (m as f64 * delta0, n as f64 * delta0);
    let lm = C64::new(lambda0 * (m as f64).sqrt(), 0.0);
    let ln = C64::new(lambda0 * (n as f64).sqrt(), 0.0);
    let eta = eta_from(lm, dm, ln, dn)?;
    let dmn = dm - dn;
    Ok(2.0 * eta / dmn * (dmn * t / HBAR).sin())
}

/// Residual at the scheduled time `t = kπħ/δ₀`; zero analytically.
pub fn null_gate_check(m: u32, n: u32, k: u64, lambda0: f64, delta0: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    null_gate_residual_at(m, n, k as f64 * PI * HBAR / delta0, lambda0, delta0)
}

/// Two dots in groups `m` and `n` driven for `t = kπħ/δ₀`.
pub fn null_gate_schedule(m: u32, n: u32, k: u64, lambda0: f64, delta0: f64) -> DriveSchedule {
    let t = k as f64 * PI * HBAR / delta0;
    let drive = |j: u32| DotDrive::driven(lambda0 * (j as f64).sqrt(), j as f64 * delta0, j);
    DriveSchedule {
        segments: vec![Segment { t_start: 0.0, t_end: t, dots: vec![drive(m), drive(n)] }],
        k_integer: Some(k),
        delta0: Some(delta0),
        lambda0: Some(lambda0),
    }
}

/// Conditional phase left by the cross-group pair after numerical evolution
/// on `tier`.
pub fn null_gate_numeric(
    m: u32,
    n: u32,
    k: u64,
    lambda0: f64,
    delta0: f64,
    tier: Tier,
    hardware: Option<&[DotParams]>,
    opts: &GateOptions,
) -> Result<f64> {
    if m == n {
        return Err(Error::InvalidParameter("null gate needs distinct groups".into()));
    }
    let schedule = null_gate_schedule(m, n, k, lambda0, delta0);
    Ok(cz_truth_table(&schedule, tier, hardware, opts)?.conditional_phase)
}
