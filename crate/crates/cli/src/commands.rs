use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use log::{info, warn};
use rayon::prelude::*;
use serde::Serialize;

use dotbus::entangle::{
    cluster_schedule, decay_sweep, execute_eff, graph_state_schedule, hardware_cz_schedule, ideal_graph_state, linspace,
    ncz_report, ncz_schedule, scaling_row, schedule_layers, DecoherenceStudy, GraphSpec, LatticeSpec, ScalingCase, ScalingRow,
    SweepPoint,
};
use dotbus::evolve::{fock_convergence_check, BlockEngine, DecayModel};
use dotbus::gates::{
    cz_truth_table, null_gate_check, null_gate_numeric, plan_scz, smallest_k, DriveSchedule, GateOptions, GateResult,
};
use dotbus::model::{validate_regime, DotParams, RegimeReport, Tier};
use dotbus::ops::state::fidelity;

use crate::config::{ExperimentConfig, SweepSchedule};
use crate::output::{num, prepare_dir, CsvTable, RunMeta};
use crate::plot::{line_plot, Series};

/// Largest allowed gap between the 2-qubit scaling row and the same gate
/// recomputed on the Fock engine.
pub const CROSS_CHECK_TOL: f64 = 1e-6;
/// Bound on the numerically evolved null-gate residual.
pub const NULL_NUMERIC_TOL: f64 = 1e-3;

/// How a command ended when it did not fail outright.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    RegimeFailure,
}

/// A failure reported by the numerics rather than by bad input.
#[derive(Debug, thiserror::Error)]
#[error("numerical failure: {0}")]
pub struct NumericalFailure(pub String);

pub struct RunContext {
    pub cfg: ExperimentConfig,
    pub out: PathBuf,
    pub plot: bool,
}

impl RunContext {
    pub fn new(cfg: ExperimentConfig, out: Option<PathBuf>, plot: bool) -> Result<Self> {
        let out = prepare_dir(out.as_deref().unwrap_or(&cfg.outputs.dir))?;
        std::fs::write(out.join("config.json"), cfg.to_json())?;
        Ok(RunContext { cfg, out, plot })
    }

    fn meta(&self, command: &str, tier: Tier, engine: &str) -> RunMeta {
        let mut m = RunMeta::new(command, &self.cfg, engine);
        m.tier = tier.to_string();
        m
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        std::fs::write(self.path(name), text).with_context(|| format!("cannot write {name}"))
    }

    fn warn_regime(&self, dots: &[DotParams]) {
        let r = validate_regime(dots, &self.cfg.thresholds);
        for (d, name) in r.failures() {
            warn!("dot {d}: regime condition `{name}` fails");
        }
    }

    fn pair_dots(&self) -> Result<[DotParams; 2]> {
        let [a, b] = self.cfg.cz.as_ref().map_or([0, 1], |c| c.pair);
        match (self.cfg.dots.get(a), self.cfg.dots.get(b)) {
            (Some(x), Some(y)) => Ok([*x, *y]),
            _ => bail!("a two-dot command needs at least two dots in the config"),
        }
    }

    fn planned_cz(&self) -> Result<DriveSchedule> {
        Ok(plan_scz(2, &[vec![(0, 1)]], self.cfg.lambda0, self.cfg.ratio_min)?)
    }

    /// Hardware for an `n`-dot register: the configured dots when there are
    /// exactly `n`, copies of a single configured dot, otherwise none.
    fn register_hardware(&self, n: usize) -> Option<Vec<DotParams>> {
        match self.cfg.dots.len() {
            len if len == n => Some(self.cfg.dots.clone()),
            1 => Some(vec![self.cfg.dots[0]; n]),
            _ => None,
        }
    }

    fn gate_options(&self) -> GateOptions {
        GateOptions { fock_cutoff: self.cfg.fock_cutoff, ode: self.cfg.ode() }
    }
}

fn engine_name(e: BlockEngine) -> String {
    match e {
        BlockEngine::Fock { cutoff } => format!("fock{cutoff}"),
        BlockEngine::Coherent => "coherent".into(),
        BlockEngine::Exact => "exact".into(),
    }
}

pub fn cmd_validate(ctx: &RunContext) -> Result<Outcome> {
    let report: RegimeReport = validate_regime(&ctx.cfg.dots, &ctx.cfg.thresholds);
    let mut t = CsvTable::new(&["dot", "condition", "ratio", "threshold", "passed"]);
    for d in &report.dots {
        for c in &d.checks {
            println!("dot {:>2}  {:<22} ratio {:>14.6}  threshold {:>8}  {}", d.dot, c.name, c.ratio, c.threshold, if c.passed { "ok" } else { "FAIL" });
            t.push(vec![d.dot.to_string(), c.name.clone(), num(c.ratio), num(c.threshold), c.passed.to_string()]);
        }
    }
    t.note("passed", report.passed());
    t.write(&ctx.path("regime.csv"), &ctx.meta("validate", ctx.cfg.tier, "none"))?;
    ctx.write_json("regime.json", &report)?;
    if report.passed() {
        println!("regime: all conditions hold");
        Ok(Outcome::Ok)
    } else {
        for (d, name) in report.failures() {
            println!("regime: dot {d} fails `{name}`");
        }
        Ok(Outcome::RegimeFailure)
    }
}

pub fn cz_result(ctx: &RunContext, tier: Tier) -> Result<GateResult> {
    let hw = ctx.pair_dots()?;
    ctx.warn_regime(&hw);
    let schedule = ctx.planned_cz()?;
    ctx.write_json("cz_schedule.json", &schedule)?;
    Ok(cz_truth_table(&schedule, tier, Some(&hw), &ctx.gate_options())?)
}

pub fn cmd_cz(ctx: &RunContext) -> Result<Outcome> {
    let tier = ctx.cfg.tier;
    let r = cz_result(ctx, tier)?;
    let mut t = CsvTable::new(&[
        "tier", "t_gate_ns", "phase_ff", "phase_fg", "phase_gf", "phase_gg", "conditional_phase", "fidelity",
    ]);
    let mut row = vec![r.tier.to_string(), num(r.t_gate)];
    row.extend(r.phases.iter().map(|&p| num(p)));
    row.extend([num(r.conditional_phase), num(r.fidelity_vs_ideal_cz)]);
    t.push(row);
    t.note("leakage", num(r.leakage));
    let mut engine = "none".to_string();
    if let Some(decay) = ctx.cfg.decay.filter(|d| d.gamma() > 0.0) {
        let e = ctx.cfg.block_engine(2);
        engine = engine_name(e);
        let hw = ctx.pair_dots()?;
        let f = DecoherenceStudy::new(&[ctx.planned_cz()?], Some(&hw), e, &ctx.cfg.ode())?.evaluate(&decay)?;
        t.note("decay_gamma_per_ns", num(decay.gamma()));
        t.note("decay_fidelity", num(f.fidelity));
        println!("with waveguide decay γ = {} /ns: F = {:.9}", decay.gamma(), f.fidelity);
    }
    t.write(&ctx.path("cz.csv"), &ctx.meta("cz", tier, &engine))?;
    println!(
        "CZ on tier {}: t_gate = {:.6} ns, conditional phase = {:.9} rad, fidelity vs CZ = {:.12}, leakage = {:.3e}",
        r.tier, r.t_gate, r.conditional_phase, r.fidelity_vs_ideal_cz, r.leakage
    );
    Ok(Outcome::Ok)
}

pub fn cmd_null_gate(ctx: &RunContext) -> Result<Outcome> {
    let tier = ctx.cfg.tier;
    let lambda0 = ctx.cfg.lambda0;
    let block = ctx.cfg.null_gate.clone();
    let groups = block.as_ref().map_or(vec![(1, 2), (1, 3), (2, 3)], |b| b.groups.clone());
    let ks = block.as_ref().map_or(vec![1, 2, 3], |b| b.k.clone());
    let delta0 = block
        .as_ref()
        .and_then(|b| b.delta0)
        .unwrap_or_else(|| lambda0 * (2.0 * smallest_k(ctx.cfg.ratio_min) as f64).sqrt());
    let hw = if tier == Tier::Full { Some(ctx.pair_dots()?.to_vec()) } else { None };
    let cases: Vec<(u32, u32, u64)> =
        groups.iter().flat_map(|&(m, n)| ks.iter().map(move |&k| (m, n, k))).collect();
    let opts = ctx.gate_options();
    let rows = cases
        .par_iter()
        .map(|&(m, n, k)| {
            let analytic = null_gate_check(m, n, k, lambda0, delta0)?;
            let numeric = null_gate_numeric(m, n, k, lambda0, delta0, tier, hw.as_deref(), &opts)?;
            Ok((m, n, k, analytic, numeric))
        })
        .collect::<Result<Vec<_>, dotbus::Error>>()?;
    let mut t = CsvTable::new(&["m", "n", "k", "t_ns", "analytic_residual_rad", "numeric_residual_rad"]);
    let mut worst = 0.0f64;
    for &(m, n, k, a, x) in &rows {
        let t_ns = k as f64 * std::f64::consts::PI * dotbus::model::HBAR / delta0;
        worst = worst.max(x.abs());
        println!("groups ({m},{n}) k = {k}: analytic {a:.3e} rad, {tier} {x:.3e} rad");
        t.push(vec![m.to_string(), n.to_string(), k.to_string(), num(t_ns), num(a), num(x)]);
    }
    t.note("delta0_meV", num(delta0));
    t.note("max_numeric_residual_rad", num(worst));
    t.write(&ctx.path("null_gate.csv"), &ctx.meta("null-gate", tier, "none"))?;
    println!("largest numeric residual {worst:.3e} rad (bound {NULL_NUMERIC_TOL:e})");
    Ok(Outcome::Ok)
}

fn graph_run(ctx: &RunContext, command: &str, spec: &GraphSpec, schedules: &[DriveSchedule]) -> Result<Outcome> {
    let n = spec.num_qubits;
    let hw = ctx.register_hardware(n);
    if let Some(h) = &hw {
        ctx.warn_regime(h);
    }
    ctx.write_json(&format!("{command}_schedules.json"), &schedules)?;
    let out = execute_eff(schedules, hw.as_deref())?;
    let f_eff = fidelity(&out, &ideal_graph_state(spec)?)?;
    let decay = ctx.cfg.decay_model();
    let engine = ctx.cfg.block_engine(n);
    let study = DecoherenceStudy::new(schedules, hw.as_deref(), engine, &ctx.cfg.ode())?;
    let f_decay = study.evaluate(&decay)?;
    let mut t = CsvTable::new(&["qubits", "edges", "layers", "duration_ns", "fidelity_eff", "fidelity_decay", "overlap_decay"]);
    t.push(vec![
        n.to_string(),
        spec.normalized_edges()?.len().to_string(),
        schedules.len().to_string(),
        num(study.duration()),
        num(f_eff),
        num(f_decay.fidelity),
        num(f_decay.overlap),
    ]);
    t.note("gamma_per_ns", num(decay.gamma()));
    t.write(&ctx.path(&format!("{command}.csv")), &ctx.meta(command, Tier::Eff1, &engine_name(engine)))?;
    println!(
        "{command}: {n} qubits, {} layers, {:.3} ns; eff fidelity {:.12}; with decay γ = {} /ns: {:.9}",
        schedules.len(),
        study.duration(),
        f_eff,
        decay.gamma(),
        f_decay.fidelity
    );
    Ok(Outcome::Ok)
}

pub fn cmd_graph(ctx: &RunContext) -> Result<Outcome> {
    let block = ctx.cfg.graph.clone().ok_or_else(|| anyhow!("the config has no `graph` block"))?;
    let spec = block.spec(ctx.cfg.rng_seed);
    let schedules = graph_state_schedule(&spec, ctx.cfg.lambda0, ctx.cfg.ratio_min)?;
    graph_run(ctx, "graph", &spec, &schedules)
}

pub fn cmd_cluster(ctx: &RunContext) -> Result<Outcome> {
    let lattice: LatticeSpec = ctx.cfg.lattice.ok_or_else(|| anyhow!("the config has no `lattice` block"))?;
    let schedules = cluster_schedule(lattice, ctx.cfg.lambda0, ctx.cfg.ratio_min)?;
    graph_run(ctx, "cluster", &lattice.graph(), &schedules)
}

pub fn cmd_ncz(ctx: &RunContext) -> Result<Outcome> {
    let controls = ctx.cfg.ncz.as_ref().map_or(2, |b| b.controls);
    let schedules = ncz_schedule(controls, ctx.cfg.lambda0, ctx.cfg.ratio_min)?;
    let report = ncz_report(controls, &schedules)?;
    let mut t = CsvTable::new(&["basis", "phase", "target_phase", "deviation"]);
    for i in 0..report.basis.len() {
        let dev = (num_complex::Complex64::from_polar(1.0, report.phases[i])
            - num_complex::Complex64::from_polar(1.0, report.target_phases[i]))
        .norm();
        t.push(vec![report.basis[i].clone(), num(report.phases[i]), num(report.target_phases[i]), num(dev)]);
    }
    t.note("max_deviation", num(report.max_deviation));
    t.note("gate_fidelity", num(report.gate_fidelity));
    t.write(&ctx.path("ncz.csv"), &ctx.meta("ncz", Tier::Eff, "none"))?;
    ctx.write_json("ncz.json", &report)?;
    ctx.write_json("ncz_schedules.json", &schedules)?;
    println!(
        "NCZ recipe with {controls} controls: max deviation from the target {:.6}, gate fidelity {:.6}, {} mismatched entries",
        report.max_deviation,
        report.gate_fidelity,
        report.mismatched.len()
    );
    Ok(Outcome::Ok)
}

pub struct SweepOutput {
    pub label: String,
    pub t_gate: f64,
    pub points: Vec<SweepPoint>,
}

pub fn run_decay_sweep(ctx: &RunContext) -> Result<Vec<SweepOutput>> {
    let sweep = ctx.cfg.sweep.clone().ok_or_else(|| anyhow!("the config has no `sweep` block"))?;
    let variants = if sweep.variants.is_empty() {
        vec![crate::config::SweepVariant { label: "base".into(), dots: ctx.cfg.dots.clone() }]
    } else {
        sweep.variants.clone()
    };
    let ratios = linspace(sweep.tau_ratio_range[0], sweep.tau_ratio_range[1], sweep.points);
    let engine = ctx.cfg.block_engine(2);
    variants
        .iter()
        .map(|v| {
            if v.dots.len() != 2 {
                bail!("sweep variant `{}` needs exactly two dots", v.label);
            }
            let hw = [v.dots[0], v.dots[1]];
            ctx.warn_regime(&hw);
            let schedule = match sweep.schedule {
                SweepSchedule::Hardware => hardware_cz_schedule(&hw)?,
                SweepSchedule::Planned => ctx.planned_cz()?,
            };
            let study = DecoherenceStudy::new(&[schedule], Some(&hw), engine, &ctx.cfg.ode())?;
            info!("sweep `{}`: gate lasts {} ns", v.label, study.duration());
            // one point per task; order follows the grid
            let points = ratios
                .par_iter()
                .map(|&x| decay_sweep(&study, &[x], sweep.tau_w).map(|mut p| p.remove(0)))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(SweepOutput { label: v.label.clone(), t_gate: study.duration(), points })
        })
        .collect()
}

pub fn is_monotone_nonincreasing(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack)
}

pub fn cmd_decay_sweep(ctx: &RunContext) -> Result<Outcome> {
    let engine = engine_name(ctx.cfg.block_engine(2));
    let outputs = run_decay_sweep(ctx)?;
    let mut series = Vec::new();
    for o in &outputs {
        let mut t = CsvTable::new(&["tau_ratio", "fidelity", "overlap", "gamma_per_ns"]);
        for p in &o.points {
            t.push(vec![num(p.tau_ratio), num(p.fidelity.fidelity), num(p.fidelity.overlap), num(p.gamma_per_ns)]);
        }
        let f: Vec<f64> = o.points.iter().map(|p| p.fidelity.fidelity).collect();
        let monotone = is_monotone_nonincreasing(&f, 0.0);
        t.note("variant", &o.label);
        t.note("t_gate_ns", num(o.t_gate));
        t.note("monotone_nonincreasing", monotone);
        t.write(&ctx.path(&format!("decay_sweep_{}.csv", o.label)), &ctx.meta("decay-sweep", Tier::Eff1, &engine))?;
        println!(
            "variant {}: t_gate = {:.3} ns, F from {:.9} to {:.9}, monotone nonincreasing: {monotone}",
            o.label,
            o.t_gate,
            f.first().copied().unwrap_or(f64::NAN),
            f.last().copied().unwrap_or(f64::NAN)
        );
        series.push(Series { label: o.label.clone(), points: o.points.iter().map(|p| (p.tau_ratio, p.fidelity.fidelity)).collect() });
    }
    if ctx.plot {
        line_plot(&ctx.path("decay_sweep.svg"), "CZ fidelity under waveguide decay", "tau_w / tau_0", "F", &series)?;
    }
    Ok(Outcome::Ok)
}

/// Scaling cases with transposes added (and duplicates removed) when asked.
pub fn scaling_cases(ctx: &RunContext) -> Vec<ScalingCase> {
    let block = ctx.cfg.scaling.clone();
    let mut cases = block.as_ref().map_or_else(
        || [(1, 12), (2, 6), (3, 4)].iter().map(|&(rows, cols)| ScalingCase::Cluster { rows, cols }).collect(),
        |b| b.cases.clone(),
    );
    if block.as_ref().is_none_or(|b| b.transposes) {
        let extra: Vec<ScalingCase> = cases
            .iter()
            .filter_map(|c| match *c {
                ScalingCase::Cluster { rows, cols } if rows != cols => Some(ScalingCase::Cluster { rows: cols, cols: rows }),
                _ => None,
            })
            .collect();
        cases.extend(extra);
    }
    let mut seen = std::collections::HashSet::new();
    cases.retain(|c| seen.insert(c.clone()));
    cases
}

pub struct ScalingOutput {
    pub rows: Vec<ScalingRow>,
    /// Largest `|F_{M×N} − F_{N×M}|` among the transpose pairs present.
    pub transpose_gap: f64,
    /// Largest gap between a 2-qubit row and the same gate on Fock blocks.
    pub cross_check_gap: Option<f64>,
}

pub fn run_scaling(ctx: &RunContext) -> Result<ScalingOutput> {
    let decay = ctx.cfg.decay.ok_or_else(|| anyhow!("the scaling study needs a `decay` block"))?;
    let dot = ctx.cfg.dots[0];
    let cases = scaling_cases(ctx);
    let rows = cases
        .par_iter()
        .map(|c| {
            let engine = ctx.cfg.block_engine(c.num_qubits());
            scaling_row(c, Some(&dot), ctx.cfg.lambda0, ctx.cfg.ratio_min, &decay, engine, &ctx.cfg.ode())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut transpose_gap = 0.0f64;
    for (a, ra) in cases.iter().zip(&rows) {
        if let ScalingCase::Cluster { rows: r, cols: c } = *a {
            if let Some(i) = cases.iter().position(|b| *b == ScalingCase::Cluster { rows: c, cols: r }) {
                transpose_gap = transpose_gap.max((ra.fidelity.fidelity - rows[i].fidelity.fidelity).abs());
            }
        }
    }
    let mut cross_check_gap = None;
    if rows.iter().any(|r| r.qubits == 2) {
        let reference = two_qubit_reference(ctx, &dot, &decay)?;
        for r in rows.iter().filter(|r| r.qubits == 2) {
            let gap = (r.fidelity.fidelity - reference).abs();
            cross_check_gap = Some(cross_check_gap.unwrap_or(0.0f64).max(gap));
        }
    }
    Ok(ScalingOutput { rows, transpose_gap, cross_check_gap })
}

/// The planned CZ on two copies of `dot`, on truncated Fock blocks.
fn two_qubit_reference(ctx: &RunContext, dot: &DotParams, decay: &DecayModel) -> Result<f64> {
    let engine = BlockEngine::Fock { cutoff: ctx.cfg.fock_cutoff };
    let study = DecoherenceStudy::new(&[ctx.planned_cz()?], Some(&[*dot, *dot]), engine, &ctx.cfg.ode())?;
    Ok(study.evaluate(decay)?.fidelity)
}

pub fn cmd_scaling(ctx: &RunContext) -> Result<Outcome> {
    let out = run_scaling(ctx)?;
    let mut t = CsvTable::new(&["kind", "shape", "qubits", "layers", "duration_ns", "F", "overlap"]);
    for r in &out.rows {
        t.push(vec![
            r.kind.clone(),
            r.shape.clone(),
            r.qubits.to_string(),
            r.layers.to_string(),
            num(r.duration),
            num(r.fidelity.fidelity),
            num(r.fidelity.overlap),
        ]);
        println!("{:<8} {:<8} {:>3} qubits {:>2} layers {:>12.3} ns  F = {:.6e}", r.kind, r.shape, r.qubits, r.layers, r.duration, r.fidelity.fidelity);
    }
    t.note("gamma_per_ns", num(ctx.cfg.decay_model().gamma()));
    t.note("transpose_max_gap", num(out.transpose_gap));
    if let Some(g) = out.cross_check_gap {
        t.note("two_qubit_fock_gap", num(g));
    }
    let engine = if ctx.cfg.engine == crate::config::EngineChoice::Auto { "auto".into() } else { engine_name(ctx.cfg.block_engine(2)) };
    t.write(&ctx.path("scaling.csv"), &ctx.meta("scaling", Tier::Eff1, &engine))?;
    if ctx.plot {
        let mut series: Vec<Series> = Vec::new();
        for r in &out.rows {
            let label = r.kind.clone();
            match series.iter_mut().find(|s| s.label == label) {
                Some(s) => s.points.push((r.qubits as f64, r.fidelity.fidelity)),
                None => series.push(Series { label, points: vec![(r.qubits as f64, r.fidelity.fidelity)] }),
            }
        }
        for s in &mut series {
            s.points.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        line_plot(&ctx.path("scaling.svg"), "Fidelity versus register size", "qubits", "F", &series)?;
    }
    println!("largest transpose gap {:.3e}", out.transpose_gap);
    if let Some(g) = out.cross_check_gap {
        println!("2-qubit row vs Fock-block CZ: gap {g:.3e}");
        if g > CROSS_CHECK_TOL {
            return Err(NumericalFailure(format!("2-qubit cross-check gap {g:e} exceeds {CROSS_CHECK_TOL:e}")).into());
        }
    }
    Ok(Outcome::Ok)
}

pub fn cmd_fock_check(ctx: &RunContext) -> Result<Outcome> {
    let hw = ctx.pair_dots()?;
    let c = ctx.cfg.fock_cutoff;
    let cutoffs = ctx.cfg.fock_check.as_ref().map_or(vec![c, c + 1, c + 2], |b| b.cutoffs.clone());
    let decay = ctx.cfg.decay_model();
    let layers = schedule_layers(&[ctx.planned_cz()?], Some(&hw))?;
    let report = fock_convergence_check(&layers, &decay, &cutoffs, &ctx.cfg.ode())?;
    let mut t = CsvTable::new(&["from", "to", "trace_distance", "fidelity"]);
    for s in &report.steps {
        t.push(vec![s.from.to_string(), s.to.to_string(), num(s.change), num(s.fidelity)]);
        println!("cutoff {} -> {}: trace distance {:.3e}", s.from, s.to, s.change);
    }
    t.note("converged", report.converged);
    t.write(&ctx.path("fock_check.csv"), &ctx.meta("fock-check", Tier::Eff1, "fock"))?;
    if !report.converged {
        return Err(NumericalFailure(format!("Fock cutoffs {:?} not converged (last change {:e})", report.cutoffs, report.last_change())).into());
    }
    println!("converged");
    Ok(Outcome::Ok)
}
