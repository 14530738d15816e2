//! Decoherence engines for the flip-free tier.
//!
//! The eff1 Hamiltonian never flips a qubit, so with the register starting in
//! `|+⟩^⊗N` and the waveguide in vacuum, the full density matrix is
//! `Σ_{s,s'} |s⟩⟨s'| ⊗ X_{ss'}` where each cavity block `X_{ss'}` obeys its
//! own master equation driven by the kets' waveguide couplings. Two engines
//! exploit this:
//!
//! * [`fock_blockwise`] integrates each distinct block on the truncated Fock
//!   space, grouping kets whose coupling history is identical.
//! * [`coherent_blockwise`] uses the fact that each block stays proportional
//!   to `|α_s⟩⟨α_{s'}|` for coherent amplitudes that are linear in the
//!   register bits, so every register element is the exponential of a
//!   quadratic form whose coefficients have closed forms.
//! * [`exact_blockwise`] follows one coherent amplitude per ket class in
//!   closed form. No truncation and no averaging of `χ`, at the cost of one
//!   element per class pair.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::lindblad::{lindblad_evolve, DecayModel};
use super::ode::{Dopri5, OdeOptions};
use super::schrodinger::EvolutionSpec;
use crate::error::{Error, Result};
use crate::model::hamiltonians::eff1_hamiltonian;
use crate::model::params::EffDot;
use crate::model::units::HBAR;
use crate::model::Tier;
use crate::ops::space::HilbertSpace;
use crate::ops::state::QuantumState;

/// Largest register for which dense density matrices are materialized.
pub const MAX_DENSE_DOTS: usize = 10;
/// Largest register the engines accept.
pub const MAX_BLOCK_DOTS: usize = 14;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// One interval of fixed drive settings. Drive phases restart at the
/// beginning of every layer.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockLayer {
    pub duration: f64,
    pub dots: Vec<EffDot>,
}

fn check_layers(layers: &[BlockLayer]) -> Result<usize> {
    let n = layers
        .first()
        .map(|l| l.dots.len())
        .ok_or_else(|| Error::InvalidParameter("no layers to evolve".into()))?;
    if n == 0 || n > MAX_BLOCK_DOTS {
        return Err(Error::Capacity(format!("blockwise engines support 1..={MAX_BLOCK_DOTS} dots, got {n}")));
    }
    for l in layers {
        if l.dots.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: l.dots.len() });
        }
        if !(l.duration >= 0.0 && l.duration.is_finite()) {
            return Err(Error::InvalidParameter(format!("layer duration {} is invalid", l.duration)));
        }
    }
    Ok(n)
}

fn bit(bits: usize, n: usize, j: usize) -> bool {
    (bits >> (n - 1 - j)) & 1 == 1
}

/// Register density matrix produced by a blockwise engine, indexed by
/// bitstrings (bit `N-1-j` is dot `j`, set means `|g⟩`).
pub trait RegisterState {
    fn num_dots(&self) -> usize;

    fn element(&self, s: usize, sp: usize) -> C64;

    fn density_matrix(&self) -> Result<DMatrix<C64>> {
        let n = self.num_dots();
        if n > MAX_DENSE_DOTS {
            return Err(Error::Capacity(format!(
                "dense register matrices are limited to {MAX_DENSE_DOTS} dots"
            )));
        }
        let d = 1usize << n;
        Ok(DMatrix::from_fn(d, d, |r, c| self.element(r, c)))
    }

    fn to_state(&self) -> Result<QuantumState> {
        QuantumState::density(HilbertSpace::qubits(self.num_dots())?, self.density_matrix()?)
    }
}

/// `Tr(ρ ρ')` summed element by element; works for any register size the
/// engines accept.
pub fn overlap_fidelity(a: &dyn RegisterState, b: &dyn RegisterState) -> Result<f64> {
    if a.num_dots() != b.num_dots() {
        return Err(Error::SpaceMismatch);
    }
    let d = 1usize << a.num_dots();
    let mut acc = ZERO;
    for s in 0..d {
        for sp in 0..d {
            acc += a.element(s, sp) * b.element(sp, s);
        }
    }
    finish_overlap(acc)
}

fn finish_overlap(acc: C64) -> Result<f64> {
    if acc.im.abs() > 1e-10 * acc.norm().max(1e-300) + 1e-14 {
        return Err(Error::InvalidState(format!("Tr(ρρ') has imaginary residue {:e}", acc.im)));
    }
    Ok(acc.re)
}

// ---------------------------------------------------------------------------
// Grouping

/// How many independent block equations a layer list needs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupingAudit {
    pub num_dots: usize,
    /// Kets with identical waveguide-coupling history.
    pub ket_classes: usize,
    /// Unordered class pairs; the rest follow by Hermiticity.
    pub block_equations: usize,
    /// `4^N`.
    pub blocks_total: u128,
}

struct KetClasses {
    class_of: Vec<u32>,
    reps: Vec<usize>,
}

fn signature(d: &EffDot) -> [u64; 4] {
    [d.lambda.re.to_bits(), d.lambda.im.to_bits(), d.delta.to_bits(), d.dispersive.to_bits()]
}

fn classify(n: usize, layers: &[BlockLayer]) -> KetClasses {
    // per layer, dots with identical parameters are interchangeable
    let labels: Vec<Vec<usize>> = layers
        .iter()
        .map(|l| {
            let mut seen: Vec<[u64; 4]> = Vec::new();
            l.dots
                .iter()
                .map(|d| {
                    let sig = signature(d);
                    match seen.iter().position(|s| *s == sig) {
                        Some(p) => p,
                        None => {
                            seen.push(sig);
                            seen.len() - 1
                        }
                    }
                })
                .collect()
        })
        .collect();
    let mut index: HashMap<Vec<u16>, u32> = HashMap::new();
    let mut class_of = Vec::with_capacity(1 << n);
    let mut reps = Vec::new();
    for s in 0..1usize << n {
        let mut key = Vec::new();
        for lab in &labels {
            let kinds = lab.iter().max().map_or(0, |m| m + 1);
            let mut counts = vec![0u16; kinds];
            for j in 0..n {
                if bit(s, n, j) {
                    counts[lab[j]] += 1;
                }
            }
            key.extend(counts);
            key.push(u16::MAX);
        }
        let next = index.len() as u32;
        let id = *index.entry(key).or_insert_with(|| {
            reps.push(s);
            next
        });
        class_of.push(id);
    }
    KetClasses { class_of, reps }
}

pub fn grouping_audit(layers: &[BlockLayer]) -> Result<GroupingAudit> {
    let n = check_layers(layers)?;
    let k = classify(n, layers).reps.len();
    Ok(GroupingAudit { num_dots: n, ket_classes: k, block_equations: k * (k + 1) / 2, blocks_total: 1u128 << (2 * n) })
}

// ---------------------------------------------------------------------------
// Fock-space blocks

/// Waveguide drive felt by one ket during one layer:
/// `H = −χ a†a − Σ_m (A_m e^{iδ_m t/ħ} a + h.c.)`.
#[derive(Clone, Debug)]
struct KetDrive {
    chi: f64,
    terms: Vec<(C64, f64)>,
}

impl KetDrive {
    fn new(s: usize, n: usize, layer: &BlockLayer) -> Self {
        let mut chi = 0.0;
        let mut terms: Vec<(C64, f64)> = Vec::new();
        for j in 0..n {
            if !bit(s, n, j) {
                continue;
            }
            let d = &layer.dots[j];
            chi += d.dispersive;
            if d.lambda != ZERO {
                match terms.iter_mut().find(|(_, delta)| *delta == d.delta) {
                    Some(t) => t.0 += d.lambda,
                    None => terms.push((d.lambda, d.delta)),
                }
            }
        }
        KetDrive { chi, terms }
    }

    fn coupling(&self, t: f64) -> C64 {
        self.terms.iter().map(|&(a, d)| a * C64::from_polar(1.0, d * t / HBAR)).sum()
    }
}

/// Right-hand side of one cavity block `X_{ss'}` (column-major, `d × d`).
fn block_rhs(d: usize, ket: &KetDrive, bra: &KetDrive, gamma: f64, t: f64, x: &[C64], dx: &mut [C64]) {
    let l = ket.coupling(t);
    let lp = bra.coupling(t);
    let mi = C64::new(0.0, -1.0 / HBAR);
    let sq: Vec<f64> = (0..=d).map(|k| (k as f64).sqrt()).collect();
    let at = |r: usize, c: usize| x[c * d + r];
    for c in 0..d {
        for r in 0..d {
            let xrc = at(r, c);
            // H X with H = −χ n − Λ a − Λ* a†
            let mut hx = -ket.chi * r as f64 * xrc;
            if r + 1 < d {
                hx -= l * sq[r + 1] * at(r + 1, c);
            }
            if r > 0 {
                hx -= l.conj() * sq[r] * at(r - 1, c);
            }
            // X H' with H' = −χ' n − Λ' a − Λ'* a†
            let mut xh = -bra.chi * c as f64 * xrc;
            if c > 0 {
                xh -= lp * sq[c] * at(r, c - 1);
            }
            if c + 1 < d {
                xh -= lp.conj() * sq[c + 1] * at(r, c + 1);
            }
            let mut v = mi * (hx - xh);
            if gamma > 0.0 {
                if r + 1 < d && c + 1 < d {
                    v += gamma * sq[r + 1] * sq[c + 1] * at(r + 1, c + 1);
                }
                v -= 0.5 * gamma * (r + c) as f64 * xrc;
            }
            dx[c * d + r] = v;
        }
    }
}

/// Register from the Fock-block engine: elements are shared by every pair
/// of kets in the same pair of classes.
#[derive(Clone, Debug)]
pub struct FockRegister {
    num_dots: usize,
    class_of: Vec<u32>,
    values: DMatrix<C64>,
    pub audit: GroupingAudit,
    pub cutoff: usize,
}

impl RegisterState for FockRegister {
    fn num_dots(&self) -> usize {
        self.num_dots
    }

    fn element(&self, s: usize, sp: usize) -> C64 {
        self.values[(self.class_of[s] as usize, self.class_of[sp] as usize)]
    }
}

/// Evolves `|+⟩^⊗N ⊗ |0⟩` through `layers` by integrating every distinct
/// cavity block on `cutoff + 1` Fock states.
pub fn fock_blockwise(
    layers: &[BlockLayer],
    decay: &DecayModel,
    cutoff: usize,
    opts: &OdeOptions,
) -> Result<FockRegister> {
    let n = check_layers(layers)?;
    if cutoff == 0 {
        return Err(Error::InvalidParameter("Fock blocks need a cutoff of at least 1".into()));
    }
    let classes = classify(n, layers);
    let k = classes.reps.len();
    let d = cutoff + 1;
    let drives: Vec<Vec<KetDrive>> = classes
        .reps
        .iter()
        .map(|&s| layers.iter().map(|l| KetDrive::new(s, n, l)).collect())
        .collect();
    let gamma = decay.gamma();
    let c0 = 0.5f64.powi(n as i32);
    let mut values = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let mut x = vec![ZERO; d * d];
            x[0] = C64::new(1.0, 0.0);
            let mut ode = Dopri5::new(*opts);
            for (li, layer) in layers.iter().enumerate() {
                let (ket, bra) = (&drives[a][li], &drives[b][li]);
                ode.integrate(|t, x, dx| block_rhs(d, ket, bra, gamma, t, x, dx), 0.0, layer.duration, &mut x)?;
            }
            let tr: C64 = (0..d).map(|i| x[i * d + i]).sum::<C64>() * c0;
            values[(a, b)] = tr;
            values[(b, a)] = tr.conj();
        }
    }
    Ok(FockRegister {
        num_dots: n,
        class_of: classes.class_of,
        values,
        audit: GroupingAudit { num_dots: n, ket_classes: k, block_equations: k * (k + 1) / 2, blocks_total: 1u128 << (2 * n) },
        cutoff,
    })
}

// ---------------------------------------------------------------------------
// Coherent-state blocks

/// `∫_0^T e^{xτ} dτ`.
fn exp_integral(x: C64, t: f64) -> C64 {
    let z = x * t;
    if z.norm() < 1e-4 {
        t * (1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0)
    } else {
        (z.exp() - 1.0) / x
    }
}

/// Register from the coherent-state engine:
/// `ρ[s,s'] = c₀ exp(sᵀM_w s + conj(s'ᵀM_{w'} s') + sᵀC_{ww'} s')`, with `w`
/// the Hamming weight of `s`.
#[derive(Clone, Debug)]
pub struct CoherentRegister {
    num_dots: usize,
    log_c0: f64,
    quad: Vec<DMatrix<C64>>,
    cross: Vec<DMatrix<C64>>,
}

impl CoherentRegister {
    fn cross_at(&self, w: usize, wp: usize) -> &DMatrix<C64> {
        &self.cross[w * (self.num_dots + 1) + wp]
    }

    fn ket_quad(&self, s: usize) -> C64 {
        let n = self.num_dots;
        let members: Vec<usize> = (0..n).filter(|&j| bit(s, n, j)).collect();
        let m = &self.quad[members.len()];
        let mut acc = ZERO;
        for &j in &members {
            for &k in &members {
                acc += m[(j, k)];
            }
        }
        acc
    }

    /// `Tr(ρ σ)` for two registers from this engine, in `O(4^N · N)`.
    pub fn overlap(&self, other: &CoherentRegister) -> Result<f64> {
        let n = self.num_dots;
        if other.num_dots != n {
            return Err(Error::SpaceMismatch);
        }
        let dim = 1usize << n;
        let qa: Vec<C64> = (0..dim).map(|s| self.ket_quad(s)).collect();
        let qb: Vec<C64> = (0..dim).map(|s| other.ket_quad(s)).collect();
        let weight: Vec<usize> = (0..dim).map(|s| s.count_ones() as usize).collect();
        let mut by_weight: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for s in 0..dim {
            by_weight[weight[s]].push(s);
        }
        // exponent: u(s) + v(s') + sᵀ D_{w w'} s', D = C^a_{ww'} + (C^b_{w'w})ᵀ
        let d: Vec<DMatrix<C64>> = (0..=n)
            .flat_map(|w| (0..=n).map(move |wp| (w, wp)))
            .map(|(w, wp)| self.cross_at(w, wp) + other.cross_at(wp, w).transpose())
            .collect();
        let base = self.log_c0 + other.log_c0;
        let mut acc = ZERO;
        let mut row = vec![ZERO; n];
        for s in 0..dim {
            let w = weight[s];
            let u = qa[s] + qb[s].conj();
            for wp in 0..=n {
                let dm = &d[w * (n + 1) + wp];
                for (k, r) in row.iter_mut().enumerate() {
                    *r = (0..n).filter(|&j| bit(s, n, j)).map(|j| dm[(j, k)]).sum();
                }
                for &sp in &by_weight[wp] {
                    let mut e = C64::new(base, 0.0) + u + qa[sp].conj() + qb[sp];
                    for (k, r) in row.iter().enumerate() {
                        if bit(sp, n, k) {
                            e += r;
                        }
                    }
                    acc += e.exp();
                }
            }
        }
        finish_overlap(acc)
    }
}

impl RegisterState for CoherentRegister {
    fn num_dots(&self) -> usize {
        self.num_dots
    }

    fn element(&self, s: usize, sp: usize) -> C64 {
        let n = self.num_dots;
        let c = self.cross_at(s.count_ones() as usize, sp.count_ones() as usize);
        let mut e = C64::new(self.log_c0, 0.0) + self.ket_quad(s) + self.ket_quad(sp).conj();
        for j in (0..n).filter(|&j| bit(s, n, j)) {
            for k in (0..n).filter(|&k| bit(sp, n, k)) {
                e += c[(j, k)];
            }
        }
        e.exp()
    }
}

/// Closed-form evolution of `|+⟩^⊗N ⊗ |0⟩` through `layers`.
///
/// Exact for the eff1 tier when, within each layer, every dot has the same
/// waveguide Stark coefficient `χ`; otherwise `χ_s` is replaced by
/// `χ̄·w(s)` with `χ̄` the layer mean, an error of order
/// `spread(χ)/δ` in the coherent amplitudes.
pub fn coherent_blockwise(layers: &[BlockLayer], decay: &DecayModel) -> Result<CoherentRegister> {
    let n = check_layers(layers)?;
    let gamma = decay.gamma();
    let i_hbar = C64::new(0.0, 1.0 / HBAR);
    let zero = DMatrix::<C64>::zeros(n, n);
    let mut quad = vec![zero.clone(); n + 1];
    let mut cross = vec![zero; (n + 1) * (n + 1)];
    // β[w][j]: coherent amplitude contributed by dot j to kets of weight w
    let mut beta = vec![vec![ZERO; n]; n + 1];
    for layer in layers {
        let t = layer.duration;
        let chi_bar = layer.dots.iter().map(|d| d.dispersive).sum::<f64>() / n as f64;
        // amplitude pieces c·e^{μτ} for each (w, j)
        let mut terms: Vec<Vec<Vec<(C64, C64)>>> = Vec::with_capacity(n + 1);
        for w in 0..=n {
            let kappa = i_hbar * (chi_bar * w as f64) - gamma / 2.0;
            let mut per_dot = Vec::with_capacity(n);
            for j in 0..n {
                let d = &layer.dots[j];
                let b0 = beta[w][j];
                if d.lambda == ZERO {
                    per_dot.push(vec![(b0, kappa)]);
                    continue;
                }
                let nu = C64::new(0.0, -d.delta / HBAR);
                let gap = nu - kappa;
                if gap.norm() * t.max(HBAR) < 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "dot {j} is driven on resonance with the dressed waveguide mode"
                    )));
                }
                let a = i_hbar * d.lambda.conj() / gap;
                per_dot.push(vec![(a, nu), (b0 - a, kappa)]);
            }
            terms.push(per_dot);
        }
        for w in 0..=n {
            for (j, dj) in layer.dots.iter().enumerate() {
                if dj.lambda == ZERO {
                    continue;
                }
                let nu_j = C64::new(0.0, -dj.delta / HBAR);
                for k in 0..n {
                    let integral: C64 = terms[w][k].iter().map(|&(c, mu)| c * exp_integral(mu - nu_j, t)).sum();
                    quad[w][(j, k)] += i_hbar * dj.lambda * integral;
                }
            }
        }
        if gamma > 0.0 {
            for w in 0..=n {
                for wp in 0..=n {
                    let cm = &mut cross[w * (n + 1) + wp];
                    for j in 0..n {
                        for k in 0..n {
                            let mut acc = ZERO;
                            for &(cp, mp) in &terms[w][j] {
                                for &(cq, mq) in &terms[wp][k] {
                                    acc += cp * cq.conj() * exp_integral(mp + mq.conj(), t);
                                }
                            }
                            cm[(j, k)] += gamma * acc;
                        }
                    }
                }
            }
        }
        for w in 0..=n {
            for j in 0..n {
                beta[w][j] = terms[w][j].iter().map(|&(c, mu)| c * (mu * t).exp()).sum();
            }
        }
    }
    for w in 0..=n {
        for wp in 0..=n {
            let cm = &mut cross[w * (n + 1) + wp];
            for j in 0..n {
                for k in 0..n {
                    cm[(j, k)] += beta[w][j] * beta[wp][k].conj();
                }
            }
        }
    }
    Ok(CoherentRegister { num_dots: n, log_c0: -(n as f64) * std::f64::consts::LN_2, quad, cross })
}

// ---------------------------------------------------------------------------
// Coherent amplitudes per ket class

/// Closed-form amplitude `α(τ) = Σ c·e^{μτ}` of one ket during one layer.
fn class_amplitude(drive: &KetDrive, alpha0: C64, gamma: f64, t: f64) -> Result<Vec<(C64, C64)>> {
    let i_hbar = C64::new(0.0, 1.0 / HBAR);
    let kappa = i_hbar * drive.chi - gamma / 2.0;
    let mut pieces = Vec::with_capacity(drive.terms.len() + 1);
    let mut rest = alpha0;
    for &(lambda, delta) in &drive.terms {
        let nu = C64::new(0.0, -delta / HBAR);
        let gap = nu - kappa;
        if gap.norm() * t.max(HBAR) < 1e-9 {
            return Err(Error::InvalidParameter("a ket is driven on resonance with the dressed waveguide mode".into()));
        }
        let a = i_hbar * lambda.conj() / gap;
        pieces.push((a, nu));
        rest -= a;
    }
    pieces.push((rest, kappa));
    Ok(pieces)
}

/// Register from the per-class coherent engine.
#[derive(Clone, Debug)]
pub struct ExactRegister {
    num_dots: usize,
    class_of: Vec<u32>,
    values: DMatrix<C64>,
    pub audit: GroupingAudit,
}

impl ExactRegister {
    /// `Tr(ρ σ)` summed over class pairs; both registers must share classes.
    fn overlap(&self, other: &ExactRegister) -> Result<f64> {
        let k = self.values.nrows();
        let mut size = vec![0.0f64; k];
        for &c in &self.class_of {
            size[c as usize] += 1.0;
        }
        let mut acc = ZERO;
        for a in 0..k {
            for b in 0..k {
                acc += size[a] * size[b] * self.values[(a, b)] * other.values[(b, a)];
            }
        }
        finish_overlap(acc)
    }
}

impl RegisterState for ExactRegister {
    fn num_dots(&self) -> usize {
        self.num_dots
    }

    fn element(&self, s: usize, sp: usize) -> C64 {
        self.values[(self.class_of[s] as usize, self.class_of[sp] as usize)]
    }
}

/// Evolves `|+⟩^⊗N ⊗ |0⟩` through `layers`, keeping each block as
/// `c_{ss'} |α_s⟩⟨α_{s'}|` with unnormalized coherent states. Exact for the
/// eff1 tier.
pub fn exact_blockwise(layers: &[BlockLayer], decay: &DecayModel) -> Result<ExactRegister> {
    let n = check_layers(layers)?;
    if n > MAX_DENSE_DOTS {
        return Err(Error::Capacity(format!("the per-class engine supports up to {MAX_DENSE_DOTS} dots, got {n}")));
    }
    let classes = classify(n, layers);
    let k = classes.reps.len();
    let gamma = decay.gamma();
    let i_hbar = C64::new(0.0, 1.0 / HBAR);
    // per class: ln-weight from the drive, amplitude pieces per layer
    let mut log_weight = vec![ZERO; k];
    let mut pieces: Vec<Vec<Vec<(C64, C64)>>> = vec![Vec::with_capacity(layers.len()); k];
    let mut alpha = vec![ZERO; k];
    for (c, &s) in classes.reps.iter().enumerate() {
        for layer in layers {
            let drive = KetDrive::new(s, n, layer);
            let p = class_amplitude(&drive, alpha[c], gamma, layer.duration)?;
            for &(lambda, delta) in &drive.terms {
                let nu = C64::new(0.0, -delta / HBAR);
                let integral: C64 = p.iter().map(|&(a, mu)| a * exp_integral(mu - nu, layer.duration)).sum();
                log_weight[c] += i_hbar * lambda * integral;
            }
            alpha[c] = p.iter().map(|&(a, mu)| a * (mu * layer.duration).exp()).sum();
            pieces[c].push(p);
        }
    }
    let log_c0 = -(n as f64) * std::f64::consts::LN_2;
    let mut values = DMatrix::zeros(k, k);
    for a in 0..k {
        for b in a..k {
            let mut e = log_c0 + log_weight[a] + log_weight[b].conj() + alpha[a] * alpha[b].conj();
            if gamma > 0.0 {
                for (li, layer) in layers.iter().enumerate() {
                    for &(ca, ma) in &pieces[a][li] {
                        for &(cb, mb) in &pieces[b][li] {
                            e += gamma * ca * cb.conj() * exp_integral(ma + mb.conj(), layer.duration);
                        }
                    }
                }
            }
            let v = e.exp();
            values[(a, b)] = v;
            values[(b, a)] = v.conj();
        }
    }
    Ok(ExactRegister {
        num_dots: n,
        class_of: classes.class_of,
        values,
        audit: GroupingAudit { num_dots: n, ket_classes: k, block_equations: k * (k + 1) / 2, blocks_total: 1u128 << (2 * n) },
    })
}

// ---------------------------------------------------------------------------
// Dispatch

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockEngine {
    Fock { cutoff: usize },
    Coherent,
    Exact,
}

#[derive(Clone, Debug)]
pub enum BlockRegister {
    Fock(FockRegister),
    Coherent(CoherentRegister),
    Exact(ExactRegister),
}

impl RegisterState for BlockRegister {
    fn num_dots(&self) -> usize {
        match self {
            BlockRegister::Fock(r) => r.num_dots(),
            BlockRegister::Coherent(r) => r.num_dots(),
            BlockRegister::Exact(r) => r.num_dots(),
        }
    }

    fn element(&self, s: usize, sp: usize) -> C64 {
        match self {
            BlockRegister::Fock(r) => r.element(s, sp),
            BlockRegister::Coherent(r) => r.element(s, sp),
            BlockRegister::Exact(r) => r.element(s, sp),
        }
    }
}

impl BlockRegister {
    /// `Tr(ρ σ)`, using the fast path when both come from the coherent engine.
    pub fn fidelity(&self, other: &BlockRegister) -> Result<f64> {
        match (self, other) {
            (BlockRegister::Coherent(a), BlockRegister::Coherent(b)) => a.overlap(b),
            (BlockRegister::Exact(a), BlockRegister::Exact(b)) if a.class_of == b.class_of => a.overlap(b),
            _ => overlap_fidelity(self, other),
        }
    }
}

/// Evolves `|+⟩^⊗N ⊗ |0⟩` on the eff1 tier and returns the register with the
/// waveguide traced out. `spec.t_final` must equal the total layer duration.
pub fn blockwise_decoherence_evolve(
    layers: &[BlockLayer],
    decay: &DecayModel,
    engine: BlockEngine,
    spec: &EvolutionSpec,
) -> Result<BlockRegister> {
    if spec.tier != Tier::Eff1 {
        return Err(Error::TierMismatch(format!("blockwise evolution runs on eff1, not {}", spec.tier)));
    }
    spec.validate()?;
    let total: f64 = layers.iter().map(|l| l.duration).sum();
    if (total - spec.t_final).abs() > 1e-9 * spec.t_final {
        return Err(Error::InvalidParameter(format!(
            "layers last {total} ns but t_final is {} ns",
            spec.t_final
        )));
    }
    block_evolve(layers, decay, engine, &spec.ode_options())
}

/// Runs `engine` on `layers`; `opts` only matter for the Fock engine.
pub fn block_evolve(layers: &[BlockLayer], decay: &DecayModel, engine: BlockEngine, opts: &OdeOptions) -> Result<BlockRegister> {
    Ok(match engine {
        BlockEngine::Fock { cutoff } => BlockRegister::Fock(fock_blockwise(layers, decay, cutoff, opts)?),
        BlockEngine::Coherent => BlockRegister::Coherent(coherent_blockwise(layers, decay)?),
        BlockEngine::Exact => BlockRegister::Exact(exact_blockwise(layers, decay)?),
    })
}

/// Reference path: integrates the full eff1 master equation layer by layer
/// and traces out the waveguide.
pub fn brute_force_register(
    layers: &[BlockLayer],
    decay: &DecayModel,
    cutoff: usize,
    opts: &OdeOptions,
) -> Result<QuantumState> {
    let n = check_layers(layers)?;
    let space = HilbertSpace::new(n, 2, cutoff)?;
    let mut rho = QuantumState::plus_register(space)?.to_density();
    for layer in layers {
        if layer.duration == 0.0 {
            continue;
        }
        let h = eff1_hamiltonian(&layer.dots, &space)?;
        let mut spec = EvolutionSpec::new(Tier::Eff1, layer.duration).with_tolerances(opts.rel_tol, opts.abs_tol);
        if opts.max_step.is_finite() {
            spec.max_step = Some(opts.max_step);
        }
        rho = lindblad_evolve(&h, &rho, decay, &spec)?.final_state().clone();
    }
    rho.trace_out_cavity()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::state::{fidelity, trace_distance};

    fn dot(lambda: f64, delta: f64, dispersive: f64) -> EffDot {
        EffDot { lambda: C64::new(lambda, 0.0), delta, dispersive }
    }

    fn tight() -> OdeOptions {
        OdeOptions::with_tolerances(1e-10, 1e-13)
    }

    /// Fast two-dot gate: λ = 0.02, δ = 0.4, CZ time πħδ/(2λ²).
    fn fast_gate(n: usize) -> Vec<BlockLayer> {
        let (l, d) = (0.02, 0.4);
        let t = std::f64::consts::PI * HBAR * d / (2.0 * l * l);
        let mut dots = vec![dot(0.0, 0.0, 2e-4); n];
        dots[0] = dot(l, d, 2e-4);
        dots[1] = dot(l, d, 2e-4);
        vec![BlockLayer { duration: t, dots }]
    }

    #[test]
    fn no_drive_no_decay_keeps_plus_state() {
        let layers = vec![BlockLayer { duration: 50.0, dots: vec![dot(0.0, 0.0, 0.0); 3] }];
        let plus = QuantumState::plus_register(HilbertSpace::qubits(3).unwrap()).unwrap();
        for reg in [
            BlockRegister::Fock(fock_blockwise(&layers, &DecayModel::none(), 3, &tight()).unwrap()),
            BlockRegister::Coherent(coherent_blockwise(&layers, &DecayModel::none()).unwrap()),
        ] {
            let m = reg.density_matrix().unwrap();
            assert!((m - plus.density_matrix()).norm() < 1e-15);
        }
    }

    #[test]
    fn fock_engine_matches_brute_force_lindblad() {
        let decay = DecayModel::from_gamma(0.05).unwrap();
        for n in [2, 3] {
            let layers = fast_gate(n);
            let block = fock_blockwise(&layers, &decay, 4, &tight()).unwrap().to_state().unwrap();
            let brute = brute_force_register(&layers, &decay, 4, &tight()).unwrap();
            let td = trace_distance(&block, &brute).unwrap();
            assert!(td < 1e-6, "N = {n}: trace distance {td}");
        }
    }

    #[test]
    fn coherent_engine_matches_fock_engine() {
        let decay = DecayModel::from_gamma(0.05).unwrap();
        let mut layers = fast_gate(3);
        // second layer couples dots 1 and 2 at a different detuning
        let mut dots = vec![dot(0.0, 0.0, 2e-4); 3];
        dots[1] = dot(0.015, 0.3, 2e-4);
        dots[2] = dot(0.015, 0.3, 2e-4);
        layers.push(BlockLayer { duration: 700.0, dots });
        let fock = fock_blockwise(&layers, &decay, 5, &tight()).unwrap();
        let coh = coherent_blockwise(&layers, &decay).unwrap();
        let a = fock.to_state().unwrap();
        let b = coh.to_state().unwrap();
        let td = trace_distance(&a, &b).unwrap();
        assert!(td < 1e-6, "{td}");
        let f_generic = overlap_fidelity(&coh, &fock).unwrap();
        let f_dense = fidelity(&b, &a).unwrap();
        assert!((f_generic - f_dense).abs() < 1e-12);
    }

    // [DERIVED] brute-force Lindblad on the truncated product space
    #[test]
    fn exact_engine_matches_brute_force_with_unequal_shifts() {
        let decay = DecayModel::from_gamma(0.05).unwrap();
        let layers = vec![
            BlockLayer { duration: 400.0, dots: vec![dot(0.012, 0.25, 3e-4), dot(0.018, 0.25, 1e-4), dot(0.0, 0.0, 2e-4)] },
            BlockLayer { duration: 300.0, dots: vec![dot(0.0, 0.0, 3e-4), dot(0.015, 0.35, 1e-4), dot(0.02, 0.35, 2e-4)] },
        ];
        let exact = exact_blockwise(&layers, &decay).unwrap().to_state().unwrap();
        let brute = brute_force_register(&layers, &decay, 6, &tight()).unwrap();
        let td = trace_distance(&exact, &brute).unwrap();
        assert!(td < 1e-6, "{td}");
        let fock = fock_blockwise(&layers, &decay, 6, &tight()).unwrap().to_state().unwrap();
        assert!(trace_distance(&exact, &fock).unwrap() < 1e-6);
    }

    #[test]
    fn exact_engine_class_overlap_matches_elementwise_sum() {
        let layers = fast_gate(3);
        let clean = BlockRegister::Exact(exact_blockwise(&layers, &DecayModel::none()).unwrap());
        let noisy = BlockRegister::Exact(exact_blockwise(&layers, &DecayModel::from_gamma(0.1).unwrap()).unwrap());
        let fast = clean.fidelity(&noisy).unwrap();
        let slow = overlap_fidelity(&clean, &noisy).unwrap();
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        let purity = clean.fidelity(&clean).unwrap();
        assert!(purity <= 1.0 + 1e-12 && purity > 0.99, "{purity}");
    }

    #[test]
    fn coherent_fast_overlap_matches_elementwise_sum() {
        let decay = DecayModel::from_gamma(0.02).unwrap();
        let layers = fast_gate(4);
        let noisy = coherent_blockwise(&layers, &decay).unwrap();
        let clean = coherent_blockwise(&layers, &DecayModel::none()).unwrap();
        let fast = noisy.overlap(&clean).unwrap();
        let slow = overlap_fidelity(&noisy, &clean).unwrap();
        assert!((fast - slow).abs() < 1e-12, "{fast} vs {slow}");
        assert!(fast < 1.0 && fast > 0.0);
        // the waveguide is not fully disentangled at the gate time
        assert!(clean.overlap(&clean).unwrap() <= 1.0 + 1e-12);
    }

    #[test]
    fn uniform_single_group_audit() {
        let d = dot(0.0025, 0.3, 5e-5);
        let layers = vec![BlockLayer { duration: 1.0, dots: vec![d; 12] }];
        let audit = grouping_audit(&layers).unwrap();
        assert_eq!(audit.ket_classes, 13);
        assert!(audit.block_equations <= 169);
        assert_eq!(audit.blocks_total, 1u128 << 24);
    }

    #[test]
    fn tier_is_checked() {
        let layers = fast_gate(2);
        let spec = EvolutionSpec::new(Tier::Eff, layers[0].duration);
        assert!(matches!(
            blockwise_decoherence_evolve(&layers, &DecayModel::none(), BlockEngine::Coherent, &spec),
            Err(Error::TierMismatch(_))
        ));
    }
}
