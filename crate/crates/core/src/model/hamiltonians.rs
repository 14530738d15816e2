//! Builders for the three model tiers.
//!
//! Each tier is available both as a harmonic [`Hamiltonian`] (used by the
//! integrators) and as a snapshot operator at a given time.

use num_complex::Complex64 as C64;

use super::params::{eta_from, DotParams, EffDot};
use super::units::HBAR;
use crate::error::{Error, Result};
use crate::ops::csr::CsrMatrix;
use crate::ops::hamiltonian::Hamiltonian;
use crate::ops::operator::{cavity_csr, dot_csr, DotOp, LinearOperator};
use crate::ops::space::HilbertSpace;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn check_dots(space: &HilbertSpace, n: usize) -> Result<()> {
    if space.num_dots() != n {
        return Err(Error::DimensionMismatch { expected: space.num_dots(), found: n });
    }
    Ok(())
}

fn check_full_space(space: &HilbertSpace) -> Result<()> {
    if !space.has_excited() {
        return Err(Error::MissingExcitedLevel);
    }
    if !space.has_cavity() {
        return Err(Error::NoCavity);
    }
    Ok(())
}

/// Three-level dots, waveguide mode, and both lasers in the interaction
/// picture:
/// `Σ_j (g_j a e^{iΔ^C_j t/ħ} + Ω_j/2 e^{iΔ_j t/ħ} + Ω'_j/2 e^{-iΔ'_j t/ħ}) σ_j⁺ + h.c.`
pub fn full_hamiltonian(dots: &[DotParams], space: &HilbertSpace) -> Result<Hamiltonian> {
    check_full_space(space)?;
    check_dots(space, dots.len())?;
    let (a, _, _) = cavity_csr(space)?;
    let mut h = Hamiltonian::new(*space);
    for (j, d) in dots.iter().enumerate() {
        let raise = dot_csr(space, j, DotOp::Raise)?;
        let a_raise = raise.matmul(&a);
        h.add_hermitian_pair(d.delta_cav, a_raise.scale(d.g))?;
        h.add_hermitian_pair(d.delta, raise.scale(d.omega * 0.5))?;
        h.add_hermitian_pair(-d.delta_prime, raise.scale(d.omega_prime * 0.5))?;
    }
    Ok(h)
}

pub fn build_full_hamiltonian(dots: &[DotParams], space: &HilbertSpace, t: f64) -> Result<LinearOperator> {
    Ok(full_hamiltonian(dots, space)?.at(t))
}

/// Frame generator `F = Σ_j Δ_j |e⟩_j⟨e| − δ_ref a†a` (meV), diagonal.
fn frame_energies(dots: &[DotParams], space: &HilbertSpace, delta_ref: f64) -> Vec<f64> {
    let mut out = vec![0.0; space.dim()];
    let e = crate::ops::space::Level::E.index();
    for (i, slot) in out.iter_mut().enumerate() {
        let (levels, photons) = space.decode(i);
        let mut v = -delta_ref * photons as f64;
        for (j, l) in levels.iter().enumerate() {
            if l.index() == e {
                v += dots[j].delta;
            }
        }
        *slot = v;
    }
    out
}

/// The full-tier dynamics in the frame `ψ = exp(iFt/ħ) φ`, with
/// `F = Σ_j Δ_j |e⟩_j⟨e| − δ_ref a†a`.
///
/// The laser `Ω` terms become static, the `Ω'` terms oscillate at
/// `Δ_j + Δ'_j`, and the waveguide terms at `δ_j − δ_ref`. States without
/// excitations or photons are identical in both frames.
pub fn full_rotating_hamiltonian(
    dots: &[DotParams],
    space: &HilbertSpace,
    delta_ref: f64,
) -> Result<Hamiltonian> {
    check_full_space(space)?;
    check_dots(space, dots.len())?;
    let (a, _, _) = cavity_csr(space)?;
    let mut h = Hamiltonian::new(*space);
    let diag = frame_energies(dots, space, delta_ref);
    h.add_static(CsrMatrix::from_triplets(
        space.dim(),
        diag.iter().enumerate().map(|(i, &v)| (i, i, c(v))).collect(),
    ))?;
    for (j, d) in dots.iter().enumerate() {
        let raise = dot_csr(space, j, DotOp::Raise)?;
        h.add_hermitian_pair(0.0, raise.scale(d.omega * 0.5))?;
        h.add_hermitian_pair(-(d.delta + d.delta_prime), raise.scale(d.omega_prime * 0.5))?;
        h.add_hermitian_pair(d.two_photon_detuning() - delta_ref, raise.matmul(&a).scale(d.g))?;
    }
    Ok(h)
}

/// Diagonal of the frame map `exp(iFt/ħ)` taking rotating-frame amplitudes
/// back to the interaction picture.
pub fn rotating_frame_phases(dots: &[DotParams], space: &HilbertSpace, delta_ref: f64, t: f64) -> Vec<C64> {
    frame_energies(dots, space, delta_ref)
        .into_iter()
        .map(|e| C64::from_polar(1.0, e * t / HBAR))
        .collect()
}

/// Qubits and waveguide after eliminating the excited levels:
/// `−Σ_j (χ_j a†a + λ_j a e^{iδ_j t/ħ} + λ_j* a† e^{−iδ_j t/ħ}) |g⟩_j⟨g|`.
pub fn eff1_hamiltonian(dots: &[EffDot], space: &HilbertSpace) -> Result<Hamiltonian> {
    if !space.has_cavity() {
        return Err(Error::NoCavity);
    }
    if space.levels_per_dot() != 2 {
        return Err(Error::InvalidSpace("the eff1 tier uses two-level dots".into()));
    }
    check_dots(space, dots.len())?;
    let (a, _, n) = cavity_csr(space)?;
    let mut h = Hamiltonian::new(*space);
    for (j, d) in dots.iter().enumerate() {
        let pg = dot_csr(space, j, DotOp::ProjG)?;
        h.add_static(pg.matmul(&n).scale(c(-d.dispersive)))?;
        h.add_hermitian_pair(d.delta, pg.matmul(&a).scale(-d.lambda))?;
    }
    Ok(h)
}

pub fn build_eff1_hamiltonian(dots: &[DotParams], space: &HilbertSpace, t: f64) -> Result<LinearOperator> {
    let eff: Vec<EffDot> = dots.iter().map(EffDot::from_params).collect::<Result<_>>()?;
    Ok(eff1_hamiltonian(&eff, space)?.at(t))
}

/// Interaction between two dots in the diagonal tier.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PairCoupling {
    pub j: usize,
    pub k: usize,
    pub eta: f64,
    /// `δ_j − δ_k`; zero selects the static coupling.
    pub delta_jk: f64,
}

impl PairCoupling {
    /// `∫ 2η c_jk(t) dt` over `[t0, t1]`, meV·ns.
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if self.delta_jk == 0.0 {
            2.0 * self.eta * (t1 - t0)
        } else {
            let w = self.delta_jk / HBAR;
            2.0 * self.eta / w * ((w * t1).sin() - (w * t0).sin())
        }
    }

    pub fn coefficient(&self, t: f64) -> f64 {
        if self.delta_jk == 0.0 {
            2.0 * self.eta
        } else {
            2.0 * self.eta * (self.delta_jk * t / HBAR).cos()
        }
    }
}

/// Waveguide-eliminated model, diagonal in the computational basis:
/// `Σ_j η_jj P_j + Σ_{j<k} 2η_jk c_jk(t) P_j P_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct EffModel {
    pub eta_diag: Vec<f64>,
    pub pairs: Vec<PairCoupling>,
}

impl EffModel {
    pub fn from_eff(dots: &[EffDot]) -> Result<Self> {
        let n = dots.len();
        let mut eta_diag = Vec::with_capacity(n);
        let mut pairs = Vec::new();
        for j in 0..n {
            eta_diag.push(eta_from(dots[j].lambda, dots[j].delta, dots[j].lambda, dots[j].delta)?);
            for k in j + 1..n {
                let eta = eta_from(dots[j].lambda, dots[j].delta, dots[k].lambda, dots[k].delta)?;
                if eta != 0.0 {
                    pairs.push(PairCoupling { j, k, eta, delta_jk: dots[j].delta - dots[k].delta });
                }
            }
        }
        Ok(EffModel { eta_diag, pairs })
    }

    pub fn from_params(dots: &[DotParams]) -> Result<Self> {
        let eff: Vec<EffDot> = dots.iter().map(EffDot::from_params).collect::<Result<_>>()?;
        Self::from_eff(&eff)
    }

    pub fn num_dots(&self) -> usize {
        self.eta_diag.len()
    }

    fn is_set(bits: usize, n: usize, j: usize) -> bool {
        (bits >> (n - 1 - j)) & 1 == 1
    }

    /// Energy of register state `bits` at time `t`, meV.
    pub fn energy(&self, bits: usize, t: f64) -> f64 {
        let n = self.num_dots();
        let mut e: f64 = (0..n).filter(|&j| Self::is_set(bits, n, j)).map(|j| self.eta_diag[j]).sum();
        for p in &self.pairs {
            if Self::is_set(bits, n, p.j) && Self::is_set(bits, n, p.k) {
                e += p.coefficient(t);
            }
        }
        e
    }

    /// Accumulated phase `∫ E_s dt / ħ` of every register state over `[t0, t1]`;
    /// amplitudes evolve as `exp(−i φ_s)`.
    pub fn phases(&self, t0: f64, t1: f64) -> Vec<f64> {
        let n = self.num_dots();
        let single: Vec<f64> = self.eta_diag.iter().map(|e| e * (t1 - t0) / HBAR).collect();
        let pair: Vec<f64> = self.pairs.iter().map(|p| p.integral(t0, t1) / HBAR).collect();
        (0..1usize << n)
            .map(|bits| {
                let mut phi = 0.0;
                for j in 0..n {
                    if Self::is_set(bits, n, j) {
                        phi += single[j];
                    }
                }
                for (p, v) in self.pairs.iter().zip(&pair) {
                    if Self::is_set(bits, n, p.j) && Self::is_set(bits, n, p.k) {
                        phi += v;
                    }
                }
                phi
            })
            .collect()
    }

    pub fn operator_at(&self, space: &HilbertSpace, t: f64) -> Result<LinearOperator> {
        if space.has_cavity() || space.levels_per_dot() != 2 {
            return Err(Error::InvalidSpace("the eff tier acts on bare qubits".into()));
        }
        check_dots(space, self.num_dots())?;
        let triplets = (0..space.dim()).map(|b| (b, b, c(self.energy(b, t)))).collect();
        LinearOperator::from_csr(*space, CsrMatrix::from_triplets(space.dim(), triplets), true)
    }
}

pub fn build_eff_hamiltonian(dots: &[DotParams], space: &HilbertSpace, t: f64) -> Result<LinearOperator> {
    EffModel::from_params(dots)?.operator_at(space, t)
}
