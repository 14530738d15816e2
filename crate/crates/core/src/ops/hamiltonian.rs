//! Time-dependent operators written as sums of static sparse matrices with
//! harmonic coefficients.

use num_complex::Complex64 as C64;

use super::csr::CsrMatrix;
use super::operator::LinearOperator;
use super::space::HilbertSpace;
use crate::error::{Error, Result};
use crate::model::units::HBAR;

/// One harmonic component: contributes `exp(i E t / ħ) · op`.
#[derive(Clone, Debug)]
pub struct Term {
    /// Energy `E` of the phase factor, meV; zero for static terms.
    pub energy: f64,
    pub op: CsrMatrix,
}

/// `H(t) = Σ_k exp(i E_k t/ħ) A_k`, operators in meV, time in ns.
///
/// Builders add oscillating parts through [`Hamiltonian::add_hermitian_pair`],
/// which keeps `H(t)` Hermitian at every `t`.
#[derive(Clone, Debug)]
pub struct Hamiltonian {
    space: HilbertSpace,
    terms: Vec<Term>,
}

impl Hamiltonian {
    pub fn new(space: HilbertSpace) -> Self {
        Hamiltonian { space, terms: Vec::new() }
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    fn push(&mut self, energy: f64, op: CsrMatrix) {
        if op.nnz() == 0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.energy == energy) {
            t.op = t.op.add(&op);
        } else {
            self.terms.push(Term { energy, op });
        }
    }

    /// Adds a static Hermitian part.
    pub fn add_static(&mut self, op: CsrMatrix) -> Result<()> {
        self.check_dim(&op)?;
        self.push(0.0, op);
        Ok(())
    }

    /// Adds `exp(iEt/ħ) A + exp(-iEt/ħ) A†`.
    pub fn add_hermitian_pair(&mut self, energy: f64, op: CsrMatrix) -> Result<()> {
        self.check_dim(&op)?;
        if energy == 0.0 {
            let sum = op.add(&op.adjoint());
            self.push(0.0, sum);
        } else {
            let adj = op.adjoint();
            self.push(energy, op);
            self.push(-energy, adj);
        }
        Ok(())
    }

    fn check_dim(&self, op: &CsrMatrix) -> Result<()> {
        if op.dim() != self.space.dim() {
            return Err(Error::DimensionMismatch { expected: self.space.dim(), found: op.dim() });
        }
        Ok(())
    }

    pub fn is_static(&self) -> bool {
        self.terms.iter().all(|t| t.energy == 0.0)
    }

    fn phases(&self, t: f64) -> impl Iterator<Item = (C64, &CsrMatrix)> + '_ {
        self.terms.iter().map(move |term| {
            let phase = if term.energy == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                C64::from_polar(1.0, term.energy * t / HBAR)
            };
            (phase, &term.op)
        })
    }

    /// Snapshot `H(t)`.
    pub fn at(&self, t: f64) -> LinearOperator {
        let mut sum = CsrMatrix::zeros(self.space.dim());
        for (phase, op) in self.phases(t) {
            sum = sum.add(&op.scale(phase));
        }
        LinearOperator::from_csr(self.space, sum, true).expect("dimension matches")
    }

    /// `y += s · H(t) x`.
    pub fn apply_acc(&self, t: f64, s: C64, x: &[C64], y: &mut [C64]) {
        for (phase, op) in self.phases(t) {
            op.mul_vec_acc(s * phase, x, y);
        }
    }

    /// `Y += s · H(t) X` for column-major `X` with `ncols` columns.
    pub fn apply_cols_acc(&self, t: f64, s: C64, x: &[C64], ncols: usize, y: &mut [C64]) {
        for (phase, op) in self.phases(t) {
            op.mul_cols_acc(s * phase, x, ncols, y);
        }
    }

    /// `Y += s · X H(t)` for column-major square `X`.
    pub fn left_apply_acc(&self, t: f64, s: C64, x: &[C64], y: &mut [C64]) {
        for (phase, op) in self.phases(t) {
            op.left_mul_cols_acc(s * phase, x, y);
        }
    }

    /// Largest `|E|` among the harmonic terms, meV.
    pub fn max_frequency_energy(&self) -> f64 {
        self.terms.iter().map(|t| t.energy.abs()).fold(0.0, f64::max)
    }

    /// Exact period of `H(t)` in ns when every harmonic energy is an integer
    /// multiple of a common base energy on a `quantum` (meV) grid.
    pub fn period(&self, quantum: f64) -> Option<f64> {
        let energies: Vec<f64> = self.terms.iter().map(|t| t.energy.abs()).filter(|&e| e > 0.0).collect();
        if energies.is_empty() {
            return None;
        }
        common_energy(&energies, quantum).map(|e0| 2.0 * std::f64::consts::PI * HBAR / e0)
    }

    /// Same operator with every energy (static operators and harmonic
    /// energies alike) multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Hamiltonian {
        Hamiltonian {
            space: self.space,
            terms: self
                .terms
                .iter()
                .map(|t| Term { energy: t.energy * factor, op: t.op.scale(C64::new(factor, 0.0)) })
                .collect(),
        }
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a
}

/// Largest `E0` with every input an integer multiple of it, when all inputs
/// sit on the `quantum` grid; `None` otherwise.
pub fn common_energy(energies: &[f64], quantum: f64) -> Option<f64> {
    let mut g = 0u64;
    for &e in energies {
        let q = e.abs() / quantum;
        let r = q.round();
        if r < 1.0 || r > 1e15 || (q - r).abs() > 1e-6 * r.max(1.0).sqrt() {
            return None;
        }
        g = gcd(g, r as u64);
    }
    (g > 0).then(|| g as f64 * quantum)
}
