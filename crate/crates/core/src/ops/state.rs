use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::space::{HilbertSpace, Site};
use crate::error::{Error, Result};

pub const PURE_NORM_TOL: f64 = 1e-9;
pub const DENSITY_TOL: f64 = 1e-9;
pub const DENSITY_EIG_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub enum StateData {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

/// Normalized pure state or density matrix on a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    space: HilbertSpace,
    data: StateData,
}

impl QuantumState {
    pub fn pure(space: HilbertSpace, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: amplitudes.len() });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > PURE_NORM_TOL {
            return Err(Error::InvalidState(format!("pure state norm is {norm}")));
        }
        Ok(QuantumState { space, data: StateData::Pure(amplitudes) })
    }

    /// Rescales `amplitudes` to unit norm.
    pub fn pure_normalized(space: HilbertSpace, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        Self::pure(space, amplitudes.unscale(norm))
    }

    pub fn density(space: HilbertSpace, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != space.dim() || rho.ncols() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: rho.nrows() });
        }
        let herm = hermitian_defect(&rho);
        if herm > DENSITY_TOL {
            return Err(Error::InvalidState(format!("density matrix not Hermitian (defect {herm:e})")));
        }
        let tr = rho.trace();
        if (tr.re - 1.0).abs() > DENSITY_TOL || tr.im.abs() > DENSITY_TOL {
            return Err(Error::InvalidState(format!("density matrix trace is {tr}")));
        }
        let min_eig = min_eigenvalue(&rho);
        if min_eig < -DENSITY_EIG_TOL {
            return Err(Error::InvalidState(format!("density matrix eigenvalue {min_eig:e} < 0")));
        }
        Ok(QuantumState { space, data: StateData::Density(rho) })
    }

    /// Skips validation; callers guarantee the invariants.
    pub(crate) fn density_unchecked(space: HilbertSpace, rho: DMatrix<C64>) -> Self {
        QuantumState { space, data: StateData::Density(rho) }
    }

    pub(crate) fn pure_unchecked(space: HilbertSpace, psi: DVector<C64>) -> Self {
        QuantumState { space, data: StateData::Pure(psi) }
    }

    pub fn basis(space: HilbertSpace, index: usize) -> Result<Self> {
        if index >= space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: index });
        }
        let mut v = DVector::zeros(space.dim());
        v[index] = C64::new(1.0, 0.0);
        Ok(QuantumState { space, data: StateData::Pure(v) })
    }

    /// `|+>^{⊗N}` on the dots with the cavity (if any) in vacuum.
    pub fn plus_register(space: HilbertSpace) -> Result<Self> {
        if space.has_excited() {
            return Err(Error::InvalidParameter("plus register needs two-level dots".into()));
        }
        let n = space.num_dots();
        let amp = C64::new((0.5f64).powf(n as f64 / 2.0), 0.0);
        let mut v = DVector::zeros(space.dim());
        for bits in 0..(1usize << n) {
            v[space.index_of_bits(bits, 0)] = amp;
        }
        Ok(QuantumState { space, data: StateData::Pure(v) })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn data(&self) -> &StateData {
        &self.data
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.data, StateData::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&DVector<C64>> {
        match &self.data {
            StateData::Pure(v) => Some(v),
            StateData::Density(_) => None,
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.data {
            StateData::Pure(v) => v * v.adjoint(),
            StateData::Density(m) => m.clone(),
        }
    }

    pub fn to_density(&self) -> QuantumState {
        QuantumState { space: self.space, data: StateData::Density(self.density_matrix()) }
    }

    pub fn trace(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared(),
            StateData::Density(m) => m.trace().re,
        }
    }

    pub fn purity(&self) -> f64 {
        match &self.data {
            StateData::Pure(v) => v.norm_squared().powi(2),
            StateData::Density(m) => overlap_trace(m, m).re,
        }
    }

    /// Moves the state into a space with a different Fock cutoff; amplitudes
    /// above the new cutoff are dropped, new levels are zero.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<QuantumState> {
        let target = self.space.with_cutoff(cutoff);
        let map = |i: usize| -> Option<usize> {
            let (levels, n) = self.space.decode(i);
            target.index_of(&levels, n).ok()
        };
        let data = match &self.data {
            StateData::Pure(v) => {
                let mut out = DVector::zeros(target.dim());
                for i in 0..v.len() {
                    if let Some(j) = map(i) {
                        out[j] = v[i];
                    }
                }
                StateData::Pure(out)
            }
            StateData::Density(m) => {
                let mut out = DMatrix::zeros(target.dim(), target.dim());
                let idx: Vec<Option<usize>> = (0..m.nrows()).map(map).collect();
                for c in 0..m.ncols() {
                    for r in 0..m.nrows() {
                        if let (Some(a), Some(b)) = (idx[r], idx[c]) {
                            out[(a, b)] = m[(r, c)];
                        }
                    }
                }
                StateData::Density(out)
            }
        };
        Ok(QuantumState { space: target, data })
    }

    /// Reduced density matrix over `keep`. Pure inputs are promoted.
    pub fn partial_trace(&self, keep: &[Site]) -> Result<QuantumState> {
        if keep.is_empty() {
            return Err(Error::InvalidParameter("partial trace needs a non-empty keep set".into()));
        }
        for &site in keep {
            self.space.site_dim(site)?;
        }
        let mut keep_sorted: Vec<Site> = keep.to_vec();
        keep_sorted.sort();
        keep_sorted.dedup();
        let reduced = self.space.reduced(&keep_sorted)?;
        let sites = self.space.sites();
        let dims: Vec<usize> = sites.iter().map(|&s| self.space.site_dim(s).unwrap()).collect();
        let kept: Vec<bool> = sites.iter().map(|s| keep_sorted.contains(s)).collect();

        // Split every basis index into (kept index, traced index).
        let d = self.space.dim();
        let mut kept_idx = vec![0usize; d];
        let mut traced_idx = vec![0usize; d];
        for i in 0..d {
            let mut rest = i;
            let (mut k, mut kmul, mut t, mut tmul) = (0, 1, 0, 1);
            for s in (0..sites.len()).rev() {
                let local = rest % dims[s];
                rest /= dims[s];
                if kept[s] {
                    k += local * kmul;
                    kmul *= dims[s];
                } else {
                    t += local * tmul;
                    tmul *= dims[s];
                }
            }
            kept_idx[i] = k;
            traced_idx[i] = t;
        }
        let traced_dim = d / reduced.dim();
        let mut by_traced: Vec<Vec<usize>> = vec![Vec::new(); traced_dim];
        for i in 0..d {
            by_traced[traced_idx[i]].push(i);
        }
        let mut out = DMatrix::zeros(reduced.dim(), reduced.dim());
        match &self.data {
            StateData::Pure(v) => {
                for group in &by_traced {
                    for &i in group {
                        for &j in group {
                            out[(kept_idx[i], kept_idx[j])] += v[i] * v[j].conj();
                        }
                    }
                }
            }
            StateData::Density(m) => {
                for group in &by_traced {
                    for &i in group {
                        for &j in group {
                            out[(kept_idx[i], kept_idx[j])] += m[(i, j)];
                        }
                    }
                }
            }
        }
        Ok(QuantumState { space: reduced, data: StateData::Density(out) })
    }

    /// Reduced state of the dots alone.
    pub fn trace_out_cavity(&self) -> Result<QuantumState> {
        let keep: Vec<Site> = (0..self.space.num_dots()).map(Site::Dot).collect();
        self.partial_trace(&keep)
    }
}

/// `Tr(A B)` for square matrices.
pub fn overlap_trace(a: &DMatrix<C64>, b: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn hermitian_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut eig: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
    eig
}

pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Overlap fidelity `F = Tr(ρ ρ')`.
///
/// This is not the Uhlmann fidelity; for two pure states it reduces to
/// `|<ψ|φ>|²`, and for a mixed state compared with itself it is the purity.
pub fn fidelity(rho: &QuantumState, rho_prime: &QuantumState) -> Result<f64> {
    if rho.space != rho_prime.space {
        return Err(Error::SpaceMismatch);
    }
    let value = match (&rho.data, &rho_prime.data) {
        (StateData::Pure(a), StateData::Pure(b)) => C64::new(a.dotc(b).norm_sqr(), 0.0),
        (StateData::Pure(v), StateData::Density(m)) | (StateData::Density(m), StateData::Pure(v)) => {
            v.dotc(&(m * v))
        }
        (StateData::Density(a), StateData::Density(b)) => overlap_trace(a, b),
    };
    if value.im.abs() > 1e-10 {
        return Err(Error::InvalidState(format!(
            "Tr(ρρ') has imaginary residue {:e}; inputs are not Hermitian",
            value.im
        )));
    }
    Ok(value.re)
}

/// `½ Σ |λ_i(ρ - σ)|`.
pub fn trace_distance(rho: &QuantumState, sigma: &QuantumState) -> Result<f64> {
    if rho.space != sigma.space {
        return Err(Error::SpaceMismatch);
    }
    let diff = rho.density_matrix() - sigma.density_matrix();
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::space::Level;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn plus() -> QuantumState {
        QuantumState::plus_register(HilbertSpace::qubits(1).unwrap()).unwrap()
    }

    #[test]
    fn validation_rejects_bad_states() {
        let q = HilbertSpace::qubits(1).unwrap();
        assert!(QuantumState::pure(q, DVector::from_vec(vec![c(1.0), c(1.0)])).is_err());
        let not_herm = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(QuantumState::density(q, not_herm).is_err());
        let negative = DMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(QuantumState::density(q, negative).is_err());
        let half = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.5)]);
        assert!(QuantumState::density(q, half).is_ok());
    }

    #[test]
    fn fidelity_examples() {
        let p = plus();
        assert!((fidelity(&p, &p).unwrap() - 1.0).abs() < 1e-15);
        let f = QuantumState::basis(*p.space(), 0).unwrap();
        assert!((fidelity(&p, &f).unwrap() - 0.5).abs() < 1e-15);
        let mixed = QuantumState::density(
            *p.space(),
            DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.5)]),
        )
        .unwrap();
        assert!((fidelity(&mixed, &mixed).unwrap() - 0.5).abs() < 1e-15);
        assert!((fidelity(&mixed, &p).unwrap() - 0.5).abs() < 1e-15);
        let other = QuantumState::plus_register(HilbertSpace::qubits(2).unwrap()).unwrap();
        assert!(matches!(fidelity(&p, &other), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn partial_trace_of_product_with_vacuum() {
        let space = HilbertSpace::new(1, 2, 2).unwrap();
        let psi = QuantumState::plus_register(space).unwrap();
        let reduced = psi.trace_out_cavity().unwrap();
        let expected = plus().density_matrix();
        assert!((reduced.density_matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let space = HilbertSpace::qubits(2).unwrap();
        let s = c(0.5f64.sqrt());
        let bell = QuantumState::pure(space, DVector::from_vec(vec![s, c(0.0), c(0.0), s])).unwrap();
        let m1 = bell.partial_trace(&[Site::Dot(0)]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(0.5)]);
        assert!((m1.density_matrix() - expected).norm() < 1e-15);
        assert!((m1.trace() - 1.0).abs() < 1e-12);
        assert!(bell.partial_trace(&[]).is_err());
    }

    #[test]
    fn partial_trace_keeps_cavity_in_order() {
        let space = HilbertSpace::new(2, 2, 1).unwrap();
        let idx = space.index_of(&[Level::G, Level::F], 1).unwrap();
        let psi = QuantumState::basis(space, idx).unwrap();
        let r = psi.partial_trace(&[Site::Cavity, Site::Dot(0)]).unwrap();
        assert_eq!(r.space(), &HilbertSpace::new(1, 2, 1).unwrap());
        let k = r.space().index_of(&[Level::G], 1).unwrap();
        assert_eq!(r.density_matrix()[(k, k)], c(1.0));
    }

    #[test]
    fn cutoff_change_pads_and_truncates() {
        let space = HilbertSpace::new(1, 2, 1).unwrap();
        let idx = space.index_of(&[Level::G], 1).unwrap();
        let psi = QuantumState::basis(space, idx).unwrap();
        let up = psi.with_cutoff(3).unwrap();
        assert_eq!(up.space().dim(), 8);
        let k = up.space().index_of(&[Level::G], 1).unwrap();
        assert_eq!(up.amplitudes().unwrap()[k], c(1.0));
        assert_eq!(up.with_cutoff(1).unwrap(), psi);
    }

    #[test]
    fn trace_distance_of_orthogonal_states() {
        let q = HilbertSpace::qubits(1).unwrap();
        let a = QuantumState::basis(q, 0).unwrap();
        let b = QuantumState::basis(q, 1).unwrap();
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-14);
        assert!(trace_distance(&a, &a).unwrap() < 1e-15);
    }
}
