use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::csr::CsrMatrix;
use super::space::{HilbertSpace, Level, Site};
use crate::error::{Error, Result};

/// Spaces above this dimension get sparse storage.
pub const SPARSE_THRESHOLD: usize = 512;

#[derive(Clone, Debug)]
pub enum Repr {
    Dense(DMatrix<C64>),
    Sparse(CsrMatrix),
}

/// A square operator on a [`HilbertSpace`].
///
/// `hermitian` is a hint set by builders that construct Hermitian operators;
/// it is checked in debug builds.
#[derive(Clone, Debug)]
pub struct LinearOperator {
    space: HilbertSpace,
    repr: Repr,
    hermitian: bool,
}

impl LinearOperator {
    /// Chooses dense or sparse storage from the space dimension.
    pub fn from_csr(space: HilbertSpace, csr: CsrMatrix, hermitian: bool) -> Result<Self> {
        if csr.dim() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: csr.dim() });
        }
        let repr = if space.dim() > SPARSE_THRESHOLD { Repr::Sparse(csr) } else { Repr::Dense(csr.to_dense()) };
        let op = LinearOperator { space, repr, hermitian };
        debug_assert!(!hermitian || op.hermitian_defect() < 1e-10, "hermitian hint violated");
        Ok(op)
    }

    pub fn from_dense(space: HilbertSpace, dense: DMatrix<C64>, hermitian: bool) -> Result<Self> {
        if dense.nrows() != space.dim() || dense.ncols() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: dense.nrows() });
        }
        if space.dim() > SPARSE_THRESHOLD {
            return Self::from_csr(space, CsrMatrix::from_dense(&dense), hermitian);
        }
        Ok(LinearOperator { space, repr: Repr::Dense(dense), hermitian })
    }

    pub fn zeros(space: HilbertSpace) -> Self {
        Self::from_csr(space, CsrMatrix::zeros(space.dim()), true).expect("dimension matches")
    }

    pub fn identity(space: HilbertSpace) -> Self {
        Self::from_csr(space, CsrMatrix::identity(space.dim()), true).expect("dimension matches")
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn repr(&self) -> &Repr {
        &self.repr
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.repr, Repr::Sparse(_))
    }

    pub fn hermitian_flag(&self) -> bool {
        self.hermitian
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.repr {
            Repr::Dense(m) => m.clone(),
            Repr::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csr(&self) -> CsrMatrix {
        match &self.repr {
            Repr::Dense(m) => CsrMatrix::from_dense(m),
            Repr::Sparse(m) => m.clone(),
        }
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        match &self.repr {
            Repr::Dense(m) => m[(r, c)],
            Repr::Sparse(m) => m.get(r, c),
        }
    }

    pub fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        match &self.repr {
            Repr::Dense(m) => m * x,
            Repr::Sparse(m) => {
                let mut y = DVector::zeros(x.len());
                m.mul_vec_acc(C64::new(1.0, 0.0), x.as_slice(), y.as_mut_slice());
                y
            }
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a * b),
            _ => Repr::Sparse(self.to_csr().matmul(&other.to_csr())),
        };
        Ok(LinearOperator { space: self.space, repr, hermitian: false })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_space(other)?;
        let repr = match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => Repr::Dense(a + b),
            _ => Repr::Sparse(self.to_csr().add(&other.to_csr())),
        };
        Ok(LinearOperator { space: self.space, repr, hermitian: self.hermitian && other.hermitian })
    }

    pub fn scale(&self, s: C64) -> Self {
        let repr = match &self.repr {
            Repr::Dense(a) => Repr::Dense(a * s),
            Repr::Sparse(a) => Repr::Sparse(a.scale(s)),
        };
        LinearOperator { space: self.space, repr, hermitian: self.hermitian && s.im == 0.0 }
    }

    pub fn adjoint(&self) -> Self {
        let repr = match &self.repr {
            Repr::Dense(a) => Repr::Dense(a.adjoint()),
            Repr::Sparse(a) => Repr::Sparse(a.adjoint()),
        };
        LinearOperator { space: self.space, repr, hermitian: self.hermitian }
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        match &self.repr {
            Repr::Dense(a) => (a - a.adjoint()).iter().map(|v| v.norm()).fold(0.0, f64::max),
            Repr::Sparse(a) => a.hermitian_defect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.check_space(other)?;
        Ok(match (&self.repr, &other.repr) {
            (Repr::Dense(a), Repr::Dense(b)) => (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max),
            _ => self.to_csr().max_abs_diff(&other.to_csr()),
        })
    }

    /// Off-diagonal entries are identically zero.
    pub fn is_diagonal(&self) -> bool {
        match &self.repr {
            Repr::Dense(a) => {
                let zero = C64::new(0.0, 0.0);
                (0..a.nrows()).all(|r| (0..a.ncols()).all(|c| r == c || a[(r, c)] == zero))
            }
            Repr::Sparse(a) => a.is_diagonal(),
        }
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim()).map(|i| self.get(i, i)).collect()
    }

    fn check_space(&self, other: &Self) -> Result<()> {
        if self.space == other.space {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }
}

/// Lifts a single-site operator to the full space:
/// `I ⊗ ... ⊗ local ⊗ ... ⊗ I`.
pub fn embed(space: &HilbertSpace, site: Site, local: &DMatrix<C64>) -> Result<LinearOperator> {
    Ok(LinearOperator::from_csr(*space, embed_csr(space, site, local)?, false)?)
}

pub(crate) fn embed_csr(space: &HilbertSpace, site: Site, local: &DMatrix<C64>) -> Result<CsrMatrix> {
    let d = space.site_dim(site)?;
    if local.nrows() != d || local.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, found: local.nrows() });
    }
    let stride = space.stride(site)?;
    let zero = C64::new(0.0, 0.0);
    let mut triplets = Vec::new();
    for col in 0..space.dim() {
        let l = (col / stride) % d;
        let base = col - l * stride;
        for r in 0..d {
            let v = local[(r, l)];
            if v != zero {
                triplets.push((base + r * stride, col, v));
            }
        }
    }
    Ok(CsrMatrix::from_triplets(space.dim(), triplets))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DotOp {
    /// `|e><g|`
    Raise,
    /// `|g><e|`
    Lower,
    ProjG,
    ProjF,
    ProjE,
}

fn local_dot_matrix(levels: usize, op: DotOp) -> Result<DMatrix<C64>> {
    let needs_e = matches!(op, DotOp::Raise | DotOp::Lower | DotOp::ProjE);
    if needs_e && levels < 3 {
        return Err(Error::MissingExcitedLevel);
    }
    let mut m = DMatrix::zeros(levels, levels);
    let one = C64::new(1.0, 0.0);
    let (g, f, e) = (Level::G.index(), Level::F.index(), Level::E.index());
    match op {
        DotOp::Raise => m[(e, g)] = one,
        DotOp::Lower => m[(g, e)] = one,
        DotOp::ProjG => m[(g, g)] = one,
        DotOp::ProjF => m[(f, f)] = one,
        DotOp::ProjE => m[(e, e)] = one,
    }
    Ok(m)
}

pub fn dot_operator(space: &HilbertSpace, j: usize, op: DotOp) -> Result<LinearOperator> {
    space.check_dot(j)?;
    let local = local_dot_matrix(space.levels_per_dot(), op)?;
    let hermitian = matches!(op, DotOp::ProjG | DotOp::ProjF | DotOp::ProjE);
    LinearOperator::from_csr(*space, embed_csr(space, Site::Dot(j), &local)?, hermitian)
}

pub(crate) fn dot_csr(space: &HilbertSpace, j: usize, op: DotOp) -> Result<CsrMatrix> {
    space.check_dot(j)?;
    embed_csr(space, Site::Dot(j), &local_dot_matrix(space.levels_per_dot(), op)?)
}

/// Truncated annihilation operator on `cutoff + 1` Fock states.
pub fn annihilation_matrix(cutoff: usize) -> DMatrix<C64> {
    let d = cutoff + 1;
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

#[derive(Clone, Debug)]
pub struct CavityOperators {
    pub a: LinearOperator,
    pub a_dagger: LinearOperator,
    pub number: LinearOperator,
}

pub fn cavity_ops(space: &HilbertSpace) -> Result<CavityOperators> {
    if !space.has_cavity() {
        return Err(Error::NoCavity);
    }
    let (a, a_dag, n) = cavity_csr(space)?;
    Ok(CavityOperators {
        a: LinearOperator::from_csr(*space, a, false)?,
        a_dagger: LinearOperator::from_csr(*space, a_dag, false)?,
        number: LinearOperator::from_csr(*space, n, true)?,
    })
}

pub(crate) fn cavity_csr(space: &HilbertSpace) -> Result<(CsrMatrix, CsrMatrix, CsrMatrix)> {
    if !space.has_cavity() {
        return Err(Error::NoCavity);
    }
    let a_local = annihilation_matrix(space.fock_cutoff());
    let n_local = DMatrix::from_fn(a_local.nrows(), a_local.ncols(), |r, c| {
        if r == c { C64::new(r as f64, 0.0) } else { C64::new(0.0, 0.0) }
    });
    let a = embed_csr(space, Site::Cavity, &a_local)?;
    let a_dag = a.adjoint();
    let n = embed_csr(space, Site::Cavity, &n_local)?;
    Ok((a, a_dag, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis(dim: usize, i: usize) -> DVector<C64> {
        let mut v = DVector::zeros(dim);
        v[i] = c(1.0);
        v
    }

    #[test]
    fn single_site_embedding_is_identity_map() {
        let space = HilbertSpace::qubits(1).unwrap();
        let z = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        assert_eq!(embed(&space, Site::Dot(0), &z).unwrap().to_dense(), z);
    }

    #[test]
    fn bit_flip_on_second_slot() {
        let space = HilbertSpace::qubits(2).unwrap();
        let x = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let op = embed(&space, Site::Dot(1), &x).unwrap();
        let ff = space.index_of(&[Level::F, Level::F], 0).unwrap();
        let fg = space.index_of(&[Level::F, Level::G], 0).unwrap();
        assert_eq!(op.apply(&basis(4, ff)), basis(4, fg));
    }

    #[test]
    fn annihilation_matrix_element() {
        let space = HilbertSpace::new(1, 2, 2).unwrap();
        let ops = cavity_ops(&space).unwrap();
        let g2 = space.index_of(&[Level::G], 2).unwrap();
        let g1 = space.index_of(&[Level::G], 1).unwrap();
        let out = ops.a.apply(&basis(space.dim(), g2));
        assert!((out - basis(space.dim(), g1) * c(2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn cavity_operator_identities() {
        let space = HilbertSpace::new(1, 2, 3).unwrap();
        let ops = cavity_ops(&space).unwrap();
        let idx = |n| space.index_of(&[Level::F], n).unwrap();
        assert_eq!(ops.a.get(idx(0), idx(1)), c(1.0));
        for n in 0..=3 {
            assert_eq!(ops.number.get(idx(n), idx(n)), c(n as f64));
        }
        assert_eq!(ops.a.apply(&basis(space.dim(), idx(0))).norm(), 0.0);
        let product = ops.a_dagger.matmul(&ops.a).unwrap();
        assert!(product.max_abs_diff(&ops.number).unwrap() < 1e-15);
        assert!(matches!(cavity_ops(&HilbertSpace::qubits(1).unwrap()), Err(Error::NoCavity)));
    }

    #[test]
    fn dot_operator_algebra() {
        let space = HilbertSpace::new(2, 3, 1).unwrap();
        for j in 0..2 {
            let raise = dot_operator(&space, j, DotOp::Raise).unwrap();
            let lower = dot_operator(&space, j, DotOp::Lower).unwrap();
            let pg = dot_operator(&space, j, DotOp::ProjG).unwrap();
            let pf = dot_operator(&space, j, DotOp::ProjF).unwrap();
            let pe = dot_operator(&space, j, DotOp::ProjE).unwrap();
            assert_eq!(lower.matmul(&raise).unwrap().max_abs_diff(&pg).unwrap(), 0.0);
            assert_eq!(lower.max_abs_diff(&raise.adjoint()).unwrap(), 0.0);
            let total = pg.add(&pf).unwrap().add(&pe).unwrap();
            assert_eq!(total.max_abs_diff(&LinearOperator::identity(space)).unwrap(), 0.0);
        }
        let local = local_dot_matrix(3, DotOp::Raise).unwrap();
        assert_eq!(local[(Level::E.index(), Level::G.index())], c(1.0));
    }

    #[test]
    fn excited_operators_need_three_levels() {
        let space = HilbertSpace::qubits(2).unwrap();
        assert!(matches!(dot_operator(&space, 0, DotOp::Raise), Err(Error::MissingExcitedLevel)));
        assert!(dot_operator(&space, 0, DotOp::ProjG).is_ok());
        assert!(matches!(dot_operator(&space, 2, DotOp::ProjG), Err(Error::SiteOutOfRange { .. })));
    }

    #[test]
    fn embed_rejects_bad_local_dimension() {
        let space = HilbertSpace::qubits(2).unwrap();
        let bad = DMatrix::<C64>::identity(3, 3);
        assert!(matches!(embed(&space, Site::Dot(0), &bad), Err(Error::DimensionMismatch { .. })));
        assert!(embed(&space, Site::Dot(5), &DMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn large_spaces_are_sparse() {
        let space = HilbertSpace::new(5, 3, 4).unwrap();
        assert!(space.dim() > SPARSE_THRESHOLD);
        let pg = dot_operator(&space, 2, DotOp::ProjG).unwrap();
        assert!(pg.is_sparse());
        assert!(!dot_operator(&HilbertSpace::qubits(3).unwrap(), 0, DotOp::ProjG).unwrap().is_sparse());
    }
}
