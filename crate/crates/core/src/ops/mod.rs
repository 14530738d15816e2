//! Linear-algebra substrate: Hilbert spaces, operators, states, and the
//! overlap fidelity used throughout.

pub mod csr;
pub mod hamiltonian;
pub mod operator;
pub mod space;
pub mod state;

pub use csr::CsrMatrix;
pub use hamiltonian::Hamiltonian;
pub use operator::{cavity_ops, dot_operator, embed, CavityOperators, DotOp, LinearOperator};
pub use space::{HilbertSpace, Level, Site};
pub use state::{fidelity, trace_distance, QuantumState, StateData};
