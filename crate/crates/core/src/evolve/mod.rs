//! Time evolution engines.

pub mod blockwise;
pub mod convergence;
pub mod diagonal;
pub mod floquet;
pub mod lindblad;
pub mod ode;
pub mod schrodinger;

pub use blockwise::{
    block_evolve, blockwise_decoherence_evolve, brute_force_register, coherent_blockwise, exact_blockwise,
    fock_blockwise, grouping_audit, overlap_fidelity, BlockEngine, BlockLayer, BlockRegister, CoherentRegister,
    ExactRegister, FockRegister, GroupingAudit, RegisterState,
};
pub use convergence::{fock_convergence_check, ConvergenceReport, CutoffStep};
pub use diagonal::{diagonal_propagate, diagonal_propagate_static};
pub use floquet::{floquet_propagator, matrix_power};
pub use lindblad::{lindblad_evolve, DecayModel};
pub use ode::{Dopri5, OdeOptions, OdeStats};
pub use schrodinger::{propagator, schrodinger_evolve, EvolutionSpec, Trajectory};
