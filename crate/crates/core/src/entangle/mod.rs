//! Graph, cluster and NCZ schedules, their ideal targets, and fidelities
//! under waveguide decay.

pub mod cluster;
pub mod decoherence;
pub mod graph;
pub mod ncz;

pub use cluster::{cluster_1d_schedule, cluster_2d_schedule, cluster_schedule, LatticeSpec};
pub use decoherence::{
    auto_engine, decay_sweep, decoherence_fidelity, hardware_cz_schedule, linspace, scaling_row, sweep_decay,
    DecoherenceFidelity, DecoherenceStudy, ScalingCase, ScalingRow, SweepPoint,
};
pub use graph::{
    complete_graph_layer, complete_graph_schedule, concatenate, diagonal_unitary_phases, execute_eff,
    graph_state_schedule, greedy_matchings, ideal_graph_state, schedule_layers, GraphSpec,
};
pub use ncz::{ncz_report, ncz_schedule, NczReport};
