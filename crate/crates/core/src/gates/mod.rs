//! Controlled-phase gate planning, execution on each tier, and phase
//! bookkeeping.

pub mod phase;
pub mod schedule;
pub mod truth_table;

pub use phase::{
    extract_conditional_phase, local_phase_correction, phase_distance, wrap_phase, LEAKAGE_OVERLAP,
};
pub use schedule::{cz_gate_time, plan_scz, smallest_k, DotDrive, DriveSchedule, Segment};
pub use truth_table::{
    cz_fidelity, cz_truth_table, null_gate_check, null_gate_numeric, null_gate_residual_at, null_gate_schedule,
    GateOptions, GateResult,
};
