//! Unit conventions: energies in meV, times in ns, rates in 1/ns.

/// Reduced Planck constant, meV·ns. Every phase is `E·t/ħ`.
pub const HBAR: f64 = 0.6582119569;

/// Dimensionless phase accumulated by energy `energy` (meV) over `t` (ns).
pub fn phase(energy: f64, t: f64) -> f64 {
    energy * t / HBAR
}

/// Time (ns) for energy `energy` to accumulate `phase` radians.
pub fn time_for_phase(energy: f64, phase: f64) -> f64 {
    phase * HBAR / energy
}
