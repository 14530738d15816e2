//! Stroboscopic propagation of periodic Hamiltonians: one period is
//! integrated and then raised to the needed power by repeated squaring.

use log::debug;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::ode::OdeOptions;
use super::schrodinger::propagator;
use crate::error::Result;
use crate::ops::hamiltonian::Hamiltonian;

/// Energy grid (meV) on which harmonic energies must sit for the period to
/// be exact.
pub const ENERGY_QUANTUM: f64 = 1e-6;

pub fn matrix_power(u: &DMatrix<C64>, mut n: u64) -> DMatrix<C64> {
    let dim = u.nrows();
    let mut result = DMatrix::<C64>::identity(dim, dim);
    let mut base = u.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &base * &result;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `U(t, 0)`; uses the period of `h` when one exists on the
/// [`ENERGY_QUANTUM`] grid, else integrates directly.
pub fn floquet_propagator(h: &Hamiltonian, t: f64, opts: &OdeOptions) -> Result<DMatrix<C64>> {
    let Some(period) = h.period(ENERGY_QUANTUM).filter(|&p| p < t) else {
        return propagator(h, 0.0, t, opts);
    };
    let cycles = (t / period).floor();
    let rest = t - cycles * period;
    debug!("stroboscopic propagation: {cycles} periods of {period} ns plus {rest} ns");
    let one = propagator(h, 0.0, period, opts)?;
    let mut u = matrix_power(&one, cycles as u64);
    if rest > 0.0 {
        u = propagator(h, 0.0, rest, opts)? * u;
    }
    Ok(u)
}
