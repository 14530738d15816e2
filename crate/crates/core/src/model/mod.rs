//! Physical parameters, derived couplings, the three Hamiltonian tiers, and
//! regime validation.

pub mod hamiltonians;
pub mod params;
pub mod regime;
pub mod units;

pub use hamiltonians::{
    build_eff1_hamiltonian, build_eff_hamiltonian, build_full_hamiltonian, eff1_hamiltonian,
    full_hamiltonian, full_rotating_hamiltonian, rotating_frame_phases, EffModel, PairCoupling,
};
pub use params::{eta_coeff, eta_from, lambda_coeff, DerivedCouplings, DotParams, EffDot};
pub use regime::{validate_regime, ConditionCheck, DotRegime, RegimeReport, RegimeThresholds};
pub use units::HBAR;

use serde::{Deserialize, Serialize};

/// Model tier used for a run.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    /// Three-level dots coupled to the waveguide and lasers.
    Full,
    /// Excited levels eliminated; qubits coupled to the waveguide mode.
    Eff1,
    /// Waveguide eliminated; diagonal in the computational basis.
    Eff,
}

impl Tier {
    pub fn as_str(&self) -> &'static str {
        match self {
            Tier::Full => "full",
            Tier::Eff1 => "eff1",
            Tier::Eff => "eff",
        }
    }
}

impl std::fmt::Display for Tier {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Tier {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Tier::Full),
            "eff1" => Ok(Tier::Eff1),
            "eff" => Ok(Tier::Eff),
            other => Err(format!("unknown tier `{other}` (expected full, eff1 or eff)")),
        }
    }
}
