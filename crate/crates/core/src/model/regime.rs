//! Checks of the conditions under which the effective tiers apply.

use serde::{Deserialize, Serialize};

use super::params::{lambda_coeff, DotParams};

/// Relative tolerance for the two equality conditions.
const EQUALITY_TOL: f64 = 1e-9;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegimeThresholds {
    /// Minimum ratio of laser detunings to couplings and Rabi frequencies.
    pub detuning_ratio: f64,
    /// Minimum `δ_j / max(|g_j|²/Δ^C_j, |λ_j|)`.
    pub dispersive_ratio: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        RegimeThresholds { detuning_ratio: 20.0, dispersive_ratio: 50.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: String,
    pub passed: bool,
    /// Measured ratio; equality conditions report `left / right`.
    pub ratio: f64,
    /// Bound the ratio is compared against.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DotRegime {
    pub dot: usize,
    pub checks: Vec<ConditionCheck>,
}

impl DotRegime {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub thresholds: RegimeThresholds,
    pub dots: Vec<DotRegime>,
}

impl RegimeReport {
    pub fn passed(&self) -> bool {
        self.dots.iter().all(DotRegime::passed)
    }

    /// `(dot, condition)` for every failed check.
    pub fn failures(&self) -> Vec<(usize, &str)> {
        self.dots
            .iter()
            .flat_map(|d| d.checks.iter().filter(|c| !c.passed).map(move |c| (d.dot, c.name.as_str())))
            .collect()
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        if num == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

fn equality(name: &str, left: f64, right: f64) -> ConditionCheck {
    let r = ratio(left, right);
    ConditionCheck { name: name.into(), passed: (r - 1.0).abs() <= EQUALITY_TOL, ratio: r, threshold: 1.0 }
}

fn at_least(name: &str, r: f64, threshold: f64) -> ConditionCheck {
    ConditionCheck { name: name.into(), passed: r >= threshold, ratio: r, threshold }
}

fn check_dot(dot: &DotParams, th: &RegimeThresholds) -> Vec<ConditionCheck> {
    let laser_detuning = dot.delta.abs().min(dot.delta_prime.abs());
    let coupling = dot.g.norm().max(dot.omega.norm()).max(dot.omega_prime.norm());
    let delta_small = dot.two_photon_detuning();
    let lambda = lambda_coeff(dot).map(|l| l.norm()).unwrap_or(f64::INFINITY);
    let dispersive = if dot.delta_cav == 0.0 { f64::INFINITY } else { dot.dispersive_shift().abs() };
    vec![
        equality("rabi_magnitudes_equal", dot.omega.norm(), dot.omega_prime.norm()),
        equality("laser_detunings_equal", dot.delta, dot.delta_prime),
        at_least("large_detuning", ratio(laser_detuning, coupling), th.detuning_ratio),
        // δ_j must be a small two-photon detuning next to Δ_j.
        at_least("two_photon_detuning", ratio(dot.delta.abs(), delta_small.abs()), th.detuning_ratio),
        at_least("dispersive", ratio(delta_small.abs(), dispersive.max(lambda)), th.dispersive_ratio),
    ]
}

/// Evaluates every regime condition for every dot. Never fails; each ratio
/// is reported whether or not it passes.
pub fn validate_regime(dots: &[DotParams], thresholds: &RegimeThresholds) -> RegimeReport {
    RegimeReport {
        thresholds: *thresholds,
        dots: dots
            .iter()
            .enumerate()
            .map(|(i, d)| DotRegime { dot: i, checks: check_dot(d, thresholds) })
            .collect(),
    }
}
