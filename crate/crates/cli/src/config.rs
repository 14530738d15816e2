//! Experiment configuration. Energies are meV, times ns, rates 1/ns; every
//! dimensional field carries its unit in the name.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use dotbus::entangle::{GraphSpec, LatticeSpec, ScalingCase};
use dotbus::evolve::{BlockEngine, DecayModel, OdeOptions};
use dotbus::model::{DotParams, RegimeThresholds, Tier};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dots: Vec<DotParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayModel>,
    #[serde(default = "default_tier")]
    pub tier: Tier,
    #[serde(default = "default_cutoff")]
    pub fock_cutoff: usize,
    #[serde(rename = "lambda0_meV")]
    pub lambda0: f64,
    #[serde(default = "default_ratio")]
    pub ratio_min: f64,
    #[serde(default)]
    pub thresholds: RegimeThresholds,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub engine: EngineChoice,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cz: Option<CzBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub null_gate: Option<NullGateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<GraphBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ncz: Option<NczBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fock_check: Option<FockCheckBlock>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default)]
    pub outputs: Outputs,
}

fn default_tier() -> Tier {
    Tier::Eff1
}

fn default_cutoff() -> usize {
    4
}

fn default_ratio() -> f64 {
    100.0
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rel_tol: 1e-10, abs_tol: 1e-12 }
    }
}

/// Decoherence engine. `auto` picks the exact per-class engine up to ten
/// dots and the linear coherent engine beyond.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    #[default]
    Auto,
    Exact,
    Coherent,
    /// Truncated Fock blocks at `fock_cutoff`.
    Fock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CzBlock {
    /// Dots the gate acts on.
    #[serde(default = "default_pair")]
    pub pair: [usize; 2],
}

fn default_pair() -> [usize; 2] {
    [0, 1]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullGateBlock {
    /// Group-index pairs `(m, n)`, `m ≠ n`.
    pub groups: Vec<(u32, u32)>,
    /// Multiples of `πħ/δ₀` to test.
    pub k: Vec<u64>,
    #[serde(rename = "delta0_meV", default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "lowercase")]
pub enum GraphBlock {
    Edges { num_qubits: usize, edges: Vec<(usize, usize)> },
    Cycle { num_qubits: usize },
    Path { num_qubits: usize },
    Complete { num_qubits: usize },
    /// Erdős–Rényi graph drawn from `rng_seed`.
    Random { num_qubits: usize, edge_probability: f64 },
}

impl GraphBlock {
    pub fn spec(&self, seed: u64) -> GraphSpec {
        match *self {
            GraphBlock::Edges { num_qubits, ref edges } => GraphSpec { num_qubits, edges: edges.clone() },
            GraphBlock::Cycle { num_qubits } => GraphSpec::cycle(num_qubits),
            GraphBlock::Path { num_qubits } => GraphSpec::path(num_qubits),
            GraphBlock::Complete { num_qubits } => GraphSpec::complete(num_qubits),
            GraphBlock::Random { num_qubits, edge_probability } => {
                use rand::{Rng, SeedableRng};
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let mut edges = Vec::new();
                for a in 0..num_qubits {
                    for b in a + 1..num_qubits {
                        if rng.random::<f64>() < edge_probability {
                            edges.push((a, b));
                        }
                    }
                }
                GraphSpec { num_qubits, edges }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NczBlock {
    pub controls: usize,
}

/// How the two-dot gate for the decay sweep is timed.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepSchedule {
    /// Dots driven as configured for `πħ/(2η)`.
    #[default]
    Hardware,
    /// Scheduler targets realized on the dots.
    Planned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepVariant {
    pub label: String,
    pub dots: Vec<DotParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(rename = "tau_w_ns", default = "default_tau_w")]
    pub tau_w: f64,
    /// First and last `τ_w/τ₀`.
    pub tau_ratio_range: [f64; 2],
    pub points: usize,
    #[serde(default)]
    pub schedule: SweepSchedule,
    /// Dot sets to sweep; the top-level dots when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variants: Vec<SweepVariant>,
}

fn default_tau_w() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingBlock {
    pub cases: Vec<ScalingCase>,
    /// Add the transpose of every non-square lattice.
    #[serde(default = "yes")]
    pub transposes: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockCheckBlock {
    pub cutoffs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub dir: PathBuf,
}

impl Default for Outputs {
    fn default() -> Self {
        Outputs { dir: PathBuf::from("out") }
    }
}

/// Load failure with a field path and position when available.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: field `{field}`: {message}")]
    Parse { path: PathBuf, field: String, message: String },
    #[error("{0}")]
    Invalid(String),
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.into(), source })?;
        Self::parse(&text).map_err(|e| match e {
            ConfigError::Parse { field, message, .. } => ConfigError::Parse { path: path.into(), field, message },
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            ConfigError::Parse { path: PathBuf::new(), field, message: e.into_inner().to_string() }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.dots.is_empty() {
            return bad("`dots` must list at least one dot".into());
        }
        if !(self.lambda0 > 0.0 && self.lambda0.is_finite()) {
            return bad(format!("`lambda0_meV` must be positive, got {}", self.lambda0));
        }
        if !(self.ratio_min >= 1.0) {
            return bad(format!("`ratio_min` must be at least 1, got {}", self.ratio_min));
        }
        if self.fock_cutoff == 0 {
            return bad("`fock_cutoff` must be at least 1".into());
        }
        if !(self.tolerances.rel_tol > 0.0 && self.tolerances.abs_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if let Some(cz) = &self.cz {
            if cz.pair[0] == cz.pair[1] || cz.pair.iter().any(|&j| j >= self.dots.len()) {
                return bad(format!("`cz.pair` {:?} must name two distinct configured dots", cz.pair));
            }
        }
        if let Some(s) = &self.sweep {
            if s.points == 0 || !(s.tau_w > 0.0) || s.tau_ratio_range.iter().any(|x| !(*x >= 0.0)) {
                return bad("`sweep` needs points ≥ 1, tau_w_ns > 0 and nonnegative ratios".into());
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, output location excluded.
    pub fn hash(&self) -> String {
        let canonical = ExperimentConfig { outputs: Outputs::default(), ..self.clone() };
        let digest = Sha256::digest(serde_json::to_vec(&canonical).expect("config serializes"));
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn decay_model(&self) -> DecayModel {
        self.decay.unwrap_or_else(DecayModel::none)
    }

    pub fn ode(&self) -> OdeOptions {
        OdeOptions::with_tolerances(self.tolerances.rel_tol, self.tolerances.abs_tol)
    }

    pub fn block_engine(&self, num_dots: usize) -> BlockEngine {
        match self.engine {
            EngineChoice::Auto => dotbus::entangle::auto_engine(num_dots),
            EngineChoice::Exact => BlockEngine::Exact,
            EngineChoice::Coherent => BlockEngine::Coherent,
            EngineChoice::Fock => BlockEngine::Fock { cutoff: self.fock_cutoff },
        }
    }
}
