use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex values serialize as a bare number when real, else `[re, im]`.
pub(crate) mod complex_serde {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    pub fn serialize<S: Serializer>(v: &C64, s: S) -> Result<S::Ok, S::Error> {
        if v.im == 0.0 {
            Repr::Real(v.re).serialize(s)
        } else {
            Repr::Pair([v.re, v.im]).serialize(s)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        Ok(match Repr::deserialize(d)? {
            Repr::Real(re) => C64::new(re, 0.0),
            Repr::Pair([re, im]) => C64::new(re, im),
        })
    }
}

/// Per-dot physical parameters, all in meV.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotParams {
    /// Dot–waveguide coupling `g_j`.
    #[serde(rename = "g_meV", with = "complex_serde")]
    pub g: C64,
    /// Rabi frequency `Ω_j` of the laser detuned by `Δ_j`.
    #[serde(rename = "omega_meV", with = "complex_serde")]
    pub omega: C64,
    /// Rabi frequency `Ω'_j` of the laser detuned by `Δ'_j`.
    #[serde(rename = "omega_prime_meV", with = "complex_serde")]
    pub omega_prime: C64,
    #[serde(rename = "delta_meV")]
    pub delta: f64,
    #[serde(rename = "delta_prime_meV")]
    pub delta_prime: f64,
    /// Waveguide detuning `Δ^C_j`.
    #[serde(rename = "delta_cav_meV")]
    pub delta_cav: f64,
}

impl DotParams {
    /// Dot with real couplings, `Ω' = Ω` and `Δ' = Δ`.
    pub fn symmetric(g: f64, omega: f64, delta: f64, delta_cav: f64) -> Self {
        DotParams {
            g: C64::new(g, 0.0),
            omega: C64::new(omega, 0.0),
            omega_prime: C64::new(omega, 0.0),
            delta,
            delta_prime: delta,
            delta_cav,
        }
    }

    /// Two-photon detuning `δ_j = Δ^C_j − Δ_j`.
    pub fn two_photon_detuning(&self) -> f64 {
        self.delta_cav - self.delta
    }

    /// Waveguide-induced Stark coefficient `|g_j|²/Δ^C_j`.
    pub fn dispersive_shift(&self) -> f64 {
        self.g.norm_sqr() / self.delta_cav
    }

    pub fn lambda(&self) -> Result<C64> {
        lambda_coeff(self)
    }

    /// Lasers off: same dot, same waveguide detuning, no drive.
    pub fn undriven(&self) -> Self {
        DotParams { omega: C64::new(0.0, 0.0), omega_prime: C64::new(0.0, 0.0), ..*self }
    }

    /// Realizes a drive target: the waveguide detuning becomes
    /// `Δ^C = Δ + δ_target`, and `Ω = Ω'` are chosen so that `λ = lambda_target`.
    pub fn realize(&self, lambda_target: C64, delta_target: f64) -> Result<Self> {
        if self.g == C64::new(0.0, 0.0) {
            return Err(Error::InvalidParameter("cannot drive a dot with g = 0".into()));
        }
        let delta_cav = self.delta + delta_target;
        if self.delta == 0.0 || delta_cav == 0.0 {
            return Err(Error::InvalidParameter("zero detuning in drive realization".into()));
        }
        // λ = conj(Ω) g (1/Δ + 1/Δ^C) / 4
        let conj_omega = lambda_target * 4.0 / (self.g * (1.0 / self.delta + 1.0 / delta_cav));
        let omega = conj_omega.conj();
        Ok(DotParams { omega, omega_prime: omega, delta_prime: self.delta, delta_cav, ..*self })
    }
}

/// Stark-coupling coefficient `λ_j = (Ω_j* g_j / 4)(1/Δ_j + 1/Δ^C_j)`, meV.
pub fn lambda_coeff(dot: &DotParams) -> Result<C64> {
    if dot.delta == 0.0 || dot.delta_cav == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "λ needs nonzero Δ and Δ^C (got Δ = {}, Δ^C = {})",
            dot.delta, dot.delta_cav
        )));
    }
    Ok(dot.omega.conj() * dot.g / 4.0 * (1.0 / dot.delta + 1.0 / dot.delta_cav))
}

/// `η = |λ_j λ_k|/2 · (1/δ_j + 1/δ_k)` from couplings and two-photon detunings.
///
/// A zero `λ` gives zero regardless of detunings. Otherwise both detunings
/// must be nonzero and share a sign.
pub fn eta_from(lambda_j: C64, delta_j: f64, lambda_k: C64, delta_k: f64) -> Result<f64> {
    let zero = C64::new(0.0, 0.0);
    if lambda_j == zero || lambda_k == zero {
        return Ok(0.0);
    }
    if delta_j == 0.0 || delta_k == 0.0 {
        return Err(Error::InvalidParameter("two-photon detuning δ must be nonzero".into()));
    }
    if delta_j.signum() != delta_k.signum() {
        return Err(Error::InvalidParameter(format!(
            "two-photon detunings of mixed sign (δ_j = {delta_j}, δ_k = {delta_k}); the pair \
             interaction is only defined for a common sign"
        )));
    }
    Ok(lambda_j.norm() * lambda_k.norm() / 2.0 * (1.0 / delta_j + 1.0 / delta_k))
}

pub fn eta_coeff(j: &DotParams, k: &DotParams) -> Result<f64> {
    eta_from(lambda_coeff(j)?, j.two_photon_detuning(), lambda_coeff(k)?, k.two_photon_detuning())
}

/// Dispersive-tier parameters of one dot: `λ`, `δ`, and the waveguide Stark
/// coefficient `|g|²/Δ^C`, all meV.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct EffDot {
    pub lambda: C64,
    pub delta: f64,
    pub dispersive: f64,
}

impl EffDot {
    pub fn from_params(dot: &DotParams) -> Result<Self> {
        Ok(EffDot {
            lambda: lambda_coeff(dot)?,
            delta: dot.two_photon_detuning(),
            dispersive: dot.dispersive_shift(),
        })
    }

    pub fn idle() -> Self {
        EffDot { lambda: C64::new(0.0, 0.0), delta: 0.0, dispersive: 0.0 }
    }

    pub fn is_idle(&self) -> bool {
        self.lambda == C64::new(0.0, 0.0) && self.dispersive == 0.0
    }
}

/// Couplings derived from a set of dots.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedCouplings {
    pub lambda: Vec<C64>,
    /// `δ_j = Δ^C_j − Δ_j`.
    pub delta_small: Vec<f64>,
    /// `η_jk`, symmetric.
    pub eta: DMatrix<f64>,
    /// `δ_jk = δ_j − δ_k`, antisymmetric.
    pub delta_jk: DMatrix<f64>,
    /// Common `η_jj` when all diagonal entries agree within 1e-9 relative.
    pub epsilon: Option<f64>,
}

impl DerivedCouplings {
    pub fn compute(dots: &[DotParams]) -> Result<Self> {
        let effs: Vec<EffDot> = dots.iter().map(EffDot::from_params).collect::<Result<_>>()?;
        Self::from_eff(&effs)
    }

    pub fn from_eff(dots: &[EffDot]) -> Result<Self> {
        let n = dots.len();
        let mut eta = DMatrix::zeros(n, n);
        let mut delta_jk = DMatrix::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let v = eta_from(dots[j].lambda, dots[j].delta, dots[k].lambda, dots[k].delta)?;
                eta[(j, k)] = v;
                eta[(k, j)] = v;
                let d = dots[j].delta - dots[k].delta;
                delta_jk[(j, k)] = d;
                delta_jk[(k, j)] = -d;
            }
        }
        let epsilon = if n == 0 {
            None
        } else {
            let first = eta[(0, 0)];
            let uniform =
                (0..n).all(|j| (eta[(j, j)] - first).abs() <= 1e-9 * first.abs().max(f64::MIN_POSITIVE));
            uniform.then_some(first)
        };
        Ok(DerivedCouplings {
            lambda: dots.iter().map(|d| d.lambda).collect(),
            delta_small: dots.iter().map(|d| d.delta).collect(),
            eta,
            delta_jk,
            epsilon,
        })
    }
}
