use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::blockwise::BlockLayer;
use crate::model::params::{DotParams, EffDot};
use crate::model::units::HBAR;

/// Drive target of one dot during one segment.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DotDrive {
    pub active: bool,
    #[serde(rename = "lambda_meV", default)]
    pub lambda: f64,
    #[serde(rename = "delta_meV", default)]
    pub delta: f64,
    /// Group label `J`; dots of one group share `δ = Jδ₀`.
    #[serde(default)]
    pub group: u32,
}

impl DotDrive {
    pub fn idle() -> Self {
        DotDrive { active: false, lambda: 0.0, delta: 0.0, group: 0 }
    }

    pub fn driven(lambda: f64, delta: f64, group: u32) -> Self {
        DotDrive { active: true, lambda, delta, group }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    #[serde(rename = "t_start_ns")]
    pub t_start: f64,
    #[serde(rename = "t_end_ns")]
    pub t_end: f64,
    pub dots: Vec<DotDrive>,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn active_dots(&self) -> Vec<usize> {
        (0..self.dots.len()).filter(|&j| self.dots[j].active).collect()
    }

    /// Dispersive-tier parameters straight from the targets; the waveguide
    /// Stark coefficient is zero.
    pub fn target_dots(&self) -> Vec<EffDot> {
        self.dots
            .iter()
            .map(|d| if d.active { EffDot { lambda: C64::new(d.lambda, 0.0), delta: d.delta, dispersive: 0.0 } } else { EffDot::idle() })
            .collect()
    }

    /// Physical settings that realize the targets on `hardware`: active dots
    /// get `Δ^C = Δ + δ` and the matching laser strength, inactive dots have
    /// their lasers off.
    pub fn realize(&self, hardware: &[DotParams]) -> Result<Vec<DotParams>> {
        if hardware.len() != self.dots.len() {
            return Err(Error::DimensionMismatch { expected: self.dots.len(), found: hardware.len() });
        }
        self.dots
            .iter()
            .zip(hardware)
            .map(|(d, p)| if d.active { p.realize(C64::new(d.lambda, 0.0), d.delta) } else { Ok(p.undriven()) })
            .collect()
    }

    /// Dispersive-tier parameters, realized on `hardware` when given.
    pub fn eff_dots(&self, hardware: Option<&[DotParams]>) -> Result<Vec<EffDot>> {
        match hardware {
            None => Ok(self.target_dots()),
            Some(hw) => self
                .realize(hw)?
                .iter()
                .zip(&self.dots)
                .map(|(p, d)| {
                    if d.active {
                        EffDot::from_params(p)
                    } else {
                        Ok(EffDot { dispersive: p.dispersive_shift(), ..EffDot::idle() })
                    }
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSchedule {
    pub segments: Vec<Segment>,
    /// `k` in `δ₀t/ħ = kπ`, when the schedule was planned that way.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_integer: Option<u64>,
    #[serde(rename = "delta0_meV", default, skip_serializing_if = "Option::is_none")]
    pub delta0: Option<f64>,
    #[serde(rename = "lambda0_meV", default, skip_serializing_if = "Option::is_none")]
    pub lambda0: Option<f64>,
}

impl DriveSchedule {
    pub fn single(segment: Segment) -> Self {
        DriveSchedule { segments: vec![segment], k_integer: None, delta0: None, lambda0: None }
    }

    pub fn num_dots(&self) -> usize {
        self.segments.first().map_or(0, |s| s.dots.len())
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// Dots active in any segment.
    pub fn active_dots(&self) -> Vec<usize> {
        (0..self.num_dots()).filter(|&j| self.segments.iter().any(|s| s.dots[j].active)).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_dots();
        let mut prev_end = 0.0;
        for (i, s) in self.segments.iter().enumerate() {
            if s.dots.len() != n {
                return Err(Error::DimensionMismatch { expected: n, found: s.dots.len() });
            }
            if !(s.t_start >= prev_end && s.t_end >= s.t_start && s.t_end.is_finite()) {
                return Err(Error::InvalidParameter(format!("segment {i} overlaps or is out of order")));
            }
            prev_end = s.t_end;
            for a in s.dots.iter().filter(|d| d.active) {
                if let Some(b) = s.dots.iter().find(|b| b.active && b.group == a.group && b.delta != a.delta) {
                    return Err(Error::InvalidParameter(format!(
                        "segment {i}: group {} mixes δ = {} and δ = {}",
                        a.group, a.delta, b.delta
                    )));
                }
            }
        }
        if let (Some(k), Some(d0)) = (self.k_integer, self.delta0) {
            for (i, s) in self.segments.iter().enumerate() {
                let turns = d0 * s.duration() / HBAR / PI;
                if (turns - k as f64).abs() > 1e-12 * k as f64 {
                    return Err(Error::InvalidParameter(format!(
                        "segment {i}: δ₀t/ħ = {turns}π, expected {k}π"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evolution layers for the flip-free tier. Gaps between segments become
    /// undriven layers.
    pub fn layers(&self, hardware: Option<&[DotParams]>) -> Result<Vec<BlockLayer>> {
        self.validate()?;
        let mut out = Vec::new();
        let mut t = 0.0;
        for s in &self.segments {
            if s.t_start > t {
                let idle = Segment { t_start: t, t_end: s.t_start, dots: vec![DotDrive::idle(); s.dots.len()] };
                out.push(BlockLayer { duration: idle.duration(), dots: idle.eff_dots(hardware)? });
            }
            out.push(BlockLayer { duration: s.duration(), dots: s.eff_dots(hardware)? });
            t = s.t_end;
        }
        Ok(out)
    }

    /// Appends `other` after the end of this schedule.
    pub fn then(&self, other: &DriveSchedule) -> DriveSchedule {
        let shift = self.t_end();
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().map(|s| Segment {
            t_start: s.t_start + shift,
            t_end: s.t_end + shift,
            dots: s.dots.clone(),
        }));
        let same = |a: Option<f64>, b: Option<f64>| if a == b { a } else { None };
        DriveSchedule {
            segments,
            k_integer: if self.k_integer == other.k_integer { self.k_integer } else { None },
            delta0: same(self.delta0, other.delta0),
            lambda0: same(self.lambda0, other.lambda0),
        }
    }
}

/// Time for a pair interaction `η` to accumulate the conditional phase π:
/// `2ηt/ħ = π`.
pub fn cz_gate_time(eta: f64) -> f64 {
    PI * HBAR / (2.0 * eta)
}

/// Smallest `k ≥ 1` with `√(2k) ≥ ratio_min`.
pub fn smallest_k(ratio_min: f64) -> u64 {
    let mut k = ((ratio_min * ratio_min / 2.0).ceil() as u64).max(1);
    while k > 1 && ((2 * (k - 1)) as f64).sqrt() >= ratio_min {
        k -= 1;
    }
    while ((2 * k) as f64).sqrt() < ratio_min {
        k += 1;
    }
    k
}

/// One simultaneous CZ layer: `groups[J-1]` lists the pairs driven at
/// `δ_J = Jδ₀`, `λ_J = √J λ₀`. Picks the smallest `k` with `√(2k) ≥
/// ratio_min`, `δ₀ = λ₀√(2k)` and `t = kπħ/δ₀`, at which both the in-group
/// conditional phase `2ηt/ħ = π` and the cross-group null `δ₀t/ħ = kπ` hold.
pub fn plan_scz(num_dots: usize, groups: &[Vec<(usize, usize)>], lambda0: f64, ratio_min: f64) -> Result<DriveSchedule> {
    if !(lambda0 > 0.0 && lambda0.is_finite()) {
        return Err(Error::InvalidParameter(format!("λ₀ must be positive, got {lambda0}")));
    }
    if !(ratio_min >= 1.0 && ratio_min.is_finite()) {
        return Err(Error::InvalidParameter(format!("ratio_min must be ≥ 1, got {ratio_min}")));
    }
    let k = smallest_k(ratio_min);
    let delta0 = lambda0 * ((2 * k) as f64).sqrt();
    let t = k as f64 * PI * HBAR / delta0;
    let mut dots = vec![DotDrive::idle(); num_dots];
    for (gi, pairs) in groups.iter().enumerate() {
        let j = (gi + 1) as u32;
        for &(a, b) in pairs {
            if a == b {
                return Err(Error::InvalidParameter(format!("pair ({a}, {b}) is a self-loop")));
            }
            for d in [a, b] {
                if d >= num_dots {
                    return Err(Error::SiteOutOfRange { index: d, num_dots });
                }
                if dots[d].active {
                    return Err(Error::InvalidParameter(format!("dot {d} appears in more than one pair")));
                }
                dots[d] = DotDrive::driven(lambda0 * (j as f64).sqrt(), j as f64 * delta0, j);
            }
        }
    }
    Ok(DriveSchedule {
        segments: vec![Segment { t_start: 0.0, t_end: t, dots }],
        k_integer: Some(k),
        delta0: Some(delta0),
        lambda0: Some(lambda0),
    })
}
