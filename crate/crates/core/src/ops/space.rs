use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local level of a dot. The discriminant is the local basis index: `f` first,
/// then `g`, then `e` (present only in three-level spaces).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Level {
    F = 0,
    G = 1,
    E = 2,
}

impl Level {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Level> {
        match i {
            0 => Some(Level::F),
            1 => Some(Level::G),
            2 => Some(Level::E),
            _ => None,
        }
    }
}

/// A tensor factor of a [`HilbertSpace`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    /// Dot `j`, zero-based.
    Dot(usize),
    Cavity,
}

/// `num_dots` dots with two or three levels each, tensored with a Fock space
/// truncated at `fock_cutoff` photons.
///
/// Basis ordering is fixed: dot 0 is the slowest index, the cavity the fastest,
/// and each dot is ordered `(f, g, e)`. With two-level dots and no cavity the
/// basis index of a register state is the bitstring `s_0 s_1 ... s_{N-1}` read
/// as a binary number, where `s_j = 1` iff dot `j` is in `|g>`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HilbertSpace {
    num_dots: usize,
    levels_per_dot: usize,
    fock_cutoff: usize,
}

impl HilbertSpace {
    pub fn new(num_dots: usize, levels_per_dot: usize, fock_cutoff: usize) -> Result<Self> {
        if num_dots == 0 {
            return Err(Error::InvalidSpace("at least one dot is required".into()));
        }
        if levels_per_dot != 2 && levels_per_dot != 3 {
            return Err(Error::InvalidSpace(format!(
                "levels per dot must be 2 or 3, got {levels_per_dot}"
            )));
        }
        let space = HilbertSpace { num_dots, levels_per_dot, fock_cutoff };
        let dim = (levels_per_dot as u128).pow(num_dots as u32) * (fock_cutoff as u128 + 1);
        if dim > u32::MAX as u128 {
            return Err(Error::InvalidSpace(format!("dimension {dim} is too large")));
        }
        Ok(space)
    }

    /// Qubit register: two levels per dot, no cavity.
    pub fn qubits(num_dots: usize) -> Result<Self> {
        Self::new(num_dots, 2, 0)
    }

    pub fn num_dots(&self) -> usize {
        self.num_dots
    }

    pub fn levels_per_dot(&self) -> usize {
        self.levels_per_dot
    }

    pub fn fock_cutoff(&self) -> usize {
        self.fock_cutoff
    }

    pub fn has_excited(&self) -> bool {
        self.levels_per_dot == 3
    }

    pub fn has_cavity(&self) -> bool {
        self.fock_cutoff > 0
    }

    pub fn cavity_dim(&self) -> usize {
        self.fock_cutoff + 1
    }

    pub fn dots_dim(&self) -> usize {
        self.levels_per_dot.pow(self.num_dots as u32)
    }

    pub fn dim(&self) -> usize {
        self.dots_dim() * self.cavity_dim()
    }

    pub fn site_dim(&self, site: Site) -> Result<usize> {
        match site {
            Site::Dot(j) => {
                self.check_dot(j)?;
                Ok(self.levels_per_dot)
            }
            Site::Cavity => {
                if self.has_cavity() {
                    Ok(self.cavity_dim())
                } else {
                    Err(Error::NoCavity)
                }
            }
        }
    }

    /// Stride of a site's local index inside the flat basis index.
    pub fn stride(&self, site: Site) -> Result<usize> {
        match site {
            Site::Dot(j) => {
                self.check_dot(j)?;
                let after = self.num_dots - 1 - j;
                Ok(self.levels_per_dot.pow(after as u32) * self.cavity_dim())
            }
            Site::Cavity => {
                if self.has_cavity() {
                    Ok(1)
                } else {
                    Err(Error::NoCavity)
                }
            }
        }
    }

    pub fn check_dot(&self, j: usize) -> Result<()> {
        if j < self.num_dots {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange { index: j, num_dots: self.num_dots })
        }
    }

    /// All sites in basis order, cavity last when present.
    pub fn sites(&self) -> Vec<Site> {
        let mut sites: Vec<Site> = (0..self.num_dots).map(Site::Dot).collect();
        if self.has_cavity() {
            sites.push(Site::Cavity);
        }
        sites
    }

    pub fn index_of(&self, levels: &[Level], photons: usize) -> Result<usize> {
        if levels.len() != self.num_dots {
            return Err(Error::DimensionMismatch { expected: self.num_dots, found: levels.len() });
        }
        if photons > self.fock_cutoff {
            return Err(Error::InvalidParameter(format!(
                "photon number {photons} above cutoff {}",
                self.fock_cutoff
            )));
        }
        let mut index = 0usize;
        for &level in levels {
            if level.index() >= self.levels_per_dot {
                return Err(Error::MissingExcitedLevel);
            }
            index = index * self.levels_per_dot + level.index();
        }
        Ok(index * self.cavity_dim() + photons)
    }

    pub fn decode(&self, index: usize) -> (Vec<Level>, usize) {
        let photons = index % self.cavity_dim();
        let mut rest = index / self.cavity_dim();
        let mut levels = vec![Level::F; self.num_dots];
        for j in (0..self.num_dots).rev() {
            levels[j] = Level::from_index(rest % self.levels_per_dot).expect("level in range");
            rest /= self.levels_per_dot;
        }
        (levels, photons)
    }

    /// Local index of `site` inside basis state `index`.
    pub fn local_index(&self, index: usize, site: Site) -> usize {
        match site {
            Site::Cavity => index % self.cavity_dim(),
            Site::Dot(j) => {
                let stride = self.levels_per_dot.pow((self.num_dots - 1 - j) as u32) * self.cavity_dim();
                (index / stride) % self.levels_per_dot
            }
        }
    }

    /// Basis index of the register state `bits` (bit `N-1-j` is dot `j`, set
    /// means `|g>`) with the cavity holding `photons`.
    pub fn index_of_bits(&self, bits: usize, photons: usize) -> usize {
        let mut index = 0usize;
        for j in 0..self.num_dots {
            let s = (bits >> (self.num_dots - 1 - j)) & 1;
            index = index * self.levels_per_dot + s;
        }
        index * self.cavity_dim() + photons
    }

    /// Same dots and levels with a different cavity truncation.
    pub fn with_cutoff(&self, fock_cutoff: usize) -> HilbertSpace {
        HilbertSpace { fock_cutoff, ..*self }
    }

    /// Space left after keeping only `sites`.
    pub fn reduced(&self, keep: &[Site]) -> Result<HilbertSpace> {
        let dots = keep.iter().filter(|s| matches!(s, Site::Dot(_))).count();
        let cavity = keep.contains(&Site::Cavity);
        if dots == 0 {
            return Err(Error::InvalidParameter(
                "kept subsystems must include at least one dot".into(),
            ));
        }
        HilbertSpace::new(dots, self.levels_per_dot, if cavity { self.fock_cutoff } else { 0 })
    }
}
