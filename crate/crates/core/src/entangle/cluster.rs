use serde::{Deserialize, Serialize};

use super::graph::GraphSpec;
use crate::error::{Error, Result};
use crate::gates::schedule::{plan_scz, DriveSchedule};

/// `rows × cols` lattice; qubit `(r, c)` is dot `r·cols + c`. A chain is a
/// single row. Dots are labeled `A B A B …` on even rows and `C D C D …` on
/// odd rows.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub rows: usize,
    pub cols: usize,
}

impl LatticeSpec {
    pub fn chain(n: usize) -> Self {
        LatticeSpec { rows: 1, cols: n }
    }

    pub fn num_qubits(&self) -> usize {
        self.rows * self.cols
    }

    pub fn index(&self, r: usize, c: usize) -> usize {
        r * self.cols + c
    }

    pub fn transposed(&self) -> Self {
        LatticeSpec { rows: self.cols, cols: self.rows }
    }

    pub fn label(&self, r: usize, c: usize) -> char {
        match (r % 2, c % 2) {
            (0, 0) => 'A',
            (0, _) => 'B',
            (_, 0) => 'C',
            _ => 'D',
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::InvalidParameter("lattice dimensions must be at least 1".into()));
        }
        if self.num_qubits() < 2 {
            return Err(Error::InvalidParameter("a cluster needs at least two qubits".into()));
        }
        Ok(())
    }

    pub fn graph(&self) -> GraphSpec {
        GraphSpec { num_qubits: self.num_qubits(), edges: self.edge_layers().into_iter().flatten().collect() }
    }

    /// Nearest-neighbour edges split into the four parallel layers: rows from
    /// even columns (A–B, C–D), rows from odd columns (B–A, D–C), columns from
    /// even rows (A–C, B–D), columns from odd rows. Empty layers are dropped.
    pub fn edge_layers(&self) -> Vec<Vec<(usize, usize)>> {
        let mut layers = vec![Vec::new(); 4];
        for r in 0..self.rows {
            for c in 0..self.cols {
                if c + 1 < self.cols {
                    layers[c % 2].push((self.index(r, c), self.index(r, c + 1)));
                }
                if r + 1 < self.rows {
                    layers[2 + r % 2].push((self.index(r, c), self.index(r + 1, c)));
                }
            }
        }
        layers.retain(|l| !l.is_empty());
        layers
    }
}

fn layer_schedules(num: usize, layers: Vec<Vec<(usize, usize)>>, lambda0: f64, ratio_min: f64) -> Result<Vec<DriveSchedule>> {
    layers
        .into_iter()
        .map(|l| plan_scz(num, &l.into_iter().map(|p| vec![p]).collect::<Vec<_>>(), lambda0, ratio_min))
        .collect()
}

/// Chain of `n` dots: A–B pairs, then B–A pairs.
pub fn cluster_1d_schedule(n: usize, lambda0: f64, ratio_min: f64) -> Result<Vec<DriveSchedule>> {
    let lattice = LatticeSpec::chain(n);
    lattice.validate()?;
    layer_schedules(n, lattice.edge_layers(), lambda0, ratio_min)
}

/// `rows × cols` lattice. A lattice with more rows than columns reuses the
/// schedule of its transpose with the dots relabeled, so `M × N` and
/// `N × M` run the same operator sequence.
pub fn cluster_2d_schedule(lattice: LatticeSpec, lambda0: f64, ratio_min: f64) -> Result<Vec<DriveSchedule>> {
    lattice.validate()?;
    if lattice.rows <= lattice.cols {
        return layer_schedules(lattice.num_qubits(), lattice.edge_layers(), lambda0, ratio_min);
    }
    let t = lattice.transposed();
    let base = layer_schedules(t.num_qubits(), t.edge_layers(), lambda0, ratio_min)?;
    // dot (r, c) of the transpose is dot (c, r) here
    let map: Vec<usize> = (0..t.num_qubits()).map(|i| lattice.index(i % t.cols, i / t.cols)).collect();
    Ok(base
        .into_iter()
        .map(|mut s| {
            for seg in &mut s.segments {
                let mut dots = seg.dots.clone();
                for (i, d) in seg.dots.iter().enumerate() {
                    dots[map[i]] = *d;
                }
                seg.dots = dots;
            }
            s
        })
        .collect())
}

pub fn cluster_schedule(lattice: LatticeSpec, lambda0: f64, ratio_min: f64) -> Result<Vec<DriveSchedule>> {
    if lattice.rows == 1 {
        cluster_1d_schedule(lattice.cols, lambda0, ratio_min)
    } else {
        cluster_2d_schedule(lattice, lambda0, ratio_min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entangle::graph::{execute_eff, ideal_graph_state};
    use crate::ops::state::fidelity;

    const L0: f64 = 0.0025;

    fn pairs(s: &DriveSchedule) -> Vec<(usize, usize)> {
        let d = &s.segments[0].dots;
        let mut out = Vec::new();
        for a in 0..d.len() {
            for b in a + 1..d.len() {
                if d[a].active && d[b].active && d[a].group == d[b].group {
                    out.push((a, b));
                }
            }
        }
        out
    }

    #[test]
    fn chains() {
        assert_eq!(cluster_1d_schedule(2, L0, 100.0).unwrap().len(), 1);
        let s = cluster_1d_schedule(4, L0, 100.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(pairs(&s[0]), vec![(0, 1), (2, 3)]);
        assert_eq!(pairs(&s[1]), vec![(1, 2)]);
    }

    #[test]
    fn layer_counts_for_twelve_dots() {
        for (r, c, n) in [(1, 12, 2), (2, 6, 3), (3, 4, 4), (6, 2, 3), (4, 3, 4), (12, 1, 2)] {
            assert_eq!(cluster_schedule(LatticeSpec { rows: r, cols: c }, L0, 100.0).unwrap().len(), n, "{r}x{c}");
        }
    }

    #[test]
    fn square_lattice_follows_labeling() {
        let l = LatticeSpec { rows: 2, cols: 2 };
        assert_eq!([l.label(0, 0), l.label(0, 1), l.label(1, 0), l.label(1, 1)], ['A', 'B', 'C', 'D']);
        let s = cluster_2d_schedule(l, L0, 100.0).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(pairs(&s[0]), vec![(0, 1), (2, 3)]);
        assert_eq!(pairs(&s[1]), vec![(0, 2), (1, 3)]);
    }

    #[test]
    fn lattices_reach_their_graph_states() {
        for l in [LatticeSpec { rows: 2, cols: 2 }, LatticeSpec { rows: 2, cols: 3 }, LatticeSpec { rows: 3, cols: 2 }, LatticeSpec::chain(5)] {
            let out = execute_eff(&cluster_schedule(l, L0, 100.0).unwrap(), None).unwrap();
            let f = fidelity(&out, &ideal_graph_state(&l.graph()).unwrap()).unwrap();
            assert!((f - 1.0).abs() < 1e-9, "{l:?}: {f}");
        }
    }

    #[test]
    fn transposed_schedule_is_a_relabeling() {
        let wide = cluster_schedule(LatticeSpec { rows: 2, cols: 3 }, L0, 100.0).unwrap();
        let tall = cluster_schedule(LatticeSpec { rows: 3, cols: 2 }, L0, 100.0).unwrap();
        assert_eq!(wide.len(), tall.len());
        for (w, t) in wide.iter().zip(&tall) {
            let mut a: Vec<_> = w.segments[0].dots.iter().map(|d| (d.group, d.active)).collect();
            let mut b: Vec<_> = t.segments[0].dots.iter().map(|d| (d.group, d.active)).collect();
            a.sort();
            b.sort();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejects_degenerate_lattices() {
        assert!(cluster_1d_schedule(1, L0, 100.0).is_err());
        assert!(cluster_2d_schedule(LatticeSpec { rows: 0, cols: 3 }, L0, 100.0).is_err());
    }
}
