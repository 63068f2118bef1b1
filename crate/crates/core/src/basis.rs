//! Channel enumeration and permutation-symmetry projection.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::bm::{cached_generator, expm, QLBlock};
use crate::error::{ObeError, Result};

/// Coupled two-oscillator state |n_x l_x, n_y l_y; L⟩ in Jacobi coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChannelState {
    pub nx: u32,
    pub lx: u32,
    pub ny: u32,
    pub ly: u32,
    pub l: u32,
}

impl ChannelState {
    pub const fn new(nx: u32, lx: u32, ny: u32, ly: u32, l: u32) -> Self {
        Self { nx, lx, ny, ly, l }
    }

    /// Number of quanta 2n_x + l_x + 2n_y + l_y.
    pub const fn q(&self) -> u32 {
        2 * self.nx + self.lx + 2 * self.ny + self.ly
    }

    /// Same state with the roles of x and y exchanged.
    pub const fn swapped(&self) -> Self {
        Self::new(self.ny, self.ly, self.nx, self.lx, self.l)
    }
}

/// Permutation symmetry imposed on the spatial wave function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "sigma")]
pub enum Exchange {
    None,
    /// Particles 1 and 2 identical; σ = ±1 fixes (−1)^{l_x}.
    TwoIdentical(i8),
    /// All three identical; σ = ±1.
    ThreeIdentical(i8),
}

impl Exchange {
    pub fn sigma(&self) -> Option<i8> {
        match *self {
            Exchange::None => None,
            Exchange::TwoIdentical(s) | Exchange::ThreeIdentical(s) => Some(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub l: u32,
    pub parity: i8,
    pub exchange: Exchange,
    pub qmax: u32,
}

impl SectorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.parity != 1 && self.parity != -1 {
            return Err(ObeError::config(format!("parity must be +1 or -1, got {}", self.parity)));
        }
        if let Some(s) = self.exchange.sigma() {
            if s != 1 && s != -1 {
                return Err(ObeError::config(format!("exchange sigma must be +1 or -1, got {s}")));
            }
        }
        Ok(())
    }

    fn admits(&self, s: &ChannelState) -> bool {
        let parity = if (s.lx + s.ly) % 2 == 0 { 1 } else { -1 };
        if parity != self.parity {
            return false;
        }
        match self.exchange.sigma() {
            Some(sigma) => (if s.lx % 2 == 0 { 1 } else { -1 }) == sigma,
            None => true,
        }
    }
}

/// Channels of a sector ordered by Q, then (l_x, l_y, n_x).
pub fn enumerate_channels(sector: &SectorSpec) -> Vec<ChannelState> {
    (0..=sector.qmax)
        .flat_map(|q| QLBlock::new(q, sector.l).states)
        .filter(|s| sector.admits(s))
        .collect()
}

/// P23 on one (Q, L) block; requires b = √3 a / 2.
///
/// Entry [row, col] is (−1)^{L + l_x' + l_y'} times the π/6 bracket between
/// the x↔y-swapped row state and the column state.
pub fn p23_matrix(block: &QLBlock) -> DMatrix<f64> {
    let g = cached_generator(block.q, block.l);
    debug_assert_eq!(&g.0, block);
    let m = expm(&(&g.1 * (PI / 6.0)));
    let dim = block.len();
    DMatrix::from_fn(dim, dim, |r, c| {
        let row = &block.states[r];
        let swapped = block.index_of(&row.swapped()).expect("blocks are closed under x-y exchange");
        let phase = if (block.l + row.lx + row.ly) % 2 == 0 { 1.0 } else { -1.0 };
        phase * m[(swapped, c)]
    })
}

/// Orthonormal map from channels to symmetry-adapted states.
#[derive(Clone, Debug)]
pub struct SymmetrizedBasis {
    pub sector: SectorSpec,
    pub channels: Vec<ChannelState>,
    /// channels × states, orthonormal columns.
    pub transform: DMatrix<f64>,
    /// Q of each column.
    pub column_q: Vec<u32>,
}

impl SymmetrizedBasis {
    pub fn len(&self) -> usize {
        self.transform.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Channels and columns with at most `q` quanta (nested sub-basis).
    pub fn truncated(&self, q: u32) -> SymmetrizedBasis {
        let rows: Vec<usize> = (0..self.channels.len()).filter(|&i| self.channels[i].q() <= q).collect();
        let cols: Vec<usize> = (0..self.len()).filter(|&j| self.column_q[j] <= q).collect();
        let transform = DMatrix::from_fn(rows.len(), cols.len(), |r, c| self.transform[(rows[r], cols[c])]);
        SymmetrizedBasis {
            sector: SectorSpec { qmax: q.min(self.sector.qmax), ..self.sector },
            channels: rows.iter().map(|&i| self.channels[i]).collect(),
            transform,
            column_q: cols.iter().map(|&j| self.column_q[j]).collect(),
        }
    }
}

const EIG_TOL: f64 = 1e-6;

fn project_block(q: u32, sector: &SectorSpec, sigma: f64, rows: &[ChannelState]) -> Result<Vec<DVector<f64>>> {
    let block = QLBlock::new(q, sector.l);
    let full = p23_matrix(&block);
    let idx: Vec<usize> = rows.iter().map(|s| block.index_of(s).expect("channel in its block")).collect();
    let n = idx.len();
    // P23 compressed onto the P12 = σ subspace has eigenvalue σ on fully
    // symmetric states and −σ/2 on mixed-symmetry ones
    let c = DMatrix::from_fn(n, n, |i, j| 0.5 * (full[(idx[i], idx[j])] + full[(idx[j], idx[i])]));
    let eig = SymmetricEigen::new(c);
    let mut kept = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if (lambda - sigma).abs() < EIG_TOL {
            kept.push(eig.eigenvectors.column(k).into_owned());
        } else if (lambda + 0.5 * sigma).abs() > EIG_TOL {
            return Err(ObeError::Symmetry(format!(
                "P23 block Q={q} L={} has eigenvalue {lambda} (expected {sigma} or {})",
                sector.l,
                -0.5 * sigma
            )));
        }
    }
    // modified Gram-Schmidt in a fixed order, signs pinned for reproducibility
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(kept.len());
    for mut v in kept {
        for u in &out {
            let d = u.dot(&v);
            v.axpy(-d, u, 1.0);
        }
        let norm = v.norm();
        v /= norm;
        let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() + 1e-12 { x } else { m });
        if pivot < 0.0 {
            v = -v;
        }
        out.push(v);
    }
    Ok(out)
}

/// Symmetry-adapted basis for a sector.
pub fn symmetrize(sector: &SectorSpec) -> Result<SymmetrizedBasis> {
    sector.validate()?;
    let channels = enumerate_channels(sector);
    let nch = channels.len();
    let sigma = match sector.exchange {
        Exchange::ThreeIdentical(s) => s as f64,
        _ => {
            return Ok(SymmetrizedBasis {
                sector: *sector,
                transform: DMatrix::identity(nch, nch),
                column_q: channels.iter().map(ChannelState::q).collect(),
                channels,
            })
        }
    };
    let per_q: Vec<(u32, Vec<usize>)> = (0..=sector.qmax)
        .map(|q| (q, (0..nch).filter(|&i| channels[i].q() == q).collect::<Vec<_>>()))
        .filter(|(_, v)| !v.is_empty())
        .collect();
    let vectors: Vec<Result<(Vec<usize>, u32, Vec<DVector<f64>>)>> = per_q
        .par_iter()
        .map(|(q, rows)| {
            let states: Vec<ChannelState> = rows.iter().map(|&i| channels[i]).collect();
            project_block(*q, sector, sigma, &states).map(|v| (rows.clone(), *q, v))
        })
        .collect();
    let mut cols: Vec<(Vec<usize>, u32, DVector<f64>)> = Vec::new();
    for r in vectors {
        let (rows, q, vs) = r?;
        for v in vs {
            cols.push((rows.clone(), q, v));
        }
    }
    let mut transform = DMatrix::zeros(nch, cols.len());
    for (j, (rows, _, v)) in cols.iter().enumerate() {
        for (k, &i) in rows.iter().enumerate() {
            transform[(i, j)] = v[k];
        }
    }
    Ok(SymmetrizedBasis {
        sector: *sector,
        channels,
        transform,
        column_q: cols.iter().map(|c| c.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sector(qmax: u32, exchange: Exchange, parity: i8) -> SectorSpec {
        SectorSpec { l: 0, parity, exchange, qmax }
    }

    #[test]
    fn enumeration_examples() {
        let s = sector(0, Exchange::ThreeIdentical(1), 1);
        assert_eq!(enumerate_channels(&s), vec![ChannelState::new(0, 0, 0, 0, 0)]);
        let all = enumerate_channels(&sector(2, Exchange::None, 1));
        assert_eq!(all.len(), 4);
        for c in [(1, 0, 0, 0), (0, 0, 1, 0), (0, 1, 0, 1), (0, 0, 0, 0)] {
            assert!(all.contains(&ChannelState::new(c.0, c.1, c.2, c.3, 0)));
        }
        // even l_x drops the (0,1,0,1) channel
        let even = enumerate_channels(&sector(2, Exchange::TwoIdentical(1), 1));
        assert_eq!(even.len(), 3);
        assert!(even.iter().all(|c| c.lx % 2 == 0));
        assert!(enumerate_channels(&sector(2, Exchange::None, -1)).is_empty());
    }

    #[test]
    fn p23_is_an_involution() {
        for q in 0..=10 {
            for l in 0..=q {
                let b = QLBlock::new(q, l);
                if b.is_empty() {
                    continue;
                }
                let p = p23_matrix(&b);
                let id = DMatrix::identity(b.len(), b.len());
                assert!((&p * &p - id).abs().max() < 1e-10, "Q={q} L={l}");
                assert!((&p - p.transpose()).abs().max() < 1e-10);
            }
        }
        assert!((p23_matrix(&QLBlock::new(0, 0))[(0, 0)] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn table_basis_sizes() {
        let s = symmetrize(&sector(24, Exchange::ThreeIdentical(1), 1)).unwrap();
        let sizes: Vec<usize> = (6..=24).step_by(2).map(|q| s.truncated(q).len()).collect();
        assert_eq!(sizes, vec![7, 11, 16, 23, 31, 41, 53, 67, 83, 102]);
        let t = &s.transform;
        assert!((t.transpose() * t - DMatrix::identity(t.ncols(), t.ncols())).abs().max() < 1e-10);
    }

    #[test]
    fn ground_state_only_at_zero_quanta() {
        let s = symmetrize(&sector(0, Exchange::ThreeIdentical(1), 1)).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s.transform[(0, 0)] - 1.0).abs() < 1e-15);
    }
}
