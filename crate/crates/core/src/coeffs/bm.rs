//! Brody-Moshinsky brackets at arbitrary angle.
//!
//! The rotation (x, y) → (cos β x + sin β y, −sin β x + cos β y) is
//! generated by D = y·∇_x − x·∇_y = b†·a − a†·b, which conserves the number
//! of quanta and the total L. On each (Q, L) block the bracket matrix is
//! therefore exp(β A) with A the (antisymmetric) matrix of D. A is built
//! from spherical ladder operators and cached per block; only the
//! exponential depends on the angle.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::basis::ChannelState;
use crate::specfn::clebsch_gordan;

/// All channel states with a fixed number of quanta and total L.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QLBlock {
    pub q: u32,
    pub l: u32,
    pub states: Vec<ChannelState>,
}

impl QLBlock {
    /// States ordered lexicographically on (l_x, l_y, n_x).
    pub fn new(q: u32, l: u32) -> Self {
        let mut states = Vec::new();
        for lx in 0..=q {
            for ly in 0..=(q - lx) {
                if (q - lx - ly) % 2 == 1 || l > lx + ly || l < lx.abs_diff(ly) {
                    continue;
                }
                let pairs = (q - lx - ly) / 2;
                for nx in 0..=pairs {
                    states.push(ChannelState::new(nx, lx, pairs - nx, ly, l));
                }
            }
        }
        Self { q, l, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn index_of(&self, s: &ChannelState) -> Option<usize> {
        self.states.iter().position(|t| t == s)
    }
}

/// (amplitude, n', l', m') of a ladder operator acting on |n l m⟩.
type Ladder = Vec<(f64, u32, u32, i32)>;

fn reduced_up(l: u32) -> f64 {
    ((l + 1) as f64 / (2 * l + 3) as f64).sqrt()
}

fn reduced_down(l: u32) -> f64 {
    (l as f64 / (2 * l - 1) as f64).sqrt()
}

/// Spherical component μ of a† on |n l m⟩.
pub(crate) fn raise(n: u32, l: u32, m: i32, mu: i32) -> Ladder {
    let mut out = Vec::with_capacity(2);
    let mp = m + mu;
    let c = clebsch_gordan(l, m, 1, mu, l + 1, mp);
    if c != 0.0 {
        out.push((reduced_up(l) * ((2 * n + 2 * l + 3) as f64).sqrt() * c, n, l + 1, mp));
    }
    if l >= 1 {
        let c = clebsch_gordan(l, m, 1, mu, l - 1, mp);
        if c != 0.0 {
            out.push((reduced_down(l) * ((2 * n + 2) as f64).sqrt() * c, n + 1, l - 1, mp));
        }
    }
    out
}

/// Spherical component μ of a on |n l m⟩.
pub(crate) fn lower(n: u32, l: u32, m: i32, mu: i32) -> Ladder {
    let mut out = Vec::with_capacity(2);
    let mp = m + mu;
    if n >= 1 {
        let c = clebsch_gordan(l, m, 1, mu, l + 1, mp);
        if c != 0.0 {
            out.push((-reduced_up(l) * ((2 * n) as f64).sqrt() * c, n - 1, l + 1, mp));
        }
    }
    if l >= 1 {
        let c = clebsch_gordan(l, m, 1, mu, l - 1, mp);
        if c != 0.0 {
            out.push((-reduced_down(l) * ((2 * n + 2 * l + 1) as f64).sqrt() * c, n, l - 1, mp));
        }
    }
    out
}

fn sign(k: i32) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Matrix of the rotation generator on one block, A[row, col] = ⟨row|D|col⟩.
pub fn generator(block: &QLBlock) -> DMatrix<f64> {
    let dim = block.len();
    let big_l = block.l;
    let mut a = DMatrix::zeros(dim, dim);
    let index: HashMap<(u32, u32, u32, u32), usize> = block
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| ((s.nx, s.lx, s.ny, s.ly), i))
        .collect();
    for (col, s) in block.states.iter().enumerate() {
        let lx = s.lx as i32;
        for mx in -lx..=lx {
            let my = -mx;
            if my.unsigned_abs() > s.ly {
                continue;
            }
            let w = clebsch_gordan(s.lx, mx, s.ly, my, big_l, 0);
            if w == 0.0 {
                continue;
            }
            for mu in -1..=1i32 {
                let ph = sign(mu);
                // + b†_μ a_{−μ}
                for (ax, nx2, lx2, mx2) in lower(s.nx, s.lx, mx, -mu) {
                    for (ay, ny2, ly2, my2) in raise(s.ny, s.ly, my, mu) {
                        if let Some(&row) = index.get(&(nx2, lx2, ny2, ly2)) {
                            let proj = clebsch_gordan(lx2, mx2, ly2, my2, big_l, 0);
                            a[(row, col)] += ph * w * ax * ay * proj;
                        }
                    }
                }
                // − a†_μ b_{−μ}
                for (ax, nx2, lx2, mx2) in raise(s.nx, s.lx, mx, mu) {
                    for (ay, ny2, ly2, my2) in lower(s.ny, s.ly, my, -mu) {
                        if let Some(&row) = index.get(&(nx2, lx2, ny2, ly2)) {
                            let proj = clebsch_gordan(lx2, mx2, ly2, my2, big_l, 0);
                            a[(row, col)] -= ph * w * ax * ay * proj;
                        }
                    }
                }
            }
        }
    }
    // exact antisymmetry; the two halves agree to rounding
    let at = a.transpose();
    (a - at) * 0.5
}

type GenKey = (u32, u32);

fn generator_cache() -> &'static RwLock<HashMap<GenKey, Arc<(QLBlock, DMatrix<f64>)>>> {
    static CACHE: OnceLock<RwLock<HashMap<GenKey, Arc<(QLBlock, DMatrix<f64>)>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Block and generator for (Q, L), cached for the lifetime of the process.
pub fn cached_generator(q: u32, l: u32) -> Arc<(QLBlock, DMatrix<f64>)> {
    if let Some(v) = generator_cache().read().expect("generator cache poisoned").get(&(q, l)) {
        return v.clone();
    }
    let block = QLBlock::new(q, l);
    let a = generator(&block);
    let v = Arc::new((block, a));
    generator_cache()
        .write()
        .expect("generator cache poisoned")
        .insert((q, l), v.clone());
    v
}

/// exp(A) by scaling and squaring with a Taylor core.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.iter().map(|x| x.abs()).fold(0.0, f64::max) * n as f64;
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * scale;
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=30 {
        term = &term * &x / k as f64;
        result += &term;
        if term.iter().all(|t| t.abs() < 1e-18) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// ⟨row|col⟩_β for one block: column `col` holds the expansion of the
/// rotated state Φ_col(R_β(x, y)) over unrotated states.
pub fn brody_moshinsky(block: &QLBlock, beta: f64) -> DMatrix<f64> {
    let cached = cached_generator(block.q, block.l);
    if block == &cached.0 {
        expm(&(&cached.1 * beta))
    } else {
        expm(&(generator(block) * beta))
    }
}

/// Bracket matrices for every (Q, L) block up to a quanta cutoff.
#[derive(Clone, Debug)]
pub struct BMTable {
    pub beta: f64,
    pub qmax: u32,
    blocks: HashMap<(u32, u32), Arc<(QLBlock, DMatrix<f64>)>>,
}

impl BMTable {
    /// Blocks for all Q ≤ qmax and the listed L values.
    pub fn build(beta: f64, qmax: u32, ls: &[u32]) -> Self {
        let keys: Vec<(u32, u32)> = (0..=qmax)
            .flat_map(|q| ls.iter().map(move |&l| (q, l)))
            .collect();
        let blocks = keys
            .par_iter()
            .map(|&(q, l)| {
                let g = cached_generator(q, l);
                let m = expm(&(&g.1 * beta));
                ((q, l), Arc::new((g.0.clone(), m)))
            })
            .collect();
        Self { beta, qmax, blocks }
    }

    pub fn block(&self, q: u32, l: u32) -> Option<&(QLBlock, DMatrix<f64>)> {
        self.blocks.get(&(q, l)).map(|b| b.as_ref())
    }

    /// Single bracket ⟨row|col⟩_β; zero across blocks.
    pub fn bracket(&self, row: &ChannelState, col: &ChannelState) -> Option<f64> {
        if row.q() != col.q() || row.l != col.l {
            return Some(0.0);
        }
        let (block, m) = self.block(col.q(), col.l)?;
        Some(m[(block.index_of(row)?, block.index_of(col)?)])
    }
}
