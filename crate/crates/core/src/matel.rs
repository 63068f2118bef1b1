//! Hamiltonian matrix elements between channel states.
//!
//! Conventions: x and y are the Jacobi coordinates divided by the scales a
//! and b, so every channel is a product of unit-length oscillator
//! functions. Pair potentials that depend on a rotated coordinate are
//! reduced to one-dimensional radial elements by expanding both states in
//! the rotated frame with Brody-Moshinsky brackets; the spectator
//! coordinate then drops out by orthonormality.
//!
//! For the brackets, M_β[ν, n] is the coefficient of Φ_ν(x, y) in
//! Φ_n(R_β(x, y)), R_β(x, y) = (cos β x + sin β y, −sin β x + cos β y).

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, OnceLock, RwLock};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::ChannelState;
use crate::coeffs::bm::BMTable;
use crate::coeffs::hyper::HyperTable;
use crate::error::{ObeError, Result};
use crate::quadrature::gauss_legendre;
use crate::talmi::{hyperradial_me, radial_function, radial_me, RadialKernel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kinematics {
    Nonrelativistic,
    Semirelativistic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    P12,
    P13,
    P23,
}

/// Masses, kinematics and interactions of a three-body system.
#[derive(Clone, Debug)]
pub struct SystemConfig {
    pub masses: [f64; 3],
    pub kinematics: Kinematics,
    pub v12: Vec<RadialKernel>,
    pub v13: Vec<RadialKernel>,
    pub v23: Vec<RadialKernel>,
    /// Kernels of W(√(r12² + r13² + r23²)); empty when absent.
    pub three_body: Vec<RadialKernel>,
}

impl SystemConfig {
    pub fn m12(&self) -> f64 {
        self.masses[0] + self.masses[1]
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn pair(&self, p: Pair) -> &[RadialKernel] {
        match p {
            Pair::P12 => &self.v12,
            Pair::P13 => &self.v13,
            Pair::P23 => &self.v23,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(ObeError::config(format!("masses must be positive, got {:?}", self.masses)));
        }
        if !self.three_body.is_empty() && self.masses[0] != self.masses[1] {
            return Err(ObeError::config(format!(
                "a three-body force needs m1 = m2 (got {} and {})",
                self.masses[0], self.masses[1]
            )));
        }
        for k in self.v12.iter().chain(&self.v13).chain(&self.v23).chain(&self.three_body) {
            k.validate()?;
        }
        Ok(())
    }
}

/// Oscillator scales of the two Jacobi coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleParams {
    pub a: f64,
    pub b: f64,
    pub locked: bool,
}

impl ScaleParams {
    /// b = √3 a / 2, required for P23 projection and the hyperradial route.
    pub fn locked(a: f64) -> Self {
        Self {
            a,
            b: 3f64.sqrt() * a / 2.0,
            locked: true,
        }
    }

    pub fn free(a: f64, b: f64) -> Self {
        Self { a, b, locked: false }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.a > 0.0 && self.b > 0.0 && self.a.is_finite() && self.b.is_finite()) {
            return Err(ObeError::config(format!("scales must be positive, got a={} b={}", self.a, self.b)));
        }
        Ok(())
    }
}

/// Rotation angles and radial scales for the 1–3 and 2–3 pairs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationChannel {
    pub beta1: f64,
    pub gamma1: f64,
    pub eta1: f64,
    pub beta2: f64,
    pub gamma2: f64,
    pub eta2: f64,
}

impl RotationChannel {
    pub fn new(cfg: &SystemConfig, s: &ScaleParams) -> Self {
        let m12 = cfg.m12();
        let [m1, m2, _] = cfg.masses;
        let gamma1 = (s.b * s.b * m12 * m12 + s.a * s.a * m1 * m1).sqrt();
        let gamma2 = (s.b * s.b * m12 * m12 + s.a * s.a * m2 * m2).sqrt();
        Self {
            beta1: (s.a * m1).atan2(s.b * m12),
            gamma1,
            eta1: s.a * s.b * m12 / gamma1,
            beta2: (s.a * m2).atan2(s.b * m12),
            gamma2,
            eta2: s.a * s.b * m12 / gamma2,
        }
    }
}

/// Bracket tables at the two pair angles for one total L.
#[derive(Clone, Debug)]
pub struct Rotations {
    pub channel: RotationChannel,
    pub bm1: BMTable,
    pub bm2: BMTable,
}

impl Rotations {
    pub fn new(cfg: &SystemConfig, s: &ScaleParams, qmax: u32, l: u32) -> Self {
        let channel = RotationChannel::new(cfg, s);
        let bm1 = BMTable::build(channel.beta1, qmax, &[l]);
        let bm2 = if channel.beta2 == channel.beta1 {
            bm1.clone()
        } else {
            BMTable::build(channel.beta2, qmax, &[l])
        };
        Self { channel, bm1, bm2 }
    }
}

fn sign(k: i64) -> f64 {
    if k.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn kernel_sum_me(n1: u32, n2: u32, l: u32, kernels: &[RadialKernel], scale: f64) -> Result<f64> {
    let mut s = 0.0;
    for k in kernels {
        s += radial_me(n1 as usize, l, n2 as usize, l, k, scale)?;
    }
    Ok(s)
}

// ---------------------------------------------------------------------------
// Element-level operations

fn tridiagonal(n1: u32, n2: u32, l: u32) -> f64 {
    let h = l as f64 + 0.5;
    if n1 == n2 {
        (2 * n1) as f64 + l as f64 + 1.5
    } else if n1 + 1 == n2 {
        (n2 as f64 * (n2 as f64 + h)).sqrt()
    } else if n2 + 1 == n1 {
        (n1 as f64 * (n1 as f64 + h)).sqrt()
    } else {
        0.0
    }
}

/// p²/2μ_p + q²/2μ_q between channel states.
pub fn kinetic_nr(bra: &ChannelState, ket: &ChannelState, cfg: &SystemConfig, s: &ScaleParams) -> f64 {
    if bra.l != ket.l || bra.lx != ket.lx || bra.ly != ket.ly {
        return 0.0;
    }
    let [m1, m2, m3] = cfg.masses;
    let m12 = cfg.m12();
    let mut v = 0.0;
    if bra.ny == ket.ny {
        v += m12 / (2.0 * m1 * m2) * tridiagonal(bra.nx, ket.nx, ket.lx) / (s.a * s.a);
    }
    if bra.nx == ket.nx {
        v += cfg.total_mass() / (2.0 * m12 * m3) * tridiagonal(bra.ny, ket.ny, ket.ly) / (s.b * s.b);
    }
    v
}

/// Σ over rotated states of the two bracket columns, with the inner
/// operator acting on one rotated coordinate only.
fn rotated_element(
    bra: &ChannelState,
    ket: &ChannelState,
    bm: &BMTable,
    swap: bool,
    inner: &dyn Fn(&ChannelState, &ChannelState) -> Result<f64>,
) -> Result<f64> {
    let (b, k) = if swap { (bra.swapped(), ket.swapped()) } else { (*bra, *ket) };
    let missing = || ObeError::MissingCoefficients(format!("brackets for {bra:?} / {ket:?}"));
    let (bb, mb) = bm.block(b.q(), b.l).ok_or_else(missing)?;
    let (kb, mk) = bm.block(k.q(), k.l).ok_or_else(missing)?;
    let ib = bb.index_of(&b).ok_or_else(missing)?;
    let ik = kb.index_of(&k).ok_or_else(missing)?;
    let mut acc = 0.0;
    for (r, nu_b) in bb.states.iter().enumerate() {
        let cb = mb[(r, ib)];
        if cb == 0.0 {
            continue;
        }
        for (c, nu_k) in kb.states.iter().enumerate() {
            let ck = mk[(c, ik)];
            if ck == 0.0 {
                continue;
            }
            let v = inner(nu_b, nu_k)?;
            acc += cb * ck * v;
        }
    }
    Ok(acc)
}

/// Radial element on ỹ with x̃ as spectator.
fn inner_y(kernels: &[RadialKernel], scale: f64) -> impl Fn(&ChannelState, &ChannelState) -> Result<f64> + '_ {
    move |p, q| {
        if p.nx != q.nx || p.lx != q.lx || p.ly != q.ly {
            return Ok(0.0);
        }
        kernel_sum_me(p.ny, q.ny, q.ly, kernels, scale)
    }
}

/// Radial element on x̃ with ỹ as spectator.
fn inner_x(kernels: &[RadialKernel], scale: f64) -> impl Fn(&ChannelState, &ChannelState) -> Result<f64> + '_ {
    move |p, q| {
        if p.ny != q.ny || p.ly != q.ly || p.lx != q.lx {
            return Ok(0.0);
        }
        kernel_sum_me(p.nx, q.nx, q.lx, kernels, scale)
    }
}

/// Pair potential between channel states; `kernels` are summed.
pub fn two_body_me(
    pair: Pair,
    bra: &ChannelState,
    ket: &ChannelState,
    kernels: &[RadialKernel],
    cfg: &SystemConfig,
    s: &ScaleParams,
    rot: &Rotations,
) -> Result<f64> {
    if bra.l != ket.l {
        return Ok(0.0);
    }
    let m12 = cfg.m12();
    let phase = sign((bra.lx + ket.lx) as i64);
    match pair {
        Pair::P12 => {
            if bra.ny != ket.ny || bra.ly != ket.ly || bra.lx != ket.lx {
                return Ok(0.0);
            }
            kernel_sum_me(bra.nx, ket.nx, ket.lx, kernels, s.a)
        }
        Pair::P23 => {
            let inner = inner_y(kernels, rot.channel.gamma1 / m12);
            Ok(phase * rotated_element(bra, ket, &rot.bm1, false, &inner)?)
        }
        Pair::P13 => {
            let inner = inner_x(kernels, rot.channel.gamma2 / m12);
            Ok(phase * rotated_element(bra, ket, &rot.bm2, true, &inner)?)
        }
    }
}

/// Phase i^{Q'} (−i)^{Q} from the Fourier transform of both states.
fn fourier_phase(bra: &ChannelState, ket: &ChannelState) -> f64 {
    let d = bra.q() as i64 - ket.q() as i64;
    assert!(d % 2 == 0, "Fourier phase between states of opposite parity is not real");
    sign(d / 2)
}

/// One of the three √(p_i² + m_i²) terms (index 0, 1, 2 for particle 1, 2, 3).
pub fn kinetic_sr_term(
    term: usize,
    bra: &ChannelState,
    ket: &ChannelState,
    cfg: &SystemConfig,
    s: &ScaleParams,
    rot: &Rotations,
) -> Result<f64> {
    if bra.l != ket.l || (bra.q() + ket.q()) % 2 == 1 {
        return Ok(0.0);
    }
    let [m1, m2, m3] = cfg.masses;
    let ph = fourier_phase(bra, ket);
    let v = match term {
        0 => {
            let k = [RadialKernel::SqrtShifted { alpha: m1 * m1 }];
            let inner = inner_x(&k, 1.0 / rot.channel.eta1);
            sign((bra.ly + ket.ly) as i64) * rotated_element(bra, ket, &rot.bm1, false, &inner)?
        }
        1 => {
            let k = [RadialKernel::SqrtShifted { alpha: m2 * m2 }];
            let inner = inner_x(&k, 1.0 / rot.channel.eta2);
            rotated_element(bra, ket, &rot.bm2, false, &inner)?
        }
        2 => {
            if bra.nx != ket.nx || bra.lx != ket.lx || bra.ly != ket.ly {
                return Ok(0.0);
            }
            kernel_sum_me(bra.ny, ket.ny, ket.ly, &[RadialKernel::SqrtShifted { alpha: m3 * m3 }], 1.0 / s.b)?
        }
        _ => return Err(ObeError::domain(format!("kinetic term index {term} out of range"))),
    };
    Ok(ph * v)
}

/// Σ_i √(p_i² + m_i²) in the rest frame.
pub fn kinetic_sr(bra: &ChannelState, ket: &ChannelState, cfg: &SystemConfig, s: &ScaleParams, rot: &Rotations) -> Result<f64> {
    let mut v = 0.0;
    for t in 0..3 {
        v += kinetic_sr_term(t, bra, ket, cfg, s, rot)?;
    }
    Ok(v)
}

/// Argument scale of W in hyperradial form, √(3/2)·a.
pub fn hyper_scale(s: &ScaleParams) -> f64 {
    1.5f64.sqrt() * s.a
}

fn require_hyper(cfg: &SystemConfig, s: &ScaleParams) -> Result<()> {
    if !s.locked {
        return Err(ObeError::config("the hyperradial three-body route needs locked scales (b = √3 a/2)"));
    }
    if cfg.masses[0] != cfg.masses[1] {
        return Err(ObeError::config("the hyperradial three-body route needs m1 = m2"));
    }
    Ok(())
}

fn hyper_row<'a>(hyper: &'a HyperTable, c: &ChannelState) -> Result<&'a [(u32, u32, f64)]> {
    hyper
        .get(&(c.nx, c.lx, c.ny, c.ly))
        .ok_or_else(|| ObeError::MissingCoefficients(format!("hyperspherical coefficients of channel {c:?}")))
}

/// W through the hyperspherical expansion of both states.
pub fn three_body_me_hyper(
    bra: &ChannelState,
    ket: &ChannelState,
    kernels: &[RadialKernel],
    cfg: &SystemConfig,
    s: &ScaleParams,
    hyper: &HyperTable,
) -> Result<f64> {
    require_hyper(cfg, s)?;
    if bra.l != ket.l || bra.lx != ket.lx || bra.ly != ket.ly {
        return Ok(0.0);
    }
    let rb = hyper_row(hyper, bra)?;
    let rk = hyper_row(hyper, ket)?;
    let c = hyper_scale(s);
    let mut acc = 0.0;
    for &(n1, k1, c1) in rb {
        for &(n2, k2, c2) in rk {
            if k1 != k2 {
                continue;
            }
            let mut h = 0.0;
            for k in kernels {
                h += hyperradial_me(n1 as usize, n2 as usize, k1, k, c)?;
            }
            acc += c1 * c2 * h;
        }
    }
    Ok(acc)
}

fn legendre_cached(n: usize) -> Arc<(Vec<f64>, Vec<f64>)> {
    static CACHE: OnceLock<RwLock<HashMap<usize, Arc<(Vec<f64>, Vec<f64>)>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = cache.read().expect("rule cache poisoned").get(&n) {
        return v.clone();
    }
    let v = Arc::new(gauss_legendre(n));
    cache.write().expect("rule cache poisoned").insert(n, v.clone());
    v
}

/// Nodes and weights on [0, ∞) via r = tan(πu/2).
fn mapped_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let rule = legendre_cached(n);
    let h = std::f64::consts::FRAC_PI_2;
    rule.0
        .iter()
        .zip(&rule.1)
        .map(|(&t, &w)| {
            let u = 0.5 * (t + 1.0);
            let c = (h * u).cos();
            ((h * u).tan(), 0.5 * w * h / (c * c))
        })
        .unzip()
}

const NAIVE_START: usize = 96;
const NAIVE_MAX: usize = 1536;
const NAIVE_TOL: f64 = 1e-9;

/// W by a two-dimensional tensor-product rule in (x, y); works for unlocked
/// scales. The node count doubles until two successive values agree to
/// 1e-9 relative to the integral of the absolute integrand.
pub fn three_body_me_naive(bra: &ChannelState, ket: &ChannelState, kernels: &[RadialKernel], s: &ScaleParams) -> Result<f64> {
    if bra.l != ket.l || bra.lx != ket.lx || bra.ly != ket.ly {
        return Ok(0.0);
    }
    let eval = |n: usize| {
        let (r, w) = mapped_rule(n);
        let fx: Vec<f64> = r
            .iter()
            .zip(&w)
            .map(|(&x, &wx)| {
                wx * x * x
                    * radial_function(bra.nx as usize, bra.lx as f64, x)
                    * radial_function(ket.nx as usize, ket.lx as f64, x)
            })
            .collect();
        let fy: Vec<f64> = r
            .iter()
            .zip(&w)
            .map(|(&y, &wy)| {
                wy * y * y
                    * radial_function(bra.ny as usize, bra.ly as f64, y)
                    * radial_function(ket.ny as usize, ket.ly as f64, y)
            })
            .collect();
        let (mut sum, mut abs) = (0.0, 0.0);
        for (i, &x) in r.iter().enumerate() {
            if fx[i] == 0.0 {
                continue;
            }
            for (j, &y) in r.iter().enumerate() {
                if fy[j] == 0.0 {
                    continue;
                }
                let arg = (1.5 * s.a * s.a * x * x + 2.0 * s.b * s.b * y * y).sqrt();
                let wv: f64 = kernels.iter().map(|k| k.eval(arg)).sum();
                let t = fx[i] * fy[j] * wv;
                sum += t;
                abs += t.abs();
            }
        }
        (sum, abs)
    };
    let mut n = NAIVE_START;
    let (mut prev, _) = eval(n);
    while n < NAIVE_MAX {
        n *= 2;
        let (v, abs) = eval(n);
        if (v - prev).abs() <= NAIVE_TOL * abs.max(f64::MIN_POSITIVE) {
            return Ok(v);
        }
        prev = v;
    }
    Err(ObeError::Quadrature(format!(
        "naive three-body element {bra:?} / {ket:?} not stable at {NAIVE_MAX} nodes"
    )))
}

/// ⟨r12⟩ element, i.e. the pair-12 element of a·x.
pub fn observable_r12(bra: &ChannelState, ket: &ChannelState, s: &ScaleParams) -> Result<f64> {
    if bra.l != ket.l || bra.ny != ket.ny || bra.ly != ket.ly || bra.lx != ket.lx {
        return Ok(0.0);
    }
    radial_me(bra.nx as usize, bra.lx, ket.nx as usize, ket.lx, &RadialKernel::Power { alpha: 1.0, beta: 1.0 }, s.a)
}

// ---------------------------------------------------------------------------
// Matrix forms over a channel list

/// Radial elements ⟨n1 l|O(scale·r)|n2 l⟩ for all 2n + l ≤ qmax.
pub struct RadialTable {
    values: Vec<Vec<Vec<f64>>>,
}

impl RadialTable {
    pub fn build(kernels: &[RadialKernel], scale: f64, qmax: u32) -> Result<Self> {
        let jobs: Vec<(u32, u32, u32)> = (0..=qmax)
            .flat_map(|l| {
                let nmax = (qmax - l) / 2;
                (0..=nmax).flat_map(move |n1| (n1..=nmax).map(move |n2| (l, n1, n2)))
            })
            .collect();
        let vals: Vec<f64> = jobs
            .par_iter()
            .map(|&(l, n1, n2)| kernel_sum_me(n1, n2, l, kernels, scale))
            .collect::<Result<_>>()?;
        let mut values: Vec<Vec<Vec<f64>>> = (0..=qmax)
            .map(|l| {
                let n = ((qmax - l) / 2 + 1) as usize;
                vec![vec![0.0; n]; n]
            })
            .collect();
        for (&(l, n1, n2), v) in jobs.iter().zip(vals) {
            values[l as usize][n1 as usize][n2 as usize] = v;
            values[l as usize][n2 as usize][n1 as usize] = v;
        }
        Ok(Self { values })
    }

    pub fn get(&self, n1: u32, n2: u32, l: u32) -> f64 {
        self.values[l as usize][n1 as usize][n2 as usize]
    }
}

fn by_q(channels: &[ChannelState]) -> BTreeMap<u32, Vec<usize>> {
    let mut m: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, c) in channels.iter().enumerate() {
        m.entry(c.q()).or_default().push(i);
    }
    m
}

fn common_l(channels: &[ChannelState]) -> Result<u32> {
    let l = channels.first().map_or(0, |c| c.l);
    if channels.iter().any(|c| c.l != l) {
        return Err(ObeError::domain("channel list mixes total L values"));
    }
    Ok(l)
}

/// Which rotated coordinate carries the operator.
#[derive(Clone, Copy)]
enum Active {
    X,
    Y,
}

/// C_{Q'}ᵀ Y C_Q for every pair of quanta, where the columns of C_Q are
/// phase-weighted bracket columns and Y maps each rotated state to a unique
/// partner differing only in the active radial quantum number.
fn rotated_matrix(
    channels: &[ChannelState],
    bm: &BMTable,
    swap: bool,
    phase: &(dyn Fn(&ChannelState) -> f64 + Sync),
    active: Active,
    radial: &RadialTable,
) -> Result<DMatrix<f64>> {
    let l = common_l(channels)?;
    let groups = by_q(channels);
    let mut cols: BTreeMap<u32, DMatrix<f64>> = BTreeMap::new();
    for (&q, idx) in &groups {
        let (block, m) = bm
            .block(q, l)
            .ok_or_else(|| ObeError::MissingCoefficients(format!("bracket block Q={q} L={l}")))?;
        let mut c = DMatrix::zeros(block.len(), idx.len());
        for (j, &i) in idx.iter().enumerate() {
            let ch = channels[i];
            let key = if swap { ch.swapped() } else { ch };
            let col = block
                .index_of(&key)
                .ok_or_else(|| ObeError::MissingCoefficients(format!("channel {ch:?} in bracket block")))?;
            let ph = phase(&ch);
            for r in 0..block.len() {
                c[(r, j)] = ph * m[(r, col)];
            }
        }
        cols.insert(q, c);
    }
    let pairs: Vec<(u32, u32)> = groups
        .keys()
        .flat_map(|&a| groups.keys().filter(move |&&b| b <= a).map(move |&b| (a, b)))
        .filter(|(a, b)| (a - b) % 2 == 0)
        .collect();
    let blocks: Vec<((u32, u32), DMatrix<f64>)> = pairs
        .par_iter()
        .map(|&(qb, qk)| {
            let (bblock, _) = bm.block(qb, l).expect("checked above");
            let (kblock, _) = bm.block(qk, l).expect("checked above");
            let shift = (qb - qk) / 2;
            // Y·C_Q, row ν' of block Q'
            let ck = &cols[&qk];
            let mut yc = DMatrix::zeros(bblock.len(), ck.ncols());
            for (r, nu) in kblock.states.iter().enumerate() {
                let (partner, rv) = match active {
                    Active::Y => (
                        ChannelState::new(nu.nx, nu.lx, nu.ny + shift, nu.ly, nu.l),
                        radial.get(nu.ny + shift, nu.ny, nu.ly),
                    ),
                    Active::X => (
                        ChannelState::new(nu.nx + shift, nu.lx, nu.ny, nu.ly, nu.l),
                        radial.get(nu.nx + shift, nu.nx, nu.lx),
                    ),
                };
                if rv == 0.0 {
                    continue;
                }
                let Some(row) = bblock.index_of(&partner) else { continue };
                for j in 0..ck.ncols() {
                    yc[(row, j)] += rv * ck[(r, j)];
                }
            }
            ((qb, qk), cols[&qb].transpose() * yc)
        })
        .collect();
    let mut out = DMatrix::zeros(channels.len(), channels.len());
    for ((qb, qk), blk) in blocks {
        let (rb, rk) = (&groups[&qb], &groups[&qk]);
        for (i, &gi) in rb.iter().enumerate() {
            for (j, &gj) in rk.iter().enumerate() {
                out[(gi, gj)] = blk[(i, j)];
                out[(gj, gi)] = blk[(i, j)];
            }
        }
    }
    Ok(out)
}

fn qmax_of(channels: &[ChannelState]) -> u32 {
    channels.iter().map(ChannelState::q).max().unwrap_or(0)
}

pub fn kinetic_nr_matrix(channels: &[ChannelState], cfg: &SystemConfig, s: &ScaleParams) -> DMatrix<f64> {
    let n = channels.len();
    DMatrix::from_fn(n, n, |i, j| kinetic_nr(&channels[i], &channels[j], cfg, s))
}

/// Matrix of a pair-12 radial operator (spectator y).
fn pair12_matrix(channels: &[ChannelState], radial: &RadialTable) -> DMatrix<f64> {
    let n = channels.len();
    DMatrix::from_fn(n, n, |i, j| {
        let (p, q) = (&channels[i], &channels[j]);
        if p.l != q.l || p.ny != q.ny || p.ly != q.ly || p.lx != q.lx {
            0.0
        } else {
            radial.get(p.nx, q.nx, q.lx)
        }
    })
}

/// Pair potential matrix on a channel list.
pub fn pair_matrix(
    pair: Pair,
    channels: &[ChannelState],
    kernels: &[RadialKernel],
    cfg: &SystemConfig,
    s: &ScaleParams,
    rot: &Rotations,
) -> Result<DMatrix<f64>> {
    let qmax = qmax_of(channels);
    let m12 = cfg.m12();
    let dx = |c: &ChannelState| sign(c.lx as i64);
    match pair {
        Pair::P12 => Ok(pair12_matrix(channels, &RadialTable::build(kernels, s.a, qmax)?)),
        Pair::P23 => {
            let radial = RadialTable::build(kernels, rot.channel.gamma1 / m12, qmax)?;
            rotated_matrix(channels, &rot.bm1, false, &dx, Active::Y, &radial)
        }
        Pair::P13 => {
            let radial = RadialTable::build(kernels, rot.channel.gamma2 / m12, qmax)?;
            rotated_matrix(channels, &rot.bm2, true, &dx, Active::X, &radial)
        }
    }
}

fn apply_fourier_phase(channels: &[ChannelState], m: &mut DMatrix<f64>) {
    for i in 0..channels.len() {
        for j in 0..channels.len() {
            if m[(i, j)] != 0.0 {
                m[(i, j)] *= fourier_phase(&channels[i], &channels[j]);
            }
        }
    }
}

/// Matrix of one semirelativistic term (0, 1, 2 for particles 1, 2, 3).
pub fn kinetic_sr_term_matrix(
    term: usize,
    channels: &[ChannelState],
    cfg: &SystemConfig,
    s: &ScaleParams,
    rot: Option<&Rotations>,
) -> Result<DMatrix<f64>> {
    let qmax = qmax_of(channels);
    let [m1, m2, m3] = cfg.masses;
    let need_rot = || rot.ok_or_else(|| ObeError::domain("rotation tables required for particle 1 and 2 kinetic terms"));
    let mut m = match term {
        0 => {
            let rot = need_rot()?;
            let radial = RadialTable::build(&[RadialKernel::SqrtShifted { alpha: m1 * m1 }], 1.0 / rot.channel.eta1, qmax)?;
            let ph = |c: &ChannelState| sign(c.ly as i64);
            rotated_matrix(channels, &rot.bm1, false, &ph, Active::X, &radial)?
        }
        1 => {
            let rot = need_rot()?;
            let radial = RadialTable::build(&[RadialKernel::SqrtShifted { alpha: m2 * m2 }], 1.0 / rot.channel.eta2, qmax)?;
            rotated_matrix(channels, &rot.bm2, false, &|_| 1.0, Active::X, &radial)?
        }
        2 => {
            let radial = RadialTable::build(&[RadialKernel::SqrtShifted { alpha: m3 * m3 }], 1.0 / s.b, qmax)?;
            let n = channels.len();
            DMatrix::from_fn(n, n, |i, j| {
                let (p, q) = (&channels[i], &channels[j]);
                if p.l != q.l || p.nx != q.nx || p.lx != q.lx || p.ly != q.ly {
                    0.0
                } else {
                    radial.get(p.ny, q.ny, q.ly)
                }
            })
        }
        _ => return Err(ObeError::domain(format!("kinetic term index {term} out of range"))),
    };
    apply_fourier_phase(channels, &mut m);
    Ok(m)
}

pub fn kinetic_sr_matrix(channels: &[ChannelState], cfg: &SystemConfig, s: &ScaleParams, rot: &Rotations) -> Result<DMatrix<f64>> {
    let mut m = kinetic_sr_term_matrix(0, channels, cfg, s, Some(rot))?;
    m += kinetic_sr_term_matrix(1, channels, cfg, s, Some(rot))?;
    m += kinetic_sr_term_matrix(2, channels, cfg, s, Some(rot))?;
    Ok(m)
}

/// Hyperradial elements ⟨N1 K|O(c ρ)|N2 K⟩ for all 2N + K ≤ qmax.
struct HyperRadialTable {
    values: Vec<Vec<Vec<f64>>>,
}

impl HyperRadialTable {
    fn build(kernels: &[RadialKernel], c: f64, qmax: u32) -> Result<Self> {
        let jobs: Vec<(u32, u32, u32)> = (0..=qmax)
            .flat_map(|k| {
                let nmax = (qmax - k) / 2;
                (0..=nmax).flat_map(move |n1| (n1..=nmax).map(move |n2| (k, n1, n2)))
            })
            .collect();
        let vals: Vec<f64> = jobs
            .par_iter()
            .map(|&(k, n1, n2)| {
                let mut s = 0.0;
                for kern in kernels {
                    s += hyperradial_me(n1 as usize, n2 as usize, k, kern, c)?;
                }
                Ok(s)
            })
            .collect::<Result<_>>()?;
        let mut values: Vec<Vec<Vec<f64>>> = (0..=qmax)
            .map(|k| {
                let n = ((qmax - k) / 2 + 1) as usize;
                vec![vec![0.0; n]; n]
            })
            .collect();
        for (&(k, n1, n2), v) in jobs.iter().zip(vals) {
            values[k as usize][n1 as usize][n2 as usize] = v;
            values[k as usize][n2 as usize][n1 as usize] = v;
        }
        Ok(Self { values })
    }
}

/// W on a channel list through the hyperspherical route.
pub fn three_body_hyper_matrix(
    channels: &[ChannelState],
    kernels: &[RadialKernel],
    cfg: &SystemConfig,
    s: &ScaleParams,
    hyper: &HyperTable,
) -> Result<DMatrix<f64>> {
    require_hyper(cfg, s)?;
    let qmax = qmax_of(channels);
    if hyper.qmax < qmax {
        return Err(ObeError::MissingCoefficients(format!(
            "hyperspherical table covers Q ≤ {} but the basis needs Q ≤ {qmax}",
            hyper.qmax
        )));
    }
    let table = HyperRadialTable::build(kernels, hyper_scale(s), qmax)?;
    let rows: Vec<&[(u32, u32, f64)]> = channels.iter().map(|c| hyper_row(hyper, c)).collect::<Result<_>>()?;
    let n = channels.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let (p, q) = (&channels[i], &channels[j]);
            if p.l != q.l || p.lx != q.lx || p.ly != q.ly {
                continue;
            }
            let mut acc = 0.0;
            for &(n1, k1, c1) in rows[i] {
                for &(n2, k2, c2) in rows[j] {
                    if k1 == k2 {
                        acc += c1 * c2 * table.values[k1 as usize][n1 as usize][n2 as usize];
                    }
                }
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    Ok(out)
}

/// W on a channel list by per-element 2-D quadrature.
pub fn three_body_naive_matrix(channels: &[ChannelState], kernels: &[RadialKernel], s: &ScaleParams) -> Result<DMatrix<f64>> {
    let n = channels.len();
    let jobs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..=i).map(move |j| (i, j)))
        .filter(|&(i, j)| {
            let (p, q) = (&channels[i], &channels[j]);
            p.l == q.l && p.lx == q.lx && p.ly == q.ly
        })
        .collect();
    let vals: Vec<f64> = jobs
        .par_iter()
        .map(|&(i, j)| three_body_me_naive(&channels[i], &channels[j], kernels, s))
        .collect::<Result<_>>()?;
    let mut out = DMatrix::zeros(n, n);
    for (&(i, j), v) in jobs.iter().zip(vals) {
        out[(i, j)] = v;
        out[(j, i)] = v;
    }
    Ok(out)
}

/// ⟨r12⟩ operator matrix.
pub fn r12_matrix(channels: &[ChannelState], s: &ScaleParams) -> Result<DMatrix<f64>> {
    let radial = RadialTable::build(&[RadialKernel::Power { alpha: 1.0, beta: 1.0 }], s.a, qmax_of(channels))?;
    Ok(pair12_matrix(channels, &radial))
}
