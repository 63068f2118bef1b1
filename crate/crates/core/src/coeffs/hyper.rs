//! Coefficients of the Jacobi-oscillator products on hyperspherical
//! oscillator states, ⟨n_x l_x n_y l_y | N K⟩.
//!
//! The closed form is a four-fold alternating sum; it is evaluated in
//! double-double with every gamma function at half-integer argument taken
//! from the exact tables, so the √π factors cancel symbolically.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::specfn::{
    binomial_int_dd, dd, factorial_dd, half_gamma_dd, inv_factorial_dd, inv_half_gamma_dd, pochhammer_dd, to_f64, Dd,
};

/// Channel key without the total L (coefficients do not depend on it).
pub type HyperKey = (u32, u32, u32, u32);

fn alt(k: usize, x: Dd) -> Dd {
    if k % 2 == 1 {
        -x
    } else {
        x
    }
}

/// ⟨n_x l_x n_y l_y | N K⟩; zero when the quantum numbers do not match.
pub fn hyperspherical_coefficient(nx: u32, lx: u32, ny: u32, ly: u32, big_n: u32, k: u32) -> f64 {
    to_f64(hyperspherical_coefficient_dd(nx, lx, ny, ly, big_n, k))
}

pub(crate) fn hyperspherical_coefficient_dd(nx: u32, lx: u32, ny: u32, ly: u32, big_n: u32, k: u32) -> Dd {
    if 2 * big_n + k != 2 * nx + lx + 2 * ny + ly || k < lx + ly || (k - lx - ly) % 2 == 1 {
        return dd(0.0);
    }
    let (nx, lx, ny, ly, big_n, k) = (nx as usize, lx as usize, ny as usize, ly as usize, big_n as usize, k as usize);
    let n = (k - lx - ly) / 2;
    let a = (lx + ly + n + 3) as f64;

    let norm_hyper = (factorial_dd(n) * 2.0 * (k + 2) as f64 * factorial_dd(n + lx + ly + 1)
        * inv_half_gamma_dd(n + lx + 1)
        * inv_half_gamma_dd(n + ly + 1))
    .sqrt();
    let norm_jacobi = (factorial_dd(nx) * factorial_dd(ny) * factorial_dd(big_n) * 8.0
        * inv_half_gamma_dd(nx + lx + 1)
        * inv_half_gamma_dd(ny + ly + 1)
        * inv_factorial_dd(k + big_n + 2))
    .sqrt();

    // sum over the Laguerre index of the hyperradial function
    let tmax = nx + ny;
    let u: Vec<Dd> = (0..=tmax)
        .map(|t| {
            let mut s = dd(0.0);
            for j in 0..=big_n {
                let term = binomial_int_dd((big_n + k + 2) as f64, big_n - j)
                    * inv_factorial_dd(j)
                    * pochhammer_dd(dd(a + t as f64), j);
                s += alt(j, term);
            }
            s
        })
        .collect();

    // Jacobi polynomial coefficients of the hyperangular function
    let bm: Vec<Dd> = (0..=n)
        .map(|m| {
            let v = half_gamma_dd(n + ly + 1) * inv_factorial_dd(n - m) * inv_half_gamma_dd(ly + m + 1)
                * half_gamma_dd(n + lx + 1)
                * inv_factorial_dd(m)
                * inv_half_gamma_dd(n + lx - m + 1);
            alt(n - m, v)
        })
        .collect();

    let ci: Vec<Dd> = (0..=nx)
        .map(|i| {
            alt(
                i,
                inv_factorial_dd(i) * half_gamma_dd(nx + lx + 1) * inv_factorial_dd(nx - i) * inv_half_gamma_dd(lx + i + 1),
            )
        })
        .collect();
    let dj: Vec<Dd> = (0..=ny)
        .map(|j| {
            alt(
                j,
                inv_factorial_dd(j) * half_gamma_dd(ny + ly + 1) * inv_factorial_dd(ny - j) * inv_half_gamma_dd(ly + j + 1),
            )
        })
        .collect();

    let mut total = dd(0.0);
    for (i, &c) in ci.iter().enumerate() {
        for (j, &d) in dj.iter().enumerate() {
            let mut t = dd(0.0);
            for (m, &b) in bm.iter().enumerate() {
                t += b * half_gamma_dd(lx + i + n - m + 1) * half_gamma_dd(ly + j + m + 1);
            }
            total += c * d * t * u[i + j];
        }
    }
    norm_hyper * norm_jacobi * total / 4.0
}

/// All (N, K) partners of one channel, with their coefficients.
pub fn channel_coefficients(nx: u32, lx: u32, ny: u32, ly: u32) -> Vec<(u32, u32, f64)> {
    let q = 2 * nx + lx + 2 * ny + ly;
    (lx + ly..=q)
        .step_by(2)
        .map(|k| {
            let big_n = (q - k) / 2;
            (big_n, k, hyperspherical_coefficient(nx, lx, ny, ly, big_n, k))
        })
        .collect()
}

/// Hyperspherical coefficients for every channel up to a quanta cutoff.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HyperTable {
    pub qmax: u32,
    pub entries: BTreeMap<HyperKey, Vec<(u32, u32, f64)>>,
}

impl HyperTable {
    pub fn build(qmax: u32) -> Self {
        let mut keys = Vec::new();
        for q in 0..=qmax {
            for lx in 0..=q {
                for ly in 0..=(q - lx) {
                    if (q - lx - ly) % 2 == 1 {
                        continue;
                    }
                    let pairs = (q - lx - ly) / 2;
                    for nx in 0..=pairs {
                        keys.push((nx, lx, pairs - nx, ly));
                    }
                }
            }
        }
        let entries = keys
            .par_iter()
            .map(|&(nx, lx, ny, ly)| ((nx, lx, ny, ly), channel_coefficients(nx, lx, ny, ly)))
            .collect();
        Self { qmax, entries }
    }

    pub fn get(&self, key: &HyperKey) -> Option<&[(u32, u32, f64)]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    pub fn record_count(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    /// Largest |Σ c² − 1| over all channels.
    pub fn max_normalization_residual(&self) -> f64 {
        self.entries
            .values()
            .map(|v| (v.iter().map(|&(_, _, c)| c * c).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}
