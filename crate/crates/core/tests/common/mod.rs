//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the library's special functions: oscillator
//! states are built in Cartesian coordinates from textbook recurrences and
//! overlaps are taken with a tensor Gauss-Hermite rule, which is exact for
//! polynomial × e^{−|r|²} integrands of low enough degree.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{Complex, DMatrix, SymmetricEigen};
use obe_core::basis::ChannelState;
use obe_core::coeffs::{brody_moshinsky, hyperspherical_coefficient, QLBlock};

pub type C64 = Complex<f64>;

/// Gauss-Hermite nodes and weights (weight e^{−t²}) by Golub-Welsch.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let j = DMatrix::from_fn(n, n, |i, k| {
        if i + 1 == k || k + 1 == i {
            ((i.max(k)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let e = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (e.eigenvalues[i], PI.sqrt() * e.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

fn factorial(n: i64) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Γ(x) for x a positive integer or half-integer.
pub fn gamma_half(x: f64) -> f64 {
    let mut g = if (x - x.round()).abs() < 1e-12 { 1.0 } else { PI.sqrt() };
    let mut t = if (x - x.round()).abs() < 1e-12 { 1.0 } else { 0.5 };
    while t < x - 1e-12 {
        g *= t;
        t += 1.0;
    }
    g
}

/// Generalized Laguerre L_n^α(x) by the three-term recurrence.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, 1.0 + alpha - x);
    if n == 0 {
        return p0;
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0 + alpha - x) * p1 - (k + alpha) * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Jacobi P_n^{(a,b)}(x) by the three-term recurrence.
pub fn jacobi(n: usize, a: f64, b: f64, x: f64) -> f64 {
    let mut p0 = 1.0;
    if n == 0 {
        return p0;
    }
    let mut p1 = 0.5 * (a - b + (a + b + 2.0) * x);
    for k in 2..=n {
        let k = k as f64;
        let c = 2.0 * k + a + b;
        let a1 = 2.0 * k * (k + a + b) * (c - 2.0);
        let a2 = (c - 1.0) * (a * a - b * b);
        let a3 = (c - 2.0) * (c - 1.0) * c;
        let a4 = 2.0 * (k + a - 1.0) * (k + b - 1.0) * c;
        let p2 = ((a2 + a3 * x) * p1 - a4 * p0) / a1;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// ⟨j1 m1 j2 m2 | J M⟩ from the Racah formula (integer spins).
pub fn cg(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    if m1 + m2 != m || j < (j1 - j2).abs() || j > j1 + j2 || m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    let pre = ((2 * j + 1) as f64 * factorial(j1 + j2 - j) * factorial(j1 - j2 + j) * factorial(-j1 + j2 + j)
        / factorial(j1 + j2 + j + 1))
    .sqrt()
        * (factorial(j + m) * factorial(j - m) * factorial(j1 - m1) * factorial(j1 + m1) * factorial(j2 - m2) * factorial(j2 + m2)).sqrt();
    let mut s = 0.0;
    for k in 0..=(j1 + j2 - j) {
        let d = [j1 + j2 - j - k, j1 - m1 - k, j2 + m2 - k, j - j2 + m1 + k, j - j1 - m2 + k];
        if d.iter().any(|&v| v < 0) {
            continue;
        }
        let den = factorial(k) * d.iter().map(|&v| factorial(v)).product::<f64>();
        s += if k % 2 == 0 { 1.0 } else { -1.0 } / den;
    }
    pre * s
}

/// Associated Legendre P_l^m(x), m ≥ 0, Condon-Shortley phase included.
fn assoc_legendre(l: i64, m: i64, x: f64) -> f64 {
    let mut pmm = 1.0;
    let s = (1.0 - x * x).max(0.0).sqrt();
    for i in 0..m {
        pmm *= -((2 * i + 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    for ll in (m + 2)..=l {
        let p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = p;
    }
    pm1
}

/// Y_lm of the direction of v (v ≠ 0).
pub fn ylm(l: i64, m: i64, v: [f64; 3]) -> C64 {
    if m < 0 {
        let y = ylm(l, -m, v).conj();
        return if m % 2 == 0 { y } else { -y };
    }
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let ct = v[2] / r;
    let phi = v[1].atan2(v[0]);
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - m) / factorial(l + m)).sqrt();
    C64::from_polar(norm * assoc_legendre(l, m, ct), m as f64 * phi)
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// R_nl(r) = √(2 n!/Γ(n+l+3/2)) r^l e^{−r²/2} L_n^{l+1/2}(r²).
pub fn radial(n: usize, l: i64, r: f64) -> f64 {
    (2.0 * factorial(n as i64) / gamma_half(n as f64 + l as f64 + 1.5)).sqrt()
        * r.powi(l as i32)
        * (-0.5 * r * r).exp()
        * laguerre(n, l as f64 + 0.5, r * r)
}

/// Coupled oscillator product Φ^L_{M=0}(x, y).
pub fn phi(nx: usize, lx: i64, ny: usize, ly: i64, l: i64, x: [f64; 3], y: [f64; 3]) -> C64 {
    let rad = radial(nx, lx, norm3(x)) * radial(ny, ly, norm3(y));
    let mut s = C64::new(0.0, 0.0);
    for m in -lx.min(ly)..=lx.min(ly) {
        let c = cg(lx, m, ly, -m, l, 0);
        if c != 0.0 {
            s += ylm(lx, m, x) * ylm(ly, -m, y) * c;
        }
    }
    s * rad
}

/// Six-dimensional hyperspherical oscillator state Ψ_{NK}^{l_x l_y L, M=0}
/// with x = ρ sin α, y = ρ cos α.
pub fn psi_hyper(big_n: usize, k: i64, lx: i64, ly: i64, l: i64, x: [f64; 3], y: [f64; 3]) -> C64 {
    let (rx, ry) = (norm3(x), norm3(y));
    let rho = (rx * rx + ry * ry).sqrt();
    let (sa, ca) = (rx / rho, ry / rho);
    let n = ((k - lx - ly) / 2) as usize;
    let nk = (2.0 * factorial(n as i64) * (k + 2) as f64 * factorial(n as i64 + lx + ly + 1)
        / (gamma_half(n as f64 + lx as f64 + 1.5) * gamma_half(n as f64 + ly as f64 + 1.5)))
    .sqrt();
    let hyperradial = (2.0 * factorial(big_n as i64) / factorial(k + big_n as i64 + 2)).sqrt()
        * (-0.5 * rho * rho).exp()
        * rho.powi(k as i32)
        * laguerre(big_n, (k + 2) as f64, rho * rho);
    let angle = nk * sa.powi(lx as i32) * ca.powi(ly as i32) * jacobi(n, lx as f64 + 0.5, ly as f64 + 0.5, ca * ca - sa * sa);
    let mut s = C64::new(0.0, 0.0);
    for m in -lx.min(ly)..=lx.min(ly) {
        let c = cg(lx, m, ly, -m, l, 0);
        if c != 0.0 {
            s += ylm(lx, m, x) * ylm(ly, -m, y) * c;
        }
    }
    s * hyperradial * angle
}

/// Tensor Gauss-Hermite rule on R⁶ for integrands f·e^{−|r|²}; the point
/// list carries weights already divided by e^{−|r|²}.
pub struct Grid6 {
    pub points: Vec<([f64; 3], [f64; 3])>,
    pub weights: Vec<f64>,
}

impl Grid6 {
    /// `n` nodes per axis, exact for polynomial degree ≤ 2n − 1 per axis.
    pub fn new(n: usize) -> Self {
        let (t, w) = gauss_hermite(n);
        let mut points = Vec::with_capacity(n.pow(6));
        let mut weights = Vec::with_capacity(n.pow(6));
        let idx = |k: usize, d: usize| (k / n.pow(d as u32)) % n;
        for k in 0..n.pow(6) {
            let c: Vec<usize> = (0..6).map(|d| idx(k, d)).collect();
            let p: Vec<f64> = c.iter().map(|&i| t[i]).collect();
            let r2: f64 = p.iter().map(|v| v * v).sum();
            weights.push(c.iter().map(|&i| w[i]).product::<f64>() * r2.exp());
            points.push(([p[0], p[1], p[2]], [p[3], p[4], p[5]]));
        }
        Self { points, weights }
    }

    /// ∫ conj(f) g over R⁶ from point values.
    pub fn overlap(&self, f: &[C64], g: &[C64]) -> C64 {
        f.iter().zip(g).zip(&self.weights).map(|((a, b), w)| a.conj() * b * *w).sum()
    }
}

/// (x, y) → (cos β x + sin β y, −sin β x + cos β y).
pub fn rotate(beta: f64, x: [f64; 3], y: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let (s, c) = beta.sin_cos();
    let xr = [c * x[0] + s * y[0], c * x[1] + s * y[1], c * x[2] + s * y[2]];
    let yr = [-s * x[0] + c * y[0], -s * x[1] + c * y[1], -s * x[2] + c * y[2]];
    (xr, yr)
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| m[(i, j)].powi(2)).sum();
        if off < 1e-30 * m.norm_squared().max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[(k, p)], m[(k, q)]);
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[(p, k)], m[(q, k)]);
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut v: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
    v.sort_by(f64::total_cmp);
    v
}

fn eval_phi(grid: &Grid6, s: &ChannelState, beta: Option<f64>) -> Vec<C64> {
    grid.points
        .iter()
        .map(|&(x, y)| {
            let (x, y) = match beta {
                Some(b) => rotate(b, x, y),
                None => (x, y),
            };
            phi(s.nx as usize, s.lx as i64, s.ny as usize, s.ly as i64, s.l as i64, x, y)
        })
        .collect()
}

/// Largest |bracket − 6-D overlap| over all blocks with Q ≤ 4.
pub fn bm_oracle_error(betas: &[f64]) -> f64 {
    let grid = Grid6::new(6);
    let mut worst: f64 = 0.0;
    for q in 0..=4 {
        for l in 0..=q {
            let block = QLBlock::new(q, l);
            if block.is_empty() {
                continue;
            }
            let plain: Vec<Vec<C64>> = block.states.iter().map(|s| eval_phi(&grid, s, None)).collect();
            for &beta in betas {
                let m = brody_moshinsky(&block, beta);
                for (c, s) in block.states.iter().enumerate() {
                    let rotated = eval_phi(&grid, s, Some(beta));
                    for r in 0..block.len() {
                        let o = grid.overlap(&plain[r], &rotated);
                        worst = worst.max((o.re - m[(r, c)]).abs()).max(o.im.abs());
                    }
                }
            }
        }
    }
    worst
}

/// Largest |coefficient − 6-D overlap| over channels with Q ≤ 4, and the
/// number of coefficients compared.
pub fn hyper_oracle_error() -> (f64, usize) {
    let grid = Grid6::new(6);
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for q in 0..=4i64 {
        for lx in 0..=q {
            for ly in 0..=(q - lx) {
                if (q - lx - ly) % 2 == 1 {
                    continue;
                }
                for nx in 0..=((q - lx - ly) / 2) {
                    let ny = (q - lx - ly) / 2 - nx;
                    // coefficients do not depend on L; check the extremes
                    for l in [(lx - ly).abs(), lx + ly] {
                        let f: Vec<C64> = grid.points.iter().map(|&(x, y)| phi(nx as usize, lx, ny as usize, ly, l, x, y)).collect();
                        for k in (lx + ly..=q).step_by(2) {
                            let big_n = (q - k) / 2;
                            let g: Vec<C64> = grid.points.iter().map(|&(x, y)| psi_hyper(big_n as usize, k, lx, ly, l, x, y)).collect();
                            let o = grid.overlap(&g, &f);
                            let c = hyperspherical_coefficient(nx as u32, lx as u32, ny as u32, ly as u32, big_n as u32, k as u32);
                            worst = worst.max((o.re - c).abs()).max(o.im.abs());
                            count += 1;
                        }
                    }
                }
            }
        }
    }
    (worst, count)
}
