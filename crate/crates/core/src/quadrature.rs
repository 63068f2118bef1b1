//! Gauss-Legendre rules and adaptive Gauss-Kronrod integration.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{ObeError, Result};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Converges when the error estimate drops below
/// `max(rel_tol * |value|, abs_tol)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<f64> {
    const MAX_SEGMENTS: usize = 4000;
    let (v0, e0) = gk15(&f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value: v0, err: e0 });
    let mut value = v0;
    let mut err = e0;
    while err > (rel_tol * value.abs()).max(abs_tol) {
        if heap.len() >= MAX_SEGMENTS {
            return Err(ObeError::Quadrature(format!(
                "adaptive rule on [{a}, {b}] stalled at estimated error {err:e} (value {value:e})"
            )));
        }
        let seg = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (seg.a + seg.b);
        let (vl, el) = gk15(&f, seg.a, mid);
        let (vr, er) = gk15(&f, mid, seg.b);
        value += vl + vr - seg.value;
        err += el + er - seg.err;
        heap.push(Segment { a: seg.a, b: mid, value: vl, err: el });
        heap.push(Segment { a: mid, b: seg.b, value: vr, err: er });
        if err < 0.0 {
            // accumulated rounding; resum from scratch
            err = heap.iter().map(|s| s.err).sum();
        }
    }
    // final resummation keeps the result independent of update order
    let mut segs: Vec<&Segment> = heap.iter().collect();
    segs.sort_by(|x, y| x.a.total_cmp(&y.a));
    Ok(segs.iter().map(|s| s.value).sum())
}

/// Integrate over `[0, ∞)` a function that decays at least like a Gaussian
/// beyond `cutoff`. The range is split at `peak` to help the adaptive rule.
pub fn integrate_half_line<F: Fn(f64) -> f64>(
    f: F,
    peak: f64,
    cutoff: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<f64> {
    let peak = peak.clamp(0.0, cutoff);
    let left = if peak > 0.0 {
        integrate(&f, 0.0, peak, rel_tol, abs_tol * 0.5)?
    } else {
        0.0
    };
    let right = integrate(&f, peak, cutoff, rel_tol, abs_tol * 0.5)?;
    Ok(left + right)
}
