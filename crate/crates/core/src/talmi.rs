//! Radial oscillator matrix elements by Talmi's expansion.
//!
//! A product r² R_{n1 l1} R_{n2 l2} is a finite combination of the
//! normalized moments r^{2p+2} e^{-r²}; matrix elements of a radial kernel
//! then reduce to a weighted sum of one-dimensional Talmi integrals I_p.
//!
//! The weights B alternate in sign and their absolute sum grows to ~1e13
//! (1e17 for large l) by n ≈ 14, so the weighted sum is formed in
//! double-double with the integrals expressed as exact ratios to the first
//! one. Kernels without a closed form (and the square-root kernel outside
//! its asymptotic regime) are integrated directly against the two radial
//! functions instead, which needs no cancellation at all.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{ObeError, Result};
use crate::quadrature::integrate_half_line;
use crate::specfn::{dd, ddiv, drecip, factorial_dd, log_gamma, pochhammer_dd, to_f64, Dd};

/// Generic kernel O(x) supplied as a closure.
#[derive(Clone)]
pub struct TabulatedFn {
    pub label: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl TabulatedFn {
    pub fn new(label: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            label: label.into(),
            f: Arc::new(f),
        }
    }
}

impl fmt::Debug for TabulatedFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tabulated({})", self.label)
    }
}

/// Radial function O(x) entering a one-body matrix element.
#[derive(Clone, Debug)]
pub enum RadialKernel {
    /// α x^β
    Power { alpha: f64, beta: f64 },
    /// α e^{-β x²}
    Gaussian { alpha: f64, beta: f64 },
    /// √(x² + α)
    SqrtShifted { alpha: f64 },
    Tabulated(TabulatedFn),
}

impl RadialKernel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialKernel::Gaussian { beta, .. } if !(beta >= 0.0) => Err(ObeError::domain(
                format!("Gaussian kernel needs beta >= 0, got {beta}"),
            )),
            RadialKernel::SqrtShifted { alpha } if !(alpha >= 0.0) => Err(ObeError::domain(
                format!("square-root kernel needs alpha >= 0, got {alpha}"),
            )),
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            RadialKernel::Power { alpha, beta } => alpha * x.powf(*beta),
            RadialKernel::Gaussian { alpha, beta } => alpha * (-beta * x * x).exp(),
            RadialKernel::SqrtShifted { alpha } => (x * x + alpha).sqrt(),
            RadialKernel::Tabulated(t) => (t.f)(x),
        }
    }

    /// The kernel as a plain closure, for quadrature-based cross checks.
    pub fn as_tabulated(&self) -> RadialKernel {
        let k = self.clone();
        RadialKernel::Tabulated(TabulatedFn::new(format!("{self:?}"), move |x| k.eval(x)))
    }
}

impl PartialEq for RadialKernel {
    /// Tabulated kernels compare equal only when they share the closure.
    fn eq(&self, other: &Self) -> bool {
        use RadialKernel::*;
        match (self, other) {
            (Power { alpha: a1, beta: b1 }, Power { alpha: a2, beta: b2 }) => a1 == a2 && b1 == b2,
            (Gaussian { alpha: a1, beta: b1 }, Gaussian { alpha: a2, beta: b2 }) => a1 == a2 && b1 == b2,
            (SqrtShifted { alpha: a1 }, SqrtShifted { alpha: a2 }) => a1 == a2,
            (Tabulated(t1), Tabulated(t2)) => Arc::ptr_eq(&t1.f, &t2.f),
            _ => false,
        }
    }
}

// ---------------------------------------------------------------------------
// B coefficients

/// Cache key: (n1, 2·λ1, n2, 2·λ2). Half-integer λ covers the hyperradial case.
type BKey = (usize, u32, usize, u32);

fn b_cache() -> &'static RwLock<HashMap<BKey, Arc<Vec<Dd>>>> {
    static CACHE: OnceLock<RwLock<HashMap<BKey, Arc<Vec<Dd>>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Talmi weights for general (possibly half-integer) orbital labels.
///
/// Entry k multiplies I_p with p = (λ1+λ2)/2 + k, k = 0..=n1+n2.
pub fn b_coefficients_twice(n1: usize, twice_l1: u32, n2: usize, twice_l2: u32) -> Arc<Vec<Dd>> {
    let key = (n1, twice_l1, n2, twice_l2);
    if let Some(v) = b_cache().read().expect("B cache poisoned").get(&key) {
        return v.clone();
    }
    let v = Arc::new(compute_b(n1, twice_l1 as f64 / 2.0, n2, twice_l2 as f64 / 2.0));
    b_cache()
        .write()
        .expect("B cache poisoned")
        .insert(key, v.clone());
    v
}

/// Insert externally computed weights (used when loading a cache file).
pub fn prime_b_cache(n1: usize, twice_l1: u32, n2: usize, twice_l2: u32, values: Vec<Dd>) {
    b_cache()
        .write()
        .expect("B cache poisoned")
        .insert((n1, twice_l1, n2, twice_l2), Arc::new(values));
}

fn rising_table(base: f64, len: usize) -> Vec<Dd> {
    let mut out = Vec::with_capacity(len);
    let mut acc = dd(1.0);
    for x in 0..len {
        out.push(acc);
        acc *= dd(base) + x as f64;
    }
    out
}

fn compute_b(n1: usize, l1: f64, n2: usize, l2: f64) -> Vec<Dd> {
    let b1 = l1 + 1.5;
    let b2 = l2 + 1.5;
    let b12 = 0.5 * (l1 + l2) + 1.5;
    let kmax = n1 + n2;
    let h1 = rising_table(b1, n1 + 1);
    let h2 = rising_table(b2, n2 + 1);
    let h12 = rising_table(b12, kmax + 1);
    let pref = (factorial_dd(n1) * factorial_dd(n2) * h1[n1] * h2[n2]).sqrt();
    // Γ(b12)/√(Γ(b1)Γ(b2)) is 1 for equal labels
    let common = if l1 == l2 {
        1.0
    } else {
        (libm::lgamma(b12) - 0.5 * (libm::lgamma(b1) + libm::lgamma(b2))).exp()
    };
    let inv1: Vec<Dd> = (0..=n1)
        .map(|i| drecip(h1[i] * factorial_dd(i) * factorial_dd(n1 - i)))
        .collect();
    let inv2: Vec<Dd> = (0..=n2)
        .map(|j| drecip(h2[j] * factorial_dd(j) * factorial_dd(n2 - j)))
        .collect();
    (0..=kmax)
        .map(|k| {
            let mut s = dd(0.0);
            for i in k.saturating_sub(n2)..=k.min(n1) {
                s += inv1[i] * inv2[k - i];
            }
            let v = pref * h12[k] * s * common;
            if k % 2 == 1 {
                -v
            } else {
                v
            }
        })
        .collect()
}

/// Talmi weights for integer orbital labels.
pub fn b_coefficients(n1: usize, l1: u32, n2: usize, l2: u32) -> Arc<Vec<Dd>> {
    b_coefficients_twice(n1, 2 * l1, n2, 2 * l2)
}

/// B(n1 l1; n2 l2; p). Returns 0 when p is outside the Talmi range.
pub fn b_coefficient(n1: usize, l1: u32, n2: usize, l2: u32, p: f64) -> f64 {
    let pmin = 0.5 * (l1 + l2) as f64;
    let k = p - pmin;
    if k < 0.0 || k.fract() != 0.0 || k as usize > n1 + n2 {
        return 0.0;
    }
    to_f64(b_coefficients(n1, l1, n2, l2)[k as usize])
}

// ---------------------------------------------------------------------------
// Talmi integrals

/// I_p for the kernels that have closed forms, as a base value I_{p0}
/// times double-double ratios I_{p0+k}/I_{p0}.
enum TalmiSeries {
    Ratios { base: f64, ratios: Vec<Dd> },
    Values(Vec<Dd>),
}

fn power_base(p: f64, alpha: f64, beta: f64, a: f64) -> Result<f64> {
    if beta <= -2.0 * p - 3.0 {
        return Err(ObeError::domain(format!(
            "power kernel x^{beta} diverges against r^{} at the origin",
            2.0 * p + 2.0
        )));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let lr = log_gamma(p + 1.5 + 0.5 * beta)? - log_gamma(p + 1.5)?;
    Ok(alpha * a.powf(beta) * lr.exp())
}

fn closed_form_series(p0: f64, count: usize, kernel: &RadialKernel, a: f64) -> Result<Option<TalmiSeries>> {
    match *kernel {
        RadialKernel::Power { alpha, beta } => {
            let base = power_base(p0, alpha, beta, a)?;
            let mut ratios = Vec::with_capacity(count);
            let mut r = dd(1.0);
            for k in 0..count {
                ratios.push(r);
                let q = dd(p0 + 1.5) + k as f64;
                r = ddiv(r * (q + 0.5 * beta), q);
            }
            Ok(Some(TalmiSeries::Ratios { base, ratios }))
        }
        RadialKernel::Gaussian { alpha, beta } => {
            let t = drecip(dd(1.0) + a * a * beta);
            let base = alpha * to_f64(t).powf(1.5 + p0);
            let mut ratios = Vec::with_capacity(count);
            let mut r = dd(1.0);
            for _ in 0..count {
                ratios.push(r);
                r *= t;
            }
            Ok(Some(TalmiSeries::Ratios { base, ratios }))
        }
        RadialKernel::SqrtShifted { alpha } => {
            if alpha == 0.0 {
                return closed_form_series(p0, count, &RadialKernel::Power { alpha: 1.0, beta: 1.0 }, a);
            }
            let mut values = Vec::with_capacity(count);
            for k in 0..count {
                match sqrt_asymptotic(p0 + k as f64, alpha, a) {
                    Some(v) => values.push(v),
                    None => return Ok(None),
                }
            }
            Ok(Some(TalmiSeries::Values(values)))
        }
        RadialKernel::Tabulated(_) => Ok(None),
    }
}

/// √α Σ_s (p+3/2)_s (−1/2)_s / (s! (−z)^s), z = α/a². Large-z expansion of
/// a z^{p+2} U(p+3/2, p+3, z); `None` when it cannot reach full
/// double-double accuracy before the terms start to grow.
fn sqrt_asymptotic(p: f64, alpha: f64, a: f64) -> Option<Dd> {
    let z = alpha / (a * a);
    let mut term = dd(1.0);
    let mut sum = dd(1.0);
    let mut prev = f64::INFINITY;
    for s in 0..400usize {
        let ratio = (dd(p + 1.5) + s as f64) * (dd(-0.5) + s as f64) / ((s + 1) as f64 * -z);
        term *= ratio;
        let mag = term.hi().abs();
        if mag < 1e-32 * sum.hi().abs() {
            return Some(sum * alpha.sqrt());
        }
        if mag > prev {
            return None;
        }
        prev = mag;
        sum += term;
    }
    None
}

fn quadrature_talmi(p: f64, f: &dyn Fn(f64) -> f64, rel_tol: f64) -> Result<f64> {
    let lnorm = std::f64::consts::LN_2 - log_gamma(p + 1.5)?;
    let peak = (p + 1.0).sqrt();
    let cutoff = peak + 11.0;
    let g = |r: f64| {
        if r == 0.0 {
            return 0.0;
        }
        (lnorm + (2.0 * p + 2.0) * r.ln() - r * r).exp() * f(r)
    };
    integrate_half_line(g, peak, cutoff, rel_tol, 1e-300)
}

/// (2/Γ(p+3/2)) ∫₀^∞ r^{2p+2} e^{-r²} O(a r) dr.
pub fn talmi_integral(p: f64, kernel: &RadialKernel, a: f64) -> Result<f64> {
    kernel.validate()?;
    match kernel {
        RadialKernel::Power { alpha, beta } => power_base(p, *alpha, *beta, a),
        RadialKernel::Gaussian { alpha, beta } => Ok(alpha * (1.0 + a * a * beta).powf(-1.5 - p)),
        RadialKernel::SqrtShifted { alpha } => sqrt_kernel_integral(p, *alpha, a),
        RadialKernel::Tabulated(t) => {
            let f = &t.f;
            quadrature_talmi(p, &|r| f(a * r), 1e-12)
        }
    }
}

/// Talmi integral of √(x² + α): a (α/a²)^{p+2} U(p+3/2, p+3, α/a²).
///
/// Uses the large-argument expansion of U when it converges to full
/// precision. Otherwise U is taken from its integral representation; with
/// u = z t and u = r²/… that representation is the radial integral itself,
/// which is evaluated by adaptive quadrature.
pub fn sqrt_kernel_integral(p: f64, alpha: f64, a: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(ObeError::domain(format!("square-root kernel needs alpha >= 0, got {alpha}")));
    }
    if alpha == 0.0 {
        return power_base(p, 1.0, 1.0, a);
    }
    if let Some(v) = sqrt_asymptotic(p, alpha, a) {
        return Ok(to_f64(v));
    }
    quadrature_talmi(p, &|r| (a * a * r * r + alpha).sqrt(), 1e-14)
}

// ---------------------------------------------------------------------------
// Matrix elements

/// R_{nλ}(r) = √(2 n!/Γ(n+λ+3/2)) r^λ e^{-r²/2} L_n^{λ+1/2}(r²), λ ≥ 0 real.
pub fn radial_function(n: usize, lambda: f64, r: f64) -> f64 {
    let lnorm = 0.5 * (std::f64::consts::LN_2 + libm::lgamma(n as f64 + 1.0)
        - libm::lgamma(n as f64 + lambda + 1.5));
    let x = r * r;
    let alpha = lambda + 0.5;
    let (mut l0, mut l1) = (1.0, 1.0 + alpha - x);
    let lag = if n == 0 {
        1.0
    } else {
        for k in 1..n {
            let l2 = ((2 * k + 1) as f64 + alpha - x) * l1 - (k as f64 + alpha) * l0;
            l0 = l1;
            l1 = l2 / (k + 1) as f64;
        }
        l1
    };
    if r == 0.0 {
        return if lambda == 0.0 { lnorm.exp() * lag } else { 0.0 };
    }
    (lnorm + lambda * r.ln() - 0.5 * x).exp() * lag
}

fn direct_radial_me(n1: usize, l1: f64, n2: usize, l2: f64, f: &dyn Fn(f64) -> f64) -> Result<f64> {
    let peak = (2.0 * n1.max(n2) as f64 + l1.max(l2) + 1.5).sqrt();
    let cutoff = peak + 11.0;
    let scale = f(peak).abs().max(f(0.5 * peak).abs()).max(f(1e-3).abs()).max(1e-300);
    let g = |r: f64| r * r * radial_function(n1, l1, r) * f(r) * radial_function(n2, l2, r);
    integrate_half_line(g, peak, cutoff, 1e-13, 1e-15 * scale)
}

fn talmi_sum(n1: usize, twice_l1: u32, n2: usize, twice_l2: u32, kernel: &RadialKernel, a: f64) -> Result<f64> {
    kernel.validate()?;
    let l1 = twice_l1 as f64 / 2.0;
    let l2 = twice_l2 as f64 / 2.0;
    let p0 = 0.5 * (l1 + l2);
    let count = n1 + n2 + 1;
    match closed_form_series(p0, count, kernel, a)? {
        Some(series) => {
            let b = b_coefficients_twice(n1, twice_l1, n2, twice_l2);
            let (base, vals) = match series {
                TalmiSeries::Ratios { base, ratios } => (base, ratios),
                TalmiSeries::Values(v) => (1.0, v),
            };
            if base == 0.0 {
                return Ok(0.0);
            }
            let mut s = dd(0.0);
            for (bk, ik) in b.iter().zip(&vals) {
                s += *bk * *ik;
            }
            Ok(to_f64(s) * base)
        }
        None => {
            let f = |r: f64| kernel.eval(a * r);
            direct_radial_me(n1, l1, n2, l2, &f)
        }
    }
}

/// ∫ r² dr R_{n1 l1}(r) O(a r) R_{n2 l2}(r).
pub fn radial_me(n1: usize, l1: u32, n2: usize, l2: u32, kernel: &RadialKernel, a: f64) -> Result<f64> {
    if (l1 + l2) % 2 == 1 {
        return Err(ObeError::domain(format!(
            "radial element between l={l1} and l={l2} has no Talmi expansion (odd l1+l2)"
        )));
    }
    talmi_sum(n1, 2 * l1, n2, 2 * l2, kernel, a)
}

/// ∫ dρ ρ⁵ ℛ_{N1 K}(ρ) O(c ρ) ℛ_{N2 K}(ρ) via the half-integer Talmi grid.
pub fn hyperradial_me(n1: usize, n2: usize, k: u32, kernel: &RadialKernel, c: f64) -> Result<f64> {
    talmi_sum(n1, 2 * k + 3, n2, 2 * k + 3, kernel, c)
}

/// ℛ_{NK}(ρ) = √(2 N!/Γ(N+K+3)) ρ^K e^{-ρ²/2} L_N^{K+2}(ρ²).
pub fn hyperradial_function(n: usize, k: u32, rho: f64) -> f64 {
    if rho == 0.0 {
        return if k == 0 { hyper_origin(n) } else { 0.0 };
    }
    radial_function(n, k as f64 + 1.5, rho) * rho.powf(-1.5)
}

fn hyper_origin(n: usize) -> f64 {
    // ℛ_{N0}(0) = √(2 N!/Γ(N+3)) L_N^{2}(0) = √(2 N!/Γ(N+3)) C(N+2, N)
    let c = to_f64(ddiv(pochhammer_dd(dd(3.0), n), factorial_dd(n)));
    (2.0 * to_f64(factorial_dd(n)) / to_f64(factorial_dd(n + 2))).sqrt() * c
}

/// Radial element by direct quadrature of R·O·R (no Talmi expansion).
pub fn radial_me_quadrature(n1: usize, l1: u32, n2: usize, l2: u32, kernel: &RadialKernel, a: f64) -> Result<f64> {
    let f = |r: f64| kernel.eval(a * r);
    direct_radial_me(n1, l1 as f64, n2, l2 as f64, &f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn b_examples() {
        assert!((b_coefficient(0, 3, 0, 3, 3.0) - 1.0).abs() < 1e-15);
        assert!((b_coefficient(1, 0, 1, 0, 0.0) - 1.5).abs() < 1e-15);
        assert!((b_coefficient(1, 0, 1, 0, 1.0) + 3.0).abs() < 1e-15);
        assert!((b_coefficient(1, 0, 1, 0, 2.0) - 2.5).abs() < 1e-15);
        assert_eq!(b_coefficient(1, 0, 1, 0, 3.0), 0.0);
        assert_eq!(b_coefficient(1, 0, 1, 0, 0.5), 0.0);
    }

    #[test]
    fn b_sum_rule() {
        for l in 0..=10u32 {
            for n1 in 0..=12usize {
                for n2 in 0..=12usize {
                    let s: Dd = b_coefficients(n1, l, n2, l).iter().fold(dd(0.0), |a, b| a + *b);
                    let expect = if n1 == n2 { 1.0 } else { 0.0 };
                    assert!((to_f64(s) - expect).abs() < 1e-12, "n1={n1} n2={n2} l={l}");
                }
            }
        }
    }

    #[test]
    fn talmi_closed_forms() {
        assert!((talmi_integral(2.0, &RadialKernel::Power { alpha: 1.0, beta: 0.0 }, 0.7).unwrap() - 1.0).abs() < 1e-15);
        let v = talmi_integral(1.0, &RadialKernel::Power { alpha: 2.0, beta: 2.0 }, 1.5).unwrap();
        assert!(rel(v, 2.0 * 2.25 * 2.5) < 1e-14);
        let v = talmi_integral(3.0, &RadialKernel::Gaussian { alpha: -1.5, beta: 0.3 }, 2.0).unwrap();
        assert!(rel(v, -1.5 * (1.0f64 + 1.2).powf(-4.5)) < 1e-14);
        let v = talmi_integral(0.0, &RadialKernel::SqrtShifted { alpha: 0.0 }, 1.3).unwrap();
        assert!(rel(v, 1.3 * 1.0 / libm::tgamma(1.5)) < 1e-14);
        assert!(talmi_integral(0.0, &RadialKernel::Power { alpha: 1.0, beta: -3.0 }, 1.0).is_err());
    }

    #[test]
    fn analytic_matches_tabulated_quadrature() {
        let kernels = [
            RadialKernel::Power { alpha: 1.0, beta: 1.0 },
            RadialKernel::Power { alpha: -3.0, beta: -1.0 },
            RadialKernel::Gaussian { alpha: 2.0, beta: 0.4 },
            RadialKernel::SqrtShifted { alpha: 2.0 },
        ];
        for k in &kernels {
            let tab = k.as_tabulated();
            for &a in &[0.5, 1.0, 2.0] {
                for p in [0.0, 0.5, 3.0, 12.5, 30.0] {
                    let x = talmi_integral(p, k, a).unwrap();
                    let y = talmi_integral(p, &tab, a).unwrap();
                    assert!(rel(x, y) < 1e-9, "{k:?} p={p} a={a}: {x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn sqrt_heavy_limit() {
        let alpha = 1e8;
        for p in [0.0, 2.0, 7.0] {
            let v = sqrt_kernel_integral(p, alpha, 1.0).unwrap();
            // √α (1 + (p+3/2)/(2α) + …)
            let lead = alpha.sqrt() * (1.0 + (p + 1.5) / (2.0 * alpha));
            assert!(rel(v, lead) < 1e-14);
        }
    }

    #[test]
    fn radial_examples() {
        let r2 = RadialKernel::Power { alpha: 1.0, beta: 2.0 };
        assert!((radial_me(0, 0, 0, 0, &r2, 1.0).unwrap() - 1.5).abs() < 1e-15);
        let one = RadialKernel::Power { alpha: 1.0, beta: 0.0 };
        for n in 0..15 {
            for l in [0u32, 3, 8] {
                assert!((radial_me(n, l, n, l, &one, 0.8).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        // ⟨r²⟩ tridiagonal: diag 2n+l+3/2, off-diag −√(n'(n'+l+1/2)) for n'=n+1
        for l in [0u32, 2, 5] {
            for n in 0..14usize {
                let d = radial_me(n, l, n, l, &r2, 1.0).unwrap();
                assert!((d - (2 * n) as f64 - l as f64 - 1.5).abs() < 1e-12);
                let o = radial_me(n + 1, l, n, l, &r2, 1.0).unwrap();
                let e = -(((n + 1) as f64) * ((n + 1) as f64 + l as f64 + 0.5)).sqrt();
                assert!((o - e).abs() < 1e-12, "n={n} l={l}: {o} vs {e}");
                assert!(radial_me(n + 2, l, n, l, &r2, 1.0).unwrap().abs() < 1e-11);
            }
        }
    }

    #[test]
    fn radial_talmi_matches_direct_quadrature() {
        let kernels = [
            RadialKernel::Power { alpha: -1.0, beta: -1.0 },
            RadialKernel::Power { alpha: 0.5, beta: 1.0 },
            RadialKernel::Gaussian { alpha: -1.227, beta: 0.37 },
        ];
        for k in &kernels {
            for (n1, n2, l) in [(0usize, 3usize, 0u32), (5, 5, 2), (10, 12, 1), (14, 14, 0), (13, 12, 6)] {
                let t = radial_me(n1, l, n2, l, k, 1.3).unwrap();
                let q = radial_me_quadrature(n1, l, n2, l, k, 1.3).unwrap();
                assert!((t - q).abs() < 1e-11, "{k:?} ({n1},{n2},{l}): {t} vs {q}");
            }
        }
    }

    #[test]
    fn hyperradial_examples() {
        let one = RadialKernel::Power { alpha: 1.0, beta: 0.0 };
        assert!((hyperradial_me(0, 0, 0, &one, 2.0).unwrap() - 1.0).abs() < 1e-15);
        let r2 = RadialKernel::Power { alpha: 1.0, beta: 2.0 };
        assert!((hyperradial_me(0, 0, 0, &r2, 1.0).unwrap() - 3.0).abs() < 1e-14);
        let beta = 0.37;
        let c = 1.9;
        let g = RadialKernel::Gaussian { alpha: 1.0, beta };
        let v = hyperradial_me(0, 0, 0, &g, c).unwrap();
        assert!(rel(v, (1.0 + c * c * beta).powi(-3)) < 1e-14);
        for n in 0..14 {
            for k in [0u32, 3, 10] {
                assert!((hyperradial_me(n, n, k, &one, 1.0).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hyperradial_function_normalized() {
        for (n, k) in [(0usize, 0u32), (3, 2), (7, 5)] {
            let v = integrate(
                |r: f64| r.powi(5) * hyperradial_function(n, k, r).powi(2),
                0.0,
                14.0,
                1e-13,
                0.0,
            )
            .unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!((hyperradial_function(0, 0, 0.0) - 1.0).abs() < 1e-15);
    }
}
