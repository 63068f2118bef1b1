//! Special functions: log-gamma, real binomials, Laguerre and Jacobi
//! polynomials from their explicit sums, and Clebsch-Gordan coefficients.
//!
//! The explicit polynomial sums alternate in sign and lose many digits in
//! plain `f64` once the degree reaches a dozen or so. Everything that feeds
//! such a sum is therefore carried in double-double ([`Dd`]) and only
//! rounded at the end.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use twofloat::TwoFloat;

use crate::error::{ObeError, Result};

/// Double-double scalar (about 32 significant digits).
pub type Dd = TwoFloat;

/// Largest argument covered by the exact factorial tables.
const TABLE_LEN: usize = 171;

#[inline]
pub fn dd(x: f64) -> Dd {
    Dd::from(x)
}

#[inline]
pub fn to_f64(x: Dd) -> f64 {
    x.hi() + x.lo()
}

/// a / b to full double-double accuracy.
///
/// `twofloat`'s own `Dd / Dd` forms the reciprocal residual without an FMA
/// and ends up no better than `f64`, so quotients go through long division.
pub fn ddiv(a: Dd, b: Dd) -> Dd {
    let q1 = a.hi() / b.hi();
    let r = a - b * q1;
    let q2 = r.hi() / b.hi();
    let r = r - b * q2;
    let q3 = r.hi() / b.hi();
    Dd::new_add(q1, q2) + q3
}

#[inline]
pub fn drecip(b: Dd) -> Dd {
    ddiv(dd(1.0), b)
}

struct Tables {
    /// k!
    factorial: Vec<Dd>,
    /// Γ(k + 1/2) / √π
    half_gamma: Vec<Dd>,
    inv_factorial: Vec<Dd>,
    inv_half_gamma: Vec<Dd>,
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut factorial = Vec::with_capacity(TABLE_LEN);
        let mut half_gamma = Vec::with_capacity(TABLE_LEN);
        let mut f = dd(1.0);
        let mut h = dd(1.0);
        for k in 0..TABLE_LEN {
            if k > 0 {
                f *= k as f64;
                h *= k as f64 - 0.5;
            }
            factorial.push(f);
            half_gamma.push(h);
        }
        let inv_factorial = factorial.iter().map(|&x| drecip(x)).collect();
        let inv_half_gamma = half_gamma.iter().map(|&x| drecip(x)).collect();
        Tables {
            factorial,
            half_gamma,
            inv_factorial,
            inv_half_gamma,
        }
    })
}

/// k! in double-double.
pub fn factorial_dd(k: usize) -> Dd {
    let t = tables();
    if k < TABLE_LEN {
        t.factorial[k]
    } else {
        (TABLE_LEN..=k).fold(t.factorial[TABLE_LEN - 1], |acc, j| acc * j as f64)
    }
}

/// Γ(k + 1/2)/√π in double-double.
pub fn half_gamma_dd(k: usize) -> Dd {
    let t = tables();
    if k < TABLE_LEN {
        t.half_gamma[k]
    } else {
        (TABLE_LEN..=k).fold(t.half_gamma[TABLE_LEN - 1], |acc, j| acc * (j as f64 - 0.5))
    }
}

/// 1/k! in double-double.
pub fn inv_factorial_dd(k: usize) -> Dd {
    if k < TABLE_LEN {
        tables().inv_factorial[k]
    } else {
        drecip(factorial_dd(k))
    }
}

/// √π/Γ(k + 1/2) in double-double.
pub fn inv_half_gamma_dd(k: usize) -> Dd {
    if k < TABLE_LEN {
        tables().inv_half_gamma[k]
    } else {
        drecip(half_gamma_dd(k))
    }
}

/// Rising factorial (x)_k = x(x+1)…(x+k-1) in double-double.
pub fn pochhammer_dd(x: Dd, k: usize) -> Dd {
    let mut acc = dd(1.0);
    let mut t = x;
    for _ in 0..k {
        acc *= t;
        t += 1.0;
    }
    acc
}

/// Binomial C(top, k) for real `top` and integer `k`, as (top-k+1)_k / k!.
pub fn binomial_int_dd(top: f64, k: usize) -> Dd {
    ddiv(pochhammer_dd(dd(top) - k as f64 + 1.0, k), factorial_dd(k))
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(ObeError::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma_r(x).0)
}

/// Γ(x+1)/(Γ(y+1)Γ(x−y+1)) for real arguments.
///
/// Integer arguments are evaluated exactly; everything else goes through
/// log-gamma with the sign of each gamma factor tracked separately.
pub fn binomial(x: f64, y: f64) -> Result<f64> {
    let args = [x + 1.0, y + 1.0, x - y + 1.0];
    if args.iter().any(|&a| is_nonpositive_integer(a)) {
        return Err(ObeError::domain(format!(
            "binomial({x}, {y}) hits a pole of the gamma function"
        )));
    }
    if y.fract() == 0.0 && y >= 0.0 && y < TABLE_LEN as f64 {
        return Ok(to_f64(binomial_int_dd(x, y as usize)));
    }
    let (la, sa) = libm::lgamma_r(args[0]);
    let (lb, sb) = libm::lgamma_r(args[1]);
    let (lc, sc) = libm::lgamma_r(args[2]);
    let sign = (sa * sb * sc) as f64;
    Ok(sign * (la - lb - lc).exp())
}

/// Coefficients of x^i in L_n^a(x), i = 0..=n.
pub fn laguerre_coefficients(n: usize, a: f64) -> Vec<Dd> {
    (0..=n)
        .map(|i| {
            let c = ddiv(binomial_int_dd(n as f64 + a, n - i), factorial_dd(i));
            if i % 2 == 1 {
                -c
            } else {
                c
            }
        })
        .collect()
}

/// Generalized Laguerre polynomial L_n^a(x) from its explicit finite sum.
pub fn laguerre(n: usize, a: f64, x: f64) -> f64 {
    to_f64(laguerre_dd(n, a, dd(x)))
}

pub fn laguerre_dd(n: usize, a: f64, x: Dd) -> Dd {
    let coeffs = laguerre_coefficients(n, a);
    coeffs.iter().rev().fold(dd(0.0), |acc, &c| acc * x + c)
}

/// Jacobi polynomial P_n^{(a,b)}(x) from its explicit finite sum.
pub fn jacobi(n: usize, a: f64, b: f64, x: f64) -> f64 {
    let xd = dd(x);
    let plus = (xd + 1.0) / 2.0;
    let minus = (xd - 1.0) / 2.0;
    let pow = |base: Dd, k: usize| (0..k).fold(dd(1.0), |acc, _| acc * base);
    let mut sum = dd(0.0);
    for i in 0..=n {
        let c = binomial_int_dd(n as f64 + b, n - i) * binomial_int_dd(n as f64 + a, i);
        sum += c * pow(plus, i) * pow(minus, n - i);
    }
    to_f64(sum)
}

/// Orbital angular momentum with projection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AngularMomentum {
    pub l: u32,
    pub m: i32,
}

impl AngularMomentum {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > l {
            return Err(ObeError::domain(format!("|m| = {} exceeds l = {l}", m.abs())));
        }
        Ok(Self { l, m })
    }
}

type CgKey = (u32, i32, u32, i32, u32, i32);

fn cg_cache() -> &'static RwLock<HashMap<CgKey, f64>> {
    static CACHE: OnceLock<RwLock<HashMap<CgKey, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// ⟨l1 m1 l2 m2 | L M⟩ in the Condon-Shortley convention.
///
/// Selection-rule violations return 0.
pub fn clebsch_gordan(l1: u32, m1: i32, l2: u32, m2: i32, l: u32, m: i32) -> f64 {
    if m1 + m2 != m
        || m1.unsigned_abs() > l1
        || m2.unsigned_abs() > l2
        || m.unsigned_abs() > l
        || l > l1 + l2
        || l < l1.abs_diff(l2)
    {
        return 0.0;
    }
    let key = (l1, m1, l2, m2, l, m);
    if let Some(&v) = cg_cache().read().expect("cg cache poisoned").get(&key) {
        return v;
    }
    let v = racah_cg(l1 as i64, m1 as i64, l2 as i64, m2 as i64, l as i64, m as i64);
    cg_cache()
        .write()
        .expect("cg cache poisoned")
        .insert(key, v);
    v
}

pub fn clebsch_gordan_am(a: AngularMomentum, b: AngularMomentum, c: AngularMomentum) -> f64 {
    clebsch_gordan(a.l, a.m, b.l, b.m, c.l, c.m)
}

fn racah_cg(j1: i64, m1: i64, j2: i64, m2: i64, j: i64, m: i64) -> f64 {
    let f = |k: i64| factorial_dd(k as usize);
    let delta = ddiv(f(j1 + j2 - j) * f(j1 - j2 + j) * f(-j1 + j2 + j), f(j1 + j2 + j + 1));
    let pref = (delta
        * (2 * j + 1) as f64
        * f(j + m)
        * f(j - m)
        * f(j1 - m1)
        * f(j1 + m1)
        * f(j2 - m2)
        * f(j2 + m2))
        .sqrt();
    let kmin = 0.max(j2 - j - m1).max(j1 + m2 - j);
    let kmax = (j1 + j2 - j).min(j1 - m1).min(j2 + m2);
    let mut sum = dd(0.0);
    for k in kmin..=kmax {
        let denom = f(k)
            * f(j1 + j2 - j - k)
            * f(j1 - m1 - k)
            * f(j2 + m2 - k)
            * f(j - j2 + m1 + k)
            * f(j - j1 - m2 + k);
        let term = drecip(denom);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    to_f64(pref * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn long_division_is_double_double_accurate() {
        let third = ddiv(dd(1.0), dd(3.0));
        let e = third * 3.0 - 1.0;
        assert!(e.hi().abs() < 1e-31);
        let f = factorial_dd(25);
        let e = drecip(f) * f - 1.0;
        assert!(e.hi().abs() < 1e-31);
    }

    #[test]
    fn log_gamma_values() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!(close(log_gamma(0.5).unwrap(), 0.5723649429247001, 1e-14));
        assert!(close(log_gamma(11.0).unwrap(), (3628800.0f64).ln(), 1e-14));
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-2.5).is_err());
    }

    #[test]
    fn log_gamma_matches_factorials_up_to_large_argument() {
        for k in [20usize, 50, 100, 170] {
            let exact = to_f64(factorial_dd(k - 1)).ln();
            let got = log_gamma(k as f64).unwrap();
            assert!((got - exact).abs() <= 1e-13 * exact.abs(), "k={k}");
        }
        // Stirling check beyond the factorial range
        let x = 500.0f64;
        let stirling = (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln()
            + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3));
        assert!((log_gamma(x).unwrap() - stirling).abs() <= 1e-13 * stirling);
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(4.0, 2.0).unwrap(), 6.0);
        assert_eq!(binomial(7.3, 0.0).unwrap(), 1.0);
        assert!(close(binomial(2.5, 1.0).unwrap(), 2.5, 1e-15));
        // non-integer lower index goes through log-gamma
        let v = binomial(3.5, 1.5).unwrap();
        let expect = libm::tgamma(4.5) / (libm::tgamma(2.5) * libm::tgamma(3.0));
        assert!(close(v, expect, 1e-13));
        assert!(binomial(-1.0, 0.5).is_err());
        assert!(binomial(2.0, 3.0).is_err());
    }

    #[test]
    fn laguerre_small_cases() {
        assert_eq!(laguerre(0, 0.3, 7.0), 1.0);
        for &x in &[0.0, 0.7, 3.0, 11.0] {
            assert!(close(laguerre(1, 0.5, x), 1.5 - x, 1e-15));
        }
        assert!(close(laguerre(2, 2.0, 0.0), 6.0, 1e-15));
    }

    #[test]
    fn laguerre_recurrence_holds() {
        for &a in &[0.5, 1.5, 2.0, 7.5] {
            for &x in &[0.3, 2.0, 9.5, 25.0, 49.0] {
                for n in 1..30usize {
                    let lhs = (n + 1) as f64 * laguerre(n + 1, a, x);
                    let rhs = (2.0 * n as f64 + a + 1.0 - x) * laguerre(n, a, x)
                        - (n as f64 + a) * laguerre(n - 1, a, x);
                    let scale = lhs.abs().max(rhs.abs()).max(1e-300);
                    assert!((lhs - rhs).abs() <= 1e-9 * scale, "n={n} a={a} x={x}");
                }
            }
        }
    }

    #[test]
    fn jacobi_cases() {
        assert_eq!(jacobi(0, 0.3, 1.2, 0.4), 1.0);
        for n in 0..8 {
            let v = jacobi(n, 1.5, 0.5, 1.0);
            assert!(close(v, binomial(n as f64 + 1.5, n as f64).unwrap(), 1e-14));
        }
        assert!(jacobi(1, 0.5, 0.5, 0.0).abs() < 1e-16);
    }

    #[test]
    fn jacobi_reflection_symmetry() {
        for n in 0..12usize {
            for &(a, b) in &[(0.5, 1.5), (2.5, 0.5), (3.5, 4.5)] {
                for &x in &[-0.9, -0.3, 0.1, 0.77] {
                    let lhs = jacobi(n, a, b, -x);
                    let rhs = if n % 2 == 0 { 1.0 } else { -1.0 } * jacobi(n, b, a, x);
                    assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn clebsch_gordan_values() {
        assert_eq!(clebsch_gordan(0, 0, 0, 0, 0, 0), 1.0);
        let s3 = 1.0 / 3.0f64.sqrt();
        assert!(close(clebsch_gordan(1, 0, 1, 0, 0, 0), -s3, 1e-15));
        assert!(close(clebsch_gordan(1, 1, 1, -1, 0, 0), s3, 1e-15));
        assert_eq!(clebsch_gordan(1, 1, 1, 0, 0, 0), 0.0);
        assert_eq!(clebsch_gordan(1, 0, 1, 0, 3, 0), 0.0);
        // ⟨1 1 1 0 | 2 1⟩ = 1/√2
        assert!(close(clebsch_gordan(1, 1, 1, 0, 2, 1), 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn clebsch_gordan_orthogonality() {
        for l1 in 0..=6u32 {
            for l2 in 0..=6u32 {
                let ls: Vec<u32> = (l1.abs_diff(l2)..=l1 + l2).collect();
                for &la in &ls {
                    for &lb in &ls {
                        for ma in -(la as i32)..=la as i32 {
                            for mb in -(lb as i32)..=lb as i32 {
                                let mut s = 0.0;
                                for m1 in -(l1 as i32)..=l1 as i32 {
                                    for m2 in -(l2 as i32)..=l2 as i32 {
                                        s += clebsch_gordan(l1, m1, l2, m2, la, ma)
                                            * clebsch_gordan(l1, m1, l2, m2, lb, mb);
                                    }
                                }
                                let expect = if la == lb && ma == mb { 1.0 } else { 0.0 };
                                assert!((s - expect).abs() < 1e-12);
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn angular_momentum_rejects_bad_projection() {
        assert!(AngularMomentum::new(1, 2).is_err());
        assert!(AngularMomentum::new(3, -3).is_ok());
    }
}
