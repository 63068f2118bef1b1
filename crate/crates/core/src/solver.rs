//! Hamiltonian assembly, diagonalization and the scale optimization.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{symmetrize, Exchange, SectorSpec, SymmetrizedBasis};
use crate::coeffs::store::CoefficientTables;
use crate::error::{ObeError, Result};
use crate::matel::{
    kinetic_nr_matrix, kinetic_sr_matrix, kinetic_sr_term_matrix, pair_matrix, r12_matrix, three_body_hyper_matrix,
    Kinematics, Pair, Rotations, ScaleParams, SystemConfig,
};

fn all_masses_equal(cfg: &SystemConfig) -> bool {
    cfg.masses[0] == cfg.masses[1] && cfg.masses[1] == cfg.masses[2]
}

/// Hamiltonian on the channel list of `basis`, before projection.
pub fn assemble_channels(basis: &SymmetrizedBasis, cfg: &SystemConfig, s: &ScaleParams, tables: &CoefficientTables) -> Result<DMatrix<f64>> {
    cfg.validate()?;
    s.validate()?;
    let ch = &basis.channels;
    let n = ch.len();
    if n == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let three = matches!(basis.sector.exchange, Exchange::ThreeIdentical(_)) && all_masses_equal(cfg);
    if matches!(basis.sector.exchange, Exchange::ThreeIdentical(_)) && !s.locked {
        return Err(ObeError::config("three identical particles need locked scales (b = √3 a/2)"));
    }
    let pairs_equal = cfg.v12 == cfg.v13 && cfg.v13 == cfg.v23;
    let needs_rotations = match cfg.kinematics {
        Kinematics::Semirelativistic => !three,
        Kinematics::Nonrelativistic => false,
    } || (!(three && pairs_equal) && (!cfg.v13.is_empty() || !cfg.v23.is_empty()));
    let rot = needs_rotations.then(|| Rotations::new(cfg, s, basis.sector.qmax, basis.sector.l));
    // the pair-12 path never reads the brackets
    let dummy;
    let r = match &rot {
        Some(r) => r,
        None => {
            dummy = Rotations::new(cfg, s, 0, 0);
            &dummy
        }
    };

    let mut h = match cfg.kinematics {
        Kinematics::Nonrelativistic => kinetic_nr_matrix(ch, cfg, s),
        // on fully symmetric states the three terms coincide
        Kinematics::Semirelativistic if three => kinetic_sr_term_matrix(2, ch, cfg, s, None)? * 3.0,
        Kinematics::Semirelativistic => kinetic_sr_matrix(ch, cfg, s, r)?,
    };
    if three && pairs_equal {
        if !cfg.v12.is_empty() {
            h += pair_matrix(Pair::P12, ch, &cfg.v12, cfg, s, r)? * 3.0;
        }
    } else {
        for pair in [Pair::P12, Pair::P13, Pair::P23] {
            let k = cfg.pair(pair);
            if k.is_empty() {
                continue;
            }
            h += pair_matrix(pair, ch, k, cfg, s, r)?;
        }
    }
    if !cfg.three_body.is_empty() {
        h += three_body_hyper_matrix(ch, &cfg.three_body, cfg, s, &tables.hyper)?;
    }
    Ok(h)
}

/// H in the symmetry-adapted basis, Tᵀ H T, symmetrized.
pub fn assemble(basis: &SymmetrizedBasis, cfg: &SystemConfig, s: &ScaleParams, tables: &CoefficientTables) -> Result<DMatrix<f64>> {
    let h = assemble_channels(basis, cfg, s, tables)?;
    Ok(project(basis, &h))
}

/// Tᵀ O T with explicit symmetrization.
pub fn project(basis: &SymmetrizedBasis, op: &DMatrix<f64>) -> DMatrix<f64> {
    let t = &basis.transform;
    let m = t.transpose() * op * t;
    (&m + m.transpose()) * 0.5
}

/// The k smallest eigenvalues (ascending) and their eigenvectors.
pub fn lowest_eigenpairs(h: &DMatrix<f64>, k: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(ObeError::Eigen(format!("matrix is {}x{}, not square", n, h.ncols())));
    }
    if k > n {
        return Err(ObeError::Eigen(format!("asked for {k} eigenpairs of a {n}x{n} matrix")));
    }
    if n == 0 {
        return Ok((vec![], DMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 0)
        .ok_or_else(|| ObeError::Eigen("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order[..k].iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, k);
    let hnorm = h.abs().max().max(f64::MIN_POSITIVE);
    for (c, &i) in order[..k].iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        // deterministic sign: largest component positive
        let imax = v.iamax();
        if v[imax] < 0.0 {
            v = -v;
        }
        let res = (h * &v - &v * values[c]).norm();
        if res > 1e-9 * hnorm * (n as f64).sqrt() {
            return Err(ObeError::Eigen(format!("eigenpair {c} residual {res:e} exceeds tolerance")));
        }
        vectors.set_column(c, &v);
    }
    Ok((values, vectors))
}

/// vᵀ Tᵀ O T v for a channel-level operator.
pub fn expectation(op: &DMatrix<f64>, v: &DVector<f64>, basis: &SymmetrizedBasis) -> f64 {
    let tv = &basis.transform * v;
    tv.dot(&(op * &tv))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    FixedA,
    Scan,
    GoldenSection,
}

/// How the scale a is chosen.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationalProtocol {
    pub mode: ScaleMode,
    /// Used by `FixedA`.
    pub a: Option<f64>,
    pub a_range: (f64, f64),
    /// Quanta cutoff at which a is optimized before being frozen.
    pub optimize_at_q: u32,
    /// Eigenvalue index minimized.
    pub target: usize,
    pub tolerance: f64,
    /// Scan resolution, also used to bracket the golden-section search.
    pub scan_points: usize,
    /// Fixed b for unlocked systems; `None` locks b = √3 a/2.
    pub b: Option<f64>,
}

impl Default for VariationalProtocol {
    fn default() -> Self {
        Self {
            mode: ScaleMode::GoldenSection,
            a: None,
            a_range: (0.2, 10.0),
            optimize_at_q: 12,
            target: 0,
            tolerance: 1e-4,
            scan_points: 24,
            b: None,
        }
    }
}

impl VariationalProtocol {
    pub fn validate(&self, qmax: u32) -> Result<()> {
        let (lo, hi) = self.a_range;
        if !(lo > 0.0 && hi > lo) {
            return Err(ObeError::config(format!("a_range must satisfy 0 < low < high, got ({lo}, {hi})")));
        }
        if self.optimize_at_q > qmax && self.mode != ScaleMode::FixedA {
            return Err(ObeError::config(format!(
                "optimize_at_q = {} exceeds qmax = {qmax}",
                self.optimize_at_q
            )));
        }
        if self.mode == ScaleMode::FixedA && !self.a.is_some_and(|a| a > 0.0) {
            return Err(ObeError::config("fixed_a mode needs a positive `a`"));
        }
        if !(self.tolerance > 0.0) {
            return Err(ObeError::config("tolerance must be positive"));
        }
        if self.scan_points < 3 {
            return Err(ObeError::config("scan_points must be at least 3"));
        }
        Ok(())
    }

    pub fn scales(&self, a: f64) -> ScaleParams {
        match self.b {
            Some(b) => ScaleParams::free(a, b),
            None => ScaleParams::locked(a),
        }
    }
}

/// Eigenvalues and observables of one sector at one scale.
#[derive(Clone, Debug, Serialize)]
pub struct SpectrumResult {
    pub sector: SectorSpec,
    pub qmax: u32,
    pub a_star: f64,
    pub b_star: f64,
    pub basis_size: usize,
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: DMatrix<f64>,
    pub observables: BTreeMap<String, Vec<f64>>,
    pub timings: BTreeMap<String, f64>,
}

/// Lowest `nev` eigenpairs of a basis at fixed scales.
pub fn spectrum_at(
    basis: &SymmetrizedBasis,
    cfg: &SystemConfig,
    s: &ScaleParams,
    tables: &CoefficientTables,
    nev: usize,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let h = assemble(basis, cfg, s, tables)?;
    lowest_eigenpairs(&h, nev.min(h.nrows()))
}

fn objective(basis: &SymmetrizedBasis, cfg: &SystemConfig, p: &VariationalProtocol, tables: &CoefficientTables, a: f64) -> Result<f64> {
    let (vals, _) = spectrum_at(basis, cfg, &p.scales(a), tables, p.target + 1)?;
    vals.get(p.target)
        .copied()
        .ok_or_else(|| ObeError::Optimizer(format!("basis has fewer than {} states", p.target + 1)))
}

/// Minimize the target eigenvalue over a on the given basis.
pub fn optimize_a(basis: &SymmetrizedBasis, cfg: &SystemConfig, p: &VariationalProtocol, tables: &CoefficientTables) -> Result<f64> {
    if p.mode == ScaleMode::FixedA {
        return Ok(p.a.expect("validated"));
    }
    let (lo, hi) = (p.a_range.0.ln(), p.a_range.1.ln());
    let m = p.scan_points;
    let grid: Vec<f64> = (0..m).map(|i| lo + (hi - lo) * i as f64 / (m - 1) as f64).collect();
    let values: Vec<f64> = grid
        .par_iter()
        .map(|&x| objective(basis, cfg, p, tables, x.exp()))
        .collect::<Result<_>>()?;
    let best = (0..m).min_by(|&i, &j| values[i].total_cmp(&values[j])).expect("non-empty grid");
    if best == 0 || best == m - 1 {
        return Err(ObeError::Optimizer(format!(
            "minimum of the target eigenvalue lies at the edge of a_range ({}, {}); widen the range",
            p.a_range.0, p.a_range.1
        )));
    }
    if p.mode == ScaleMode::Scan {
        return Ok(grid[best].exp());
    }
    // golden section on ln a
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x0, mut x3) = (grid[best - 1], grid[best + 1]);
    let mut x1 = x3 - invphi * (x3 - x0);
    let mut x2 = x0 + invphi * (x3 - x0);
    let mut f1 = objective(basis, cfg, p, tables, x1.exp())?;
    let mut f2 = objective(basis, cfg, p, tables, x2.exp())?;
    for _ in 0..200 {
        if x3.exp() - x0.exp() <= p.tolerance {
            break;
        }
        if f1 < f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - invphi * (x3 - x0);
            f1 = objective(basis, cfg, p, tables, x1.exp())?;
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + invphi * (x3 - x0);
            f2 = objective(basis, cfg, p, tables, x2.exp())?;
        }
    }
    Ok(if f1 < f2 { x1.exp() } else { x2.exp() })
}

/// Optimize a at the protocol's quanta cutoff, then solve the full sector
/// with a frozen. Reports `nev` eigenvalues and ⟨r12⟩ for each.
pub fn optimize_scale(
    cfg: &SystemConfig,
    sector: &SectorSpec,
    protocol: &VariationalProtocol,
    tables: &CoefficientTables,
    nev: usize,
) -> Result<SpectrumResult> {
    cfg.validate()?;
    protocol.validate(sector.qmax)?;
    if tables.hyper.qmax < sector.qmax && !cfg.three_body.is_empty() {
        return Err(ObeError::MissingCoefficients(format!(
            "coefficient tables cover Q ≤ {} but the sector needs Q ≤ {}",
            tables.hyper.qmax, sector.qmax
        )));
    }
    let t0 = Instant::now();
    let basis = symmetrize(sector)?;
    let t_basis = t0.elapsed().as_secs_f64();
    let mut timings = BTreeMap::new();
    timings.insert("basis_seconds".to_string(), t_basis);
    if basis.is_empty() {
        return Ok(SpectrumResult {
            sector: *sector,
            qmax: sector.qmax,
            a_star: protocol.a.unwrap_or(f64::NAN),
            b_star: f64::NAN,
            basis_size: 0,
            eigenvalues: vec![],
            eigenvectors: DMatrix::zeros(0, 0),
            observables: BTreeMap::new(),
            timings,
        });
    }
    let t1 = Instant::now();
    let a = optimize_a(&basis.truncated(protocol.optimize_at_q), cfg, protocol, tables)?;
    timings.insert("optimize_seconds".to_string(), t1.elapsed().as_secs_f64());
    let s = protocol.scales(a);
    let t2 = Instant::now();
    let h = assemble(&basis, cfg, &s, tables)?;
    let (vals, vecs) = lowest_eigenpairs(&h, nev.min(basis.len()))?;
    timings.insert("solve_seconds".to_string(), t2.elapsed().as_secs_f64());
    let r12 = r12_matrix(&basis.channels, &s)?;
    let mean_r: Vec<f64> = (0..vals.len())
        .map(|i| expectation(&r12, &vecs.column(i).into_owned(), &basis))
        .collect();
    let mut observables = BTreeMap::new();
    observables.insert("mean_r12".to_string(), mean_r);
    Ok(SpectrumResult {
        sector: *sector,
        qmax: sector.qmax,
        a_star: a,
        b_star: s.b,
        basis_size: basis.len(),
        eigenvalues: vals,
        eigenvectors: vecs,
        observables,
        timings,
    })
}
