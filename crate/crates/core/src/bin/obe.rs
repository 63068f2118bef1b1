use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use obe_core::basis::enumerate_channels;
use obe_core::coeffs::store::{load_tables, save_tables, CoefficientTables};
use obe_core::config::RunConfig;
use obe_core::matel::{three_body_hyper_matrix, three_body_naive_matrix};
use obe_core::reproduce;
use obe_core::solver::optimize_scale;
use obe_core::ObeError;

const QMAX_GUARD: u32 = 40;

#[derive(Parser)]
#[command(name = "obe", version, about = "Oscillator-basis variational solver for three-body bound states")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build and store the coefficient tables.
    Precompute {
        #[arg(long)]
        qmax: u32,
        #[arg(long)]
        out: PathBuf,
        /// Overwrite an existing file.
        #[arg(long)]
        force: bool,
        /// Allow qmax above 40.
        #[arg(long)]
        allow_large: bool,
    },
    /// Solve one sector described by a TOML config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Coefficient cache; overrides tables.path in the config.
        #[arg(long)]
        tables: Option<PathBuf>,
        /// Result file; overrides output.path in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute a reference table and compare.
    Reproduce {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=5))]
        table: u32,
        #[arg(long)]
        tables: PathBuf,
    },
    /// Time three-body matrix assembly through both routes.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        qmax_list: Vec<u32>,
        /// Write the CSV here as well as to standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Tolerance(String),
    Error(ObeError),
}

impl From<ObeError> for Failure {
    fn from(e: ObeError) -> Self {
        Failure::Error(e)
    }
}

fn exit_code(e: &ObeError) -> u8 {
    match e {
        ObeError::Config(_) | ObeError::Domain(_) | ObeError::Optimizer(_) => 2,
        ObeError::Io { .. } | ObeError::Table(_) | ObeError::MissingCoefficients(_) => 3,
        ObeError::Quadrature(_) | ObeError::Eigen(_) | ObeError::Symmetry(_) => 1,
    }
}

/// x with 12 significant digits.
fn sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-5..12).contains(&mag) {
        format!("{:.*}", (11 - mag).max(0) as usize, x)
    } else {
        format!("{x:.11e}")
    }
}

fn load_installed(path: &Path) -> Result<CoefficientTables, ObeError> {
    let t = load_tables(path)?;
    t.install();
    Ok(t)
}

fn precompute(qmax: u32, out: &Path, force: bool, allow_large: bool) -> Result<(), Failure> {
    if qmax > QMAX_GUARD && !allow_large {
        return Err(ObeError::config(format!("qmax {qmax} exceeds {QMAX_GUARD}; pass --allow-large to proceed")).into());
    }
    if out.exists() && !force {
        return Err(ObeError::config(format!("{} exists; pass --force to overwrite", out.display())).into());
    }
    let t0 = Instant::now();
    let tables = CoefficientTables::build(qmax);
    let residual = tables.hyper.max_normalization_residual();
    println!("channels           {}", tables.hyper.entries.len());
    println!("hyper coefficients {}", tables.hyper.record_count());
    println!("talmi weights      {}", tables.b_record_count());
    println!("max |sum c^2 - 1|  {residual:.3e}");
    if residual > 1e-8 {
        return Err(ObeError::domain(format!("normalization residual {residual:e} exceeds 1e-8; nothing written")).into());
    }
    save_tables(&tables, out)?;
    println!("wrote {} in {:.2} s (sha256 {})", out.display(), t0.elapsed().as_secs_f64(), tables.checksum());
    Ok(())
}

fn solve(config: &Path, tables: Option<PathBuf>, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = RunConfig::load(config)?;
    let system = cfg.system()?;
    let sector = cfg.sector()?;
    let protocol = cfg.protocol()?;
    let tpath = tables
        .or_else(|| cfg.tables.path.clone())
        .ok_or_else(|| ObeError::config("no coefficient cache: pass --tables or set tables.path"))?;
    let t = load_installed(&tpath)?;
    if t.qmax < sector.qmax {
        return Err(ObeError::MissingCoefficients(format!(
            "cache {} covers Q <= {} but basis.qmax = {}; rerun precompute with a larger --qmax",
            tpath.display(),
            t.qmax,
            sector.qmax
        ))
        .into());
    }
    let r = optimize_scale(&system, &sector, &protocol, &t, cfg.output.states)?;
    let status = if r.basis_size == 0 { "empty sector" } else { "ok" };
    let doc = json!({
        "status": status,
        "config_hash": cfg.hash(),
        "cache_checksum": t.checksum(),
        "config": cfg,
        "result": r,
    });
    let text = serde_json::to_string_pretty(&doc).expect("result serializes") + "\n";
    if let Some(path) = out.or_else(|| cfg.output.path.clone()) {
        std::fs::write(&path, &text).map_err(|e| ObeError::io(&path, e))?;
    }
    println!("L={} parity={:+} Q_max={} basis={} a={} b={}", sector.l, sector.parity, sector.qmax, r.basis_size, sig12(r.a_star), sig12(r.b_star));
    if r.basis_size == 0 {
        println!("empty sector: no states");
    }
    println!("{:>4}  {:>20}  {:>20}", "n", "E", "<r12>");
    for (i, e) in r.eigenvalues.iter().enumerate() {
        println!("{:>4}  {:>20}  {:>20}", i, sig12(*e), sig12(r.observables["mean_r12"][i]));
    }
    Ok(())
}

fn reproduce_table(n: u32, tables: &Path) -> Result<(), Failure> {
    let t = load_installed(tables)?;
    let rows = reproduce::table(n, &t)?;
    println!("{:<24} {:>20} {:>20} {:>12} {:>10}  ok", "quantity", "computed", "reference", "|diff|", "tol");
    let mut failed = Vec::new();
    for r in &rows {
        let ok = r.passes();
        println!(
            "{:<24} {:>20} {:>20} {:>12.3e} {:>10.1e}  {}",
            r.label,
            sig12(r.computed),
            sig12(r.reference),
            r.diff(),
            r.tolerance,
            if ok { "yes" } else { "NO" }
        );
        if !ok {
            failed.push(r.label.clone());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Tolerance(format!("outside tolerance: {}", failed.join(", "))))
    }
}

/// Least-squares slope of ln y against ln x.
fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn benchmark(config: &Path, qs: &[u32], out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = RunConfig::load(config)?;
    let system = cfg.system()?;
    if system.three_body.is_empty() {
        return Err(ObeError::config("benchmark needs a system with a three-body force").into());
    }
    let qmax = qs.iter().copied().max().unwrap_or(0);
    let t = CoefficientTables {
        qmax,
        hyper: obe_core::coeffs::HyperTable::build(qmax),
        b: Default::default(),
    };
    let s = cfg.protocol()?.scales(cfg.variational.a.unwrap_or(1.0));
    let mut csv = String::from("qmax,channels,hyper_seconds,naive_seconds,speedup\n");
    let (mut qv, mut th, mut tn) = (vec![], vec![], vec![]);
    for &q in qs {
        let sector = obe_core::basis::SectorSpec { qmax: q, ..cfg.sector()? };
        let channels = enumerate_channels(&sector);
        let t0 = Instant::now();
        let h = three_body_hyper_matrix(&channels, &system.three_body, &system, &s, &t.hyper)?;
        let hyper = t0.elapsed().as_secs_f64();
        let t1 = Instant::now();
        let m = three_body_naive_matrix(&channels, &system.three_body, &s)?;
        let naive = t1.elapsed().as_secs_f64();
        std::hint::black_box((h, m));
        writeln!(csv, "{q},{},{hyper:.6e},{naive:.6e},{:.3}", channels.len(), naive / hyper).expect("write to string");
        qv.push(q as f64);
        th.push(hyper);
        tn.push(naive);
    }
    print!("{csv}");
    let fmt = |s: Option<f64>| s.map_or("n/a".to_string(), |v| format!("{v:.2}"));
    println!("# log-log slope vs qmax: hyper {}, naive {}", fmt(loglog_slope(&qv, &th)), fmt(loglog_slope(&qv, &tn)));
    if let Some(path) = out {
        std::fs::write(&path, &csv).map_err(|e| ObeError::io(&path, e))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Precompute { qmax, out, force, allow_large } => precompute(qmax, &out, force, allow_large),
        Cmd::Solve { config, tables, out } => solve(&config, tables, out),
        Cmd::Reproduce { table, tables } => reproduce_table(table, &tables),
        Cmd::Benchmark { config, qmax_list, out } => benchmark(&config, &qmax_list, out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Tolerance(msg)) => {
            eprintln!("obe: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Error(e)) => {
            eprintln!("obe: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig12(-1.7398309377960939), "-1.73983093780");
        assert_eq!(sig12(17.400248417869587), "17.4002484179");
        assert_eq!(sig12(1e-9), "1.00000000000e-9");
    }

    #[test]
    fn slope_of_power_law() {
        let x = [2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(3.2)).collect();
        assert!((loglog_slope(&x, &y).unwrap() - 3.2).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_none());
    }
}
