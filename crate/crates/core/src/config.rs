//! TOML run configuration.
//!
//! ```toml
//! [system]
//! builtin = "gauss3b"            # or masses/kinematics/potentials/three_body
//!
//! [sector]
//! l = 0
//! parity = 1
//! symmetry = "three_identical"   # none | two_identical | three_identical
//! sigma = 1
//!
//! [basis]
//! qmax = 24
//!
//! [variational]
//! mode = "fixed_a"               # fixed_a | scan | golden_section
//! a = 1.6365
//!
//! [output]
//! states = 3
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{Exchange, SectorSpec};
use crate::error::{ObeError, Result};
use crate::matel::{Kinematics, SystemConfig};
use crate::solver::{ScaleMode, VariationalProtocol};
use crate::systems;
use crate::talmi::RadialKernel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum KernelSpec {
    /// α x^β
    Power { alpha: f64, beta: f64 },
    /// α e^{−β x²}
    Gaussian { alpha: f64, beta: f64 },
}

impl From<&KernelSpec> for RadialKernel {
    fn from(k: &KernelSpec) -> Self {
        match *k {
            KernelSpec::Power { alpha, beta } => RadialKernel::Power { alpha, beta },
            KernelSpec::Gaussian { alpha, beta } => RadialKernel::Gaussian { alpha, beta },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// Any of "12", "13", "23"; empty means all three pairs.
    #[serde(default)]
    pub pairs: Vec<String>,
    pub kernel: KernelSpec,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub builtin: Option<String>,
    pub masses: Option<[f64; 3]>,
    pub kinematics: Option<Kinematics>,
    #[serde(default)]
    pub potentials: Vec<PotentialSpec>,
    #[serde(default)]
    pub three_body: Vec<KernelSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    None,
    TwoIdentical,
    ThreeIdentical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectorSection {
    pub l: u32,
    pub parity: i8,
    pub symmetry: Symmetry,
    pub sigma: Option<i8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    pub qmax: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalSection {
    pub mode: Option<ScaleMode>,
    pub a: Option<f64>,
    pub a_range: Option<(f64, f64)>,
    pub optimize_at_q: Option<u32>,
    pub target: Option<usize>,
    pub tolerance: Option<f64>,
    pub scan_points: Option<usize>,
    pub b: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_format")]
    pub format: String,
    pub path: Option<PathBuf>,
    #[serde(default = "default_states")]
    pub states: usize,
}

fn default_format() -> String {
    "json".into()
}

fn default_states() -> usize {
    3
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            format: default_format(),
            path: None,
            states: default_states(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TablesSection {
    pub path: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSection,
    pub sector: SectorSection,
    pub basis: BasisSection,
    #[serde(default)]
    pub variational: VariationalSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub tables: TablesSection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ObeError::config(e.message().trim()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ObeError::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Everything that can be checked without building tables.
    pub fn validate(&self) -> Result<()> {
        self.system()?.validate()?;
        self.sector()?.validate()?;
        let protocol = self.protocol()?;
        protocol.validate(self.basis.qmax)?;
        if protocol.b.is_some() && (!self.system()?.three_body.is_empty() || self.sector.symmetry == Symmetry::ThreeIdentical) {
            return Err(ObeError::config(
                "variational.b cannot be set with a three-body force or three identical particles (b is locked to √3 a/2)",
            ));
        }
        if self.output.format != "json" {
            return Err(ObeError::config(format!("output.format must be \"json\", got {:?}", self.output.format)));
        }
        Ok(())
    }

    pub fn system(&self) -> Result<SystemConfig> {
        let s = &self.system;
        if let Some(name) = &s.builtin {
            if s.masses.is_some() || s.kinematics.is_some() || !s.potentials.is_empty() || !s.three_body.is_empty() {
                return Err(ObeError::config("system.builtin cannot be combined with explicit system fields"));
            }
            return systems::builtin(name).ok_or_else(|| {
                ObeError::config(format!(
                    "unknown builtin system {name:?}; known: {}",
                    systems::BUILTIN_NAMES.join(", ")
                ))
            });
        }
        let masses = s.masses.ok_or_else(|| ObeError::config("system.masses is required without system.builtin"))?;
        let mut cfg = SystemConfig {
            masses,
            kinematics: s.kinematics.unwrap_or(Kinematics::Nonrelativistic),
            v12: vec![],
            v13: vec![],
            v23: vec![],
            three_body: s.three_body.iter().map(RadialKernel::from).collect(),
        };
        for p in &s.potentials {
            let pairs: Vec<&str> = if p.pairs.is_empty() {
                vec!["12", "13", "23"]
            } else {
                p.pairs.iter().map(String::as_str).collect()
            };
            for pair in pairs {
                let list = match pair {
                    "12" => &mut cfg.v12,
                    "13" => &mut cfg.v13,
                    "23" => &mut cfg.v23,
                    other => return Err(ObeError::config(format!("unknown pair {other:?}; use \"12\", \"13\" or \"23\""))),
                };
                list.push(RadialKernel::from(&p.kernel));
            }
        }
        Ok(cfg)
    }

    pub fn sector(&self) -> Result<SectorSpec> {
        let s = &self.sector;
        let sigma = || s.sigma.ok_or_else(|| ObeError::config("sector.sigma is required for identical particles"));
        let exchange = match s.symmetry {
            Symmetry::None => {
                if s.sigma.is_some() {
                    return Err(ObeError::config("sector.sigma given but symmetry is \"none\""));
                }
                Exchange::None
            }
            Symmetry::TwoIdentical => Exchange::TwoIdentical(sigma()?),
            Symmetry::ThreeIdentical => Exchange::ThreeIdentical(sigma()?),
        };
        Ok(SectorSpec {
            l: s.l,
            parity: s.parity,
            exchange,
            qmax: self.basis.qmax,
        })
    }

    pub fn protocol(&self) -> Result<VariationalProtocol> {
        let v = &self.variational;
        let d = VariationalProtocol::default();
        let mode = v.mode.unwrap_or(if v.a.is_some() { ScaleMode::FixedA } else { d.mode });
        Ok(VariationalProtocol {
            mode,
            a: v.a,
            a_range: v.a_range.unwrap_or(d.a_range),
            optimize_at_q: v.optimize_at_q.unwrap_or(d.optimize_at_q.min(self.basis.qmax)),
            target: v.target.unwrap_or(d.target),
            tolerance: v.tolerance.unwrap_or(d.tolerance),
            scan_points: v.scan_points.unwrap_or(d.scan_points),
            b: v.b,
        })
    }

    /// SHA-256 of the parsed configuration, insensitive to formatting.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(canonical.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
