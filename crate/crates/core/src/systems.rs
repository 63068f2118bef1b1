//! Built-in model systems used by the reproduction and benchmark commands.

use crate::matel::{Kinematics, SystemConfig};
use crate::talmi::RadialKernel;

pub const BUILTIN_NAMES: [&str; 5] = ["gauss3b", "coulomb3b", "coulomb-linear", "helium-trimer", "bench-linear3b"];

fn bosons(mass: f64, pair: Vec<RadialKernel>, three_body: Vec<RadialKernel>) -> SystemConfig {
    SystemConfig {
        masses: [mass; 3],
        kinematics: Kinematics::Nonrelativistic,
        v12: pair.clone(),
        v13: pair.clone(),
        v23: pair,
        three_body,
    }
}

/// Named system, or `None` for an unknown name.
pub fn builtin(name: &str) -> Option<SystemConfig> {
    let cfg = match name {
        // attractive hyperradial Gaussian
        "gauss3b" => bosons(
            1.0,
            vec![],
            vec![RadialKernel::Gaussian {
                alpha: -(3f64.powf(4.0 / 3.0)),
                beta: 1.0 / 27.0,
            }],
        ),
        // hyperradial Coulomb, W = −3/ρ
        "coulomb3b" => bosons(1.0, vec![], vec![RadialKernel::Power { alpha: -3.0, beta: -1.0 }]),
        // pairwise Coulomb plus linear hyperradial confinement
        "coulomb-linear" => bosons(
            1.0,
            vec![RadialKernel::Power { alpha: -1.0, beta: -1.0 }],
            vec![RadialKernel::Power { alpha: 0.5, beta: 1.0 }],
        ),
        // energies in K, lengths in bohr
        "helium-trimer" => bosons(
            0.0231048,
            vec![RadialKernel::Gaussian {
                alpha: -1.227,
                beta: 1.0 / (10.03 * 10.03),
            }],
            vec![RadialKernel::Gaussian {
                alpha: 0.279,
                beta: 1.0 / (13.85 * 13.85),
            }],
        ),
        "bench-linear3b" => bosons(1.0, vec![], vec![RadialKernel::Power { alpha: 0.5, beta: 1.0 }]),
        _ => return None,
    };
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_names_resolve_and_validate() {
        for n in BUILTIN_NAMES {
            builtin(n).unwrap().validate().unwrap();
        }
        assert!(builtin("nope").is_none());
    }
}
