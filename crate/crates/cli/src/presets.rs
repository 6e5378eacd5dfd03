//! Configs shipped with the binary.

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "verify-example",
        description: "g × cat on T³: all three splittings, every analysis, verdicts enforced",
        source: include_str!("../presets/verify-example.toml"),
    },
    Preset {
        name: "cat-map",
        description: "cat map on T² with its stable/unstable splitting (dominated)",
        source: include_str!("../presets/cat-map.toml"),
    },
    Preset {
        name: "rotation-golden",
        description: "rotation of T² by ((√5−1)/2, √2−1): ratio ≡ 1, dense orbits",
        source: include_str!("../presets/rotation-golden.toml"),
    },
    Preset {
        name: "rotation-rational",
        description: "rotation of T² by (1/4, 1/3): ratio ≡ 1, periodic orbits",
        source: include_str!("../presets/rotation-rational.toml"),
    },
    Preset {
        name: "modified-example",
        description: "g × cat with g'(1/2) lowered to 2: the first splitting becomes dominated",
        source: include_str!("../presets/modified-example.toml"),
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| CliError::UnknownPreset(name.to_string()))
}

pub fn load(name: &str) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_str(find(name)?.source)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_prepares() {
        for p in PRESETS {
            let c = load(p.name).unwrap();
            assert_eq!(c.name.as_deref(), Some(p.name));
            c.prepare().unwrap_or_else(|e| panic!("{}: {e}", p.name));
        }
        assert!(matches!(load("nope"), Err(CliError::UnknownPreset(_))));
    }
}
