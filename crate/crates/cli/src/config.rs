//! Run configuration files (JSON).

use std::fs;
use std::path::{Path, PathBuf};

use goodwin_core::simulation::SimConfig;
use goodwin_core::{nondimensionalize, CouplingTopology, DimensionalParams, GoodwinParams};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Largest number of grid points a sweep may request.
pub const MAX_SWEEP_POINTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub p: Option<f64>,
    /// Dimensionless degradation rates `[b1, b2, b3]`.
    #[serde(default)]
    pub b: Option<[f64; 3]>,
    #[serde(default)]
    pub dimensional: Option<DimensionalBlock>,
    #[serde(default)]
    pub coupling: Option<CouplingSpec>,
    #[serde(default)]
    pub sim: SimConfig,
    /// Output directory.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionalBlock {
    pub v0: f64,
    pub v1: f64,
    pub v2: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    #[serde(rename = "Km", alias = "km")]
    pub km: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CouplingSpec {
    Matrix { weights: Vec<Vec<f64>> },
    Table1,
    Complete { n: usize, weight: f64 },
    Ring { n: usize, weight: f64 },
}

impl CouplingSpec {
    pub fn build(&self) -> Result<CouplingTopology, CliError> {
        Ok(match self {
            Self::Matrix { weights } => CouplingTopology::from_rows(weights)?,
            Self::Table1 => CouplingTopology::table1(),
            Self::Complete { n, weight } => CouplingTopology::complete(*n, *weight)?,
            Self::Ring { n, weight } => CouplingTopology::ring(*n, *weight)?,
        })
    }
}

/// Grid axes. An omitted axis holds the base value fixed; an axis given as
/// an empty list makes the whole grid empty.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Uniform degradation rates `b1 = b2 = b3 = b`.
    #[serde(default)]
    pub b: Option<Vec<f64>>,
    #[serde(default)]
    pub p: Option<Vec<f64>>,
    #[serde(default)]
    pub coupling_scale: Option<Vec<f64>>,
}

/// A configuration file together with the SHA-256 of its bytes.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
}

pub fn load(path: &Path) -> Result<LoadedConfig, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config = serde_json::from_slice(&bytes)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    Ok(LoadedConfig {
        config,
        hash: sha256_hex(&bytes),
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Command-line overrides of the `sim` block.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimOverrides {
    pub seed: Option<u64>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
}

impl SimOverrides {
    pub fn apply(&self, mut sim: SimConfig) -> Result<SimConfig, CliError> {
        if let Some(s) = self.seed {
            sim.seed = s;
        }
        if let Some(dt) = self.dt {
            sim.dt = dt;
        }
        if let Some(t) = self.t_end {
            sim.t_end = t;
        }
        sim.validate()?;
        Ok(sim)
    }
}

impl RunConfig {
    /// Parameters from whichever block is present; exactly one is required.
    pub fn params(&self) -> Result<GoodwinParams, CliError> {
        match (self.b, self.dimensional) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "give either `b` or `dimensional`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "no parameter block: expected `b` or `dimensional`".into(),
                ))
            }
            _ => {}
        }
        let p = self
            .p
            .ok_or_else(|| CliError::Config("missing Hill coefficient `p`".into()))?;
        match (self.b, self.dimensional) {
            (Some([b1, b2, b3]), None) => Ok(GoodwinParams::new(b1, b2, b3, p)?),
            (None, Some(d)) => Ok(nondimensionalize(&DimensionalParams {
                v0: d.v0,
                v1: d.v1,
                v2: d.v2,
                k1: d.k1,
                k2: d.k2,
                k3: d.k3,
                km: d.km,
                p,
            })?),
            _ => unreachable!("exactly one block checked above"),
        }
    }

    pub fn topology(&self) -> Result<CouplingTopology, CliError> {
        self.coupling
            .as_ref()
            .ok_or_else(|| CliError::Config("missing `coupling` block".into()))?
            .build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> RunConfig {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn exactly_one_parameter_block() {
        let both = parse(
            r#"{"p": 2, "b": [1, 1, 1],
                "dimensional": {"v0": 1, "v1": 1, "v2": 1, "k1": 1, "k2": 1, "k3": 1, "Km": 1}}"#,
        );
        assert!(both.params().unwrap_err().to_string().contains("not both"));
        let none = parse(r#"{"p": 2}"#);
        assert!(none
            .params()
            .unwrap_err()
            .to_string()
            .contains("no parameter block"));
        let no_p = parse(r#"{"b": [1, 1, 1]}"#);
        assert!(no_p.params().unwrap_err().to_string().contains("`p`"));
        assert_eq!(
            parse(r#"{"p": 2, "b": [1, 2, 3]}"#)
                .params()
                .unwrap()
                .rates(),
            [1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn coupling_kinds() {
        let c = parse(r#"{"coupling": {"kind": "ring", "n": 5, "weight": 0.1}}"#);
        assert_eq!(c.topology().unwrap().n(), 5);
        let c = parse(r#"{"coupling": {"kind": "table1"}}"#);
        assert_eq!(c.topology().unwrap().n(), 9);
        assert!(serde_json::from_str::<RunConfig>(r#"{"coupling": {"kind": "star"}}"#).is_err());
    }

    #[test]
    fn overrides_replace_and_validate() {
        let o = SimOverrides {
            seed: Some(3),
            dt: Some(0.005),
            t_end: None,
        };
        let s = o.apply(SimConfig::default()).unwrap();
        assert_eq!((s.seed, s.dt, s.t_end), (3, 0.005, 500.0));
        let bad = SimOverrides {
            t_end: Some(0.01),
            ..o
        };
        assert!(matches!(
            bad.apply(SimConfig::default()),
            Err(CliError::Config(_))
        ));
    }

    #[test]
    fn hash_is_sha256() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
