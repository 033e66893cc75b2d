use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{HogConfig, PartitionSpec, Regime};
use crate::error::{Error, Result};
use crate::netsim::Encoding;
use crate::proto::{DynamicConfig, MaliceMode, MaliciousConfig, ProtocolConfig, ProtocolKind};

/// Environment variables that override dataset paths from the config file.
pub const ENV_MNIST_DIR: &str = "GTL_MNIST_DIR";
pub const ENV_HAPT_DIR: &str = "GTL_HAPT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Mnist,
    Hapt,
    Synth,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSpec {
    pub classes: usize,
    pub dim: usize,
    pub per_class: usize,
    pub separation: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self {
            classes: 4,
            dim: 48,
            per_class: 150,
            separation: 2.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DatasetConfig {
    pub kind: DatasetKind,
    /// Directory holding the dataset files (MNIST IDX or HAPT text layout).
    pub path: Option<PathBuf>,
    /// Keep this many samples of the pool, drawn before the holdout.
    pub subsample: Option<usize>,
    /// HOG descriptor applied to MNIST images.
    pub hog: HogConfig,
    /// Dimensionality of one raw record, for the "vs raw data" gain column.
    pub raw_dim: Option<usize>,
    pub synth: SynthSpec,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            kind: DatasetKind::Synth,
            path: None,
            subsample: None,
            hog: HogConfig::default(),
            raw_dim: None,
            synth: SynthSpec::default(),
        }
    }
}

impl DatasetConfig {
    fn mnist(path: PathBuf, subsample: Option<usize>) -> Self {
        Self {
            kind: DatasetKind::Mnist,
            path: Some(path),
            subsample,
            raw_dim: Some(784),
            ..Self::default()
        }
    }

    fn hapt(path: PathBuf) -> Self {
        Self {
            kind: DatasetKind::Hapt,
            path: Some(path),
            // 2.56 s windows at 50 Hz: 128 samples of the nine inertial
            // channels (body and total acceleration, angular velocity)
            raw_dim: Some(1152),
            ..Self::default()
        }
    }

    /// Replaces the path with the matching environment variable, if set.
    pub fn apply_env(&mut self) {
        let var = match self.kind {
            DatasetKind::Mnist => ENV_MNIST_DIR,
            DatasetKind::Hapt => ENV_HAPT_DIR,
            DatasetKind::Synth => return,
        };
        if let Some(v) = std::env::var_os(var).filter(|v| !v.is_empty()) {
            self.path = Some(PathBuf::from(v));
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            DatasetKind::Synth => {
                let s = &self.synth;
                if s.classes < 2 || s.dim < 2 || s.per_class == 0 {
                    return Err(Error::config(
                        "synth dataset needs classes >= 2, dim >= 2, per_class >= 1",
                    ));
                }
            }
            DatasetKind::Mnist | DatasetKind::Hapt => {
                let path = self.path.as_deref().ok_or_else(|| {
                    Error::config(format!("{:?} dataset needs a path", self.kind))
                })?;
                if !path.is_dir() {
                    return Err(Error::config(format!(
                        "dataset directory {} does not exist",
                        path.display()
                    )));
                }
            }
        }
        if self.subsample == Some(0) {
            return Err(Error::config("subsample must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    NumAggregators,
    MaliciousFraction,
    CorruptionProbability,
    Locations,
    Alpha,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::NumAggregators => "num_aggregators",
            SweepAxis::MaliciousFraction => "malicious_fraction",
            SweepAxis::CorruptionProbability => "corruption_probability",
            SweepAxis::Locations => "locations",
            SweepAxis::Alpha => "alpha",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            SweepAxis::NumAggregators,
            SweepAxis::MaliciousFraction,
            SweepAxis::CorruptionProbability,
            SweepAxis::Locations,
            SweepAxis::Alpha,
        ]
        .into_iter()
        .find(|a| a.as_str() == s)
        .ok_or_else(|| Error::config(format!("unknown sweep axis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub dataset: DatasetConfig,
    /// Location split of the training pool. Ignored for HAPT, whose
    /// locations are its users; the seed is replaced per run.
    pub partition: PartitionSpec,
    pub holdout_ratio: f64,
    pub runs: usize,
    /// Run `i` uses seed `base_seed + i`.
    pub base_seed: u64,
    pub protocols: Vec<ProtocolKind>,
    /// Also train the centralised baseline.
    pub cloud: bool,
    pub protocol: ProtocolConfig,
    /// When set, every static protocol is also run under this attack.
    pub malicious: Option<MaliciousConfig>,
    /// Stream settings for the dynamic procedures.
    pub dynamic: Option<DynamicConfig>,
    pub sweep: Option<SweepSpec>,
    pub encoding: Encoding,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            dataset: DatasetConfig::default(),
            partition: PartitionSpec::default(),
            holdout_ratio: 0.3,
            runs: 10,
            base_seed: 0,
            protocols: vec![
                ProtocolKind::Gtl,
                ProtocolKind::NohtlMu,
                ProtocolKind::NohtlMv,
            ],
            cloud: true,
            protocol: ProtocolConfig::default(),
            malicious: None,
            dynamic: None,
            sweep: None,
            encoding: Encoding::default(),
            output: PathBuf::from("out"),
        }
    }
}

/// Names accepted by [`ExperimentConfig::preset`].
pub const PRESETS: &[&str] = &[
    "synthetic",
    "mnist-balanced",
    "mnist-class-unbalance",
    "mnist-node-unbalance",
    "mnist-malicious",
    "mnist-dynamic",
    "hapt",
    "hapt-malicious",
    "hapt-dynamic",
    "mnist-full-balanced",
    "mnist-full-class-unbalance",
    "mnist-full-node-unbalance",
];

/// Training pool size of the desk-scale MNIST presets.
pub const DESK_TRAIN: usize = 3000;
/// Test set size of the desk-scale MNIST presets.
pub const DESK_TEST: usize = 900;

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(e.to_string()))
    }

    pub fn run_seed(&self, run: usize) -> u64 {
        self.base_seed.wrapping_add(run as u64)
    }

    /// Built-in scenario configurations. Dataset paths default to the
    /// bundled MNIST subset and `data/hapt`, and honour the environment
    /// overrides.
    pub fn preset(name: &str) -> Result<Self> {
        let mnist_dir = PathBuf::from("data/mnist-5k");
        let desk = |regime: Regime| {
            let mut c = Self {
                name: name.to_string(),
                dataset: DatasetConfig::mnist(mnist_dir.clone(), Some(DESK_TRAIN + DESK_TEST)),
                holdout_ratio: DESK_TEST as f64 / (DESK_TRAIN + DESK_TEST) as f64,
                runs: 3,
                ..Self::default()
            };
            c.partition.regime = regime;
            c.partition.num_locations = 10;
            c
        };
        let full = |regime: Regime| {
            let mut c = Self {
                name: name.to_string(),
                dataset: DatasetConfig::mnist(PathBuf::from("data/mnist"), None),
                ..Self::default()
            };
            c.partition.regime = regime;
            c.partition.num_locations = 30;
            c
        };
        let hapt = || Self {
            name: name.to_string(),
            dataset: DatasetConfig::hapt(PathBuf::from("data/hapt")),
            protocols: vec![
                ProtocolKind::Gtl,
                ProtocolKind::NohtlMu,
                ProtocolKind::NohtlMv,
            ],
            ..Self::default()
        };
        let malice = MaliciousConfig {
            mode: MaliceMode::Malicious1,
            node_fraction: 0.75,
            ..MaliciousConfig::default()
        };
        let mut config = match name {
            "synthetic" => {
                let mut c = Self {
                    name: name.into(),
                    runs: 2,
                    protocols: vec![
                        ProtocolKind::Gtl,
                        ProtocolKind::NohtlMu,
                        ProtocolKind::NohtlMv,
                        ProtocolKind::GtlLimited,
                    ],
                    ..Self::default()
                };
                c.partition.num_locations = 6;
                c.partition.regime = Regime::ClassUnbalance;
                c.partition.underrepresented_classes = vec![2, 4];
                c.partition.depletion_keep = 0.2;
                c.protocol.num_aggregators = Some(2);
                c.protocol.greedy.kappa = 8;
                c.protocol.greedy.bag_size = 30;
                c
            }
            "mnist-balanced" => desk(Regime::Balanced),
            "mnist-class-unbalance" => desk(Regime::ClassUnbalance),
            "mnist-node-unbalance" => desk(Regime::NodeUnbalance),
            "mnist-malicious" => Self {
                malicious: Some(malice.clone()),
                protocols: vec![ProtocolKind::Gtl, ProtocolKind::NohtlMu],
                cloud: false,
                ..desk(Regime::Balanced)
            },
            "mnist-dynamic" => Self {
                protocols: vec![
                    ProtocolKind::NohtlMu,
                    ProtocolKind::DynGtl,
                    ProtocolKind::DynNohtl,
                ],
                dynamic: Some(DynamicConfig::default()),
                cloud: false,
                ..desk(Regime::Balanced)
            },
            "hapt" => hapt(),
            "hapt-malicious" => Self {
                malicious: Some(malice),
                protocols: vec![ProtocolKind::Gtl, ProtocolKind::NohtlMu],
                cloud: false,
                ..hapt()
            },
            "hapt-dynamic" => Self {
                protocols: vec![
                    ProtocolKind::NohtlMu,
                    ProtocolKind::DynGtl,
                    ProtocolKind::DynNohtl,
                ],
                dynamic: Some(DynamicConfig::default()),
                cloud: false,
                ..hapt()
            },
            "mnist-full-balanced" => full(Regime::Balanced),
            "mnist-full-class-unbalance" => full(Regime::ClassUnbalance),
            "mnist-full-node-unbalance" => full(Regime::NodeUnbalance),
            other => {
                return Err(Error::config(format!(
                    "unknown preset {other:?}; known presets: {}",
                    PRESETS.join(", ")
                )))
            }
        };
        config.output = PathBuf::from("out").join(name);
        config.dataset.apply_env();
        Ok(config)
    }

    /// Checks everything that can be checked without loading data.
    pub fn validate(&self) -> Result<()> {
        self.dataset.validate()?;
        if self.dataset.kind != DatasetKind::Hapt {
            self.partition.validate()?;
            if self.partition.num_locations < 2 {
                return Err(Error::config("at least two locations are needed"));
            }
            self.protocol.validate(self.partition.num_locations)?;
        } else {
            self.protocol.svm.validate()?;
            self.protocol.greedy.validate()?;
        }
        if !(self.holdout_ratio > 0.0 && self.holdout_ratio < 1.0) {
            return Err(Error::config(format!(
                "holdout_ratio {} outside (0, 1)",
                self.holdout_ratio
            )));
        }
        if self.runs == 0 {
            return Err(Error::config("runs must be positive"));
        }
        if self.protocols.is_empty() && !self.cloud {
            return Err(Error::config(
                "nothing to run: no protocols and no cloud baseline",
            ));
        }
        if let Some(m) = &self.malicious {
            m.validate()?;
        }
        if let Some(d) = &self.dynamic {
            d.validate()?;
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(Error::config("sweep axis has no values"));
            }
        }
        Ok(())
    }

    /// Copy of the config with one sweep value applied.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Self> {
        let count = || {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::config(format!(
                    "{} needs positive integers, got {value}",
                    axis.as_str()
                )))
            }
        };
        let mut c = self.clone();
        c.sweep = None;
        match axis {
            SweepAxis::NumAggregators => {
                c.protocol.num_aggregators = Some(count()?);
                if !c.protocols.contains(&ProtocolKind::GtlLimited) {
                    c.protocols.push(ProtocolKind::GtlLimited);
                }
            }
            SweepAxis::MaliciousFraction => {
                let m = c.malicious.get_or_insert_with(MaliciousConfig::default);
                m.mode = MaliceMode::Malicious1;
                m.node_fraction = value;
            }
            SweepAxis::CorruptionProbability => {
                let m = c.malicious.get_or_insert_with(MaliciousConfig::default);
                m.mode = MaliceMode::Malicious2;
                m.param_probability = value;
            }
            SweepAxis::Locations => c.partition.num_locations = count()?,
            SweepAxis::Alpha => c.dynamic.get_or_insert_with(DynamicConfig::default).alpha = value,
        }
        Ok(c)
    }
}
