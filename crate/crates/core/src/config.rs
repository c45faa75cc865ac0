//! Run configuration: a single TOML document (plus a few CLI flag
//! overrides) fully determines every command's behavior, so experiments can
//! be checked in and reproduced byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ensemble::WeightGrid;
use crate::error::{Error, Result};
use crate::linear::LogRegHyper;
use crate::neighbors::VoteRule;
use crate::preprocess::GcnParams;

/// A preprocessing stage name, applied in the order listed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Gcn,
    Zca,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PreprocessConfig {
    /// Ordered subset of `["gcn", "zca"]`.
    pub stages: Vec<Stage>,
    pub gcn_scale: f64,
    pub gcn_lambda: f64,
    pub gcn_epsilon: f64,
    pub zca_epsilon: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        let gcn = GcnParams::default();
        PreprocessConfig {
            stages: Vec::new(),
            gcn_scale: gcn.scale,
            gcn_lambda: gcn.lambda,
            gcn_epsilon: gcn.epsilon,
            zca_epsilon: 1e-2,
        }
    }
}

impl PreprocessConfig {
    pub fn gcn_params(&self) -> GcnParams {
        GcnParams { scale: self.gcn_scale, lambda: self.gcn_lambda, epsilon: self.gcn_epsilon }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PcaConfig {
    pub enabled: bool,
    pub components: usize,
}

impl Default for PcaConfig {
    fn default() -> Self {
        PcaConfig { enabled: true, components: 30 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteKind {
    Uniform,
    InverseDistance,
}

impl From<VoteKind> for VoteRule {
    fn from(kind: VoteKind) -> VoteRule {
        match kind {
            VoteKind::Uniform => VoteRule::Uniform,
            VoteKind::InverseDistance => VoteRule::InverseDistance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KnnConfig {
    pub k: usize,
    pub vote: VoteKind,
}

impl Default for KnnConfig {
    fn default() -> Self {
        KnnConfig { k: 10, vote: VoteKind::Uniform }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LogRegConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub l2: f64,
    pub standardize: bool,
}

impl Default for LogRegConfig {
    fn default() -> Self {
        let h = LogRegHyper::default();
        LogRegConfig {
            learning_rate: h.learning_rate,
            epochs: h.epochs,
            batch_size: h.batch_size,
            l2: h.l2,
            standardize: h.standardize,
        }
    }
}

impl LogRegConfig {
    pub fn hyper(&self, seed: u64) -> LogRegHyper {
        LogRegHyper {
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            l2: self.l2,
            standardize: self.standardize,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub grid_step: f64,
    pub max_weight: f64,
    /// Fraction of the labeled evaluation set held out for the weight
    /// search; the remainder is the reporting side.
    pub search_split: f64,
    /// Expert score files, fused in list order.
    pub experts: Vec<PathBuf>,
    /// Append a freshly computed KNN expert after the listed files.
    pub include_knn: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            grid_step: 0.05,
            max_weight: 1.0,
            search_split: 0.5,
            experts: Vec::new(),
            include_knn: false,
        }
    }
}

impl EnsembleConfig {
    pub fn grid(&self) -> Result<WeightGrid> {
        WeightGrid::new(self.grid_step, self.max_weight)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub preprocess: PreprocessConfig,
    pub pca: PcaConfig,
    pub knn: KnnConfig,
    pub logreg: LogRegConfig,
    pub ensemble: EnsembleConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            data_dir: PathBuf::from("data/cifar-10-batches-bin"),
            output_dir: PathBuf::from("out"),
            seed: 0,
            preprocess: PreprocessConfig::default(),
            pca: PcaConfig::default(),
            knn: KnnConfig::default(),
            logreg: LogRegConfig::default(),
            ensemble: EnsembleConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<RunConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: RunConfig = toml::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// The fully resolved configuration as TOML, embedded verbatim in every
    /// report so runs are auditable.
    pub fn resolved_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.preprocess.gcn_params().validate()?;
        if !(self.preprocess.zca_epsilon.is_finite() && self.preprocess.zca_epsilon >= 0.0) {
            return Err(Error::Config(format!(
                "zca_epsilon {} must be a finite non-negative number",
                self.preprocess.zca_epsilon
            )));
        }
        if self.pca.enabled && self.pca.components == 0 {
            return Err(Error::Config("pca.components must be at least 1".into()));
        }
        if self.knn.k == 0 {
            return Err(Error::Config("knn.k must be at least 1".into()));
        }
        self.logreg.hyper(self.seed).validate()?;
        self.ensemble.grid()?;
        if !(self.ensemble.search_split > 0.0 && self.ensemble.search_split < 1.0) {
            return Err(Error::Config(format!(
                "ensemble.search_split {} must be strictly between 0 and 1",
                self.ensemble.search_split
            )));
        }
        Ok(())
    }
}
