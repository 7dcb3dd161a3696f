//! TOML experiment configuration.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use qsar_kernel_core::regression::{AnnealSchedule, BasisSpec};
use qsar_kernel_core::svm::SvmConfig;
use qsar_kernel_core::KernelConfig;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

const STAGE: &str = "config";

fn default_features() -> Vec<String> {
    ["n_donors", "n_acceptors", "rotatable_bonds", "mol_weight"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn default_true() -> bool {
    true
}

fn default_basis() -> BasisSpec {
    BasisSpec::Affine
}

/// What a regression row is fitted against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegTarget {
    /// `±1` class labels, thresholded at 0.
    #[default]
    Label,
    /// Raw pEC50, thresholded at the activity cutoff.
    Pec50,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    RegLs {
        name: String,
        #[serde(default = "default_basis")]
        basis: BasisSpec,
        #[serde(default)]
        ridge: f64,
        #[serde(default)]
        target: RegTarget,
    },
    RegAnneal {
        name: String,
        #[serde(default = "default_basis")]
        basis: BasisSpec,
        #[serde(default)]
        ridge: f64,
        #[serde(default)]
        target: RegTarget,
        #[serde(default)]
        schedule: AnnealSchedule,
    },
    Svm {
        name: String,
        kernel: KernelConfig,
        #[serde(default)]
        solver: SvmConfig,
        /// Added to the Gram diagonal before training.
        #[serde(default)]
        jitter: f64,
    },
}

impl ModelSpec {
    pub fn name(&self) -> &str {
        match self {
            ModelSpec::RegLs { name, .. }
            | ModelSpec::RegAnneal { name, .. }
            | ModelSpec::Svm { name, .. } => name,
        }
    }

    /// `c`, `q` or `c/q`: classical model, quantum optimizer, or classical
    /// SVM over a quantum kernel.
    pub fn type_tag(&self) -> &'static str {
        match self {
            ModelSpec::RegLs { .. } => "c",
            ModelSpec::RegAnneal { .. } => "q",
            ModelSpec::Svm { kernel, .. } if kernel.is_quantum() => "c/q",
            ModelSpec::Svm { .. } => "c",
        }
    }

    pub fn execution_tag(&self) -> &'static str {
        match self {
            ModelSpec::Svm {
                kernel: KernelConfig::QuantumShots { .. },
                ..
            } => "sim-shots",
            _ => "cpu-exact",
        }
    }

    pub fn kernel_description(&self) -> String {
        match self {
            ModelSpec::Svm { kernel, .. } => kernel.describe(),
            _ => "-".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Descriptor CSV, relative to the config file.
    pub input: PathBuf,
    pub seed: u64,
    /// Training fraction.
    pub split: f64,
    #[serde(default)]
    pub lipinski_filter: bool,
    /// pEC50 at or above which a compound is active. Needed whenever a row
    /// has no explicit label or a regression row targets pEC50.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub activity_cutoff: Option<f64>,
    #[serde(default = "default_features")]
    pub features: Vec<String>,
    #[serde(default = "default_true")]
    pub scaler: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pca_k: Option<usize>,
    /// Gram worker threads; 0 lets the runtime choose.
    #[serde(default)]
    pub workers: usize,
    pub models: Vec<ModelSpec>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(s: &str) -> AppResult<Self> {
        let cfg: Self = toml::from_str(s).map_err(|e| AppError::invalid(STAGE, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> AppResult<Self> {
        let s = fs::read_to_string(path).map_err(|e| AppError::io(STAGE, path, e))?;
        let mut cfg = Self::from_toml(&s)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn input_path(&self) -> PathBuf {
        match &self.base_dir {
            Some(b) if self.input.is_relative() => b.join(&self.input),
            _ => self.input.clone(),
        }
    }

    /// Feature dimension after preprocessing.
    pub fn feature_dim(&self) -> usize {
        self.pca_k.unwrap_or(self.features.len())
    }

    pub fn model(&self, name: &str) -> AppResult<&ModelSpec> {
        self.models
            .iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| AppError::invalid(STAGE, format!("no model named '{name}'")))
    }

    pub fn validate(&self) -> AppResult<()> {
        let bad = |m: String| Err(AppError::invalid(STAGE, m));
        if !(self.split > 0.0 && self.split < 1.0) {
            return bad(format!("split {} outside (0, 1)", self.split));
        }
        if self.features.is_empty() {
            return bad("feature list is empty".into());
        }
        if let Some(k) = self.pca_k {
            if k < 1 || k > self.features.len() {
                return bad(format!("pca_k {k} outside 1..={}", self.features.len()));
            }
        }
        if let Some(c) = self.activity_cutoff {
            if !c.is_finite() {
                return bad("activity_cutoff must be finite".into());
            }
        }
        if self.models.is_empty() {
            return bad("model list is empty".into());
        }
        let mut seen = HashSet::new();
        for m in &self.models {
            if !seen.insert(m.name()) {
                return bad(format!("duplicate model name '{}'", m.name()));
            }
            let ctx = |e: qsar_kernel_core::Error| AppError::invalid(STAGE, format!("{}: {e}", m.name()));
            match m {
                ModelSpec::RegLs { ridge, target, .. } | ModelSpec::RegAnneal { ridge, target, .. } => {
                    if !(*ridge >= 0.0 && ridge.is_finite()) {
                        return bad(format!("{}: ridge must be finite and ≥ 0", m.name()));
                    }
                    if *target == RegTarget::Pec50 && self.activity_cutoff.is_none() {
                        return bad(format!("{}: pec50 target needs activity_cutoff", m.name()));
                    }
                    if let ModelSpec::RegAnneal { schedule, .. } = m {
                        schedule.validate().map_err(ctx)?;
                    }
                }
                ModelSpec::Svm {
                    kernel,
                    solver,
                    jitter,
                    ..
                } => {
                    kernel.validate().map_err(ctx)?;
                    solver.validate().map_err(ctx)?;
                    if !(*jitter >= 0.0 && jitter.is_finite()) {
                        return bad(format!("{}: jitter must be finite and ≥ 0", m.name()));
                    }
                    if let Some(fm) = kernel.feature_map() {
                        if fm.n_qubits != self.feature_dim() {
                            return bad(format!(
                                "{}: feature map has {} qubits but preprocessing yields {} features",
                                m.name(),
                                fm.n_qubits,
                                self.feature_dim()
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
