//! Experiment orchestration: ingest, preprocess, split, train every configured
//! model and score it on the held-out rows.

use qsar_kernel_core::eval::{self, Label};
use qsar_kernel_core::pca::PcaModel;
use qsar_kernel_core::preprocess::{label_from_activity, lipinski_pass, DescriptorRow, ScalerModel};
use qsar_kernel_core::regression::{self, RegModel};
use qsar_kernel_core::svm::{self, SvmModel};

use crate::config::{ExperimentConfig, ModelSpec, RegTarget};
use crate::csv_io::{self, LabeledDataset};
use crate::error::{AppError, AppResult, StageExt};
use crate::model_io::SavedModel;
use crate::parallel::gram_parallel;
use crate::report::{DatasetSummary, EvalReport, ReportRow};

/// Transforms fitted on the training split: min-max scaling, optional PCA,
/// and a second min-max pass after PCA so encoded angles stay in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeaturePipeline {
    pub scaler: Option<ScalerModel>,
    pub pca: Option<PcaModel>,
    pub post_scaler: Option<ScalerModel>,
}

impl FeaturePipeline {
    pub fn fit(train: &[Vec<f64>], scale: bool, pca_k: Option<usize>) -> AppResult<Self> {
        const STAGE: &str = "preprocess";
        let scaler = if scale {
            Some(ScalerModel::fit(train).stage(STAGE)?)
        } else {
            None
        };
        let scaled = match &scaler {
            Some(s) => s.transform(train).stage(STAGE)?,
            None => train.to_vec(),
        };
        let (pca, post_scaler) = match pca_k {
            Some(k) => {
                let pca = PcaModel::fit(&scaled, k).stage("pca")?;
                let reduced = pca.transform(&scaled).stage("pca")?;
                let post = if scale {
                    Some(ScalerModel::fit(&reduced).stage(STAGE)?)
                } else {
                    None
                };
                (Some(pca), post)
            }
            None => (None, None),
        };
        Ok(Self {
            scaler,
            pca,
            post_scaler,
        })
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> AppResult<Vec<Vec<f64>>> {
        let mut out = rows.to_vec();
        if let Some(s) = &self.scaler {
            out = s.transform(&out).stage("preprocess")?;
        }
        if let Some(p) = &self.pca {
            out = p.transform(&out).stage("pca")?;
        }
        if let Some(s) = &self.post_scaler {
            out = s.transform(&out).stage("preprocess")?;
        }
        Ok(out)
    }

    pub fn output_columns(&self, input: &[String]) -> Vec<String> {
        match &self.pca {
            Some(p) => (1..=p.k()).map(|i| format!("pc{i}")).collect(),
            None => input.to_vec(),
        }
    }
}

/// Preprocessed, split data for one experiment.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub n_input: usize,
    pub dropped: Vec<String>,
    pub train_index: Vec<usize>,
    pub test_index: Vec<usize>,
    pub pipeline: FeaturePipeline,
    pub train: LabeledDataset,
    pub test: LabeledDataset,
    /// pEC50 of each training row when known.
    pub train_potency: Vec<Option<f64>>,
}

fn extract(
    rows: &[DescriptorRow],
    cfg: &ExperimentConfig,
) -> AppResult<(Vec<Vec<f64>>, Vec<Label>, Vec<Option<f64>>)> {
    const STAGE: &str = "preprocess";
    let mut feats = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    let mut potency = Vec::with_capacity(rows.len());
    for r in rows {
        let f = cfg
            .features
            .iter()
            .map(|c| {
                r.descriptor(c).ok_or_else(|| {
                    AppError::invalid(STAGE, format!("compound {}: missing descriptor '{c}'", r.compound_id))
                })
            })
            .collect::<AppResult<Vec<_>>>()?;
        let p = r
            .potency()
            .map_err(|e| AppError::invalid(STAGE, format!("compound {}: {e}", r.compound_id)))?;
        let label = match (r.label, p, cfg.activity_cutoff) {
            (Some(l), _, _) => l,
            (None, Some(p), Some(c)) => label_from_activity(p, c),
            (None, Some(_), None) => {
                return Err(AppError::invalid(
                    STAGE,
                    format!("compound {}: no label and no activity_cutoff configured", r.compound_id),
                ))
            }
            (None, None, _) => {
                return Err(AppError::invalid(
                    STAGE,
                    format!("compound {}: neither a label nor an activity value", r.compound_id),
                ))
            }
        };
        feats.push(f);
        labels.push(label);
        potency.push(p);
    }
    Ok((feats, labels, potency))
}

pub fn prepare(cfg: &ExperimentConfig, rows: &[DescriptorRow]) -> AppResult<PreparedData> {
    let mut kept = Vec::with_capacity(rows.len());
    let mut dropped = Vec::new();
    for r in rows {
        if cfg.lipinski_filter {
            let pass = lipinski_pass(r)
                .map_err(|e| AppError::invalid("filter", format!("compound {}: {e}", r.compound_id)))?;
            if !pass {
                log::info!("dropping {} (fails the rule-of-five screen)", r.compound_id);
                dropped.push(r.compound_id.clone());
                continue;
            }
        }
        kept.push(r.clone());
    }
    let (feats, labels, potency) = extract(&kept, cfg)?;
    let (train_index, test_index) = eval::split_indices(&labels, cfg.split, cfg.seed).stage("split")?;
    let raw_train: Vec<Vec<f64>> = train_index.iter().map(|&i| feats[i].clone()).collect();
    let raw_test: Vec<Vec<f64>> = test_index.iter().map(|&i| feats[i].clone()).collect();
    let pipeline = FeaturePipeline::fit(&raw_train, cfg.scaler, cfg.pca_k)?;
    let columns = pipeline.output_columns(&cfg.features);
    let make = |idx: &[usize], features: Vec<Vec<f64>>| LabeledDataset {
        ids: idx.iter().map(|&i| kept[i].compound_id.clone()).collect(),
        columns: columns.clone(),
        features,
        labels: idx.iter().map(|&i| labels[i]).collect(),
    };
    let train = make(&train_index, pipeline.transform(&raw_train)?);
    let test = make(&test_index, pipeline.transform(&raw_test)?);
    Ok(PreparedData {
        n_input: rows.len(),
        dropped,
        train_potency: train_index.iter().map(|&i| potency[i]).collect(),
        train_index,
        test_index,
        pipeline,
        train,
        test,
    })
}

/// Trains one configured model on a prepared training split.
pub fn train_model(
    spec: &ModelSpec,
    train: &LabeledDataset,
    train_potency: &[Option<f64>],
    cfg: &ExperimentConfig,
) -> AppResult<SavedModel> {
    match spec {
        ModelSpec::RegLs {
            basis, ridge, target, ..
        }
        | ModelSpec::RegAnneal {
            basis, ridge, target, ..
        } => {
            let (y, threshold) = regression_targets(spec, *target, train, train_potency, cfg)?;
            let mut model: RegModel = match spec {
                ModelSpec::RegAnneal { schedule, .. } => {
                    regression::fit_annealing(&train.features, &y, *basis, *ridge, schedule, cfg.seed)
                        .stage("train")?
                }
                _ => regression::fit_least_squares(&train.features, &y, *basis, *ridge).stage("train")?,
            };
            model.threshold = threshold;
            Ok(SavedModel::Reg(model))
        }
        ModelSpec::Svm {
            kernel, solver, jitter, ..
        } => {
            let mut g = gram_parallel(kernel, &train.features, cfg.workers)?;
            if *jitter > 0.0 {
                g.add_diagonal_jitter(*jitter);
            }
            let model: SvmModel = svm::train(&g, &train.labels, &train.features, solver).stage("train")?;
            if !model.converged {
                log::warn!("{}: SMO stopped before convergence", spec.name());
            }
            Ok(SavedModel::Svm(model))
        }
    }
}

fn regression_targets(
    spec: &ModelSpec,
    target: RegTarget,
    train: &LabeledDataset,
    potency: &[Option<f64>],
    cfg: &ExperimentConfig,
) -> AppResult<(Vec<f64>, f64)> {
    match target {
        RegTarget::Label => Ok((train.labels.iter().map(|l| l.sign()).collect(), 0.0)),
        RegTarget::Pec50 => {
            let cutoff = cfg
                .activity_cutoff
                .ok_or_else(|| AppError::invalid("train", format!("{}: pec50 target needs activity_cutoff", spec.name())))?;
            let y = potency
                .iter()
                .zip(&train.ids)
                .map(|(p, id)| {
                    p.ok_or_else(|| AppError::invalid("train", format!("compound {id}: no activity value")))
                })
                .collect::<AppResult<Vec<_>>>()?;
            Ok((y, cutoff))
        }
    }
}

pub fn predict_all(model: &SavedModel, rows: &[Vec<f64>]) -> AppResult<Vec<Label>> {
    rows.iter().map(|r| model.predict(r).stage("evaluate")).collect()
}

pub fn evaluate(model: &SavedModel, ds: &LabeledDataset) -> AppResult<f64> {
    let pred = predict_all(model, &ds.features)?;
    eval::accuracy(&pred, &ds.labels).stage("evaluate")
}

fn notes(spec: &ModelSpec, model: &SavedModel) -> Vec<String> {
    let mut n = Vec::new();
    match (spec, model) {
        (ModelSpec::RegLs { target, .. } | ModelSpec::RegAnneal { target, .. }, SavedModel::Reg(m)) => {
            n.push(match target {
                RegTarget::Label => "target=label".to_string(),
                RegTarget::Pec50 => "target=pec50".to_string(),
            });
            if m.rank_deficient {
                n.push("rank-deficient".into());
            }
        }
        (ModelSpec::Svm { .. }, SavedModel::Svm(m)) => {
            n.push(format!("sv={}", m.support_indices.len()));
            if !m.converged {
                n.push("not-converged".into());
            }
        }
        _ => {}
    }
    n
}

pub fn run_prepared(cfg: &ExperimentConfig, data: &PreparedData) -> AppResult<EvalReport> {
    let mut rows = Vec::with_capacity(cfg.models.len());
    for spec in &cfg.models {
        log::info!("training {}", spec.name());
        let model = train_model(spec, &data.train, &data.train_potency, cfg)?;
        let accuracy = evaluate(&model, &data.test)?;
        if !(0.0..=1.0).contains(&accuracy) {
            return Err(AppError::Internal {
                stage: "evaluate",
                message: format!("{}: accuracy {accuracy} outside [0, 1]", spec.name()),
            });
        }
        rows.push(ReportRow {
            model: spec.name().to_string(),
            type_tag: spec.type_tag().to_string(),
            accuracy,
            execution: spec.execution_tag().to_string(),
            kernel: spec.kernel_description(),
            notes: notes(spec, &model),
        });
    }
    Ok(EvalReport {
        dataset: DatasetSummary::new(cfg, data),
        rows,
        assumptions: EvalReport::assumptions_for(cfg),
        config: cfg.clone(),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig) -> AppResult<EvalReport> {
    cfg.validate()?;
    let rows = csv_io::read_descriptors_path(&cfg.input_path())?;
    let data = prepare(cfg, &rows)?;
    run_prepared(cfg, &data)
}
