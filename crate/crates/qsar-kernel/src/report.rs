//! Comparison report: an aligned text table plus one JSON record per line.
//!
//! Neither rendering contains timestamps, absolute paths or anything else
//! that varies between identical runs.

use std::fmt::Write as _;

use qsar_kernel_core::eval::class_counts;
use qsar_kernel_core::{Entanglement, FeatureMapFamily, KernelConfig};
use serde::Serialize;

use crate::config::{ExperimentConfig, ModelSpec};
use crate::pipeline::PreparedData;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub model: String,
    #[serde(rename = "type")]
    pub type_tag: String,
    #[serde(rename = "acc")]
    pub accuracy: f64,
    pub execution: String,
    pub kernel: String,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub n_input: usize,
    pub n_dropped: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// `(active, inactive)`
    pub train_balance: (usize, usize),
    pub test_balance: (usize, usize),
    pub features: Vec<String>,
    pub columns: Vec<String>,
}

impl DatasetSummary {
    pub fn new(cfg: &ExperimentConfig, data: &PreparedData) -> Self {
        Self {
            n_input: data.n_input,
            n_dropped: data.dropped.len(),
            n_train: data.train.len(),
            n_test: data.test.len(),
            train_balance: class_counts(&data.train.labels),
            test_balance: class_counts(&data.test.labels),
            features: cfg.features.clone(),
            columns: data.train.columns.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub dataset: DatasetSummary,
    pub rows: Vec<ReportRow>,
    pub assumptions: Vec<String>,
    pub config: ExperimentConfig,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Record<'a> {
    Dataset(&'a DatasetSummary),
    Model(&'a ReportRow),
    Assumption { text: &'a str },
    Config { config: &'a ExperimentConfig },
}

impl EvalReport {
    pub fn assumptions_for(cfg: &ExperimentConfig) -> Vec<String> {
        let mut out = Vec::new();
        let any = |f: &dyn Fn(&ModelSpec) -> bool| cfg.models.iter().any(f);
        if any(&|m| matches!(m, ModelSpec::RegAnneal { .. })) {
            out.push("type q regression rows are fitted by classical simulated annealing; no annealing hardware".into());
        }
        if any(&|m| {
            matches!(m, ModelSpec::Svm { kernel, .. } if kernel.feature_map().is_some_and(|f| {
                f.family == FeatureMapFamily::Zz && f.entanglement == Entanglement::Full
            }))
        }) {
            out.push("the nonlinear quantum kernel is realized as a ZZ feature map with full entanglement".into());
        }
        if any(&|m| matches!(m, ModelSpec::Svm { kernel: KernelConfig::QuantumShots { .. }, .. })) {
            out.push("sim-shots rows emulate processor execution by binomial shot sampling only; no hardware noise model".into());
        }
        out
    }

    pub fn to_text(&self) -> String {
        let d = &self.dataset;
        let mut s = String::new();
        let _ = writeln!(s, "dataset: {}", self.config.input.display());
        let _ = writeln!(
            s,
            "rows: {} read, {} dropped by the rule-of-five screen, {} used",
            d.n_input,
            d.n_dropped,
            d.n_train + d.n_test
        );
        let _ = writeln!(s, "features: {} -> {}", d.features.join(", "), d.columns.join(", "));
        let _ = writeln!(
            s,
            "split: seed {} fraction {}; train {} (+1: {}, -1: {}); test {} (+1: {}, -1: {})",
            self.config.seed,
            self.config.split,
            d.n_train,
            d.train_balance.0,
            d.train_balance.1,
            d.n_test,
            d.test_balance.0,
            d.test_balance.1
        );
        s.push('\n');

        let header = ["model", "type", "acc", "execution", "kernel"];
        let cells: Vec<[String; 5]> = self
            .rows
            .iter()
            .map(|r| {
                [
                    r.model.clone(),
                    r.type_tag.clone(),
                    format!("{:.4}", r.accuracy),
                    r.execution.clone(),
                    r.kernel.clone(),
                ]
            })
            .collect();
        let mut width = header.map(str::len);
        for row in &cells {
            for (w, c) in width.iter_mut().zip(row) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |s: &mut String, row: [&str; 5]| {
            let parts: Vec<String> = row
                .iter()
                .zip(width)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            let _ = writeln!(s, "{}", parts.join("  ").trim_end());
        };
        line(&mut s, header);
        let rule: Vec<String> = width.iter().map(|w| "-".repeat(*w)).collect();
        let _ = writeln!(s, "{}", rule.join("  "));
        for row in &cells {
            line(&mut s, [&row[0], &row[1], &row[2], &row[3], &row[4]]);
        }

        if self.rows.iter().any(|r| !r.notes.is_empty()) {
            s.push_str("\nnotes:\n");
            for r in &self.rows {
                if !r.notes.is_empty() {
                    let _ = writeln!(s, "  {}: {}", r.model, r.notes.join(", "));
                }
            }
        }
        if !self.assumptions.is_empty() {
            s.push_str("\nassumptions:\n");
            for a in &self.assumptions {
                let _ = writeln!(s, "  - {a}");
            }
        }
        s.push_str("\nconfig:\n");
        for l in self.config.to_toml().lines() {
            let _ = writeln!(s, "{}", format!("  {l}").trim_end());
        }
        s
    }

    pub fn to_json_lines(&self) -> String {
        let mut records = vec![Record::Dataset(&self.dataset)];
        records.extend(self.rows.iter().map(Record::Model));
        records.extend(self.assumptions.iter().map(|a| Record::Assumption { text: a }));
        records.push(Record::Config {
            config: &self.config,
        });
        let mut s = String::new();
        for r in records {
            s.push_str(&serde_json::to_string(&r).expect("report serializes"));
            s.push('\n');
        }
        s
    }
}
