//! Descriptor CSV ingestion and the normalized feature CSV.
//!
//! Descriptor files carry a header with `compound_id` plus any of the known
//! columns (`ec50_nM`, `pEC50`, `label`, `n_donors`, `n_acceptors`,
//! `rotatable_bonds`, `mol_weight`, `logp`). Every other column must be
//! numeric and is kept as an extra descriptor.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use qsar_kernel_core::eval::Label;
use qsar_kernel_core::preprocess::DescriptorRow;

use crate::error::{AppError, AppResult};

const STAGE: &str = "ingest";

fn parse_f64(v: &str, line: u64, col: &str) -> AppResult<f64> {
    let x: f64 = v.trim().parse().map_err(|_| {
        AppError::invalid(STAGE, format!("line {line}, column {col}: '{v}' is not a number"))
    })?;
    if !x.is_finite() {
        return Err(AppError::invalid(
            STAGE,
            format!("line {line}, column {col}: non-finite value"),
        ));
    }
    Ok(x)
}

fn parse_count(v: &str, line: u64, col: &str) -> AppResult<u32> {
    let x = parse_f64(v, line, col)?;
    if x < 0.0 || x.fract() != 0.0 || x > f64::from(u32::MAX) {
        return Err(AppError::invalid(
            STAGE,
            format!("line {line}, column {col}: '{v}' is not a non-negative integer"),
        ));
    }
    Ok(x as u32)
}

pub fn parse_label(v: &str) -> Option<Label> {
    match v.trim() {
        "1" | "+1" | "1.0" | "+1.0" => Some(Label::Active),
        "-1" | "-1.0" => Some(Label::Inactive),
        _ => None,
    }
}

pub fn format_label(l: Label) -> &'static str {
    match l {
        Label::Active => "+1",
        Label::Inactive => "-1",
    }
}

pub fn read_descriptors<R: Read>(reader: R) -> AppResult<Vec<DescriptorRow>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| AppError::invalid(STAGE, format!("header: {e}")))?
        .clone();
    if !headers.iter().any(|h| h == "compound_id") {
        return Err(AppError::invalid(STAGE, "missing required column compound_id"));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| AppError::invalid(STAGE, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let mut row = DescriptorRow::default();
        for (h, v) in headers.iter().zip(rec.iter()) {
            if h == "compound_id" {
                row.compound_id = v.to_string();
                continue;
            }
            if v.is_empty() {
                continue;
            }
            match h {
                "ec50_nM" | "ec50_nm" => row.ec50_nm = Some(parse_f64(v, line, h)?),
                "pEC50" | "pec50" => row.pec50 = Some(parse_f64(v, line, h)?),
                "label" => {
                    row.label = Some(parse_label(v).ok_or_else(|| {
                        AppError::invalid(STAGE, format!("line {line}: label '{v}' is not +1 or -1"))
                    })?)
                }
                "n_donors" => row.n_donors = Some(parse_count(v, line, h)?),
                "n_acceptors" => row.n_acceptors = Some(parse_count(v, line, h)?),
                "rotatable_bonds" => row.rotatable_bonds = Some(parse_count(v, line, h)?),
                "mol_weight" => row.mol_weight = Some(parse_f64(v, line, h)?),
                "logp" | "logP" => row.logp = Some(parse_f64(v, line, h)?),
                _ => row.extras.push((h.to_string(), parse_f64(v, line, h)?)),
            }
        }
        if row.compound_id.is_empty() {
            return Err(AppError::invalid(STAGE, format!("line {line}: empty compound_id")));
        }
        row.validate()
            .map_err(|e| AppError::invalid(STAGE, format!("line {line}: {e}")))?;
        out.push(row);
    }
    if out.is_empty() {
        return Err(AppError::invalid(STAGE, "no data rows"));
    }
    Ok(out)
}

pub fn read_descriptors_path(path: &Path) -> AppResult<Vec<DescriptorRow>> {
    let f = File::open(path).map_err(|e| AppError::io(STAGE, path, e))?;
    read_descriptors(f)
}

/// Scaled feature rows with identifiers and labels, as written by
/// `preprocess` and consumed by `gram`, `train` and `eval`.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub ids: Vec<String>,
    pub columns: Vec<String>,
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        Self {
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            columns: self.columns.clone(),
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Writes `compound_id,<features…>,label` with shortest round-trip decimals.
pub fn write_dataset<W: Write>(w: W, ds: &LabeledDataset) -> AppResult<()> {
    let err = |e: csv::Error| AppError::invalid("output", e.to_string());
    let mut wtr = csv::Writer::from_writer(w);
    let mut header = vec!["compound_id".to_string()];
    header.extend(ds.columns.iter().cloned());
    header.push("label".into());
    wtr.write_record(&header).map_err(err)?;
    for ((id, f), l) in ds.ids.iter().zip(&ds.features).zip(&ds.labels) {
        let mut rec = vec![id.clone()];
        rec.extend(f.iter().map(|v| format!("{v:e}")));
        rec.push(format_label(*l).into());
        wtr.write_record(&rec).map_err(err)?;
    }
    wtr.flush().map_err(|e| AppError::invalid("output", e.to_string()))
}

pub fn read_dataset<R: Read>(reader: R) -> AppResult<LabeledDataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| AppError::invalid(STAGE, format!("header: {e}")))?
        .clone();
    let n = headers.len();
    if n < 3 || &headers[0] != "compound_id" || &headers[n - 1] != "label" {
        return Err(AppError::invalid(
            STAGE,
            "dataset header must be compound_id,<features…>,label",
        ));
    }
    let columns: Vec<String> = headers.iter().skip(1).take(n - 2).map(String::from).collect();
    let mut ds = LabeledDataset {
        ids: Vec::new(),
        columns,
        features: Vec::new(),
        labels: Vec::new(),
    };
    for rec in rdr.records() {
        let rec = rec.map_err(|e| AppError::invalid(STAGE, e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        ds.ids.push(rec[0].to_string());
        let row = (1..n - 1)
            .map(|j| parse_f64(&rec[j], line, &headers[j]))
            .collect::<AppResult<Vec<_>>>()?;
        ds.features.push(row);
        ds.labels.push(parse_label(&rec[n - 1]).ok_or_else(|| {
            AppError::invalid(STAGE, format!("line {line}: label '{}' is not +1 or -1", &rec[n - 1]))
        })?);
    }
    if ds.is_empty() {
        return Err(AppError::invalid(STAGE, "no data rows"));
    }
    Ok(ds)
}

pub fn read_dataset_path(path: &Path) -> AppResult<LabeledDataset> {
    let f = File::open(path).map_err(|e| AppError::io(STAGE, path, e))?;
    read_dataset(f)
}

pub fn write_dataset_path(path: &Path, ds: &LabeledDataset) -> AppResult<()> {
    let f = File::create(path).map_err(|e| AppError::io("output", path, e))?;
    write_dataset(f, ds)
}
