//! Descriptor preprocessing: potency transform, rule-of-five screen, min-max
//! scaling and activity labelling.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::eval::Label;

/// One compound's raw descriptors.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DescriptorRow {
    pub compound_id: String,
    /// EC50 in nanomolar.
    pub ec50_nm: Option<f64>,
    pub pec50: Option<f64>,
    pub n_donors: Option<u32>,
    pub n_acceptors: Option<u32>,
    pub rotatable_bonds: Option<u32>,
    /// Daltons.
    pub mol_weight: Option<f64>,
    pub logp: Option<f64>,
    /// Any further numeric columns, in input order.
    pub extras: Vec<(String, f64)>,
    pub label: Option<Label>,
}

impl DescriptorRow {
    pub fn validate(&self) -> Result<()> {
        if let Some(e) = self.ec50_nm {
            if !(e > 0.0 && e.is_finite()) {
                return Err(invalid!("{}: ec50_nM must be positive", self.compound_id));
            }
        }
        Ok(())
    }

    /// pEC50 as given, or derived from EC50.
    pub fn potency(&self) -> Result<Option<f64>> {
        match (self.pec50, self.ec50_nm) {
            (Some(p), _) => Ok(Some(p)),
            (None, Some(e)) => pec50(e).map(Some),
            (None, None) => Ok(None),
        }
    }

    /// Value of a named descriptor column, core or extra.
    pub fn descriptor(&self, name: &str) -> Option<f64> {
        match name {
            "ec50_nM" | "ec50_nm" => self.ec50_nm,
            "pEC50" | "pec50" => self.pec50,
            "n_donors" => self.n_donors.map(f64::from),
            "n_acceptors" => self.n_acceptors.map(f64::from),
            "rotatable_bonds" => self.rotatable_bonds.map(f64::from),
            "mol_weight" => self.mol_weight,
            "logp" | "logP" => self.logp,
            _ => self
                .extras
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v),
        }
    }
}

/// `p = −log₁₀(EC50 · 10⁻⁹)` for EC50 in nanomolar.
///
/// Evaluated as `9 − log₁₀(EC50)` so that powers of ten come out exact.
pub fn pec50(ec50_nm: f64) -> Result<f64> {
    if !(ec50_nm > 0.0 && ec50_nm.is_finite()) {
        return Err(invalid!("ec50 must be positive and finite, got {ec50_nm}"));
    }
    Ok(9.0 - libm::log10(ec50_nm))
}

pub const MAX_MOL_WEIGHT: f64 = 500.0;
pub const MAX_DONORS: u32 = 5;
pub const MAX_ACCEPTORS: u32 = 10;
pub const MAX_LOGP: f64 = 5.0;

/// Rule of five: passes when at least three of the four criteria hold.
pub fn lipinski_pass(row: &DescriptorRow) -> Result<bool> {
    let missing = |f: &str| invalid!("{}: missing {f} for rule-of-five check", row.compound_id);
    let w = row.mol_weight.ok_or_else(|| missing("mol_weight"))?;
    let nd = row.n_donors.ok_or_else(|| missing("n_donors"))?;
    let na = row.n_acceptors.ok_or_else(|| missing("n_acceptors"))?;
    let logp = row.logp.ok_or_else(|| missing("logp"))?;
    let met = [
        w <= MAX_MOL_WEIGHT,
        nd <= MAX_DONORS,
        na <= MAX_ACCEPTORS,
        logp <= MAX_LOGP,
    ]
    .iter()
    .filter(|&&ok| ok)
    .count();
    Ok(met >= 3)
}

/// `p ≥ cutoff` is active.
pub fn label_from_activity(p: f64, cutoff: f64) -> Label {
    if p >= cutoff {
        Label::Active
    } else {
        Label::Inactive
    }
}

/// Per-column min and max from the fitting rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalerModel {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl ScalerModel {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| invalid!("min-max fit needs at least one row"))?;
        let dim = first.len();
        let mut min = first.clone();
        let mut max = first.clone();
        for (i, r) in rows.iter().enumerate() {
            if r.len() != dim {
                return Err(invalid!("row {i} has {} columns, expected {dim}", r.len()));
            }
            for (j, &v) in r.iter().enumerate() {
                if !v.is_finite() {
                    return Err(invalid!("row {i} column {j} is not finite"));
                }
                min[j] = min[j].min(v);
                max[j] = max[j].max(v);
            }
        }
        for j in 0..dim {
            if max[j] == min[j] {
                log::warn!("column {j} is constant; it scales to 0");
            }
        }
        Ok(Self { min, max })
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// `(v − min)/(max − min)` clamped into `[0, 1]`; constant columns give 0.
    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.dim() {
            return Err(invalid!("row has {} columns, scaler expects {}", row.len(), self.dim()));
        }
        Ok(row
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let span = self.max[j] - self.min[j];
                if span > 0.0 {
                    ((v - self.min[j]) / span).clamp(0.0, 1.0)
                } else {
                    0.0
                }
            })
            .collect())
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    pub fn inverse_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .enumerate()
            .map(|(j, &v)| self.min[j] + v * (self.max[j] - self.min[j]))
            .collect()
    }
}

pub fn minmax_fit_transform(rows: &[Vec<f64>]) -> Result<(ScalerModel, Vec<Vec<f64>>)> {
    let model = ScalerModel::fit(rows)?;
    let scaled = model.transform(rows)?;
    Ok((model, scaled))
}
