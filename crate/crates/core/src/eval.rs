//! Class labels, the accuracy metric and seeded train/test splitting.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::rng;

/// Binary class label, `+1` (active) or `−1` (inactive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "-1")]
    Inactive,
    #[serde(rename = "+1")]
    Active,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Active => 1.0,
            Label::Inactive => -1.0,
        }
    }

    /// `v ≥ 0` maps to `Active`.
    pub fn from_sign(v: f64) -> Self {
        if v >= 0.0 {
            Label::Active
        } else {
            Label::Inactive
        }
    }

    pub fn from_i64(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Label::Active),
            -1 => Ok(Label::Inactive),
            other => Err(invalid!("label must be +1 or -1, got {other}")),
        }
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Active => 1,
            Label::Inactive => -1,
        }
    }
}

/// Fraction of positions where prediction and truth agree.
pub fn accuracy(predictions: &[Label], truth: &[Label]) -> Result<f64> {
    if predictions.len() != truth.len() {
        return Err(invalid!(
            "{} predictions for {} labels",
            predictions.len(),
            truth.len()
        ));
    }
    if truth.is_empty() {
        return Err(invalid!("accuracy of an empty set"));
    }
    let hits = predictions.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Shuffles `0..labels.len()` with the seeded generator and cuts the prefix
/// of `round(fraction · n)` indices off as the training split.
pub fn split_indices(labels: &[Label], fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(invalid!("train fraction {fraction} outside (0, 1)"));
    }
    let n = labels.len();
    if n < 2 {
        return Err(invalid!("splitting needs at least two rows, got {n}"));
    }
    if !labels.contains(&Label::Active) || !labels.contains(&Label::Inactive) {
        return Err(invalid!("dataset contains a single class"));
    }
    let n_train = libm::round(fraction * n as f64) as usize;
    if n_train == 0 || n_train == n {
        return Err(invalid!(
            "fraction {fraction} of {n} rows leaves an empty split"
        ));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng::seeded(seed));
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

/// Class balance as `(active, inactive)` counts.
pub fn class_counts(labels: &[Label]) -> (usize, usize) {
    let pos = labels.iter().filter(|l| **l == Label::Active).count();
    (pos, labels.len() - pos)
}
