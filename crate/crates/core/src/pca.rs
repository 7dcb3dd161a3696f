//! Principal component analysis through the eigen-decomposition of the sample
//! covariance.
//!
//! Each component is sign-normalized so that its largest-magnitude entry is
//! positive (lowest index wins a tie), which makes fits reproducible.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::{symmetric_eigen, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `k` orthonormal rows.
    pub components: Vec<Vec<f64>>,
    /// Variance along each component, descending.
    pub explained_variance: Vec<f64>,
    /// Sum of all eigenvalues, i.e. the total sample variance.
    pub total_variance: f64,
}

impl PcaModel {
    pub fn fit(rows: &[Vec<f64>], k: usize) -> Result<Self> {
        if rows.len() < 2 {
            return Err(invalid!("PCA fit needs at least two rows"));
        }
        let m = Matrix::from_rows(rows)?;
        let dim = m.cols();
        if k < 1 || k > dim {
            return Err(invalid!("PCA k = {k} outside 1..={dim}"));
        }
        let n = rows.len() as f64;
        let mean: Vec<f64> = (0..dim)
            .map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / n)
            .collect();
        let mut cov = Matrix::zeros(dim, dim);
        for r in rows {
            for i in 0..dim {
                let di = r[i] - mean[i];
                for j in i..dim {
                    cov.set(i, j, cov.get(i, j) + di * (r[j] - mean[j]));
                }
            }
        }
        for i in 0..dim {
            for j in i..dim {
                let v = cov.get(i, j) / (n - 1.0);
                cov.set(i, j, v);
                cov.set(j, i, v);
            }
        }
        let eig = symmetric_eigen(&cov)?;
        let total_variance = eig.values.iter().sum();
        let components = eig
            .vectors
            .into_iter()
            .take(k)
            .map(|mut v| {
                let lead = v
                    .iter()
                    .enumerate()
                    .fold(0, |b, (i, x)| if libm::fabs(*x) > libm::fabs(v[b]) { i } else { b });
                if v[lead] < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
            .collect();
        let explained_variance = eig.values.into_iter().take(k).map(|v| v.max(0.0)).collect();
        Ok(Self {
            mean,
            components,
            explained_variance,
            total_variance,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn transform_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.mean.len() {
            return Err(invalid!(
                "row has {} features, PCA was fitted on {}",
                row.len(),
                self.mean.len()
            ));
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(row).zip(&self.mean).map(|((ci, x), m)| ci * (x - m)).sum())
            .collect())
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }

    pub fn inverse_row(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, zi) in self.components.iter().zip(z) {
            for (o, ci) in out.iter_mut().zip(c) {
                *o += zi * ci;
            }
        }
        out
    }
}

pub fn pca_fit(rows: &[Vec<f64>], k: usize) -> Result<PcaModel> {
    PcaModel::fit(rows, k)
}

pub fn pca_transform(model: &PcaModel, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    model.transform(rows)
}
