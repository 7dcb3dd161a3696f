//! Multi-threaded Gram matrix evaluation.

use qsar_kernel_core::kernel::{dataset_digest, KernelEvaluator};
use qsar_kernel_core::{GramMatrix, KernelConfig};
use rayon::prelude::*;

use crate::error::{AppError, AppResult, StageExt};

const STAGE: &str = "gram";

/// Same matrix as [`qsar_kernel_core::kernel::gram`], bit for bit, with the
/// upper triangle spread over `workers` threads (`0` picks the rayon
/// default).
pub fn gram_parallel(cfg: &KernelConfig, rows: &[Vec<f64>], workers: usize) -> AppResult<GramMatrix> {
    let eval = KernelEvaluator::new(cfg, rows).stage(STAGE)?;
    let pairs: Vec<(usize, usize)> = eval.upper_pairs().collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| AppError::Internal {
            stage: STAGE,
            message: e.to_string(),
        })?;
    let upper = pool
        .install(|| {
            pairs
                .par_iter()
                .map(|&(i, j)| eval.pair(i, j))
                .collect::<qsar_kernel_core::Result<Vec<f64>>>()
        })
        .stage(STAGE)?;
    GramMatrix::from_upper(rows.len(), &upper, *cfg, dataset_digest(rows)).stage(STAGE)
}
