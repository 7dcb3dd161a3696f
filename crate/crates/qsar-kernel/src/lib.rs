//! File formats, configuration, parallel Gram evaluation and the experiment
//! pipeline built on [`qsar_kernel_core`].

pub mod config;
pub mod csv_io;
pub mod error;
pub mod gram_io;
pub mod model_io;
pub mod parallel;
pub mod pipeline;
pub mod report;

pub use config::{ExperimentConfig, ModelSpec, RegTarget};
pub use error::{AppError, AppResult};
pub use pipeline::{run_experiment, FeaturePipeline};
pub use report::EvalReport;
