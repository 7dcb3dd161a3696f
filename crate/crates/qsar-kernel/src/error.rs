use std::path::PathBuf;

use qsar_kernel_core::Error as CoreError;

/// Application error carrying the pipeline stage that failed.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{stage}: {message}")]
    Invalid { stage: &'static str, message: String },
    #[error("{stage}: internal consistency failure: {message}")]
    Internal { stage: &'static str, message: String },
    #[error("{stage}: {}: {source}", path.display())]
    Io {
        stage: &'static str,
        path: PathBuf,
        source: std::io::Error,
    },
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    pub fn invalid(stage: &'static str, message: impl Into<String>) -> Self {
        AppError::Invalid {
            stage,
            message: message.into(),
        }
    }

    pub fn io(stage: &'static str, path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            stage,
            path: path.into(),
            source,
        }
    }

    pub fn from_core(stage: &'static str, e: CoreError) -> Self {
        match e {
            CoreError::Internal(message) => AppError::Internal { stage, message },
            other => AppError::Invalid {
                stage,
                message: other.to_string(),
            },
        }
    }

    /// Process exit code: 2 for bad input or configuration, 3 for internal
    /// consistency failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Internal { .. } => 3,
            _ => 2,
        }
    }

    pub fn stage(&self) -> &'static str {
        match self {
            AppError::Invalid { stage, .. }
            | AppError::Internal { stage, .. }
            | AppError::Io { stage, .. } => stage,
        }
    }
}

/// Attaches a stage name to core results.
pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> AppResult<T>;
}

impl<T> StageExt<T> for qsar_kernel_core::Result<T> {
    fn stage(self, stage: &'static str) -> AppResult<T> {
        self.map_err(|e| AppError::from_core(stage, e))
    }
}
