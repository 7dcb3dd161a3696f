//! Quantum-kernel machine learning primitives for QSAR classification.
//!
//! Everything here is pure computation over in-memory data and builds without
//! `std`. File formats, CSV ingestion, the parallel Gram driver and the CLI
//! live in the `qsar-kernel` crate.
//!
//! The pipeline this crate supports:
//!
//! 1. [`preprocess`]: pEC50 transform, rule-of-five filter, min-max scaling,
//!    and [`pca`] reduction of molecular descriptors.
//! 2. [`feature_map`]: encode a scaled feature vector into a statevector
//!    `|φ(x)⟩ = U(x)|0⟩^⊗n` simulated by [`state`].
//! 3. [`kernel`]: fidelity kernels `|⟨φ(x)|φ(x')⟩|²` (exact or shot-sampled)
//!    plus the classical linear, polynomial and RBF kernels, and Gram matrices.
//! 4. [`svm`]: SMO training of the kernel SVM dual; [`regression`]: basis
//!    expansion regressors fitted by least squares or simulated annealing.
//! 5. [`eval`]: accuracy and seeded train/test splitting.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod eval;
pub mod feature_map;
pub mod kernel;
pub mod linalg;
pub mod pca;
pub mod preprocess;
pub mod regression;
pub mod rng;
pub mod state;
pub mod svm;

pub use error::{Error, Result};
pub use feature_map::{Entanglement, FeatureMapFamily, FeatureMapSpec};
pub use kernel::{GramMatrix, KernelConfig};
pub use state::{GateKind, GateOp, StateVector};
pub use svm::{SvmConfig, SvmModel};
