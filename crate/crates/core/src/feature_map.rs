//! Data-encoding circuits `U(x)` and the encoded state `|φ(x)⟩ = U(x)|0⟩^⊗n`.
//!
//! One repetition of each family, in application order:
//!
//! * `Zz`: `H` on every qubit, `PHASE(2·x_j)` on every qubit, then
//!   `PARITY_PHASE(2·(π−x_j)·(π−x_k))` on every entangled pair.
//! * `Custom`: `RY(2·x_j)` on every qubit, then `PARITY_PHASE(π·x_j·x_k)` on
//!   every entangled pair.
//!
//! The block is repeated `reps` times. One qubit per feature.

use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::state::{GateOp, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureMapFamily {
    Zz,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    /// Nearest neighbours `(0,1), (1,2), …`.
    Linear,
    /// Every pair `j < k` in lexicographic order.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FeatureMapSpec {
    pub family: FeatureMapFamily,
    pub n_qubits: usize,
    pub reps: usize,
    pub entanglement: Entanglement,
}

impl FeatureMapSpec {
    pub fn new(
        family: FeatureMapFamily,
        n_qubits: usize,
        reps: usize,
        entanglement: Entanglement,
    ) -> Result<Self> {
        let spec = Self {
            family,
            n_qubits,
            reps,
            entanglement,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits < 1 {
            return Err(invalid!("feature map needs at least one qubit"));
        }
        if self.reps < 1 {
            return Err(invalid!("feature map needs reps ≥ 1"));
        }
        Ok(())
    }

    /// The gate list of `U(x)` in application order.
    pub fn circuit(&self, x: &[f64]) -> Result<Vec<GateOp>> {
        self.validate()?;
        if x.len() != self.n_qubits {
            return Err(invalid!(
                "feature vector has {} entries, map expects {}",
                x.len(),
                self.n_qubits
            ));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(invalid!("feature {i} is not finite"));
        }
        if x.iter().any(|v| !(0.0..=1.0).contains(v)) {
            log::warn!("encoding feature values outside [0, 1]");
        }
        let pairs = entanglement_pairs(self.entanglement, self.n_qubits);
        let mut block = Vec::with_capacity(2 * self.n_qubits + pairs.len());
        match self.family {
            FeatureMapFamily::Zz => {
                for q in 0..self.n_qubits {
                    block.push(GateOp::h(q)?);
                }
                for (q, &v) in x.iter().enumerate() {
                    block.push(GateOp::phase(q, 2.0 * v)?);
                }
                for &(j, k) in &pairs {
                    let angle = 2.0 * (PI - x[j]) * (PI - x[k]);
                    block.push(GateOp::parity_phase(j, k, angle)?);
                }
            }
            FeatureMapFamily::Custom => {
                for (q, &v) in x.iter().enumerate() {
                    block.push(GateOp::ry(q, 2.0 * v)?);
                }
                for &(j, k) in &pairs {
                    block.push(GateOp::parity_phase(j, k, PI * x[j] * x[k])?);
                }
            }
        }
        let mut gates = Vec::with_capacity(block.len() * self.reps);
        for _ in 0..self.reps {
            gates.extend(block.iter().cloned());
        }
        Ok(gates)
    }

    /// `U(x)|0⟩^⊗n`.
    pub fn encode(&self, x: &[f64]) -> Result<StateVector> {
        let gates = self.circuit(x)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        for g in &gates {
            state.apply_in_place(g)?;
        }
        Ok(state)
    }
}

/// Ordered qubit pairs receiving two-qubit gates.
pub fn entanglement_pairs(scheme: Entanglement, n_qubits: usize) -> Vec<(usize, usize)> {
    match scheme {
        Entanglement::Linear => (1..n_qubits).map(|k| (k - 1, k)).collect(),
        Entanglement::Full => (0..n_qubits)
            .flat_map(|j| ((j + 1)..n_qubits).map(move |k| (j, k)))
            .collect(),
    }
}

pub fn encode(spec: &FeatureMapSpec, x: &[f64]) -> Result<StateVector> {
    spec.encode(x)
}
