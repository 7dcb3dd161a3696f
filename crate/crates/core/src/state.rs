//! Dense statevector simulator.
//!
//! Qubit `q` is bit `q` of the amplitude index (qubit 0 is the least
//! significant bit).

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Default upper bound on register width (2^24 amplitudes, 256 MiB).
pub const DEFAULT_QUBIT_CAP: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    /// Y rotation: `|0⟩ → cos(θ/2)|0⟩ + sin(θ/2)|1⟩`.
    Ry,
    H,
    /// Multiplies amplitudes whose target bit is 1 by `e^{iλ}`.
    Phase,
    /// Multiplies amplitudes whose two target bits differ by `e^{iλ}`.
    ///
    /// Equal to `exp(−iλ/2 · Z⊗Z)` up to the global phase `e^{iλ/2}`.
    ParityPhase,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::ParityPhase => 2,
            _ => 1,
        }
    }
}

/// One gate of a circuit: kind, ordered targets and an angle in radians
/// (ignored for `H`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOp {
    kind: GateKind,
    targets: Vec<usize>,
    angle: f64,
}

impl GateOp {
    pub fn new(kind: GateKind, targets: &[usize], angle: f64) -> Result<Self> {
        if targets.len() != kind.arity() {
            return Err(invalid!(
                "{:?} takes {} target(s), got {}",
                kind,
                kind.arity(),
                targets.len()
            ));
        }
        if kind == GateKind::ParityPhase && targets[0] == targets[1] {
            return Err(invalid!("parity-phase targets must be distinct"));
        }
        if !angle.is_finite() {
            return Err(invalid!("gate angle must be finite"));
        }
        Ok(Self {
            kind,
            targets: targets.to_vec(),
            angle,
        })
    }

    pub fn ry(qubit: usize, theta: f64) -> Result<Self> {
        Self::new(GateKind::Ry, &[qubit], theta)
    }

    pub fn h(qubit: usize) -> Result<Self> {
        Self::new(GateKind::H, &[qubit], 0.0)
    }

    pub fn phase(qubit: usize, lambda: f64) -> Result<Self> {
        Self::new(GateKind::Phase, &[qubit], lambda)
    }

    pub fn parity_phase(j: usize, k: usize, lambda: f64) -> Result<Self> {
        Self::new(GateKind::ParityPhase, &[j, k], lambda)
    }

    pub fn kind(&self) -> GateKind {
        self.kind
    }

    pub fn targets(&self) -> &[usize] {
        &self.targets
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }
}

/// `2^n` complex amplitudes of an `n`-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// `|0⟩^⊗n`, subject to [`DEFAULT_QUBIT_CAP`].
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::zero_with_cap(n_qubits, DEFAULT_QUBIT_CAP)
    }

    pub fn zero_with_cap(n_qubits: usize, cap: usize) -> Result<Self> {
        if n_qubits < 1 {
            return Err(invalid!("a register needs at least one qubit"));
        }
        if n_qubits > cap {
            return Err(Error::ResourceLimit(alloc::format!(
                "{n_qubits} qubits exceeds the cap of {cap}"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1usize << n_qubits];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. The length must be a power of two; the norm is
    /// not checked.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(invalid!("amplitude count {len} is not 2^n with n ≥ 1"));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Returns a new state with `gate` applied; `self` is left untouched.
    pub fn apply_gate(&self, gate: &GateOp) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_in_place(&mut self, gate: &GateOp) -> Result<()> {
        if let Some(&q) = gate.targets.iter().find(|&&q| q >= self.n_qubits) {
            return Err(invalid!(
                "qubit {q} out of range for a {}-qubit register",
                self.n_qubits
            ));
        }
        let amps = &mut self.amplitudes;
        match gate.kind {
            GateKind::Ry => {
                let half = 0.5 * gate.angle;
                let (s, c) = (libm::sin(half), libm::cos(half));
                for_each_pair(amps, gate.targets[0], |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c - x1 * s;
                    *a1 = x0 * s + x1 * c;
                });
            }
            GateKind::H => {
                for_each_pair(amps, gate.targets[0], |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = (x0 + x1) * FRAC_1_SQRT_2;
                    *a1 = (x0 - x1) * FRAC_1_SQRT_2;
                });
            }
            GateKind::Phase => {
                let mask = 1usize << gate.targets[0];
                let e = unit_phase(gate.angle);
                for (i, a) in amps.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a *= e;
                    }
                }
            }
            GateKind::ParityPhase => {
                let (j, k) = (gate.targets[0], gate.targets[1]);
                let e = unit_phase(gate.angle);
                for (i, a) in amps.iter_mut().enumerate() {
                    if ((i >> j) ^ (i >> k)) & 1 == 1 {
                        *a *= e;
                    }
                }
            }
        }
        Ok(())
    }

    /// `Σ_i conj(self_i) · other_i`.
    pub fn inner_product(&self, other: &StateVector) -> Result<Complex64> {
        inner_product(self, other)
    }
}

pub fn new_zero_state(n_qubits: usize) -> Result<StateVector> {
    StateVector::zero(n_qubits)
}

pub fn apply_gate(state: &StateVector, gate: &GateOp) -> Result<StateVector> {
    state.apply_gate(gate)
}

pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    if a.n_qubits != b.n_qubits {
        return Err(invalid!(
            "inner product of {}- and {}-qubit states",
            a.n_qubits,
            b.n_qubits
        ));
    }
    Ok(a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .fold(Complex64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y))
}

fn unit_phase(angle: f64) -> Complex64 {
    Complex64::new(libm::cos(angle), libm::sin(angle))
}

/// Visits every `(|…0…⟩, |…1…⟩)` amplitude pair that differs only in `qubit`.
fn for_each_pair(amps: &mut [Complex64], qubit: usize, mut f: impl FnMut(&mut Complex64, &mut Complex64)) {
    let stride = 1usize << qubit;
    for block in amps.chunks_exact_mut(stride << 1) {
        let (lo, hi) = block.split_at_mut(stride);
        for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
            f(a0, a1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use qsar_kernel_oracles as oracle;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn zero_state_layout() {
        let s = new_zero_state(1).unwrap();
        assert_eq!(s.amplitudes(), &[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let s = new_zero_state(2).unwrap();
        assert_eq!(s.amplitudes().len(), 4);
        assert_eq!(s.amplitudes()[0], Complex64::new(1.0, 0.0));
        assert!(s.amplitudes()[1..].iter().all(|a| *a == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn zero_state_bounds() {
        assert!(matches!(new_zero_state(0), Err(Error::InvalidArgument(_))));
        assert!(matches!(new_zero_state(25), Err(Error::ResourceLimit(_))));
        assert!(matches!(
            StateVector::zero_with_cap(5, 4),
            Err(Error::ResourceLimit(_))
        ));
    }

    #[test]
    fn ry_pi_flips_zero() {
        let s = new_zero_state(1).unwrap();
        let out = s.apply_gate(&GateOp::ry(0, PI).unwrap()).unwrap();
        assert!(close(out.amplitudes()[0], Complex64::new(0.0, 0.0), 1e-15));
        assert!(close(out.amplitudes()[1], Complex64::new(1.0, 0.0), 1e-15));
    }

    #[test]
    fn ry_zero_is_identity() {
        let s = StateVector::from_amplitudes(alloc::vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8)
        ])
        .unwrap();
        assert_eq!(s.apply_gate(&GateOp::ry(0, 0.0).unwrap()).unwrap(), s);
    }

    #[test]
    fn parity_phase_example_matches_dense_oracle() {
        let h = FRAC_1_SQRT_2;
        let input = alloc::vec![
            Complex64::new(h, 0.0),
            Complex64::new(h, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        let s = StateVector::from_amplitudes(input.clone()).unwrap();
        let out = s.apply_gate(&GateOp::parity_phase(0, 1, PI / 3.0).unwrap()).unwrap();
        let expected = oracle::matvec(&oracle::parity_phase(2, 0, 1, PI / 3.0), &input);
        for (a, b) in out.amplitudes().iter().zip(&expected) {
            assert!(close(*a, *b, 1e-12));
        }
        assert!(close(out.amplitudes()[1], Complex64::from_polar(h, PI / 3.0), 1e-12));
    }

    #[test]
    fn hadamard_convention() {
        let one = StateVector::from_amplitudes(alloc::vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0)
        ])
        .unwrap();
        let out = one.apply_gate(&GateOp::h(0).unwrap()).unwrap();
        assert!(close(out.amplitudes()[0], Complex64::new(FRAC_1_SQRT_2, 0.0), 1e-15));
        assert!(close(out.amplitudes()[1], Complex64::new(-FRAC_1_SQRT_2, 0.0), 1e-15));
    }

    #[test]
    fn inner_products() {
        let zero = new_zero_state(1).unwrap();
        let one = zero.apply_gate(&GateOp::ry(0, PI).unwrap()).unwrap();
        assert!(inner_product(&zero, &one).unwrap().norm() < 1e-15);
        let half = zero.apply_gate(&GateOp::ry(0, PI / 2.0).unwrap()).unwrap();
        let ip = inner_product(&half, &zero).unwrap();
        assert!(close(ip, Complex64::new(libm::cos(PI / 4.0), 0.0), 1e-15));
        assert!(close(ip, Complex64::new(0.70710678118654752, 0.0), 1e-12));
        assert!(close(inner_product(&half, &half).unwrap(), Complex64::new(1.0, 0.0), 1e-12));
    }

    #[test]
    fn gate_validation() {
        assert!(GateOp::new(GateKind::Ry, &[0, 1], 0.1).is_err());
        assert!(GateOp::new(GateKind::ParityPhase, &[0], 0.1).is_err());
        assert!(GateOp::parity_phase(1, 1, 0.1).is_err());
        let s = new_zero_state(2).unwrap();
        assert!(matches!(
            s.apply_gate(&GateOp::h(2).unwrap()),
            Err(Error::InvalidArgument(_))
        ));
        let other = new_zero_state(3).unwrap();
        assert!(inner_product(&s, &other).is_err());
    }
}
