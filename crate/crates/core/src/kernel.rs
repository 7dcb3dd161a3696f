//! Kernel functions and Gram matrices.
//!
//! Quantum kernels are state fidelities `K_q(x, x') = |⟨φ(x)|φ(x')⟩|²`. The
//! shot-sampled variant replaces the exact value `p` by `k/shots` with
//! `k ~ Binomial(shots, p)`, which is the all-zeros outcome frequency of the
//! compute-uncompute circuit `U†(x')U(x)|0⟩` measured `shots` times.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{invalid, Error, Result};
use crate::feature_map::FeatureMapSpec;
use crate::rng;
use crate::state::StateVector;

/// Rounding slack tolerated on fidelities before clamping to `[0, 1]`.
pub const FIDELITY_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelConfig {
    QuantumExact {
        feature_map: FeatureMapSpec,
    },
    QuantumShots {
        feature_map: FeatureMapSpec,
        shots: u64,
        seed: u64,
    },
    Linear,
    /// `(x·x' + offset)^degree`
    Poly {
        degree: u32,
        offset: f64,
    },
    /// `exp(−gamma ‖x − x'‖²)`
    Rbf {
        gamma: f64,
    },
}

impl KernelConfig {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelConfig::QuantumExact { feature_map } => feature_map.validate(),
            KernelConfig::QuantumShots {
                feature_map, shots, ..
            } => {
                feature_map.validate()?;
                if shots < 1 {
                    return Err(invalid!("shots must be ≥ 1"));
                }
                Ok(())
            }
            KernelConfig::Linear => Ok(()),
            KernelConfig::Poly { degree, offset } => {
                if degree < 1 {
                    return Err(invalid!("polynomial degree must be ≥ 1"));
                }
                if !(offset >= 0.0 && offset.is_finite()) {
                    return Err(invalid!("polynomial offset must be finite and ≥ 0"));
                }
                Ok(())
            }
            KernelConfig::Rbf { gamma } => {
                if !(gamma > 0.0 && gamma.is_finite()) {
                    return Err(invalid!("rbf gamma must be finite and > 0"));
                }
                Ok(())
            }
        }
    }

    pub fn is_quantum(&self) -> bool {
        self.feature_map().is_some()
    }

    pub fn feature_map(&self) -> Option<&FeatureMapSpec> {
        match self {
            KernelConfig::QuantumExact { feature_map }
            | KernelConfig::QuantumShots { feature_map, .. } => Some(feature_map),
            _ => None,
        }
    }

    /// Short human label, e.g. `q | zz full r=2`.
    pub fn describe(&self) -> String {
        let mut s = String::new();
        let fm = |s: &mut String, f: &FeatureMapSpec| {
            let fam = match f.family {
                crate::FeatureMapFamily::Zz => "zz",
                crate::FeatureMapFamily::Custom => "custom",
            };
            let ent = match f.entanglement {
                crate::Entanglement::Linear => "linear",
                crate::Entanglement::Full => "full",
            };
            let _ = write!(s, "q | {fam} {ent} r={}", f.reps);
        };
        match self {
            KernelConfig::QuantumExact { feature_map } => fm(&mut s, feature_map),
            KernelConfig::QuantumShots {
                feature_map, shots, ..
            } => {
                fm(&mut s, feature_map);
                let _ = write!(s, " shots={shots}");
            }
            KernelConfig::Linear => s.push_str("c | linear"),
            KernelConfig::Poly { degree, offset } => {
                let _ = write!(s, "c | poly d={degree} c={offset}");
            }
            KernelConfig::Rbf { gamma } => {
                let _ = write!(s, "c | rbf gamma={gamma}");
            }
        }
        s
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(cfg: &KernelConfig, a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(invalid!("kernel arguments have {} and {} features", a.len(), b.len()));
    }
    if let Some(fm) = cfg.feature_map() {
        if a.len() != fm.n_qubits {
            return Err(invalid!(
                "{} features but the feature map has {} qubits",
                a.len(),
                fm.n_qubits
            ));
        }
    }
    Ok(())
}

/// `|⟨a|b⟩|²` clamped into `[0, 1]`.
pub fn fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    let f = a.inner_product(b)?.norm_sqr();
    clamp_unit(f)
}

fn clamp_unit(v: f64) -> Result<f64> {
    if !(-FIDELITY_SLACK..=1.0 + FIDELITY_SLACK).contains(&v) {
        return Err(Error::Internal(alloc::format!(
            "fidelity {v} outside [0, 1] beyond rounding slack"
        )));
    }
    Ok(v.clamp(0.0, 1.0))
}

fn classical_value(cfg: &KernelConfig, a: &[f64], b: &[f64]) -> f64 {
    match *cfg {
        KernelConfig::Linear => dot(a, b),
        KernelConfig::Poly { degree, offset } => libm::pow(dot(a, b) + offset, f64::from(degree)),
        KernelConfig::Rbf { gamma } => {
            let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
            libm::exp(-gamma * d2)
        }
        _ => unreachable!("quantum kinds are handled by the caller"),
    }
}

/// Draw `k ~ Binomial(shots, p)` from the stream seeded with `seed` and
/// return `k / shots`.
pub fn sample_fidelity(p: f64, shots: u64, seed: u64) -> Result<f64> {
    if shots < 1 {
        return Err(invalid!("shots must be ≥ 1"));
    }
    let dist = Binomial::new(shots, p.clamp(0.0, 1.0))
        .map_err(|e| Error::Internal(alloc::format!("binomial: {e}")))?;
    let k = dist.sample(&mut rng::seeded(seed));
    Ok(k as f64 / shots as f64)
}

/// Kernel value for one pair. Shot-sampled configs draw with the config's own
/// seed; see [`KernelEvaluator`] for the per-pair seeding used by Gram
/// matrices.
pub fn kernel_value(cfg: &KernelConfig, x: &[f64], x2: &[f64]) -> Result<f64> {
    cfg.validate()?;
    check_dims(cfg, x, x2)?;
    match cfg {
        KernelConfig::QuantumExact { feature_map } => {
            fidelity(&feature_map.encode(x)?, &feature_map.encode(x2)?)
        }
        KernelConfig::QuantumShots { .. } => shot_estimate(cfg, x, x2),
        _ => Ok(classical_value(cfg, x, x2)),
    }
}

pub fn shot_estimate(cfg: &KernelConfig, x: &[f64], x2: &[f64]) -> Result<f64> {
    let KernelConfig::QuantumShots {
        feature_map,
        shots,
        seed,
    } = cfg
    else {
        return Err(invalid!("shot_estimate needs a quantum_shots kernel config"));
    };
    cfg.validate()?;
    check_dims(cfg, x, x2)?;
    let p = fidelity(&feature_map.encode(x)?, &feature_map.encode(x2)?)?;
    sample_fidelity(p, *shots, *seed)
}

/// Kernel evaluation over a fixed dataset with cached encodings.
///
/// `pair(i, j)` is a pure function of `(cfg, rows[i], rows[j], i, j)`, so any
/// evaluation order or thread count yields the same matrix.
pub struct KernelEvaluator<'a> {
    cfg: KernelConfig,
    rows: &'a [Vec<f64>],
    states: Vec<StateVector>,
}

impl<'a> KernelEvaluator<'a> {
    pub fn new(cfg: &KernelConfig, rows: &'a [Vec<f64>]) -> Result<Self> {
        cfg.validate()?;
        let dim = check_rows(rows)?;
        if let Some(fm) = cfg.feature_map() {
            if dim != fm.n_qubits {
                return Err(invalid!(
                    "{dim} features but the feature map has {} qubits",
                    fm.n_qubits
                ));
            }
        }
        let states = match cfg.feature_map() {
            Some(fm) => rows.iter().map(|r| fm.encode(r)).collect::<Result<_>>()?,
            None => Vec::new(),
        };
        Ok(Self {
            cfg: *cfg,
            rows,
            states,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn config(&self) -> &KernelConfig {
        &self.cfg
    }

    pub fn pair(&self, i: usize, j: usize) -> Result<f64> {
        match self.cfg {
            KernelConfig::QuantumExact { .. } => fidelity(&self.states[i], &self.states[j]),
            KernelConfig::QuantumShots { shots, seed, .. } => {
                if i == j {
                    return Ok(1.0);
                }
                let p = fidelity(&self.states[i], &self.states[j])?;
                sample_fidelity(p, shots, rng::pair_seed(seed, i as u64, j as u64))
            }
            _ => Ok(classical_value(&self.cfg, &self.rows[i], &self.rows[j])),
        }
    }

    /// Upper-triangle pairs `(i, j)`, `i ≤ j`, in row-major order.
    pub fn upper_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let n = self.rows.len();
        (0..n).flat_map(move |i| (i..n).map(move |j| (i, j)))
    }
}

fn check_rows(rows: &[Vec<f64>]) -> Result<usize> {
    let first = rows.first().ok_or_else(|| invalid!("empty dataset"))?;
    let dim = first.len();
    if dim == 0 {
        return Err(invalid!("rows have no features"));
    }
    if let Some(i) = rows.iter().position(|r| r.len() != dim) {
        return Err(invalid!("row {i} has {} features, expected {dim}", rows[i].len()));
    }
    Ok(dim)
}

/// SHA-256 over the row count, column count and the little-endian bit
/// patterns of every value, hex encoded.
pub fn dataset_digest(rows: &[Vec<f64>]) -> String {
    let mut h = Sha256::new();
    h.update((rows.len() as u64).to_le_bytes());
    h.update((rows.first().map_or(0, |r| r.len()) as u64).to_le_bytes());
    for r in rows {
        for v in r {
            h.update(v.to_bits().to_le_bytes());
        }
    }
    let mut s = String::with_capacity(64);
    for b in h.finalize().iter() {
        let _ = write!(s, "{b:02x}");
    }
    s
}

/// Symmetric `N × N` kernel matrix with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    size: usize,
    entries: Vec<f64>,
    kernel_config: KernelConfig,
    dataset_digest: String,
}

impl GramMatrix {
    /// Builds from the upper triangle listed in [`KernelEvaluator::upper_pairs`]
    /// order, mirroring into the lower half.
    pub fn from_upper(
        size: usize,
        upper: &[f64],
        kernel_config: KernelConfig,
        dataset_digest: String,
    ) -> Result<Self> {
        if upper.len() != size * (size + 1) / 2 {
            return Err(invalid!("upper triangle length does not match size {size}"));
        }
        let mut entries = alloc::vec![0.0; size * size];
        let mut it = upper.iter();
        for i in 0..size {
            for j in i..size {
                let v = *it.next().expect("length checked");
                entries[i * size + j] = v;
                entries[j * size + i] = v;
            }
        }
        Ok(Self {
            size,
            entries,
            kernel_config,
            dataset_digest,
        })
    }

    /// Builds from a full row-major matrix, e.g. one read back from disk.
    pub fn from_entries(
        size: usize,
        entries: Vec<f64>,
        kernel_config: KernelConfig,
        dataset_digest: String,
    ) -> Result<Self> {
        if entries.len() != size * size {
            return Err(invalid!("{} entries for a {size}×{size} matrix", entries.len()));
        }
        Ok(Self {
            size,
            entries,
            kernel_config,
            dataset_digest,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn kernel_config(&self) -> &KernelConfig {
        &self.kernel_config
    }

    pub fn dataset_digest(&self) -> &str {
        &self.dataset_digest
    }

    /// Adds `jitter` to every diagonal entry. Meant for shot-sampled
    /// matrices, which need not be positive semidefinite.
    pub fn add_diagonal_jitter(&mut self, jitter: f64) {
        for i in 0..self.size {
            self.entries[i * self.size + i] += jitter;
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.size {
            for j in (i + 1)..self.size {
                worst = worst.max(libm::fabs(self.get(i, j) - self.get(j, i)));
            }
        }
        worst
    }
}

/// Gram matrix of `cfg` over `rows`, evaluated sequentially.
pub fn gram(cfg: &KernelConfig, rows: &[Vec<f64>]) -> Result<GramMatrix> {
    let eval = KernelEvaluator::new(cfg, rows)?;
    let upper = eval
        .upper_pairs()
        .map(|(i, j)| eval.pair(i, j))
        .collect::<Result<Vec<_>>>()?;
    GramMatrix::from_upper(rows.len(), &upper, *cfg, dataset_digest(rows))
}

/// Fingerprint of a query vector, used to seed shot sampling against
/// out-of-sample points.
pub fn query_fingerprint(x: &[f64]) -> u64 {
    let mut h = Sha256::new();
    for v in x {
        h.update(v.to_bits().to_le_bytes());
    }
    let out = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&out[..8]);
    u64::from_le_bytes(b)
}
