//! Kernel SVM trained by sequential minimal optimization (SMO).
//!
//! The dual solved is
//!
//! ```text
//! max  W(α) = Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij
//! s.t. 0 ≤ α_i ≤ C,  Σ α_i y_i = 0
//! ```
//!
//! Pair selection is deterministic: scan `i` in index order for the first
//! KKT violator, pair it with the `j` maximizing `|E_i − E_j|` (lowest index
//! on ties), and if that pair makes no progress fall back to every other `j`
//! in index order. The KKT test uses the same bias rule as the final model,
//! so a pass that finds no violator certifies the returned model.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::eval::Label;
use crate::kernel::{self, dataset_digest, GramMatrix, KernelConfig};
use crate::rng;

/// Pair updates between two recorded dual objective values.
pub const OBJECTIVE_TRACE_INTERVAL: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    /// Box penalty.
    pub c: f64,
    /// KKT violation tolerance.
    pub tol: f64,
    /// Smallest α step that counts as progress.
    pub eps: f64,
    pub max_passes: usize,
    pub max_iters: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            tol: 1e-3,
            eps: 1e-12,
            max_passes: 10,
            max_iters: 100_000,
        }
    }
}

impl SvmConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(invalid!("C must be finite and > 0"));
        }
        if !(self.tol > 0.0) {
            return Err(invalid!("tol must be > 0"));
        }
        if !(self.eps > 0.0) {
            return Err(invalid!("eps must be > 0"));
        }
        if self.max_passes < 1 || self.max_iters < 1 {
            return Err(invalid!("max_passes and max_iters must be ≥ 1"));
        }
        Ok(())
    }
}

/// Raw output of the dual solver.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub converged: bool,
    /// Successful pair updates.
    pub iterations: usize,
    /// `W(α)` at the start and after every [`OBJECTIVE_TRACE_INTERVAL`]
    /// updates, plus the final value.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub labels: Vec<Label>,
    /// Indices with `α_i > 0`, ascending.
    pub support_indices: Vec<usize>,
    pub kernel_config: KernelConfig,
    pub training_features: Vec<Vec<f64>>,
    pub c: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// `W(α)` evaluated from scratch.
pub fn dual_objective(k: &GramView<'_>, y: &[f64], alphas: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        let mut s = 0.0;
        for j in 0..n {
            s += alphas[j] * y[j] * k.get(i, j);
        }
        quad += alphas[i] * y[i] * s;
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

/// Row-major square matrix borrowed from a Gram matrix or a plain slice.
#[derive(Clone, Copy)]
pub struct GramView<'a> {
    n: usize,
    data: &'a [f64],
}

impl<'a> GramView<'a> {
    pub fn new(n: usize, data: &'a [f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(invalid!("{} entries for a {n}×{n} matrix", data.len()));
        }
        Ok(Self { n, data })
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

impl<'a> From<&'a GramMatrix> for GramView<'a> {
    fn from(g: &'a GramMatrix) -> Self {
        Self {
            n: g.size(),
            data: g.entries(),
        }
    }
}

struct Smo<'a> {
    k: GramView<'a>,
    y: Vec<f64>,
    c: f64,
    eps: f64,
    alphas: Vec<f64>,
    /// `F_i = Σ_j α_j y_j K_ij`
    f: Vec<f64>,
    bias: f64,
}

impl Smo<'_> {
    fn error(&self, i: usize) -> f64 {
        self.f[i] + self.bias - self.y[i]
    }

    fn violates(&self, i: usize, tol: f64) -> bool {
        let r = self.error(i) * self.y[i];
        (r < -tol && self.alphas[i] < self.c) || (r > tol && self.alphas[i] > 0.0)
    }

    fn refresh_bias(&mut self) {
        self.bias = bias_from(&self.y, &self.alphas, &self.f, self.c);
    }

    /// Optimizes the pair `(i, j)` analytically. Returns whether α moved.
    fn take_step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (ai, aj) = (self.alphas[i], self.alphas[j]);
        let (yi, yj) = (self.y[i], self.y[j]);
        let s = yi * yj;
        let (lo, hi) = if s < 0.0 {
            ((aj - ai).max(0.0), (self.c + aj - ai).min(self.c))
        } else {
            ((ai + aj - self.c).max(0.0), (ai + aj).min(self.c))
        };
        if lo >= hi {
            return false;
        }
        // Gain along the feasible line: ΔW(δ) = δ·y_j·(E_i − E_j) − ½·η·δ².
        let slope = yj * (self.error(i) - self.error(j));
        let eta = self.k.get(i, i) + self.k.get(j, j) - 2.0 * self.k.get(i, j);
        let gain = |aj_new: f64| {
            let d = aj_new - aj;
            d * slope - 0.5 * eta * d * d
        };
        let mut aj_new = if eta > 0.0 {
            (aj + slope / eta).clamp(lo, hi)
        } else {
            let (gl, gh) = (gain(lo), gain(hi));
            if gl > gh && gl > 0.0 {
                lo
            } else if gh > 0.0 {
                hi
            } else {
                aj
            }
        };
        if !(gain(aj_new) > 0.0) {
            return false;
        }
        let snap = self.eps * self.c;
        if aj_new < snap {
            aj_new = 0.0;
        } else if aj_new > self.c - snap {
            aj_new = self.c;
        }
        if libm::fabs(aj_new - aj) < self.eps * (aj_new + aj + self.eps) {
            return false;
        }
        let mut ai_new = ai + s * (aj - aj_new);
        if ai_new < snap {
            ai_new = 0.0;
        } else if ai_new > self.c - snap {
            ai_new = self.c;
        }
        let (di, dj) = ((ai_new - ai) * yi, (aj_new - aj) * yj);
        for (k, fk) in self.f.iter_mut().enumerate() {
            *fk += di * self.k.get(i, k) + dj * self.k.get(j, k);
        }
        self.alphas[i] = ai_new;
        self.alphas[j] = aj_new;
        self.refresh_bias();
        true
    }

    fn second_choice(&self, i: usize) -> usize {
        let ei = self.error(i);
        let mut best = if i == 0 { 1 } else { 0 };
        let mut gap = f64::NEG_INFINITY;
        for j in 0..self.y.len() {
            if j == i {
                continue;
            }
            let g = libm::fabs(ei - self.error(j));
            if g > gap {
                gap = g;
                best = j;
            }
        }
        best
    }
}

/// Bias from the current multipliers: mean of `y_i − F_i` over free support
/// vectors, else the midpoint of the interval allowed by bound vectors.
fn bias_from(y: &[f64], alphas: &[f64], f: &[f64], c: f64) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for i in 0..y.len() {
        if alphas[i] > 0.0 && alphas[i] < c {
            sum += y[i] - f[i];
            count += 1;
        }
    }
    if count > 0 {
        return sum / count as f64;
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..y.len() {
        let r = y[i] - f[i];
        let at_upper = alphas[i] >= c;
        if (y[i] > 0.0) != at_upper {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo,
        (false, true) => hi,
        (false, false) => 0.0,
    }
}

/// SMO on a raw kernel matrix and ±1 targets.
pub fn solve_dual(k: GramView<'_>, labels: &[Label], cfg: &SvmConfig) -> Result<DualSolution> {
    cfg.validate()?;
    let n = labels.len();
    if k.n != n {
        return Err(invalid!("kernel is {}×{} but there are {n} labels", k.n, k.n));
    }
    if !labels.contains(&Label::Active) || !labels.contains(&Label::Inactive) {
        return Err(invalid!("training labels contain a single class"));
    }
    if k.data.iter().any(|v| !v.is_finite()) {
        return Err(invalid!("kernel matrix has non-finite entries"));
    }
    let y: Vec<f64> = labels.iter().map(|l| l.sign()).collect();
    let mut smo = Smo {
        k,
        y,
        c: cfg.c,
        eps: cfg.eps,
        alphas: vec![0.0; n],
        f: vec![0.0; n],
        bias: 0.0,
    };
    smo.refresh_bias();
    let mut trace = vec![dual_objective(&smo.k, &smo.y, &smo.alphas)];
    let mut iterations = 0usize;
    let mut idle_passes = 0usize;
    let mut converged = false;
    'outer: loop {
        let mut changed = 0usize;
        let mut violators = 0usize;
        for i in 0..n {
            if !smo.violates(i, cfg.tol) {
                continue;
            }
            violators += 1;
            let first = smo.second_choice(i);
            let moved = smo.take_step(i, first)
                || (0..n)
                    .filter(|&j| j != i && j != first)
                    .any(|j| smo.take_step(i, j));
            if moved {
                changed += 1;
                iterations += 1;
                if iterations % OBJECTIVE_TRACE_INTERVAL == 0 {
                    trace.push(dual_objective(&smo.k, &smo.y, &smo.alphas));
                }
                if iterations >= cfg.max_iters {
                    break 'outer;
                }
            }
        }
        if violators == 0 {
            converged = true;
            break;
        }
        if changed == 0 {
            idle_passes += 1;
            if idle_passes >= cfg.max_passes {
                break;
            }
        } else {
            idle_passes = 0;
        }
    }
    if !converged {
        log::warn!("SMO stopped after {iterations} updates without meeting the KKT tolerance");
    }
    // Recompute F from scratch so the reported bias carries no drift.
    let f: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| smo.alphas[j] * smo.y[j] * smo.k.get(i, j)).sum())
        .collect();
    let bias = bias_from(&smo.y, &smo.alphas, &f, cfg.c);
    trace.push(dual_objective(&smo.k, &smo.y, &smo.alphas));
    Ok(DualSolution {
        alphas: smo.alphas,
        bias,
        converged,
        iterations,
        objective_trace: trace,
    })
}

/// Trains on a Gram matrix built over `features`.
pub fn train(
    gram: &GramMatrix,
    labels: &[Label],
    features: &[Vec<f64>],
    cfg: &SvmConfig,
) -> Result<SvmModel> {
    train_traced(gram, labels, features, cfg).map(|(m, _)| m)
}

/// Like [`train`], also returning the dual objective trace.
pub fn train_traced(
    gram: &GramMatrix,
    labels: &[Label],
    features: &[Vec<f64>],
    cfg: &SvmConfig,
) -> Result<(SvmModel, Vec<f64>)> {
    if gram.size() != labels.len() || features.len() != labels.len() {
        return Err(invalid!(
            "gram size {}, {} labels, {} feature rows",
            gram.size(),
            labels.len(),
            features.len()
        ));
    }
    if dataset_digest(features) != gram.dataset_digest() {
        return Err(invalid!("gram matrix was not computed from these features"));
    }
    let sol = solve_dual(gram.into(), labels, cfg)?;
    let support_indices = (0..labels.len()).filter(|&i| sol.alphas[i] > 0.0).collect();
    let model = SvmModel {
        alphas: sol.alphas,
        bias: sol.bias,
        labels: labels.to_vec(),
        support_indices,
        kernel_config: *gram.kernel_config(),
        training_features: features.to_vec(),
        c: cfg.c,
        converged: sol.converged,
        iterations: sol.iterations,
    };
    Ok((model, sol.objective_trace))
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.training_features.first().map_or(0, |r| r.len())
    }

    fn kernel_against(&self, i: usize, x: &[f64]) -> Result<f64> {
        match self.kernel_config {
            KernelConfig::QuantumShots {
                feature_map,
                shots,
                seed,
            } => {
                let p = kernel::kernel_value(
                    &KernelConfig::QuantumExact { feature_map },
                    &self.training_features[i],
                    x,
                )?;
                let s = rng::pair_seed(seed, i as u64, kernel::query_fingerprint(x));
                kernel::sample_fidelity(p, shots, s)
            }
            ref cfg => kernel::kernel_value(cfg, &self.training_features[i], x),
        }
    }

    /// `Σ_i α_i y_i K(x_i, x) + b`, summed over support vectors in index
    /// order.
    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(invalid!(
                "query has {} features, model was trained on {}",
                x.len(),
                self.dim()
            ));
        }
        let mut s = 0.0;
        for &i in &self.support_indices {
            s += self.alphas[i] * self.labels[i].sign() * self.kernel_against(i, x)?;
        }
        Ok(s + self.bias)
    }

    /// Sign of the decision value; exactly 0 maps to `+1`.
    pub fn predict(&self, x: &[f64]) -> Result<Label> {
        self.decision_value(x).map(Label::from_sign)
    }
}

pub fn decision_value(model: &SvmModel, x: &[f64]) -> Result<f64> {
    model.decision_value(x)
}

pub fn predict(model: &SvmModel, x: &[f64]) -> Result<Label> {
    model.predict(x)
}
