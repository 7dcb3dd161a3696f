//! Basis-expansion regression `f(x, q) = Σ_k q_k φ_k(x)`.
//!
//! Two trainers minimize `‖Φq − y‖² + λ‖q‖²`: an orthogonal-factorization
//! least-squares solve and a Metropolis simulated-annealing search. Class
//! labels come from thresholding `f`.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng as _;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::eval::Label;
use crate::linalg::{lstsq, Matrix};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisSpec {
    /// `(1, x_1, …, x_n)`
    Affine,
    /// Affine terms plus every `x_j x_k` with `j ≤ k`.
    Poly2,
}

impl BasisSpec {
    pub fn size(self, n: usize) -> usize {
        match self {
            BasisSpec::Affine => n + 1,
            BasisSpec::Poly2 => n + 1 + n * (n + 1) / 2,
        }
    }

    pub fn expand(self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.size(x.len()));
        out.push(1.0);
        out.extend_from_slice(x);
        if self == BasisSpec::Poly2 {
            for j in 0..x.len() {
                for k in j..x.len() {
                    out.push(x[j] * x[k]);
                }
            }
        }
        out
    }

    pub fn design(self, rows: &[Vec<f64>]) -> Result<Matrix> {
        let expanded: Vec<Vec<f64>> = rows.iter().map(|r| self.expand(r)).collect();
        Matrix::from_rows(&expanded)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegModel {
    pub coefficients: Vec<f64>,
    pub basis: BasisSpec,
    /// `f(x) ≥ threshold` predicts `+1`.
    pub threshold: f64,
    pub ridge: f64,
    /// Least-squares only: the design matrix lacked full column rank and the
    /// minimum-norm solution was returned.
    pub rank_deficient: bool,
}

impl RegModel {
    pub fn n_features(&self) -> Option<usize> {
        let m = self.coefficients.len();
        (0..=m).find(|&n| self.basis.size(n) == m)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        if self.basis.size(x.len()) != self.coefficients.len() {
            return Err(invalid!(
                "{} features do not match a {}-term basis",
                x.len(),
                self.coefficients.len()
            ));
        }
        Ok(self
            .basis
            .expand(x)
            .iter()
            .zip(&self.coefficients)
            .map(|(p, q)| p * q)
            .sum())
    }

    pub fn predict_label(&self, x: &[f64]) -> Result<Label> {
        Ok(if self.value(x)? >= self.threshold {
            Label::Active
        } else {
            Label::Inactive
        })
    }
}

pub fn predict_label(model: &RegModel, x: &[f64]) -> Result<Label> {
    model.predict_label(x)
}

fn check_problem(rows: &[Vec<f64>], y: &[f64], ridge: f64) -> Result<()> {
    if rows.is_empty() {
        return Err(invalid!("regression needs at least one row"));
    }
    if rows.len() != y.len() {
        return Err(invalid!("{} rows but {} targets", rows.len(), y.len()));
    }
    let dim = rows[0].len();
    if rows.iter().any(|r| r.len() != dim) {
        return Err(invalid!("ragged feature rows"));
    }
    if rows.iter().flatten().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid!("non-finite value in regression data"));
    }
    if !(ridge >= 0.0 && ridge.is_finite()) {
        return Err(invalid!("ridge penalty must be finite and ≥ 0"));
    }
    Ok(())
}

/// `‖Φq − y‖² + λ‖q‖²`
pub fn objective(design: &Matrix, y: &[f64], q: &[f64], ridge: f64) -> f64 {
    let fit: f64 = design
        .mul_vec(q)
        .iter()
        .zip(y)
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    fit + ridge * q.iter().map(|v| v * v).sum::<f64>()
}

pub fn fit_least_squares(
    rows: &[Vec<f64>],
    y: &[f64],
    basis: BasisSpec,
    ridge: f64,
) -> Result<RegModel> {
    check_problem(rows, y, ridge)?;
    let design = basis.design(rows)?;
    let sol = lstsq(&design, y, ridge)?;
    if sol.rank_deficient {
        log::warn!(
            "design matrix has rank {} < {}; returning the minimum-norm solution",
            sol.rank,
            design.cols()
        );
    }
    Ok(RegModel {
        coefficients: sol.x,
        basis,
        threshold: 0.0,
        ridge,
        rank_deficient: sol.rank_deficient,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealSchedule {
    pub initial_temperature: f64,
    /// Geometric factor applied to the temperature after every step.
    pub cooling: f64,
    pub iterations: usize,
    /// Proposal standard deviation at the initial temperature; it shrinks
    /// with `√(T/T₀)`.
    pub step: f64,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        Self {
            initial_temperature: 1.0,
            cooling: 0.999,
            iterations: 10_000,
            step: 0.5,
        }
    }
}

impl AnnealSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(invalid!("initial temperature must be finite and > 0"));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(invalid!("cooling factor must lie in (0, 1)"));
        }
        if self.iterations < 1 {
            return Err(invalid!("annealing needs at least one iteration"));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(invalid!("proposal step must be finite and > 0"));
        }
        Ok(())
    }
}

/// Per-iteration record of an annealing run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AnnealTrace {
    pub initial_loss: f64,
    /// Current (last accepted) loss after each iteration.
    pub current_loss: Vec<f64>,
    /// Best loss seen so far after each iteration.
    pub best_loss: Vec<f64>,
    pub accepted: usize,
}

pub fn fit_annealing(
    rows: &[Vec<f64>],
    y: &[f64],
    basis: BasisSpec,
    ridge: f64,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<RegModel> {
    fit_annealing_traced(rows, y, basis, ridge, schedule, seed).map(|(m, _)| m)
}

/// Metropolis search from `q = 0`. Each step perturbs one uniformly chosen
/// coefficient by a Gaussian draw; the best coefficients seen are returned.
pub fn fit_annealing_traced(
    rows: &[Vec<f64>],
    y: &[f64],
    basis: BasisSpec,
    ridge: f64,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<(RegModel, AnnealTrace)> {
    check_problem(rows, y, ridge)?;
    schedule.validate()?;
    let design = basis.design(rows)?;
    let m = design.cols();
    let col_sq: Vec<f64> = (0..m)
        .map(|k| (0..design.rows()).map(|i| design.get(i, k) * design.get(i, k)).sum())
        .collect();
    let mut rng = rng::seeded(seed);
    let unit = Normal::new(0.0, 1.0).map_err(|e| Error::Internal(alloc::format!("{e}")))?;

    let mut q = vec![0.0; m];
    // residual = Φq − y
    let mut residual: Vec<f64> = y.iter().map(|t| -t).collect();
    let initial_loss = objective(&design, y, &q, ridge);
    let mut loss = initial_loss;
    let mut best_q = q.clone();
    let mut best = loss;
    let mut trace = AnnealTrace {
        initial_loss,
        current_loss: Vec::with_capacity(schedule.iterations),
        best_loss: Vec::with_capacity(schedule.iterations),
        accepted: 0,
    };
    let mut temperature = schedule.initial_temperature;
    for _ in 0..schedule.iterations {
        let k = rng.random_range(0..m);
        let sigma = schedule.step * libm::sqrt(temperature / schedule.initial_temperature);
        let delta = sigma * unit.sample(&mut rng);
        let cross: f64 = (0..design.rows()).map(|i| residual[i] * design.get(i, k)).sum();
        let change = 2.0 * delta * cross
            + delta * delta * col_sq[k]
            + ridge * (2.0 * q[k] * delta + delta * delta);
        let u: f64 = rng.random();
        if change <= 0.0 || u < libm::exp(-change / temperature) {
            q[k] += delta;
            for (i, r) in residual.iter_mut().enumerate() {
                *r += delta * design.get(i, k);
            }
            loss += change;
            trace.accepted += 1;
            if loss < best {
                // Confirm against an exact evaluation before recording.
                let exact = objective(&design, y, &q, ridge);
                loss = exact;
                if exact < best {
                    best = exact;
                    best_q.copy_from_slice(&q);
                }
            }
        }
        trace.current_loss.push(loss);
        trace.best_loss.push(best);
        temperature *= schedule.cooling;
    }
    Ok((
        RegModel {
            coefficients: best_q,
            basis,
            threshold: 0.0,
            ridge,
            rank_deficient: false,
        },
        trace,
    ))
}
