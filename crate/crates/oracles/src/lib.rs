//! Slow, obviously-correct reference computations.
//!
//! Nothing in here shares code with `qsar-kernel-core`. Every routine is the
//! textbook dense construction so that tests can compare the optimized paths
//! against something that is easy to audit by eye.

use num_complex::Complex64;

pub type CMatrix = Vec<Vec<Complex64>>;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    let mut m = vec![vec![c(0.0, 0.0); dim]; dim];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = c(1.0, 0.0);
    }
    m
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0, 0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.len();
    let mut out = vec![vec![c(0.0, 0.0); n]; n];
    for i in 0..n {
        for k in 0..n {
            for j in 0..n {
                out[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    out
}

pub fn matvec(a: &CMatrix, v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn add(a: &CMatrix, b: &CMatrix, scale_b: Complex64) -> CMatrix {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + scale_b * y).collect())
        .collect()
}

/// Embed single-qubit operators into the full register. Qubit 0 is the least
/// significant bit, so it is the rightmost Kronecker factor.
pub fn embed(n_qubits: usize, ops: &[(usize, CMatrix)]) -> CMatrix {
    let mut full = vec![vec![c(1.0, 0.0)]];
    for q in (0..n_qubits).rev() {
        let factor = ops
            .iter()
            .find(|(t, _)| *t == q)
            .map(|(_, m)| m.clone())
            .unwrap_or_else(|| identity(2));
        full = kron(&full, &factor);
    }
    full
}

pub fn ry(theta: f64) -> CMatrix {
    let (s, co) = ((theta / 2.0).sin(), (theta / 2.0).cos());
    vec![vec![c(co, 0.0), c(-s, 0.0)], vec![c(s, 0.0), c(co, 0.0)]]
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![c(h, 0.0), c(h, 0.0)], vec![c(h, 0.0), c(-h, 0.0)]]
}

pub fn phase(lambda: f64) -> CMatrix {
    vec![
        vec![c(1.0, 0.0), c(0.0, 0.0)],
        vec![c(0.0, 0.0), Complex64::from_polar(1.0, lambda)],
    ]
}

pub fn pauli_z() -> CMatrix {
    vec![vec![c(1.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]]
}

/// (I + Z_jZ_k)/2 + e^{iλ}(I − Z_jZ_k)/2, i.e. phase e^{iλ} on the odd-parity
/// subspace of qubits j and k.
pub fn parity_phase(n_qubits: usize, j: usize, k: usize, lambda: f64) -> CMatrix {
    let dim = 1 << n_qubits;
    let zz = embed(n_qubits, &[(j, pauli_z()), (k, pauli_z())]);
    let id = identity(dim);
    let even = add(&id, &zz, c(1.0, 0.0));
    let odd = add(&id, &zz, c(-1.0, 0.0));
    let e = Complex64::from_polar(1.0, lambda);
    add(
        &even.iter().map(|r| r.iter().map(|x| x * 0.5).collect()).collect(),
        &odd.iter().map(|r| r.iter().map(|x| x * 0.5).collect()).collect(),
        e,
    )
}

/// A gate in oracle terms. Mirrors the implementation's gate set but is
/// defined independently.
#[derive(Clone, Debug)]
pub enum OracleGate {
    Ry(usize, f64),
    H(usize),
    Phase(usize, f64),
    ParityPhase(usize, usize, f64),
}

pub fn gate_unitary(n_qubits: usize, gate: &OracleGate) -> CMatrix {
    match *gate {
        OracleGate::Ry(q, t) => embed(n_qubits, &[(q, ry(t))]),
        OracleGate::H(q) => embed(n_qubits, &[(q, hadamard())]),
        OracleGate::Phase(q, l) => embed(n_qubits, &[(q, phase(l))]),
        OracleGate::ParityPhase(j, k, l) => parity_phase(n_qubits, j, k, l),
    }
}

/// Product U = G_m ⋯ G_1 for gates listed in application order.
pub fn circuit_unitary(n_qubits: usize, gates: &[OracleGate]) -> CMatrix {
    gates.iter().fold(identity(1 << n_qubits), |acc, g| {
        matmul(&gate_unitary(n_qubits, g), &acc)
    })
}

pub fn zero_state(n_qubits: usize) -> Vec<Complex64> {
    let mut v = vec![c(0.0, 0.0); 1 << n_qubits];
    v[0] = c(1.0, 0.0);
    v
}

fn pairs(n: usize, full: bool) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for j in 0..n {
        for k in (j + 1)..n {
            if full || k == j + 1 {
                out.push((j, k));
            }
        }
    }
    out
}

/// Gate list of the ZZ-family encoding circuit.
pub fn zz_gates(x: &[f64], reps: usize, full: bool) -> Vec<OracleGate> {
    let pi = std::f64::consts::PI;
    let n = x.len();
    let mut gates = Vec::new();
    for _ in 0..reps {
        gates.extend((0..n).map(OracleGate::H));
        gates.extend((0..n).map(|j| OracleGate::Phase(j, 2.0 * x[j])));
        for (j, k) in pairs(n, full) {
            gates.push(OracleGate::ParityPhase(j, k, 2.0 * (pi - x[j]) * (pi - x[k])));
        }
    }
    gates
}

/// Gate list of the RY + parity-phase ("custom") encoding circuit.
pub fn custom_gates(x: &[f64], reps: usize, full: bool) -> Vec<OracleGate> {
    let pi = std::f64::consts::PI;
    let n = x.len();
    let mut gates = Vec::new();
    for _ in 0..reps {
        gates.extend((0..n).map(|j| OracleGate::Ry(j, 2.0 * x[j])));
        for (j, k) in pairs(n, full) {
            gates.push(OracleGate::ParityPhase(j, k, pi * x[j] * x[k]));
        }
    }
    gates
}

pub fn encoded_state(gates: &[OracleGate], n_qubits: usize) -> Vec<Complex64> {
    matvec(&circuit_unitary(n_qubits, gates), &zero_state(n_qubits))
}

pub fn fidelity(a: &[Complex64], b: &[Complex64]) -> f64 {
    let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
    ip.norm_sqr()
}

// ---------------------------------------------------------------------------
// Real linear algebra

/// Cyclic Jacobi eigen-solver for a symmetric matrix. Runs until the
/// off-diagonal Frobenius norm is below `1e-12` (relative to the input norm
/// when that is larger than one). Returns eigenvalues (descending) and the
/// matching eigenvectors as rows.
pub fn jacobi_eigen(a: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    let scale = m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    for _sweep in 0..200 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i][j] * m[i][j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-12 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = cs * mkp - sn * mkq;
                    m[k][q] = sn * mkp + cs * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = cs * mpk - sn * mqk;
                    m[q][k] = sn * mpk + cs * mqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = cs * vp - sn * vq;
                    row[q] = sn * vp + cs * vq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j][j].partial_cmp(&m[i][i]).unwrap());
    let values = order.iter().map(|&i| m[i][i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k][i]).collect())
        .collect();
    (values, vectors)
}

pub fn min_eigenvalue(a: &[Vec<f64>]) -> f64 {
    let (vals, _) = jacobi_eigen(a);
    *vals.last().unwrap()
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut r = row.clone();
            r.push(bi);
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for k in col..=n {
                m[r][k] -= f * m[col][k];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

/// Ridge solution `(ΦᵀΦ + λI)⁻¹ Φᵀ y` via the normal equations.
pub fn ridge_normal_equations(phi: &[Vec<f64>], y: &[f64], lambda: f64) -> Vec<f64> {
    let m = phi[0].len();
    let mut ata = vec![vec![0.0; m]; m];
    let mut aty = vec![0.0; m];
    for (row, &yi) in phi.iter().zip(y) {
        for i in 0..m {
            aty[i] += row[i] * yi;
            for j in 0..m {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    for (i, row) in ata.iter_mut().enumerate() {
        row[i] += lambda;
    }
    gauss_solve(&ata, &aty)
}

// ---------------------------------------------------------------------------
// SVM dual reference

/// Result of the projected-gradient dual solve.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub bias: f64,
    pub kkt_residual: f64,
}

/// Euclidean projection onto `{0 ≤ α ≤ C, Σ α_i y_i = 0}` by bisection on
/// the equality multiplier.
pub fn project_feasible(z: &[f64], y: &[f64], c: f64) -> Vec<f64> {
    let eval = |nu: f64| -> (Vec<f64>, f64) {
        let a: Vec<f64> = z
            .iter()
            .zip(y)
            .map(|(zi, yi)| (zi - nu * yi).clamp(0.0, c))
            .collect();
        let s = a.iter().zip(y).map(|(ai, yi)| ai * yi).sum();
        (a, s)
    };
    // Σ y_i clip(z_i − ν y_i) is non-increasing in ν.
    let bound = z.iter().map(|v| v.abs()).fold(0.0, f64::max) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if eval(mid).1 > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    eval(0.5 * (lo + hi)).0
}

/// Projected gradient ascent on the SVM dual, run until the projected
/// gradient step residual `‖α − P(α + ∇W/L)‖_∞` drops below `1e-10`.
pub fn svm_dual_projected_gradient(k: &[Vec<f64>], y: &[f64], c: f64) -> DualSolution {
    let n = y.len();
    let q: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| y[i] * y[j] * k[i][j]).collect())
        .collect();
    let lmax = jacobi_eigen(&q).0[0].max(1e-12);
    let step = 1.0 / lmax;
    let mut alpha = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..2_000_000 {
        let grad: Vec<f64> = (0..n)
            .map(|i| 1.0 - (0..n).map(|j| q[i][j] * alpha[j]).sum::<f64>())
            .collect();
        let z: Vec<f64> = (0..n).map(|i| alpha[i] + step * grad[i]).collect();
        let next = project_feasible(&z, y, c);
        residual = next
            .iter()
            .zip(&alpha)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        alpha = next;
        if residual <= 1e-10 {
            break;
        }
    }
    let bias = reference_bias(k, y, &alpha, c);
    DualSolution {
        alphas: alpha,
        bias,
        kkt_residual: residual,
    }
}

fn reference_bias(k: &[Vec<f64>], y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let n = y.len();
    let f = |i: usize| (0..n).map(|j| alpha[j] * y[j] * k[j][i]).sum::<f64>();
    let margin = 1e-8 * c;
    let free: Vec<usize> = (0..n)
        .filter(|&i| alpha[i] > margin && alpha[i] < c - margin)
        .collect();
    if !free.is_empty() {
        return free.iter().map(|&i| y[i] - f(i)).sum::<f64>() / free.len() as f64;
    }
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..n {
        let r = y[i] - f(i);
        let at_upper = alpha[i] >= c - margin;
        if (y[i] > 0.0) != at_upper {
            lo = lo.max(r);
        } else {
            hi = hi.min(r);
        }
    }
    0.5 * (lo + hi)
}

pub fn dual_decision_values(k: &[Vec<f64>], y: &[f64], sol: &DualSolution) -> Vec<f64> {
    let n = y.len();
    (0..n)
        .map(|i| (0..n).map(|j| sol.alphas[j] * y[j] * k[j][i]).sum::<f64>() + sol.bias)
        .collect()
}

/// Largest KKT violation of `(α, b)` on the training set:
/// `α_i = 0 ⇒ y_i f_i ≥ 1`, `0 < α_i < C ⇒ y_i f_i = 1`, `α_i = C ⇒ y_i f_i ≤ 1`.
pub fn kkt_violation(k: &[Vec<f64>], y: &[f64], alpha: &[f64], bias: f64, c: f64) -> f64 {
    let n = y.len();
    let margin = 1e-12 * c;
    (0..n)
        .map(|i| {
            let f: f64 = (0..n).map(|j| alpha[j] * y[j] * k[j][i]).sum::<f64>() + bias;
            let yf = y[i] * f;
            if alpha[i] <= margin {
                (1.0 - yf).max(0.0)
            } else if alpha[i] >= c - margin {
                (yf - 1.0).max(0.0)
            } else {
                (yf - 1.0).abs()
            }
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parity_phase_is_diagonal_on_odd_states() {
        let u = parity_phase(2, 0, 1, 0.7);
        let e = Complex64::from_polar(1.0, 0.7);
        assert!((u[0][0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((u[1][1] - e).norm() < 1e-15);
        assert!((u[2][2] - e).norm() < 1e-15);
        assert!((u[3][3] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn embed_puts_qubit_zero_on_lsb() {
        let x = embed(2, &[(0, ry(std::f64::consts::PI))]);
        let v = matvec(&x, &zero_state(2));
        assert!((v[1] - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn jacobi_recovers_known_spectrum() {
        let (vals, _) = jacobi_eigen(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        assert!((vals[0] - 3.0).abs() < 1e-12 && (vals[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn dual_two_point() {
        let k = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let sol = svm_dual_projected_gradient(&k, &[1.0, -1.0], 1.0);
        assert!((sol.alphas[0] - 1.0).abs() < 1e-9);
        assert!(sol.bias.abs() < 1e-9);
    }
}
