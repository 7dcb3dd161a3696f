//! Small dense linear algebra: row-major matrices, pivoted Householder QR
//! least squares and a symmetric eigen-solver (Householder tridiagonalization
//! followed by implicit QL).

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        if rows.iter().any(|x| x.len() != c) {
            return Err(invalid!("ragged matrix rows"));
        }
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn t_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate().take(self.rows) {
            for (o, a) in out.iter_mut().zip(self.row(i)) {
                *o += a * vi;
            }
        }
        out
    }
}

/// Householder QR with column pivoting, stored LAPACK-style: `R` in the upper
/// triangle, reflector vectors below the diagonal with `tau` alongside.
struct PivotedQr {
    qr: Matrix,
    tau: Vec<f64>,
    perm: Vec<usize>,
}

impl PivotedQr {
    fn factor(a: &Matrix, pivot: bool) -> Self {
        let (m, n) = (a.rows, a.cols);
        let mut qr = a.clone();
        let k = m.min(n);
        let mut tau = vec![0.0; k];
        let mut perm: Vec<usize> = (0..n).collect();
        let mut norms: Vec<f64> = (0..n).map(|j| col_norm_sq(&qr, j, 0)).collect();
        for step in 0..k {
            if pivot {
                let best = (step..n)
                    .fold(step, |b, j| if norms[j] > norms[b] { j } else { b });
                if best != step {
                    for i in 0..m {
                        let (x, y) = (qr.get(i, step), qr.get(i, best));
                        qr.set(i, step, y);
                        qr.set(i, best, x);
                    }
                    perm.swap(step, best);
                    norms.swap(step, best);
                }
            }
            let alpha = col_norm_sq(&qr, step, step);
            let norm = libm::sqrt(alpha);
            if norm == 0.0 {
                tau[step] = 0.0;
                continue;
            }
            let x0 = qr.get(step, step);
            let beta = if x0 >= 0.0 { -norm } else { norm };
            let v0 = x0 - beta;
            for i in (step + 1)..m {
                qr.set(i, step, qr.get(i, step) / v0);
            }
            tau[step] = (beta - x0) / beta;
            qr.set(step, step, beta);
            for j in (step + 1)..n {
                let mut s = qr.get(step, j);
                for i in (step + 1)..m {
                    s += qr.get(i, step) * qr.get(i, j);
                }
                s *= tau[step];
                qr.set(step, j, qr.get(step, j) - s);
                for i in (step + 1)..m {
                    qr.set(i, j, qr.get(i, j) - s * qr.get(i, step));
                }
            }
            for (j, nj) in norms.iter_mut().enumerate().skip(step + 1) {
                *nj = col_norm_sq(&qr, j, step + 1);
            }
        }
        Self { qr, tau, perm }
    }

    /// Overwrites `b` with `Qᵀ b`.
    fn apply_qt(&self, b: &mut [f64]) {
        let m = self.qr.rows;
        for (step, &t) in self.tau.iter().enumerate() {
            if t == 0.0 {
                continue;
            }
            let mut s = b[step];
            for i in (step + 1)..m {
                s += self.qr.get(i, step) * b[i];
            }
            s *= t;
            b[step] -= s;
            for i in (step + 1)..m {
                b[i] -= s * self.qr.get(i, step);
            }
        }
    }

    fn rank(&self) -> usize {
        let k = self.tau.len();
        if k == 0 {
            return 0;
        }
        let r00 = libm::fabs(self.qr.get(0, 0));
        let tol = r00 * f64::EPSILON * (self.qr.rows.max(self.qr.cols) as f64);
        (0..k)
            .take_while(|&i| libm::fabs(self.qr.get(i, i)) > tol && r00 > 0.0)
            .count()
    }
}

fn col_norm_sq(a: &Matrix, j: usize, from: usize) -> f64 {
    (from..a.rows).map(|i| a.get(i, j) * a.get(i, j)).sum()
}

/// Solution of a least-squares problem.
#[derive(Debug, Clone, PartialEq)]
pub struct LstsqSolution {
    pub x: Vec<f64>,
    pub rank: usize,
    pub rank_deficient: bool,
}

/// Minimizes `‖A x − b‖² + λ‖x‖²` through orthogonal factorizations.
///
/// With `λ > 0` the system is augmented with `√λ·I` rows and always has full
/// column rank. With `λ = 0` a rank-deficient `A` yields the minimum-norm
/// solution via a complete orthogonal decomposition.
pub fn lstsq(a: &Matrix, b: &[f64], lambda: f64) -> Result<LstsqSolution> {
    if b.len() != a.rows {
        return Err(invalid!("rhs has {} entries, matrix has {} rows", b.len(), a.rows));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid!("ridge penalty must be finite and ≥ 0"));
    }
    let n = a.cols;
    if lambda > 0.0 {
        let mut aug = Matrix::zeros(a.rows + n, n);
        aug.data[..a.data.len()].copy_from_slice(&a.data);
        let s = libm::sqrt(lambda);
        for j in 0..n {
            aug.set(a.rows + j, j, s);
        }
        let mut rhs = b.to_vec();
        rhs.resize(a.rows + n, 0.0);
        let mut sol = min_norm_solve(&aug, &rhs);
        sol.rank_deficient = false;
        return Ok(sol);
    }
    Ok(min_norm_solve(a, b))
}

fn min_norm_solve(a: &Matrix, b: &[f64]) -> LstsqSolution {
    let n = a.cols;
    let f = PivotedQr::factor(a, true);
    let rank = f.rank();
    let mut qtb = b.to_vec();
    f.apply_qt(&mut qtb);
    let mut w = vec![0.0; n];
    if rank == n {
        back_substitute_upper(&f.qr, &qtb[..n], &mut w);
    } else if rank > 0 {
        // [R11 R12]ᵀ = Z [T; 0], so A P = Q [Tᵀ 0; 0 0] Zᵀ.
        let mut top = Matrix::zeros(n, rank);
        for i in 0..rank {
            for j in i..n {
                top.set(j, i, f.qr.get(i, j));
            }
        }
        let z = PivotedQr::factor(&top, false);
        // Solve Tᵀ u = (Qᵀb)[..rank], forward substitution on the lower Tᵀ.
        let mut u = vec![0.0; n];
        for i in 0..rank {
            let s: f64 = (0..i).map(|k| z.qr.get(k, i) * u[k]).sum();
            u[i] = (qtb[i] - s) / z.qr.get(i, i);
        }
        // w = Z u, applying reflectors in reverse.
        for step in (0..z.tau.len()).rev() {
            let t = z.tau[step];
            if t == 0.0 {
                continue;
            }
            let mut s = u[step];
            for i in (step + 1)..n {
                s += z.qr.get(i, step) * u[i];
            }
            s *= t;
            u[step] -= s;
            for i in (step + 1)..n {
                u[i] -= s * z.qr.get(i, step);
            }
        }
        w = u;
    }
    let mut x = vec![0.0; n];
    for (k, &p) in f.perm.iter().enumerate() {
        x[p] = w[k];
    }
    LstsqSolution {
        x,
        rank,
        rank_deficient: rank < n,
    }
}

fn back_substitute_upper(r: &Matrix, rhs: &[f64], out: &mut [f64]) {
    let n = out.len();
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| r.get(i, k) * out[k]).sum();
        out[i] = (rhs[i] - s) / r.get(i, i);
    }
}

/// Eigen-decomposition of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricEigen {
    /// Descending.
    pub values: Vec<f64>,
    /// `vectors[k]` pairs with `values[k]`; unit length.
    pub vectors: Vec<Vec<f64>>,
}

/// Householder reduction to tridiagonal form, then implicit QL iterations.
pub fn symmetric_eigen(a: &Matrix) -> Result<SymmetricEigen> {
    let n = a.rows;
    if n != a.cols {
        return Err(invalid!("eigen-decomposition needs a square matrix"));
    }
    if a.data.iter().any(|v| !v.is_finite()) {
        return Err(invalid!("matrix has non-finite entries"));
    }
    let mut v: Vec<Vec<f64>> = a.to_rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    if n > 0 {
        tridiagonalize(&mut v, &mut d, &mut e);
        tql(&mut v, &mut d, &mut e)?;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]).then(i.cmp(&j)));
    Ok(SymmetricEigen {
        values: order.iter().map(|&k| d[k]).collect(),
        vectors: order
            .iter()
            .map(|&k| (0..n).map(|i| v[i][k]).collect())
            .collect(),
    })
}

fn tridiagonalize(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for j in 0..n {
        d[j] = v[n - 1][j];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for &dk in d.iter().take(i) {
            scale += libm::fabs(dk);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
                v[j][i] = 0.0;
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale;
                h += *dk * *dk;
            }
            let f = d[i - 1];
            let mut g = libm::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                let f = d[j];
                v[j][i] = f;
                let mut g = e[j] + v[j][j] * f;
                for k in (j + 1)..i {
                    g += v[k][j] * d[k];
                    e[k] += v[k][j] * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    v[k][j] -= f * e[k] + g * d[k];
                }
                d[j] = v[i - 1][j];
                v[i][j] = 0.0;
            }
        }
        d[i] = h;
    }
    for i in 0..n.saturating_sub(1) {
        v[n - 1][i] = v[i][i];
        v[i][i] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v[k][i + 1] / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v[k][i + 1] * v[k][j];
                }
                for k in 0..=i {
                    v[k][j] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            v[k][i + 1] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v[n - 1][j];
        v[n - 1][j] = 0.0;
    }
    v[n - 1][n - 1] = 1.0;
    e[0] = 0.0;
}

fn tql(v: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(libm::fabs(d[l]) + libm::fabs(e[l]));
        let mut m = l;
        while m < n {
            if libm::fabs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > 100 {
                    return Err(crate::Error::Internal(
                        "symmetric eigen-solver did not converge".into(),
                    ));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = libm::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = libm::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in v.iter_mut() {
                        let h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if libm::fabs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
