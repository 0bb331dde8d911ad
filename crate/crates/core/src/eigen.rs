//! Extreme eigenvalues of dense complex Hermitian matrices: cyclic Jacobi for
//! moderate sizes and power iteration beyond.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const JACOBI_OFF_TOL: f64 = 1e-10;
pub const JACOBI_MAX_SWEEPS: usize = 60;
pub const POWER_RESIDUAL_TOL: f64 = 1e-8;
pub const POWER_MAX_ITERS: usize = 200_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EigenError {
    #[error("{method} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { method: &'static str, iterations: usize, residual: f64 },
}

/// Dense row-major Hermitian matrix. Both triangles are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    /// Builds from the upper triangle `f(p, q)`, `p ≤ q`; the diagonal is made real.
    pub fn from_upper(n: usize, f: impl Fn(usize, usize) -> Complex64 + Sync) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(p, row)| {
            for (q, v) in row.iter_mut().enumerate() {
                *v = if p == q {
                    Complex64::new(f(p, p).re, 0.0)
                } else if p < q {
                    f(p, q)
                } else {
                    f(q, p).conj()
                };
            }
        });
        Self { n, data }
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, p: usize, q: usize) -> Complex64 {
        self.data[p * self.n + q]
    }

    pub fn row(&self, p: usize) -> &[Complex64] {
        &self.data[p * self.n..(p + 1) * self.n]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn off_diagonal_norm(&self) -> f64 {
        off_norm(&self.data, self.n)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.n];
        self.matvec_into(v, &mut out);
        out
    }

    fn matvec_into(&self, v: &[Complex64], out: &mut [Complex64]) {
        let dot = |row: &[Complex64]| row.iter().zip(v).map(|(a, b)| a * b).sum::<Complex64>();
        if self.n >= 128 {
            out.par_iter_mut().zip(self.data.par_chunks(self.n)).for_each(|(o, row)| *o = dot(row));
        } else {
            out.iter_mut().zip(self.data.chunks(self.n)).for_each(|(o, row)| *o = dot(row));
        }
    }

    /// `v*Av / v*v`.
    pub fn rayleigh_quotient(&self, v: &[Complex64]) -> f64 {
        let av = self.matvec(v);
        let num: Complex64 = v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum();
        num.re / norm_sqr(v)
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn off_norm(a: &[Complex64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                s += a[p * n + q].norm_sqr();
            }
        }
    }
    s.sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JacobiResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub sweeps: usize,
    pub off_norm: f64,
}

/// Cyclic Jacobi. Each pivot first rotates the phase of `a_pq` to make it
/// real, then applies a real plane rotation. Stops once the off-diagonal
/// Frobenius norm is below `tol · max(1, ‖A‖_F)`.
pub fn jacobi_eigenvalues(m: &HermitianMatrix, tol: f64, max_sweeps: usize) -> Result<JacobiResult, EigenError> {
    let n = m.n;
    let mut a = m.data.clone();
    let target = tol * m.frobenius_norm().max(1.0);
    let mut off = off_norm(&a, n);
    let mut sweeps = 0;
    while off > target {
        if sweeps == max_sweeps {
            return Err(EigenError::NoConvergence { method: "jacobi", iterations: sweeps, residual: off });
        }
        // pivots below this size cannot move the norm past the target
        let skip = target / (n as f64 * 4.0);
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= skip {
                    continue;
                }
                rotate(&mut a, n, p, q, apq, r);
            }
        }
        sweeps += 1;
        off = off_norm(&a, n);
    }
    let mut eigenvalues: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(JacobiResult { eigenvalues, sweeps, off_norm: off })
}

fn rotate(a: &mut [Complex64], n: usize, p: usize, q: usize, apq: Complex64, r: f64) {
    // conjugating by diag(…, e^{−iφ} at q, …) turns a_pq into r
    let phase = apq / r;
    for k in 0..n {
        a[k * n + q] *= phase.conj();
        a[q * n + k] *= phase;
    }
    let (app, aqq) = (a[p * n + p].re, a[q * n + q].re);
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let (akp, akq) = (a[k * n + p], a[k * n + q]);
        let new_p = akp * c - akq * s;
        let new_q = akp * s + akq * c;
        a[k * n + p] = new_p;
        a[k * n + q] = new_q;
        a[p * n + k] = new_p.conj();
        a[q * n + k] = new_q.conj();
    }
    a[p * n + p] = Complex64::new(app - t * r, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerResult {
    pub eigenvalue: f64,
    pub iterations: usize,
    /// `‖Av − θv‖ / |θ|` at the returned unit vector.
    pub residual: f64,
}

fn start_vector(n: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut v: Vec<Complex64> =
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let norm = norm_sqr(&v).sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Dominant eigenvalue of the PSD operator `x ↦ shift·x + sign·Ax`.
fn power(m: &HermitianMatrix, shift: f64, sign: f64, tol: f64, max_iters: usize) -> Result<PowerResult, EigenError> {
    let n = m.n;
    let mut v = start_vector(n);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iters {
        m.matvec_into(&v, &mut w);
        w.iter_mut().zip(&v).for_each(|(wi, vi)| *wi = *wi * sign + vi * shift);
        let theta: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        let res2: f64 = w.iter().zip(&v).map(|(wi, vi)| (wi - vi * theta).norm_sqr()).sum();
        let norm = norm_sqr(&w).sqrt();
        if theta.abs() > 0.0 {
            residual = res2.sqrt() / theta.abs();
        }
        if norm == 0.0 || residual <= tol {
            return Ok(PowerResult { eigenvalue: theta, iterations: it, residual: if norm == 0.0 { 0.0 } else { residual } });
        }
        std::mem::swap(&mut v, &mut w);
        v.iter_mut().for_each(|z| *z /= norm);
    }
    Err(EigenError::NoConvergence { method: "power", iterations: max_iters, residual })
}

/// Largest eigenvalue of a positive semidefinite matrix.
pub fn power_largest(m: &HermitianMatrix, tol: f64, max_iters: usize) -> Result<PowerResult, EigenError> {
    power(m, 0.0, 1.0, tol, max_iters)
}

/// Smallest eigenvalue, given an upper bound `b` on the spectrum: power
/// iteration on `b·I − A`.
pub fn power_smallest(m: &HermitianMatrix, b: f64, tol: f64, max_iters: usize) -> Result<PowerResult, EigenError> {
    let r = power(m, b, -1.0, tol, max_iters)?;
    Ok(PowerResult { eigenvalue: b - r.eigenvalue, ..r })
}
