//! Fourier transforms `μ̂(ξ) = ∫ e^{−2πiξx} dμ(x)` and periodized power sums.
//!
//! Sign convention: the transform carries `e^{−2πiξx}` while frame elements
//! are `e_λ(x) = e^{+2πiλx}`, so `⟨e_ξ, e_λ⟩_μ = μ̂(ξ − λ)` and
//! `⟨f·1, e_λ⟩_μ` pairs with `μ̂` at `+λ` shifted arguments throughout.
//!
//! Densities are integrated against the exponential exactly on each cell
//! after replacing `φ` by its piecewise-linear interpolant (a Filon-type
//! rule), so the error is bounded by `‖φ − Iφ‖₁` uniformly in `ξ`.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::measure::{DensityMeasure, Measure1D};
use crate::selfsim::IfsSystem;
use crate::spectrum::Spectrum;

/// Largest quadrature grid the transform will build.
pub const MAX_FT_GRID: usize = 1 << 22;
/// Largest product truncation depth.
pub const MAX_PRODUCT_DEPTH: usize = 100_000;
/// Tolerance used by scans and power sums.
pub const SCAN_TOL: f64 = 1e-10;

const BASE_GRID: usize = 64;
/// Multiplier turning the observed interpolant change into an error bound;
/// valid for convergence at least as fast as `√h`.
const L1_SAFETY: f64 = 2.5;

#[derive(Debug, Error)]
pub enum FourierError {
    #[error("tolerance {tol:e} needs {required} which exceeds the limit {limit}")]
    TolTooTight { tol: f64, required: String, limit: usize },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("power must be 2 or 4, got {0}")]
    InvalidPower(u32),
    #[error("window must be at least 1, got {0}")]
    BadWindow(usize),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FtMethod {
    Quadrature,
    Product,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FtEvaluation {
    pub xi: f64,
    pub value: Complex64,
    pub abs_error_bound: f64,
    pub method: FtMethod,
    /// Product method: index of the last factor. Quadrature: number of cells.
    pub truncation_depth: usize,
}

/// `∫₀¹ e^{−iθs} ds`, `∫₀¹ (1−s) e^{−iθs} ds`, `∫₀¹ s e^{−iθs} ds`.
pub(crate) fn filon_weights(theta: f64) -> (Complex64, Complex64) {
    if theta.abs() < 1.0 {
        // power series; 30 terms reach full precision for |θ| < 1
        let mut term = Complex64::new(1.0, 0.0);
        let (mut f_all, mut f1) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        for k in 0..30 {
            if k > 0 {
                term *= Complex64::new(0.0, -theta) / k as f64;
            }
            f_all += term / (k + 1) as f64;
            f1 += term / (k + 2) as f64;
        }
        (f_all - f1, f1)
    } else {
        let e = Complex64::cis(-theta);
        let i = Complex64::i();
        let f_all = (1.0 - e) / (i * theta);
        let f1 = i * e / theta + (e - 1.0) / (theta * theta);
        (f_all - f1, f1)
    }
}

/// Prepared quadrature for a density measure, sized once for a tolerance.
#[derive(Debug, Clone)]
pub struct DensityTransform {
    lo: f64,
    step: f64,
    values: Vec<f64>,
    mass: f64,
    abs_error_bound: f64,
    total_variation: Option<f64>,
}

impl DensityTransform {
    pub fn new(d: &DensityMeasure, tol: f64) -> Result<Self, FourierError> {
        if !(tol > 0.0) {
            return Err(FourierError::BadTolerance(tol));
        }
        let (lo, len) = (d.hull.lo, d.hull.len());
        let mut n = BASE_GRID;
        loop {
            let fine = 2 * n;
            if fine > MAX_FT_GRID {
                return Err(FourierError::TolTooTight {
                    tol,
                    required: format!("a grid finer than {MAX_FT_GRID} cells"),
                    limit: MAX_FT_GRID,
                });
            }
            let h = len / fine as f64;
            let values = node_values(&|x| d.density.eval(x), lo, h, fine);
            // ‖I_fine − I_coarse‖₁: on each coarse cell the two interpolants
            // differ by a hat of height |φ(mid) − avg| and width 2h.
            let diff: f64 = (0..n)
                .map(|k| {
                    let (a, m, b) = (values[2 * k], values[2 * k + 1], values[2 * k + 2]);
                    h * (m - 0.5 * (a + b)).abs()
                })
                .sum();
            let mass = trapezoid(&values, h);
            let bound = 2.0 * L1_SAFETY * diff / mass + 1e-13;
            if bound <= tol {
                return Ok(Self {
                    lo,
                    step: h,
                    values,
                    mass,
                    abs_error_bound: bound,
                    total_variation: d.density.total_variation(),
                });
            }
            n *= 2;
        }
    }

    pub fn cells(&self) -> usize {
        self.values.len() - 1
    }

    pub fn abs_error_bound(&self) -> f64 {
        self.abs_error_bound
    }

    /// `C` in `|μ̂(ξ)| ≤ C/|ξ|`, when the density has a certificate.
    pub fn decay_constant(&self) -> Option<f64> {
        self.total_variation.map(|tv| tv / (self.mass * 2.0 * PI))
    }

    pub fn eval(&self, xi: f64) -> FtEvaluation {
        let value = if xi == 0.0 { Complex64::new(1.0, 0.0) } else { self.raw(xi) / self.mass };
        FtEvaluation {
            xi,
            value,
            abs_error_bound: self.abs_error_bound,
            method: FtMethod::Quadrature,
            truncation_depth: self.cells(),
        }
    }

    fn raw(&self, xi: f64) -> Complex64 {
        let omega = 2.0 * PI * xi;
        let theta = omega * self.step;
        let (f0, f1) = filon_weights(theta);
        let right = f1 * Complex64::cis(theta);
        let interior = f0 + right;
        let rot = Complex64::cis(-theta);
        let n = self.values.len();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut z = Complex64::new(1.0, 0.0);
        for (k, &v) in self.values.iter().enumerate() {
            if k % 512 == 0 {
                z = Complex64::cis(-omega * (self.lo + k as f64 * self.step));
            }
            if v != 0.0 {
                let w = if k == 0 {
                    f0
                } else if k == n - 1 {
                    right
                } else {
                    interior
                };
                acc += w * z * v;
            }
            z *= rot;
        }
        acc * self.step
    }
}

/// Values at the `n + 1` nodes of a uniform grid. A non-finite endpoint value
/// (an integrable singularity) is replaced by the linear value that makes the
/// cell's trapezoid integral match its midpoint rule.
fn node_values(f: &dyn Fn(f64) -> f64, lo: f64, h: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..=n).map(|k| f(lo + k as f64 * h)).collect();
    for k in 0..=n {
        if !v[k].is_finite() {
            let (nb, mid) = if k < n { (k + 1, lo + (k as f64 + 0.5) * h) } else { (k - 1, lo + (k as f64 - 0.5) * h) };
            let other = if v[nb].is_finite() { v[nb] } else { 0.0 };
            v[k] = (2.0 * f(mid) - other).max(0.0);
        }
    }
    v
}

fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
}

/// Smallest `J` with `exp(2π d_max |ξ| λ^{J+1}/(1−λ)) − 1 ≤ tol`, and that bound.
fn product_depth(ifs: &IfsSystem, xi: f64, tol: f64) -> Result<(usize, f64), FourierError> {
    let scale = 2.0 * PI * ifs.max_digit() * xi.abs() / (1.0 - ifs.lambda());
    let mut lam_pow = ifs.lambda();
    for j in 0..=MAX_PRODUCT_DEPTH {
        let bound = (scale * lam_pow).exp_m1();
        if bound <= tol {
            return Ok((j, bound));
        }
        lam_pow *= ifs.lambda();
    }
    Err(FourierError::TolTooTight {
        tol,
        required: format!("more than {MAX_PRODUCT_DEPTH} product factors"),
        limit: MAX_PRODUCT_DEPTH,
    })
}

/// `μ̂(ξ) = Π_{j≥0} M(λʲξ)` truncated with a rigorous tail bound from
/// `|1 − M(η)| ≤ 2π d_max |η|` and `|Π(1+a_j) − 1| ≤ exp(Σ|a_j|) − 1`.
pub fn ft_product(ifs: &IfsSystem, xi: f64, tol: f64) -> Result<FtEvaluation, FourierError> {
    if !(tol > 0.0) {
        return Err(FourierError::BadTolerance(tol));
    }
    let (depth, bound) = product_depth(ifs, xi, tol)?;
    let mut value = Complex64::new(1.0, 0.0);
    let mut eta = xi;
    for _ in 0..=depth {
        value *= ifs.mask(eta);
        eta *= ifs.lambda();
    }
    Ok(FtEvaluation { xi, value, abs_error_bound: bound, method: FtMethod::Product, truncation_depth: depth })
}

/// Evaluator prepared once per measure and tolerance.
#[derive(Debug, Clone)]
pub enum Transform {
    Quadrature(DensityTransform),
    Product { ifs: IfsSystem, tol: f64 },
}

impl Transform {
    pub fn new(m: &Measure1D, tol: f64) -> Result<Self, FourierError> {
        match m {
            Measure1D::Density(d) => Ok(Transform::Quadrature(DensityTransform::new(d, tol)?)),
            Measure1D::SelfSimilar(s) => {
                if !(tol > 0.0) {
                    return Err(FourierError::BadTolerance(tol));
                }
                Ok(Transform::Product { ifs: s.ifs.clone(), tol })
            }
        }
    }

    pub fn eval(&self, xi: f64) -> Result<FtEvaluation, FourierError> {
        match self {
            Transform::Quadrature(q) => Ok(q.eval(xi)),
            Transform::Product { ifs, tol } => ft_product(ifs, xi, *tol),
        }
    }

    pub fn decay_constant(&self) -> Option<f64> {
        match self {
            Transform::Quadrature(q) => q.decay_constant(),
            Transform::Product { .. } => None,
        }
    }
}

pub fn ft(m: &Measure1D, xi: f64, tol: f64) -> Result<FtEvaluation, FourierError> {
    Transform::new(m, tol)?.eval(xi)
}

/// `|μ̂(ξ) − M(ξ) μ̂(λξ)|` with both transforms truncated independently.
pub fn refinement_identity_residual(ifs: &IfsSystem, xi: f64, tol: f64) -> Result<f64, FourierError> {
    let lhs = ft_product(ifs, xi, tol)?;
    let rhs = ft_product(ifs, ifs.lambda() * xi, tol)?;
    Ok((lhs.value - ifs.mask(xi) * rhs.value).norm())
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PowerSum {
    pub x: f64,
    pub p: u32,
    pub n_window: usize,
    /// `Σ_{|n|≤N} |μ̂(x+n)|^p`.
    pub partial_sum: f64,
    /// Bound on the omitted terms; `+∞` without a decay certificate.
    pub tail_bound: f64,
    /// Bound on the error from evaluating `μ̂` numerically.
    pub eval_error_bound: f64,
}

impl PowerSum {
    pub fn has_decay_certificate(&self) -> bool {
        self.tail_bound.is_finite()
    }
}

/// `Σ_{j≥0} (C/(s + jδ))^p ≤ C^p (s^{−p} + s^{1−p}/((p−1)δ))`.
fn side_tail(c: f64, s: f64, delta: f64, p: i32) -> f64 {
    if !(s > 0.0) || !(delta > 0.0) {
        return f64::INFINITY;
    }
    c.powi(p) * (s.powi(-p) + s.powi(1 - p) / ((p - 1) as f64 * delta))
}

pub fn periodization_power_sum(m: &Measure1D, x: f64, p: u32, n_window: usize) -> Result<PowerSum, FourierError> {
    periodization_power_sum_with(&Transform::new(m, SCAN_TOL)?, x, p, n_window)
}

pub fn periodization_power_sum_with(t: &Transform, x: f64, p: u32, n_window: usize) -> Result<PowerSum, FourierError> {
    if p != 2 && p != 4 {
        return Err(FourierError::InvalidPower(p));
    }
    if n_window == 0 {
        return Err(FourierError::BadWindow(n_window));
    }
    let nw = n_window as i64;
    let mut sum = 0.0;
    let mut err = 0.0;
    for n in -nw..=nw {
        let e = t.eval(x + n as f64)?;
        sum += e.value.norm().powi(p as i32);
        err += p as f64 * (1.0 + e.abs_error_bound).powi(p as i32 - 1) * e.abs_error_bound;
    }
    let tail = match t.decay_constant() {
        Some(c) => 2.0 * side_tail(c, n_window as f64 + 1.0 - x.abs(), 1.0, p as i32),
        None => f64::INFINITY,
    };
    Ok(PowerSum { x, p, n_window, partial_sum: sum, tail_bound: tail, eval_error_bound: err })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ScanRow {
    pub xi: f64,
    pub sum: f64,
    pub tail_bound: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanReport {
    pub rows: Vec<ScanRow>,
    pub min: f64,
    pub argmin: f64,
    pub max: f64,
    pub argmax: f64,
    pub eval_error_bound: f64,
}

impl ScanReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), FourierError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["xi", "sum", "tail_bound"])?;
        for r in &self.rows {
            wtr.serialize((r.xi, r.sum, r.tail_bound))?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// `Σ_{λ∈s} |μ̂(ξ+λ)|²` over a grid of `ξ`. The tail bound assumes the set
/// continues beyond its window with gaps no smaller than its observed
/// separation, and is `+∞` without a decay certificate.
pub fn frame_condition_scan(m: &Measure1D, s: &Spectrum, xi_grid: &[f64]) -> Result<ScanReport, FourierError> {
    frame_condition_scan_with(&Transform::new(m, SCAN_TOL)?, s, xi_grid)
}

pub fn frame_condition_scan_with(t: &Transform, s: &Spectrum, xi_grid: &[f64]) -> Result<ScanReport, FourierError> {
    let delta = s.min_gap().unwrap_or(f64::NAN);
    let window = s.window();
    let rows: Vec<(ScanRow, f64)> = xi_grid
        .par_iter()
        .map(|&xi| {
            let mut sum = 0.0;
            let mut err = 0.0;
            for &lam in s.points() {
                let e = t.eval(xi + lam)?;
                sum += e.value.norm_sqr();
                err += 2.0 * (1.0 + e.abs_error_bound) * e.abs_error_bound;
            }
            let tail = match t.decay_constant() {
                Some(c) => side_tail(c, xi + window.hi, delta, 2) + side_tail(c, -(xi + window.lo), delta, 2),
                None => f64::INFINITY,
            };
            Ok((ScanRow { xi, sum, tail_bound: tail }, err))
        })
        .collect::<Result<_, FourierError>>()?;
    let (mut min, mut argmin, mut max, mut argmax) = (f64::INFINITY, f64::NAN, f64::NEG_INFINITY, f64::NAN);
    let mut eval_err: f64 = 0.0;
    for (r, e) in &rows {
        if r.sum < min {
            min = r.sum;
            argmin = r.xi;
        }
        if r.sum > max {
            max = r.sum;
            argmax = r.xi;
        }
        eval_err = eval_err.max(*e);
    }
    Ok(ScanReport { rows: rows.into_iter().map(|(r, _)| r).collect(), min, argmin, max, argmax, eval_error_bound: eval_err })
}
