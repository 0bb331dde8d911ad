//! Equal-weight self-similar measures `μ = (1/ℓ) Σ μ∘f_j⁻¹` for the maps
//! `f_j(x) = λx + d_j`, with digits normalized so that `0 = d₁ < … < d_ℓ`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{Call, ParseError};
use crate::fourier::{self, FourierError};
use crate::interval::{covered_length, merge_intervals, Interval};
use crate::measure::{make_density_measure, DensityFn, Measure1D};

/// Default cap on the number of digit words enumerated by a cover.
pub const WORD_CAP: usize = 1 << 22;
/// Relative overlap below which pieces of a `λ = 1/ℓ` system count as a tiling.
pub const TILE_OVERLAP_THRESHOLD: f64 = 1e-3;
/// A cover whose length shrinks below this fraction between depth/2 and depth is treated as null.
pub const NULL_DECAY_RATIO: f64 = 0.95;

const MC_BATCH: usize = 1 << 16;

#[derive(Debug, Error)]
pub enum IfsError {
    #[error("contraction ratio {0} is not in (0, 1)")]
    BadContraction(f64),
    #[error("digit set contains duplicates")]
    DuplicateDigits,
    #[error("need at least two digits, got {0}")]
    TooFewDigits(usize),
    #[error("digits must be finite")]
    NonFiniteDigit,
    #[error("{words} digit words exceed the cap of {cap}")]
    DepthCap { words: f64, cap: usize },
    #[error("attractor cover is Lebesgue-null (estimate {lebesgue_est:.3e}); the check is vacuous")]
    VacuousForNullAttractor { lebesgue_est: f64 },
    #[error("density estimates need λ in [1/2, 1), got {0}")]
    UnsupportedLambda(f64),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsSystem {
    lambda: f64,
    digits: Vec<f64>,
}

impl IfsSystem {
    /// Sorts the digits and translates them so the smallest is zero.
    pub fn new(lambda: f64, digits: &[f64]) -> Result<Self, IfsError> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(IfsError::BadContraction(lambda));
        }
        if digits.len() < 2 {
            return Err(IfsError::TooFewDigits(digits.len()));
        }
        if digits.iter().any(|d| !d.is_finite()) {
            return Err(IfsError::NonFiniteDigit);
        }
        let mut ds = digits.to_vec();
        ds.sort_by(f64::total_cmp);
        if ds.windows(2).any(|w| w[0] == w[1]) {
            return Err(IfsError::DuplicateDigits);
        }
        let d0 = ds[0];
        ds.iter_mut().for_each(|d| *d -= d0);
        Ok(Self { lambda, digits: ds })
    }

    /// Bernoulli convolution `ν_λ`: maps `λx` and `λx + 1 − λ`.
    pub fn bernoulli(lambda: f64) -> Result<Self, IfsError> {
        Self::new(lambda, &[0.0, 1.0 - lambda])
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn digits(&self) -> &[f64] {
        &self.digits
    }

    pub fn ell(&self) -> usize {
        self.digits.len()
    }

    pub fn max_digit(&self) -> f64 {
        self.digits[self.digits.len() - 1]
    }

    /// `[0, d_max/(1−λ)]`, the smallest interval mapped into itself by every `f_j`.
    pub fn hull(&self) -> Interval {
        Interval::new(0.0, self.max_digit() / (1.0 - self.lambda))
    }

    pub fn map(&self, j: usize, x: f64) -> f64 {
        self.lambda * x + self.digits[j]
    }

    /// `λ·ℓ`; equal to one exactly for the tiling candidates.
    pub fn similarity_product(&self) -> f64 {
        self.lambda * self.ell() as f64
    }

    pub fn is_critical(&self) -> bool {
        (self.similarity_product() - 1.0).abs() < 1e-9
    }

    /// `M(ξ) = (1/ℓ) Σ_k e^{−2πi d_k ξ}`.
    pub fn mask(&self, xi: f64) -> num_complex::Complex64 {
        let s: num_complex::Complex64 = self
            .digits
            .iter()
            .map(|d| num_complex::Complex64::cis(-2.0 * std::f64::consts::PI * d * xi))
            .sum();
        s / self.ell() as f64
    }

    /// Depth at which sub-hulls are shorter than `1e-12` of the hull.
    pub fn default_mass_depth(&self) -> usize {
        ((1e-12f64).ln() / self.lambda.ln()).ceil().clamp(1.0, 400.0) as usize
    }

    pub fn descriptor(&self) -> String {
        let ds: Vec<String> = self.digits.iter().map(|d| d.to_string()).collect();
        format!("ifs(lambda={},digits=[{}])", self.lambda, ds.join(","))
    }

    pub fn from_call(call: &Call) -> Result<Self, IfsError> {
        match call.name.as_str() {
            "ifs" if call.keyword("digits").is_none() && call.positional().nth(1).is_none() => {
                call.expect_arity(1)?;
                Self::bernoulli(call.number("lambda", 0)?)
            }
            "ifs" => {
                call.expect_arity(2)?;
                Self::new(call.number("lambda", 0)?, &call.numbers("digits", 1)?)
            }
            "bernoulli" => {
                call.expect_arity(1)?;
                Self::bernoulli(call.number("lambda", 0)?)
            }
            other => Err(ParseError::Unknown(other.to_string()).into()),
        }
    }

    pub fn parse(text: &str) -> Result<Self, IfsError> {
        Self::from_call(&Call::parse(text)?)
    }

    /// `μ([a, b))` by unfolding `μ(E) = (1/ℓ) Σ μ(f_j⁻¹ E)` up to `depth`
    /// levels. Pieces that still straddle the hull boundary at the last level
    /// are resolved by their fractional overlap, which keeps the result
    /// additive over disjoint intervals.
    pub fn interval_mass(&self, iv: &Interval, depth: usize) -> f64 {
        self.interval_mass_bounded(iv, depth).0
    }

    /// As [`interval_mass`](Self::interval_mass), plus the total weight of the
    /// unresolved pieces, which bounds the error.
    pub fn interval_mass_bounded(&self, iv: &Interval, depth: usize) -> (f64, f64) {
        const BUDGET: usize = 1 << 20;
        let hull = self.hull();
        let inv_ell = 1.0 / self.ell() as f64;
        let mut mass = 0.0;
        let mut frontier = vec![(iv.lo, iv.hi, 1.0)];
        for _ in 0..depth {
            if frontier.is_empty() || frontier.len() * self.ell() > BUDGET {
                break;
            }
            let mut next = Vec::with_capacity(frontier.len() * self.ell());
            for &(a, b, w) in &frontier {
                for &d in &self.digits {
                    let (a2, b2, w2) = ((a - d) / self.lambda, (b - d) / self.lambda, w * inv_ell);
                    if b2 <= hull.lo || a2 >= hull.hi || a2 >= b2 {
                        continue;
                    }
                    if a2 <= hull.lo && b2 >= hull.hi {
                        mass += w2;
                    } else {
                        next.push((a2, b2, w2));
                    }
                }
            }
            frontier = next;
        }
        // first level check: interval may already cover or miss the hull
        let mut pending = 0.0;
        for &(a, b, w) in &frontier {
            if a <= hull.lo && b >= hull.hi {
                mass += w;
            } else {
                mass += w * Interval::new(a, b).overlap(&hull) / hull.len();
                pending += w;
            }
        }
        (mass, pending)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AttractorCover {
    pub depth: usize,
    /// Sorted disjoint union of `f_w(hull)` over words of length `depth`.
    pub intervals: Vec<Interval>,
    /// Total length; an upper bound for `L(K)`, nonincreasing in depth.
    pub lebesgue_est: f64,
}

fn check_words(ifs: &IfsSystem, depth: usize, cap: usize) -> Result<(), IfsError> {
    let words = (ifs.ell() as f64).powi(depth as i32);
    if words > cap as f64 {
        return Err(IfsError::DepthCap { words, cap });
    }
    Ok(())
}

/// Offsets `Σ_{j<depth} λʲ d_{w_j}` of all words, built level by level.
pub(crate) fn word_offsets(ifs: &IfsSystem, depth: usize) -> Vec<f64> {
    let mut offsets = vec![0.0];
    for _ in 0..depth {
        offsets = offsets
            .par_iter()
            .flat_map_iter(|&o| ifs.digits.iter().map(move |&d| d + ifs.lambda * o))
            .collect();
    }
    offsets
}

pub fn attractor_cover(ifs: &IfsSystem, depth: usize) -> Result<AttractorCover, IfsError> {
    attractor_cover_capped(ifs, depth, WORD_CAP)
}

pub fn attractor_cover_capped(ifs: &IfsSystem, depth: usize, cap: usize) -> Result<AttractorCover, IfsError> {
    check_words(ifs, depth, cap)?;
    let h = ifs.hull();
    let scale = ifs.lambda.powi(depth as i32);
    let len = scale * h.len();
    let pieces = word_offsets(ifs, depth).into_iter().map(|o| Interval::new(o, o + len)).collect();
    let intervals = merge_intervals(pieces, 1e-12 * h.len());
    let lebesgue_est = intervals.iter().map(Interval::len).sum();
    Ok(AttractorCover { depth, intervals, lebesgue_est })
}

/// Deterministic sample of `μ`: points `Σ_{j<depth} λʲ d_{w_j}` with i.i.d.
/// uniform digits. Batch `b` draws from ChaCha stream `b` of `seed`, so the
/// output does not depend on the thread count.
pub fn sample_measure(ifs: &IfsSystem, n_samples: usize, depth: usize, seed: u64) -> Vec<f64> {
    let batches = n_samples.div_ceil(MC_BATCH);
    (0..batches)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let count = MC_BATCH.min(n_samples - b * MC_BATCH);
            (0..count)
                .map(|_| {
                    // Horner from the deepest digit outwards.
                    let mut x = 0.0;
                    for _ in 0..depth {
                        x = ifs.lambda * x + ifs.digits[rng.gen_range(0..ifs.digits.len())];
                    }
                    x
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMass {
    pub p: f64,
    /// Binomial standard error `√(p(1−p)/n)`.
    pub sigma: f64,
    pub count: usize,
}

pub fn empirical_mass(samples: &[f64], iv: &Interval) -> EmpiricalMass {
    let count = samples.iter().filter(|&&x| iv.contains(x)).count();
    let n = samples.len().max(1) as f64;
    let p = count as f64 / n;
    EmpiricalMass { p, sigma: (p * (1.0 - p) / n).sqrt(), count }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MonteCarlo {
    pub samples: usize,
    pub depth: usize,
    pub seed: u64,
}

impl MonteCarlo {
    pub fn for_ifs(ifs: &IfsSystem, samples: usize, seed: u64) -> Self {
        Self { samples, depth: ifs.default_mass_depth().min(120), seed }
    }
}

/// Smallest `N ≥ 1` with `λ^{N−1} < d₂/λ`: from there on every shifted term
/// `μ[−d_j/λ, λ^{n−1} − d_j/λ)` vanishes and `μ[0,λⁿ) = μ[0,λ^{n−1})/ℓ`.
pub fn recursion_threshold(ifs: &IfsSystem) -> usize {
    let target = ifs.digits[1] / ifs.lambda;
    let mut n = 1usize;
    while ifs.lambda.powi(n as i32 - 1) >= target {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MassNearZero {
    pub n: usize,
    pub threshold_n: usize,
    /// `μ[0, λⁿ)`: `ℓ^{−(n−N)} μ[0, λᴺ)` when `n ≥ N`, else Monte-Carlo.
    pub value: f64,
    pub by_recursion: bool,
    pub sigma: f64,
    /// Direct Monte-Carlo estimate of the same mass, for cross-checking.
    pub monte_carlo: EmpiricalMass,
}

pub fn mass_near_zero(ifs: &IfsSystem, n: usize, mc: &MonteCarlo) -> MassNearZero {
    let samples = sample_measure(ifs, mc.samples, mc.depth, mc.seed);
    mass_near_zero_from(ifs, n, &samples)
}

pub fn mass_near_zero_from(ifs: &IfsSystem, n: usize, samples: &[f64]) -> MassNearZero {
    let big_n = recursion_threshold(ifs);
    let near = |k: usize| empirical_mass(samples, &Interval::new(0.0, ifs.lambda.powi(k as i32)));
    let direct = near(n);
    if n <= big_n {
        return MassNearZero {
            n,
            threshold_n: big_n,
            value: direct.p,
            by_recursion: false,
            sigma: direct.sigma,
            monte_carlo: direct,
        };
    }
    let anchor = near(big_n);
    let factor = (ifs.ell() as f64).powi(-((n - big_n) as i32));
    MassNearZero {
        n,
        threshold_n: big_n,
        value: factor * anchor.p,
        by_recursion: true,
        sigma: factor * anchor.sigma,
        monte_carlo: direct,
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Lemma41Report {
    pub depth: usize,
    pub lebesgue_est: f64,
    /// `L(cover ∩ [0, λⁿ)) / λⁿ` for `n = 0..=n_max`.
    pub terms: Vec<f64>,
    pub c_est: f64,
}

/// Lengths at depth/2 and depth; a shrinking pair signals a null attractor.
fn cover_decays(ifs: &IfsSystem, depth: usize) -> Result<(f64, f64, bool), IfsError> {
    let half = attractor_cover(ifs, (depth / 2).max(1))?.lebesgue_est;
    let full = attractor_cover(ifs, depth)?.lebesgue_est;
    Ok((half, full, full < NULL_DECAY_RATIO * half || full <= 1e-12))
}

pub fn lemma41_check(ifs: &IfsSystem, n_max: usize, depth: usize) -> Result<Lemma41Report, IfsError> {
    let (_, est, null) = cover_decays(ifs, depth)?;
    if null {
        return Err(IfsError::VacuousForNullAttractor { lebesgue_est: est });
    }
    let cover = attractor_cover(ifs, depth)?;
    let terms: Vec<f64> = (0..=n_max)
        .map(|n| {
            let r = ifs.lambda.powi(n as i32);
            covered_length(&cover.intervals, &Interval::new(0.0, r)) / r
        })
        .collect();
    let c_est = terms.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Lemma41Report { depth, lebesgue_est: cover.lebesgue_est, terms, c_est })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TileVerdict {
    Tile,
    NotTileContractionMismatch,
    NotTileOverlap,
    Singular,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TileReport {
    pub verdict: TileVerdict,
    pub lambda_times_ell: f64,
    pub lebesgue_half_depth: f64,
    pub lebesgue_est: f64,
    /// Total pairwise overlap of the first-level pieces `f_j(cover)`; only computed when `λ = 1/ℓ`.
    pub overlap: Option<f64>,
}

/// Sum of pairwise overlap lengths between the images `f_i(runs)`, `f_j(runs)`.
fn piece_overlap(ifs: &IfsSystem, runs: &[Interval]) -> f64 {
    let pieces: Vec<Vec<Interval>> = (0..ifs.ell())
        .map(|j| runs.iter().map(|r| Interval::new(ifs.map(j, r.lo), ifs.map(j, r.hi))).collect())
        .collect();
    let mut total = 0.0;
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            let (a, b) = (&pieces[i], &pieces[j]);
            let (mut p, mut q) = (0, 0);
            while p < a.len() && q < b.len() {
                total += a[p].overlap(&b[q]);
                if a[p].hi < b[q].hi {
                    p += 1;
                } else {
                    q += 1;
                }
            }
        }
    }
    total
}

pub fn tile_verdict(ifs: &IfsSystem, depth: usize) -> Result<TileReport, IfsError> {
    let depth = depth.max(2);
    let (half, est, null) = cover_decays(ifs, depth)?;
    let mut report = TileReport {
        verdict: TileVerdict::Singular,
        lambda_times_ell: ifs.similarity_product(),
        lebesgue_half_depth: half,
        lebesgue_est: est,
        overlap: None,
    };
    // L(K) ≤ λℓ L(K) forces λ ≥ 1/ℓ for any attractor of positive measure.
    if (ifs.similarity_product() < 1.0 && !ifs.is_critical()) || null {
        return Ok(report);
    }
    if !ifs.is_critical() {
        report.verdict = TileVerdict::NotTileContractionMismatch;
        return Ok(report);
    }
    let inner = attractor_cover(ifs, depth - 1)?;
    let overlap = piece_overlap(ifs, &inner.intervals);
    report.overlap = Some(overlap);
    report.verdict = if overlap < TILE_OVERLAP_THRESHOLD * est {
        TileVerdict::Tile
    } else {
        TileVerdict::NotTileOverlap
    };
    Ok(report)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DensitySample {
    pub x: f64,
    pub value: f64,
    /// Imaginary part of the partial Fourier sum; zero up to truncation for a real density.
    pub imag_residual: f64,
}

/// Partial Fourier series of the density of `μ`, periodized with the hull
/// length `H`: `φ(x) ≈ (1/H) Σ_{|n|≤N} μ̂(n/H) e^{2πinx/H}`. Since the support
/// lies in `[0, H]` the periodization agrees with the density a.e. on `(0, H)`.
pub fn ifs_density_estimate(ifs: &IfsSystem, x_grid: &[f64], n_terms: usize) -> Result<Vec<DensitySample>, IfsError> {
    let h = ifs.hull().len();
    let coeffs: Vec<num_complex::Complex64> = (0..=n_terms)
        .map(|n| fourier::ft_product(ifs, n as f64 / h, 1e-12).map(|e| e.value))
        .collect::<Result<_, _>>()?;
    Ok(x_grid
        .iter()
        .map(|&x| {
            let mut s = coeffs[0];
            for (n, c) in coeffs.iter().enumerate().skip(1) {
                let e = num_complex::Complex64::cis(2.0 * std::f64::consts::PI * n as f64 * x / h);
                // conjugate symmetry: the −n term is conj(c)·conj(e)
                s += c * e + (c * e).conj();
            }
            DensitySample { x, value: s.re / h, imag_residual: s.im / h }
        })
        .collect())
}

pub fn bernoulli_density_estimate(lambda: f64, x_grid: &[f64], n_terms: usize) -> Result<Vec<DensitySample>, IfsError> {
    if !(0.5..1.0).contains(&lambda) {
        return Err(IfsError::UnsupportedLambda(lambda));
    }
    ifs_density_estimate(&IfsSystem::bernoulli(lambda)?, x_grid, n_terms.max(8))
}

/// Density measure sampled from the partial Fourier series on `grid_n` nodes of
/// the hull. Gibbs undershoot is clipped at zero.
pub fn reconstruct_density(ifs: &IfsSystem, n_terms: usize, grid_n: usize) -> Result<Measure1D, crate::Error> {
    let hull = ifs.hull();
    let xs: Vec<f64> = (0..=grid_n).map(|k| hull.lo + hull.len() * k as f64 / grid_n as f64).collect();
    let ys: Vec<f64> = ifs_density_estimate(ifs, &xs, n_terms)?.iter().map(|s| s.value.max(0.0)).collect();
    let density = DensityFn::Grid { xs, ys, source: format!("fourier[{}; {n_terms} terms]", ifs.descriptor()) };
    Ok(make_density_measure(density, hull, grid_n)?)
}
