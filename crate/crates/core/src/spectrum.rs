//! Finite frequency sets, their Beurling densities and separation, the
//! one-point-per-cube selection, and the perturbation radius that keeps a
//! perturbed unit lattice a frame on a small interval.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{Call, ParseError, Value};
use crate::interval::Interval;

#[derive(Debug, Error)]
pub enum SpectrumError {
    #[error("lattice spacing must be positive, got {0}")]
    BadSpacing(f64),
    #[error("jitter {jitter} must lie in [0, α/2) = [0, {})", alpha / 2.0)]
    JitterTooLarge { jitter: f64, alpha: f64 },
    #[error("frequencies must be finite")]
    NonFinite,
    #[error("window size h = {h} exceeds half the spectrum window width {width}")]
    WindowTooSmall { h: f64, width: f64 },
    #[error("sliding step factor must lie in (0, 1/4], got {0}")]
    BadStep(f64),
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("cube centred at {gamma} contains no point of the spectrum")]
    EmptyCell { gamma: f64 },
    #[error("Bessel bound must be a finite number ≥ 1, got {0}")]
    BadBesselBound(f64),
    #[error("no positive ε satisfies the frame inequalities")]
    NoPositiveEpsilon,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: `{text}` is not a number")]
    BadRow { row: usize, text: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Sorted, deduplicated frequencies truncated to the closed window `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    points: Vec<f64>,
    window: Interval,
    provenance: String,
}

impl Spectrum {
    /// Sorts, drops exact duplicates and points outside the closed window.
    pub fn from_points(mut points: Vec<f64>, window: Interval, provenance: String) -> Result<Self, SpectrumError> {
        if points.iter().any(|p| !p.is_finite()) || !window.lo.is_finite() || !window.hi.is_finite() {
            return Err(SpectrumError::NonFinite);
        }
        points.retain(|&p| window.lo <= p && p <= window.hi);
        points.sort_by(f64::total_cmp);
        points.dedup();
        Ok(Self { points, window, provenance })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn window(&self) -> Interval {
        self.window
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn min_gap(&self) -> Option<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    }

    /// `αΛ`, with the window scaled alike.
    pub fn scaled(&self, alpha: f64) -> Result<Self, SpectrumError> {
        if !(alpha > 0.0) {
            return Err(SpectrumError::BadSpacing(alpha));
        }
        Self::from_points(
            self.points.iter().map(|p| p * alpha).collect(),
            Interval::new(self.window.lo * alpha, self.window.hi * alpha),
            format!("scale({alpha},{})", self.provenance),
        )
    }

    pub fn union(&self, other: &Spectrum) -> Self {
        let window = Interval::new(self.window.lo.min(other.window.lo), self.window.hi.max(other.window.hi));
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Self::from_points(points, window, format!("union({},{})", self.provenance, other.provenance))
            .expect("inputs already finite")
    }

    /// Points inside `[lo, hi]`, keeping provenance.
    pub fn restrict(&self, window: Interval) -> Self {
        Self::from_points(self.points.clone(), window, self.provenance.clone()).expect("inputs already finite")
    }

    /// Adds one point (used by the monotonicity checks).
    pub fn with_point(&self, p: f64) -> Result<Self, SpectrumError> {
        let mut pts = self.points.clone();
        pts.push(p);
        let window = Interval::new(self.window.lo.min(p), self.window.hi.max(p));
        Self::from_points(pts, window, format!("{}+{{{p}}}", self.provenance))
    }

    /// Number of points in the half-open window `[a, b)`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        let i = self.points.partition_point(|&p| p < a);
        let j = self.points.partition_point(|&p| p < b);
        j.saturating_sub(i)
    }

    /// One frequency per row, no header.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SpectrumError> {
        let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        for p in &self.points {
            wtr.serialize([p])?;
        }
        wtr.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// Reads one frequency per row; a non-numeric first row is taken as a header.
    /// The window is the hull of the points.
    pub fn read_csv<R: Read>(r: R, provenance: String) -> Result<Self, SpectrumError> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(r);
        let mut pts = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let text = rec.get(0).unwrap_or("").to_string();
            match text.parse::<f64>() {
                Ok(x) => pts.push(x),
                Err(_) if row == 0 => continue,
                Err(_) => return Err(SpectrumError::BadRow { row: row + 1, text }),
            }
        }
        let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let window = if pts.is_empty() { Interval::new(0.0, 0.0) } else { Interval::new(lo, hi) };
        Self::from_points(pts, window, provenance)
    }

    /// Build from a generator descriptor, truncating to `window`:
    /// `lattice(alpha, offset)`, `jitter(alpha, max_jitter, seed=…)`,
    /// `union(a, b, …)`, `points([…])`, `csv(path)`.
    pub fn from_descriptor(text: &str, window: Interval) -> Result<Self, SpectrumError> {
        Self::from_call(&Call::parse(text)?, window)
    }

    pub fn from_call(call: &Call, window: Interval) -> Result<Self, SpectrumError> {
        let bad = |msg: &str| ParseError::BadArgs { name: call.name.clone(), msg: msg.to_string() };
        match call.name.as_str() {
            "lattice" => {
                call.expect_arity(2)?;
                let alpha = call.number_opt("alpha", 0)?.unwrap_or(1.0);
                let offset = call.number_opt("offset", 1)?.unwrap_or(0.0);
                lattice(alpha, offset, window)
            }
            "jitter" => {
                call.expect_arity(3)?;
                let alpha = call.number("alpha", 0)?;
                let jitter = call.number("max_jitter", 1)?;
                let seed = call.number_opt("seed", 2)?.unwrap_or(0.0);
                if seed < 0.0 || seed.fract() != 0.0 {
                    return Err(bad("seed must be a nonnegative integer").into());
                }
                jittered_lattice(alpha, jitter, seed as u64, window)
            }
            "union" => {
                let mut parts = call.positional().map(|v| match v {
                    Value::Call(c) => Self::from_call(c, window),
                    other => Err(bad(&format!("union members must be generators, got {other}")).into()),
                });
                let first = parts.next().ok_or_else(|| bad("union needs at least one member"))??;
                parts.try_fold(first, |acc, s| Ok(acc.union(&s?)))
            }
            "points" => Self::from_points(call.numbers("values", 0)?, window, call.to_string()),
            "csv" => {
                let path = match call.positional().next() {
                    Some(Value::Word(p)) => p.clone(),
                    _ => return Err(bad("expected a path").into()),
                };
                let f = std::fs::File::open(&path).map_err(|e| csv::Error::from(e))?;
                Ok(Self::read_csv(f, call.to_string())?.restrict(window))
            }
            other => Err(ParseError::Unknown(other.to_string()).into()),
        }
    }
}

/// Integer range `k` with `αk + offset` in `[lo, hi]`, with slack for rounding.
fn lattice_indices(alpha: f64, offset: f64, window: &Interval) -> std::ops::RangeInclusive<i64> {
    let k0 = ((window.lo - offset) / alpha - 1e-9).ceil() as i64;
    let k1 = ((window.hi - offset) / alpha + 1e-9).floor() as i64;
    k0..=k1
}

/// `{αk + offset : k ∈ Z} ∩ window`.
pub fn lattice(alpha: f64, offset: f64, window: Interval) -> Result<Spectrum, SpectrumError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(SpectrumError::BadSpacing(alpha));
    }
    let pts: Vec<f64> = lattice_indices(alpha, offset, &window).map(|k| alpha * k as f64 + offset).collect();
    // rounding may put an edge point a few ulps outside the requested window
    let lo = pts.first().map_or(window.lo, |&p| p.min(window.lo));
    let hi = pts.last().map_or(window.hi, |&p| p.max(window.hi));
    Spectrum::from_points(pts, Interval::new(lo, hi), format!("lattice({alpha},{offset})"))
}

fn zigzag(k: i64) -> u64 {
    ((k << 1) ^ (k >> 63)) as u64
}

/// Lattice `αZ ∩ window` with each point moved by a pseudo-random amount in
/// `[−max_jitter, max_jitter]`. The perturbation of index `k` is drawn from
/// ChaCha stream `k` of `seed`, so it does not depend on the window. The
/// resulting window is widened by `max_jitter`.
pub fn jittered_lattice(alpha: f64, max_jitter: f64, seed: u64, window: Interval) -> Result<Spectrum, SpectrumError> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(SpectrumError::BadSpacing(alpha));
    }
    if !(0.0..alpha / 2.0).contains(&max_jitter) {
        return Err(SpectrumError::JitterTooLarge { jitter: max_jitter, alpha });
    }
    let pts: Vec<f64> = lattice_indices(alpha, 0.0, &window)
        .map(|k| {
            let jitter = if max_jitter > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(zigzag(k));
                rng.gen_range(-max_jitter..=max_jitter)
            } else {
                0.0
            };
            alpha * k as f64 + jitter
        })
        .collect();
    let widened = Interval::new(window.lo - max_jitter, window.hi + max_jitter);
    Spectrum::from_points(pts, widened, format!("jitter({alpha},{max_jitter},seed={seed})"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityReport {
    pub h_values: Vec<f64>,
    /// `sup_x #(Λ ∩ Q_h(x)) / h` over the sliding positions.
    pub sup_counts: Vec<f64>,
    pub inf_counts: Vec<f64>,
    /// Values at the largest `h`; no extrapolation.
    pub d_plus_est: f64,
    pub d_minus_est: f64,
    pub separation_delta: f64,
    pub x_step_factor: f64,
}

/// Default sliding step as a fraction of `h`.
pub const DEFAULT_X_STEP: f64 = 0.1;

/// Slides half-open windows `Q_h(x) = [x − h/2, x + h/2)` through the spectrum
/// window in steps of `h·x_step_factor`, keeping every window inside it.
pub fn beurling_density(s: &Spectrum, h_list: &[f64], x_step_factor: f64) -> Result<DensityReport, SpectrumError> {
    if !(x_step_factor > 0.0 && x_step_factor <= 0.25) {
        return Err(SpectrumError::BadStep(x_step_factor));
    }
    let w = s.window();
    let width = w.hi - w.lo;
    let mut hs: Vec<f64> = h_list.to_vec();
    hs.sort_by(f64::total_cmp);
    if let Some(&h) = hs.iter().find(|&&h| !(h > 0.0) || h > width / 2.0) {
        return Err(SpectrumError::WindowTooSmall { h, width });
    }
    if hs.is_empty() {
        return Err(SpectrumError::WindowTooSmall { h: 0.0, width });
    }
    let per_h: Vec<(f64, f64)> = hs
        .par_iter()
        .map(|&h| {
            let step = h * x_step_factor;
            let positions = ((width - h) / step).floor() as usize;
            let mut centers: Vec<f64> = (0..=positions).map(|i| w.lo + h / 2.0 + i as f64 * step).collect();
            centers.push(w.hi - h / 2.0);
            let (mut sup, mut inf) = (0usize, usize::MAX);
            for x in centers {
                let c = s.count_in(x - h / 2.0, x + h / 2.0);
                sup = sup.max(c);
                inf = inf.min(c);
            }
            (sup as f64 / h, inf as f64 / h)
        })
        .collect();
    let (sup_counts, inf_counts): (Vec<f64>, Vec<f64>) = per_h.into_iter().unzip();
    let last = hs.len() - 1;
    Ok(DensityReport {
        d_plus_est: sup_counts[last],
        d_minus_est: inf_counts[last],
        h_values: hs,
        sup_counts,
        inf_counts,
        separation_delta: s.min_gap().unwrap_or(f64::INFINITY),
        x_step_factor,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparationReport {
    pub delta: f64,
    pub target_gap: f64,
    /// `k → true` when dealing the sorted points round-robin into `k`
    /// subsequences leaves every subsequence with gaps `≥ target_gap`.
    pub union_of_k: BTreeMap<usize, bool>,
}

impl SeparationReport {
    /// Smallest `k ≤ 4` for which the round-robin split succeeds.
    pub fn min_k(&self) -> Option<usize> {
        self.union_of_k.iter().find(|(_, &ok)| ok).map(|(&k, _)| k)
    }
}

pub const DEFAULT_TARGET_GAP: f64 = 0.5;

pub fn separation(s: &Spectrum, target_gap: f64) -> Result<SeparationReport, SpectrumError> {
    if s.len() < 2 {
        return Err(SpectrumError::TooFewPoints { need: 2, got: s.len() });
    }
    let pts = s.points();
    // gaps built from rounded lattice points may fall a few ulps short
    let gap = target_gap * (1.0 - 1e-9);
    let union_of_k = (1..=4)
        .map(|k| {
            let ok = (0..k).all(|r| {
                pts.iter().skip(r).step_by(k).collect::<Vec<_>>().windows(2).all(|w| w[1] - w[0] >= gap)
            });
            (k, ok)
        })
        .collect();
    Ok(SeparationReport { delta: s.min_gap().expect("≥ 2 points"), target_gap, union_of_k })
}

/// Leftmost point of `s` in each cell `γ + [−L/2, L/2)`, `γ ∈ LZ`, for every
/// `γ` inside the spectrum window.
pub fn cube_selector(s: &Spectrum, cell: f64) -> Result<Spectrum, SpectrumError> {
    if !(cell > 0.0) || !cell.is_finite() {
        return Err(SpectrumError::BadSpacing(cell));
    }
    let w = s.window();
    let mut picked = Vec::new();
    for k in lattice_indices(cell, 0.0, &w) {
        let gamma = cell * k as f64;
        let i = s.points.partition_point(|&p| p < gamma - cell / 2.0);
        match s.points.get(i) {
            Some(&p) if p < gamma + cell / 2.0 => picked.push(p),
            _ => return Err(SpectrumError::EmptyCell { gamma }),
        }
    }
    Spectrum::from_points(picked, w, format!("cubes({cell},{})", s.provenance))
}

/// `e^{1/4} − 1`.
pub fn taylor_constant() -> f64 {
    0.25f64.exp_m1()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonTrace {
    pub bessel_b: f64,
    pub margin: f64,
    pub taylor_constant: f64,
    /// `(e^{1/4}−1)(e^{4π²ε²}−1)` at the returned ε.
    pub perturbation: f64,
    /// `B^{1/2}` times the perturbation.
    pub weighted_perturbation: f64,
    pub bisection_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub epsilon: f64,
    pub trace: EpsilonTrace,
}

pub const DEFAULT_EPSILON_MARGIN: f64 = 1e-3;

/// `(e^{1/4}−1)(e^{4π²ε²}−1)`.
pub fn perturbation_constant(eps: f64) -> f64 {
    taylor_constant() * (4.0 * std::f64::consts::PI.powi(2) * eps * eps).exp_m1()
}

/// Largest `ε` (to `1e-9`) with both `P(ε) ≤ 1/2 − margin` and
/// `√B·P(ε) ≤ 1/2 − margin`, where `P(ε) = (e^{1/4}−1)(e^{4π²ε²}−1)`.
pub fn epsilon_for_frame(bessel_b: f64, margin: f64) -> Result<EpsilonReport, SpectrumError> {
    if !(bessel_b >= 1.0) || !bessel_b.is_finite() {
        return Err(SpectrumError::BadBesselBound(bessel_b));
    }
    let target = 0.5 - margin;
    let ok = |eps: f64| {
        let p = perturbation_constant(eps);
        p <= target && bessel_b.sqrt() * p <= target
    };
    if !(target > 0.0) || !ok(1e-12) {
        return Err(SpectrumError::NoPositiveEpsilon);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while ok(hi) {
        lo = hi;
        hi *= 2.0;
    }
    let mut steps = 0;
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }
    let p = perturbation_constant(lo);
    Ok(EpsilonReport {
        epsilon: lo,
        trace: EpsilonTrace {
            bessel_b,
            margin,
            taylor_constant: taylor_constant(),
            perturbation: p,
            weighted_perturbation: bessel_b.sqrt() * p,
            bisection_steps: steps,
        },
    })
}
