//! Compactly supported probability measures on the line.
//!
//! Two variants are supported: measures given by a density `φ` on a bounded
//! hull, and equal-weight self-similar measures of an IFS. Densities are
//! discretized on a uniform grid of half-open cells `[a + kh, a + (k+1)h)`
//! and integrated with the composite midpoint rule; the normalization factor
//! that makes the midpoint mass exactly one is recorded on the measure.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descriptor::{Call, ParseError, Value};
use crate::interval::Interval;
use crate::selfsim::IfsSystem;

/// Smallest grid accepted for any discretization.
pub const MIN_GRID: usize = 16;
/// Density values at or below this are treated as outside the support.
pub const DENSITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error("grid of {0} cells is below the minimum of {MIN_GRID}")]
    GridTooCoarse(usize),
    #[error("support hull [{lo}, {hi}] must be a bounded interval with lo < hi")]
    BadHull { lo: f64, hi: f64 },
    #[error("quadrature mass {0} is not positive")]
    NonPositiveMass(f64),
    #[error("density is negative ({value}) at x = {x}")]
    NegativeDensity { x: f64, value: f64 },
    #[error("operation needs a density; self-similar measures have none reconstructed")]
    NotDensityVariant,
    #[error("level band needs lo < hi, got ({lo}, {hi}]")]
    BadBand { lo: f64, hi: f64 },
    #[error("density grid file {path}: {msg}")]
    GridFile { path: String, msg: String },
    #[error(transparent)]
    Parse(#[from] ParseError),
}

/// Closed-form or sampled density `φ`, before normalization.
#[derive(Debug, Clone, PartialEq)]
pub enum DensityFn {
    /// `1/(b-a)` on `[a, b]`.
    Uniform { a: f64, b: f64 },
    /// `1 - |x|` on `[-1, 1]`, the density of `m * m` for `m` uniform on `[-1/2, 1/2]`.
    Triangle,
    /// `1/(2√x)` on `(0, 1]`.
    InvSqrt,
    /// Linear interpolation of `(x, φ(x))` samples, zero outside the sampled range.
    Grid { xs: Vec<f64>, ys: Vec<f64>, source: String },
}

/// Essential infimum and supremum known in closed form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticBounds {
    pub ess_inf: f64,
    pub ess_sup: f64,
}

impl DensityFn {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            DensityFn::Uniform { a, b } => {
                if *a <= x && x <= *b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            DensityFn::Triangle => (1.0 - x.abs()).max(0.0),
            DensityFn::InvSqrt => {
                if x > 0.0 && x <= 1.0 {
                    0.5 / x.sqrt()
                } else if x == 0.0 {
                    f64::INFINITY
                } else {
                    0.0
                }
            }
            DensityFn::Grid { xs, ys, .. } => interpolate(xs, ys, x),
        }
    }

    /// Smallest closed interval outside of which the density vanishes.
    pub fn natural_hull(&self) -> Interval {
        match self {
            DensityFn::Uniform { a, b } => Interval::new(*a, *b),
            DensityFn::Triangle => Interval::new(-1.0, 1.0),
            DensityFn::InvSqrt => Interval::new(0.0, 1.0),
            DensityFn::Grid { xs, .. } => Interval::new(xs[0], xs[xs.len() - 1]),
        }
    }

    /// Bounds of the normalized density over its support, when known exactly.
    pub fn analytic_bounds(&self) -> Option<AnalyticBounds> {
        match self {
            DensityFn::Uniform { a, b } => {
                let v = 1.0 / (b - a);
                Some(AnalyticBounds { ess_inf: v, ess_sup: v })
            }
            DensityFn::Triangle => Some(AnalyticBounds { ess_inf: 0.0, ess_sup: 1.0 }),
            DensityFn::InvSqrt => Some(AnalyticBounds { ess_inf: 0.5, ess_sup: f64::INFINITY }),
            DensityFn::Grid { .. } => None,
        }
    }

    /// Total variation of the density on the whole line, counting the jumps at
    /// the edges of its support. `Some` only for piecewise-monotone closed forms
    /// of bounded variation; it certifies `|μ̂(ξ)| ≤ TV / (2π|ξ|)`.
    pub fn total_variation(&self) -> Option<f64> {
        match self {
            DensityFn::Uniform { a, b } => Some(2.0 / (b - a)),
            DensityFn::Triangle => Some(2.0),
            DensityFn::InvSqrt | DensityFn::Grid { .. } => None,
        }
    }

    pub fn from_call(call: &Call) -> Result<Self, MeasureError> {
        let bad = |msg: &str| ParseError::BadArgs { name: call.name.clone(), msg: msg.to_string() };
        match call.name.as_str() {
            "uniform" => {
                call.expect_arity(2)?;
                let a = call.number_opt("a", 0)?.unwrap_or(0.0);
                let b = call.number_opt("b", 1)?.unwrap_or(1.0);
                if !(a < b) || !a.is_finite() || !b.is_finite() {
                    return Err(bad("need finite a < b").into());
                }
                Ok(DensityFn::Uniform { a, b })
            }
            "triangle" => {
                call.expect_arity(0)?;
                Ok(DensityFn::Triangle)
            }
            "invsqrt" => {
                call.expect_arity(0)?;
                Ok(DensityFn::InvSqrt)
            }
            "grid" => {
                call.expect_arity(1)?;
                let path = match call.keyword("path").or_else(|| call.positional().next()) {
                    Some(Value::Word(p)) => p.clone(),
                    _ => return Err(bad("expected a CSV path").into()),
                };
                Self::from_csv(&path)
            }
            other => Err(ParseError::Unknown(other.to_string()).into()),
        }
    }

    pub fn parse(text: &str) -> Result<Self, MeasureError> {
        Self::from_call(&Call::parse(text)?)
    }

    /// Load `(x, φ(x))` rows. A header row is allowed; x must be strictly increasing.
    pub fn from_csv(path: &str) -> Result<Self, MeasureError> {
        let gerr = |msg: String| MeasureError::GridFile { path: path.to_string(), msg };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_path(Path::new(path))
            .map_err(|e| gerr(e.to_string()))?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| gerr(e.to_string()))?;
            if rec.len() < 2 {
                return Err(gerr(format!("row {} has fewer than two columns", i + 1)));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(y)) => {
                    xs.push(x);
                    ys.push(y);
                }
                _ if i == 0 => continue,
                _ => return Err(gerr(format!("row {} is not numeric", i + 1))),
            }
        }
        if xs.len() < 2 {
            return Err(gerr("need at least two samples".into()));
        }
        if xs.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(gerr("x column must be strictly increasing".into()));
        }
        Ok(DensityFn::Grid { xs, ys, source: path.to_string() })
    }

    pub fn descriptor(&self) -> String {
        match self {
            DensityFn::Uniform { a, b } => format!("uniform({a},{b})"),
            DensityFn::Triangle => "triangle".into(),
            DensityFn::InvSqrt => "invsqrt".into(),
            DensityFn::Grid { source, .. } => format!("grid({source})"),
        }
    }
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    if x < xs[0] || x > xs[n - 1] {
        return 0.0;
    }
    let j = xs.partition_point(|&t| t <= x);
    if j == 0 {
        return ys[0];
    }
    if j >= n {
        return ys[n - 1];
    }
    let (x0, x1) = (xs[j - 1], xs[j]);
    let t = (x - x0) / (x1 - x0);
    ys[j - 1] + t * (ys[j] - ys[j - 1])
}

/// A density measure discretized on `grid_n` uniform cells of its hull.
#[derive(Debug, Clone)]
pub struct DensityMeasure {
    pub density: DensityFn,
    pub hull: Interval,
    pub grid_n: usize,
    /// Midpoint-rule mass of the raw density.
    pub raw_mass: f64,
    /// Factor applied to the raw density so that the midpoint mass is one.
    pub normalization: f64,
}

impl DensityMeasure {
    /// Normalized density.
    pub fn phi(&self, x: f64) -> f64 {
        self.normalization * self.density.eval(x)
    }

    pub fn step(&self) -> f64 {
        self.hull.len() / self.grid_n as f64
    }

    pub fn cell(&self, k: usize) -> Interval {
        cell_of(&self.hull, self.grid_n, k)
    }

    /// `(lo, hi)` essential bounds of the normalized density, if known in closed form.
    pub fn analytic_bounds(&self) -> Option<AnalyticBounds> {
        self.density.analytic_bounds().map(|b| AnalyticBounds {
            ess_inf: b.ess_inf * self.normalization,
            ess_sup: b.ess_sup * self.normalization,
        })
    }
}

fn cell_of(hull: &Interval, n: usize, k: usize) -> Interval {
    let h = hull.len() / n as f64;
    Interval::new(hull.lo + k as f64 * h, hull.lo + (k + 1) as f64 * h)
}

fn midpoint_of(hull: &Interval, n: usize, k: usize) -> f64 {
    hull.lo + (k as f64 + 0.5) * hull.len() / n as f64
}

/// Equal-weight self-similar measure; `depth` bounds the recursion used for interval masses.
#[derive(Debug, Clone)]
pub struct SelfSimilarMeasure {
    pub ifs: IfsSystem,
    pub depth: usize,
}

#[derive(Debug, Clone)]
pub enum Measure1D {
    Density(DensityMeasure),
    SelfSimilar(SelfSimilarMeasure),
}

impl Measure1D {
    pub fn support_hull(&self) -> Interval {
        match self {
            Measure1D::Density(d) => d.hull,
            Measure1D::SelfSimilar(s) => s.ifs.hull(),
        }
    }

    pub fn as_density(&self) -> Result<&DensityMeasure, MeasureError> {
        match self {
            Measure1D::Density(d) => Ok(d),
            Measure1D::SelfSimilar(_) => Err(MeasureError::NotDensityVariant),
        }
    }

    pub fn self_similar(ifs: IfsSystem) -> Self {
        let depth = ifs.default_mass_depth();
        Measure1D::SelfSimilar(SelfSimilarMeasure { ifs, depth })
    }

    pub fn descriptor(&self) -> String {
        match self {
            Measure1D::Density(d) => d.density.descriptor(),
            Measure1D::SelfSimilar(s) => s.ifs.descriptor(),
        }
    }

    /// Parse a measure descriptor: a density (`uniform(a,b)`, `triangle`,
    /// `invsqrt`, `grid(path)`) on its natural hull, or `ifs(lambda=…, digits=[…])`.
    /// `ifs(λ)` and `bernoulli(λ)` both mean digits `{0, 1−λ}`.
    pub fn parse(text: &str, grid_n: usize) -> Result<Self, crate::Error> {
        let call = Call::parse(text)?;
        if call.name == "ifs" || call.name == "bernoulli" {
            return Ok(Measure1D::self_similar(IfsSystem::from_call(&call)?));
        }
        let density = DensityFn::from_call(&call)?;
        let hull = density.natural_hull();
        Ok(make_density_measure(density, hull, grid_n)?)
    }
}

/// Build a density measure, normalizing so the midpoint mass on `grid_n` cells is one.
pub fn make_density_measure(
    density: DensityFn,
    hull: Interval,
    grid_n: usize,
) -> Result<Measure1D, MeasureError> {
    if grid_n < MIN_GRID {
        return Err(MeasureError::GridTooCoarse(grid_n));
    }
    if !(hull.lo < hull.hi) || !hull.lo.is_finite() || !hull.hi.is_finite() {
        return Err(MeasureError::BadHull { lo: hull.lo, hi: hull.hi });
    }
    let mut sum = 0.0;
    for k in 0..grid_n {
        let x = midpoint_of(&hull, grid_n, k);
        let v = density.eval(x);
        if v < 0.0 || v.is_nan() {
            return Err(MeasureError::NegativeDensity { x, value: v });
        }
        sum += v;
    }
    let raw_mass = sum * hull.len() / grid_n as f64;
    if !(raw_mass > 0.0) || !raw_mass.is_finite() {
        return Err(MeasureError::NonPositiveMass(raw_mass));
    }
    Ok(Measure1D::Density(DensityMeasure { density, hull, grid_n, raw_mass, normalization: 1.0 / raw_mass }))
}

/// `μ(iv)` for a half-open interval. For densities this integrates the
/// cell-constant midpoint approximant, which is exactly additive.
pub fn interval_mass(m: &Measure1D, iv: &Interval) -> f64 {
    match m {
        Measure1D::Density(d) => {
            let (lo, hi) = (iv.lo.max(d.hull.lo), iv.hi.min(d.hull.hi));
            if !(lo < hi) {
                return 0.0;
            }
            let h = d.step();
            let k0 = (((lo - d.hull.lo) / h).floor().max(0.0) as usize).min(d.grid_n - 1);
            let k1 = (((hi - d.hull.lo) / h).ceil() as usize).min(d.grid_n);
            (k0..k1)
                .map(|k| {
                    let cell = d.cell(k);
                    d.phi(cell.midpoint()) * cell.overlap(iv)
                })
                .sum()
        }
        Measure1D::SelfSimilar(s) => s.ifs.interval_mass(iv, s.depth),
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EssentialBoundsConfig {
    /// A bound is flagged unbounded when consecutive estimates change by more than this factor.
    pub growth_factor: f64,
    /// Grid multiplier between refinement levels.
    pub refine_factor: usize,
    /// Let closed-form descriptors override the heuristic flags.
    pub use_analytic: bool,
    pub density_floor: f64,
}

impl Default for EssentialBoundsConfig {
    fn default() -> Self {
        Self { growth_factor: 1.5, refine_factor: 4, use_analytic: true, density_floor: DENSITY_FLOOR }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsLevel {
    pub grid_n: usize,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EssentialBounds {
    pub m_est: f64,
    pub big_m_est: f64,
    pub bounded_below: bool,
    pub bounded_above: bool,
    /// True when closed-form bounds replaced the grid heuristic.
    pub analytic: bool,
    pub trace: Vec<BoundsLevel>,
}

/// Estimate `ess inf` and `ess sup` of `φ` over `{φ > floor}` on successively refined grids.
pub fn essential_bounds(
    m: &Measure1D,
    refinement_levels: usize,
    cfg: &EssentialBoundsConfig,
) -> Result<EssentialBounds, MeasureError> {
    let d = m.as_density()?;
    let levels = refinement_levels.max(2);
    let mut trace = Vec::with_capacity(levels);
    let mut n = d.grid_n;
    for _ in 0..levels {
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for k in 0..n {
            let v = d.phi(midpoint_of(&d.hull, n, k));
            if v > cfg.density_floor {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if lo.is_infinite() {
            lo = 0.0;
        }
        trace.push(BoundsLevel { grid_n: n, min: lo, max: hi });
        n *= cfg.refine_factor.max(2);
    }
    let (prev, last) = (&trace[levels - 2], &trace[levels - 1]);
    let mut out = EssentialBounds {
        m_est: last.min,
        big_m_est: last.max,
        bounded_below: last.min > 0.0 && prev.min / last.min <= cfg.growth_factor,
        bounded_above: prev.max > 0.0 && last.max / prev.max <= cfg.growth_factor,
        analytic: false,
        trace,
    };
    if cfg.use_analytic {
        if let Some(b) = d.analytic_bounds() {
            out.m_est = b.ess_inf;
            out.big_m_est = b.ess_sup;
            out.bounded_below = b.ess_inf > 0.0;
            out.bounded_above = b.ess_sup.is_finite();
            out.analytic = true;
        }
    }
    Ok(out)
}

/// Grid cells where `lo < φ(midpoint) ≤ hi`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelSet {
    /// Maximal runs of adjacent qualifying cells.
    pub cells: Vec<Interval>,
    pub lo: f64,
    pub hi: f64,
    pub lebesgue_measure: f64,
    pub mu_mass: f64,
    pub grid_n: usize,
    /// Cell index ranges matching `cells`.
    #[serde(skip)]
    pub index_runs: Vec<Range<usize>>,
}

impl LevelSet {
    pub fn is_empty(&self) -> bool {
        self.index_runs.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.index_runs.iter().map(|r| r.len()).sum()
    }
}

pub fn level_set(m: &Measure1D, lo: f64, hi: f64) -> Result<LevelSet, MeasureError> {
    let d = m.as_density()?;
    level_set_on_grid(d, lo, hi, d.grid_n)
}

/// Level set on a grid other than the measure's own (used by the diagnostics,
/// whose bands can be far narrower than the base cells).
pub fn level_set_on_grid(d: &DensityMeasure, lo: f64, hi: f64, grid_n: usize) -> Result<LevelSet, MeasureError> {
    if !(lo < hi) {
        return Err(MeasureError::BadBand { lo, hi });
    }
    if grid_n < MIN_GRID {
        return Err(MeasureError::GridTooCoarse(grid_n));
    }
    let h = d.hull.len() / grid_n as f64;
    let mut runs: Vec<Range<usize>> = Vec::new();
    let mut mass = 0.0;
    for k in 0..grid_n {
        let v = d.phi(midpoint_of(&d.hull, grid_n, k));
        if lo < v && v <= hi {
            mass += v * h;
            match runs.last_mut() {
                Some(r) if r.end == k => r.end = k + 1,
                _ => runs.push(k..k + 1),
            }
        }
    }
    let cells = runs
        .iter()
        .map(|r| Interval::new(cell_of(&d.hull, grid_n, r.start).lo, cell_of(&d.hull, grid_n, r.end - 1).hi))
        .collect();
    let count: usize = runs.iter().map(|r| r.len()).sum();
    Ok(LevelSet { cells, lo, hi, lebesgue_measure: count as f64 * h, mu_mass: mass, grid_n, index_runs: runs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform01() -> Measure1D {
        make_density_measure(DensityFn::Uniform { a: 0.0, b: 1.0 }, Interval::new(0.0, 1.0), 256).unwrap()
    }

    fn triangle() -> Measure1D {
        make_density_measure(DensityFn::Triangle, Interval::new(-1.0, 1.0), 256).unwrap()
    }

    fn invsqrt(n: usize) -> Measure1D {
        make_density_measure(DensityFn::InvSqrt, Interval::new(0.0, 1.0), n).unwrap()
    }

    #[test]
    fn uniform_is_exactly_normalized() {
        let m = uniform01();
        let d = m.as_density().unwrap();
        assert_eq!(d.raw_mass, 1.0);
        assert_eq!(d.phi(0.3), 1.0);
    }

    #[test]
    fn triangle_normalized_with_unit_peak() {
        let m = triangle();
        let d = m.as_density().unwrap();
        assert!((d.raw_mass - 1.0).abs() < 1e-14);
        assert!((d.phi(0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invsqrt_midpoint_mass_converges() {
        // ∫₀¹ dx/(2√x) = 1; the midpoint sum misses ≈ 0.30/√n near the singularity.
        let errs: Vec<f64> = [256, 1024, 4096]
            .iter()
            .map(|&n| (invsqrt(n).as_density().unwrap().raw_mass - 1.0).abs())
            .collect();
        assert!(errs[0] < 2e-2, "{errs:?}");
        assert!(errs[1] < 1e-2, "{errs:?}");
        assert!(errs[2] < errs[1] && errs[1] < errs[0]);
        assert!((interval_mass(&invsqrt(256), &Interval::new(0.0, 1.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn construction_errors() {
        let hull = Interval::new(0.0, 1.0);
        assert!(matches!(
            make_density_measure(DensityFn::Uniform { a: 0.0, b: 1.0 }, hull, 8),
            Err(MeasureError::GridTooCoarse(8))
        ));
        assert!(matches!(
            make_density_measure(DensityFn::Uniform { a: 2.0, b: 3.0 }, hull, 64),
            Err(MeasureError::NonPositiveMass(_))
        ));
        let neg = DensityFn::Grid { xs: vec![0.0, 1.0], ys: vec![1.0, -1.0], source: "mem".into() };
        assert!(matches!(make_density_measure(neg, hull, 64), Err(MeasureError::NegativeDensity { .. })));
    }

    #[test]
    fn interval_mass_examples() {
        assert!((interval_mass(&uniform01(), &Interval::new(0.0, 0.5)) - 0.5).abs() < 1e-15);
        assert!((interval_mass(&triangle(), &Interval::new(0.0, 1.0)) - 0.5).abs() < 1e-14);
        assert_eq!(interval_mass(&uniform01(), &Interval::new(3.0, 4.0)), 0.0);
    }

    #[test]
    fn essential_bounds_examples() {
        let cfg = EssentialBoundsConfig::default();
        let heuristic = EssentialBoundsConfig { use_analytic: false, ..cfg };

        for c in [cfg, heuristic] {
            let b = essential_bounds(&uniform01(), 3, &c).unwrap();
            assert_eq!((b.m_est, b.big_m_est, b.bounded_below, b.bounded_above), (1.0, 1.0, true, true));
            for lvl in &b.trace {
                assert_eq!((lvl.min, lvl.max), (1.0, 1.0));
            }
        }

        let t = essential_bounds(&triangle(), 3, &heuristic).unwrap();
        assert!(!t.bounded_below && t.bounded_above);
        assert!(t.trace[2].min < t.trace[0].min / 10.0);
        assert!((t.big_m_est - 1.0).abs() < 1e-2);
        let t = essential_bounds(&triangle(), 3, &cfg).unwrap();
        assert_eq!((t.m_est, t.big_m_est), (0.0, 1.0));

        let s = essential_bounds(&invsqrt(256), 3, &heuristic).unwrap();
        assert!(s.bounded_below && !s.bounded_above);
        // inf of 1/(2√x) on (0,1] is 1/2 at x = 1; normalization is within 2%.
        assert!((s.m_est - 0.5).abs() < 0.02, "{}", s.m_est);
        assert!(s.trace[2].max > 3.0 * s.trace[0].max);
    }

    #[test]
    fn essential_bounds_rejects_self_similar() {
        let m = Measure1D::self_similar(IfsSystem::new(0.5, &[0.0, 0.5]).unwrap());
        assert!(matches!(essential_bounds(&m, 2, &Default::default()), Err(MeasureError::NotDensityVariant)));
    }

    #[test]
    fn level_set_examples() {
        let u = level_set(&uniform01(), 0.5, 1.5).unwrap();
        assert_eq!(u.cells, vec![Interval::new(0.0, 1.0)]);
        assert_eq!(u.lebesgue_measure, 1.0);

        // 1 - |x| in (1/3, 1/2] ⇔ |x| in [1/2, 2/3): two bands of length 1/6.
        let t = level_set(&triangle(), 1.0 / 3.0, 0.5).unwrap();
        assert_eq!(t.cells.len(), 2);
        assert!((t.lebesgue_measure - 1.0 / 3.0).abs() < 2.0 / 128.0);
        assert!((t.cells[0].hi + t.cells[1].lo).abs() < 1e-12, "bands are symmetric");

        let e = level_set(&uniform01(), 2.0, 3.0).unwrap();
        assert!(e.is_empty());
        assert_eq!((e.lebesgue_measure, e.mu_mass), (0.0, 0.0));

        assert!(matches!(level_set(&uniform01(), 1.0, 1.0), Err(MeasureError::BadBand { .. })));
    }

    #[test]
    fn descriptors_round_trip() {
        for s in ["uniform(-0.5,0.5)", "triangle", "invsqrt"] {
            let d = DensityFn::parse(s).unwrap();
            assert_eq!(DensityFn::parse(&d.descriptor()).unwrap(), d);
        }
        assert!(DensityFn::parse("uniform(1,0)").is_err());
        assert!(DensityFn::parse("gaussian").is_err());
    }

    #[test]
    fn grid_density_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.csv");
        std::fs::write(&path, "x,phi\n0,2\n0.5,2\n1,0\n").unwrap();
        let d = DensityFn::parse(&format!("grid({})", path.display())).unwrap();
        assert_eq!(d.eval(0.25), 2.0);
        assert_eq!(d.eval(0.75), 1.0);
        assert_eq!(d.eval(1.5), 0.0);
        assert!(d.total_variation().is_none());
        let m = make_density_measure(d.clone(), d.natural_hull(), 64).unwrap();
        assert!((m.as_density().unwrap().raw_mass - 1.5).abs() < 1e-3);

        std::fs::write(&path, "0,1\n0,2\n").unwrap();
        assert!(DensityFn::parse(&format!("grid({})", path.display())).is_err());
    }
}
