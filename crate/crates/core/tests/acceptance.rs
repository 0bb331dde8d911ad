//! Desk-scale acceptance run: one line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use framelab_core::fourier::{frame_condition_scan, Transform};
use framelab_core::frame::{
    discretize, frame_bounds, level_bounds, lower_bound_diagnostic, translate_invariance_check,
    upper_bound_diagnostic, DiagnosticRow, FrameBoundsConfig,
};
use framelab_core::selfsim::{
    empirical_mass, mass_near_zero_from, sample_measure, tile_verdict, IfsSystem, MonteCarlo, TileVerdict,
};
use framelab_core::spectrum::{
    beurling_density, epsilon_for_frame, jittered_lattice, lattice, Spectrum, DEFAULT_EPSILON_MARGIN,
    DEFAULT_X_STEP,
};
use framelab_core::{make_density_measure, DensityFn, Interval, Measure1D};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn uniform(lo: f64, hi: f64, n: usize) -> Measure1D {
    make_density_measure(DensityFn::Uniform { a: lo, b: hi }, Interval::new(lo, hi), n).unwrap()
}

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi)
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Largest relative deviation from the last value.
fn spread(values: &[f64]) -> f64 {
    let last = values[values.len() - 1];
    values.iter().map(|v| (v - last).abs() / last).fold(0.0, f64::max)
}

fn parseval_a() -> f64 {
    let s = lattice(1.0, 0.0, iv(0.0, 255.0)).unwrap();
    frame_bounds(&uniform(0.0, 1.0, 256), &s, 256, 0).unwrap().a_est
}

fn parseval() -> Outcome {
    let s = lattice(1.0, 0.0, iv(0.0, 255.0)).unwrap();
    let r = frame_bounds(&uniform(0.0, 1.0, 256), &s, 256, 0).map_err(|e| e.to_string())?;
    ensure(
        (r.a_est - 1.0).abs() <= 1e-8 && (r.b_est - 1.0).abs() <= 1e-8,
        format!("A={:.12} B={:.12}", r.a_est, r.b_est),
    )
}

fn oversampling() -> Outcome {
    let s = lattice(0.5, 0.0, iv(-128.0, 128.0)).unwrap();
    let r = frame_bounds(&uniform(0.0, 1.0, 256), &s, 256, 0).map_err(|e| e.to_string())?;
    let inside = |x: f64| (1.95..=2.05).contains(&x);
    ensure(inside(r.a_est) && inside(r.b_est), format!("A={:.6} B={:.6}", r.a_est, r.b_est))
}

fn landau() -> Outcome {
    let s = lattice(1.0, 0.0, iv(-256.0, 256.0)).unwrap();
    let r = frame_bounds(&uniform(0.0, 2.0, 128), &s, 128, 2).map_err(|e| e.to_string())?;
    let a = r.a_trace();
    let reference = parseval_a();
    let nonincreasing = a.windows(2).all(|w| w[1] <= w[0]);
    ensure(
        r.grid_n == 512 && r.a_est < reference / 4.0 && nonincreasing,
        format!("A over grids 128/256/512 = {a:?}, reference A={reference:.6}"),
    )
}

fn seip() -> Outcome {
    let s = jittered_lattice(1.0 / 1.2, 0.2, 7, iv(-160.0, 160.0)).unwrap();
    let r = frame_bounds(&uniform(0.0, 1.0, 64), &s, 64, 2).map_err(|e| e.to_string())?;
    let a = r.a_trace();
    let min = a.iter().copied().fold(f64::INFINITY, f64::min);
    ensure(spread(&a) <= 0.2 && min >= 0.05, format!("A over grids 64/128/256 = {a:?}"))
}

fn example51() -> Outcome {
    let tri = make_density_measure(DensityFn::Triangle, iv(-1.0, 1.0), 256).unwrap();
    let z = lattice(1.0, 0.0, iv(-200.0, 200.0)).unwrap();
    let grid: Vec<f64> = (0..512).map(|k| k as f64 / 512.0).collect();
    let r = frame_condition_scan(&tri, &z, &grid).map_err(|e| e.to_string())?;
    let quartic_floor = (2.0 / std::f64::consts::PI).powi(4);
    ensure(
        (r.max - 1.0).abs() <= 1e-4
            && r.argmax.fract() == 0.0
            && (r.min - 1.0 / 3.0).abs() <= 1e-3
            && r.argmin == 0.5
            && r.min >= quartic_floor,
        format!("max={:.8} at x={}, min={:.8} at x={}, (2/π)^4={quartic_floor:.6}", r.max, r.argmax, r.min, r.argmin),
    )
}

fn ratios(rows: &[DiagnosticRow]) -> Vec<f64> {
    rows.iter().map(|r| r.ratio.unwrap_or(f64::NAN)).collect()
}

fn triangle_diagnostic() -> Outcome {
    let tri = make_density_measure(DensityFn::Triangle, iv(-1.0, 1.0), 256).unwrap();
    let z = lattice(1.0, 0.0, iv(-200.0, 200.0)).unwrap();
    let r = ratios(&lower_bound_diagnostic(&tri, &z, &[2, 4, 8, 16, 32]).map_err(|e| e.to_string())?);
    let decreasing = r.windows(2).all(|w| w[1] < w[0]);
    ensure(decreasing && r[4] / r[0] < 0.2, format!("R_k = {r:.5?}, R_32/R_2 = {:.4}", r[4] / r[0]))
}

fn invsqrt_diagnostic() -> Outcome {
    let m = make_density_measure(DensityFn::InvSqrt, iv(0.0, 1.0), 256).unwrap();
    let z = lattice(1.0, 0.0, iv(-200.0, 200.0)).unwrap();
    let u = ratios(&upper_bound_diagnostic(&m, &z, &[2, 4, 8, 16]).map_err(|e| e.to_string())?);
    let decreasing = u.windows(2).all(|w| w[1] < w[0]);
    ensure(decreasing && u[3] / u[0] < 0.3, format!("U_k = {u:.5?}, U_16/U_2 = {:.4}", u[3] / u[0]))
}

fn prop24() -> Outcome {
    let e = epsilon_for_frame(1.0, DEFAULT_EPSILON_MARGIN).map_err(|e| e.to_string())?.epsilon;
    if !(0.155..=0.1604).contains(&e) {
        return Err(format!("ε = {e}"));
    }
    // one point in every unit cube [k − 1/2, k + 1/2)
    let s = jittered_lattice(1.0, 0.45, 24, iv(-1700.0, 1700.0)).unwrap();
    let m = uniform(-e / 2.0, e / 2.0, 128);
    let r = frame_bounds(&m, &s, 128, 2).map_err(|e| e.to_string())?;
    let a = r.a_trace();
    ensure(a.iter().all(|&x| x > 0.0) && spread(&a) <= 0.2, format!("ε={e:.6}, A over grids 128/256/512 = {a:.5?}"))
}

fn mass_decay() -> Outcome {
    let ifs = IfsSystem::bernoulli(0.7).unwrap();
    let mc = MonteCarlo::for_ifs(&ifs, 1_000_000, 2024);
    let samples = sample_measure(&ifs, mc.samples, mc.depth, mc.seed);
    let rows: Vec<_> = (4..=11).map(|n| mass_near_zero_from(&ifs, n, &samples)).collect();
    let mut detail = Vec::new();
    let mut ok = true;
    for w in rows.windows(2) {
        let ratio = w[1].value / w[0].value;
        ok &= ratio == 0.5;
        detail.push(format!("{ratio}"));
    }
    for r in &rows[..7] {
        let sigma = r.sigma.hypot(r.monte_carlo.sigma);
        ok &= (r.value - r.monte_carlo.p).abs() <= 3.0 * sigma;
    }
    ensure(ok, format!("ratios n=4..10: [{}]", detail.join(", ")))
}

fn tiles() -> Outcome {
    let cases = [
        (0.5, vec![0.0, 0.5], TileVerdict::Tile),
        (1.0 / 3.0, vec![0.0, 2.0 / 3.0], TileVerdict::Singular),
        (0.5, vec![0.0, 1.0], TileVerdict::Tile),
        (0.45, vec![0.0, 0.55], TileVerdict::Singular),
    ];
    let mut got = Vec::new();
    for (l, d, want) in &cases {
        let v = tile_verdict(&IfsSystem::new(*l, d).unwrap(), 16).map_err(|e| e.to_string())?.verdict;
        got.push((v, v == *want));
    }
    ensure(got.iter().all(|g| g.1), format!("{:?}", got.iter().map(|g| g.0).collect::<Vec<_>>()))
}

fn translation() -> Outcome {
    let s = lattice(1.0, 0.0, iv(-64.0, 64.0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let t = rng.gen_range(-10.0..10.0);
        let r = translate_invariance_check(iv(0.0, 1.0), &s, t, 128).map_err(|e| e.to_string())?;
        worst = worst.max(r.delta_a).max(r.delta_b);
    }
    ensure(worst <= 1e-8, format!("max |ΔA|, |ΔB| = {worst:e}"))
}

fn properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);

    // adding a frequency never lowers either bound on a fixed discretization
    let tri = make_density_measure(DensityFn::Triangle, iv(-1.0, 1.0), 64).unwrap();
    let d = discretize(&tri, 48).map_err(|e| e.to_string())?;
    let mut cfg = FrameBoundsConfig::new(48, 0);
    cfg.band_limit = false;
    let mut s = jittered_lattice(1.0, 0.3, 1, iv(-10.0, 10.0)).unwrap();
    let mut prev = level_bounds(&d, s.points(), &cfg).map_err(|e| e.to_string())?;
    for _ in 0..50 {
        s = s.with_point(rng.gen_range(-30.0..30.0)).unwrap();
        let next = level_bounds(&d, s.points(), &cfg).map_err(|e| e.to_string())?;
        let tol = 1e-10 * next.b_est;
        if next.a_est < prev.a_est - tol || next.b_est < prev.b_est - tol {
            return Err(format!("monotonicity broken at |Λ| = {}", s.len()));
        }
        prev = next;
    }

    // μ̂(−ξ) = conj μ̂(ξ)
    // the singular density converges like n^{-1/2}, so it gets a looser tolerance
    let measures = [
        (tri.clone(), 1e-8),
        (make_density_measure(DensityFn::InvSqrt, iv(0.0, 1.0), 256).unwrap(), 1e-3),
        (Measure1D::self_similar(IfsSystem::bernoulli(0.7).unwrap()), 1e-8),
    ];
    for (m, tol) in &measures {
        let t = Transform::new(m, *tol).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let xi = rng.gen_range(-50.0..50.0);
            let (a, b) = (t.eval(xi).map_err(|e| e.to_string())?, t.eval(-xi).map_err(|e| e.to_string())?);
            if (a.value - b.value.conj()).norm() > a.abs_error_bound + b.abs_error_bound + 1e-14 {
                return Err(format!("conjugate symmetry broken at ξ = {xi}"));
            }
        }
    }

    // μ(E) = (1/ℓ) Σ_j μ(f_j⁻¹(E))
    let ifs = IfsSystem::bernoulli(0.7).unwrap();
    let samples = sample_measure(&ifs, 400_000, 60, 3);
    for _ in 0..20 {
        let a = rng.gen_range(-0.2..1.0);
        let e = iv(a, a + rng.gen_range(0.01..0.5));
        let direct = empirical_mass(&samples, &e);
        let mut pulled = 0.0;
        let mut var = 0.0;
        for &dj in ifs.digits() {
            let pre = empirical_mass(&samples, &iv((e.lo - dj) / ifs.lambda(), (e.hi - dj) / ifs.lambda()));
            pulled += pre.p / ifs.ell() as f64;
            var += (pre.sigma / ifs.ell() as f64).powi(2);
        }
        if (direct.p - pulled).abs() > 3.0 * (direct.sigma.powi(2) + var).sqrt() {
            return Err(format!("self-similarity identity off on {e:?}: {} vs {pulled}", direct.p));
        }
    }

    // D⁻ ≤ D⁺ on every generated spectrum
    let spectra: Vec<Spectrum> = vec![
        lattice(1.0, 0.0, iv(-300.0, 300.0)).unwrap(),
        lattice(0.5, 0.25, iv(-300.0, 300.0)).unwrap(),
        jittered_lattice(1.0 / 1.2, 0.2, 7, iv(-300.0, 300.0)).unwrap(),
        jittered_lattice(1.0, 0.45, 9, iv(-300.0, 300.0)).unwrap(),
        lattice(1.0, 0.0, iv(-300.0, 300.0)).unwrap().union(&lattice(1.0, 1.0 / 3.0, iv(-300.0, 300.0)).unwrap()),
    ];
    for s in &spectra {
        let r = beurling_density(s, &[10.0, 50.0, 200.0], DEFAULT_X_STEP).map_err(|e| e.to_string())?;
        if r.inf_counts.iter().zip(&r.sup_counts).any(|(lo, hi)| lo > hi) {
            return Err(format!("D⁻ > D⁺ for {}", s.provenance()));
        }
    }
    Ok("monotonicity ×50, conjugate symmetry ×300, self-similarity ×20, density order ×5".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 12] = [
        ("parseval tight frame", 5, parseval),
        ("oversampling by two", 30, oversampling),
        ("landau necessity", 60, landau),
        ("seip sufficiency", 60, seip),
        ("periodization scan of m*m", 10, example51),
        ("triangle lower-bound diagnostic", 60, triangle_diagnostic),
        ("inverse-sqrt upper-bound diagnostic", 60, invsqrt_diagnostic),
        ("perturbed lattice on a short interval", 60, prop24),
        ("bernoulli 0.7 mass decay", 30, mass_decay),
        ("tile verdicts", 30, tiles),
        ("translation invariance", 30, translation),
        ("property suites", 120, properties),
    ];
    let mut failures = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*budget);
        let (pass, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {detail} [{:.2}s of {budget}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
