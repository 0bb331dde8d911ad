use framelab_core::fourier::{ft, ft_product, periodization_power_sum, Transform};
use framelab_core::frame::{discretize, frame_bounds, level_bounds, FrameBoundsConfig};
use framelab_core::measure::{essential_bounds, interval_mass, level_set};
use framelab_core::selfsim::{attractor_cover, IfsSystem};
use framelab_core::spectrum::{
    beurling_density, cube_selector, epsilon_for_frame, jittered_lattice, lattice, perturbation_constant,
    DEFAULT_X_STEP,
};
use framelab_core::{make_density_measure, DensityFn, EssentialBoundsConfig, Interval, Measure1D};
use proptest::prelude::*;

fn iv(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi)
}

fn density(kind: usize) -> Measure1D {
    match kind {
        0 => make_density_measure(DensityFn::Uniform { a: 0.0, b: 1.0 }, iv(0.0, 1.0), 512).unwrap(),
        1 => make_density_measure(DensityFn::Triangle, iv(-1.0, 1.0), 512).unwrap(),
        _ => make_density_measure(DensityFn::InvSqrt, iv(0.0, 1.0), 512).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partition_masses_sum_to_one(kind in 0usize..3, cuts in prop::collection::vec(0.0f64..1.0, 0..63)) {
        let m = density(kind);
        let h = m.support_hull();
        let mut xs: Vec<f64> = cuts.iter().map(|c| h.lo + c * h.len()).collect();
        xs.push(h.lo);
        xs.push(h.hi);
        xs.sort_by(f64::total_cmp);
        let total: f64 = xs.windows(2).map(|w| interval_mass(&m, &iv(w[0], w[1]))).sum();
        prop_assert!((total - 1.0).abs() <= 1e-6, "{total}");
    }

    #[test]
    fn self_similar_partition_masses_sum_to_one(lambda in 0.5f64..0.9, cuts in prop::collection::vec(0.0f64..1.0, 0..15)) {
        // unresolved pieces carry at most their own weight of error
        let ifs = IfsSystem::bernoulli(lambda).unwrap();
        let depth = ifs.default_mass_depth();
        let mut xs = cuts;
        xs.extend([0.0, 1.0]);
        xs.sort_by(f64::total_cmp);
        let (total, pending) = xs
            .windows(2)
            .map(|w| ifs.interval_mass_bounded(&iv(w[0], w[1]), depth))
            .fold((0.0, 0.0), |acc, (m, p)| (acc.0 + m, acc.1 + p));
        prop_assert!((total - 1.0).abs() <= pending + 1e-9, "{total} ± {pending}");
    }

    #[test]
    fn consecutive_level_sets_tile(kind in 1usize..3, a in 0.05f64..1.0, b in 0.05f64..1.0, c in 0.05f64..1.0) {
        let m = density(kind);
        let mut t = [a, a + b, a + b + c];
        t.sort_by(f64::total_cmp);
        let lower = level_set(&m, t[0], t[1]).unwrap();
        let upper = level_set(&m, t[1], t[2]).unwrap();
        let both = level_set(&m, t[0], t[2]).unwrap();
        let mut cells: Vec<usize> = lower.index_runs.iter().chain(&upper.index_runs).flat_map(|r| r.clone()).collect();
        let n = cells.len();
        cells.sort_unstable();
        cells.dedup();
        prop_assert_eq!(cells.len(), n);
        let joint: Vec<usize> = both.index_runs.iter().flat_map(|r| r.clone()).collect();
        prop_assert_eq!(cells, joint);
    }

    #[test]
    fn transform_is_conjugate_symmetric_and_bounded(kind in 0usize..2, xi in -80.0f64..80.0) {
        let m = density(kind);
        let (a, b) = (ft(&m, xi, 1e-9).unwrap(), ft(&m, -xi, 1e-9).unwrap());
        prop_assert!((a.value - b.value.conj()).norm() <= 2e-9);
        prop_assert!(a.value.norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn product_and_quadrature_agree_for_the_half_bernoulli(xi in -20.0f64..20.0) {
        let ifs = IfsSystem::bernoulli(0.5).unwrap();
        let p = ft_product(&ifs, xi, 1e-10).unwrap();
        let q = ft(&density(0), xi, 1e-10).unwrap();
        prop_assert!((p.value - q.value).norm() <= p.abs_error_bound + q.abs_error_bound + 1e-13);
    }

    #[test]
    fn uniform_power_sum_grows_to_one(x in -0.5f64..0.5, n in 1usize..60) {
        let m = density(0);
        let a = periodization_power_sum(&m, x, 2, n).unwrap();
        let b = periodization_power_sum(&m, x, 2, n + 7).unwrap();
        prop_assert!(b.partial_sum >= a.partial_sum - 1e-12);
        prop_assert!(a.partial_sum <= 1.0 + a.eval_error_bound + 1e-12);
        prop_assert!(1.0 <= a.partial_sum + a.tail_bound + a.eval_error_bound + 1e-12);
    }

    #[test]
    fn density_order_and_scaling(alpha in 0.3f64..3.0, jitter_frac in 0.0f64..0.49, seed in 0u64..1000) {
        let s = jittered_lattice(1.0, jitter_frac, seed, iv(-400.0, 400.0)).unwrap();
        let hs = [20.0, 80.0];
        let r = beurling_density(&s, &hs, DEFAULT_X_STEP).unwrap();
        prop_assert!(r.d_minus_est <= r.d_plus_est);
        let scaled = s.scaled(alpha).unwrap();
        let hs_scaled: Vec<f64> = hs.iter().map(|h| h * alpha).collect();
        let rs = beurling_density(&scaled, &hs_scaled, DEFAULT_X_STEP).unwrap();
        for i in 0..hs.len() {
            let slack = 1.0 / hs_scaled[i];
            prop_assert!((rs.sup_counts[i] - r.sup_counts[i] / alpha).abs() <= slack + 1e-12);
            prop_assert!((rs.inf_counts[i] - r.inf_counts[i] / alpha).abs() <= slack + 1e-12);
        }
    }

    #[test]
    fn cube_selection_is_one_per_cell_and_idempotent(jitter in 0.0f64..0.49, seed in 0u64..1000) {
        let s = jittered_lattice(1.0, jitter, seed, iv(-50.0, 50.0)).unwrap();
        let picked = cube_selector(&s, 1.0).unwrap();
        for &p in picked.points() {
            let k = p.round();
            prop_assert_eq!(picked.count_in(k - 0.5, k + 0.5), 1);
        }
        let again = cube_selector(&picked, 1.0).unwrap();
        prop_assert_eq!(again.points(), picked.points());
    }

    #[test]
    fn epsilon_satisfies_both_inequalities(b in 1.0f64..100.0, margin in 1e-4f64..0.4) {
        let r = epsilon_for_frame(b, margin).unwrap();
        let p = perturbation_constant(r.epsilon);
        prop_assert!(p <= 0.5 - margin && b.sqrt() * p <= 0.5 - margin);
        prop_assert!(b.sqrt() * perturbation_constant(r.epsilon + 2e-9) > 0.5 - margin);
    }

    #[test]
    fn cover_length_is_nonincreasing(lambda in 0.3f64..0.9, depth in 1usize..14) {
        let ifs = IfsSystem::bernoulli(lambda).unwrap();
        let a = attractor_cover(&ifs, depth).unwrap().lebesgue_est;
        let b = attractor_cover(&ifs, depth + 1).unwrap().lebesgue_est;
        prop_assert!(b <= a + 1e-12);
    }

    #[test]
    fn self_similarity_identity(lambda in 0.5f64..0.9, a in -0.2f64..1.0, len in 0.01f64..0.6) {
        let ifs = IfsSystem::bernoulli(lambda).unwrap();
        let depth = ifs.default_mass_depth();
        let e = iv(a, a + len);
        let ell = ifs.ell() as f64;
        let (mut pulled, mut slack) = (0.0, 0.0);
        for d in ifs.digits() {
            let (m, p) = ifs.interval_mass_bounded(&iv((e.lo - d) / lambda, (e.hi - d) / lambda), depth);
            pulled += m / ell;
            slack += p / ell;
        }
        let (direct, p) = ifs.interval_mass_bounded(&e, depth);
        prop_assert!((direct - pulled).abs() <= slack + p + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn adding_frequencies_never_lowers_bounds(extra in prop::collection::vec(-40.0f64..40.0, 1..6), seed in 0u64..100) {
        let m = density(1);
        let d = discretize(&m, 40).unwrap();
        let mut cfg = FrameBoundsConfig::new(40, 0);
        cfg.band_limit = false;
        let mut s = jittered_lattice(1.0, 0.3, seed, iv(-12.0, 12.0)).unwrap();
        let mut prev = level_bounds(&d, s.points(), &cfg).unwrap();
        for p in extra {
            s = s.with_point(p).unwrap();
            let next = level_bounds(&d, s.points(), &cfg).unwrap();
            prop_assert!(next.a_est >= prev.a_est - 1e-10 * next.b_est);
            prop_assert!(next.b_est >= prev.b_est - 1e-10 * next.b_est);
            prev = next;
        }
    }

    #[test]
    fn bounds_are_ordered_and_below_spectrum_size(kind in 0usize..3, width in 4.0f64..40.0, seed in 0u64..100) {
        let s = jittered_lattice(0.9, 0.3, seed, iv(-width, width)).unwrap();
        let r = frame_bounds(&density(kind), &s, 32, 1).unwrap();
        for l in &r.convergence_trace {
            prop_assert!(0.0 <= l.a_est && l.a_est <= l.b_est + 1e-12);
            prop_assert!(l.b_est <= r.spectrum_size as f64 * (1.0 + 1e-12));
        }
    }
}

#[test]
fn uniform_essential_bounds_are_exact_at_every_level() {
    let mut cfg = EssentialBoundsConfig::default();
    cfg.use_analytic = false;
    let b = essential_bounds(&density(0), 4, &cfg).unwrap();
    assert!(b.trace.iter().all(|l| l.min == 1.0 && l.max == 1.0));
    assert!(b.bounded_below && b.bounded_above);
}

#[test]
fn consecutive_integers_are_a_tight_frame() {
    for n in [16usize, 64, 128] {
        let s = lattice(1.0, 0.0, iv(0.0, (n - 1) as f64)).unwrap();
        let r = frame_bounds(&density(0), &s, n, 0).unwrap();
        assert!((r.a_est - 1.0).abs() < 1e-10 && (r.b_est - 1.0).abs() < 1e-10);
    }
}

#[test]
fn scan_minimum_dominates_lower_frame_bound() {
    // Σ_λ |μ̂(ξ+λ)|² is the frame sum of the exponential e_{−ξ}, so its minimum is at least A
    let m = density(0);
    let s = jittered_lattice(1.0 / 1.2, 0.2, 7, iv(-100.0, 100.0)).unwrap();
    let bounds = frame_bounds(&m, &s, 64, 0).unwrap();
    let t = Transform::new(&m, 1e-10).unwrap();
    let grid: Vec<f64> = (0..64).map(|k| k as f64 / 64.0 - 0.5).collect();
    let scan = framelab_core::fourier::frame_condition_scan_with(&t, &s, &grid).unwrap();
    assert!(scan.min >= bounds.a_est - 0.05, "{} vs {}", scan.min, bounds.a_est);
}
