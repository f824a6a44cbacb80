// Structural invariants checked over randomized inputs: numerics identities,
// triangulation properties, mark-distribution moments, coverage monotonicity,
// and determinism of the simulation under parallel execution.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tricomp::analytic::{coverage_alzer_bound, coverage_value, spectral_efficiency, SeMethod};
use tricomp::channel::{channel_gain, draw_channel, draw_fade_triple};
use tricomp::geometry::{sample_ppp, triangulate, NetworkRealization, Point2D, Window, NONE};
use tricomp::montecarlo::{
    coverage_points, db_to_linear, keyed_uniform, sir_samples, SimConfig, StreamTag,
};
use tricomp::specfun::{
    gamma_fn, hyp_2f1, ltt_exp, regularized_p, regularized_q, toeplitz_mul, ToeplitzFirstColumn,
};
use tricomp::{InterferenceMode, ModelParams, SchemeId};

fn cfg_small() -> SimConfig {
    let mut cfg = SimConfig::desk_scale(ModelParams::default_network());
    cfg.window_side = 420.0;
    cfg.drops = 1500;
    cfg.realizations = 15;
    cfg.gamma_grid = vec![db_to_linear(0.0)];
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gamma_recurrence_and_tail_split(x in 0.1f64..12.0, a in 0.3f64..8.0, t in 0.01f64..20.0) {
        let lhs = gamma_fn(x + 1.0);
        let rhs = x * gamma_fn(x);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
        let p = regularized_p(a, t).unwrap();
        let q = regularized_q(a, t).unwrap();
        prop_assert!(p >= 0.0 && q >= 0.0);
        prop_assert!((p + q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hyp2f1_collapses_when_upper_equals_lower(a in 0.2f64..3.0, z in -0.9f64..0.9) {
        // F(a, b; b; z) = (1 - z)^(-a), independent of b
        let f = hyp_2f1(a, 1.7, 1.7, z).unwrap();
        let expect = (1.0 - z).powf(-a);
        prop_assert!((f - expect).abs() <= 1e-10 * expect.abs().max(1.0));
    }

    #[test]
    fn ltt_exponential_is_additive(
        a in proptest::collection::vec(-0.8f64..0.8, 5),
        b in proptest::collection::vec(-0.8f64..0.8, 5),
    ) {
        // lower-triangular Toeplitz matrices are polynomials in the shift,
        // so they commute and exp(A + B) = exp(A) exp(B)
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let ea = ltt_exp(&ToeplitzFirstColumn::new(a).unwrap()).unwrap();
        let eb = ltt_exp(&ToeplitzFirstColumn::new(b).unwrap()).unwrap();
        let both = ltt_exp(&ToeplitzFirstColumn::new(sum).unwrap()).unwrap();
        let prod = toeplitz_mul(&ea, &eb).unwrap();
        for (x, y) in both.entries.iter().zip(&prod.entries) {
            prop_assert!((x - y).abs() <= 1e-11 * y.abs().max(1.0));
        }
    }

    #[test]
    fn triangulation_invariants(seed in 0u64..500, n in 24usize..90) {
        let pts: Vec<Point2D> = (0..n as u64)
            .map(|i| Point2D::new(
                100.0 * keyed_uniform(seed, StreamTag::Ppp, &[i, 0]),
                100.0 * keyed_uniform(seed, StreamTag::Ppp, &[i, 1]),
            ))
            .collect();
        let tri = triangulate(&pts).unwrap();
        let again = triangulate(&pts).unwrap();
        prop_assert_eq!(&tri.tris, &again.tris, "triangulation must be deterministic");

        // Euler relation with the outer face: V - E + (T + 1) = 2
        let hull_edges = tri.adj.iter().flatten().filter(|&&a| a == NONE).count();
        let e = (3 * tri.tris.len() + hull_edges) / 2;
        prop_assert_eq!(n + tri.tris.len() + 1, e + 2);

        // empty circumcircle, brute force
        for (t, v) in tri.tris.iter().enumerate() {
            let (c, r) = tricomp::geometry::circumcircle(pts[v[0] as usize], pts[v[1] as usize], pts[v[2] as usize]);
            for (i, p) in pts.iter().enumerate() {
                if !v.contains(&(i as u32)) {
                    prop_assert!(p.dist(c) >= r * (1.0 - 1e-9), "triangle {} not Delaunay", t);
                }
            }
        }
    }

    #[test]
    fn coverage_is_a_probability_and_decreases(db1 in -10.0f64..19.0, step in 0.2f64..8.0, m in 1u32..4) {
        let p = ModelParams::new(0.02, 4.0, m).unwrap();
        for scheme in [SchemeId::Jt, SchemeId::Ops, SchemeId::Rps] {
            let lo = coverage_value(scheme, db_to_linear(db1), &p).unwrap();
            let hi = coverage_value(scheme, db_to_linear(db1 + step), &p).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!((0.0..=1.0).contains(&hi));
            prop_assert!(hi <= lo + 1e-12, "{scheme}: raising the threshold raised coverage");
        }
    }

    #[test]
    fn coverage_ignores_station_intensity(lam in 1e-3f64..0.5, db in -8.0f64..18.0) {
        let a = coverage_value(SchemeId::Jt, db_to_linear(db), &ModelParams::new(lam, 4.0, 1).unwrap()).unwrap();
        let b = coverage_value(SchemeId::Jt, db_to_linear(db), &ModelParams::default_network()).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn alzer_bound_stays_above_selection_coverage(db in -10.0f64..20.0, m in 1u32..5) {
        let p = ModelParams::new(0.02, 4.0, m).unwrap();
        let g = db_to_linear(db);
        let bound = coverage_alzer_bound(g, &p).unwrap();
        let exact = coverage_value(SchemeId::Rps, g, &p).unwrap();
        prop_assert!(bound >= exact - 1e-12);
    }
}

#[test]
fn partition_covers_each_interferer_exactly_once() {
    let window = Window::new(420.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bs = sample_ppp(0.02, &window, &mut rng).unwrap();
    let net = NetworkRealization::build(bs, window, 35.0).unwrap();
    for trial in 0..50 {
        let (ue, coop) = net
            .place_typical_ue(tricomp::UeType::TypeIII, &mut rng)
            .unwrap();
        let r_cut = 120.0;
        let part = net.partition_interferers(ue, &coop.bs, r_cut);
        let mut seen: Vec<u32> = part
            .groups
            .iter()
            .flat_map(|g| g.members)
            .chain(part.singles.iter().copied())
            .collect();
        seen.sort_unstable();
        let before = seen.len();
        seen.dedup();
        assert_eq!(before, seen.len(), "trial {trial}: station claimed twice");
        let mut expected: Vec<u32> = net
            .bs_in_disc(ue, r_cut)
            .into_iter()
            .filter(|i| !coop.bs.contains(i))
            .collect();
        expected.sort_unstable();
        assert_eq!(seen, expected, "trial {trial}: partition must cover the disc exactly");
    }
}

#[test]
fn fading_moments_match_their_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 20_000;
    for m in [1u32, 3] {
        let mut mean_gain = 0.0;
        let mut mean_amp_sq = 0.0;
        for _ in 0..n {
            mean_gain += channel_gain(&draw_channel(&mut rng, m));
            let f = draw_fade_triple(&mut rng, m);
            mean_amp_sq += f.amp[0] * f.amp[0];
        }
        mean_gain /= n as f64;
        mean_amp_sq /= n as f64;
        let tol = 4.0 * (m as f64) / (n as f64).sqrt();
        assert!((mean_gain - m as f64).abs() < tol, "M={m}: mean gain {mean_gain}");
        assert!((mean_amp_sq - m as f64).abs() < tol, "M={m}: mean squared amplitude {mean_amp_sq}");
    }
}

#[test]
fn approximation_tracks_exact_rate_for_all_antenna_counts() {
    for m in 1..=4u32 {
        let p = ModelParams::new(0.02, 4.0, m).unwrap();
        for scheme in [SchemeId::Jt, SchemeId::Ops, SchemeId::Rps] {
            let exact = spectral_efficiency(scheme, SeMethod::Exact, &p).unwrap();
            let approx = spectral_efficiency(scheme, SeMethod::Approx, &p).unwrap();
            let rel = (approx - exact).abs() / exact;
            assert!(rel < 0.08, "{scheme} M={m}: relative gap {rel:.4}");
        }
    }
}

#[test]
fn simulation_is_independent_of_worker_count() {
    let cfg = cfg_small();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sir_samples(&cfg).unwrap())
    };
    let one = run(1);
    let four = run(4);
    let many = run(16);
    assert_eq!(one.len(), four.len());
    assert!(one.iter().zip(&four).all(|(a, b)| a == b), "1 vs 4 workers diverged");
    assert!(one.iter().zip(&many).all(|(a, b)| a == b), "1 vs 16 workers diverged");
}

#[test]
fn seed_changes_samples_but_config_reruns_do_not() {
    let cfg = cfg_small();
    let a = sir_samples(&cfg).unwrap();
    let b = sir_samples(&cfg).unwrap();
    assert_eq!(a, b, "identical config and seed must reproduce bitwise");
    let mut cfg2 = cfg.clone();
    cfg2.master_seed ^= 1;
    let c = sir_samples(&cfg2).unwrap();
    assert_ne!(a, c, "different seeds should not collide");
}

#[test]
fn widening_the_guard_band_moves_coverage_less_than_its_noise() {
    let mut cfg = cfg_small();
    cfg.drops = 2500;
    cfg.realizations = 25;
    cfg.scheme = SchemeId::Jt;
    cfg.interference_mode = InterferenceMode::Grouped19;
    let base = coverage_points(&sir_samples(&cfg).unwrap(), &cfg.gamma_grid).unwrap();
    let mut wide = cfg.clone();
    wide.guard = cfg.guard * 2.0;
    let moved = coverage_points(&sir_samples(&wide).unwrap(), &wide.gamma_grid).unwrap();
    let half = |p: &tricomp::montecarlo::GammaPoint| (p.ci_hi - p.ci_lo) / 2.0;
    let gap = (base[0].coverage - moved[0].coverage).abs();
    let noise = half(&base[0]) + half(&moved[0]);
    assert!(
        gap <= noise,
        "doubled guard shifted coverage by {gap:.4}, beyond combined noise {noise:.4}"
    );
}
