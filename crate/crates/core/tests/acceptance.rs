//! Acceptance suite: one test per criterion, each printing a pass line
//! with its elapsed time (run with `--nocapture` to see them). Tolerances
//! are pinned here, not configurable.

use std::time::Instant;

use windens::solver::{compute_residual, inner_solve, DesignMatrix, GramMatrix};
use windens::{
    bezier_eval, fit, gen_bimodal, gen_exponential, gen_trimodal, kl_sanity, l1_error, partition,
    simpson, Domain, KnotVector, Method, SampleSource, SolverConfig, SplitMix64, Termination,
    WindowBasis,
};

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Criterion 1: Bernstein partition of unity to 1e-12, normalizers against
/// quadrature to 1e-10, and B-spline partition of unity to 1e-10 on the
/// interior of a 31-sample knot vector. Runtime < 1 s.
#[test]
fn criterion_1_basis_identities() {
    let t0 = Instant::now();

    for degree in [1usize, 10, 30] {
        for step in 0..1000 {
            let t = step as f64 / 999.0;
            let sum: f64 = (0..=degree)
                .map(|i| bezier_eval(i, degree, t).unwrap())
                .sum();
            assert!(
                (sum - 1.0).abs() <= 1e-12,
                "degree {degree}, t {t}: partition of unity off by {:e}",
                (sum - 1.0).abs()
            );
        }
        // Normalizer n+1 against raw-window quadrature.
        let domain = Domain::new(0.0, 1.0).unwrap();
        for i in 0..=degree {
            let raw_area = simpson(|t| bezier_eval(i, degree, t).unwrap(), domain, 4096);
            let err = ((degree + 1) as f64 * raw_area - 1.0).abs();
            assert!(err <= 1e-10, "degree {degree} window {i}: {err:e}");
        }
    }

    let samples = gen_exponential(31, 1);
    for order in [2usize, 4, 12] {
        let kv = KnotVector::from_sorted_samples(samples.values(), order).unwrap();
        let (lo, hi) = kv.unity_range();
        assert!(hi > lo);
        for step in 0..1000 {
            let x = lo + (hi - lo) * (step as f64 + 0.5) / 1000.0;
            let sum: f64 = (0..kv.basis_count()).map(|i| kv.eval(i, x)).sum();
            assert!(
                (sum - 1.0).abs() <= 1e-10,
                "order {order}, x {x}: partition of unity off by {:e}",
                (sum - 1.0).abs()
            );
        }
    }

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    println!("[criterion 1] basis identities: PASS ({elapsed:?})");
}

/// Criterion 2: the inner coordinate solver on the m = 30 / 11-window
/// system reaches its residual target within the update budget, zeroes
/// each targeted residual to a few ulps, and solves the 2x2 oracle to
/// 1e-10. Runtime < 5 s.
#[test]
fn criterion_2_inner_solver() {
    let t0 = Instant::now();

    let samples = gen_exponential(30, 0);
    let m = samples.len();
    let domain = Domain::of_samples(samples.values()).unwrap().extended(0.05);
    let basis = WindowBasis::bezier(domain, 10).unwrap();
    assert_eq!(basis.window_count(), 11);
    let v = vec![(1.0 / 11.0f64).sqrt(); 11];
    let b = DesignMatrix::build(&basis, &v, samples.values()).unwrap();
    let d = GramMatrix::build(&b, 1.0);
    let delta = 1e-9 * m as f64;
    let state = inner_solve(&d, delta, 1_000_000, None).unwrap();
    assert!(state.updates <= 1_000_000);
    let (_, fresh_total) = compute_residual(&d, &state.alpha);
    assert!(
        fresh_total <= delta,
        "fresh residual {fresh_total:e} above {delta:e}"
    );
    assert!(
        state.worst_post_update_residual <= 4.0 * f64::EPSILON,
        "worst post-update residual {:e} above 4 ulps",
        state.worst_post_update_residual
    );

    let oracle = GramMatrix::from_values(vec![2.0, 1.0, 1.0, 2.0], 2);
    let state = inner_solve(&oracle, 1e-13, 1_000_000, None).unwrap();
    let expected = 1.0 / 3.0f64.sqrt();
    for (k, &a) in state.alpha.iter().enumerate() {
        assert!(
            (a - expected).abs() <= 1e-10,
            "alpha[{k}] = {a}, expected {expected}"
        );
    }

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[criterion 2] inner solver: PASS ({elapsed:?})");
}

fn example_sets(m: usize, seed: u64) -> [(SampleSource, windens::SampleSet); 3] {
    [
        (SampleSource::Exponential, gen_exponential(m, seed)),
        (SampleSource::Bimodal, gen_bimodal(m, seed)),
        (SampleSource::Trimodal, gen_trimodal(m, seed)),
    ]
}

const METHODS: [fn() -> Method; 3] = [Method::bezier, Method::bspline, Method::piecewise_bezier];

/// Criterion 3: every example/method pair at m = 180 terminates by the
/// epsilon test within 200 outer iterations, with the near-equality bound
/// and total coefficient mass in [1 - eps, 1]. Runtime < 60 s total.
#[test]
fn criterion_3_outer_loop() {
    let t0 = Instant::now();
    let cfg = SolverConfig::default();
    assert_eq!(cfg.eps_outer, 1e-8);
    assert_eq!(cfg.max_outer, 200);

    for (source, set) in example_sets(180, 0) {
        for make in METHODS {
            let method = make();
            let est = fit(&set, method, &cfg)
                .unwrap_or_else(|e| panic!("{}/{} failed: {e}", source.name(), method.name()));
            let report = est.report();
            let tag = format!("{}/{}", source.name(), method.name());
            assert_eq!(
                report.terminated_by,
                Termination::EpsilonTest,
                "{tag}: terminated by budget after {} iterations",
                report.outer_iterations
            );
            assert!(
                report.outer_iterations <= 200,
                "{tag}: {} iterations",
                report.outer_iterations
            );
            assert!(
                report.final_uv_gap <= 2.0 * cfg.eps_outer,
                "{tag}: sum (u - v)^2 = {:e}",
                report.final_uv_gap
            );
            let total = est.total_coefficient();
            assert!(
                total >= 1.0 - cfg.eps_outer && total <= 1.0,
                "{tag}: sum c = {total}"
            );
        }
    }

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!("[criterion 3] outer loop termination: PASS ({elapsed:?})");
}

/// Criterion 4: every fitted model is a valid density; nonnegative on a
/// 10^4-point grid and with quadrature mass equal to the coefficient sum
/// within 1e-6.
#[test]
fn criterion_4_density_validity() {
    let t0 = Instant::now();
    let cfg = SolverConfig::default();

    for (source, set) in example_sets(180, 0) {
        for make in METHODS {
            let method = make();
            let est = fit(&set, method, &cfg).unwrap();
            let tag = format!("{}/{}", source.name(), method.name());
            let span = est.basis().span();
            for step in 0..10_000 {
                let x = span.lo() + span.width() * step as f64 / 9_999.0;
                assert!(est.pdf(x) >= 0.0, "{tag}: pdf({x}) negative");
            }
            let mass = est.mass(16_384);
            let total = est.total_coefficient();
            assert!(
                (mass - total).abs() <= 1e-6,
                "{tag}: quadrature {mass} vs coefficients {total}"
            );
        }
    }

    let elapsed = t0.elapsed();
    println!("[criterion 4] density validity: PASS ({elapsed:?})");
}

/// Criterion 5: the partitioner recovers the support structure; at least
/// 99/100 bimodal runs give exactly two pieces cut inside (2, 3), and at
/// least 95/100 trimodal runs give exactly three pieces cut inside
/// (0.5, 1) and (1.5, 3). Runtime < 10 s.
#[test]
fn criterion_5_partitioner() {
    let t0 = Instant::now();
    let cfg = SolverConfig::default();

    let mut bimodal_good = 0;
    for seed in 0..100 {
        let set = gen_bimodal(180, seed);
        let part = partition(set.values(), &cfg).unwrap();
        if part.pieces.len() == 2 && part.removed_gaps.len() == 1 {
            let (a, b) = part.removed_gaps[0];
            let mid = 0.5 * (a + b);
            if mid > 2.0 && mid < 3.0 {
                bimodal_good += 1;
            }
        }
    }
    assert!(bimodal_good >= 99, "bimodal: only {bimodal_good}/100 runs");

    let mut trimodal_good = 0;
    for seed in 0..100 {
        let set = gen_trimodal(180, seed);
        let part = partition(set.values(), &cfg).unwrap();
        if part.pieces.len() == 3 && part.removed_gaps.len() == 2 {
            let mut mids: Vec<f64> = part
                .removed_gaps
                .iter()
                .map(|(a, b)| 0.5 * (a + b))
                .collect();
            mids.sort_by(f64::total_cmp);
            if mids[0] > 0.5 && mids[0] < 1.0 && mids[1] > 1.5 && mids[1] < 3.0 {
                trimodal_good += 1;
            }
        }
    }
    assert!(
        trimodal_good >= 95,
        "trimodal: only {trimodal_good}/100 runs"
    );

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    println!(
        "[criterion 5] partitioner: PASS (bimodal {bimodal_good}/100, \
         trimodal {trimodal_good}/100, {elapsed:?})"
    );
}

/// Criterion 6: the consistency trend; the median absolute-error metric of
/// the degree-10 fit on the exponential example strictly decreases from
/// m = 30 through m = 1000 over 20 seeds each. Runtime < 5 min.
#[test]
fn criterion_6_consistency_trend() {
    let t0 = Instant::now();
    let cfg = SolverConfig::default();
    let truth = windens::samples::exponential_pdf;

    let mut medians = Vec::new();
    for m in [30usize, 180, 1000] {
        let mut errs = Vec::new();
        for seed in 0..20 {
            let set = gen_exponential(m, seed);
            let est = fit(&set, Method::bezier(), &cfg).unwrap();
            errs.push(l1_error(&est, truth, est.basis().span(), 4096));
        }
        medians.push(median(errs));
    }
    assert!(
        medians[0] > medians[1] && medians[1] > medians[2],
        "medians not strictly decreasing: {medians:?}"
    );

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    println!(
        "[criterion 6] consistency trend: PASS (medians {:.4} > {:.4} > {:.4}, {elapsed:?})",
        medians[0], medians[1], medians[2]
    );
}

/// Criterion 7: likelihood separation between Exp(1) and Exp(2); positive
/// in 20/20 runs at m = 10^4 with mean near 1 - log 2. Runtime < 5 s.
#[test]
fn criterion_7_likelihood_separation() {
    let t0 = Instant::now();
    let f = windens::samples::exponential_pdf;
    let g = |x: f64| 2.0 * (-2.0 * x).exp();

    let mut separations = Vec::new();
    for seed in 0..20 {
        let mut rng = SplitMix64::new(seed);
        let out = kl_sanity(f, g, || -(1.0 - rng.next_f64()).ln(), 10_000);
        assert!(
            out.separation > 0.0,
            "seed {seed}: separation {}",
            out.separation
        );
        separations.push(out.separation);
    }
    let mean = separations.iter().sum::<f64>() / separations.len() as f64;
    assert!(
        (mean - 0.307).abs() <= 0.05,
        "mean separation {mean} outside 0.307 +- 0.05"
    );

    let elapsed = t0.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!("[criterion 7] likelihood separation: PASS (mean {mean:.4}, {elapsed:?})");
}

/// Criterion 8: figure-shape reproduction for the bimodal example with the
/// piecewise method; the estimate stays below 0.05 across (2.2, 2.8) and
/// the median piece masses sit within 0.10 of (2/3, 1/3) over 20 seeds.
#[test]
fn criterion_8_figure_shape() {
    let t0 = Instant::now();
    let cfg = SolverConfig::default();

    let mut low_masses = Vec::new();
    let mut high_masses = Vec::new();
    for seed in 0..20 {
        let set = gen_bimodal(180, seed);
        let est = fit(&set, Method::piecewise_bezier(), &cfg).unwrap();
        for step in 0..=120 {
            let x = 2.2 + 0.6 * step as f64 / 120.0;
            assert!(
                est.pdf(x) < 0.05,
                "seed {seed}: pdf({x}) = {} in the gap",
                est.pdf(x)
            );
        }
        let masses = est.piece_masses();
        let pieces = est.basis().pieces();
        let mut low = 0.0;
        let mut high = 0.0;
        for (p, &mass) in masses.iter().enumerate() {
            let mid = 0.5 * (pieces[p].domain.lo() + pieces[p].domain.hi());
            if mid < 2.5 {
                low += mass;
            } else {
                high += mass;
            }
        }
        low_masses.push(low);
        high_masses.push(high);
    }
    let med_low = median(low_masses);
    let med_high = median(high_masses);
    assert!(
        (med_low - 2.0 / 3.0).abs() <= 0.10,
        "lower-mode mass median {med_low}"
    );
    assert!(
        (med_high - 1.0 / 3.0).abs() <= 0.10,
        "upper-mode mass median {med_high}"
    );

    let elapsed = t0.elapsed();
    println!("[criterion 8] figure shape: PASS (masses {med_low:.3}/{med_high:.3}, {elapsed:?})");
}

/// Criterion 9: the bench command is deterministic; identical flags give
/// byte-identical output files.
#[test]
fn criterion_9_bench_determinism() {
    let t0 = Instant::now();
    let bin = env!("CARGO_BIN_EXE_windens");
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a.tsv");
    let out_b = dir.path().join("b.tsv");

    for out in [&out_a, &out_b] {
        let status = std::process::Command::new(bin)
            .args([
                "bench",
                "--dist",
                "exponential",
                "--method",
                "bezier",
                "--m",
                "30,60",
                "--seeds",
                "3",
                "--out",
            ])
            .arg(out)
            .status()
            .unwrap();
        assert!(status.success());
    }
    let a = std::fs::read(&out_a).unwrap();
    let b = std::fs::read(&out_b).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "bench outputs differ between runs");

    let elapsed = t0.elapsed();
    println!("[criterion 9] bench determinism: PASS ({elapsed:?})");
}
