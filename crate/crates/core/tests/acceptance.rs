//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).
//!
//! Criterion 7 is expected RED: the support-lemma inequality
//! `(8√n·nⁿ/λ(n))^{1/n} < 4.4e` is genuinely false at `n = 6`
//! (`(8·√6·6⁶·4)^{1/6} ≈ 12.412 ≥ 11.960 ≈ 4.4e`), which exact big-integer
//! arithmetic and an independent computation both confirm. The checker
//! reports the violation; the criterion asserts the inequality family as
//! stated and therefore fails honestly.

use std::sync::Mutex;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use srlab::bounds::{threshold_1d_wrapped, verify_combinatorial_lemmas};
use srlab::experiments::{
    self, lemma_suite, ExperimentConfig, PatternFamily, Scenario,
};
use srlab::forward::{
    add_noise, fourier_transform, frame_norm, FrequencyGrid, NoiseModel, NormMode,
};
use srlab::illumination::IlluminationSet;
use srlab::incoherence::{
    duplicate_row_invariance_check, sigma_inf_min, sigma_inf_min_2x2, svd_lower_bound,
};
use srlab::linalg::CMat;
use srlab::measure::{Dim, DiscreteMeasure, Metric};
use srlab::projection::{select_directions, two_projection_bound};
use srlab::recovery::{evaluate_support, solve_l0, Domain, IllumMode, RecoveryProblem};
use srlab::vandermonde;

const PI: f64 = std::f64::consts::PI;
const TAU: f64 = std::f64::consts::TAU;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Criteria run one at a time so each one's runtime budget is measured
/// without contention from its siblings (campaigns parallelize internally).
static SERIAL: Mutex<()> = Mutex::new(());

fn serial_guard() -> std::sync::MutexGuard<'static, ()> {
    SERIAL.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
}

#[test]
fn criterion_01_incoherence_closed_form() {
    let _serial = serial_guard();
    let start = Instant::now();
    let example = CMat::from_real(&[vec![1.0, 0.7], vec![0.7, 1.0]]);
    let rep = sigma_inf_min(&example, 1e-6).unwrap();
    assert!(
        (rep.value - 0.3).abs() < 1e-6,
        "σ_∞,min of the worked 2×2 is {}, want 0.3",
        rep.value
    );
    let mut worst = (rep.value - 0.3).abs();
    for i in 0..=10 {
        let s = i as f64 / 10.0;
        let a = CMat::from_real(&[vec![1.0, s], vec![s, 1.0]]);
        let got = sigma_inf_min(&a, 1e-6).unwrap().value;
        let want = sigma_inf_min_2x2(s).unwrap();
        let err = (got - want).abs();
        worst = worst.max(err);
        assert!(err < 1e-6, "s = {s}: solver {got} vs closed form {want}");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?} exceeds 1 s");
    println!(
        "criterion 01: PASS — 2×2 family matches 1−s within {worst:.2e}, runtime {elapsed:?}"
    );
}

#[test]
fn criterion_02_worked_example_threshold() {
    let _serial = serial_guard();
    let start = Instant::now();
    let a = CMat::from_real(&[vec![1.0, 0.7], vec![0.7, 1.0]]);
    let sigma_inf = sigma_inf_min(&a, 1e-6).unwrap().value;
    let cutoff = PI;
    let t = threshold_1d_wrapped(2, cutoff, 1e-3, 1.0, sigma_inf).unwrap();
    assert!(!t.vacuous);
    let rayleigh_units = t.value / srlab::rayleigh(cutoff);
    assert!(
        (rayleigh_units - 0.34).abs() <= 0.01,
        "threshold is {rayleigh_units:.4} Rayleigh, want 0.34 ± 0.01"
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0);
    println!(
        "criterion 02: PASS — worked-example threshold {rayleigh_units:.4} Rayleigh, runtime {elapsed:?}"
    );
}

#[test]
fn criterion_03_recovery_stability_at_threshold() {
    let _serial = serial_guard();
    let start = Instant::now();
    for n in [2usize, 3] {
        let failures: Vec<String> = (0..200u64)
            .into_par_iter()
            .filter_map(|seed| {
                let t = match experiments::run_trial_1d(
                    n,
                    PI,
                    1e-3,
                    n,
                    PatternFamily::Exponential,
                    None,
                    None,
                    seed,
                ) {
                    Ok(t) => t,
                    Err(e) => return Some(format!("seed {seed}: {e}")),
                };
                if t.sparsity != n {
                    return Some(format!("seed {seed}: sparsity {} ≠ {n}", t.sparsity));
                }
                if !t.success {
                    return Some(format!(
                        "seed {seed}: deviation {} ≥ d_min/2 = {}",
                        t.max_deviation_rayleigh, t.half_dmin_rayleigh
                    ));
                }
                if !t.bound_ok {
                    return Some(format!(
                        "seed {seed}: deviation {} above error bound {}",
                        t.max_deviation_rayleigh, t.error_bound_rayleigh
                    ));
                }
                None
            })
            .collect();
        assert!(
            failures.is_empty(),
            "n = {n}: {} of 200 trials failed; first: {}",
            failures.len(),
            failures[0]
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "runtime {elapsed:?} exceeds 10 min");
    println!(
        "criterion 03: PASS — 200/200 trials recover exactly n atoms within d_min/2 and the error bound for n ∈ {{2,3}}, runtime {elapsed:?}"
    );
}

#[test]
fn criterion_04_number_detection_lower_bound() {
    let _serial = serial_guard();
    let start = Instant::now();
    for n in [2usize, 3] {
        let violations: Vec<String> = (0..200u64)
            .into_par_iter()
            .filter_map(|seed| {
                let t = match experiments::run_trial_1d(
                    n,
                    PI,
                    1e-3,
                    n,
                    PatternFamily::Exponential,
                    None,
                    Some(n - 1),
                    seed,
                ) {
                    Ok(t) => t,
                    Err(e) => return Some(format!("seed {seed}: {e}")),
                };
                if t.feasible {
                    return Some(format!(
                        "seed {seed}: k = {} < n = {n} was feasible",
                        t.sparsity
                    ));
                }
                None
            })
            .collect();
        assert!(
            violations.is_empty(),
            "n = {n}: {} of 200 forced-undersparse trials were feasible; first: {}",
            violations.len(),
            violations[0]
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "runtime {elapsed:?} exceeds 5 min");
    println!(
        "criterion 04: PASS — forcing max sparsity to n−1 is infeasible in 200/200 trials for n ∈ {{2,3}}, runtime {elapsed:?}"
    );
}

#[test]
fn criterion_05_adversarial_construction() {
    let _serial = serial_guard();
    let start = Instant::now();
    let cutoff = PI;
    for n in [2usize, 3, 4] {
        let failures: Vec<String> = (0..100u64)
            .into_par_iter()
            .filter_map(|seed| {
                let span = n as f64 * 0.05 / cutoff;
                let illum = match experiments::illumination_1d(
                    PatternFamily::Speckle,
                    2,
                    cutoff,
                    (-2.0 * span, 2.0 * span),
                    seed,
                ) {
                    Ok(i) => i,
                    Err(e) => return Some(format!("seed {seed}: illumination {e}")),
                };
                // build_instance certifies residuals and the amplitude-sum
                // bound internally; any violation comes back as an error.
                let inst =
                    match srlab::adversarial::build_instance(n, cutoff, 1e-2, 1.0, &illum, None) {
                        Ok(i) => i,
                        Err(e) => return Some(format!("seed {seed}: {e}")),
                    };
                if !inst.supports_disjoint() {
                    return Some(format!("seed {seed}: supports not disjoint"));
                }
                if !(cutoff * inst.tau < 0.05) {
                    return Some(format!("seed {seed}: Ωτ = {}", cutoff * inst.tau));
                }
                if !inst.residuals.iter().all(|&r| r < inst.sigma) {
                    return Some(format!("seed {seed}: residual ≥ σ"));
                }
                None
            })
            .collect();
        assert!(
            failures.is_empty(),
            "n = {n}: {} of 100 instances failed; first: {}",
            failures.len(),
            failures[0]
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "runtime {elapsed:?} exceeds 2 min");
    println!(
        "criterion 05: PASS — 100/100 worst-case pairs per n ∈ {{2,3,4}} certify residual < σ, disjoint supports, Ωτ < 0.05 and the amplitude-sum bound, runtime {elapsed:?}"
    );
}

#[test]
fn criterion_06_vandermonde_lemma_suite() {
    let _serial = serial_guard();
    let start = Instant::now();

    // η lower bound: 1000 multi-start minimizations per k ∈ {1,2,3}.
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    for k in 1..=3usize {
        let mut ran = 0usize;
        for config in 0..10 {
            let base = TAU * rng.gen::<f64>();
            let spread = 0.25 + 0.65 * rng.gen::<f64>();
            let theta: Vec<f64> = (0..=k)
                .map(|j| base + spread * TAU * j as f64 / (k + 1) as f64)
                .collect();
            let rep = vandermonde::eta_lower_bound_check(&theta, 100, 1000 + config).unwrap();
            assert!(
                rep.holds(),
                "k = {k}, config {config}: min found {} below bound {} ({} violations)",
                rep.min_found,
                rep.bound,
                rep.violations
            );
            ran += rep.starts;
        }
        assert_eq!(ran, 1000);
    }

    // Projection-distance lower bound on 10⁴ random instances, k ≤ 6.
    let mut rng = ChaCha8Rng::seed_from_u64(607);
    let mut checked = 0usize;
    while checked < 10_000 {
        let k = 1 + (rng.gen::<f64>() * 6.0) as usize;
        let that: Vec<f64> = (0..k).map(|_| TAU * rng.gen::<f64>()).collect();
        let theta = TAU * rng.gen::<f64>();
        let d = match vandermonde::projection_distance(&that, theta) {
            Ok(d) => d,
            Err(_) => continue,
        };
        let prod: f64 = that
            .iter()
            .map(|&tj| (Complex64::from_polar(1.0, theta) - Complex64::from_polar(1.0, tj)).norm())
            .product();
        assert!(
            d >= prod / 2f64.powi(k as i32) - 1e-9,
            "instance {checked} (k = {k}): {d} < {}",
            prod / 2f64.powi(k as i32)
        );
        checked += 1;
    }

    // Strict pair-perturbation decrease on a 100×100 grid of the admissible
    // region 0 < p ≤ q < min(p+π, 2π), Δ = 1e−4.
    for i in 1..=100 {
        let p = TAU * i as f64 / 101.0;
        let hi = (p + PI).min(TAU);
        for j in 0..100 {
            let q = p + (hi - p - 1e-9) * j as f64 / 100.0;
            assert!(
                vandermonde::pair_perturbation_decreases(p, q, 1e-4).unwrap(),
                "no strict decrease at p = {p}, q = {q}"
            );
        }
    }

    // Stable inversion: 500 hypothesis-satisfying instances, k ∈ {3,4}. The
    // call itself verifies the matching and the quantitative bound.
    let mut rng = ChaCha8Rng::seed_from_u64(608);
    let mut ran = 0usize;
    while ran < 500 {
        let k = if rng.gen::<bool>() { 3 } else { 4 };
        let base = TAU * rng.gen::<f64>();
        let theta: Vec<f64> = (0..k).map(|j| base + TAU * j as f64 / k as f64).collect();
        let jitter = 1e-6 + rng.gen::<f64>() * 1e-4;
        let that: Vec<f64> = theta
            .iter()
            .map(|&t| t + jitter * (2.0 * rng.gen::<f64>() - 1.0))
            .collect();
        let z: Vec<Complex64> = theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let zh: Vec<Complex64> = that.iter().map(|&t| Complex64::from_polar(1.0, t)).collect();
        let eta_norm = vandermonde::eta(&z, &zh).into_iter().fold(0.0, f64::max);
        let eps = eta_norm * (PI / 2.0).powi(k as i32) * 1.5;
        match vandermonde::stability_inversion(&theta, &that, eps) {
            Ok(rep) => {
                ran += 1;
                let mut seen = vec![false; k];
                for &m in &rep.matched {
                    assert!(!seen[m], "matching not bijective");
                    seen[m] = true;
                }
            }
            Err(srlab::Error::PreconditionFailed(_)) => continue,
            Err(e) => panic!("instance {ran}: {e}"),
        }
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "runtime {elapsed:?} exceeds 5 min");
    println!(
        "criterion 06: PASS — η bound (3×1000 descents), projection bound (10⁴), pair perturbation (100×100), stable inversion (500), runtime {elapsed:?}"
    );
}

#[test]
fn criterion_07_combinatorial_inequalities() {
    let _serial = serial_guard();
    let start = Instant::now();
    let rep = verify_combinatorial_lemmas(50).unwrap();
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "runtime {elapsed:?} exceeds 1 s");
    if rep.all_hold() {
        println!("criterion 07: PASS — all three inequality families hold to n = 50, runtime {elapsed:?}");
    } else {
        println!(
            "criterion 07: FAIL — number-lemma failures {:?}, support-lemma failures {:?}, Stirling failures {:?}, runtime {elapsed:?}",
            rep.number_lemma_failures, rep.support_lemma_failures, rep.stirling_failures
        );
    }
    assert!(
        rep.all_hold(),
        "the support-lemma inequality (8√n·n^n/λ(n))^(1/n) < 4.4e is violated at n = {:?}: \
(8·√6·6⁶·4)^(1/6) ≈ 12.412 ≥ 11.960 ≈ 4.4e. Exact big-integer arithmetic and an independent \
computation agree, so the checker is right and the source inequality is false at that n; \
every other n ≤ 50 and the other two families hold.",
        rep.support_lemma_failures
    );
}

#[test]
fn criterion_08_two_d_projection_machinery() {
    let _serial = serial_guard();
    let start = Instant::now();

    // Direction selection on 1000 random point sets, n ≤ 5.
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut checked = 0usize;
    while checked < 1000 {
        let n = 2 + (rng.gen::<f64>() * 4.0) as usize;
        let pts: Vec<[f64; 2]> = (0..n)
            .map(|_| [4.0 * rng.gen::<f64>() - 2.0, 4.0 * rng.gen::<f64>() - 2.0])
            .collect();
        let fan = match select_directions(&pts) {
            Ok(f) => f,
            Err(_) => continue,
        };
        assert!(fan.verify(&pts), "fan guarantees violated for {pts:?}");
        checked += 1;
    }

    // Two-projection bound on 10⁵ random triples with v1·v2 = cos θ exactly.
    let mut rng = ChaCha8Rng::seed_from_u64(809);
    for trial in 0..100_000 {
        let theta = 0.05 + rng.gen::<f64>() * (PI / 2.0 - 0.05);
        let phi = rng.gen::<f64>() * PI;
        let v1 = [phi.cos(), phi.sin()];
        let v2 = [(phi + theta).cos(), (phi + theta).sin()];
        let u = [6.0 * rng.gen::<f64>() - 3.0, 6.0 * rng.gen::<f64>() - 3.0];
        assert!(
            two_projection_bound(u, v1, v2, theta).unwrap(),
            "triple {trial} violated the bound"
        );
    }

    // Full 2D pipeline at the threshold with sup-norm noise: ≥ 99% of 100.
    let outcomes: Vec<bool> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            experiments::run_trial_2d(2, PI, 1e-3, 4, 1.0, None, seed)
                .map(|t| t.success && t.projection_consistent)
                .unwrap_or(false)
        })
        .collect();
    let successes = outcomes.iter().filter(|&&b| b).count();
    assert!(
        successes >= 99,
        "2D pipeline succeeded in only {successes}/100 trials"
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 900.0, "runtime {elapsed:?} exceeds 15 min");
    println!(
        "criterion 08: PASS — 1000 direction fans verified, 10⁵ projection triples hold, 2D pipeline {successes}/100, runtime {elapsed:?}"
    );
}

#[test]
fn criterion_09_multi_vs_single_illumination() {
    let _serial = serial_guard();
    let start = Instant::now();
    let dir = std::env::temp_dir().join("srlab_acceptance_pt");
    let _ = std::fs::remove_dir_all(&dir);
    let config = ExperimentConfig {
        scenario: Scenario::PhaseTransition1d,
        output_dir: dir,
        seed: 909,
        trials: 50,
        n: 2,
        cutoff: PI,
        noise_ratios: vec![1e-2],
        separations_rayleigh: vec![0.05, 0.08, 0.12, 0.18, 0.26, 0.38, 0.55],
        frames: vec![1, 2],
        pattern_family: PatternFamily::Sinusoid,
        c0: 1.0,
    };
    let manifest = experiments::run(&config).unwrap();

    let threshold_of = |frames: usize| -> f64 {
        manifest
            .empirical_thresholds
            .iter()
            .find(|e| e.frames == frames)
            .and_then(|e| e.empirical_rayleigh)
            .unwrap_or(f64::INFINITY)
    };
    let t1 = threshold_of(1);
    let t2 = threshold_of(2);
    assert!(
        t2.is_finite(),
        "T = 2 found no separation with ≥ 95% success in the sweep"
    );
    assert!(
        t2 < t1,
        "empirical thresholds: T=2 at {t2} Rayleigh is not strictly below T=1 at {t1} Rayleigh"
    );
    // And at some swept separation, T = 2 succeeds where T = 1 fails.
    let contrast = manifest.cells.iter().any(|c2| {
        c2.frames == 2
            && c2.success_rate >= 0.95
            && manifest.cells.iter().any(|c1| {
                c1.frames == 1
                    && c1.separation_rayleigh == c2.separation_rayleigh
                    && c1.success_rate < 0.95
            })
    });
    assert!(contrast, "no separation shows T=2 ≥ 95% with T=1 < 95%");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "runtime {elapsed:?} exceeds 10 min");
    println!(
        "criterion 09: PASS — empirical thresholds T=2: {t2} Rayleigh < T=1: {} , runtime {elapsed:?}",
        if t1.is_finite() { format!("{t1}") } else { "none found in sweep (>0.55)".into() }
    );
}

#[test]
fn criterion_10_property_suite() {
    let _serial = serial_guard();
    let start = Instant::now();
    let cutoff = PI;
    let mut rng = ChaCha8Rng::seed_from_u64(1010);

    // Linearity and translation of the forward model on random measures.
    let grid = FrequencyGrid::uniform_1d(cutoff, 16).unwrap();
    let illum1 = IlluminationSet::uniform(Dim::One, 1).unwrap();
    for _ in 0..30 {
        let xs: Vec<f64> = (0..3).map(|j| j as f64 + rng.gen::<f64>()).collect();
        let amps: Vec<Complex64> = (0..3)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let m = DiscreteMeasure::new_1d(&xs, &amps).unwrap();
        let alpha = c(rng.gen::<f64>() + 0.2, rng.gen::<f64>());
        let scaled_amps: Vec<Complex64> = amps.iter().map(|a| alpha * a).collect();
        let scaled = DiscreteMeasure::new_1d(&xs, &scaled_amps).unwrap();
        let f0 = fourier_transform(&m, &illum1, &grid, NormMode::Rms).unwrap();
        let f1 = fourier_transform(&scaled, &illum1, &grid, NormMode::Rms).unwrap();
        for (a, b) in f0.frames[0].iter().zip(&f1.frames[0]) {
            assert!((alpha * a - b).norm() < 1e-10, "linearity violated");
        }
        let s = rng.gen::<f64>() - 0.5;
        let shifted = m.translated_1d(s).unwrap();
        let f2 = fourier_transform(&shifted, &illum1, &grid, NormMode::Rms).unwrap();
        for (l, (a, b)) in f0.frames[0].iter().zip(&f2.frames[0]).enumerate() {
            let want = a * Complex64::from_polar(1.0, s * grid.nodes[l][0]);
            let rel = (want - b).norm() / want.norm().max(1e-12);
            assert!(rel < 1e-12, "translation violated at node {l}: {rel}");
        }
    }

    // Noise norm bound over 10 000 seeds.
    let m = DiscreteMeasure::new_1d(&[0.2, 0.9], &[c(1.0, 0.0), c(0.4, 0.6)]).unwrap();
    let base = fourier_transform(&m, &illum1, &grid, NormMode::Rms).unwrap();
    let sigma = 3e-3;
    for seed in 0..10_000u64 {
        let noisy = add_noise(&base, sigma, NoiseModel::ComplexGaussianCapped, seed).unwrap();
        let w: Vec<Complex64> = noisy.frames[0]
            .iter()
            .zip(&base.frames[0])
            .map(|(a, b)| a - b)
            .collect();
        assert!(frame_norm(&w, NormMode::Rms).unwrap() < sigma, "seed {seed}");
    }

    // σ_∞,min: scaling homogeneity, duplicate-row invariance over 50 random
    // matrices, SVD lower bound over 1000 random matrices.
    let mut rng = ChaCha8Rng::seed_from_u64(1011);
    for trial in 0..50 {
        let rows = 2 + trial % 2;
        let mut a = CMat::zeros(rows, 2);
        for i in 0..rows {
            for j in 0..2 {
                a[(i, j)] = c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
            }
        }
        assert!(
            duplicate_row_invariance_check(&a, 1e-6).unwrap(),
            "duplicate-row invariance failed on trial {trial}"
        );
    }
    let bound_violations: usize = (0..1000u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(2000 + seed);
            let rows = 1 + (rng.gen::<f64>() * 3.0) as usize;
            let cols = 1 + (rng.gen::<f64>() * 3.0) as usize;
            let mut a = CMat::zeros(rows, cols);
            for i in 0..rows {
                for j in 0..cols {
                    a[(i, j)] = c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0);
                }
            }
            let rep = srlab::incoherence::sigma_inf_min_with(&a, 1e-6, 6).unwrap();
            usize::from(rep.value < svd_lower_bound(&a) - 1e-9)
        })
        .sum();
    assert_eq!(bound_violations, 0, "σ_min/√T exceeded σ_∞,min");

    // Known-mode residual dominates the per-frame free fit on every support.
    let truth = DiscreteMeasure::new_1d(&[0.35, 1.05], &[c(1.0, 0.0), c(0.7, -0.4)]).unwrap();
    let illum = IlluminationSet::shifted_cosines(Dim::One, 2, [cutoff, 0.0]).unwrap();
    let clean = fourier_transform(&truth, &illum, &grid, NormMode::Rms).unwrap();
    let ms = add_noise(&clean, 1e-3, NoiseModel::ComplexGaussianCapped, 42).unwrap();
    let known = RecoveryProblem::new(
        ms.clone(),
        IllumMode::Known(illum.clone()),
        Domain::Interval { lo: 0.0, hi: 2.0 },
        0.2,
        3,
    )
    .unwrap();
    let unknown = RecoveryProblem::new(
        ms,
        IllumMode::Unknown,
        Domain::Interval { lo: 0.0, hi: 2.0 },
        0.2,
        3,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1012);
    for _ in 0..40 {
        let pts: Vec<[f64; 2]> = (0..2)
            .map(|_| [2.0 * rng.gen::<f64>(), 0.0])
            .collect();
        if (pts[0][0] - pts[1][0]).abs() < 1e-6 {
            continue;
        }
        let (Some(k), Some(u)) = (
            evaluate_support(&known, &pts).unwrap(),
            evaluate_support(&unknown, &pts).unwrap(),
        ) else {
            continue;
        };
        for (t, (uf, kf)) in u
            .per_frame_residuals
            .iter()
            .zip(&k.per_frame_residuals)
            .enumerate()
        {
            assert!(
                uf <= &(kf + 1e-9),
                "frame {t}: free fit {uf} worse than joint fit {kf}"
            );
        }
    }

    // Monotonicity of returned sparsity in σ.
    for seed in 0..3u64 {
        let truth = DiscreteMeasure::new_1d(&[0.5, 1.2], &[c(1.0, 0.0), c(1.0, 0.3)]).unwrap();
        let clean = fourier_transform(&truth, &illum, &grid, NormMode::Rms).unwrap();
        let ms = add_noise(&clean, 1e-3, NoiseModel::ComplexGaussianCapped, seed).unwrap();
        let mut last = usize::MAX;
        for sigma in [1e-4, 1e-3, 1e-2, 1e-1, 5.0] {
            let problem = RecoveryProblem::new(
                ms.clone(),
                IllumMode::Known(illum.clone()),
                Domain::Interval { lo: 0.0, hi: 2.0 },
                0.15,
                3,
            )
            .unwrap()
            .with_sigma(sigma)
            .unwrap();
            let sparsity = solve_l0(&problem).unwrap().sparsity;
            assert!(sparsity <= last, "sparsity grew in σ (seed {seed})");
            last = sparsity;
        }
    }

    // Campaign determinism: identical (config, seed) → identical CSV bytes.
    let d1 = std::env::temp_dir().join("srlab_acc_det1");
    let d2 = std::env::temp_dir().join("srlab_acc_det2");
    let _ = std::fs::remove_dir_all(&d1);
    let _ = std::fs::remove_dir_all(&d2);
    let mk = |dir: &std::path::Path| ExperimentConfig {
        scenario: Scenario::PhaseTransition1d,
        output_dir: dir.to_path_buf(),
        seed: 33,
        trials: 4,
        n: 2,
        cutoff: PI,
        noise_ratios: vec![1e-2],
        separations_rayleigh: vec![0.2, 0.5],
        frames: vec![2],
        pattern_family: PatternFamily::Sinusoid,
        c0: 1.0,
    };
    experiments::run(&mk(&d1)).unwrap();
    experiments::run(&mk(&d2)).unwrap();
    assert_eq!(
        std::fs::read(d1.join("cells.csv")).unwrap(),
        std::fs::read(d2.join("cells.csv")).unwrap(),
        "campaign CSVs are not byte-identical"
    );

    // Lemma-suite scenario is all green except the known n = 6 support-lemma
    // violation (criterion 7's finding), which it must report rather than mask.
    let lines = lemma_suite(7, 100).unwrap();
    for l in &lines {
        if l.check == "combinatorial-support-lemma" {
            assert_eq!(l.violations, 1, "suite must report the single n = 6 violation");
        } else {
            assert!(l.pass, "{} unexpectedly red", l.check);
        }
    }

    // Wrapped-distance pseudometric on random triples.
    let mut rng = ChaCha8Rng::seed_from_u64(1013);
    for _ in 0..2000 {
        let period = 0.5 + rng.gen::<f64>() * 5.0;
        let (x, y, z) = (
            rng.gen::<f64>() * 20.0 - 10.0,
            rng.gen::<f64>() * 20.0 - 10.0,
            rng.gen::<f64>() * 20.0 - 10.0,
        );
        let d = |a: f64, b: f64| srlab::wrapped_distance(a, b, period).unwrap();
        assert!((d(x, y) - d(y, x)).abs() < 1e-12);
        assert!(d(x, y) <= period / 2.0 + 1e-12);
        assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-9);
    }

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "runtime {elapsed:?} exceeds 5 min");
    println!("criterion 10: PASS — property suite (linearity, translation, scaling, bounds, monotonicity, determinism), runtime {elapsed:?}");
}
