//! Product-module invariants: covariance machinery, sub-additivity, and the
//! coordinate-ascent contracts against spectral cross-checks.

use spinlab_core::model::{sample_disorder, DisorderKind, DisorderSpec, ModelConfig};
use spinlab_core::product::{
    covariance, covariance_matches_monte_carlo, optimize_multistart, optimize_product_state,
    BlochProductState, CoordinateAscent, OverlapProfile,
};
use spinlab_core::rng::{CounterRng, SeqRng};
use spinlab_core::spectral::lambda_max;

#[test]
fn covariance_monte_carlo_smoke() {
    let cfg = ModelConfig::new(4, 2).unwrap();
    let template = sample_disorder(
        cfg,
        DisorderSpec {
            kind: DisorderKind::Gaussian,
            seed: 0,
        },
    )
    .unwrap();
    // Identical states: analytic covariance 1.
    let a = BlochProductState::random(4, 11);
    let check = covariance_matches_monte_carlo(&template, &a, &a, 20_000, 5).unwrap();
    assert!((check.analytic - 1.0).abs() < 1e-12);
    assert!(
        (check.empirical - check.analytic).abs() <= 3.0 * check.stderr,
        "{check:?}"
    );
    // Fully anti-aligned states at n=p: analytic (−1)^p = +1 for p=2.
    let cfg2 = ModelConfig::new(2, 2).unwrap();
    let template2 = sample_disorder(
        cfg2,
        DisorderSpec {
            kind: DisorderKind::Gaussian,
            seed: 0,
        },
    )
    .unwrap();
    let up = BlochProductState::new(vec![[0.0, 0.0, 1.0]; 2]).unwrap();
    let down = BlochProductState::new(vec![[0.0, 0.0, -1.0]; 2]).unwrap();
    let check = covariance_matches_monte_carlo(&template2, &up, &down, 20_000, 6).unwrap();
    assert!((check.analytic - 1.0).abs() < 1e-12);
    assert!((check.empirical - 1.0).abs() <= 3.0 * check.stderr);
}

#[test]
fn covariance_subadditivity_identity() {
    // (Σ_{1..m+n} R)^p/(m+n)^{p-1} ≤ (Σ_{1..m} R)^p/m^{p-1} + (Σ_{m+1..m+n} R)^p/n^{p-1}
    // for even p, from the convexity of x^p.
    let rng = CounterRng::new(0x5AB);
    let mut ctr = 0u64;
    for trial in 0..10_000u64 {
        let m = 1 + (rng.u64_at(trial * 3) % 12) as usize;
        let n = 1 + (rng.u64_at(trial * 3 + 1) % 12) as usize;
        let vals: Vec<f64> = (0..m + n)
            .map(|_| {
                ctr += 1;
                2.0 * rng.derive(0xF00).f64_at(ctr) - 1.0
            })
            .collect();
        let s_all: f64 = vals.iter().sum();
        let s_left: f64 = vals[..m].iter().sum();
        let s_right: f64 = vals[m..].iter().sum();
        for p in [2i32, 4] {
            let lhs = s_all.powi(p) / ((m + n) as f64).powi(p - 1);
            let rhs =
                s_left.powi(p) / (m as f64).powi(p - 1) + s_right.powi(p) / (n as f64).powi(p - 1);
            assert!(lhs <= rhs + 1e-12, "trial {trial}, p={p}: {lhs} > {rhs}");
        }
    }
}

#[test]
fn optimizer_bounded_by_lambda_max() {
    for (n, p) in [(4usize, 2usize), (6, 2), (6, 3), (8, 2)] {
        let cfg = ModelConfig::new(n, p).unwrap();
        for seed in 0..5u64 {
            let sample = sample_disorder(
                cfg,
                DisorderSpec {
                    kind: DisorderKind::Gaussian,
                    seed: 100 * n as u64 + seed,
                },
            )
            .unwrap();
            let run = optimize_multistart(&sample, 4, seed, 500, 1e-9).unwrap();
            let lm = lambda_max(&sample, 1e-9).unwrap();
            assert!(
                run.energy <= lm.value + 1e-8,
                "(n={n},p={p},seed={seed}): product {} > lambda_max {}",
                run.energy,
                lm.value
            );
        }
    }
}

#[test]
fn per_update_monotonicity() {
    let cfg = ModelConfig::new(6, 3).unwrap();
    for seed in 0..5u64 {
        let sample = sample_disorder(
            cfg,
            DisorderSpec {
                kind: DisorderKind::Gaussian,
                seed,
            },
        )
        .unwrap();
        let ascent = CoordinateAscent::new(&sample);
        let mut state = BlochProductState::random(6, seed + 40);
        let mut energy = sample.product_energy(&state).unwrap();
        for sweep in 0..30 {
            for q in 0..6 {
                ascent.update(&mut state, q);
                let e = sample.product_energy(&state).unwrap();
                assert!(
                    e >= energy - 1e-12,
                    "seed {seed} sweep {sweep} qubit {q}: {e} < {energy}"
                );
                energy = e;
            }
        }
    }
}

#[test]
fn optimizer_beats_axis_grid_at_n6() {
    // The 6^n grid over ±x,±y,±z per qubit is a classical-like baseline the
    // continuous ascent must dominate.
    let n = 6usize;
    let cfg = ModelConfig::new(n, 2).unwrap();
    let axes: [[f64; 3]; 6] = [
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    for seed in 0..20u64 {
        let sample = sample_disorder(
            cfg,
            DisorderSpec {
                kind: DisorderKind::Gaussian,
                seed: 500 + seed,
            },
        )
        .unwrap();
        let mut best_axis = f64::NEG_INFINITY;
        let mut digits = [0usize; 6];
        loop {
            let state = BlochProductState::new(digits.iter().map(|&d| axes[d]).collect()).unwrap();
            best_axis = best_axis.max(sample.product_energy(&state).unwrap());
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                digits[pos] += 1;
                if digits[pos] < 6 {
                    break;
                }
                digits[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
        let run = optimize_multistart(&sample, 12, seed, 500, 1e-9).unwrap();
        assert!(
            run.energy >= best_axis - 1e-9,
            "seed {seed}: optimized {} below axis grid {}",
            run.energy,
            best_axis
        );
    }
}

#[test]
fn optimizer_runs_matrix_free_at_n16() {
    // No dense object exists at n=16; the term-based paths carry the run.
    let cfg = ModelConfig::new(16, 2).unwrap();
    let sample = sample_disorder(
        cfg,
        DisorderSpec {
            kind: DisorderKind::Gaussian,
            seed: 4,
        },
    )
    .unwrap();
    let run = optimize_multistart(&sample, 3, 4, 300, 1e-8).unwrap();
    assert!(run.energy.is_finite() && run.energy > 0.0);
    for w in run.sweep_trace.windows(2) {
        assert!(w[1] >= w[0] - 1e-12);
    }
}

#[test]
fn sweep_budget_and_tolerance_contract() {
    let cfg = ModelConfig::new(5, 2).unwrap();
    let sample = sample_disorder(
        cfg,
        DisorderSpec {
            kind: DisorderKind::Gaussian,
            seed: 77,
        },
    )
    .unwrap();
    let init = BlochProductState::random(5, 1);
    let out = optimize_product_state(&sample, &init, 3, 0.0).unwrap();
    assert_eq!(out.sweeps, 3);
    let converged = optimize_product_state(&sample, &init, 500, 1e-9).unwrap();
    assert!(converged.sweeps < 500);
    let trace = &converged.sweep_trace;
    assert!(trace[trace.len() - 1] - trace[trace.len() - 2] < 1e-9);
}

#[test]
fn covariance_profile_consistency_random_states() {
    // covariance(p, profile(A,B)) matches E_p over explicit dot products.
    let mut rng = SeqRng::new(9);
    for _ in 0..50 {
        let n = 4 + (rng.below(5) as usize);
        let p = 2 + (rng.below(2) as usize);
        if p > n {
            continue;
        }
        let a = BlochProductState::random(n, rng.next_u64());
        let b = BlochProductState::random(n, rng.next_u64());
        let profile = OverlapProfile::from_states(&a, &b).unwrap();
        let c = covariance(p, &profile).unwrap();
        assert!(c.abs() <= 1.0 + 1e-12);
    }
}
