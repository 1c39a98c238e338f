//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test -p spinlab-cli --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use rayon::prelude::*;
use spinlab_core::experiments::{
    run_concentration, run_universality, ExperimentConfig, OptimizerSettings,
};
use spinlab_core::lovasz;
use spinlab_core::matchings::{
    self, enumerate_matchings, estimate_gamma_ratio, expected_trace_sum, poisson_degree_check,
    trace_sum, trace_sum_recursive_with, BoundConfig, TraceSumCache,
};
use spinlab_core::model::{
    sample_disorder, sample_disorder_with_table, DisorderKind, DisorderSpec, ModelConfig, TermTable,
};
use spinlab_core::moments::{haar_variance_check, purity_variance, state_variance};
use spinlab_core::pauli::{Pauli, PhasedPauli};
use spinlab_core::product::{
    build_packing_net, covariance_matches_monte_carlo, optimize_multistart, BlochProductState,
    CoordinateAscent,
};
use spinlab_core::rng::CounterRng;
use spinlab_core::spectral::{lambda_max, log_partition, StateVector};
use std::time::Instant;

fn pass(number: u32, elapsed: std::time::Duration, what: &str) {
    println!("[PASS] criterion {number:02} ({elapsed:.2?}): {what}");
}

fn gaussian_spec(seed: u64) -> DisorderSpec {
    DisorderSpec {
        kind: DisorderKind::Gaussian,
        seed,
    }
}

#[test]
fn criterion_01_matching_expectation_exact() {
    let t = Instant::now();
    for d in 1..=6usize {
        let value = expected_trace_sum(d).unwrap();
        assert_eq!(value, (2 * d + 1) as f64, "d={d}");
    }
    assert!(
        t.elapsed().as_secs() < 10,
        "budget exceeded: {:?}",
        t.elapsed()
    );
    pass(
        1,
        t.elapsed(),
        "E_M[Trace_sum] = 2d+1 integer-exact for d in 1..=6",
    );
}

#[test]
fn criterion_02_recursion_equivalence() {
    let t = Instant::now();
    let mut cache = TraceSumCache::new();
    let mut total = 0usize;
    for d in 1..=5usize {
        for m in enumerate_matchings(d).unwrap() {
            assert_eq!(
                trace_sum(&m).unwrap(),
                trace_sum_recursive_with(&m, &mut cache),
                "d={d}, pairs {:?}",
                m.pairs()
            );
            total += 1;
        }
    }
    assert_eq!(total, 1 + 3 + 15 + 105 + 945);
    assert!(
        t.elapsed().as_secs() < 30,
        "budget exceeded: {:?}",
        t.elapsed()
    );
    pass(
        2,
        t.elapsed(),
        "rewiring recursion == brute force on all matchings, d <= 5",
    );
}

#[test]
fn criterion_03_covariance_formula_monte_carlo() {
    let t = Instant::now();
    let combos = [(4usize, 2usize), (6, 2), (6, 3)];
    let mut worst = 0.0f64;
    for (ci, &(n, p)) in combos.iter().enumerate() {
        let cfg = ModelConfig::new(n, p).unwrap();
        let template = sample_disorder(cfg, gaussian_spec(0)).unwrap();
        let devs: Vec<f64> = (0..20u64)
            .into_par_iter()
            .map(|pair| {
                let a = BlochProductState::random(n, 3_000 + 100 * ci as u64 + pair);
                let b = BlochProductState::random(n, 9_000 + 100 * ci as u64 + pair);
                let chk = covariance_matches_monte_carlo(
                    &template,
                    &a,
                    &b,
                    100_000,
                    41 + 10 * ci as u64 + pair,
                )
                .unwrap();
                (chk.empirical - chk.analytic).abs() / chk.stderr.max(1e-15)
            })
            .collect();
        for (pair, dev) in devs.iter().enumerate() {
            assert!(
                *dev <= 3.0,
                "(n={n},p={p}) pair {pair}: {dev:.2} standard errors"
            );
            worst = worst.max(*dev);
        }
    }
    assert!(
        t.elapsed().as_secs() < 120,
        "budget exceeded: {:?}",
        t.elapsed()
    );
    pass(
        3,
        t.elapsed(),
        &format!("analytic covariance within 3 stderr over 60 pairs (worst {worst:.2})"),
    );
}

#[test]
fn criterion_04_swap_identity_exact() {
    let t = Instant::now();
    let mut sum = nalgebra::DMatrix::<num_complex::Complex64>::zeros(4, 4);
    for l in Pauli::NON_IDENTITY {
        sum += PhasedPauli::from_letters(&[l, l])
            .materialize()
            .unwrap()
            .matrix();
    }
    let one = num_complex::Complex64::new(1.0, 0.0);
    let mut target = nalgebra::DMatrix::<num_complex::Complex64>::zeros(4, 4);
    for b in 0..4usize {
        let swapped = ((b & 1) << 1) | ((b >> 1) & 1);
        target[(swapped, b)] += one * 2.0;
    }
    for i in 0..4 {
        target[(i, i)] -= one;
    }
    assert_eq!(sum, target, "entrywise exact equality");
    pass(
        4,
        t.elapsed(),
        "sum_a sigma^a (x) sigma^a == 2*SWAP - I entrywise",
    );
}

#[test]
fn criterion_05_product_state_variance_is_one() {
    let t = Instant::now();
    let mut count = 0;
    for (n, p) in [(4usize, 2usize), (5, 2), (6, 2), (7, 3), (8, 3)] {
        let cfg = ModelConfig::new(n, p).unwrap();
        for seed in 0..10u64 {
            let bloch = BlochProductState::random(n, 101 * n as u64 + seed);
            let psi = bloch.to_state_vector().unwrap();
            let v = state_variance(&psi, &cfg).unwrap();
            assert!((v - 1.0).abs() < 1e-10, "(n={n},p={p},seed={seed}): {v}");
            count += 1;
        }
    }
    assert_eq!(count, 50);
    pass(
        5,
        t.elapsed(),
        "50 random product states have disorder variance 1 (1e-10)",
    );
}

#[test]
fn criterion_06_haar_variance() {
    let t = Instant::now();
    for (n, p) in [(4usize, 2usize), (6, 2)] {
        let rep = haar_variance_check(n, p, 10_000, 2026).unwrap();
        let dev = (rep.empirical_mean - rep.target).abs();
        assert!(
            dev <= 3.0 * rep.stderr,
            "(n={n},p={p}): mean {} vs target {} (se {})",
            rep.empirical_mean,
            rep.target,
            rep.stderr
        );
    }
    assert!(
        t.elapsed().as_secs() < 300,
        "budget exceeded: {:?}",
        t.elapsed()
    );
    pass(
        6,
        t.elapsed(),
        "Haar-average variance within 3 stderr of 3^p/(2^n+1)",
    );
}

#[test]
fn criterion_07_purity_expansion() {
    let t = Instant::now();
    let mut count = 0;
    for (n, p) in [(4usize, 2usize), (5, 3)] {
        let cfg = ModelConfig::new(n, p).unwrap();
        for seed in 0..25u64 {
            let psi = spinlab_core::spectral::haar_state(n, 500 + 31 * n as u64 + seed).unwrap();
            let direct = state_variance(&psi, &cfg).unwrap();
            let expanded = purity_variance(&psi, p).unwrap();
            assert!(
                (direct - expanded).abs() < 1e-10,
                "(n={n},p={p},seed={seed}): {direct} vs {expanded}"
            );
            count += 1;
        }
    }
    assert_eq!(count, 50);
    // Bell value 3, exact to floating arithmetic (1/sqrt(2) itself is not
    // representable; the residual is a few ulps).
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let bell = StateVector::new(
        2,
        nalgebra::DVector::from_vec(vec![
            num_complex::Complex64::new(s, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
            num_complex::Complex64::new(s, 0.0),
        ]),
    )
    .unwrap();
    let bell_value = purity_variance(&bell, 2).unwrap();
    assert!((bell_value - 3.0).abs() < 1e-13, "Bell value {bell_value}");
    pass(
        7,
        t.elapsed(),
        "purity expansion == direct variance (1e-10); Bell value 3",
    );
}

#[test]
fn criterion_08_eigen_cross_check() {
    let t = Instant::now();
    let cases: Vec<(usize, usize, u64)> = [
        (4usize, 2usize),
        (5, 2),
        (6, 2),
        (6, 3),
        (7, 2),
        (8, 2),
        (8, 3),
    ]
    .iter()
    .flat_map(|&(n, p)| (0..8u64).map(move |s| (n, p, s)))
    .collect();
    let checked: usize = cases
        .par_iter()
        .map(|&(n, p, seed)| {
            let cfg = ModelConfig::new(n, p).unwrap();
            let sample = sample_disorder(cfg, gaussian_spec(77 * n as u64 + seed)).unwrap();
            let iterative = lambda_max(&sample, 1e-9).unwrap();
            let dense = sample.materialize_hamiltonian().unwrap().lambda_max_dense();
            assert!(
                (iterative.value - dense).abs() < 1e-8,
                "(n={n},p={p},seed={seed}): {} vs {dense}",
                iterative.value
            );
            1usize
        })
        .sum();
    assert!(checked >= 50);
    pass(
        8,
        t.elapsed(),
        &format!("iterative lambda_max within 1e-8 of dense diagonalization ({checked} instances)"),
    );
}

#[test]
fn criterion_09_free_energy_sandwich() {
    let t = Instant::now();
    let cfg = ModelConfig::new(5, 2).unwrap();
    let table = TermTable::new(cfg).unwrap();
    let log_dim = (32.0f64).ln();
    for seed in 0..20u64 {
        let sample = sample_disorder_with_table(&table, gaussian_spec(seed)).unwrap();
        let h = sample.materialize_hamiltonian().unwrap();
        let lm = h.lambda_max_dense();
        for beta in [1.0, 10.0, 100.0] {
            let f = log_partition(&h, beta).unwrap();
            assert!(lm <= f + 1e-9, "seed {seed} beta {beta}");
            assert!(f <= lm + log_dim / beta + 1e-9, "seed {seed} beta {beta}");
        }
    }
    pass(
        9,
        t.elapsed(),
        "lambda_max <= F_beta <= lambda_max + log(2^n)/beta (1e-9 slack)",
    );
}

#[test]
fn criterion_10_optimizer_validity() {
    let t = Instant::now();
    // Monotone on every update, checked against exact re-evaluations.
    for (n, p, seed) in [(5usize, 2usize, 1u64), (6, 3, 2), (8, 2, 3)] {
        let cfg = ModelConfig::new(n, p).unwrap();
        let sample = sample_disorder(cfg, gaussian_spec(seed)).unwrap();
        let ascent = CoordinateAscent::new(&sample);
        let mut state = BlochProductState::random(n, seed + 60);
        let mut energy = sample.product_energy(&state).unwrap();
        for _sweep in 0..20 {
            for q in 0..n {
                ascent.update(&mut state, q);
                let e = sample.product_energy(&state).unwrap();
                assert!(e >= energy - 1e-12, "update decreased energy");
                energy = e;
            }
        }
    }
    // Result bounded by lambda_max on n <= 8 instances.
    for (n, p) in [(4usize, 2usize), (6, 2), (7, 2), (8, 2), (8, 3)] {
        let cfg = ModelConfig::new(n, p).unwrap();
        for seed in 0..4u64 {
            let sample = sample_disorder(cfg, gaussian_spec(13 * n as u64 + seed)).unwrap();
            let run = optimize_multistart(&sample, 4, seed, 500, 1e-9).unwrap();
            let lm = lambda_max(&sample, 1e-9).unwrap();
            assert!(run.energy <= lm.value + 1e-8, "(n={n},p={p},seed={seed})");
        }
    }
    // ZZ toy instance reaches the extremal energy 1.
    let cfg = ModelConfig::new(2, 2).unwrap();
    let zz = spinlab_core::model::DisorderSample::single_term(
        cfg,
        vec![0, 1],
        vec![Pauli::Z, Pauli::Z],
        1.0,
    )
    .unwrap();
    let run = optimize_multistart(&zz, 8, 5, 500, 1e-9).unwrap();
    assert!(
        (run.energy - 1.0).abs() < 1e-9,
        "ZZ toy energy {}",
        run.energy
    );
    pass(
        10,
        t.elapsed(),
        "monotone ascent, bounded by lambda_max, ZZ toy reaches 1",
    );
}

#[test]
fn criterion_11_concentration() {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        id: "acc-concentration".into(),
        n: 8,
        p: 2,
        adjusted: false,
        disorders: vec![DisorderKind::Gaussian],
        samples: 200,
        optimizer: OptimizerSettings::default(),
        sweep: vec![],
        thresholds: None,
        output_dir: None,
        master_seed: 11,
    };
    let rep = run_concentration(&cfg).unwrap();
    let scaled_std = rep.summary["std_normalized_times_sqrt_n"].as_f64().unwrap();
    assert!(scaled_std <= 3.0, "std * sqrt(n) = {scaled_std}");
    assert!(
        t.elapsed().as_secs() < 600,
        "budget exceeded: {:?}",
        t.elapsed()
    );
    pass(
        11,
        t.elapsed(),
        &format!("empirical std of optimized energy x sqrt(n) = {scaled_std:.3} <= 3"),
    );
}

#[test]
fn criterion_12_universality() {
    let t = Instant::now();
    let cfg = ExperimentConfig {
        id: "acc-universality".into(),
        n: 8,
        p: 2,
        adjusted: false,
        disorders: vec![DisorderKind::Gaussian, DisorderKind::Rademacher],
        samples: 200,
        optimizer: OptimizerSettings::default(),
        sweep: vec![],
        thresholds: None,
        output_dir: None,
        master_seed: 7,
    };
    let rep = run_universality(&cfg).unwrap();
    let gap = rep.summary["gap"].as_f64().unwrap();
    let combined = rep.summary["combined_stderr"].as_f64().unwrap();
    let mean0 = rep.summary["arms"][0]["mean"].as_f64().unwrap();
    let gate = (2.0 * combined).max(0.1 * mean0.abs());
    assert!(
        gap.abs() <= gate,
        "gap {gap} exceeds max(2*{combined}, 0.1*{mean0})"
    );
    // Same-spec self-comparison gaps at exactly zero.
    let mut same = cfg.clone();
    same.id = "acc-universality-self".into();
    same.disorders = vec![DisorderKind::Gaussian, DisorderKind::Gaussian];
    same.samples = 20;
    let self_rep = run_universality(&same).unwrap();
    assert_eq!(self_rep.summary["gap"].as_f64().unwrap(), 0.0);
    pass(
        12,
        t.elapsed(),
        &format!("Gaussian vs Rademacher gap {gap:.4} within gate {gate:.4}; self-gap exactly 0"),
    );
}

#[test]
fn criterion_13_poisson_degrees() {
    let t = Instant::now();
    let rep = poisson_degree_check(60, 2, 30, 10_000, 17).unwrap();
    assert!(rep.tv_distance <= 0.05, "TV distance {}", rep.tv_distance);
    pass(
        13,
        t.elapsed(),
        &format!(
            "TV(empirical degree pmf, Poisson(1)) = {:.4} <= 0.05",
            rep.tv_distance
        ),
    );
}

#[test]
fn criterion_14_gamma_pipeline() {
    let t = Instant::now();
    // r = 1 forces a single pair per touched qubit: ratio exactly 1.
    let single = estimate_gamma_ratio(6, 2, 1, 200, 3).unwrap();
    assert_eq!(single.ratio, 1.0);
    assert_eq!(single.per_r_ratio, 1.0);
    // n=4, p=2, r=2 against the exhaustive enumeration. Frozen oracle values:
    // pairs of distinct 2-subsets of [4] share 0 qubits (3/15, product 81) or
    // 1 qubit (12/15, value E[Trace_sum at d=2]*9 = 45), so both sides average
    // (3*81 + 12*45)/15 = 52.2 and the exact ratio is 1.
    let lhs_exact = 52.2;
    let ratio_exact = 1.0;
    let est = estimate_gamma_ratio(4, 2, 2, 20_000, 19).unwrap();
    assert!(
        (est.lhs_mean - lhs_exact).abs() <= 3.0 * est.lhs_stderr,
        "lhs {} vs {lhs_exact} (se {})",
        est.lhs_mean,
        est.lhs_stderr
    );
    assert!(
        (est.ratio - ratio_exact).abs() <= 3.0 * est.ratio_stderr.max(1e-15),
        "ratio {} vs {ratio_exact} (se {})",
        est.ratio,
        est.ratio_stderr
    );
    pass(
        14,
        t.elapsed(),
        &format!(
            "r=1 ratio exactly 1; (4,2,2) Monte Carlo ratio {:.4} matches enumeration",
            est.ratio
        ),
    );
}

#[test]
fn criterion_15_g_bound_lemma() {
    let t = Instant::now();
    // Witness evaluation reproduces the three summands bitwise (identical
    // float operations) and the summands match their closed forms.
    for (p, gamma, c) in [
        (100u64, 1.0f64, 0.7f64),
        (1_000_000, 1.0, 1.0),
        (10_000, 2.0, 0.8),
    ] {
        let beta = matchings::witness_beta(p, gamma).unwrap();
        let t1 = c / beta;
        let t2 = beta * gamma / 2.0;
        let t3 = (1.0 + p as f64 * gamma * beta * beta).ln() / beta;
        let direct = matchings::g_value(beta, p, gamma, c);
        assert_eq!(
            direct.to_bits(),
            (t1 + t2 + t3).to_bits(),
            "summand identity"
        );
        let [w1, w2, w3] = matchings::witness_summands(p, gamma, c).unwrap();
        assert!((t1 - w1).abs() <= 1e-12 * w1.abs());
        assert!((t2 - w2).abs() <= 1e-12 * w2.abs());
        assert!((t3 - w3).abs() <= 1e-12 * w3.abs());
    }
    // Ratio bound at p = 1e6 and monotone decrease along the p sweep.
    let mut prev = f64::INFINITY;
    let mut ratio_at_1e6 = 0.0;
    for p in [100u64, 10_000, 1_000_000, 100_000_000] {
        let cfg = BoundConfig::new(p, 1.0, 1.0).unwrap();
        let out = matchings::minimize_g(&cfg).unwrap();
        assert!(
            out.ratio_to_sqrt <= prev + 1e-12,
            "ratio increased at p={p}"
        );
        prev = out.ratio_to_sqrt;
        if p == 1_000_000 {
            ratio_at_1e6 = out.ratio_to_sqrt;
        }
    }
    assert!(ratio_at_1e6 <= 1.25, "ratio at p=1e6: {ratio_at_1e6}");
    pass(
        15,
        t.elapsed(),
        &format!("witness summands exact; g_min/sqrt(2 gamma log p) = {ratio_at_1e6:.4} at p=1e6, decreasing in p"),
    );
}

#[test]
fn criterion_16_lovasz_suite() {
    let t = Instant::now();
    for n in [5usize, 12] {
        let th = lovasz::lovasz_theta(&lovasz::Graph::empty(n), 1e-3).unwrap();
        assert!(
            (th.value - n as f64).abs() <= 1e-3,
            "empty {n}: {}",
            th.value
        );
        let th = lovasz::lovasz_theta(&lovasz::Graph::complete(n), 1e-3).unwrap();
        assert!((th.value - 1.0).abs() <= 1e-3, "complete {n}: {}", th.value);
    }
    let c5 = lovasz::lovasz_theta(&lovasz::Graph::cycle(5), 1e-2).unwrap();
    assert!((c5.value - 5.0f64.sqrt()).abs() <= 1e-2, "C5: {}", c5.value);

    let g3 = lovasz::build_anticommutativity_graph(3).unwrap();
    let th_g3 = lovasz::lovasz_theta(&g3.graph, 1e-2).unwrap();
    assert!(th_g3.value <= 3.0 + 1e-2, "theta(G_3) = {}", th_g3.value);

    let family = lovasz::nine_pauli_family(4).unwrap();
    assert!(lovasz::verify_independent_set(&family).unwrap());

    let mut products = Vec::new();
    for n in [3usize, 4] {
        let chk = lovasz::vertex_symmetric_product_check(n, 0.05).unwrap();
        let rel = (chk.product - chk.target).abs() / chk.target;
        assert!(
            rel <= 0.05,
            "n={n}: product {} vs {}",
            chk.product,
            chk.target
        );
        products.push(format!("n={n}: {:.3}/{}", chk.product, chk.target));
    }
    assert!(
        t.elapsed().as_secs() < 600,
        "budget exceeded: {:?}",
        t.elapsed()
    );
    pass(
        16,
        t.elapsed(),
        &format!(
            "empty/complete/C5/G3 within tolerance; 9-Pauli set verified; products {}",
            products.join(", ")
        ),
    );
}

#[test]
fn criterion_17_packing_nets() {
    let t = Instant::now();
    for eps in [0.01f64, 0.05, 0.2] {
        let net = build_packing_net(eps).unwrap();
        // verify() enforces exact pairwise |dot| <= 1-eps and z >= 0.01.
        net.verify().unwrap();
        assert!(
            net.size() as f64 >= 0.5 / eps,
            "eps={eps}: size {} < {}",
            net.size(),
            0.5 / eps
        );
    }
    pass(
        17,
        t.elapsed(),
        "nets exact at eps in {0.01, 0.05, 0.2} with size >= 0.5/eps",
    );
}

#[test]
fn criterion_18_subadditivity_identity() {
    let t = Instant::now();
    let rng = CounterRng::new(0xACC);
    let mut ctr = 0u64;
    for trial in 0..10_000u64 {
        let m = 1 + (rng.u64_at(2 * trial) % 14) as usize;
        let n = 1 + (rng.u64_at(2 * trial + 1) % 14) as usize;
        let vals: Vec<f64> = (0..m + n)
            .map(|_| {
                ctr += 1;
                2.0 * rng.derive(1).f64_at(ctr) - 1.0
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
    pass(
        18,
        t.elapsed(),
        "covariance sub-additivity on 1e4 profiles, p in {2,4}, 1e-12",
    );
}

#[test]
fn criterion_19_cli_reproducibility() {
    let t = Instant::now();
    let bin = env!("CARGO_BIN_EXE_spinlab");
    let base = std::env::temp_dir().join(format!("spinlab-acc-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&base);

    let run = |args: &[&str], out: &std::path::Path, threads: &str| {
        let output = std::process::Command::new(bin)
            .args(args)
            .arg("--threads")
            .arg(threads)
            .env("SPINLAB_OUT", out)
            .output()
            .expect("spawning spinlab");
        assert!(
            output.status.success(),
            "spinlab {args:?} failed: {}",
            String::from_utf8_lossy(&output.stderr)
        );
        output.stdout
    };

    // `exact` prints bit-for-bit identically across reruns.
    let a = run(
        &["exact", "--n", "6", "--p", "2", "--seed", "3"],
        &base.join("a"),
        "2",
    );
    let b = run(
        &["exact", "--n", "6", "--p", "2", "--seed", "3"],
        &base.join("b"),
        "4",
    );
    assert_eq!(a, b, "exact output differs across runs/threads");

    // `gamma` writes byte-identical JSON.
    let d1 = base.join("g1");
    let d2 = base.join("g2");
    let gamma_args = [
        "gamma",
        "--n",
        "10",
        "--p",
        "2",
        "--r",
        "4",
        "--samples",
        "500",
        "--seed",
        "7",
    ];
    run(&gamma_args, &d1, "1");
    run(&gamma_args, &d2, "8");
    let j1 = std::fs::read(d1.join("gamma.json")).unwrap();
    let j2 = std::fs::read(d2.join("gamma.json")).unwrap();
    assert_eq!(j1, j2, "gamma.json differs across thread counts");

    // `scaling` CSV artifacts are byte-identical across thread counts.
    let s1 = base.join("s1");
    let s2 = base.join("s2");
    let scaling_args = [
        "scaling",
        "--n",
        "5",
        "--p",
        "2",
        "--samples",
        "12",
        "--seed",
        "9",
        "--restarts",
        "2",
    ];
    run(&scaling_args, &s1, "1");
    run(&scaling_args, &s2, "8");
    let c1 = std::fs::read(s1.join("scaling.csv")).unwrap();
    let c2 = std::fs::read(s2.join("scaling.csv")).unwrap();
    assert_eq!(c1, c2, "scaling.csv differs across thread counts");
    let sj1 = std::fs::read(s1.join("scaling.json")).unwrap();
    let sj2 = std::fs::read(s2.join("scaling.json")).unwrap();
    assert_eq!(sj1, sj2, "scaling.json differs across thread counts");

    let _ = std::fs::remove_dir_all(&base);
    pass(
        19,
        t.elapsed(),
        "CLI outputs byte-identical on rerun and across --threads",
    );
}
