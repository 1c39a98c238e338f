//! Cross-checks between the fast model paths and dense matrix arithmetic.

use num_complex::Complex64;
use spinlab_core::model::{sample_disorder, DisorderKind, DisorderSpec, ModelConfig};
use spinlab_core::product::BlochProductState;
use spinlab_core::spectral::LinearOp;

#[test]
fn product_energy_matches_dense_quadratic_form() {
    let mut checked = 0;
    for (n, p) in [(4usize, 2usize), (5, 2), (6, 2), (5, 3), (6, 3)] {
        let cfg = ModelConfig::new(n, p).unwrap();
        for seed in 0..40u64 {
            let sample = sample_disorder(
                cfg,
                DisorderSpec {
                    kind: DisorderKind::Gaussian,
                    seed: 1000 + seed,
                },
            )
            .unwrap();
            let state = BlochProductState::random(n, 7000 + seed);
            let fast = sample.product_energy(&state).unwrap();
            let h = sample.materialize_hamiltonian().unwrap();
            let psi = state.to_state_vector().unwrap();
            let dense = h.expectation(&psi);
            assert!(
                (fast - dense).abs() < 1e-10,
                "(n={n},p={p},seed={seed}): {fast} vs {dense}"
            );
            checked += 1;
        }
    }
    assert!(checked >= 200);
}

#[test]
fn sparse_product_energy_matches_dense_route() {
    let cfg = ModelConfig::new(6, 2).unwrap();
    for seed in 0..20u64 {
        let sample = sample_disorder(
            cfg,
            DisorderSpec {
                kind: DisorderKind::SparseRademacher {
                    average_degree: 4.0,
                },
                seed,
            },
        )
        .unwrap();
        let state = BlochProductState::random(6, seed + 99);
        let fast = sample.product_energy(&state).unwrap();
        let dense = sample
            .materialize_hamiltonian()
            .unwrap()
            .expectation(&state.to_state_vector().unwrap());
        assert!((fast - dense).abs() < 1e-10);
    }
}

#[test]
fn matrix_free_apply_matches_dense_multiply() {
    for n in [4usize, 6, 8] {
        let cfg = ModelConfig::new(n, 2).unwrap();
        let sample = sample_disorder(
            cfg,
            DisorderSpec {
                kind: DisorderKind::Gaussian,
                seed: n as u64,
            },
        )
        .unwrap();
        let h = sample.materialize_hamiltonian().unwrap();
        let psi = spinlab_core::spectral::haar_state(n, 5).unwrap();
        let v: Vec<Complex64> = psi.amplitudes().iter().cloned().collect();
        let fast = sample.apply(&v).unwrap();
        let mut dense = vec![Complex64::new(0.0, 0.0); v.len()];
        h.apply_into(&v, &mut dense);
        let worst = fast
            .iter()
            .zip(&dense)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-10, "n={n}: {worst}");
    }
}

#[test]
fn adjusted_model_materializes_hermitian_with_identity_terms() {
    let cfg = ModelConfig::adjusted(3, 2).unwrap();
    let sample = sample_disorder(
        cfg,
        DisorderSpec {
            kind: DisorderKind::Gaussian,
            seed: 3,
        },
    )
    .unwrap();
    assert_eq!(sample.table().terms().len(), 16 * 3);
    let h = sample.materialize_hamiltonian().unwrap();
    assert!(h.hermiticity_defect() < 1e-12);
}
