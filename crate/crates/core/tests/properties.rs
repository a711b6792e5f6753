use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qnpr_core::cv::{invert_analytic, QumodeGrid};
use qnpr_core::dataset::{split_indices, standardize, synthesize, Dataset, SplitSpec};
use qnpr_core::dme::{run_pipeline_dme, theta_measure, DMEPlan, DmeInstance};
use qnpr_core::encoding::{
    embed_kernel_vector, embed_query, feature_basis, gram, kernel_value, kernel_vector, EncodingSpec,
    FeatureBasis, DEFAULT_RANK_TOLERANCE,
};
use qnpr_core::spectrum::{
    apply_transform, build_training_state, classical_krr, finite_squeeze_f, overlap_unnormalized,
    predict_overlap, quantum_vs_classical_scale, ridge_g, swap_test, SpectrumTransform, TrainedState,
    TrainingState, QueryState,
};

fn dataset(seed: u64, m: usize, n: usize) -> Dataset {
    synthesize(seed, m, n, 0.1).unwrap()
}

fn encodings() -> Vec<EncodingSpec> {
    vec![EncodingSpec::coherent(), EncodingSpec::squeezed(1.0).unwrap(), EncodingSpec::raw_amplitude()]
}

// Cyclic Jacobi eigenvalues, independent of the library eigensolver.
fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut a = a.clone();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|(i, j)| i != j).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                let mut j = DMatrix::identity(n, n);
                j[(p, p)] = c;
                j[(q, q)] = c;
                j[(p, q)] = s;
                j[(q, p)] = -s;
                a = j.transpose() * &a * &j;
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev
}

fn orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    let r = dataset(seed, d, d).features;
    r.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_symmetric(u in prop::collection::vec(-3.0f64..3.0, 1..5), seed in 0u64..1000) {
        let v: Vec<f64> = dataset(seed, 1, u.len()).features.row(0).iter().copied().collect();
        for spec in encodings() {
            prop_assert_eq!(kernel_value(&u, &v, &spec).unwrap(), kernel_value(&v, &u, &spec).unwrap());
        }
    }

    #[test]
    fn gaussian_grams_are_psd(seed in 0u64..10_000, m in 1usize..20, n in 1usize..5, scale in 0.2f64..3.0) {
        let d = dataset(seed, m, n);
        for spec in [EncodingSpec::coherent(), EncodingSpec::squeezed(scale).unwrap()] {
            let k = gram(&d, &spec).unwrap();
            let min = k.entries.clone().symmetric_eigen().eigenvalues.min();
            prop_assert!(min >= -1e-10, "min eigenvalue {}", min);
        }
    }

    #[test]
    fn training_state_is_normalized(seed in 0u64..10_000, m in 1usize..17, n in 1usize..5) {
        let d = dataset(seed, m, n);
        for spec in encodings() {
            let basis = feature_basis(&gram(&d, &spec).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap();
            let t = build_training_state(&basis).unwrap();
            prop_assert!((t.norm_squared() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn spectrum_matches_gram_eigenvalues(seed in 0u64..10_000, m in 2usize..12, n in 1usize..5) {
        let d = dataset(seed, m, n);
        for spec in encodings() {
            let k = gram(&d, &spec).unwrap();
            let basis = feature_basis(&k, DEFAULT_RANK_TOLERANCE).unwrap();
            let t = build_training_state(&basis).unwrap();
            let ev = jacobi_eigenvalues(&(&k.entries / k.trace));
            for (i, e) in ev.iter().enumerate() {
                let l2 = if i < t.rank() { t.singular_values[i].powi(2) } else { 0.0 };
                prop_assert!((l2 - e).abs() < 1e-10, "{} vs {}", l2, e);
            }
        }
    }

    #[test]
    fn predictions_invariant_under_basis_rotation(seed in 0u64..10_000, m in 2usize..7, n in 1usize..4) {
        let d = dataset(seed, m + 1, n);
        let train = d.subset(&(0..m).collect::<Vec<_>>());
        let query: Vec<f64> = d.features.row(m).iter().copied().collect();
        let spec = EncodingSpec::coherent();
        let basis = feature_basis(&gram(&train, &spec).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap();
        let rotated = basis.rotated(&orthogonal(basis.rank(), seed + 1));
        let run = |b: &FeatureBasis| -> Vec<f64> {
            let t = build_training_state(b).unwrap();
            let qs = QueryState::new(&train.targets, &embed_query(&query, &train, &spec, b).unwrap()).unwrap();
            let mut out = Vec::new();
            for tr in [SpectrumTransform::ridge(0.1), SpectrumTransform::finite_squeeze(2.0, 0.1)] {
                out.push(predict_overlap(&apply_transform(&t, &tr).unwrap(), &qs).unwrap());
            }
            out.push(predict_overlap(&invert_analytic(&t, 1.5, 0.1).unwrap().normalized_state, &qs).unwrap());
            let mu = theta_measure(1.5, &QumodeGrid::default_for(1.5).unwrap(), 7).unwrap();
            let inst = DmeInstance { basis: b.clone(), state: t, queries: vec![qs] };
            let plan = DMEPlan::new(3, 1, 1.0, seed).unwrap();
            out.extend(run_pipeline_dme(&inst, &plan, 0.1, &mu).unwrap().predictions);
            out
        };
        for (a, b) in run(&basis).iter().zip(run(&rotated).iter()) {
            prop_assert!((a - b).abs() < 1e-9, "{} vs {}", a, b);
        }
    }

    #[test]
    fn oracle_equivalence(seed in 0u64..10_000, m in 2usize..17, n in 1usize..5, chi_idx in 0usize..3) {
        let chi = [1e-3, 1e-1, 1.0][chi_idx];
        let d = dataset(seed, m + 1, n);
        let train = d.subset(&(0..m).collect::<Vec<_>>());
        let query: Vec<f64> = d.features.row(m).iter().copied().collect();
        for spec in encodings() {
            let k = gram(&train, &spec).unwrap();
            // Exact rank deficiency is fine; eigenvalues between rounding
            // level and 1e-8 Tr K leave the numerical rank ambiguous.
            let ev = k.entries.clone().symmetric_eigen().eigenvalues;
            prop_assume!(!ev.iter().any(|&l| l.abs() > 1e-13 * k.trace && l < 1e-8 * k.trace));
            let basis = feature_basis(&k, DEFAULT_RANK_TOLERANCE).unwrap();
            let t = build_training_state(&basis).unwrap();
            let kappa = kernel_vector(&train, &query, &spec).unwrap();
            let qs = QueryState::new(&train.targets, &embed_kernel_vector(&kappa, &basis).unwrap()).unwrap();
            let quantum = overlap_unnormalized(&apply_transform(&t, &SpectrumTransform::ridge(chi)).unwrap(), &qs).unwrap();
            let scale = quantum_vs_classical_scale(&t, &train.targets, chi);
            let classical = scale.factor * classical_krr(&k, &train.targets, scale.chi_classical, &kappa).unwrap();
            prop_assert!((quantum - classical).abs() <= 1e-9 * classical.abs().max(1e-12), "{} vs {}", quantum, classical);
        }
    }

    #[test]
    fn finite_squeezing_is_dominated_by_ridge(l in 1e-4f64..1.0, s in 0.1f64..50.0, chi in 0.0f64..2.0) {
        let g = ridge_g(l, chi).unwrap();
        prop_assert!(finite_squeeze_f(l, s, chi) < g);
    }

    #[test]
    fn post_selected_state_ignores_common_scale(seed in 0u64..10_000, k in 0.01f64..100.0) {
        let d = dataset(seed, 5, 2);
        let basis = feature_basis(&gram(&d, &EncodingSpec::coherent()).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap();
        let t: TrainingState = build_training_state(&basis).unwrap();
        let r = invert_analytic(&t, 2.0, 0.1).unwrap();
        prop_assert!(r.success_probability > 0.0 && r.success_probability <= 1.0);
        let scaled = &r.components * k;
        let unit = &scaled / scaled.norm();
        let ts = TrainedState::from_components(&t, unit).unwrap();
        prop_assert!((ts.components.clone() - r.normalized_state.components.clone()).amax() < 1e-12);
    }

    #[test]
    fn standardize_is_idempotent(seed in 0u64..10_000, m in 2usize..30, n in 1usize..5) {
        let once = standardize(&dataset(seed, m, n)).unwrap();
        let twice = standardize(&once).unwrap();
        prop_assert!((&once.features - &twice.features).amax() < 1e-12);
        for c in once.features.column_iter() {
            prop_assert!(c.mean().abs() < 1e-12);
            let var = c.iter().map(|v| v * v).sum::<f64>() / m as f64;
            prop_assert!(var.abs() < 1e-12 || (var - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_operations_are_pure(seed in any::<u64>()) {
        prop_assert_eq!(dataset(seed, 6, 2), dataset(seed, 6, 2));
        let spec = SplitSpec { train_count: 4, test_count: 3, seed };
        prop_assert_eq!(split_indices(10, &spec).unwrap(), split_indices(10, &spec).unwrap());
        prop_assert_eq!(swap_test(0.3, 100, seed).unwrap(), swap_test(0.3, 100, seed).unwrap());
    }
}

#[test]
fn swap_test_is_unbiased() {
    let overlap: f64 = 0.6;
    let p = 0.5 * (1.0 + overlap * overlap);
    let shots = 200u64;
    let n = 2000;
    let mean = (0..n).map(|i| swap_test(overlap, shots, i).unwrap().p_hat).sum::<f64>() / n as f64;
    let sd = (p * (1.0 - p) / (shots * n) as f64).sqrt();
    assert!((mean - p).abs() < 3.0 * sd);

    let big = swap_test(-overlap, 10_000_000, 3).unwrap();
    assert!((big.y_magnitude - overlap.abs()).abs() < 1e-3);
}

#[test]
fn ridge_limit_is_monotone_on_fixed_instance() {
    let d = dataset(5, 8, 2);
    let query = DVector::from_column_slice(&[0.2, -0.4]);
    let spec = EncodingSpec::coherent();
    let basis = feature_basis(&gram(&d, &spec).unwrap(), DEFAULT_RANK_TOLERANCE).unwrap();
    let t = build_training_state(&basis).unwrap();
    let qs = QueryState::new(&d.targets, &embed_query(query.as_slice(), &d, &spec, &basis).unwrap()).unwrap();
    let target = predict_overlap(&apply_transform(&t, &SpectrumTransform::ridge(0.1)).unwrap(), &qs).unwrap();
    let mut last = f64::INFINITY;
    for s in [1.0, 2.0, 4.0, 8.0, 16.0] {
        let p = predict_overlap(&apply_transform(&t, &SpectrumTransform::finite_squeeze(s, 0.1)).unwrap(), &qs).unwrap();
        let err = (p - target).abs();
        assert!(err < last, "s={s}");
        last = err;
    }
}
