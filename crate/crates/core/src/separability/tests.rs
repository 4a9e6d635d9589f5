use super::*;
use crate::generator::assign_classes;
use crate::rng::stream;
use approx::assert_abs_diff_eq;
use ndarray::array;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

fn build(n: usize, edges: &[(u32, u32, u32)]) -> Graph {
    Graph::build(n, false, edges.to_vec()).unwrap().graph
}

fn feats(rows: Vec<Vec<f64>>) -> FeatureMatrix {
    let d = rows[0].len();
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    FeatureMatrix::new(Array2::from_shape_vec((flat.len() / d, d), flat).unwrap()).unwrap()
}

#[test]
fn convolve_single_edge_averages() {
    let g = build(2, &[(0, 1, 1)]);
    let x = feats(vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    let cf = convolve(&g, &x).unwrap();
    assert_abs_diff_eq!(cf.values[[0, 0]], 0.5);
    assert_abs_diff_eq!(cf.values[[0, 1]], 0.5);
    assert_abs_diff_eq!(cf.values[[1, 0]], 0.5);
    assert_eq!(cf.augmented_degrees, vec![2, 2]);
}

#[test]
fn convolve_isolated_node_keeps_features() {
    let g = build(3, &[(0, 1, 1)]);
    let x = feats(vec![vec![1.0], vec![2.0], vec![7.0]]);
    let cf = convolve(&g, &x).unwrap();
    assert_abs_diff_eq!(cf.values[[2, 0]], 7.0);
}

#[test]
fn convolve_counts_multiplicities() {
    let g = build(2, &[(0, 1, 3)]);
    let x = feats(vec![vec![0.0], vec![4.0]]);
    let cf = convolve(&g, &x).unwrap();
    // (0 + 3*4) / (1 + 3)
    assert_abs_diff_eq!(cf.values[[0, 0]], 3.0);
}

/// Dense oracle: build A~ = A + I and D^-1 explicitly, multiply.
fn dense_convolve_oracle(g: &Graph, x: &FeatureMatrix) -> Array2<f64> {
    let n = g.n();
    let d = x.dim();
    let mut a = Array2::<f64>::zeros((n, n));
    for u in 0..n {
        a[[u, u]] = 1.0;
        for (v, w) in g.neighbors(u) {
            a[[u, v as usize]] += w as f64;
        }
    }
    let mut out = Array2::<f64>::zeros((n, d));
    for i in 0..n {
        let deg: f64 = a.row(i).sum();
        for k in 0..d {
            let mut acc = 0.0;
            for j in 0..n {
                acc += a[[i, j]] * x.values()[[j, k]];
            }
            out[[i, k]] = acc / deg;
        }
    }
    out
}

#[test]
fn convolve_matches_dense_oracle_on_random_graphs() {
    let mut rng = stream(71, &[1]);
    for _ in 0..20 {
        let n = rng.random_range(2..50usize);
        let d = rng.random_range(1..6usize);
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if rng.random::<f64>() < 0.15 {
                    edges.push((u, v, rng.random_range(1..4u32)));
                }
            }
        }
        let g = build(n, &edges);
        let x = FeatureMatrix::new(Array2::from_shape_fn((n, d), |_| {
            StandardNormal.sample(&mut rng)
        }))
        .unwrap();
        let cf = convolve(&g, &x).unwrap();
        let oracle = dense_convolve_oracle(&g, &x);
        for (a, b) in cf.values.iter().zip(oracle.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Row-stochastic convolution keeps every coordinate inside the convex
    /// hull of the input features.
    #[test]
    fn convolution_respects_convex_bounds(
        seed in 0u64..1000,
        n in 2usize..30,
    ) {
        let mut rng = stream(seed, &[2]);
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                if rng.random::<f64>() < 0.2 {
                    edges.push((u, v, rng.random_range(1..3u32)));
                }
            }
        }
        let g = build(n, &edges);
        let x = FeatureMatrix::new(Array2::from_shape_fn((n, 3), |_| {
            StandardNormal.sample(&mut rng)
        })).unwrap();
        let cf = convolve(&g, &x).unwrap();
        for k in 0..3 {
            let lo = (0..n).map(|i| x.values()[[i, k]]).fold(f64::INFINITY, f64::min);
            let hi = (0..n).map(|i| x.values()[[i, k]]).fold(f64::NEG_INFINITY, f64::max);
            for i in 0..n {
                prop_assert!(cf.values[[i, k]] >= lo - 1e-12);
                prop_assert!(cf.values[[i, k]] <= hi + 1e-12);
            }
        }
    }
}

#[test]
fn alpha_subgroup_thresholds() {
    let labels = LabelVector::new(vec![0, 1, 0, 1, 0], 2).unwrap();
    let theta = [0.2, 0.9, 1.4, 0.6, 2.0];

    let all = alpha_subgroup(&labels, NodeScores::Theta(&theta), 1e-12, 0.1, 0.05).unwrap();
    assert_eq!(all.len(), 5);

    let none = alpha_subgroup(&labels, NodeScores::Theta(&theta), 2.5, 0.1, 0.05).unwrap();
    assert!(none.is_empty());

    let some = alpha_subgroup(&labels, NodeScores::Theta(&theta), 0.8, 0.1, 0.05).unwrap();
    // Brute-force predicate scan.
    let expect0: Vec<u32> = (0..5u32)
        .filter(|&i| theta[i as usize] >= 0.8 && labels.label(i as usize) == 0)
        .collect();
    let expect1: Vec<u32> = (0..5u32)
        .filter(|&i| theta[i as usize] >= 0.8 && labels.label(i as usize) == 1)
        .collect();
    assert_eq!(some.class0, expect0);
    assert_eq!(some.class1, expect1);
    assert_eq!(some.mode, AlphaMode::Theta);

    // Degree mode uses the augmented-degree expectation threshold.
    let degrees = [1u64, 3, 9, 2, 6];
    let (p, q, alpha) = (0.1, 0.05, 1.0);
    let sub = alpha_subgroup(&labels, NodeScores::AugmentedDegrees(&degrees), alpha, p, q).unwrap();
    let thr = degree_threshold(5, p, q, alpha);
    let expect: Vec<u32> = (0..5u32)
        .filter(|&i| degrees[i as usize] as f64 >= thr)
        .collect();
    let got: Vec<u32> = sub.members().map(|(i, _)| i).collect();
    let mut got_sorted = got.clone();
    got_sorted.sort_unstable();
    assert_eq!(got_sorted, expect);
    assert_eq!(sub.mode, AlphaMode::Degree);
}

#[test]
fn midpoint_hyperplane_examples() {
    let (v, b) = midpoint_hyperplane(&[-1.0, 0.0], &[1.0, 0.0]).unwrap();
    assert_abs_diff_eq!(v[0], 1.0);
    assert_abs_diff_eq!(v[1], 0.0);
    assert_abs_diff_eq!(b, 0.0);

    let (v, b) = midpoint_hyperplane(&[0.0, 0.0], &[0.0, 2.0]).unwrap();
    assert_abs_diff_eq!(v[0], 0.0);
    assert_abs_diff_eq!(v[1], 1.0);
    assert_abs_diff_eq!(b, -1.0);

    assert!(matches!(
        midpoint_hyperplane(&[0.5, 0.5], &[0.5, 0.5]),
        Err(SepError::DegenerateHyperplane)
    ));
}

fn two_point_setup(x0: Vec<f64>, x1: Vec<f64>) -> (ConvolvedFeatures, AlphaSubgroup) {
    let d = x0.len();
    let flat: Vec<f64> = x0.into_iter().chain(x1).collect();
    let cf = ConvolvedFeatures {
        values: Array2::from_shape_vec((2, d), flat).unwrap(),
        augmented_degrees: vec![1, 1],
    };
    let sub = AlphaSubgroup {
        alpha: 0.0,
        mode: AlphaMode::Theta,
        class0: vec![0],
        class1: vec![1],
    };
    (cf, sub)
}

#[test]
fn fraction_examples_and_scale_invariance() {
    let (cf, sub) = two_point_setup(vec![-1.0, 0.0], vec![1.0, 0.0]);
    let v = array![1.0, 0.0];
    assert_abs_diff_eq!(separability_fraction(&cf, &sub, &v, 0.0).unwrap(), 1.0);

    // Mirrored onto the wrong sides.
    let (cf_bad, sub2) = two_point_setup(vec![1.0, 0.0], vec![-1.0, 0.0]);
    assert_abs_diff_eq!(
        separability_fraction(&cf_bad, &sub2, &v, 0.0).unwrap(),
        0.0
    );

    // Positive rescaling of (v, b) leaves the fraction unchanged.
    let (cf3, sub3) = two_point_setup(vec![-0.2, 0.4], vec![0.8, -0.1]);
    let v3 = array![0.6, 0.2];
    let b3 = -0.1;
    let f1 = separability_fraction(&cf3, &sub3, &v3, b3).unwrap();
    let f2 = separability_fraction(&cf3, &sub3, &(&v3 * 3.0), 3.0 * b3).unwrap();
    assert_abs_diff_eq!(f1, f2);
}

#[test]
fn fraction_matches_per_node_sign_oracle_on_dc_csbm() {
    let params = crate::generator::DcCsbmParams {
        n: 600,
        mu: vec![-0.5, 0.0, 0.0, 0.0],
        nu: vec![0.5, 0.0, 0.0, 0.0],
        p_intra: 0.06,
        q_inter: 0.02,
        theta: crate::generator::ThetaSpec::PowerLaw {
            exponent: 4.0,
            theta_max: None,
        },
        seed: 5,
    };
    let sample = crate::generator::sample_dc_csbm(&params).unwrap();
    let cf = convolve(&sample.graph, &sample.features).unwrap();
    let alpha = 2.0 / (600f64).ln();
    let sub = alpha_subgroup(
        &sample.labels,
        NodeScores::Theta(&sample.theta),
        alpha,
        params.p_intra,
        params.q_inter,
    )
    .unwrap();
    let (v, b) = midpoint_hyperplane(&params.mu, &params.nu).unwrap();
    let fraction = separability_fraction(&cf, &sub, &v, b).unwrap();

    let mut correct = 0usize;
    for (i, class) in sub.members() {
        let score = cf.values.row(i as usize).dot(&v) + b;
        if (class == 0 && score < 0.0) || (class == 1 && score > 0.0) {
            correct += 1;
        }
    }
    assert_abs_diff_eq!(fraction, correct as f64 / sub.len() as f64);
    // At these densities the subgroup should be mostly separated.
    assert!(fraction > 0.9, "fraction {fraction}");
}

#[test]
fn xor_points_are_not_separable() {
    let cf = ConvolvedFeatures {
        values: array![[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]],
        augmented_degrees: vec![1; 4],
    };
    let sub = AlphaSubgroup {
        alpha: 0.0,
        mode: AlphaMode::Theta,
        class0: vec![0, 1],
        class1: vec![2, 3],
    };
    match exact_separability(&cf, &sub).unwrap() {
        SeparabilityDecision::NotSeparable {
            certificate_norm, ..
        } => {
            assert!(certificate_norm <= 1e-9);
        }
        SeparabilityDecision::Separable { .. } => panic!("xor cannot be separable"),
    }
}

#[test]
fn singletons_are_separable() {
    let (cf, sub) = two_point_setup(vec![0.3, -0.2], vec![0.9, 1.1]);
    match exact_separability(&cf, &sub).unwrap() {
        SeparabilityDecision::Separable { v, b, margin } => {
            assert!(margin > 0.0);
            let f = separability_fraction(&cf, &sub, &v, b).unwrap();
            assert_abs_diff_eq!(f, 1.0);
        }
        SeparabilityDecision::NotSeparable { .. } => panic!("distinct singletons separate"),
    }
}

#[test]
fn planted_margin_sets_are_separable_with_witness() {
    let mut rng = stream(83, &[3]);
    for trial in 0..10 {
        let d = 4usize;
        let mut v_true: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm: f64 = v_true.iter().map(|x| x * x).sum::<f64>().sqrt();
        v_true.iter_mut().for_each(|x| *x /= norm);
        let b_true: f64 = rng.random_range(-0.5..0.5);
        let margin = 0.05;
        let mut rows = Vec::new();
        let mut class0 = Vec::new();
        let mut class1 = Vec::new();
        for i in 0..60u32 {
            loop {
                let x: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
                let score: f64 =
                    x.iter().zip(v_true.iter()).map(|(a, b)| a * b).sum::<f64>() + b_true;
                if score.abs() >= margin {
                    if score > 0.0 {
                        class1.push(i);
                    } else {
                        class0.push(i);
                    }
                    rows.push(x);
                    break;
                }
            }
        }
        if class0.is_empty() || class1.is_empty() {
            continue;
        }
        let cf = ConvolvedFeatures {
            values: Array2::from_shape_vec((60, d), rows.into_iter().flatten().collect())
                .unwrap(),
            augmented_degrees: vec![1; 60],
        };
        let sub = AlphaSubgroup {
            alpha: 0.0,
            mode: AlphaMode::Theta,
            class0,
            class1,
        };
        match exact_separability(&cf, &sub).unwrap() {
            SeparabilityDecision::Separable { v, b, margin } => {
                assert!(margin > 0.0, "trial {trial}: non-positive witness margin");
                assert_abs_diff_eq!(
                    separability_fraction(&cf, &sub, &v, b).unwrap(),
                    1.0
                );
            }
            SeparabilityDecision::NotSeparable { .. } => {
                panic!("trial {trial}: planted margin set declared non-separable")
            }
        }
    }
}

#[test]
fn subgroup_cap_is_enforced() {
    let n = 30usize;
    let cf = ConvolvedFeatures {
        values: Array2::zeros((n, 2)),
        augmented_degrees: vec![1; n],
    };
    let sub = AlphaSubgroup {
        alpha: 0.0,
        mode: AlphaMode::Theta,
        class0: (0..15u32).collect(),
        class1: (15..30u32).collect(),
    };
    assert!(matches!(
        exact_separability_with(&cf, &sub, 10, 1e-9),
        Err(SepError::CapExceeded { size: 30, cap: 10 })
    ));
}

#[test]
fn concentration_symmetric_rates_when_p_equals_q() {
    let n = 4000usize;
    let labels = assign_classes(n, 9);
    let theta = vec![1.0; n];
    let rate = 0.01;
    let (graph, _) = sample_dc_csbm_edges(&labels, &theta, rate, rate, 77).unwrap();
    let report =
        concentration_report(&graph, &labels, &theta, rate, rate, 0.5, 0.05, None).unwrap();
    assert_eq!(report.checked_nodes, n);
    assert!(report.class_sizes_ok);
    // Both neighbor fractions concentrate near 1/2, and the delta' band at
    // these densities is generous.
    assert!(report.intra_violation_rate < 0.05);
    assert!(report.inter_violation_rate < 0.05);
    assert!(report.degree_violation_rate < 0.05);
}

#[test]
fn concentration_empty_above_max_theta() {
    let n = 200usize;
    let labels = assign_classes(n, 10);
    let theta = vec![1.0; n];
    let (graph, _) = sample_dc_csbm_edges(&labels, &theta, 0.05, 0.02, 78).unwrap();
    let report =
        concentration_report(&graph, &labels, &theta, 0.05, 0.02, 5.0, 0.05, None).unwrap();
    assert_eq!(report.checked_nodes, 0);
    assert_eq!(report.degree_violation_rate, 0.0);
}

#[test]
fn low_alpha_admits_worse_concentrating_nodes() {
    // Heavy-tailed theta puts mass below the 1/ln(n) floor; with a shared
    // delta' band, widening the subgroup below the floor can only add nodes
    // whose degrees concentrate worse.
    let n = 3000usize;
    let labels = assign_classes(n, 11);
    let theta = sample_theta_powerlaw(n, &labels, 2.0, None, 11).unwrap();
    let ln_n = (n as f64).ln();
    let rate_sum = 0.3 * ln_n.powi(3) / n as f64;
    let (p, q) = (0.75 * rate_sum, 0.25 * rate_sum);
    let alpha_low = 0.25 / ln_n;
    let alpha_high = 2.0 / ln_n;
    let shared_delta = ((alpha_high * ln_n) as f64).powf(-0.45);
    let mut low_sum = 0.0;
    let mut high_sum = 0.0;
    for s in 0..5u64 {
        let (graph, _) = sample_dc_csbm_edges(&labels, &theta, p, q, 200 + s).unwrap();
        let low = concentration_report(
            &graph, &labels, &theta, p, q, alpha_low, 0.05, Some(shared_delta),
        )
        .unwrap();
        let high = concentration_report(
            &graph, &labels, &theta, p, q, alpha_high, 0.05, Some(shared_delta),
        )
        .unwrap();
        assert!(low.checked_nodes > high.checked_nodes);
        low_sum += low.degree_violation_rate;
        high_sum += high.degree_violation_rate;
    }
    assert!(
        low_sum > high_sum,
        "low-alpha violation {low_sum} should exceed high-alpha {high_sum}"
    );
}

#[test]
fn sweep_smoke_and_control() {
    let cfg = SweepConfig {
        d_grid: vec![8, 16],
        seeds: 5,
        seed: 12,
        ..SweepConfig::default()
    };
    let result = theorem1_sweep(&cfg).unwrap();
    assert_eq!(result.rows.len(), 10);
    assert_eq!(result.medians.len(), 2);
    for (_, f) in &result.medians {
        assert!(*f > 0.5, "signal sweep should beat chance: {f}");
    }
    let csv = result.to_csv();
    assert!(csv.starts_with("d,n,alpha,seed,fraction"));
    assert_eq!(csv.lines().count(), 11);

    let control_cfg = SweepConfig {
        control: true,
        ..cfg
    };
    let control = theorem1_sweep(&control_cfg).unwrap();
    let mean: f64 =
        control.rows.iter().map(|r| r.fraction).sum::<f64>() / control.rows.len() as f64;
    assert!((mean - 0.5).abs() < 0.25, "control mean {mean}");
}

#[test]
fn sweep_determinism() {
    let cfg = SweepConfig {
        d_grid: vec![8],
        seeds: 3,
        seed: 99,
        ..SweepConfig::default()
    };
    let a = theorem1_sweep(&cfg).unwrap();
    let b = theorem1_sweep(&cfg).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}
