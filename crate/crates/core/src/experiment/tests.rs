use super::*;
use crate::generator::simplex_centers;
use crate::rng::stream;
use approx::assert_abs_diff_eq;
use ndarray::Array2;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Text-book Spearman for tie-free data: `1 - 6 sum(d^2) / (n(n^2-1))`.
fn spearman_oracle_no_ties(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len();
    let rank = |vals: &[f64]| -> Vec<usize> {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        let mut r = vec![0usize; n];
        for (pos, &i) in order.iter().enumerate() {
            r[i] = pos;
        }
        r
    };
    let rx = rank(xs);
    let ry = rank(ys);
    let d2: f64 = rx
        .iter()
        .zip(ry.iter())
        .map(|(&a, &b)| {
            let d = a as f64 - b as f64;
            d * d
        })
        .sum();
    1.0 - 6.0 * d2 / (n as f64 * (n as f64 * n as f64 - 1.0))
}

#[test]
fn spearman_matches_oracle_on_all_permutations_of_five() {
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let mut perm = [0usize, 1, 2, 3, 4];
    // Heap's algorithm, iterative.
    let mut c = [0usize; 5];
    let check = |p: &[usize; 5]| {
        let ys: Vec<f64> = p.iter().map(|&i| (i + 1) as f64).collect();
        let got = spearman(&xs, &ys);
        let want = spearman_oracle_no_ties(&xs, &ys);
        assert_abs_diff_eq!(got, want, epsilon = 1e-12);
    };
    check(&perm);
    let mut i = 1;
    while i < 5 {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            check(&perm);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[test]
fn spearman_tie_handling() {
    // All tied on one side: defined as zero trend.
    assert_eq!(spearman(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0]), 0.0);
    // Average ranks: ys = [1, 2, 2] has ranks [1, 2.5, 2.5].
    let got = spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 2.0]);
    let rx = [1.0, 2.0, 3.0];
    let ry = [1.0, 2.5, 2.5];
    let mx = 2.0;
    let my = 2.0;
    let sxy: f64 = rx
        .iter()
        .zip(ry.iter())
        .map(|(a, b)| (a - mx) * (b - my))
        .sum();
    let sxx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
    assert_abs_diff_eq!(got, sxy / (sxx * syy).sqrt(), epsilon = 1e-12);
}

#[test]
fn split_is_deterministic_and_proportioned() {
    let a = split_indices(1000, (3.0, 1.0, 1.0), 5).unwrap();
    let b = split_indices(1000, (3.0, 1.0, 1.0), 5).unwrap();
    assert_eq!(a.train, b.train);
    assert_eq!(a.test, b.test);
    assert_eq!(a.train.len(), 600);
    assert_eq!(a.validation.len(), 200);
    assert_eq!(a.test.len(), 200);
    let mut all: Vec<u32> = a
        .train
        .iter()
        .chain(a.validation.iter())
        .chain(a.test.iter())
        .copied()
        .collect();
    all.sort_unstable();
    assert_eq!(all, (0..1000u32).collect::<Vec<_>>());
    assert_ne!(split_indices(1000, (3.0, 1.0, 1.0), 6).unwrap().train, a.train);
}

fn gaussian_blobs(n_per: usize, centers: &[Vec<f64>], sd: f64, seed: u64) -> (Array2<f64>, LabelVector) {
    let d = centers[0].len();
    let c = centers.len();
    let mut rng = stream(seed, &[9]);
    let mut x = Array2::<f64>::zeros((n_per * c, d));
    let mut labels = Vec::new();
    for (class, center) in centers.iter().enumerate() {
        for i in 0..n_per {
            let row = class * n_per + i;
            for k in 0..d {
                let z: f64 = StandardNormal.sample(&mut rng);
                x[[row, k]] = center[k] + sd * z;
            }
            labels.push(class as u32);
        }
    }
    (x, LabelVector::new(labels, c as u32).unwrap())
}

#[test]
fn classifier_separable_blobs_reach_full_accuracy() {
    let centers = simplex_centers(3, 4, 8.0);
    let (x, y) = gaussian_blobs(120, &centers, 0.05, 3);
    let split = split_indices(360, (3.0, 1.0, 1.0), 7).unwrap();
    let acc = train_proxy_classifier(&x, &y, &split, &ClassifierConfig::default()).unwrap();
    assert_abs_diff_eq!(acc, 1.0);
}

#[test]
fn classifier_chance_level_on_shuffled_labels() {
    let centers = simplex_centers(4, 6, 4.0);
    let (x, y) = gaussian_blobs(500, &centers, 0.1, 11);
    // Shuffle the labels so features carry no signal.
    let mut shuffled = y.labels().to_vec();
    let mut rng = stream(13, &[1]);
    use rand::seq::SliceRandom;
    shuffled.shuffle(&mut rng);
    let y_shuffled = LabelVector::new(shuffled, 4).unwrap();
    let split = split_indices(2000, (3.0, 1.0, 1.0), 17).unwrap();
    let acc = train_proxy_classifier(&x, &y_shuffled, &split, &ClassifierConfig::default()).unwrap();
    assert!((acc - 0.25).abs() < 0.05, "accuracy {acc} not chance level");
}

#[test]
fn classifier_deterministic() {
    let centers = simplex_centers(3, 4, 1.0);
    let (x, y) = gaussian_blobs(100, &centers, 0.5, 19);
    let split = split_indices(300, (3.0, 1.0, 1.0), 23).unwrap();
    let cfg = ClassifierConfig::default();
    let a = train_proxy_classifier(&x, &y, &split, &cfg).unwrap();
    let b = train_proxy_classifier(&x, &y, &split, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn classifier_rejects_degenerate_split() {
    let (x, _) = gaussian_blobs(5, &simplex_centers(2, 2, 1.0), 0.1, 29);
    let y = LabelVector::new(vec![0, 0, 0, 0, 0, 0, 0, 0, 0, 1], 2).unwrap();
    let split = Split {
        train: (0..8).collect(),
        validation: vec![8],
        test: vec![9],
    };
    assert!(matches!(
        train_proxy_classifier(&x, &y, &split, &ClassifierConfig::default()),
        Err(ExperimentError::DegenerateSplit(1))
    ));
}

fn small_spec(sweep: SweepVariable, grid: Vec<f64>) -> ExperimentSpec {
    let base = WorldParams {
        n: 400,
        average_degree: 15.0,
        num_clusters: 4,
        cluster_size_slope: 0.0,
        p_to_q_ratio: 3.0,
        feature_dim: 8,
        feature_center_distance: 0.5,
        feature_cluster_variance: 0.2,
        power_exponent: 2.0,
        theta_max: None,
        seed: 77,
    };
    let mut spec = ExperimentSpec::new(base, sweep, grid);
    spec.seeds_per_point = 2;
    spec.classifier.epochs = 200;
    spec
}

#[test]
fn experiment_runs_and_is_deterministic() {
    let spec = small_spec(SweepVariable::AverageDegree, vec![8.0, 16.0, 24.0]);
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a.summary_csv(), b.summary_csv());
    assert_eq!(a.cells_csv(), b.cells_csv());
    assert_eq!(a.points.len(), 3);
    assert_eq!(a.cells.len(), 6);
    for p in &a.points {
        assert!(p.accuracy_convolved_sd >= 0.0);
        assert!(p.measured_mean > 0.0);
    }
    assert!(a.spearman_convolved.abs() <= 1.0);
    let svg = a.chart_svg("average degree");
    assert!(svg.contains("<polyline"));
}

#[test]
fn raw_control_is_tied_across_points_by_common_random_numbers() {
    let spec = small_spec(SweepVariable::AverageDegree, vec![10.0, 20.0, 30.0]);
    let result = run_experiment(&spec).unwrap();
    // Feature and split streams ignore the grid point, so the raw-feature
    // accuracy must be bit-identical across points and Spearman exactly 0.
    for seed_index in 0..spec.seeds_per_point {
        let accs: Vec<f64> = result
            .cells
            .iter()
            .filter(|c| c.seed_index == seed_index)
            .map(|c| c.accuracy_raw)
            .collect();
        assert!(accs.windows(2).all(|w| w[0] == w[1]), "raw accs {accs:?}");
    }
    assert_eq!(result.spearman_raw, 0.0);
}

#[test]
fn measured_property_reverifies_against_regenerated_graph() {
    let spec = small_spec(SweepVariable::GiniDegree, vec![0.3]);
    let result = run_experiment(&spec).unwrap();
    let params = resolve_point(&spec, 0.3).unwrap();
    for cell in &result.cells {
        let structure_seed = derive_seed(
            spec.base.seed,
            &[STREAM_EXPERIMENT, 1, cell.point as u64, cell.seed_index as u64],
        );
        let feature_seed = derive_seed(
            spec.base.seed,
            &[STREAM_EXPERIMENT, 2, cell.seed_index as u64],
        );
        let sample = sample_world_with_seeds(&params, structure_seed, feature_seed).unwrap();
        let g = properties::gini_degree(&sample.graph, ProfileOptions::default()).unwrap();
        assert_abs_diff_eq!(g, cell.measured, epsilon = 1e-12);
    }
}

#[test]
fn chance_grid_rejects_empty() {
    let spec = small_spec(SweepVariable::AverageDegree, vec![]);
    assert!(run_experiment(&spec).is_err());
}

#[test]
fn random_spearman_inputs_stay_in_range() {
    let mut rng = stream(31, &[2]);
    for _ in 0..50 {
        let n = rng.random_range(2..12usize);
        let xs: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let ys: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let r = spearman(&xs, &ys);
        assert!((-1.0..=1.0).contains(&r));
    }
}
