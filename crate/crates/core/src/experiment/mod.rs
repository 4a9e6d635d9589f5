//! Controlled parameter sweeps with a linear proxy classifier.
//!
//! For each grid point the sweep generates graphs (calibrating the power-law
//! exponent when the swept property is Gini-Degree), convolves the features,
//! trains a multinomial logistic classifier on the convolved features plus a
//! raw-feature control, and reports the Spearman rank correlation between
//! mean accuracy and the measured property across points.
//!
//! Randomness is split into three streams: graph structure varies with both
//! the grid point and the seed index, while features and splits vary with
//! the seed index only. Points therefore share feature and split randomness
//! (common random numbers), which removes spurious trends from the
//! raw-feature control: its accuracy is bit-identical across points.

use crate::generator::{calibrate_gini, sample_world_with_seeds, GenError, WorldParams};
use crate::graph::LabelVector;
use crate::properties::{self, ProfileOptions, PropertyError};
use crate::rng::{derive_seed, stream, STREAM_EXPERIMENT, STREAM_SPLIT};
use crate::separability::{convolve, SepError};
use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("generator: {0}")]
    Gen(#[from] GenError),
    #[error("separability: {0}")]
    Sep(#[from] SepError),
    #[error("property: {0}")]
    Property(#[from] PropertyError),
    #[error("degenerate split: class {0} missing from the training set")]
    DegenerateSplit(u32),
    #[error("{0}")]
    Invalid(String),
}

/// Which generator knob the sweep varies (and which property it reports).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Grid of target Gini values; the exponent is calibrated per point.
    GiniDegree,
    AverageDegree,
    /// Grid of p/q ratios; reports measured edge homogeneity.
    EdgeHomogeneity,
    /// Grid of feature cluster variances; reports in-feature similarity.
    FeatureClusterVariance,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub epochs: usize,
    pub step: f64,
    pub l2: f64,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig {
            epochs: 500,
            step: 0.1,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub base: WorldParams,
    pub sweep: SweepVariable,
    pub grid: Vec<f64>,
    pub seeds_per_point: usize,
    /// train : validation : test proportions (default 3:1:1).
    pub split: (f64, f64, f64),
    pub classifier: ClassifierConfig,
    /// Gini calibration tolerance.
    pub calibrate_tol: f64,
    /// Subgroup threshold coefficient: alpha = alpha_coeff / ln n.
    pub alpha_coeff: f64,
}

impl ExperimentSpec {
    pub fn new(base: WorldParams, sweep: SweepVariable, grid: Vec<f64>) -> Self {
        ExperimentSpec {
            base,
            sweep,
            grid,
            seeds_per_point: 5,
            split: (3.0, 1.0, 1.0),
            classifier: ClassifierConfig::default(),
            calibrate_tol: 0.02,
            alpha_coeff: 2.0,
        }
    }
}

/// Node index split.
#[derive(Debug, Clone)]
pub struct Split {
    pub train: Vec<u32>,
    pub validation: Vec<u32>,
    pub test: Vec<u32>,
}

/// Shuffle nodes and cut by the given proportions.
pub fn split_indices(n: usize, ratios: (f64, f64, f64), seed: u64) -> Result<Split, ExperimentError> {
    let total = ratios.0 + ratios.1 + ratios.2;
    if total.is_nan() || ratios.0 <= 0.0 || ratios.1 < 0.0 || ratios.2 <= 0.0 {
        return Err(ExperimentError::Invalid(
            "split ratios must be positive (validation may be zero)".into(),
        ));
    }
    let mut order: Vec<u32> = (0..n as u32).collect();
    let mut rng = stream(seed, &[STREAM_SPLIT]);
    order.shuffle(&mut rng);
    let n_train = ((n as f64) * ratios.0 / total).floor() as usize;
    let n_val = ((n as f64) * ratios.1 / total).floor() as usize;
    let train = order[..n_train].to_vec();
    let validation = order[n_train..n_train + n_val].to_vec();
    let test = order[n_train + n_val..].to_vec();
    if train.is_empty() || test.is_empty() {
        return Err(ExperimentError::Invalid(
            "split produced an empty train or test set".into(),
        ));
    }
    Ok(Split {
        train,
        validation,
        test,
    })
}

/// Train a multinomial logistic classifier (full-batch gradient descent,
/// fixed budget, bias column, train-fitted feature standardization) and
/// return test accuracy. Deterministic given inputs.
pub fn train_proxy_classifier(
    features: &Array2<f64>,
    labels: &LabelVector,
    split: &Split,
    cfg: &ClassifierConfig,
) -> Result<f64, ExperimentError> {
    let n = features.nrows();
    let d = features.ncols();
    if labels.len() != n {
        return Err(ExperimentError::Invalid(
            "labels and features disagree on n".into(),
        ));
    }
    let c = labels.num_classes() as usize;
    if c < 2 {
        return Err(ExperimentError::Invalid("need at least 2 classes".into()));
    }
    let mut present = vec![false; c];
    for &i in &split.train {
        present[labels.label(i as usize) as usize] = true;
    }
    if let Some(missing) = present.iter().position(|&p| !p) {
        return Err(ExperimentError::DegenerateSplit(missing as u32));
    }

    // Standardize on the training rows.
    let mut mean = vec![0.0f64; d];
    let mut sd = vec![0.0f64; d];
    for &i in &split.train {
        for k in 0..d {
            mean[k] += features[[i as usize, k]];
        }
    }
    let nt = split.train.len() as f64;
    for m in mean.iter_mut() {
        *m /= nt;
    }
    for &i in &split.train {
        for k in 0..d {
            let v = features[[i as usize, k]] - mean[k];
            sd[k] += v * v;
        }
    }
    for s in sd.iter_mut() {
        *s = (*s / nt).sqrt();
        if *s <= 0.0 {
            *s = 1.0;
        }
    }
    let standardized = |i: usize, k: usize| (features[[i, k]] - mean[k]) / sd[k];

    let n_tr = split.train.len();
    let mut x_tr = Array2::<f64>::zeros((n_tr, d + 1));
    for (row, &i) in split.train.iter().enumerate() {
        for k in 0..d {
            x_tr[[row, k]] = standardized(i as usize, k);
        }
        x_tr[[row, d]] = 1.0;
    }
    let mut w = Array2::<f64>::zeros((d + 1, c));
    let inv_nt = 1.0 / n_tr as f64;
    for _ in 0..cfg.epochs {
        let logits = x_tr.dot(&w);
        // Stable softmax minus one-hot, scaled by 1/n_tr.
        let mut resid = Array2::<f64>::zeros((n_tr, c));
        for row in 0..n_tr {
            let mut mx = f64::NEG_INFINITY;
            for j in 0..c {
                mx = mx.max(logits[[row, j]]);
            }
            let mut z = 0.0;
            for j in 0..c {
                z += (logits[[row, j]] - mx).exp();
            }
            for j in 0..c {
                resid[[row, j]] = (logits[[row, j]] - mx).exp() / z * inv_nt;
            }
            let y = labels.label(split.train[row] as usize) as usize;
            resid[[row, y]] -= inv_nt;
        }
        let mut grad = x_tr.t().dot(&resid);
        // L2 on everything but the bias row.
        for k in 0..d {
            for j in 0..c {
                grad[[k, j]] += cfg.l2 * w[[k, j]];
            }
        }
        w = &w - &(&grad * cfg.step);
    }

    let mut correct = 0usize;
    for &i in &split.test {
        let mut scores = Array1::<f64>::zeros(c);
        for j in 0..c {
            let mut s = w[[d, j]];
            for k in 0..d {
                s += standardized(i as usize, k) * w[[k, j]];
            }
            scores[j] = s;
        }
        let mut best = 0usize;
        for j in 1..c {
            if scores[j] > scores[best] {
                best = j;
            }
        }
        if best as u32 == labels.label(i as usize) {
            correct += 1;
        }
    }
    Ok(correct as f64 / split.test.len() as f64)
}

/// Spearman rank correlation with average ranks for ties; 0 when either
/// side is constant.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = xs.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (a, b) in rx.iter().zip(ry.iter()) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return 0.0;
    }
    sxy / (sxx * syy).sqrt()
}

fn average_ranks(vals: &[f64]) -> Vec<f64> {
    let n = vals.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && vals[order[j + 1]] == vals[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// One generated-and-trained cell.
#[derive(Debug, Clone, Serialize)]
pub struct CellRow {
    pub point: usize,
    pub target: f64,
    pub seed_index: usize,
    pub measured: f64,
    pub accuracy_convolved: f64,
    pub accuracy_raw: f64,
    pub n: usize,
    pub m: u64,
    pub subgroup_size: usize,
}

/// Aggregates for one grid point.
#[derive(Debug, Clone, Serialize)]
pub struct PointSummary {
    pub point: usize,
    pub target: f64,
    pub power_exponent: f64,
    pub measured_mean: f64,
    pub accuracy_convolved_mean: f64,
    pub accuracy_convolved_sd: f64,
    pub accuracy_raw_mean: f64,
    pub accuracy_raw_sd: f64,
    pub subgroup_size_mean: f64,
    pub m_mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TrendResult {
    pub sweep: SweepVariable,
    pub points: Vec<PointSummary>,
    pub cells: Vec<CellRow>,
    /// Spearman of convolved accuracy means vs measured property.
    pub spearman_convolved: f64,
    /// Spearman of the raw-feature control vs measured property.
    pub spearman_raw: f64,
}

impl TrendResult {
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(
            "point,target,power_exponent,measured,acc_convolved_mean,acc_convolved_sd,acc_raw_mean,acc_raw_sd,subgroup_size_mean,m_mean\n",
        );
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                p.point,
                p.target,
                p.power_exponent,
                p.measured_mean,
                p.accuracy_convolved_mean,
                p.accuracy_convolved_sd,
                p.accuracy_raw_mean,
                p.accuracy_raw_sd,
                p.subgroup_size_mean,
                p.m_mean
            ));
        }
        out.push_str(&format!(
            "# spearman_convolved,{}\n# spearman_raw,{}\n",
            self.spearman_convolved, self.spearman_raw
        ));
        out
    }

    pub fn cells_csv(&self) -> String {
        let mut out = String::from(
            "point,target,seed,measured,acc_convolved,acc_raw,n,m,subgroup_size\n",
        );
        for c in &self.cells {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                c.point,
                c.target,
                c.seed_index,
                c.measured,
                c.accuracy_convolved,
                c.accuracy_raw,
                c.n,
                c.m,
                c.subgroup_size
            ));
        }
        out
    }

    pub fn chart_svg(&self, x_label: &str) -> String {
        let conv: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| (p.measured_mean, p.accuracy_convolved_mean))
            .collect();
        let raw: Vec<(f64, f64)> = self
            .points
            .iter()
            .map(|p| (p.measured_mean, p.accuracy_raw_mean))
            .collect();
        crate::chart::line_chart_svg(
            "proxy accuracy vs measured property",
            x_label,
            "test accuracy",
            &[
                crate::chart::Series {
                    label: "convolved",
                    points: &conv,
                },
                crate::chart::Series {
                    label: "raw control",
                    points: &raw,
                },
            ],
            &self.summary_csv(),
        )
    }
}

/// Resolve the generator parameters for one grid point.
pub fn resolve_point(
    spec: &ExperimentSpec,
    target: f64,
) -> Result<WorldParams, ExperimentError> {
    let mut params = spec.base.clone();
    match spec.sweep {
        SweepVariable::GiniDegree => {
            let calibrated = calibrate_gini(&params, target, spec.calibrate_tol, 5)?;
            params = calibrated.params;
        }
        SweepVariable::AverageDegree => params.average_degree = target,
        SweepVariable::EdgeHomogeneity => params.p_to_q_ratio = target,
        SweepVariable::FeatureClusterVariance => params.feature_cluster_variance = target,
    }
    Ok(params)
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<TrendResult, ExperimentError> {
    if spec.grid.is_empty() || spec.seeds_per_point == 0 {
        return Err(ExperimentError::Invalid("empty experiment grid".into()));
    }
    let master = spec.base.seed;
    // Calibration is sequential per point; generation and training fan out.
    let mut resolved = Vec::with_capacity(spec.grid.len());
    for &target in &spec.grid {
        resolved.push(resolve_point(spec, target)?);
    }
    let mut cells_in = Vec::new();
    for (point, params) in resolved.iter().enumerate() {
        for seed_index in 0..spec.seeds_per_point {
            cells_in.push((point, params.clone(), seed_index));
        }
    }
    let cell_results: Vec<Result<CellRow, ExperimentError>> = cells_in
        .par_iter()
        .map(|(point, params, seed_index)| {
            run_cell(spec, master, *point, params, *seed_index)
        })
        .collect();
    let mut cells = Vec::with_capacity(cell_results.len());
    for c in cell_results {
        cells.push(c?);
    }

    let mut points = Vec::with_capacity(spec.grid.len());
    for (point, params) in resolved.iter().enumerate() {
        let rows: Vec<&CellRow> = cells.iter().filter(|c| c.point == point).collect();
        let k = rows.len() as f64;
        let mean = |f: &dyn Fn(&CellRow) -> f64| rows.iter().map(|r| f(r)).sum::<f64>() / k;
        let measured_mean = mean(&|r| r.measured);
        let conv_mean = mean(&|r| r.accuracy_convolved);
        let raw_mean = mean(&|r| r.accuracy_raw);
        let sd = |f: &dyn Fn(&CellRow) -> f64, m: f64| {
            if rows.len() < 2 {
                0.0
            } else {
                (rows.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (k - 1.0)).sqrt()
            }
        };
        points.push(PointSummary {
            point,
            target: spec.grid[point],
            power_exponent: params.power_exponent,
            measured_mean,
            accuracy_convolved_mean: conv_mean,
            accuracy_convolved_sd: sd(&|r| r.accuracy_convolved, conv_mean),
            accuracy_raw_mean: raw_mean,
            accuracy_raw_sd: sd(&|r| r.accuracy_raw, raw_mean),
            subgroup_size_mean: mean(&|r| r.subgroup_size as f64),
            m_mean: mean(&|r| r.m as f64),
        });
    }
    let measured: Vec<f64> = points.iter().map(|p| p.measured_mean).collect();
    let acc_conv: Vec<f64> = points.iter().map(|p| p.accuracy_convolved_mean).collect();
    let acc_raw: Vec<f64> = points.iter().map(|p| p.accuracy_raw_mean).collect();
    Ok(TrendResult {
        sweep: spec.sweep,
        points,
        cells,
        spearman_convolved: spearman(&measured, &acc_conv),
        spearman_raw: spearman(&measured, &acc_raw),
    })
}

fn run_cell(
    spec: &ExperimentSpec,
    master: u64,
    point: usize,
    params: &WorldParams,
    seed_index: usize,
) -> Result<CellRow, ExperimentError> {
    let structure_seed = derive_seed(
        master,
        &[STREAM_EXPERIMENT, 1, point as u64, seed_index as u64],
    );
    // Feature and split streams are shared across grid points on purpose.
    let feature_seed = derive_seed(master, &[STREAM_EXPERIMENT, 2, seed_index as u64]);
    let split_seed = derive_seed(master, &[STREAM_EXPERIMENT, 3, seed_index as u64]);

    let sample = sample_world_with_seeds(params, structure_seed, feature_seed)?;
    let cf = convolve(&sample.graph, &sample.features)?;
    let split = split_indices(params.n, spec.split, split_seed)?;
    let acc_conv = train_proxy_classifier(&cf.values, &sample.labels, &split, &spec.classifier)?;
    let acc_raw =
        train_proxy_classifier(sample.features.values(), &sample.labels, &split, &spec.classifier)?;

    let opts = ProfileOptions::default();
    let measured = match spec.sweep {
        SweepVariable::GiniDegree => properties::gini_degree(&sample.graph, opts)?,
        SweepVariable::AverageDegree => properties::average_degree(&sample.graph, opts)?,
        SweepVariable::EdgeHomogeneity => {
            properties::edge_homogeneity(&sample.graph, &sample.labels)?
        }
        SweepVariable::FeatureClusterVariance => {
            let sims =
                properties::feature_similarities(&sample.graph, &sample.features, &sample.labels)?;
            sims.in_sim.ok_or_else(|| {
                ExperimentError::Invalid("no same-label edges for in-feature similarity".into())
            })?
        }
    };

    // Degree-mode subgroup size at a threshold held fixed across the sweep:
    // expected augmented degree 1 + average_degree * alpha.
    let alpha = spec.alpha_coeff / (params.n as f64).ln();
    let threshold = 1.0 + spec.base.average_degree * alpha;
    let subgroup_size = cf
        .augmented_degrees
        .iter()
        .filter(|&&d| d as f64 >= threshold)
        .count();

    Ok(CellRow {
        point,
        target: spec.grid[point],
        seed_index,
        measured,
        accuracy_convolved: acc_conv,
        accuracy_raw: acc_raw,
        n: params.n,
        m: sample.graph.m(),
        subgroup_size,
    })
}

#[cfg(test)]
mod tests;
