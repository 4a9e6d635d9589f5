//! Synthetic graph samplers with controlled degree-distribution imbalance.
//!
//! Two generators share one edge-sampling core:
//!
//! - [`sample_dc_csbm`]: two-class degree-corrected contextual SBM. Class
//!   assignments are Bernoulli(1/2), edge counts between node pairs are
//!   Poisson with intensity `theta_i * theta_j * p` (intra) or `* q` (inter),
//!   features are class-conditional Gaussians with covariance `I/d`.
//! - [`sample_world`]: k-cluster degree-corrected SBM with cluster sizes on a
//!   linear ramp, intensities solved from a target average degree and
//!   intra/inter ratio, and Gaussian features around simplex-placed centers.
//!
//! Edges are drawn in two phases: one Poisson draw for the total count of a
//! class block, then endpoints proportional to theta within the block. This
//! is distribution-identical to independent per-pair Poisson draws and costs
//! `O(edges log n)` instead of `O(n^2)`.
//!
//! Degree corrections are renormalized so each class's thetas sum to the
//! class size, which pins the expected degree scale.

use crate::graph::{FeatureMatrix, Graph, GraphError, LabelVector};
use crate::properties::{gini_degree, ProfileOptions};
use crate::rng::{
    derive_seed, stream, STREAM_CALIBRATE, STREAM_CLASSES, STREAM_EDGES, STREAM_FEATURES,
    STREAM_THETA,
};
use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Pareto, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("theta renormalization did not settle after {0} rounds")]
    ThetaRenormalization(usize),
    #[error("graph construction failed: {0}")]
    Graph(#[from] GraphError),
    #[error("calibration target {target} outside achievable Gini range [{low:.4}, {high:.4}]")]
    CalibrationOutOfRange { target: f64, low: f64, high: f64 },
    #[error("calibration did not reach tolerance {tol} in {iters} iterations (best {best:.4})")]
    CalibrationStalled { tol: f64, iters: usize, best: f64 },
    #[error("infeasible: average degree {avg} must be positive and below n = {n}")]
    InfeasibleDegree { avg: f64, n: usize },
}

/// How degree-correction factors are produced.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ThetaSpec {
    /// All ones (plain contextual SBM).
    Uniform,
    /// Pareto draws with the given shape, clamped to `(0, theta_max]` and
    /// renormalized per class. `theta_max` defaults to `n`.
    PowerLaw {
        exponent: f64,
        #[serde(default)]
        theta_max: Option<f64>,
    },
    /// Caller-provided factors; renormalized per class.
    Explicit(Vec<f64>),
}

/// Parameters of the two-class degree-corrected contextual SBM.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DcCsbmParams {
    pub n: usize,
    pub mu: Vec<f64>,
    pub nu: Vec<f64>,
    pub p_intra: f64,
    pub q_inter: f64,
    pub theta: ThetaSpec,
    pub seed: u64,
}

impl DcCsbmParams {
    fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::InvalidParam("n must be positive".into()));
        }
        if self.mu.len() != self.nu.len() || self.mu.is_empty() {
            return Err(GenError::InvalidParam(
                "mu and nu must be non-empty vectors of equal dimension".into(),
            ));
        }
        for (name, v) in [("mu", &self.mu), ("nu", &self.nu)] {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1.0 + 1e-9 {
                return Err(GenError::InvalidParam(format!(
                    "||{name}||_2 = {norm} exceeds 1"
                )));
            }
        }
        for (name, v) in [("p_intra", self.p_intra), ("q_inter", self.q_inter)] {
            if !(v > 0.0 && v < 1.0) {
                return Err(GenError::InvalidParam(format!(
                    "{name} = {v} must lie in (0, 1)"
                )));
            }
        }
        Ok(())
    }
}

/// Draw two-class Bernoulli(1/2) assignments, deterministic per seed.
pub fn assign_classes(n: usize, seed: u64) -> LabelVector {
    let mut rng = stream(seed, &[STREAM_CLASSES]);
    let labels: Vec<u32> = (0..n).map(|_| u32::from(rng.random::<bool>())).collect();
    LabelVector::new(labels, 2).expect("two-class labels")
}

/// Renormalize theta so each class sums to its size. Values are clamped to
/// `(0, theta_max]`; the hard domain bound is `n`. Pinned values stay at the
/// clamp while the rest rescale, iterating until no new pins appear.
pub fn renormalize_theta(
    theta: &mut [f64],
    labels: &LabelVector,
    theta_max: f64,
) -> Result<(), GenError> {
    let n = theta.len();
    if labels.len() != n {
        return Err(GenError::InvalidParam(
            "theta and labels lengths differ".into(),
        ));
    }
    let bound = theta_max.min(n as f64);
    if bound <= 0.0 {
        return Err(GenError::InvalidParam("theta_max must be positive".into()));
    }
    if theta.iter().any(|&t| t <= 0.0 || t.is_nan() || t.is_infinite()) {
        return Err(GenError::InvalidParam(
            "theta entries must be positive and finite".into(),
        ));
    }
    for t in theta.iter_mut() {
        *t = t.min(bound);
    }
    let classes = labels.num_classes() as usize;
    let sizes = labels.class_sizes();
    let mut pinned = vec![false; n];
    for round in 0..100 {
        let mut changed = false;
        for (k, &size) in sizes.iter().enumerate().take(classes) {
            let mut pinned_sum = 0.0;
            let mut free_sum = 0.0;
            for i in 0..n {
                if labels.label(i) as usize != k {
                    continue;
                }
                if pinned[i] {
                    pinned_sum += theta[i];
                } else {
                    free_sum += theta[i];
                }
            }
            let target = size as f64 - pinned_sum;
            if free_sum == 0.0 {
                if target.abs() > 1e-9 * size.max(1) as f64 {
                    return Err(GenError::ThetaRenormalization(round));
                }
                continue;
            }
            if target <= 0.0 {
                return Err(GenError::ThetaRenormalization(round));
            }
            let scale = target / free_sum;
            for i in 0..n {
                if labels.label(i) as usize == k && !pinned[i] {
                    theta[i] *= scale;
                    if theta[i] > bound {
                        theta[i] = bound;
                        pinned[i] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Ok(());
        }
    }
    Err(GenError::ThetaRenormalization(100))
}

/// Sample degree corrections from a power law with density exponent
/// `exponent` (`p(theta) ~ theta^-exponent` for `theta >= 1`, i.e. Pareto
/// tail shape `exponent - 1`), clamped to `(0, theta_max]` and renormalized
/// per class. Larger exponents give flatter theta and lower Gini-Degree;
/// exponents near 1 concentrate degree mass on a few hubs.
pub fn sample_theta_powerlaw(
    n: usize,
    labels: &LabelVector,
    exponent: f64,
    theta_max: Option<f64>,
    seed: u64,
) -> Result<Vec<f64>, GenError> {
    if exponent <= 1.0 {
        return Err(GenError::InvalidParam(format!(
            "power-law exponent {exponent} must exceed 1"
        )));
    }
    let bound = theta_max.unwrap_or(n as f64).min(n as f64);
    let pareto = Pareto::new(1.0, exponent - 1.0)
        .map_err(|e| GenError::InvalidParam(format!("pareto: {e}")))?;
    let mut rng = stream(seed, &[STREAM_THETA]);
    // Clamp at draw time: shapes below one produce occasional enormous values.
    let mut theta: Vec<f64> = (0..n)
        .map(|_| pareto.sample(&mut rng).min(bound))
        .collect();
    renormalize_theta(&mut theta, labels, bound)?;
    Ok(theta)
}

/// Per-class member lists with theta prefix sums for weighted sampling.
struct BlockIndex {
    members: Vec<Vec<u32>>,
    prefix: Vec<Vec<f64>>,
    sums: Vec<f64>,
    sums_sq: Vec<f64>,
    top_theta: Vec<[f64; 2]>,
}

impl BlockIndex {
    fn new(labels: &LabelVector, theta: &[f64]) -> Self {
        let k = labels.num_classes() as usize;
        let mut members: Vec<Vec<u32>> = vec![Vec::new(); k];
        for (i, &l) in labels.labels().iter().enumerate() {
            members[l as usize].push(i as u32);
        }
        let mut prefix = Vec::with_capacity(k);
        let mut sums = Vec::with_capacity(k);
        let mut sums_sq = Vec::with_capacity(k);
        let mut top_theta = Vec::with_capacity(k);
        for group in &members {
            let mut acc = 0.0;
            let mut acc_sq = 0.0;
            let mut top = [0.0f64; 2];
            let mut pf = Vec::with_capacity(group.len());
            for &i in group {
                let t = theta[i as usize];
                acc += t;
                acc_sq += t * t;
                if t > top[0] {
                    top[1] = top[0];
                    top[0] = t;
                } else if t > top[1] {
                    top[1] = t;
                }
                pf.push(acc);
            }
            prefix.push(pf);
            sums.push(acc);
            sums_sq.push(acc_sq);
            top_theta.push(top);
        }
        BlockIndex {
            members,
            prefix,
            sums,
            sums_sq,
            top_theta,
        }
    }

    fn draw(&self, class: usize, rng: &mut ChaCha12Rng) -> u32 {
        let total = self.sums[class];
        let target: f64 = rng.random::<f64>() * total;
        let pf = &self.prefix[class];
        let pos = pf.partition_point(|&acc| acc <= target).min(pf.len() - 1);
        self.members[class][pos]
    }

    /// Largest per-pair theta product inside a block.
    fn peak_pair(&self, a: usize, b: usize) -> f64 {
        if a == b {
            self.top_theta[a][0] * self.top_theta[a][1]
        } else {
            self.top_theta[a][0] * self.top_theta[b][0]
        }
    }
}

/// Poisson edge sampling over class blocks: one count draw per block, then
/// endpoints proportional to theta. Returns `(u, v, 1)` triples (duplicates
/// become multiplicities downstream).
fn sample_block_edges(
    index: &BlockIndex,
    rates: &dyn Fn(usize, usize) -> f64,
    rng: &mut ChaCha12Rng,
) -> Result<Vec<(u32, u32, u32)>, GenError> {
    let k = index.members.len();
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a..k {
            let rate = rates(a, b);
            let lambda = if a == b {
                rate * 0.5 * (index.sums[a] * index.sums[a] - index.sums_sq[a]).max(0.0)
            } else {
                rate * index.sums[a] * index.sums[b]
            };
            if lambda <= 0.0 {
                continue;
            }
            let count = Poisson::new(lambda)
                .map_err(|e| GenError::InvalidParam(format!("poisson: {e}")))?
                .sample(rng) as u64;
            edges.reserve(count as usize);
            for _ in 0..count {
                let mut tries = 0usize;
                let (u, v) = loop {
                    let u = index.draw(a, rng);
                    let v = index.draw(b, rng);
                    if a != b || u != v {
                        break (u, v);
                    }
                    tries += 1;
                    if tries > 10_000 {
                        return Err(GenError::InvalidParam(
                            "degenerate theta: endpoint rejection did not terminate".into(),
                        ));
                    }
                };
                edges.push((u, v, 1));
            }
        }
    }
    Ok(edges)
}

/// One DC-CSBM draw plus the resolved degree corrections and the largest
/// per-pair Poisson intensity (above ~30 the sparse-regime reading breaks).
#[derive(Debug, Clone)]
pub struct DcCsbmSample {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: LabelVector,
    pub theta: Vec<f64>,
    pub max_edge_intensity: f64,
}

pub fn sample_dc_csbm(params: &DcCsbmParams) -> Result<DcCsbmSample, GenError> {
    params.validate()?;
    let labels = assign_classes(params.n, params.seed);
    let theta = resolve_theta(&params.theta, &labels, params.seed)?;
    let (graph, max_edge_intensity) = sample_dc_csbm_edges(
        &labels,
        &theta,
        params.p_intra,
        params.q_inter,
        derive_seed(params.seed, &[STREAM_EDGES]),
    )?;
    let features = sample_class_gaussians(
        &labels,
        &[params.mu.clone(), params.nu.clone()],
        1.0 / params.mu.len() as f64,
        derive_seed(params.seed, &[STREAM_FEATURES]),
    )?;
    Ok(DcCsbmSample {
        graph,
        features,
        labels,
        theta,
        max_edge_intensity,
    })
}

fn resolve_theta(spec: &ThetaSpec, labels: &LabelVector, seed: u64) -> Result<Vec<f64>, GenError> {
    let n = labels.len();
    match spec {
        ThetaSpec::Uniform => Ok(vec![1.0; n]),
        ThetaSpec::PowerLaw {
            exponent,
            theta_max,
        } => sample_theta_powerlaw(n, labels, *exponent, *theta_max, seed),
        ThetaSpec::Explicit(values) => {
            if values.len() != n {
                return Err(GenError::InvalidParam(format!(
                    "explicit theta has {} entries for n = {n}",
                    values.len()
                )));
            }
            let mut theta = values.clone();
            renormalize_theta(&mut theta, labels, n as f64)?;
            Ok(theta)
        }
    }
}

/// Conditional edge sampler: labels and theta held fixed, only the edge
/// stream varies. This is the model conditioned on theta and classes.
pub fn sample_dc_csbm_edges(
    labels: &LabelVector,
    theta: &[f64],
    p_intra: f64,
    q_inter: f64,
    edge_seed: u64,
) -> Result<(Graph, f64), GenError> {
    if labels.num_classes() != 2 {
        return Err(GenError::InvalidParam(
            "DC-CSBM sampling needs exactly two classes".into(),
        ));
    }
    let index = BlockIndex::new(labels, theta);
    let rates = move |a: usize, b: usize| if a == b { p_intra } else { q_inter };
    let mut rng = stream(edge_seed, &[STREAM_EDGES]);
    let edges = sample_block_edges(&index, &rates, &mut rng)?;
    let graph = Graph::build(labels.len(), false, edges)?.graph;

    let max_intensity = (p_intra * index.peak_pair(0, 0).max(index.peak_pair(1, 1)))
        .max(q_inter * index.peak_pair(0, 1));
    Ok((graph, max_intensity))
}

/// Per-node Gaussian features with one mean vector per class.
pub fn sample_class_gaussians(
    labels: &LabelVector,
    means: &[Vec<f64>],
    variance: f64,
    feature_seed: u64,
) -> Result<FeatureMatrix, GenError> {
    let d = means
        .first()
        .map(|m| m.len())
        .ok_or_else(|| GenError::InvalidParam("no class means".into()))?;
    if means.iter().any(|m| m.len() != d) {
        return Err(GenError::InvalidParam(
            "class means have differing dimensions".into(),
        ));
    }
    if labels.num_classes() as usize > means.len() {
        return Err(GenError::InvalidParam(format!(
            "{} classes but only {} means",
            labels.num_classes(),
            means.len()
        )));
    }
    let sd = variance.sqrt();
    let mut rng = stream(feature_seed, &[STREAM_FEATURES]);
    let n = labels.len();
    let mut values = Array2::<f64>::zeros((n, d));
    for i in 0..n {
        let mean = &means[labels.label(i) as usize];
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            values[[i, j]] = mean[j] + sd * z;
        }
    }
    FeatureMatrix::new(values).map_err(GenError::from)
}

/// GraphWorld-style SBM parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldParams {
    pub n: usize,
    pub average_degree: f64,
    pub num_clusters: usize,
    pub cluster_size_slope: f64,
    pub p_to_q_ratio: f64,
    pub feature_dim: usize,
    pub feature_center_distance: f64,
    pub feature_cluster_variance: f64,
    pub power_exponent: f64,
    #[serde(default)]
    pub theta_max: Option<f64>,
    pub seed: u64,
}

impl WorldParams {
    fn validate(&self) -> Result<(), GenError> {
        if self.n == 0 {
            return Err(GenError::InvalidParam("n must be positive".into()));
        }
        if self.average_degree <= 0.0 || self.average_degree >= self.n as f64 {
            return Err(GenError::InfeasibleDegree {
                avg: self.average_degree,
                n: self.n,
            });
        }
        if self.num_clusters < 2 {
            return Err(GenError::InvalidParam("num_clusters must be >= 2".into()));
        }
        if self.num_clusters > self.n {
            return Err(GenError::InvalidParam("more clusters than nodes".into()));
        }
        if self.feature_dim < self.num_clusters {
            return Err(GenError::InvalidParam(format!(
                "feature_dim {} must be >= num_clusters {} for simplex centers",
                self.feature_dim, self.num_clusters
            )));
        }
        if self.cluster_size_slope < 0.0 {
            return Err(GenError::InvalidParam(
                "cluster_size_slope must be non-negative".into(),
            ));
        }
        if self.p_to_q_ratio <= 0.0 {
            return Err(GenError::InvalidParam(
                "p_to_q_ratio must be positive".into(),
            ));
        }
        if self.feature_cluster_variance < 0.0 || self.feature_center_distance < 0.0 {
            return Err(GenError::InvalidParam(
                "feature parameters must be non-negative".into(),
            ));
        }
        if self.power_exponent <= 1.0 {
            return Err(GenError::InvalidParam(
                "power_exponent must exceed 1".into(),
            ));
        }
        Ok(())
    }
}

/// Cluster sizes on a linear ramp `1 + slope * k`, normalized to sum to `n`.
pub fn cluster_sizes(n: usize, k: usize, slope: f64) -> Vec<usize> {
    let weights: Vec<f64> = (0..k).map(|j| 1.0 + slope * j as f64).collect();
    let total: f64 = weights.iter().sum();
    let mut sizes: Vec<usize> = weights
        .iter()
        .map(|w| ((n as f64) * w / total).floor() as usize)
        .collect();
    let mut assigned: usize = sizes.iter().sum();
    // Distribute the remainder by largest fractional part (ties by index).
    let mut fracs: Vec<(usize, f64)> = weights
        .iter()
        .enumerate()
        .map(|(j, w)| (j, (n as f64) * w / total - sizes[j] as f64))
        .collect();
    fracs.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut cursor = 0;
    while assigned < n {
        sizes[fracs[cursor % k].0] += 1;
        assigned += 1;
        cursor += 1;
    }
    sizes
}

#[derive(Debug, Clone)]
pub struct WorldSample {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: LabelVector,
    pub theta: Vec<f64>,
    pub intra_intensity: f64,
    pub inter_intensity: f64,
}

pub fn sample_world(params: &WorldParams) -> Result<WorldSample, GenError> {
    sample_world_with_seeds(params, params.seed, params.seed)
}

/// Variant with separate structure and feature seeds so controlled sweeps
/// can reuse feature randomness across grid points.
pub fn sample_world_with_seeds(
    params: &WorldParams,
    structure_seed: u64,
    feature_seed: u64,
) -> Result<WorldSample, GenError> {
    params.validate()?;
    let k = params.num_clusters;
    let sizes = cluster_sizes(params.n, k, params.cluster_size_slope);
    if sizes.contains(&0) {
        return Err(GenError::InvalidParam(
            "a cluster received zero nodes".into(),
        ));
    }
    let mut labels_raw = Vec::with_capacity(params.n);
    for (cluster, &size) in sizes.iter().enumerate() {
        labels_raw.extend(std::iter::repeat_n(cluster as u32, size));
    }
    let labels = LabelVector::new(labels_raw, k as u32)?;

    let theta = sample_theta_powerlaw(
        params.n,
        &labels,
        params.power_exponent,
        params.theta_max,
        derive_seed(structure_seed, &[STREAM_THETA]),
    )?;

    // Solve the inter-cluster intensity so the expected total degree matches
    // n * average_degree exactly under the theta normalization.
    let index = BlockIndex::new(&labels, &theta);
    let sum_sq_sizes: f64 = index.sums.iter().map(|s| s * s).sum();
    let intra_mass: f64 = index
        .sums
        .iter()
        .zip(index.sums_sq.iter())
        .map(|(s, q)| s * s - q)
        .sum();
    let cross_mass = (params.n as f64) * (params.n as f64) - sum_sq_sizes;
    let denom = params.p_to_q_ratio * intra_mass + cross_mass;
    if denom <= 0.0 {
        return Err(GenError::InvalidParam(
            "degenerate block structure: no pair mass".into(),
        ));
    }
    let q_out = params.n as f64 * params.average_degree / denom;
    let p_in = params.p_to_q_ratio * q_out;

    let rates = move |a: usize, b: usize| if a == b { p_in } else { q_out };
    let mut edge_rng = stream(derive_seed(structure_seed, &[STREAM_EDGES]), &[STREAM_EDGES]);
    let edges = sample_block_edges(&index, &rates, &mut edge_rng)?;
    let graph = Graph::build(params.n, false, edges)?.graph;

    let centers = simplex_centers(k, params.feature_dim, params.feature_center_distance);
    let features = sample_class_gaussians(
        &labels,
        &centers,
        params.feature_cluster_variance,
        derive_seed(feature_seed, &[STREAM_FEATURES]),
    )?;
    Ok(WorldSample {
        graph,
        features,
        labels,
        theta,
        intra_intensity: p_in,
        inter_intensity: q_out,
    })
}

/// K origin-centered points in `R^d` with all pairwise distances equal to
/// `distance` (regular simplex in the first K coordinates).
pub fn simplex_centers(k: usize, d: usize, distance: f64) -> Vec<Vec<f64>> {
    let scale = distance / 2.0f64.sqrt();
    (0..k)
        .map(|j| {
            let mut c = vec![0.0; d];
            for (coord, item) in c.iter_mut().enumerate().take(k) {
                let basis = if coord == j { 1.0 } else { 0.0 };
                *item = scale * (basis - 1.0 / k as f64);
            }
            c
        })
        .collect()
}

/// Measured Gini over `probes` structure seeds (median).
pub fn measure_gini(params: &WorldParams, probes: usize) -> Result<f64, GenError> {
    let mut values = Vec::with_capacity(probes);
    for i in 0..probes {
        let seed = derive_seed(params.seed, &[STREAM_CALIBRATE, i as u64]);
        let sample = sample_world_with_seeds(params, seed, seed)?;
        let g = gini_degree(&sample.graph, ProfileOptions::default())
            .map_err(|e| GenError::InvalidParam(format!("gini on generated graph: {e}")))?;
        values.push(g);
    }
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(values[values.len() / 2])
}

/// Outcome of [`calibrate_gini`].
#[derive(Debug, Clone)]
pub struct CalibratedParams {
    pub params: WorldParams,
    pub measured_gini: f64,
    pub iterations: usize,
}

// Calibration domain. Below ~1.4 the theta clamp re-flattens the draws and
// the exponent-to-Gini map stops being monotone, so bisection starts at 1.5
// (heavy tail, highest Gini) and ends at 16 (near-uniform, lowest Gini).
const EXPONENT_LOW: f64 = 1.5;
const EXPONENT_HIGH: f64 = 16.0;

/// Bisect the power-law exponent until the measured Gini (median of `probes`
/// seeds) is within `tol` of `target`.
pub fn calibrate_gini(
    base: &WorldParams,
    target: f64,
    tol: f64,
    probes: usize,
) -> Result<CalibratedParams, GenError> {
    base.validate()?;
    let with_exponent = |e: f64| -> WorldParams {
        let mut p = base.clone();
        p.power_exponent = e;
        p
    };
    // Fixed point: current params may already satisfy the target.
    let current = measure_gini(base, probes)?;
    if (current - target).abs() < tol {
        return Ok(CalibratedParams {
            params: base.clone(),
            measured_gini: current,
            iterations: 1,
        });
    }
    let high_gini = measure_gini(&with_exponent(EXPONENT_LOW), probes)?;
    let low_gini = measure_gini(&with_exponent(EXPONENT_HIGH), probes)?;
    if target > high_gini + tol || target < low_gini - tol {
        return Err(GenError::CalibrationOutOfRange {
            target,
            low: low_gini,
            high: high_gini,
        });
    }
    let (mut lo, mut hi) = (EXPONENT_LOW, EXPONENT_HIGH);
    let mut best_gap = f64::INFINITY;
    let mut best_gini = current;
    for iter in 0..30 {
        let mid = 0.5 * (lo + hi);
        let candidate = with_exponent(mid);
        let g = measure_gini(&candidate, probes)?;
        if (g - target).abs() < best_gap {
            best_gap = (g - target).abs();
            best_gini = g;
        }
        if (g - target).abs() < tol {
            return Ok(CalibratedParams {
                params: candidate,
                measured_gini: g,
                iterations: iter + 1,
            });
        }
        if g > target {
            // Too much inequality: flatten theta with a larger exponent.
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(GenError::CalibrationStalled {
        tol,
        iters: 30,
        best: best_gini,
    })
}
