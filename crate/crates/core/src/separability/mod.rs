//! Single-layer graph convolution and linear-separability diagnostics.
//!
//! The convolution is `X~ = D^-1 A~ X` with `A~ = A + I`: each node's
//! representation becomes the multiplicity-weighted mean of its augmented
//! neighborhood. Degree-thresholded subgroups collect the nodes whose degree
//! correction (or observed augmented degree) clears a threshold `alpha`; the
//! mid-point hyperplane between the class feature means should separate
//! their convolved representations once degrees are large enough.
//!
//! [`exact_separability`] decides strict separability of two labeled point
//! sets by finding the minimum-norm point of the signed, bias-augmented hull
//! (pairwise Frank-Wolfe): a unit direction with margin >= epsilon is a
//! witness, a hull point with norm <= epsilon certifies infeasibility.

use crate::generator::{sample_class_gaussians, sample_dc_csbm_edges, sample_theta_powerlaw};
use crate::graph::{FeatureMatrix, Graph, LabelVector};
use crate::rng::{derive_seed, STREAM_SWEEP};
use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SepError {
    #[error("dimension mismatch: {0}")]
    Mismatch(String),
    #[error("degenerate hyperplane: class means coincide")]
    DegenerateHyperplane,
    #[error("empty subgroup at alpha = {0}")]
    EmptySubgroup(f64),
    #[error("subgroup size {size} exceeds cap {cap}; use separability_fraction instead")]
    CapExceeded { size: usize, cap: usize },
    #[error("separability search undecided after {0} iterations")]
    Undecided(usize),
    #[error("{0}")]
    Invalid(String),
}

/// Convolved features together with the augmented degrees used as row
/// normalizers.
#[derive(Debug, Clone)]
pub struct ConvolvedFeatures {
    pub values: Array2<f64>,
    pub augmented_degrees: Vec<u64>,
}

/// `x~_i = (x_i + sum_j w_ij x_j) / (1 + sum_j w_ij)`, rows in parallel with
/// a fixed per-row accumulation order (bit-identical at any thread count).
pub fn convolve(g: &Graph, x: &FeatureMatrix) -> Result<ConvolvedFeatures, SepError> {
    x.check_pairing(g)
        .map_err(|e| SepError::Mismatch(e.to_string()))?;
    if g.directed() {
        return Err(SepError::Invalid(
            "convolution expects an undirected graph".into(),
        ));
    }
    let n = g.n();
    let d = x.dim();
    let mut values = Array2::<f64>::zeros((n, d));
    let degrees = g.degree_vector(true);
    let flat = values.as_slice_mut().expect("row-major contiguous");
    flat.par_chunks_mut(d.max(1))
        .enumerate()
        .for_each(|(i, row)| {
            let xi = x.row(i);
            for (k, slot) in row.iter_mut().enumerate() {
                *slot = xi[k];
            }
            for (v, w) in g.neighbors(i) {
                let xv = x.row(v as usize);
                let w = w as f64;
                for (k, slot) in row.iter_mut().enumerate() {
                    *slot += w * xv[k];
                }
            }
            let inv = 1.0 / degrees[i] as f64;
            for slot in row.iter_mut() {
                *slot *= inv;
            }
        });
    Ok(ConvolvedFeatures {
        values,
        augmented_degrees: degrees,
    })
}

/// Which node score drives subgroup membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaMode {
    /// Known generator degree corrections: member iff `theta_j >= alpha`.
    Theta,
    /// Observed augmented degrees: member iff
    /// `D_jj >= 1 + (n-1)/2 (p+q) alpha`.
    Degree,
}

/// Node scores for [`alpha_subgroup`].
pub enum NodeScores<'a> {
    Theta(&'a [f64]),
    AugmentedDegrees(&'a [u64]),
}

/// Two-class degree-thresholded subgroup.
#[derive(Debug, Clone)]
pub struct AlphaSubgroup {
    pub alpha: f64,
    pub mode: AlphaMode,
    pub class0: Vec<u32>,
    pub class1: Vec<u32>,
}

impl AlphaSubgroup {
    pub fn len(&self) -> usize {
        self.class0.len() + self.class1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class0.is_empty() && self.class1.is_empty()
    }

    pub fn members(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.class0
            .iter()
            .map(|&i| (i, 0))
            .chain(self.class1.iter().map(|&i| (i, 1)))
    }
}

/// Degree-mode membership threshold on augmented degrees.
pub fn degree_threshold(n: usize, p_intra: f64, q_inter: f64, alpha: f64) -> f64 {
    1.0 + (n as f64 - 1.0) / 2.0 * (p_intra + q_inter) * alpha
}

pub fn alpha_subgroup(
    labels: &LabelVector,
    scores: NodeScores<'_>,
    alpha: f64,
    p_intra: f64,
    q_inter: f64,
) -> Result<AlphaSubgroup, SepError> {
    if labels.num_classes() != 2 {
        return Err(SepError::Invalid(format!(
            "alpha subgroups are defined for two classes, got {}",
            labels.num_classes()
        )));
    }
    let n = labels.len();
    enum Pred<'a> {
        Theta(&'a [f64], f64),
        Degree(&'a [u64], f64),
    }
    let (mode, pred) = match scores {
        NodeScores::Theta(theta) => {
            if theta.len() != n {
                return Err(SepError::Mismatch("theta length != n".into()));
            }
            (AlphaMode::Theta, Pred::Theta(theta, alpha))
        }
        NodeScores::AugmentedDegrees(deg) => {
            if deg.len() != n {
                return Err(SepError::Mismatch("degree vector length != n".into()));
            }
            let threshold = degree_threshold(n, p_intra, q_inter, alpha);
            (AlphaMode::Degree, Pred::Degree(deg, threshold))
        }
    };
    let mut class0 = Vec::new();
    let mut class1 = Vec::new();
    for i in 0..n {
        let member = match &pred {
            Pred::Theta(theta, a) => theta[i] >= *a,
            Pred::Degree(deg, thr) => deg[i] as f64 >= *thr,
        };
        if member {
            if labels.label(i) == 0 {
                class0.push(i as u32);
            } else {
                class1.push(i as u32);
            }
        }
    }
    Ok(AlphaSubgroup {
        alpha,
        mode,
        class0,
        class1,
    })
}

/// Hyperplane through the mid-point of the class means, normal to their
/// difference: `v = (nu - mu) / ||nu - mu||`, `b = -<mu + nu, v> / 2`.
pub fn midpoint_hyperplane(mu: &[f64], nu: &[f64]) -> Result<(Array1<f64>, f64), SepError> {
    if mu.len() != nu.len() {
        return Err(SepError::Mismatch("mu and nu dimensions differ".into()));
    }
    let diff: Array1<f64> = nu.iter().zip(mu.iter()).map(|(a, b)| a - b).collect();
    let gamma = diff.dot(&diff).sqrt() / 2.0;
    if gamma <= 1e-300 {
        return Err(SepError::DegenerateHyperplane);
    }
    let v = diff / (2.0 * gamma);
    let b = -mu
        .iter()
        .zip(nu.iter())
        .zip(v.iter())
        .map(|((m, u), vi)| (m + u) * vi)
        .sum::<f64>()
        / 2.0;
    Ok((v, b))
}

/// Fraction of subgroup nodes on their correct side of `(v, b)` (strict
/// inequalities): class 0 negative, class 1 positive.
pub fn separability_fraction(
    cf: &ConvolvedFeatures,
    sub: &AlphaSubgroup,
    v: &Array1<f64>,
    b: f64,
) -> Result<f64, SepError> {
    if v.len() != cf.values.ncols() {
        return Err(SepError::Mismatch(
            "v dimension != feature dimension".into(),
        ));
    }
    if sub.is_empty() {
        return Err(SepError::EmptySubgroup(sub.alpha));
    }
    let mut correct = 0usize;
    for (i, class) in sub.members() {
        let score = cf.values.row(i as usize).dot(v) + b;
        let ok = if class == 0 { score < 0.0 } else { score > 0.0 };
        if ok {
            correct += 1;
        }
    }
    Ok(correct as f64 / sub.len() as f64)
}

/// Outcome of the exact separability decision.
#[derive(Debug, Clone)]
pub enum SeparabilityDecision {
    Separable {
        /// Unit normal.
        v: Array1<f64>,
        b: f64,
        /// Worst-case signed margin of the witness over the subgroup.
        margin: f64,
    },
    NotSeparable {
        /// Norm of the convex combination certifying infeasibility.
        certificate_norm: f64,
        /// Convex weights `(node, weight)` of that combination.
        certificate: Vec<(u32, f64)>,
    },
}

pub const EXACT_SEPARABILITY_CAP: usize = 2000;

/// Decide strict linear separability of the subgroup's convolved points with
/// decision margin `epsilon`.
pub fn exact_separability_with(
    cf: &ConvolvedFeatures,
    sub: &AlphaSubgroup,
    cap: usize,
    epsilon: f64,
) -> Result<SeparabilityDecision, SepError> {
    if sub.is_empty() {
        return Err(SepError::EmptySubgroup(sub.alpha));
    }
    if sub.len() > cap {
        return Err(SepError::CapExceeded {
            size: sub.len(),
            cap,
        });
    }
    let d = cf.values.ncols();
    // Signed, bias-augmented points: class 0 negated so separation becomes
    // <w, z_i> > 0 for all i, i.e. the origin outside the hull.
    let nodes: Vec<u32> = sub.members().map(|(i, _)| i).collect();
    let points: Vec<Array1<f64>> = sub
        .members()
        .map(|(i, class)| {
            let sign = if class == 0 { -1.0 } else { 1.0 };
            let mut z = Array1::<f64>::zeros(d + 1);
            for (k, &x) in cf.values.row(i as usize).iter().enumerate() {
                z[k] = sign * x;
            }
            z[d] = sign;
            z
        })
        .collect();
    let m = points.len();

    let mut weights = vec![0.0f64; m];
    weights[0] = 1.0;
    let mut u = points[0].clone();
    let max_iter = 200_000usize;
    for iter in 0..max_iter {
        // Frank-Wolfe vertex (global min of <u, z>) and away vertex (max
        // over the active set).
        let mut t_best = (0usize, f64::INFINITY);
        let mut a_best = (0usize, f64::NEG_INFINITY);
        for (i, z) in points.iter().enumerate() {
            let s = u.dot(z);
            if s < t_best.1 {
                t_best = (i, s);
            }
            if weights[i] > 0.0 && s > a_best.1 {
                a_best = (i, s);
            }
        }
        let norm = u.dot(&u).sqrt();
        if norm <= epsilon {
            return Ok(not_separable(&weights, &nodes, norm));
        }
        if t_best.1 / norm >= epsilon {
            return separable_from_direction(&u, cf, sub);
        }
        // Pairwise step from the away vertex toward the FW vertex.
        let dir: Array1<f64> = &points[t_best.0] - &points[a_best.0];
        let dir_sq = dir.dot(&dir);
        if dir_sq <= 0.0 {
            // Active set sits on the FW vertex; take a classic FW step.
            let diff: Array1<f64> = &points[t_best.0] - &u;
            let denom = diff.dot(&diff);
            if denom <= 0.0 {
                return separable_from_direction(&u, cf, sub);
            }
            let gamma = (-u.dot(&diff) / denom).clamp(0.0, 1.0);
            if gamma == 0.0 {
                return decide_stalled(&u, cf, sub, &weights, &nodes, norm, epsilon, iter);
            }
            for w in weights.iter_mut() {
                *w *= 1.0 - gamma;
            }
            weights[t_best.0] += gamma;
            u = &u * (1.0 - gamma) + &(&points[t_best.0] * gamma);
            continue;
        }
        let gamma = (-u.dot(&dir) / dir_sq).clamp(0.0, weights[a_best.0]);
        if gamma == 0.0 {
            return decide_stalled(&u, cf, sub, &weights, &nodes, norm, epsilon, iter);
        }
        weights[t_best.0] += gamma;
        weights[a_best.0] -= gamma;
        u = &u + &(&dir * gamma);
        if iter % 1024 == 1023 {
            // Refresh u from the weights to shed accumulated rounding.
            let mut fresh = Array1::<f64>::zeros(d + 1);
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 {
                    fresh = fresh + &points[i] * w;
                }
            }
            u = fresh;
        }
    }
    Err(SepError::Undecided(max_iter))
}

fn not_separable(weights: &[f64], nodes: &[u32], norm: f64) -> SeparabilityDecision {
    let certificate: Vec<(u32, f64)> = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.0)
        .map(|(i, &w)| (nodes[i], w))
        .collect();
    SeparabilityDecision::NotSeparable {
        certificate_norm: norm,
        certificate,
    }
}

#[allow(clippy::too_many_arguments)]
fn decide_stalled(
    u: &Array1<f64>,
    cf: &ConvolvedFeatures,
    sub: &AlphaSubgroup,
    weights: &[f64],
    nodes: &[u32],
    norm: f64,
    epsilon: f64,
    iter: usize,
) -> Result<SeparabilityDecision, SepError> {
    // No pairwise progress: u is the minimum-norm point numerically. Small
    // norm certifies infeasibility; otherwise try the direction as a witness.
    if norm <= epsilon.max(1e-12) {
        return Ok(not_separable(weights, nodes, norm));
    }
    match separable_from_direction(u, cf, sub) {
        Ok(SeparabilityDecision::Separable { v, b, margin }) if margin > 0.0 => {
            Ok(SeparabilityDecision::Separable { v, b, margin })
        }
        _ => Err(SepError::Undecided(iter)),
    }
}

fn separable_from_direction(
    u: &Array1<f64>,
    cf: &ConvolvedFeatures,
    sub: &AlphaSubgroup,
) -> Result<SeparabilityDecision, SepError> {
    let d = cf.values.ncols();
    let v_raw = u.slice(ndarray::s![..d]).to_owned();
    let b_raw = u[d];
    let v_norm = v_raw.dot(&v_raw).sqrt();
    if v_norm <= 0.0 {
        return Err(SepError::Invalid(
            "separating direction has zero feature component".into(),
        ));
    }
    let v = v_raw / v_norm;
    let b = b_raw / v_norm;
    let mut margin = f64::INFINITY;
    for (i, class) in sub.members() {
        let score = cf.values.row(i as usize).dot(&v) + b;
        let signed = if class == 0 { -score } else { score };
        margin = margin.min(signed);
    }
    Ok(SeparabilityDecision::Separable { v, b, margin })
}

/// Convenience wrapper with the default cap (2000) and margin 1e-9.
pub fn exact_separability(
    cf: &ConvolvedFeatures,
    sub: &AlphaSubgroup,
) -> Result<SeparabilityDecision, SepError> {
    exact_separability_with(cf, sub, EXACT_SEPARABILITY_CAP, 1e-9)
}

/// Empirical check of the degree and neighborhood concentration events over
/// the subgroup, with `delta = n^(-1/2+eps)` and
/// `delta' = (alpha ln n)^(-1/2+eps)`.
#[derive(Debug, Clone, Serialize)]
pub struct ConcentrationReport {
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub checked_nodes: usize,
    pub class_sizes_ok: bool,
    pub degree_violation_rate: f64,
    pub intra_violation_rate: f64,
    pub inter_violation_rate: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn concentration_report(
    g: &Graph,
    labels: &LabelVector,
    theta: &[f64],
    p_intra: f64,
    q_inter: f64,
    alpha: f64,
    epsilon: f64,
    delta_prime_override: Option<f64>,
) -> Result<ConcentrationReport, SepError> {
    labels
        .check_pairing(g)
        .map_err(|e| SepError::Mismatch(e.to_string()))?;
    if theta.len() != g.n() {
        return Err(SepError::Mismatch("theta length != n".into()));
    }
    let n = g.n() as f64;
    let sub = alpha_subgroup(labels, NodeScores::Theta(theta), alpha, p_intra, q_inter)?;
    let delta = n.powf(-0.5 + epsilon);
    let delta_prime =
        delta_prime_override.unwrap_or_else(|| (alpha * n.ln()).powf(-0.5 + epsilon));

    let sizes = labels.class_sizes();
    let class_sizes_ok = sizes
        .iter()
        .all(|&s| (s as f64) >= n / 2.0 * (1.0 - delta) && (s as f64) <= n / 2.0 * (1.0 + delta));

    let degrees = g.degree_vector(true);
    let mut degree_viol = 0usize;
    let mut intra_viol = 0usize;
    let mut inter_viol = 0usize;
    let total = sub.len();
    let rate_sum = p_intra + q_inter;
    for (i, class) in sub.members() {
        let i = i as usize;
        let d_aug = degrees[i] as f64;
        let center = 0.5 * rate_sum * theta[i];
        if d_aug / n < center * (1.0 - delta_prime) || d_aug / n > center * (1.0 + delta_prime) {
            degree_viol += 1;
        }
        // Neighbor composition, multiplicity-weighted, self counted intra.
        let mut same = 1.0f64;
        let mut cross = 0.0f64;
        for (v, w) in g.neighbors(i) {
            if labels.label(v as usize) == class {
                same += w as f64;
            } else {
                cross += w as f64;
            }
        }
        let intra_target = p_intra / rate_sum;
        let inter_target = q_inter / rate_sum;
        let intra_frac = same / d_aug;
        let inter_frac = cross / d_aug;
        if intra_frac < intra_target * (1.0 - delta_prime)
            || intra_frac > intra_target * (1.0 + delta_prime)
        {
            intra_viol += 1;
        }
        if inter_frac < inter_target * (1.0 - delta_prime)
            || inter_frac > inter_target * (1.0 + delta_prime)
        {
            inter_viol += 1;
        }
    }
    let rate = |count: usize| {
        if total == 0 {
            0.0
        } else {
            count as f64 / total as f64
        }
    };
    Ok(ConcentrationReport {
        alpha,
        epsilon,
        delta,
        delta_prime,
        checked_nodes: total,
        class_sizes_ok,
        degree_violation_rate: rate(degree_viol),
        intra_violation_rate: rate(intra_viol),
        inter_violation_rate: rate(inter_viol),
    })
}

/// Configuration of the dimension sweep that stresses the separability
/// statement at desk scale.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub d_grid: Vec<usize>,
    /// Block signal `(p - q)/(p + q)`; the control run forces 0.
    pub gamma: f64,
    /// `(p + q) = density_factor * ln^3(n) / n`.
    pub density_factor: f64,
    /// `||mu - nu||_2`; the control run forces coincident means.
    pub mean_distance: f64,
    pub theta_exponent: f64,
    #[serde(default)]
    pub theta_max: Option<f64>,
    /// Subgroup threshold `alpha = alpha_coeff / ln n`.
    pub alpha_coeff: f64,
    pub seeds: usize,
    pub seed: u64,
    /// Chance-level control: p = q and mu = nu, scored against the fixed
    /// first-axis hyperplane through the shared mean.
    pub control: bool,
    /// Concentration report epsilon.
    pub epsilon: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            d_grid: vec![16, 64, 256],
            gamma: 0.5,
            density_factor: 0.3,
            mean_distance: 1.0,
            theta_exponent: 4.0,
            theta_max: None,
            alpha_coeff: 2.0,
            seeds: 20,
            seed: 0,
            control: false,
            epsilon: 0.05,
        }
    }
}

/// Graph size coupled to the feature dimension: `n = round(d ln^2 d)`.
pub fn sweep_graph_size(d: usize) -> usize {
    let d = d as f64;
    (d * d.ln() * d.ln()).round() as usize
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    pub seed_index: usize,
    pub fraction: f64,
    pub subgroup_size: usize,
    pub degree_violation_rate: f64,
    pub intra_violation_rate: f64,
    pub inter_violation_rate: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub control: bool,
    pub rows: Vec<SweepRow>,
    /// `(d, median fraction)` per grid point.
    pub medians: Vec<(usize, f64)>,
    pub monotone_non_decreasing: bool,
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "d,n,alpha,seed,fraction,subgroup_size,degree_violation_rate,intra_violation_rate,inter_violation_rate\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                r.d,
                r.n,
                r.alpha,
                r.seed_index,
                r.fraction,
                r.subgroup_size,
                r.degree_violation_rate,
                r.intra_violation_rate,
                r.inter_violation_rate
            ));
        }
        out
    }
}

/// Run the sweep: for each dimension, sample DC-CSBM graphs at the coupled
/// size, convolve, and measure the mid-point hyperplane separability
/// fraction over the theta-mode subgroup.
pub fn theorem1_sweep(cfg: &SweepConfig) -> Result<SweepResult, SepError> {
    if cfg.d_grid.is_empty() || cfg.seeds == 0 {
        return Err(SepError::Invalid("empty sweep grid".into()));
    }
    let gamma = if cfg.control { 0.0 } else { cfg.gamma };
    let mut cells = Vec::new();
    for &d in &cfg.d_grid {
        for s in 0..cfg.seeds {
            cells.push((d, s));
        }
    }
    let rows: Vec<Result<SweepRow, SepError>> = cells
        .par_iter()
        .map(|&(d, seed_index)| sweep_cell(cfg, gamma, d, seed_index))
        .collect();
    let mut out_rows = Vec::with_capacity(rows.len());
    for r in rows {
        out_rows.push(r?);
    }
    let mut medians = Vec::new();
    for &d in &cfg.d_grid {
        let mut fr: Vec<f64> = out_rows
            .iter()
            .filter(|r| r.d == d)
            .map(|r| r.fraction)
            .collect();
        fr.sort_by(|a, b| a.total_cmp(b));
        medians.push((d, fr[fr.len() / 2]));
    }
    let monotone_non_decreasing = medians.windows(2).all(|w| w[1].1 >= w[0].1 - 1e-12);
    Ok(SweepResult {
        control: cfg.control,
        rows: out_rows,
        medians,
        monotone_non_decreasing,
    })
}

fn sweep_cell(
    cfg: &SweepConfig,
    gamma: f64,
    d: usize,
    seed_index: usize,
) -> Result<SweepRow, SepError> {
    let n = sweep_graph_size(d);
    let ln_n = (n as f64).ln();
    let rate_sum = cfg.density_factor * ln_n.powi(3) / n as f64;
    let p = 0.5 * (1.0 + gamma) * rate_sum;
    let q = 0.5 * (1.0 - gamma) * rate_sum;
    if p >= 1.0 {
        return Err(SepError::Invalid(format!(
            "density factor {} pushes p = {p} past 1 at n = {n}",
            cfg.density_factor
        )));
    }
    let alpha = cfg.alpha_coeff / ln_n;
    let half = cfg.mean_distance / 2.0;
    let mut mu = vec![0.0; d];
    mu[0] = -half;
    let nu = if cfg.control {
        mu.clone()
    } else {
        let mut nu = vec![0.0; d];
        nu[0] = half;
        nu
    };

    let cell = |tag: u64| [STREAM_SWEEP, d as u64, seed_index as u64, tag];
    let labels = crate::generator::assign_classes(n, derive_seed(cfg.seed, &cell(1)));
    let theta = sample_theta_powerlaw(
        n,
        &labels,
        cfg.theta_exponent,
        cfg.theta_max,
        derive_seed(cfg.seed, &cell(2)),
    )
    .map_err(|e| SepError::Invalid(e.to_string()))?;
    let (graph, _) = sample_dc_csbm_edges(
        &labels,
        &theta,
        p,
        q,
        derive_seed(cfg.seed, &cell(3)),
    )
    .map_err(|e| SepError::Invalid(e.to_string()))?;
    let features = sample_class_gaussians(
        &labels,
        &[mu.clone(), nu.clone()],
        1.0 / d as f64,
        derive_seed(cfg.seed, &cell(4)),
    )
    .map_err(|e| SepError::Invalid(e.to_string()))?;

    let cf = convolve(&graph, &features)?;
    let sub = alpha_subgroup(&labels, NodeScores::Theta(&theta), alpha, p, q)?;
    let (v, b) = if cfg.control {
        // Mid-point normal is undefined for coincident means; score against
        // the first feature axis through the shared mean.
        let mut v = Array1::<f64>::zeros(d);
        v[0] = 1.0;
        let b = -(mu[0] + nu[0]) / 2.0;
        (v, b)
    } else {
        midpoint_hyperplane(&mu, &nu)?
    };
    let fraction = separability_fraction(&cf, &sub, &v, b)?;
    let report = concentration_report(&graph, &labels, &theta, p, q, alpha, cfg.epsilon, None)?;
    Ok(SweepRow {
        d,
        n,
        alpha,
        seed_index,
        fraction,
        subgroup_size: sub.len(),
        degree_violation_rate: report.degree_violation_rate,
        intra_violation_rate: report.intra_violation_rate,
        inter_violation_rate: report.inter_violation_rate,
    })
}

#[cfg(test)]
mod tests;
