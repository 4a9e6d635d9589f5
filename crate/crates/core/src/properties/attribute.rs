//! Label- and feature-dependent statistics: edge homogeneity, angular
//! feature similarities, the clipped class-wise homophily measure, and
//! categorical attribute assortativity.

use super::{ProfileOptions, PropertyError};
use crate::graph::{FeatureMatrix, Graph, LabelVector};

/// Fraction of edges (multiplicity-weighted) whose endpoints share a label.
pub fn edge_homogeneity(g: &Graph, y: &LabelVector) -> Result<f64, PropertyError> {
    y.check_pairing(g)
        .map_err(|e| PropertyError::Mismatch(e.to_string()))?;
    let mut same: u64 = 0;
    let mut total: u64 = 0;
    for (u, v, w) in g.edges() {
        total += w as u64;
        if y.label(u as usize) == y.label(v as usize) {
            same += w as u64;
        }
    }
    if total == 0 {
        return Err(PropertyError::NoEdges);
    }
    Ok(same as f64 / total as f64)
}

#[derive(Debug, Clone, Copy)]
pub struct FeatureSimilarities {
    /// Mean angular similarity over same-label edges; `None` when no such edge.
    pub in_sim: Option<f64>,
    /// Mean angular similarity over cross-label edges; `None` when no such edge.
    pub out_sim: Option<f64>,
    /// `in_sim / out_sim` when both are defined and the ratio is finite.
    pub snr: Option<f64>,
}

/// Angular similarity `1 - arccos(cos(x_i, x_j)) / pi` averaged over
/// same-label and cross-label edges (each distinct edge once).
pub fn feature_similarities(
    g: &Graph,
    x: &FeatureMatrix,
    y: &LabelVector,
) -> Result<FeatureSimilarities, PropertyError> {
    x.check_pairing(g)
        .map_err(|e| PropertyError::Mismatch(e.to_string()))?;
    y.check_pairing(g)
        .map_err(|e| PropertyError::Mismatch(e.to_string()))?;
    let norms: Vec<f64> = (0..g.n()).map(|i| x.row(i).dot(&x.row(i)).sqrt()).collect();
    let mut in_sum = 0.0;
    let mut in_count = 0u64;
    let mut out_sum = 0.0;
    let mut out_count = 0u64;
    for (u, v, _) in g.edges() {
        let (u, v) = (u as usize, v as usize);
        if norms[u] == 0.0 {
            return Err(PropertyError::ZeroNormFeature { node: u });
        }
        if norms[v] == 0.0 {
            return Err(PropertyError::ZeroNormFeature { node: v });
        }
        let cos = (x.row(u).dot(&x.row(v)) / (norms[u] * norms[v])).clamp(-1.0, 1.0);
        let sim = 1.0 - cos.acos() / std::f64::consts::PI;
        if y.label(u) == y.label(v) {
            in_sum += sim;
            in_count += 1;
        } else {
            out_sum += sim;
            out_count += 1;
        }
    }
    let in_sim = (in_count > 0).then(|| in_sum / in_count as f64);
    let out_sim = (out_count > 0).then(|| out_sum / out_count as f64);
    let snr = match (in_sim, out_sim) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    Ok(FeatureSimilarities {
        in_sim,
        out_sim,
        snr,
    })
}

/// Clipped class-wise homophily:
/// `h_hat = 1/(C-1) * sum_k [h_k - |C_k|/n]_+` with
/// `h_k = sum_{u in k} d_u^same / sum_{u in k} d_u`. Classes whose members
/// are all isolated contribute `h_k = 0`. Degrees count multiplicities by
/// default (`opts`).
pub fn homophily_measure(
    g: &Graph,
    y: &LabelVector,
    opts: ProfileOptions,
) -> Result<f64, PropertyError> {
    y.check_pairing(g)
        .map_err(|e| PropertyError::Mismatch(e.to_string()))?;
    let c = y.num_classes();
    if c < 2 {
        return Err(PropertyError::SingleClass(c));
    }
    let n = g.n();
    let mut deg_total = vec![0u64; c as usize];
    let mut deg_same = vec![0u64; c as usize];
    for (u, v, w) in g.edges() {
        let w = if opts.count_multiplicities { w as u64 } else { 1 };
        let (lu, lv) = (y.label(u as usize), y.label(v as usize));
        // Every edge is incident to both endpoints (total degree for directed).
        deg_total[lu as usize] += w;
        deg_total[lv as usize] += w;
        if lu == lv {
            deg_same[lu as usize] += 2 * w;
        }
    }
    let sizes = y.class_sizes();
    let mut total = 0.0;
    for k in 0..c as usize {
        let h_k = if deg_total[k] == 0 {
            0.0
        } else {
            deg_same[k] as f64 / deg_total[k] as f64
        };
        total += (h_k - sizes[k] as f64 / n as f64).max(0.0);
    }
    Ok(total / (c as f64 - 1.0))
}

/// Categorical assortativity on the edge label-mixing matrix:
/// `r = (sum_k e_kk - sum_k a_k b_k) / (1 - sum_k a_k b_k)`.
pub fn attribute_assortativity(g: &Graph, y: &LabelVector) -> Result<f64, PropertyError> {
    y.check_pairing(g)
        .map_err(|e| PropertyError::Mismatch(e.to_string()))?;
    let c = y.num_classes() as usize;
    if c == 0 {
        return Err(PropertyError::SingleClass(0));
    }
    // Mixing counts over ordered endpoint pairs of distinct edges.
    let mut mix = vec![0u64; c * c];
    let mut total = 0u64;
    for (u, v, _) in g.edges() {
        let (lu, lv) = (y.label(u as usize) as usize, y.label(v as usize) as usize);
        mix[lu * c + lv] += 1;
        total += 1;
        if !g.directed() {
            mix[lv * c + lu] += 1;
            total += 1;
        }
    }
    if total == 0 {
        return Err(PropertyError::NoEdges);
    }
    let mut trace = 0.0;
    let mut ab = 0.0;
    for k in 0..c {
        trace += mix[k * c + k] as f64 / total as f64;
        let a_k: u64 = (0..c).map(|l| mix[k * c + l]).sum();
        let b_k: u64 = (0..c).map(|l| mix[l * c + k]).sum();
        ab += (a_k as f64 / total as f64) * (b_k as f64 / total as f64);
    }
    if (1.0 - ab).abs() < 1e-12 {
        return Err(PropertyError::Undefined(
            "single effective class in edge mixing".into(),
        ));
    }
    Ok((trace - ab) / (1.0 - ab))
}
