//! Structural statistics: density, degrees, assortativity, distance,
//! connectivity, clustering, degeneracy, and degree-distribution inequality.

use super::{ProfileOptions, PropertyError};
use crate::graph::Graph;
use std::collections::VecDeque;

/// Fraction of possible edges present, multiplicities clamped to one.
/// Undirected: `2m / (n(n-1))`; directed: `m / (n(n-1))`.
pub fn edge_density(g: &Graph) -> Result<f64, PropertyError> {
    let n = g.n();
    if n < 2 {
        return Err(PropertyError::TooFewNodes { n, need: 2 });
    }
    let pairs = (n as f64) * (n as f64 - 1.0);
    let m = g.distinct_edge_count() as f64;
    Ok(if g.directed() { m / pairs } else { 2.0 * m / pairs })
}

/// Mean degree: `2m/n` undirected, `m/n` directed. Multiplicities count by
/// default; `opts.count_multiplicities = false` clamps them.
pub fn average_degree(g: &Graph, opts: ProfileOptions) -> Result<f64, PropertyError> {
    let n = g.n();
    if n < 1 {
        return Err(PropertyError::TooFewNodes { n, need: 1 });
    }
    let m = if opts.count_multiplicities {
        g.m() as f64
    } else {
        g.distinct_edge_count() as f64
    };
    Ok(if g.directed() {
        m / n as f64
    } else {
        2.0 * m / n as f64
    })
}

/// Pearson correlation of endpoint degrees over all ordered connected pairs
/// (each undirected edge counted in both orientations; multiplicities
/// clamped). Constant degree sequences are undefined.
pub fn degree_assortativity(g: &Graph) -> Result<f64, PropertyError> {
    let und = g.as_undirected();
    let deg = und.distinct_degree_vector();
    if und.distinct_edge_count() < 2 {
        return Err(PropertyError::Undefined(
            "needs at least two edges".into(),
        ));
    }
    // Exact integer sums; symmetry makes the x and y moments identical.
    let mut count: u128 = 0;
    let mut s_x: u128 = 0;
    let mut s_xx: u128 = 0;
    let mut s_xy: u128 = 0;
    for (u, v, _) in und.edges() {
        let (du, dv) = (deg[u as usize] as u128, deg[v as usize] as u128);
        count += 2;
        s_x += du + dv;
        s_xx += du * du + dv * dv;
        s_xy += 2 * du * dv;
    }
    let num = (count * s_xy) as i128 - (s_x * s_x) as i128;
    let den = (count * s_xx) as i128 - (s_x * s_x) as i128;
    if den == 0 {
        return Err(PropertyError::Undefined(
            "constant endpoint degree sequence".into(),
        ));
    }
    Ok(num as f64 / den as f64)
}

fn components(g: &Graph) -> (Vec<u32>, Vec<usize>) {
    let n = g.n();
    let mut comp = vec![u32::MAX; n];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if comp[start] != u32::MAX {
            continue;
        }
        let id = sizes.len() as u32;
        sizes.push(0usize);
        comp[start] = id;
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            sizes[id as usize] += 1;
            for &v in g.neighbor_ids(u) {
                if comp[v as usize] == u32::MAX {
                    comp[v as usize] = id;
                    queue.push_back(v as usize);
                }
            }
        }
    }
    (comp, sizes)
}

/// Relative size of the largest (weakly) connected component.
pub fn rslcc(g: &Graph) -> Result<f64, PropertyError> {
    let n = g.n();
    if n < 1 {
        return Err(PropertyError::TooFewNodes { n, need: 1 });
    }
    let und = g.as_undirected();
    let (_, sizes) = components(&und);
    let largest = sizes.iter().copied().max().unwrap_or(0);
    Ok(largest as f64 / n as f64)
}

fn bfs_farthest(g: &Graph, src: usize, dist: &mut [i64]) -> (usize, u64) {
    dist.fill(-1);
    dist[src] = 0;
    let mut queue = VecDeque::new();
    queue.push_back(src);
    let mut far = src;
    let mut ecc = 0u64;
    while let Some(u) = queue.pop_front() {
        let du = dist[u] as u64;
        if du > ecc || (du == ecc && u < far) {
            ecc = du;
            far = u;
        }
        for &v in g.neighbor_ids(u) {
            if dist[v as usize] < 0 {
                dist[v as usize] = dist[u] + 1;
                queue.push_back(v as usize);
            }
        }
    }
    (far, ecc)
}

/// Double-sweep BFS lower bound on the diameter of the largest connected
/// component, iterated from a max-degree seed while the bound improves
/// (at most 10 sweeps). Exact on trees.
pub fn pseudo_diameter(g: &Graph) -> Result<u64, PropertyError> {
    let n = g.n();
    if n < 1 {
        return Err(PropertyError::TooFewNodes { n, need: 1 });
    }
    let und = g.as_undirected();
    let (comp, sizes) = components(&und);
    let largest = sizes
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(id, _)| id as u32)
        .unwrap_or(0);
    let deg = und.distinct_degree_vector();
    let mut src = usize::MAX;
    for u in 0..n {
        if comp[u] == largest && (src == usize::MAX || deg[u] > deg[src]) {
            src = u;
        }
    }
    let mut dist = vec![-1i64; n];
    let mut bound = 0u64;
    for _ in 0..10 {
        let (far, ecc) = bfs_farthest(&und, src, &mut dist);
        if ecc > bound {
            bound = ecc;
            src = far;
        } else {
            break;
        }
    }
    Ok(bound)
}

/// Per-node triangle counts and triad total on a simple undirected graph.
#[derive(Debug, Clone)]
pub struct TriangleCounts {
    pub per_node: Vec<u64>,
    pub simple_degrees: Vec<u64>,
    pub triads: u64,
}

/// Count triangles with the forward (rank-ordered intersection) algorithm.
/// Expects a simple undirected graph; multiplicities must be pre-clamped.
pub fn triangle_counts(g: &Graph) -> Result<TriangleCounts, PropertyError> {
    if g.directed() {
        return Err(PropertyError::Mismatch(
            "triangle_counts expects an undirected graph".into(),
        ));
    }
    let n = g.n();
    let deg = g.distinct_degree_vector();
    // Rank nodes by (degree, id); orient each edge toward the higher rank.
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by_key(|&u| (deg[u as usize], u));
    let mut rank = vec![0u32; n];
    for (r, &u) in order.iter().enumerate() {
        rank[u as usize] = r as u32;
    }
    let mut higher: Vec<Vec<u32>> = vec![Vec::new(); n];
    for u in 0..n {
        for &v in g.neighbor_ids(u) {
            if rank[v as usize] > rank[u] {
                higher[u].push(v);
            }
        }
        higher[u].sort_unstable();
    }
    let mut per_node = vec![0u64; n];
    for u in 0..n {
        for &v in &higher[u] {
            let (a, b) = (&higher[u], &higher[v as usize]);
            let (mut i, mut j) = (0usize, 0usize);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        per_node[u] += 1;
                        per_node[v as usize] += 1;
                        per_node[a[i] as usize] += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    let triads: u64 = deg.iter().map(|&d| d * d.saturating_sub(1) / 2).sum();
    Ok(TriangleCounts {
        per_node,
        simple_degrees: deg,
        triads,
    })
}

pub(super) fn acc_from_counts(g: &Graph, tri: &TriangleCounts) -> Result<f64, PropertyError> {
    if g.directed() {
        return directed_acc(g);
    }
    let n = g.n();
    if n < 1 {
        return Err(PropertyError::TooFewNodes { n, need: 1 });
    }
    let mut total = 0.0;
    for u in 0..n {
        let d = tri.simple_degrees[u];
        if d >= 2 {
            total += 2.0 * tri.per_node[u] as f64 / (d as f64 * (d as f64 - 1.0));
        }
    }
    Ok(total / n as f64)
}

pub(super) fn transitivity_from_counts(tri: &TriangleCounts) -> f64 {
    if tri.triads == 0 {
        return 0.0;
    }
    let total: u64 = tri.per_node.iter().sum(); // = 3 * #triangles
    total as f64 / tri.triads as f64
}

/// Mean local clustering coefficient; nodes with degree < 2 contribute 0.
/// Directed graphs use the total-degree form with reciprocal correction.
pub fn avg_clustering_coefficient(g: &Graph) -> Result<f64, PropertyError> {
    if g.directed() {
        return directed_acc(g);
    }
    let tri = triangle_counts(&g.clamped())?;
    acc_from_counts(g, &tri)
}

/// Directed local clustering: `[(A + A^T)^3]_uu / (2 (d_tot(d_tot - 1) - 2 d_recip))`
/// with the 0/1-clamped adjacency, averaged over nodes.
fn directed_acc(g: &Graph) -> Result<f64, PropertyError> {
    let n = g.n();
    if n < 1 {
        return Err(PropertyError::TooFewNodes { n, need: 1 });
    }
    let a01 = g.clamped();
    let und = a01.as_undirected().clamped();
    let b = |i: usize, j: u32| -> u64 {
        (a01.weight(i, j).min(1) + a01.weight(j as usize, i as u32).min(1)) as u64
    };
    let mut total = 0.0;
    for u in 0..n {
        let support = und.neighbor_ids(u);
        let mut d_tot = 0u64;
        let mut recip = 0u64;
        for &v in support {
            let buv = b(u, v);
            d_tot += buv;
            if buv == 2 {
                recip += 1;
            }
        }
        let denom = d_tot.saturating_mul(d_tot.saturating_sub(1)) as i128 - 2 * recip as i128;
        if denom <= 0 {
            continue;
        }
        let mut cube = 0u64;
        for (i, &v) in support.iter().enumerate() {
            for &w in &support[i + 1..] {
                let bvw = b(v as usize, w);
                if bvw > 0 {
                    cube += 2 * b(u, v) * bvw * b(u, w);
                }
            }
        }
        total += cube as f64 / (2.0 * denom as f64);
    }
    Ok(total / n as f64)
}

/// Global clustering: `3 * triangles / triads`; 0 when there are no triads.
pub fn transitivity(g: &Graph) -> Result<f64, PropertyError> {
    let tri = triangle_counts(&g.as_undirected().clamped())?;
    Ok(transitivity_from_counts(&tri))
}

/// Maximum core number via minimum-degree peeling on the simple graph.
pub fn degeneracy(g: &Graph) -> Result<u64, PropertyError> {
    let und = g.as_undirected().clamped();
    let n = und.n();
    if n == 0 {
        return Ok(0);
    }
    let mut deg: Vec<usize> = und
        .distinct_degree_vector()
        .iter()
        .map(|&d| d as usize)
        .collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_deg + 1];
    for (u, &d) in deg.iter().enumerate() {
        buckets[d].push(u as u32);
    }
    let mut removed = vec![false; n];
    let mut core = 0usize;
    let mut cursor = 0usize;
    for _ in 0..n {
        cursor = cursor.saturating_sub(1);
        // Advance to the lowest bucket holding a live, up-to-date entry.
        loop {
            while let Some(&u) = buckets[cursor].last() {
                if removed[u as usize] || deg[u as usize] != cursor {
                    buckets[cursor].pop();
                } else {
                    break;
                }
            }
            if buckets[cursor].last().is_some() {
                break;
            }
            cursor += 1;
        }
        let u = buckets[cursor].pop().expect("peeling invariant") as usize;
        removed[u] = true;
        core = core.max(cursor);
        for &v in und.neighbor_ids(u) {
            let v = v as usize;
            if !removed[v] && deg[v] > cursor {
                deg[v] -= 1;
                buckets[deg[v]].push(v as u32);
            }
        }
    }
    Ok(core as u64)
}

/// Gini coefficient of the degree distribution via the sorted-degree
/// identity: `G = sum_i (2i - n - 1) d_(i) / (n * sum d)` with 1-based `i`
/// over ascending degrees. Degrees follow `opts` (multiplicities counted by
/// default, optionally augmented with the convolution self-loop).
pub fn gini_degree(g: &Graph, opts: ProfileOptions) -> Result<f64, PropertyError> {
    let n = g.n();
    if n < 1 {
        return Err(PropertyError::TooFewNodes { n, need: 1 });
    }
    if g.m() == 0 {
        return Err(PropertyError::NoEdges);
    }
    let mut deg = if opts.count_multiplicities {
        g.degree_vector(opts.augmented_gini)
    } else {
        let mut d = g.distinct_degree_vector();
        if opts.augmented_gini {
            for v in &mut d {
                *v += 1;
            }
        }
        d
    };
    deg.sort_unstable();
    let total: u128 = deg.iter().map(|&d| d as u128).sum();
    if total == 0 {
        return Err(PropertyError::Undefined("all degrees are zero".into()));
    }
    let mut num: i128 = 0;
    for (i, &d) in deg.iter().enumerate() {
        let coeff = 2 * (i as i128 + 1) - n as i128 - 1;
        num += coeff * d as i128;
    }
    let den = n as i128 * total as i128;
    Ok(num as f64 / den as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn build(n: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::build(n, false, edges.iter().map(|&(u, v)| (u, v, 1)))
            .unwrap()
            .graph
    }

    fn complete(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n as u32 {
            for v in (u + 1)..n as u32 {
                edges.push((u, v));
            }
        }
        build(n, &edges)
    }

    fn star(k: usize) -> Graph {
        let edges: Vec<(u32, u32)> = (1..=k as u32).map(|v| (0, v)).collect();
        build(k + 1, &edges)
    }

    #[test]
    fn density_examples() {
        assert_abs_diff_eq!(edge_density(&complete(3)).unwrap(), 1.0);
        let path = build(3, &[(0, 1), (1, 2)]);
        assert_abs_diff_eq!(edge_density(&path).unwrap(), 2.0 / 3.0, epsilon = 1e-15);
        let empty = build(5, &[]);
        assert_abs_diff_eq!(edge_density(&empty).unwrap(), 0.0);
        assert!(edge_density(&build(1, &[])).is_err());
    }

    #[test]
    fn average_degree_examples() {
        let cycle = build(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let opts = ProfileOptions::default();
        assert_abs_diff_eq!(average_degree(&cycle, opts).unwrap(), 2.0);
        assert_abs_diff_eq!(average_degree(&star(4), opts).unwrap(), 8.0 / 5.0);
        assert_abs_diff_eq!(average_degree(&build(1, &[]), opts).unwrap(), 0.0);
    }

    #[test]
    fn assortativity_examples() {
        // Star: hubs only connect to leaves, perfectly disassortative.
        assert_abs_diff_eq!(degree_assortativity(&star(4)).unwrap(), -1.0);
        // Regular graphs have zero endpoint-degree variance.
        assert!(degree_assortativity(&complete(4)).is_err());
        let two_edges = build(4, &[(0, 1), (2, 3)]);
        assert!(degree_assortativity(&two_edges).is_err());
    }

    #[test]
    fn pseudo_diameter_examples() {
        let p5 = build(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(pseudo_diameter(&p5).unwrap(), 4);
        assert_eq!(pseudo_diameter(&complete(4)).unwrap(), 1);
        // P3 plus a separate edge: largest component decides.
        let two = build(5, &[(0, 1), (1, 2), (3, 4)]);
        assert_eq!(pseudo_diameter(&two).unwrap(), 2);
        assert_eq!(pseudo_diameter(&build(1, &[])).unwrap(), 0);
    }

    #[test]
    fn rslcc_examples() {
        let p3_isolated = build(4, &[(0, 1), (1, 2)]);
        assert_abs_diff_eq!(rslcc(&p3_isolated).unwrap(), 0.75);
        assert_abs_diff_eq!(rslcc(&complete(3)).unwrap(), 1.0);
        assert_abs_diff_eq!(rslcc(&build(5, &[])).unwrap(), 0.2);
    }

    #[test]
    fn clustering_examples() {
        assert_abs_diff_eq!(avg_clustering_coefficient(&complete(3)).unwrap(), 1.0);
        assert_abs_diff_eq!(avg_clustering_coefficient(&star(4)).unwrap(), 0.0);
        // K4 minus an edge: locals are 2/3, 2/3, 1, 1.
        let k4m = build(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_abs_diff_eq!(
            avg_clustering_coefficient(&k4m).unwrap(),
            (2.0 / 3.0 + 2.0 / 3.0 + 1.0 + 1.0) / 4.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn transitivity_examples() {
        assert_abs_diff_eq!(transitivity(&complete(4)).unwrap(), 1.0);
        let p3 = build(3, &[(0, 1), (1, 2)]);
        assert_abs_diff_eq!(transitivity(&p3).unwrap(), 0.0);
        let k4m = build(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_abs_diff_eq!(transitivity(&k4m).unwrap(), 0.75);
    }

    #[test]
    fn degeneracy_examples() {
        assert_eq!(degeneracy(&star(5)).unwrap(), 1);
        assert_eq!(degeneracy(&complete(5)).unwrap(), 4);
        // K4 plus pendant vertex.
        let g = build(5, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (3, 4)]);
        assert_eq!(degeneracy(&g).unwrap(), 3);
        assert_eq!(degeneracy(&build(3, &[])).unwrap(), 0);
    }

    #[test]
    fn gini_examples() {
        let opts = ProfileOptions::default();
        assert_abs_diff_eq!(
            gini_degree(&complete(4), opts).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(gini_degree(&star(4), opts).unwrap(), 0.3, epsilon = 1e-15);
        // Degrees [1, 1, 2, 2].
        let p4 = build(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_abs_diff_eq!(
            gini_degree(&p4, opts).unwrap(),
            1.0 / 6.0,
            epsilon = 1e-15
        );
        assert!(gini_degree(&build(2, &[]), opts).is_err());
    }

    #[test]
    fn gini_counts_multiplicities_by_default() {
        let g = Graph::build(2, false, vec![(0, 1, 2)]).unwrap().graph;
        let opts = ProfileOptions::default();
        assert_abs_diff_eq!(gini_degree(&g, opts).unwrap(), 0.0);
        assert_eq!(g.degree_vector(false), vec![2, 2]);
    }
}
