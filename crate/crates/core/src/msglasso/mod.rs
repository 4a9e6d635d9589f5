//! Multivariate sparse group lasso on standardized metadata tables.
//!
//! Minimizes
//!
//! ```text
//! (1/2n) ||Y - XB||_F^2  +  lambda1 * sum_ij |B_ij|  +  lambda_g * sum_i ||B_i.||_2
//! ```
//!
//! over the coefficient matrix `B` (p covariates x q responses). Groups are
//! the rows of `B`: one covariate across all responses. The solver is
//! accelerated proximal gradient with a monotone safeguard; convergence is
//! certified by the minimal-subgradient (KKT) residual.

pub mod io;

use ndarray::{Array1, Array2, ArrayViewMut1, Axis};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LassoError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(String),
    #[error("zero-variance column '{0}'")]
    ZeroVariance(String),
    #[error("row names differ between tables; offenders: {0:?}")]
    RowMismatch(Vec<String>),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite value encountered at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("need at least {need} rows, got {got}")]
    TooFewRows { need: usize, got: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Covariate matrix X (datasets x properties) and response matrix Y
/// (datasets x models) with row/column names.
#[derive(Debug, Clone)]
pub struct MetadataTable {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
    pub row_names: Vec<String>,
    pub x_names: Vec<String>,
    pub y_names: Vec<String>,
}

impl MetadataTable {
    pub fn new(
        x: Array2<f64>,
        y: Array2<f64>,
        row_names: Vec<String>,
        x_names: Vec<String>,
        y_names: Vec<String>,
    ) -> Result<Self, LassoError> {
        if x.nrows() != y.nrows() {
            return Err(LassoError::Shape(format!(
                "X has {} rows, Y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.nrows() < 2 {
            return Err(LassoError::TooFewRows {
                need: 2,
                got: x.nrows(),
            });
        }
        if row_names.len() != x.nrows() || x_names.len() != x.ncols() || y_names.len() != y.ncols()
        {
            return Err(LassoError::Shape("name lengths do not match data".into()));
        }
        for names in [&x_names, &y_names] {
            let mut seen = std::collections::HashSet::new();
            for name in names {
                if !seen.insert(name.as_str()) {
                    return Err(LassoError::Invalid(format!("duplicate column '{name}'")));
                }
            }
        }
        Ok(MetadataTable {
            x,
            y,
            row_names,
            x_names,
            y_names,
        })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn q(&self) -> usize {
        self.y.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroVariancePolicy {
    Drop,
    Error,
}

/// Centers and scales applied per column, plus any dropped columns.
#[derive(Debug, Clone, Serialize)]
pub struct Standardization {
    pub x_centers: Vec<f64>,
    pub x_scales: Vec<f64>,
    pub y_centers: Vec<f64>,
    pub y_scales: Vec<f64>,
    pub dropped_x: Vec<String>,
    pub dropped_y: Vec<String>,
}

type StandardizedBlock = (Array2<f64>, Vec<String>, Vec<f64>, Vec<f64>, Vec<String>);

fn standardize_block(
    data: &Array2<f64>,
    names: &[String],
    policy: ZeroVariancePolicy,
) -> Result<StandardizedBlock, LassoError> {
    let n = data.nrows();
    let mut keep_cols = Vec::new();
    let mut centers = Vec::new();
    let mut scales = Vec::new();
    let mut dropped = Vec::new();
    for (j, col) in data.axis_iter(Axis(1)).enumerate() {
        let mean = col.sum() / n as f64;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        let sd = var.sqrt();
        if sd <= 0.0 || !sd.is_finite() {
            match policy {
                ZeroVariancePolicy::Drop => {
                    dropped.push(names[j].clone());
                    continue;
                }
                ZeroVariancePolicy::Error => {
                    return Err(LassoError::ZeroVariance(names[j].clone()))
                }
            }
        }
        keep_cols.push(j);
        centers.push(mean);
        scales.push(sd);
    }
    let mut out = Array2::zeros((n, keep_cols.len()));
    for (k, &j) in keep_cols.iter().enumerate() {
        for i in 0..n {
            out[[i, k]] = (data[[i, j]] - centers[k]) / scales[k];
        }
    }
    let kept_names = keep_cols.iter().map(|&j| names[j].clone()).collect();
    Ok((out, kept_names, centers, scales, dropped))
}

/// Standardize columns of X and Y to mean 0, sample standard deviation 1.
pub fn standardize(
    t: &MetadataTable,
    policy: ZeroVariancePolicy,
) -> Result<(MetadataTable, Standardization), LassoError> {
    let (x, x_names, x_centers, x_scales, dropped_x) = standardize_block(&t.x, &t.x_names, policy)?;
    let (y, y_names, y_centers, y_scales, dropped_y) = standardize_block(&t.y, &t.y_names, policy)?;
    if x.ncols() == 0 || y.ncols() == 0 {
        return Err(LassoError::Invalid(
            "all columns dropped during standardization".into(),
        ));
    }
    Ok((
        MetadataTable::new(x, y, t.row_names.clone(), x_names, y_names)?,
        Standardization {
            x_centers,
            x_scales,
            y_centers,
            y_scales,
            dropped_x,
            dropped_y,
        },
    ))
}

/// Full objective value at `B`.
pub fn objective(x: &Array2<f64>, y: &Array2<f64>, b: &Array2<f64>, l1: f64, lg: f64) -> f64 {
    let n = x.nrows() as f64;
    let resid = y - &x.dot(b);
    let quad = resid.iter().map(|r| r * r).sum::<f64>() / (2.0 * n);
    let ell1: f64 = b.iter().map(|v| v.abs()).sum();
    let group: f64 = b.rows().into_iter().map(|row| row.dot(&row).sqrt()).sum();
    quad + l1 * ell1 + lg * group
}

/// Proximal operator of `t1 ||.||_1 + tg ||.||_2` on one row group:
/// entrywise soft threshold by `t1`, then scale by `max(0, 1 - tg/||.||_2)`.
pub fn prox_sparse_group(mut row: ArrayViewMut1<'_, f64>, t1: f64, tg: f64) {
    let mut norm_sq = 0.0;
    for v in row.iter_mut() {
        *v = soft_threshold(*v, t1);
        norm_sq += *v * *v;
    }
    if norm_sq == 0.0 || tg == 0.0 {
        return;
    }
    let norm = norm_sq.sqrt();
    let scale = (1.0 - tg / norm).max(0.0);
    if scale == 0.0 {
        row.fill(0.0);
    } else {
        row.mapv_inplace(|v| v * scale);
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Largest eigenvalue of `X^T X` by power iteration (deterministic start).
fn spectral_bound(x: &Array2<f64>) -> f64 {
    let p = x.ncols();
    if p == 0 {
        return 0.0;
    }
    let m = x.t().dot(x);
    let mut v = Array1::from_elem(p, 1.0 / (p as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..500 {
        let mv = m.dot(&v);
        let norm = mv.dot(&mv).sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next = &mv / norm;
        let next_lambda = next.dot(&m.dot(&next));
        let done = (next_lambda - lambda).abs() <= 1e-13 * next_lambda.abs();
        v = next;
        lambda = next_lambda;
        if done {
            break;
        }
    }
    lambda
}

/// Minimal-subgradient residual of the full objective at `B`, reported as the
/// max over entries of the minimizing subgradient's absolute value.
pub fn kkt_residual(x: &Array2<f64>, y: &Array2<f64>, b: &Array2<f64>, l1: f64, lg: f64) -> f64 {
    let n = x.nrows() as f64;
    let grad = x.t().dot(&(x.dot(b) - y)) / n;
    let mut worst: f64 = 0.0;
    for (i, row) in b.rows().into_iter().enumerate() {
        let row_norm = row.dot(&row).sqrt();
        if row_norm > 0.0 {
            for (j, &bij) in row.iter().enumerate() {
                let g = grad[[i, j]];
                let r = if bij != 0.0 {
                    (g + l1 * bij.signum() + lg * bij / row_norm).abs()
                } else {
                    (g.abs() - l1).max(0.0)
                };
                worst = worst.max(r);
            }
        } else {
            // Zero row: minimize over the l1 sign box first, then the group ball.
            let soft: Vec<f64> = (0..b.ncols())
                .map(|j| soft_threshold(grad[[i, j]], l1))
                .collect();
            let norm = soft.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm > lg {
                let shrink = 1.0 - lg / norm;
                for v in &soft {
                    worst = worst.max((v * shrink).abs());
                }
            }
        }
    }
    worst
}

/// Smallest `lambda1` (with `lambda_g = ratio * lambda1`) for which `B = 0`
/// is optimal.
pub fn lambda_max(x: &Array2<f64>, y: &Array2<f64>, ratio: f64) -> f64 {
    let n = x.nrows() as f64;
    let c = x.t().dot(y) / n;
    if ratio == 0.0 {
        return c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    }
    // Per row, find the smallest l1 with ||soft(c_i, l1)||_2 <= ratio * l1;
    // the left side is non-increasing in l1 and the right side increasing.
    let mut worst: f64 = 0.0;
    for row in c.rows() {
        let hi0 = row.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if hi0 == 0.0 {
            continue;
        }
        let excess = |l1: f64| -> f64 {
            let norm = row
                .iter()
                .map(|&v| {
                    let s = soft_threshold(v, l1);
                    s * s
                })
                .sum::<f64>()
                .sqrt();
            norm - ratio * l1
        };
        let (mut lo, mut hi) = (0.0f64, hi0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if excess(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        worst = worst.max(hi);
    }
    worst
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Relative objective-change trigger for the convergence check.
    pub tol: f64,
    pub max_iter: usize,
    /// Minimal-subgradient residual required to declare convergence.
    pub kkt_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 200_000,
            kkt_tol: 1e-8,
        }
    }
}

/// Solver output: coefficients plus diagnostics.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub b: Array2<f64>,
    pub lambda1: f64,
    pub lambda_g: f64,
    pub objective_trace: Vec<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solve one instance. `t` is expected to be standardized already.
pub fn solve(
    t: &MetadataTable,
    lambda1: f64,
    lambda_g: f64,
    opts: SolveOptions,
) -> Result<CoefficientMatrix, LassoError> {
    solve_warm(t, lambda1, lambda_g, opts, None)
}

fn prox_step(z: &Array2<f64>, grad: &Array2<f64>, step: f64, l1: f64, lg: f64) -> Array2<f64> {
    let mut next = z - &(grad * step);
    for row in next.rows_mut() {
        prox_sparse_group(row, step * l1, step * lg);
    }
    next
}

fn solve_warm(
    t: &MetadataTable,
    lambda1: f64,
    lambda_g: f64,
    opts: SolveOptions,
    warm: Option<&Array2<f64>>,
) -> Result<CoefficientMatrix, LassoError> {
    if lambda1 < 0.0 || lambda_g < 0.0 {
        return Err(LassoError::Invalid("penalties must be non-negative".into()));
    }
    let (x, y) = (&t.x, &t.y);
    let (p, q) = (t.p(), t.q());
    let lipschitz = spectral_bound(x) / t.n() as f64;
    let mut b = match warm {
        Some(w) => w.clone(),
        None => Array2::zeros((p, q)),
    };
    let mut obj = objective(x, y, &b, lambda1, lambda_g);
    let mut trace = vec![obj];
    if lipschitz <= 0.0 {
        // Degenerate design (X = 0): B = 0 is optimal.
        return Ok(CoefficientMatrix {
            b: Array2::zeros((p, q)),
            lambda1,
            lambda_g,
            objective_trace: trace,
            kkt_residual: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let base_step = 1.0 / (lipschitz * (1.0 + 1e-9));
    let grad_at = |m: &Array2<f64>| x.t().dot(&(x.dot(m) - y)) / t.n() as f64;

    let mut b_prev = b.clone();
    let mut momentum = 1.0f64;
    let mut converged = false;
    let mut kkt = f64::INFINITY;
    let mut iterations = 0;
    let mut kkt_cooldown = 0usize;
    // Near the optimum acceleration cycles at floating-point noise level;
    // after a failed KKT check we polish with plain proximal steps instead.
    let mut polish = false;

    for iter in 0..opts.max_iter {
        iterations = iter + 1;
        let beta = if polish {
            0.0
        } else {
            let next = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
            let beta = (momentum - 1.0) / next;
            momentum = next;
            beta
        };
        let z = &b + &((&b - &b_prev) * beta);
        let mut candidate = prox_step(&z, &grad_at(&z), base_step, lambda1, lambda_g);
        let mut cand_obj = objective(x, y, &candidate, lambda1, lambda_g);
        if !cand_obj.is_finite() {
            return Err(LassoError::NonFinite { iteration: iter });
        }
        // Monotone safeguard with ulp-level slack: the objective is flat to
        // floating point near the optimum and strict rejection would freeze
        // the iterates there.
        let slack = 1e-14 * (1.0 + obj.abs());
        if cand_obj > obj + slack {
            momentum = 1.0;
            let mut step = base_step;
            let grad_b = grad_at(&b);
            loop {
                candidate = prox_step(&b, &grad_b, step, lambda1, lambda_g);
                cand_obj = objective(x, y, &candidate, lambda1, lambda_g);
                if !cand_obj.is_finite() {
                    return Err(LassoError::NonFinite { iteration: iter });
                }
                if cand_obj <= obj + slack || step < base_step * 1e-18 {
                    break;
                }
                step *= 0.5;
            }
            if cand_obj > obj + slack {
                // Numerically stationary.
                candidate = b.clone();
                cand_obj = obj;
            }
        }
        let stationary = polish && candidate == b;
        b_prev = std::mem::replace(&mut b, candidate);
        let change = obj - cand_obj;
        obj = cand_obj;
        trace.push(obj);

        if stationary {
            // Bitwise fixpoint of the plain proximal map: nothing further to gain.
            kkt = kkt_residual(x, y, &b, lambda1, lambda_g);
            converged = kkt <= opts.kkt_tol;
            break;
        }
        let rel = change.abs() / obj.abs().max(1e-30);
        if rel < opts.tol && kkt_cooldown == 0 {
            kkt = kkt_residual(x, y, &b, lambda1, lambda_g);
            if kkt <= opts.kkt_tol {
                converged = true;
                break;
            }
            polish = true;
            momentum = 1.0;
            kkt_cooldown = 25;
        }
        kkt_cooldown = kkt_cooldown.saturating_sub(1);
    }
    if !converged {
        kkt = kkt_residual(x, y, &b, lambda1, lambda_g);
        converged = kkt <= opts.kkt_tol;
    }
    Ok(CoefficientMatrix {
        b,
        lambda1,
        lambda_g,
        objective_trace: trace,
        kkt_residual: kkt,
        iterations,
        converged,
    })
}

/// One point on the regularization path.
#[derive(Debug, Clone)]
pub struct PathPoint {
    pub lambda1: f64,
    pub lambda_g: f64,
    pub support_rows: usize,
    pub support_entries: usize,
    pub solution: CoefficientMatrix,
}

/// Geometric grid of `k` `(lambda1, lambda_g = ratio * lambda1)` pairs from
/// `lambda_max` down to `lambda_max * min_ratio`, solved with warm starts.
pub fn regularization_path(
    t: &MetadataTable,
    ratio: f64,
    k: usize,
    min_ratio: f64,
    opts: SolveOptions,
) -> Result<Vec<PathPoint>, LassoError> {
    if k == 0 {
        return Err(LassoError::Invalid("path needs at least one point".into()));
    }
    let lmax = lambda_max(&t.x, &t.y, ratio) * (1.0 + 1e-9);
    let mut points = Vec::with_capacity(k);
    let mut warm: Option<Array2<f64>> = None;
    for j in 0..k {
        let l1 = if k == 1 {
            lmax
        } else {
            lmax * min_ratio.powf(j as f64 / (k as f64 - 1.0))
        };
        let sol = solve_warm(t, l1, ratio * l1, opts, warm.as_ref())?;
        warm = Some(sol.b.clone());
        let support_entries = sol.b.iter().filter(|v| **v != 0.0).count();
        let support_rows = sol
            .b
            .rows()
            .into_iter()
            .filter(|r| r.iter().any(|v| *v != 0.0))
            .count();
        points.push(PathPoint {
            lambda1: l1,
            lambda_g: ratio * l1,
            support_rows,
            support_entries,
            solution: sol,
        });
    }
    Ok(points)
}

/// Salience classification of one covariate row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Salience {
    /// Nonzero coefficient for every response.
    WidelyInfluential,
    /// Nonzero for more than half of the responses.
    NarrowlyInfluential,
    /// Nonzero somewhere, but for at most half of the responses.
    Sparse,
    /// Entire row zero.
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct SalientRow {
    pub property: String,
    pub salience: Salience,
    pub nonzero: usize,
    /// One of `+`, `-`, `0` per response column.
    pub signs: Vec<char>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SalientReport {
    pub responses: Vec<String>,
    pub rows: Vec<SalientRow>,
}

/// Classify each covariate row of the fitted coefficients.
pub fn salient_report(
    cm: &CoefficientMatrix,
    x_names: &[String],
    y_names: &[String],
) -> SalientReport {
    let q = cm.b.ncols();
    let rows = cm
        .b
        .rows()
        .into_iter()
        .enumerate()
        .map(|(i, row)| {
            let nonzero = row.iter().filter(|v| **v != 0.0).count();
            let salience = if nonzero == q && q > 0 {
                Salience::WidelyInfluential
            } else if 2 * nonzero > q {
                Salience::NarrowlyInfluential
            } else if nonzero > 0 {
                Salience::Sparse
            } else {
                Salience::None
            };
            let signs = row
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        '+'
                    } else if v < 0.0 {
                        '-'
                    } else {
                        '0'
                    }
                })
                .collect();
            SalientRow {
                property: x_names[i].clone(),
                salience,
                nonzero,
                signs,
            }
        })
        .collect();
    SalientReport {
        responses: y_names.to_vec(),
        rows,
    }
}

/// Leave-one-dataset-out mean squared prediction error per lambda.
#[derive(Debug, Clone, Serialize)]
pub struct CvPoint {
    pub lambda1: f64,
    pub lambda_g: f64,
    pub mean_squared_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CvReport {
    pub points: Vec<CvPoint>,
    pub best_index: usize,
}

/// Leave-one-out cross-validation over a shared lambda grid. Each fold is
/// standardized on its own training rows; errors are measured in the fold's
/// standardized response scale.
pub fn cross_validate(
    t: &MetadataTable,
    ratio: f64,
    k: usize,
    min_ratio: f64,
    opts: SolveOptions,
) -> Result<CvReport, LassoError> {
    let n = t.n();
    if n < 3 {
        return Err(LassoError::TooFewRows { need: 3, got: n });
    }
    let (std_all, _) = standardize(t, ZeroVariancePolicy::Drop)?;
    let lmax = lambda_max(&std_all.x, &std_all.y, ratio) * (1.0 + 1e-9);
    let lambdas: Vec<f64> = (0..k)
        .map(|j| {
            if k == 1 {
                lmax
            } else {
                lmax * min_ratio.powf(j as f64 / (k as f64 - 1.0))
            }
        })
        .collect();
    let mut errors = vec![0.0f64; k];
    for holdout in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&i| i != holdout).collect();
        let sub = MetadataTable::new(
            t.x.select(Axis(0), &keep),
            t.y.select(Axis(0), &keep),
            keep.iter().map(|&i| t.row_names[i].clone()).collect(),
            t.x_names.clone(),
            t.y_names.clone(),
        )?;
        let (std_sub, info) = standardize(&sub, ZeroVariancePolicy::Drop)?;
        // Map the held-out row into the fold's standardized coordinates.
        let x_keep: Vec<usize> = t
            .x_names
            .iter()
            .enumerate()
            .filter(|(_, name)| !info.dropped_x.contains(name))
            .map(|(j, _)| j)
            .collect();
        let y_keep: Vec<usize> = t
            .y_names
            .iter()
            .enumerate()
            .filter(|(_, name)| !info.dropped_y.contains(name))
            .map(|(j, _)| j)
            .collect();
        let xh: Array1<f64> = x_keep
            .iter()
            .enumerate()
            .map(|(kx, &j)| (t.x[[holdout, j]] - info.x_centers[kx]) / info.x_scales[kx])
            .collect();
        let yh: Array1<f64> = y_keep
            .iter()
            .enumerate()
            .map(|(ky, &j)| (t.y[[holdout, j]] - info.y_centers[ky]) / info.y_scales[ky])
            .collect();
        let mut warm: Option<Array2<f64>> = None;
        for (j, &l1) in lambdas.iter().enumerate() {
            let sol = solve_warm(&std_sub, l1, ratio * l1, opts, warm.as_ref())?;
            warm = Some(sol.b.clone());
            let pred = sol.b.t().dot(&xh);
            let err: f64 = yh
                .iter()
                .zip(pred.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            errors[j] += err / yh.len() as f64;
        }
    }
    let points: Vec<CvPoint> = lambdas
        .iter()
        .zip(errors.iter())
        .map(|(&l1, &e)| CvPoint {
            lambda1: l1,
            lambda_g: ratio * l1,
            mean_squared_error: e / n as f64,
        })
        .collect();
    let best_index = points
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.mean_squared_error.total_cmp(&b.1.mean_squared_error))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(CvReport { points, best_index })
}
