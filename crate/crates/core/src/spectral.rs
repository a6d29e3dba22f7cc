//! Second Laplacian eigenvalue and the stability-based generalization bound
//! for soft-constrained propagation.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Label, LabelSet};

/// Graphs with fewer nodes use a dense eigensolve.
pub const DENSE_EIGEN_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenConfig {
    pub dense_limit: usize,
    /// Relative tolerance on the Ritz residual.
    pub tolerance: f64,
    pub max_steps: usize,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            dense_limit: DENSE_EIGEN_LIMIT,
            tolerance: 1e-9,
            max_steps: 600,
        }
    }
}

fn laplacian_mul(graph: &Graph, x: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = graph.degree(i) * x[i];
        for &(j, w) in graph.neighbors(i) {
            acc -= w * x[j];
        }
        *o = acc;
    }
}

fn dense_laplacian(graph: &Graph) -> DMatrix<f64> {
    let n = graph.node_count();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = graph.degree(i);
        for &(j, w) in graph.neighbors(i) {
            m[(i, j)] = -w;
        }
    }
    m
}

/// `λ₁` of `L = D − W` with the default configuration.
pub fn second_smallest_eigenvalue(graph: &Graph) -> Result<f64> {
    second_smallest_eigenvalue_with(graph, &EigenConfig::default())
}

pub fn second_smallest_eigenvalue_with(graph: &Graph, config: &EigenConfig) -> Result<f64> {
    let n = graph.node_count();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 nodes for λ₁, got {n}")));
    }
    // the multiplicity of the zero eigenvalue is the number of components
    let components = graph.components();
    if components.iter().any(|&c| c != components[0]) {
        return Ok(0.0);
    }
    let lambda = if n < config.dense_limit {
        let mut values: Vec<f64> = SymmetricEigen::new(dense_laplacian(graph))
            .eigenvalues
            .iter()
            .copied()
            .collect();
        values.sort_by(f64::total_cmp);
        values[1]
    } else {
        lanczos_smallest_deflated(graph, config)
    };
    Ok(lambda.max(0.0))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_out_constant(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Smallest eigenvalue of `L` restricted to the complement of the constant
/// vector, by Lanczos with full reorthogonalization.
fn lanczos_smallest_deflated(graph: &Graph, config: &EigenConfig) -> f64 {
    let n = graph.node_count();
    let max_steps = config.max_steps.min(n - 1).max(1);
    let scale = 2.0 * graph.degrees().iter().copied().fold(0.0, f64::max);
    if scale == 0.0 {
        return 0.0;
    }

    // deterministic start vector with no constant component
    let mut q: Vec<f64> = (0..n)
        .map(|i| ((i as f64 + 1.0) * 0.618_033_988_75).fract() - 0.5)
        .collect();
    project_out_constant(&mut q);
    let nq = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= nq);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut best = f64::INFINITY;
    for step in 0..max_steps {
        laplacian_mul(graph, &basis[step], &mut w);
        let a = dot(&w, &basis[step]);
        alphas.push(a);
        project_out_constant(&mut w);
        for _ in 0..2 {
            for v in &basis {
                let c = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(x, y)| *x -= c * y);
            }
        }
        let b = dot(&w, &w).sqrt();

        let m = alphas.len();
        let t = DMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (idx, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|x, y| x.1.total_cmp(y.1))
            .expect("non-empty tridiagonal");
        best = theta;
        let residual = b * eig.eigenvectors[(m - 1, idx)].abs();
        if residual <= config.tolerance * scale || b <= f64::EPSILON * scale {
            break;
        }
        betas.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    best
}

/// `(t, M, K)`: maximum multiplicity of a sampled vertex, bound on `|y|`,
/// bound on `|f|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FullParams {
    pub t: f64,
    pub m: f64,
    pub k: f64,
}

impl Default for FullParams {
    fn default() -> Self {
        Self { t: 1.0, m: 1.0, k: 1.0 }
    }
}

/// `β`; `None` when `λ₁ ≤ ηt` (the bound is infinite).
pub fn spectral_beta(lambda1: f64, eta: f64, n: usize, params: FullParams) -> Option<f64> {
    let gap = lambda1 - eta * params.t;
    if gap <= 0.0 {
        return None;
    }
    let n = n as f64;
    Some(3.0 * eta * eta * (params.t * n).sqrt() / (gap * gap) + 4.0 * eta * params.m / gap)
}

/// `β + √(2 ln(2/δ)/n) (nβ + (K + M)²)`.
pub fn spectral_rhs(beta: f64, n: usize, delta: f64, params: FullParams) -> f64 {
    let n = n as f64;
    let km = params.k + params.m;
    beta + (2.0 * (2.0 / delta).ln() / n).sqrt() * (n * beta + km * km)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda1: f64,
    pub eta: f64,
    pub n: usize,
    pub delta_conf: f64,
    pub beta: Option<f64>,
    /// `None` when the bound is infinite.
    pub bound: Option<f64>,
    pub bound_infinite: bool,
    pub empirical_risk: f64,
    pub risk: f64,
    pub risk_gap: f64,
    pub full_params: Option<FullParams>,
    pub diagnostics: Vec<String>,
}

/// Empirical risk on the labeled nodes, risk over all nodes, and the bound on
/// their gap.
pub fn spectral_bound(
    graph: &Graph,
    f: &[f64],
    labels: &LabelSet,
    truth: &[Label],
    eta: f64,
    delta_conf: f64,
    full_params: Option<FullParams>,
) -> Result<SpectralReport> {
    let nodes = graph.node_count();
    if f.len() != nodes || truth.len() != nodes {
        return Err(Error::Dimension("prediction or truth length differs from graph".into()));
    }
    labels.check_against(nodes)?;
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(format!("η must be positive and finite, got {eta}")));
    }
    if !(delta_conf > 0.0 && delta_conf < 1.0) {
        return Err(Error::invalid(format!("δ must lie in (0, 1), got {delta_conf}")));
    }
    if let Some(p) = full_params {
        if !(p.t >= 1.0 && p.m >= 0.0 && p.k >= 0.0) || ![p.t, p.m, p.k].iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("full parameters need t ≥ 1, M ≥ 0, K ≥ 0".to_string()));
        }
    }
    let sq = |i: usize| (f[i] - f64::from(truth[i])).powi(2);
    let n = labels.len();
    let empirical_risk = labels.nodes().map(sq).sum::<f64>() / n as f64;
    let risk = (0..nodes).map(sq).sum::<f64>() / nodes as f64;
    let lambda1 = second_smallest_eigenvalue(graph)?;
    let params = full_params.unwrap_or_default();

    let mut diagnostics = Vec::new();
    if n < 4 {
        diagnostics.push(format!("only {n} labeled points; the bound assumes at least 4"));
    }
    let beta = spectral_beta(lambda1, eta, n, params);
    let bound = beta.map(|b| spectral_rhs(b, n, delta_conf, params));
    if beta.is_none() {
        diagnostics.push(format!(
            "λ₁ = {lambda1} does not exceed η·t = {}; bound is infinite",
            eta * params.t
        ));
    }
    Ok(SpectralReport {
        lambda1,
        eta,
        n,
        delta_conf,
        beta,
        bound,
        bound_infinite: bound.is_none(),
        empirical_risk,
        risk,
        risk_gap: (empirical_risk - risk).abs(),
        full_params,
        diagnostics,
    })
}
