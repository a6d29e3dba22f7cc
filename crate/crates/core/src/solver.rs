//! Label propagation with a per-node prior.
//!
//! The hard-constrained problem minimizes
//!
//! ```text
//! S(f) + Σᵢ μᵢ (fᵢ − hᵢ)²      subject to fᵢ = yᵢ on labeled nodes,
//! ```
//!
//! where `S(f) = Σ_{edges} wᵢⱼ (fᵢ − fⱼ)²` counts each undirected edge once.
//! Its stationarity condition on an unlabeled node is the averaging update
//! `fᵢ = (Σⱼ wᵢⱼ fⱼ + μᵢ hᵢ) / (Σⱼ wᵢⱼ + μᵢ)`, which the iterative method
//! applies directly and the direct method solves as one linear system.
//!
//! Unlabeled nodes that cannot reach a labeled node and carry no prior
//! weight anywhere in their component have no determined value; they are
//! filled with [`SolverConfig::unreachable_fill`] and flagged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, LabelSet};
use crate::linalg::SpdSystem;

/// Prior prediction `h` and regularization weight `μ` for every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorField {
    h: Vec<f64>,
    mu: Vec<f64>,
}

impl PriorField {
    pub fn new(h: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if h.len() != mu.len() {
            return Err(Error::Dimension(format!(
                "prior has {} values but {} weights",
                h.len(),
                mu.len()
            )));
        }
        for (i, (&hi, &mi)) in h.iter().zip(&mu).enumerate() {
            if !(0.0..=1.0).contains(&hi) {
                return Err(Error::invalid(format!("prior h[{i}] = {hi} outside [0, 1]")));
            }
            if !(mi.is_finite() && mi >= 0.0) {
                return Err(Error::invalid(format!(
                    "prior weight mu[{i}] = {mi} must be finite and >= 0"
                )));
            }
        }
        Ok(Self { h, mu })
    }

    pub fn uniform(node_count: usize, h: f64, mu: f64) -> Result<Self> {
        Self::new(vec![h; node_count], vec![mu; node_count])
    }

    /// `h ≡ 0.5`, `μ ≡ 0`: no prior information.
    pub fn uninformative(node_count: usize) -> Self {
        Self {
            h: vec![0.5; node_count],
            mu: vec![0.0; node_count],
        }
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn len(&self) -> usize {
        self.h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h.is_empty()
    }

    /// The common weight when every node has the same `μ`.
    pub fn constant_mu(&self) -> Option<f64> {
        let first = *self.mu.first()?;
        self.mu.iter().all(|&m| m == first).then_some(first)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeFlag {
    Ok,
    Unreachable,
    Nonconverged,
}

impl NodeFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeFlag::Ok => "ok",
            NodeFlag::Unreachable => "unreachable",
            NodeFlag::Nonconverged => "nonconverged",
        }
    }
}

impl std::str::FromStr for NodeFlag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ok" => Ok(NodeFlag::Ok),
            "unreachable" => Ok(NodeFlag::Unreachable),
            "nonconverged" => Ok(NodeFlag::Nonconverged),
            other => Err(Error::invalid(format!("unknown node flag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    #[default]
    Direct,
    Iterative,
}

/// Scores per node plus solver metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub values: Vec<f64>,
    pub flags: Vec<NodeFlag>,
    pub method: String,
    pub iterations: usize,
    /// Max-norm of the fixed-point residual over solved unlabeled nodes.
    pub residual: f64,
    pub converged: bool,
}

impl Prediction {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub method: SolveMethod,
    pub max_iterations: usize,
    pub tolerance: f64,
    /// Value given to undetermined nodes; `None` turns them into an error.
    pub unreachable_fill: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            method: SolveMethod::Direct,
            max_iterations: 10_000,
            tolerance: 1e-8,
            unreachable_fill: Some(0.5),
        }
    }
}

impl SolverConfig {
    pub fn iterative() -> Self {
        Self {
            method: SolveMethod::Iterative,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(Error::invalid(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        if let Some(fill) = self.unreachable_fill {
            if !(0.0..=1.0).contains(&fill) {
                return Err(Error::invalid(format!("unreachable_fill {fill} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

fn check_sizes(graph: &Graph, labels: &LabelSet, prior: &PriorField) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    labels.check_against(graph.node_count())?;
    if prior.len() != graph.node_count() {
        return Err(Error::Dimension(format!(
            "prior covers {} nodes, graph has {}",
            prior.len(),
            graph.node_count()
        )));
    }
    Ok(())
}

/// Minimizer of the prior-regularized objective under hard label constraints.
pub fn solve_with_prior(
    graph: &Graph,
    labels: &LabelSet,
    prior: &PriorField,
    config: &SolverConfig,
) -> Result<Prediction> {
    check_sizes(graph, labels, prior)?;
    config.validate()?;

    let n = graph.node_count();
    let fixed = labels.to_dense(n);
    let anchored = graph.reachable_from(labels.nodes().chain((0..n).filter(|&i| prior.mu[i] > 0.0)));

    let mut values = vec![0.0; n];
    let mut flags = vec![NodeFlag::Ok; n];
    // position of each solved node in the unknown vector
    let mut slot = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for i in 0..n {
        match fixed[i] {
            Some(y) => values[i] = f64::from(y),
            None if anchored[i] => {
                slot[i] = unknowns.len();
                unknowns.push(i);
            }
            None => match config.unreachable_fill {
                Some(fill) => {
                    values[i] = fill;
                    flags[i] = NodeFlag::Unreachable;
                }
                None => return Err(Error::Singular { node: i }),
            },
        }
    }

    let (iterations, converged) = match config.method {
        SolveMethod::Direct => {
            let mut diag = Vec::with_capacity(unknowns.len());
            let mut off = Vec::with_capacity(unknowns.len());
            let mut rhs = Vec::with_capacity(unknowns.len());
            for &i in &unknowns {
                diag.push(graph.degree(i) + prior.mu[i]);
                let mut row = Vec::new();
                let mut b = prior.mu[i] * prior.h[i];
                for &(j, w) in graph.neighbors(i) {
                    match fixed[j] {
                        Some(y) => b += w * f64::from(y),
                        None => row.push((slot[j], -w)),
                    }
                }
                off.push(row);
                rhs.push(b);
            }
            let (x, iters) = SpdSystem::new(diag, off).solve(&rhs);
            for (&i, xi) in unknowns.iter().zip(x) {
                values[i] = xi;
            }
            (iters, true)
        }
        SolveMethod::Iterative => {
            for &i in &unknowns {
                values[i] = if prior.mu[i] > 0.0 { prior.h[i] } else { 0.5 };
            }
            let mut converged = false;
            let mut sweeps = 0;
            while sweeps < config.max_iterations {
                sweeps += 1;
                for &i in &unknowns {
                    values[i] = averaged_update(graph, prior, &values, i);
                }
                if residual_over(graph, prior, &values, &unknowns) < config.tolerance {
                    converged = true;
                    break;
                }
            }
            (sweeps, converged)
        }
    };

    if !converged {
        for &i in &unknowns {
            flags[i] = NodeFlag::Nonconverged;
        }
    }
    let residual = residual_over(graph, prior, &values, &unknowns);
    Ok(Prediction {
        values,
        flags,
        method: match config.method {
            SolveMethod::Direct => "direct",
            SolveMethod::Iterative => "iterative",
        }
        .to_string(),
        iterations,
        residual,
        converged,
    })
}

fn averaged_update(graph: &Graph, prior: &PriorField, f: &[f64], i: usize) -> f64 {
    let num: f64 = graph.neighbors(i).iter().map(|&(j, w)| w * f[j]).sum::<f64>() + prior.mu[i] * prior.h[i];
    num / (graph.degree(i) + prior.mu[i])
}

fn residual_over(graph: &Graph, prior: &PriorField, f: &[f64], nodes: &[usize]) -> f64 {
    nodes
        .iter()
        .map(|&i| (f[i] - averaged_update(graph, prior, f, i)).abs())
        .fold(0.0, f64::max)
}

/// Largest violation of the averaging update over unlabeled nodes that have
/// at least one edge or a positive prior weight.
pub fn fixed_point_residual(graph: &Graph, labels: &LabelSet, prior: &PriorField, f: &[f64]) -> f64 {
    let fixed = labels.to_dense(graph.node_count());
    let nodes: Vec<usize> = (0..graph.node_count())
        .filter(|&i| fixed[i].is_none() && graph.degree(i) + prior.mu[i] > 0.0)
        .collect();
    residual_over(graph, prior, f, &nodes)
}

/// Plain label propagation: `h ≡ 0.5`, `μ ≡ 0`.
pub fn solve_standard(graph: &Graph, labels: &LabelSet, config: &SolverConfig) -> Result<Prediction> {
    solve_with_prior(graph, labels, &PriorField::uninformative(graph.node_count()), config)
}

/// Soft-constrained propagation: minimizes
/// `Σᵢⱼ wᵢⱼ (fᵢ − fⱼ)² + η Σ_{i labeled} (fᵢ − yᵢ)²` with the double sum over
/// ordered pairs. Components without a labeled node are set to 0.5 and
/// flagged unreachable.
pub fn solve_soft(graph: &Graph, labels: &LabelSet, eta: f64) -> Result<Prediction> {
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid(format!("eta must be positive, got {eta}")));
    }
    if labels.is_empty() {
        return Err(Error::EmptyLabels);
    }
    let n = graph.node_count();
    labels.check_against(n)?;
    let fixed = labels.to_dense(n);
    let reached = graph.reachable_from(labels.nodes());

    let mut values = vec![0.5; n];
    let mut flags = vec![NodeFlag::Ok; n];
    let mut slot = vec![usize::MAX; n];
    let mut unknowns = Vec::new();
    for i in 0..n {
        if reached[i] {
            slot[i] = unknowns.len();
            unknowns.push(i);
        } else {
            flags[i] = NodeFlag::Unreachable;
        }
    }

    let mut diag = Vec::with_capacity(unknowns.len());
    let mut off = Vec::with_capacity(unknowns.len());
    let mut rhs = Vec::with_capacity(unknowns.len());
    for &i in &unknowns {
        let penalty = if fixed[i].is_some() { eta } else { 0.0 };
        diag.push(2.0 * graph.degree(i) + penalty);
        off.push(graph.neighbors(i).iter().map(|&(j, w)| (slot[j], -2.0 * w)).collect());
        rhs.push(fixed[i].map_or(0.0, |y| eta * f64::from(y)));
    }
    let (x, iterations) = SpdSystem::new(diag, off).solve(&rhs);
    for (&i, xi) in unknowns.iter().zip(x) {
        values[i] = xi;
    }
    let residual = soft_stationarity_residual(graph, labels, eta, &values, &unknowns);
    Ok(Prediction {
        values,
        flags,
        method: "soft".to_string(),
        iterations,
        residual,
        converged: true,
    })
}

fn soft_stationarity_residual(graph: &Graph, labels: &LabelSet, eta: f64, f: &[f64], nodes: &[usize]) -> f64 {
    nodes
        .iter()
        .map(|&i| {
            let smooth: f64 = graph.neighbors(i).iter().map(|&(j, w)| 2.0 * w * (f[i] - f[j])).sum();
            let pull = labels.get(i).map_or(0.0, |y| eta * (f[i] - f64::from(y)));
            (smooth + pull).abs()
        })
        .fold(0.0, f64::max)
}

/// `S(f) + Σᵢ μᵢ (fᵢ − hᵢ)²`, requiring `f` to satisfy the label constraints.
pub fn objective_value(graph: &Graph, labels: &LabelSet, prior: &PriorField, f: &[f64]) -> Result<f64> {
    if f.len() != graph.node_count() || prior.len() != graph.node_count() {
        return Err(Error::Dimension("prediction, prior and graph sizes differ".into()));
    }
    for &(i, y) in labels.entries() {
        if f[i] != f64::from(y) {
            return Err(Error::invalid(format!(
                "prediction {} on labeled node {i} violates its label {y}",
                f[i]
            )));
        }
    }
    let prior_term: f64 = f
        .iter()
        .zip(prior.h.iter().zip(&prior.mu))
        .map(|(&fi, (&h, &mu))| mu * (fi - h) * (fi - h))
        .sum();
    Ok(graph.smoothness(f) + prior_term)
}

/// Ordered-pair smoothness plus the `η`-weighted label penalty.
pub fn soft_objective(graph: &Graph, labels: &LabelSet, eta: f64, f: &[f64]) -> f64 {
    let penalty: f64 = labels
        .entries()
        .iter()
        .map(|&(i, y)| (f[i] - f64::from(y)).powi(2))
        .sum();
    2.0 * graph.smoothness(f) + eta * penalty
}
