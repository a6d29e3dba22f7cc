//! Per-neighborhood error diagnostics for prior-regularized propagation.
//!
//! Nodes are layered by hop distance to the labeled set (`𝒩₀` is the labeled
//! set itself). For each hop `k ≥ 1` this module measures how edge weight
//! flows into, within, and out of `𝒩ₖ`, how smooth the true labels are
//! there, and how wrong the prior is, and combines them into an upper bound
//! on the average error of the optimal prediction on `𝒩ₖ`:
//!
//! ```text
//! cₖ = (sₖ + Σ_{𝒩ₖ} μᵢ|hᵢ − yᵢ|) / (C_in(k) + Σ_{𝒩ₖ} μᵢ)
//! γₖ = C_out(k) / (C_in(k) + Σ_{𝒩ₖ} μᵢ)
//! dₖ = Σ_{i=k}^{l} cᵢ Π_{j=k}^{i−1} γⱼ
//! Eₖ ≤ (1/aₖ) Σ_{i=1}^{k} dᵢ Π_{j=i}^{k−1} δⱼ,      δⱼ = bⱼ / aⱼ
//! ```
//!
//! where `aₖ` and `bₖ` compare the flow-weighted in/out errors with the plain
//! average error `Eₖ` and are measured from the solved prediction.
//!
//! All flow sums run over ordered pairs `(i, j)` with `i` in the hop under
//! consideration, so an edge inside a hop contributes to its between-flow
//! twice.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Label, LabelSet, NeighborhoodPartition};
use crate::solver::{solve_with_prior, NodeFlag, Prediction, PriorField, SolverConfig};

/// Label of the summation convention, carried in serialized reports.
pub const PAIR_CONVENTION: &str = "ordered-pairs";

/// Slack allowed when comparing a measured error with its bound.
pub const BOUND_SLACK: f64 = 1e-10;

/// Default slack for the inequality audit.
pub const AUDIT_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowProfile {
    /// `|𝒩ₖ|` for `k = 0..=l`.
    pub sizes: Vec<usize>,
    pub c_in: Vec<f64>,
    pub c_bet: Vec<f64>,
    pub c_out: Vec<f64>,
}

impl FlowProfile {
    pub fn max_hop(&self) -> usize {
        self.sizes.len() - 1
    }
}

fn mismatch(msg: impl Into<String>) -> Error {
    Error::Dimension(format!("partition does not match graph: {}", msg.into()))
}

fn check_partition(graph: &Graph, partition: &NeighborhoodPartition) -> Result<()> {
    if partition.node_count() != graph.node_count() {
        return Err(mismatch(format!(
            "{} nodes in partition, {} in graph",
            partition.node_count(),
            graph.node_count()
        )));
    }
    Ok(())
}

/// In-, between- and out-flow of every hop.
pub fn compute_flows(graph: &Graph, partition: &NeighborhoodPartition) -> Result<FlowProfile> {
    check_partition(graph, partition)?;
    let hops = partition.max_hop() + 1;
    let mut flows = FlowProfile {
        sizes: partition.hops().iter().map(Vec::len).collect(),
        c_in: vec![0.0; hops],
        c_bet: vec![0.0; hops],
        c_out: vec![0.0; hops],
    };
    // one pass over undirected edges so that C_out(k) and C_in(k+1) receive
    // the same additions in the same order
    for (i, j, w) in graph.edges() {
        match (partition.hop_of(i), partition.hop_of(j)) {
            (None, None) => {}
            (Some(a), Some(b)) if a == b => {
                flows.c_bet[a] += w;
                flows.c_bet[a] += w;
            }
            (Some(a), Some(b)) if a.abs_diff(b) == 1 => {
                let (lo, hi) = (a.min(b), a.max(b));
                flows.c_out[lo] += w;
                flows.c_in[hi] += w;
            }
            _ => return Err(mismatch(format!("edge ({i}, {j}) skips a hop"))),
        }
    }
    Ok(flows)
}

/// `(C_in + C_out) / (C_in + C_bet + C_out)`; `None` for an isolated hop.
pub fn conductance(flows: &FlowProfile, k: usize) -> Option<f64> {
    let boundary = flows.c_in[k] + flows.c_out[k];
    let total = boundary + flows.c_bet[k];
    (total > 0.0).then(|| boundary / total)
}

/// `C_out(k) / (C_in(k) + Σ_{𝒩ₖ} μᵢ)`.
pub fn gamma(flows: &FlowProfile, mu_total: f64, k: usize) -> Result<f64> {
    let denom = flows.c_in[k] + mu_total;
    if denom <= 0.0 {
        return Err(Error::ZeroDenominator(format!("out/in flow ratio of hop {k}")));
    }
    Ok(flows.c_out[k] / denom)
}

/// `Σ_{i∈𝒩ₖ} Σⱼ wᵢⱼ |yⱼ − yᵢ|` under the true labels.
pub fn smoothness(graph: &Graph, truth: &[Label], partition: &NeighborhoodPartition, k: usize) -> f64 {
    partition
        .hop(k)
        .iter()
        .map(|&i| {
            graph
                .neighbors(i)
                .iter()
                .filter(|&&(j, _)| truth[j] != truth[i])
                .fold(0.0, |acc, &(_, w)| acc + w)
        })
        .fold(0.0, |acc, s| acc + s)
}

/// Mean `|hᵢ − yᵢ|` over `𝒩ₖ`.
pub fn prior_error(prior: &PriorField, truth: &[Label], partition: &NeighborhoodPartition, k: usize) -> f64 {
    let hop = partition.hop(k);
    if hop.is_empty() {
        return 0.0;
    }
    hop.iter()
        .map(|&i| (prior.h()[i] - f64::from(truth[i])).abs())
        .sum::<f64>()
        / hop.len() as f64
}

/// Measured errors of a prediction on one hop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopErrors {
    /// Mean `|fᵢ − yᵢ|` over the hop.
    pub mean: f64,
    /// Flow-weighted error sums `Σ wᵢⱼ |fᵢ − yᵢ|` toward the previous hop,
    /// within the hop, and toward the next hop.
    pub in_sum: f64,
    pub bet_sum: f64,
    pub out_sum: f64,
    pub e_in: Option<f64>,
    pub e_bet: Option<f64>,
    pub e_out: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Average, in-, between- and out-errors of `f` for every hop `0..=l`.
pub fn neighborhood_errors(
    graph: &Graph,
    f: &[f64],
    truth: &[Label],
    partition: &NeighborhoodPartition,
) -> Result<Vec<HopErrors>> {
    check_partition(graph, partition)?;
    if f.len() != graph.node_count() || truth.len() != graph.node_count() {
        return Err(Error::Dimension("prediction or truth length differs from graph".into()));
    }
    let flows = compute_flows(graph, partition)?;
    let err = |i: usize| (f[i] - f64::from(truth[i])).abs();
    let mut out = Vec::with_capacity(flows.sizes.len());
    for (k, hop) in partition.hops().iter().enumerate() {
        let (mut in_sum, mut bet_sum, mut out_sum) = (0.0, 0.0, 0.0);
        for &i in hop {
            for &(j, w) in graph.neighbors(i) {
                match partition.hop_of(j) {
                    Some(h) if h + 1 == k => in_sum += w * err(i),
                    Some(h) if h == k => bet_sum += w * err(i),
                    Some(h) if h == k + 1 => out_sum += w * err(i),
                    _ => {}
                }
            }
        }
        let mean = hop.iter().map(|&i| err(i)).sum::<f64>() / hop.len() as f64;
        let e_in = ratio(in_sum, flows.c_in[k]);
        let e_bet = ratio(bet_sum, flows.c_bet[k]);
        let e_out = ratio(out_sum, flows.c_out[k]);
        let rel = |e: Option<f64>| e.and_then(|e| ratio(e, mean));
        out.push(HopErrors {
            mean,
            in_sum,
            bet_sum,
            out_sum,
            e_in,
            e_bet,
            e_out,
            a: rel(e_in),
            b: rel(e_out),
        });
    }
    Ok(out)
}

/// Diagnostics and bound for one hop `k ≥ 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopBound {
    pub k: usize,
    pub size: usize,
    pub c_in: f64,
    pub c_bet: f64,
    pub c_out: f64,
    pub conductance: Option<f64>,
    pub gamma: f64,
    pub smoothness: f64,
    pub prior_error: f64,
    /// `Σ_{𝒩ₖ} μᵢ`.
    pub mu_total: f64,
    /// `Σ_{𝒩ₖ} μᵢ |hᵢ − yᵢ|`.
    pub mu_prior_error: f64,
    pub c: f64,
    pub d: f64,
    pub error: f64,
    pub e_in: Option<f64>,
    pub e_bet: Option<f64>,
    pub e_out: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub delta: Option<f64>,
    /// `Σ_{i≤k} dᵢ`.
    pub informal_bound: f64,
    /// Full bound with measured `aₖ`, `δⱼ`; equals the informal bound when
    /// `aₖ` is undefined.
    pub exact_bound: f64,
    pub exact_bound_defined: bool,
    pub within_bound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssumptionDiagnostics {
    pub min_a: Option<f64>,
    pub max_a: Option<f64>,
    pub min_b: Option<f64>,
    pub max_b: Option<f64>,
    pub max_delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub pair_convention: String,
    pub max_hop: usize,
    pub labeled_count: usize,
    pub unreachable_count: usize,
    /// Set when every node carries the same prior weight.
    pub mu_constant: Option<f64>,
    pub mu_mean: f64,
    pub hops: Vec<HopBound>,
    pub assumption: AssumptionDiagnostics,
    pub all_within_bound: bool,
}

fn check_truth(graph: &Graph, truth: &[Label]) -> Result<()> {
    if truth.len() != graph.node_count() {
        return Err(Error::Dimension(format!(
            "{} true labels for {} nodes",
            truth.len(),
            graph.node_count()
        )));
    }
    if let Some((i, &y)) = truth.iter().enumerate().find(|(_, &y)| y > 1) {
        return Err(Error::invalid(format!("true label {y} on node {i} is not 0 or 1")));
    }
    Ok(())
}

/// Labels the hop-0 nodes with their true values.
pub fn partition_labels(partition: &NeighborhoodPartition, truth: &[Label]) -> Result<LabelSet> {
    LabelSet::from_truth(partition.hop(0).iter().copied(), truth)
}

/// Solves for the optimum and reports every per-hop quantity and bound.
pub fn compute_bound(
    graph: &Graph,
    truth: &[Label],
    prior: &PriorField,
    partition: &NeighborhoodPartition,
    config: &SolverConfig,
) -> Result<BoundReport> {
    check_truth(graph, truth)?;
    let labels = partition_labels(partition, truth)?;
    let prediction = solve_with_prior(graph, &labels, prior, config)?;
    bound_for_prediction(graph, truth, prior, partition, &prediction.values)
}

/// As [`compute_bound`], with the measured columns taken from `f`.
#[allow(clippy::needless_range_loop)]
pub fn bound_for_prediction(
    graph: &Graph,
    truth: &[Label],
    prior: &PriorField,
    partition: &NeighborhoodPartition,
    f: &[f64],
) -> Result<BoundReport> {
    check_truth(graph, truth)?;
    if prior.len() != graph.node_count() {
        return Err(Error::Dimension("prior length differs from graph".into()));
    }
    let flows = compute_flows(graph, partition)?;
    let errors = neighborhood_errors(graph, f, truth, partition)?;
    let l = partition.max_hop();

    let mut rows: Vec<HopBound> = Vec::with_capacity(l);
    for k in 1..=l {
        let hop = partition.hop(k);
        let mu_total: f64 = hop.iter().map(|&i| prior.mu()[i]).sum();
        let mu_prior_error: f64 = hop
            .iter()
            .map(|&i| prior.mu()[i] * (prior.h()[i] - f64::from(truth[i])).abs())
            .sum();
        let s = smoothness(graph, truth, partition, k);
        let denom = flows.c_in[k] + mu_total;
        if denom <= 0.0 {
            return Err(Error::ZeroDenominator(format!(
                "hop {k} has no in-flow and no prior weight"
            )));
        }
        let e = &errors[k];
        let delta = match (e.a, e.b) {
            (Some(a), Some(b)) if a > 0.0 => Some(b / a),
            _ => None,
        };
        rows.push(HopBound {
            k,
            size: hop.len(),
            c_in: flows.c_in[k],
            c_bet: flows.c_bet[k],
            c_out: flows.c_out[k],
            conductance: conductance(&flows, k),
            gamma: gamma(&flows, mu_total, k)?,
            smoothness: s,
            prior_error: prior_error(prior, truth, partition, k),
            mu_total,
            mu_prior_error,
            c: (s + mu_prior_error) / denom,
            d: 0.0,
            error: e.mean,
            e_in: e.e_in,
            e_bet: e.e_bet,
            e_out: e.e_out,
            a: e.a,
            b: e.b,
            delta,
            informal_bound: 0.0,
            exact_bound: 0.0,
            exact_bound_defined: false,
            within_bound: true,
        });
    }

    // dₖ = cₖ + γₖ dₖ₊₁, from the last hop inward
    let mut next_d = 0.0;
    for row in rows.iter_mut().rev() {
        row.d = row.c + row.gamma * next_d;
        next_d = row.d;
    }
    let mut informal = 0.0;
    for idx in 0..rows.len() {
        informal += rows[idx].d;
        rows[idx].informal_bound = informal;
        match rows[idx].a {
            Some(a) if a > 0.0 => {
                // walk back while the previous hop carries error; a hop with
                // zero error contributes nothing further down the chain
                let mut acc = rows[idx].d;
                let mut prod = 1.0;
                for prev in rows[..idx].iter().rev() {
                    match prev.delta {
                        Some(delta) if prev.error > 0.0 => {
                            prod *= delta;
                            acc += prev.d * prod;
                        }
                        _ => break,
                    }
                }
                rows[idx].exact_bound = acc / a;
                rows[idx].exact_bound_defined = true;
            }
            _ => rows[idx].exact_bound = informal,
        }
        rows[idx].within_bound = rows[idx].error <= rows[idx].exact_bound + BOUND_SLACK;
    }

    let defined = |get: fn(&HopBound) -> Option<f64>| rows.iter().filter_map(get).collect::<Vec<_>>();
    let min_of = |v: &[f64]| v.iter().copied().reduce(f64::min);
    let max_of = |v: &[f64]| v.iter().copied().reduce(f64::max);
    let a_vals = defined(|r| r.a);
    let b_vals = defined(|r| r.b);
    let d_vals = defined(|r| r.delta);
    let n = graph.node_count();
    Ok(BoundReport {
        pair_convention: PAIR_CONVENTION.to_string(),
        max_hop: l,
        labeled_count: partition.hop(0).len(),
        unreachable_count: partition.unreachable().len(),
        mu_constant: prior.constant_mu(),
        mu_mean: if n == 0 {
            0.0
        } else {
            prior.mu().iter().sum::<f64>() / n as f64
        },
        assumption: AssumptionDiagnostics {
            min_a: min_of(&a_vals),
            max_a: max_of(&a_vals),
            min_b: min_of(&b_vals),
            max_b: max_of(&b_vals),
            max_delta: max_of(&d_vals),
        },
        all_within_bound: rows.iter().all(|r| r.within_bound),
        hops: rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditKind {
    /// A node's error is at most the weighted average of its neighbors'
    /// errors plus label roughness and prior error.
    NodeError,
    /// Summed per-node inequality on an interior hop.
    HopBalance,
    /// Summed per-node inequality on the last hop.
    LastHopBalance,
    /// Interior hop, normalized by `C_in + Σμ`.
    HopRecursion,
    /// Last hop, normalized by `C_in + Σμ`.
    LastHopRecursion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditCheck {
    pub kind: AuditKind,
    /// Node index for node checks, hop index otherwise.
    pub at: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub kind: AuditKind,
    pub checked: usize,
    pub failed: usize,
    /// Smallest `rhs − lhs` over the checks of this kind.
    pub worst_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub slack: f64,
    pub passed: bool,
    pub summary: Vec<AuditSummary>,
    pub checks: Vec<AuditCheck>,
}

/// Checks the chain of inequalities that the bound is built from against a
/// prediction. The node and balance checks hold at the exact optimum, so a
/// failure there means `f` is not optimal. The recursion checks also hold at
/// the optimum when `μ = 0`; with a positive prior weight they can fail at
/// hop 1, where they would need `a₁ ≤ 1`.
pub fn audit_inequalities(
    graph: &Graph,
    truth: &[Label],
    prior: &PriorField,
    prediction: &Prediction,
    partition: &NeighborhoodPartition,
    slack: f64,
) -> Result<AuditReport> {
    check_truth(graph, truth)?;
    let f = &prediction.values;
    let flows = compute_flows(graph, partition)?;
    let errors = neighborhood_errors(graph, f, truth, partition)?;
    let err = |i: usize| (f[i] - f64::from(truth[i])).abs();
    let y = |i: usize| f64::from(truth[i]);
    let mut checks = Vec::new();
    let mut push = |kind, at, lhs: f64, rhs: f64| {
        checks.push(AuditCheck {
            kind,
            at,
            lhs,
            rhs,
            passed: lhs <= rhs + slack,
        })
    };

    for i in 0..graph.node_count() {
        let labeled = partition.hop_of(i) == Some(0);
        let denom = graph.degree(i) + prior.mu()[i];
        if labeled || denom <= 0.0 || prediction.flags[i] != NodeFlag::Ok {
            continue;
        }
        let mut num = prior.mu()[i] * (prior.h()[i] - y(i)).abs();
        for &(j, w) in graph.neighbors(i) {
            num += w * err(j) + w * (y(j) - y(i)).abs();
        }
        push(AuditKind::NodeError, i, err(i), num / denom);
    }

    let l = partition.max_hop();
    for k in 1..=l {
        let hop = partition.hop(k);
        let mu_err: f64 = hop.iter().map(|&i| prior.mu()[i] * err(i)).sum();
        let mu_total: f64 = hop.iter().map(|&i| prior.mu()[i]).sum();
        let mu_prior: f64 = hop.iter().map(|&i| prior.mu()[i] * (prior.h()[i] - y(i)).abs()).sum();
        let s = smoothness(graph, truth, partition, k);
        let denom = flows.c_in[k] + mu_total;
        let c = (s + mu_prior) / denom;
        let lhs_sum = errors[k].in_sum - errors[k - 1].out_sum + mu_err;
        // normalized in/out errors; C_out(k−1) = C_in(k) > 0 on every hop k ≥ 1
        let e_in = errors[k].in_sum / flows.c_in[k];
        let e_out_prev = errors[k - 1].out_sum / flows.c_out[k - 1];
        if k < l {
            let rhs_sum = errors[k + 1].in_sum - errors[k].out_sum + s + mu_prior;
            push(AuditKind::HopBalance, k, lhs_sum, rhs_sum);
            let g = flows.c_out[k] / denom;
            let e_in_next = errors[k + 1].in_sum / flows.c_in[k + 1];
            let e_out = errors[k].out_sum / flows.c_out[k];
            push(
                AuditKind::HopRecursion,
                k,
                e_in - e_out_prev,
                g * (e_in_next - e_out) + c,
            );
        } else {
            push(AuditKind::LastHopBalance, k, lhs_sum, s + mu_prior);
            push(AuditKind::LastHopRecursion, k, e_in - e_out_prev, c);
        }
    }

    let kinds = [
        AuditKind::NodeError,
        AuditKind::HopBalance,
        AuditKind::LastHopBalance,
        AuditKind::HopRecursion,
        AuditKind::LastHopRecursion,
    ];
    let summary = kinds
        .iter()
        .map(|&kind| {
            let of_kind: Vec<&AuditCheck> = checks.iter().filter(|c| c.kind == kind).collect();
            AuditSummary {
                kind,
                checked: of_kind.len(),
                failed: of_kind.iter().filter(|c| !c.passed).count(),
                worst_margin: of_kind.iter().map(|c| c.rhs - c.lhs).reduce(f64::min),
            }
        })
        .collect();
    Ok(AuditReport {
        slack,
        passed: checks.iter().all(|c| c.passed),
        summary,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::compute_neighborhoods;

    fn setup(n: usize, edges: &[(usize, usize, f64)], labeled: &[usize]) -> (Graph, NeighborhoodPartition) {
        let g = Graph::from_edges(n, edges.iter().copied()).unwrap();
        let labels = LabelSet::new(labeled.iter().map(|&i| (i, 0)).collect()).unwrap();
        let p = compute_neighborhoods(&g, &labels).unwrap();
        (g, p)
    }

    #[test]
    fn path_flows() {
        let (g, p) = setup(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0]);
        let flows = compute_flows(&g, &p).unwrap();
        assert_eq!((flows.c_in[1], flows.c_bet[1], flows.c_out[1]), (1.0, 0.0, 1.0));
        assert_eq!(flows.c_out[2], 0.0);
    }

    #[test]
    fn triangle_between_flow_counts_twice() {
        // labeled c = 2 adjacent to a = 0 and b = 1
        let (g, p) = setup(3, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)], &[2]);
        let flows = compute_flows(&g, &p).unwrap();
        assert_eq!((flows.c_in[1], flows.c_bet[1], flows.c_out[1]), (2.0, 2.0, 0.0));
    }

    #[test]
    fn conductance_cases() {
        let flows = |c_in, c_bet, c_out| FlowProfile {
            sizes: vec![1, 1],
            c_in: vec![0.0, c_in],
            c_bet: vec![0.0, c_bet],
            c_out: vec![0.0, c_out],
        };
        assert_eq!(conductance(&flows(1.0, 0.0, 2.0), 1), Some(1.0));
        assert_eq!(conductance(&flows(0.0, 3.0, 0.0), 1), Some(0.0));
        assert_eq!(conductance(&flows(1.0, 2.0, 1.0), 1), Some(0.5));
        assert_eq!(conductance(&flows(0.0, 0.0, 0.0), 1), None);
    }

    #[test]
    fn gamma_cases() {
        let flows = FlowProfile {
            sizes: vec![1, 1],
            c_in: vec![0.0, 1.0],
            c_bet: vec![0.0, 0.0],
            c_out: vec![0.0, 2.0],
        };
        assert_eq!(gamma(&flows, 1.0, 1).unwrap(), 1.0);
        assert!(gamma(&flows, 1e12, 1).unwrap() < 1e-11);
        let closed = FlowProfile {
            c_out: vec![0.0, 0.0],
            ..flows.clone()
        };
        assert_eq!(gamma(&closed, 1.0, 1).unwrap(), 0.0);
        let empty = FlowProfile {
            c_in: vec![0.0, 0.0],
            ..flows
        };
        assert!(gamma(&empty, 0.0, 1).is_err());
    }

    #[test]
    fn smoothness_and_prior_error() {
        let (g, p) = setup(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0]);
        assert_eq!(smoothness(&g, &[0, 0, 0], &p, 1), 0.0);
        // node 1 (hop 1) has one boundary edge to node 2
        assert_eq!(smoothness(&g, &[0, 0, 1], &p, 1), 1.0);
        let truth = [0, 1, 0];
        let exact = PriorField::new(vec![0.0, 1.0, 0.0], vec![1.0; 3]).unwrap();
        let flat = PriorField::uniform(3, 0.5, 1.0).unwrap();
        let flipped = PriorField::new(vec![1.0, 0.0, 1.0], vec![1.0; 3]).unwrap();
        assert_eq!(prior_error(&exact, &truth, &p, 1), 0.0);
        assert_eq!(prior_error(&flat, &truth, &p, 1), 0.5);
        assert_eq!(prior_error(&flipped, &truth, &p, 2), 1.0);
    }

    #[test]
    fn exact_prediction_has_no_error_ratios() {
        let (g, p) = setup(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0]);
        let e = neighborhood_errors(&g, &[0.0, 1.0, 0.0], &[0, 1, 0], &p).unwrap();
        assert_eq!(e[1].mean, 0.0);
        assert_eq!(e[1].a, None);
        assert_eq!(e[1].b, None);
    }

    #[test]
    fn uniform_error_gives_unit_ratios() {
        let (g, p) = setup(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0]);
        let e = neighborhood_errors(&g, &[0.0, 0.25, 0.0], &[0, 0, 0], &p).unwrap();
        assert_eq!(e[1].mean, 0.25);
        assert_eq!(e[1].e_in, Some(0.25));
        assert_eq!(e[1].e_out, Some(0.25));
        assert_eq!((e[1].a, e[1].b), (Some(1.0), Some(1.0)));
    }

    #[test]
    fn single_hop_bound_collapses() {
        // star: labeled center, three leaves at hop 1
        let (g, p) = setup(4, &[(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)], &[0]);
        let truth = [0, 0, 1, 0];
        let prior = PriorField::uniform(4, 0.5, 1.0).unwrap();
        let report = compute_bound(&g, &truth, &prior, &p, &SolverConfig::default()).unwrap();
        let hop = &report.hops[0];
        assert_eq!(report.max_hop, 1);
        assert_eq!(hop.d, hop.c);
        assert!(hop.exact_bound_defined);
        assert!((hop.exact_bound - hop.c / hop.a.unwrap()).abs() < 1e-15);
        assert!(hop.within_bound);
    }

    #[test]
    fn uneven_in_weights_exceed_bound() {
        // errors concentrate on the heavier in-edge, so a₁ = 4/3 > 1 and the
        // measured error 1/6 exceeds c₁/a₁ = 3/20
        let (g, p) = setup(3, &[(0, 1, 2.0), (0, 2, 1.0)], &[0]);
        let prior = PriorField::new(vec![0.0, 1.0, 0.0], vec![1.0; 3]).unwrap();
        let report = compute_bound(&g, &[0, 0, 0], &prior, &p, &SolverConfig::default()).unwrap();
        let hop = &report.hops[0];
        assert!((hop.c - 0.2).abs() < 1e-15);
        assert!((hop.a.unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!((hop.error - 1.0 / 6.0).abs() < 1e-12);
        assert!((hop.exact_bound - 0.15).abs() < 1e-12);
        assert!(!hop.within_bound);
    }

    #[test]
    fn mismatched_partition_rejected() {
        let (g, p) = setup(3, &[(0, 1, 1.0), (1, 2, 1.0)], &[0]);
        let other = Graph::from_edges(3, [(0, 2, 1.0)]).unwrap();
        assert!(compute_flows(&other, &p).is_err());
        assert!(compute_flows(&Graph::empty(4), &p).is_err());
        let _ = g;
    }
}
