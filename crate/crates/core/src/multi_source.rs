//! Fusing several weak labelers into label propagation.
//!
//! Each labeler `j` votes 0, 1 or abstains on every node, and each vote gets a
//! trust weight `αⱼ(xᵢ) ≥ 0`. The fused objective
//!
//! ```text
//! S(f) + Σᵢ Σⱼ αⱼ(xᵢ) (fᵢ − hⱼ(xᵢ))²      subject to fᵢ = yᵢ on labeled nodes
//! ```
//!
//! is solved by attaching two hard-labeled "dongle" nodes per labeler (one
//! per class) and running plain propagation on the enlarged graph. The same
//! optimum is reached by collapsing the votes into one prior with
//! [`reduce_to_single_prior`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, Graph, Label, LabelSet};
use crate::solver::{solve_standard, Prediction, PriorField, SolverConfig};

/// Votes of `k` labelers on every node; `None` is an abstain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeakVoteMatrix {
    votes: Vec<Option<Label>>,
    node_count: usize,
    labeler_count: usize,
}

impl WeakVoteMatrix {
    pub fn new(node_count: usize, labeler_count: usize, votes: Vec<Option<Label>>) -> Result<Self> {
        if labeler_count == 0 {
            return Err(Error::invalid("at least one labeler is required"));
        }
        if votes.len() != node_count * labeler_count {
            return Err(Error::Dimension(format!(
                "{} votes for {node_count} nodes x {labeler_count} labelers",
                votes.len()
            )));
        }
        if let Some(v) = votes.iter().flatten().find(|&&v| v > 1) {
            return Err(Error::invalid(format!("vote {v} is not 0, 1 or abstain")));
        }
        Ok(Self {
            votes,
            node_count,
            labeler_count,
        })
    }

    /// Rows in the on-disk encoding: 0, 1, or −1 for abstain.
    pub fn from_encoded_rows(rows: &[Vec<i8>]) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        let mut votes = Vec::with_capacity(rows.len() * k);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Dimension(format!(
                    "vote row {i} has {} entries, expected {k}",
                    row.len()
                )));
            }
            for &v in row {
                votes.push(match v {
                    -1 => None,
                    0 => Some(0),
                    1 => Some(1),
                    other => return Err(Error::invalid(format!("vote {other} on row {i} is not 0, 1 or -1"))),
                });
            }
        }
        Self::new(rows.len(), k, votes)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn labeler_count(&self) -> usize {
        self.labeler_count
    }

    pub fn get(&self, node: usize, labeler: usize) -> Option<Label> {
        self.votes[node * self.labeler_count + labeler]
    }

    pub fn row(&self, node: usize) -> &[Option<Label>] {
        &self.votes[node * self.labeler_count..(node + 1) * self.labeler_count]
    }

    /// Number of non-abstaining votes.
    pub fn vote_count(&self) -> usize {
        self.votes.iter().filter(|v| v.is_some()).count()
    }

    /// Whether any labeler votes on `node`.
    pub fn covers(&self, node: usize) -> bool {
        self.row(node).iter().any(Option::is_some)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaScheme {
    Oracle,
    Accuracy,
    Boosting,
    Probabilistic,
    Constant,
}

impl AlphaScheme {
    pub const ALL: [AlphaScheme; 5] = [
        AlphaScheme::Oracle,
        AlphaScheme::Accuracy,
        AlphaScheme::Boosting,
        AlphaScheme::Probabilistic,
        AlphaScheme::Constant,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AlphaScheme::Oracle => "oracle",
            AlphaScheme::Accuracy => "accuracy",
            AlphaScheme::Boosting => "boosting",
            AlphaScheme::Probabilistic => "probabilistic",
            AlphaScheme::Constant => "constant",
        }
    }
}

impl std::str::FromStr for AlphaScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AlphaScheme::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown alpha scheme {s:?}")))
    }
}

/// Trust weight of every vote, zero on abstains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaAssignment {
    values: Vec<f64>,
    labeler_count: usize,
    pub scheme: AlphaScheme,
    /// Labelers whose weights came from a fallback rule.
    pub fallback: Vec<bool>,
}

impl AlphaAssignment {
    pub fn new(votes: &WeakVoteMatrix, values: Vec<f64>, scheme: AlphaScheme) -> Result<Self> {
        let k = votes.labeler_count();
        if values.len() != votes.node_count() * k {
            return Err(Error::Dimension(format!(
                "{} alpha values for a {}x{k} vote matrix",
                values.len(),
                votes.node_count()
            )));
        }
        for (idx, &a) in values.iter().enumerate() {
            let (node, labeler) = (idx / k, idx % k);
            if !(a.is_finite() && a >= 0.0) {
                return Err(Error::invalid(format!(
                    "alpha {a} at node {node}, labeler {labeler} must be finite and >= 0"
                )));
            }
            if a > 0.0 && votes.get(node, labeler).is_none() {
                return Err(Error::AlphaOnAbstain {
                    node,
                    labeler,
                    value: a,
                });
            }
        }
        Ok(Self {
            values,
            labeler_count: k,
            scheme,
            fallback: vec![false; k],
        })
    }

    pub fn get(&self, node: usize, labeler: usize) -> f64 {
        self.values[node * self.labeler_count + labeler]
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.values[node * self.labeler_count..(node + 1) * self.labeler_count]
    }

    pub fn node_count(&self) -> usize {
        self.values.len() / self.labeler_count
    }

    pub fn labeler_count(&self) -> usize {
        self.labeler_count
    }

    /// Multiplies every weight by `factor ≥ 0`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            values: self.values.iter().map(|a| a * factor).collect(),
            ..self.clone()
        }
    }
}

/// Fills weights labeler by labeler; abstains always get zero.
fn per_vote(
    votes: &WeakVoteMatrix,
    scheme: AlphaScheme,
    mut weight: impl FnMut(usize, usize, Label) -> f64,
) -> AlphaAssignment {
    let k = votes.labeler_count();
    let mut values = vec![0.0; votes.node_count() * k];
    for i in 0..votes.node_count() {
        for j in 0..k {
            if let Some(v) = votes.get(i, j) {
                values[i * k + j] = weight(i, j, v);
            }
        }
    }
    AlphaAssignment {
        values,
        labeler_count: k,
        scheme,
        fallback: vec![false; k],
    }
}

/// Estimated accuracy `pⱼ` of each labeler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelerAccuracy {
    p: Vec<f64>,
}

impl LabelerAccuracy {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if let Some((j, &pj)) = p.iter().enumerate().find(|(_, &pj)| !(0.0..=1.0).contains(&pj)) {
            return Err(Error::invalid(format!("accuracy p[{j}] = {pj} outside [0, 1]")));
        }
        Ok(Self { p })
    }

    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

fn check_accuracy_len(votes: &WeakVoteMatrix, acc: &LabelerAccuracy) -> Result<()> {
    if acc.len() != votes.labeler_count() {
        return Err(Error::Dimension(format!(
            "{} accuracies for {} labelers",
            acc.len(),
            votes.labeler_count()
        )));
    }
    Ok(())
}

/// Laplace-smoothed accuracy on the labeled nodes:
/// `(correct + 1) / (votes + 2)`, or 0.5 without any labeled vote.
pub fn estimate_accuracy_from_labeled(votes: &WeakVoteMatrix, labels: &LabelSet) -> Result<LabelerAccuracy> {
    labels.check_against(votes.node_count())?;
    let k = votes.labeler_count();
    let mut correct = vec![0usize; k];
    let mut total = vec![0usize; k];
    for &(i, y) in labels.entries() {
        for j in 0..k {
            if let Some(v) = votes.get(i, j) {
                total[j] += 1;
                correct[j] += usize::from(v == y);
            }
        }
    }
    let p = correct
        .iter()
        .zip(&total)
        .map(|(&c, &t)| if t == 0 { 0.5 } else { (c + 1) as f64 / (t + 2) as f64 })
        .collect();
    LabelerAccuracy::new(p)
}

/// `α = 1` where the vote matches the true label, 0 elsewhere.
pub fn alpha_oracle(votes: &WeakVoteMatrix, truth: &[Label]) -> Result<AlphaAssignment> {
    if truth.len() != votes.node_count() {
        return Err(Error::Dimension(format!(
            "{} true labels for {} nodes",
            truth.len(),
            votes.node_count()
        )));
    }
    Ok(per_vote(votes, AlphaScheme::Oracle, |i, _, v| {
        if v == truth[i] {
            1.0
        } else {
            0.0
        }
    }))
}

/// `αⱼ = pⱼ` on every vote of labeler `j`.
pub fn alpha_accuracy(votes: &WeakVoteMatrix, acc: &LabelerAccuracy) -> Result<AlphaAssignment> {
    check_accuracy_len(votes, acc)?;
    Ok(per_vote(votes, AlphaScheme::Accuracy, |_, j, _| acc.p[j]))
}

/// Accuracies are clipped to this range before taking log-odds.
pub const BOOSTING_CLIP: (f64, f64) = (0.01, 0.99);

/// Log-odds weight `scale · ln(p / (1 − p))`, negative values clamped to 0.
///
/// `scale = 1` is the usual boosting weight; `scale = 0.5` is the
/// exponential-loss minimizer for ±1 classifiers.
pub fn alpha_boosting(votes: &WeakVoteMatrix, acc: &LabelerAccuracy, scale: f64) -> Result<AlphaAssignment> {
    check_accuracy_len(votes, acc)?;
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::invalid(format!(
            "boosting scale {scale} must be finite and >= 0"
        )));
    }
    if let Some((j, &pj)) = acc.p.iter().enumerate().find(|(_, &p)| p <= 0.0 || p >= 1.0) {
        return Err(Error::invalid(format!(
            "boosting weight undefined for labeler {j} with accuracy {pj}"
        )));
    }
    let weights: Vec<f64> = acc.p.iter().map(|&p| boosting_weight(p, scale)).collect();
    Ok(per_vote(votes, AlphaScheme::Boosting, |_, j, _| weights[j]))
}

pub fn boosting_weight(p: f64, scale: f64) -> f64 {
    let p = p.clamp(BOOSTING_CLIP.0, BOOSTING_CLIP.1);
    (scale * (p / (1.0 - p)).ln()).max(0.0)
}

/// The same weight on every vote.
pub fn alpha_constant(votes: &WeakVoteMatrix, value: f64) -> Result<AlphaAssignment> {
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::invalid(format!(
            "constant alpha {value} must be finite and >= 0"
        )));
    }
    Ok(per_vote(votes, AlphaScheme::Constant, |_, _, _| value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilisticConfig {
    pub k_neighbors: usize,
    /// Added to squared residuals before the log, capping `α` at `1 / floor`.
    pub residual_floor: f64,
    /// Coupling multiplier applied to every `1/σ²`.
    pub scale: f64,
}

impl Default for ProbabilisticConfig {
    fn default() -> Self {
        Self {
            k_neighbors: 10,
            residual_floor: 1e-4,
            scale: 1.0,
        }
    }
}

/// Regression target for one labeled vote: `ln((h − y)² + floor)`.
pub fn log_residual(vote: f64, truth: f64, floor: f64) -> f64 {
    ((vote - truth).powi(2) + floor).ln()
}

/// Mean target of the `k` support points nearest to `query`; ties in
/// distance go to the lower node index.
pub fn knn_mean(features: &FeatureMatrix, support: &[(usize, f64)], query: &[f64], k: usize) -> f64 {
    let mut by_dist: Vec<(f64, usize, f64)> = support
        .iter()
        .map(|&(node, target)| (crate::graph::euclidean(features.row(node), query), node, target))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let take = k.min(by_dist.len());
    by_dist[..take].iter().map(|&(_, _, t)| t).sum::<f64>() / take as f64
}

/// Inverse-variance weights `α = scale / exp(g(x))`, where `g` regresses the
/// log squared residual of each labeler on its labeled votes by k-nearest
/// neighbor averaging in feature space.
///
/// A labeler that never votes on a labeled node falls back to its smoothed
/// labeled-sample accuracy (0.5) and is marked in `fallback`.
pub fn alpha_probabilistic(
    votes: &WeakVoteMatrix,
    features: &FeatureMatrix,
    labels: &LabelSet,
    config: &ProbabilisticConfig,
) -> Result<AlphaAssignment> {
    if features.rows() != votes.node_count() {
        return Err(Error::Dimension(format!(
            "{} feature rows for {} nodes",
            features.rows(),
            votes.node_count()
        )));
    }
    if config.k_neighbors == 0 {
        return Err(Error::invalid("k_neighbors must be positive"));
    }
    if !(config.residual_floor.is_finite() && config.residual_floor > 0.0) {
        return Err(Error::invalid("residual floor must be positive"));
    }
    if !(config.scale.is_finite() && config.scale >= 0.0) {
        return Err(Error::invalid("probabilistic scale must be finite and >= 0"));
    }
    labels.check_against(votes.node_count())?;

    let k = votes.labeler_count();
    let fallback_acc = estimate_accuracy_from_labeled(votes, labels)?;
    let mut values = vec![0.0; votes.node_count() * k];
    let mut fallback = vec![false; k];
    for j in 0..k {
        let support: Vec<(usize, f64)> = labels
            .entries()
            .iter()
            .filter_map(|&(i, y)| {
                votes
                    .get(i, j)
                    .map(|v| (i, log_residual(f64::from(v), f64::from(y), config.residual_floor)))
            })
            .collect();
        if support.is_empty() {
            fallback[j] = true;
        }
        for i in 0..votes.node_count() {
            if votes.get(i, j).is_none() {
                continue;
            }
            values[i * k + j] = if support.is_empty() {
                fallback_acc.p[j]
            } else {
                let g = knn_mean(features, &support, features.row(i), config.k_neighbors);
                config.scale / g.exp()
            };
        }
    }
    Ok(AlphaAssignment {
        values,
        labeler_count: k,
        scheme: AlphaScheme::Probabilistic,
        fallback,
    })
}

/// Weighted-average prior `h = Σ αⱼ hⱼ / Σ αⱼ` with weight `μ = Σ αⱼ`;
/// nodes without any weight get `h = 0.5`, `μ = 0`.
pub fn reduce_to_single_prior(votes: &WeakVoteMatrix, alpha: &AlphaAssignment) -> Result<PriorField> {
    check_alpha(votes, alpha)?;
    let n = votes.node_count();
    let mut h = vec![0.5; n];
    let mut mu = vec![0.0; n];
    for i in 0..n {
        let mut weight = 0.0;
        let mut weighted = 0.0;
        for (v, &a) in votes.row(i).iter().zip(alpha.row(i)) {
            if let Some(v) = v {
                weight += a;
                weighted += a * f64::from(*v);
            }
        }
        if weight > 0.0 {
            // a ratio of sums can exceed 1 by an ulp
            h[i] = (weighted / weight).clamp(0.0, 1.0);
            mu[i] = weight;
        }
    }
    PriorField::new(h, mu)
}

fn check_alpha(votes: &WeakVoteMatrix, alpha: &AlphaAssignment) -> Result<()> {
    if alpha.node_count() != votes.node_count() || alpha.labeler_count() != votes.labeler_count() {
        return Err(Error::Dimension("alpha and vote matrix shapes differ".into()));
    }
    for i in 0..votes.node_count() {
        for j in 0..votes.labeler_count() {
            let a = alpha.get(i, j);
            if a > 0.0 && votes.get(i, j).is_none() {
                return Err(Error::AlphaOnAbstain {
                    node: i,
                    labeler: j,
                    value: a,
                });
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DongleEdge {
    pub node: usize,
    pub dongle: usize,
    pub weight: f64,
}

/// Base graph plus `2k` labeled dongle nodes.
///
/// Labeler `j`'s class-0 dongle is node `N + j` and its class-1 dongle is
/// node `N + k + j`, where `N` is the base node count.
#[derive(Debug, Clone)]
pub struct AugmentedGraph {
    pub graph: Graph,
    pub base_node_count: usize,
    pub labeler_count: usize,
    /// One entry per non-abstaining vote, including zero-weight ones.
    pub dongle_edges: Vec<DongleEdge>,
}

impl AugmentedGraph {
    pub fn dongle(&self, labeler: usize, class: Label) -> usize {
        self.base_node_count + usize::from(class) * self.labeler_count + labeler
    }

    /// `(dongle node, class)` for every dongle.
    pub fn dongle_labels(&self) -> Vec<(usize, Label)> {
        (0..2u8)
            .flat_map(|c| (0..self.labeler_count).map(move |j| (c, j)))
            .map(|(c, j)| (self.dongle(j, c), c))
            .collect()
    }

    /// `base` labels together with the dongle labels.
    pub fn label_set(&self, base: &LabelSet) -> Result<LabelSet> {
        let mut entries = base.entries().to_vec();
        entries.extend(self.dongle_labels());
        LabelSet::new(entries)
    }
}

pub fn augment_with_dongles(graph: &Graph, votes: &WeakVoteMatrix, alpha: &AlphaAssignment) -> Result<AugmentedGraph> {
    let n = graph.node_count();
    if votes.node_count() != n {
        return Err(Error::Dimension(format!(
            "vote matrix covers {} nodes, graph has {n}",
            votes.node_count()
        )));
    }
    check_alpha(votes, alpha)?;
    let k = votes.labeler_count();
    let mut aug = AugmentedGraph {
        graph: Graph::empty(0),
        base_node_count: n,
        labeler_count: k,
        dongle_edges: Vec::with_capacity(votes.vote_count()),
    };
    for i in 0..n {
        for j in 0..k {
            if let Some(v) = votes.get(i, j) {
                aug.dongle_edges.push(DongleEdge {
                    node: i,
                    dongle: aug.dongle(j, v),
                    weight: alpha.get(i, j),
                });
            }
        }
    }
    aug.graph = Graph::from_edges(
        n + 2 * k,
        graph
            .edges()
            .chain(aug.dongle_edges.iter().map(|e| (e.node, e.dongle, e.weight))),
    )?;
    Ok(aug)
}

/// Propagation with one prior per labeler, solved on the dongle-augmented
/// graph. The returned prediction covers only the base nodes.
pub fn solve_multi_source(
    graph: &Graph,
    labels: &LabelSet,
    votes: &WeakVoteMatrix,
    alpha: &AlphaAssignment,
    config: &SolverConfig,
) -> Result<Prediction> {
    labels.check_against(graph.node_count())?;
    let aug = augment_with_dongles(graph, votes, alpha)?;
    let all_labels = aug.label_set(labels)?;
    let mut p = solve_standard(&aug.graph, &all_labels, config)?;
    let n = graph.node_count();
    p.values.truncate(n);
    p.flags.truncate(n);
    Ok(p)
}

/// `S(f) + Σᵢ Σⱼ αⱼ(xᵢ) (fᵢ − hⱼ(xᵢ))²` on the base nodes.
pub fn multi_source_objective(graph: &Graph, votes: &WeakVoteMatrix, alpha: &AlphaAssignment, f: &[f64]) -> f64 {
    let mut total = graph.smoothness(f);
    for (i, &fi) in f.iter().enumerate().take(votes.node_count()) {
        for j in 0..votes.labeler_count() {
            if let Some(v) = votes.get(i, j) {
                total += alpha.get(i, j) * (fi - f64::from(v)).powi(2);
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    fn votes(rows: &[Vec<i8>]) -> WeakVoteMatrix {
        WeakVoteMatrix::from_encoded_rows(rows).unwrap()
    }

    #[test]
    fn all_abstain_gives_no_dongle_edges() {
        let v = votes(&[vec![-1], vec![-1]]);
        let alpha = alpha_constant(&v, 1.0).unwrap();
        let aug = augment_with_dongles(&Graph::empty(2), &v, &alpha).unwrap();
        assert_eq!(aug.graph.node_count(), 4);
        assert!(aug.dongle_edges.is_empty());
        assert_eq!(aug.graph.edge_count(), 0);
    }

    #[test]
    fn dongle_edges_follow_vote_class() {
        let v = votes(&[vec![1], vec![0], vec![-1]]);
        let alpha = alpha_constant(&v, 1.0).unwrap();
        let aug = augment_with_dongles(&Graph::empty(3), &v, &alpha).unwrap();
        // class-0 dongle of labeler 0 is node 3, class-1 dongle is node 4
        assert_eq!(aug.dongle(0, 0), 3);
        assert_eq!(aug.dongle(0, 1), 4);
        let mut edges: Vec<_> = aug.graph.edges().collect();
        edges.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(edges, vec![(0, 4, 1.0), (1, 3, 1.0)]);
        assert_eq!(aug.dongle_labels(), vec![(3, 0), (4, 1)]);
    }

    #[test]
    fn alpha_on_abstain_rejected() {
        let v = votes(&[vec![-1]]);
        assert!(matches!(
            AlphaAssignment::new(&v, vec![0.3], AlphaScheme::Constant),
            Err(Error::AlphaOnAbstain { .. })
        ));
    }

    #[test]
    fn reduction_worked_example() {
        let v = votes(&[vec![1, 1, 1], vec![1, -1, -1]]);
        let acc = LabelerAccuracy::new(vec![0.8, 0.8, 0.8]).unwrap();
        let prior = reduce_to_single_prior(&v, &alpha_accuracy(&v, &acc).unwrap()).unwrap();
        assert_eq!(prior.h(), &[1.0, 1.0]);
        assert!((prior.mu()[0] - 2.4).abs() < 1e-15);
        assert_eq!(prior.mu()[1], 0.8);
    }

    #[test]
    fn reduction_all_abstain_and_mixed() {
        let v = votes(&[vec![-1, -1], vec![1, 0]]);
        let alpha = AlphaAssignment::new(&v, vec![0.0, 0.0, 2.0, 1.0], AlphaScheme::Constant).unwrap();
        let prior = reduce_to_single_prior(&v, &alpha).unwrap();
        assert_eq!(prior.h()[0], 0.5);
        assert_eq!(prior.mu()[0], 0.0);
        assert!((prior.h()[1] - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(prior.mu()[1], 3.0);
    }

    #[test]
    fn oracle_alpha() {
        let v = votes(&[vec![1, 0], vec![0, 0], vec![-1, 1]]);
        let a = alpha_oracle(&v, &[1, 1, 1]).unwrap();
        assert_eq!(a.row(0), &[1.0, 0.0]);
        assert_eq!(a.row(1), &[0.0, 0.0]);
        assert_eq!(a.row(2), &[0.0, 1.0]);
    }

    #[test]
    fn accuracy_alpha() {
        let v = votes(&[vec![1, 0], vec![-1, 1]]);
        let acc = LabelerAccuracy::new(vec![0.6, 0.9]).unwrap();
        let a = alpha_accuracy(&v, &acc).unwrap();
        assert_eq!(a.row(0), &[0.6, 0.9]);
        assert_eq!(a.row(1), &[0.0, 0.9]);
    }

    #[test]
    fn boosting_alpha_values() {
        assert_eq!(boosting_weight(0.5, 1.0), 0.0);
        let e = std::f64::consts::E;
        assert!((boosting_weight(e / (1.0 + e), 1.0) - 1.0).abs() < 1e-12);
        assert!((3.0f64 / 7.0).ln() < 0.0);
        assert_eq!(boosting_weight(0.3, 1.0), 0.0);
        assert!((boosting_weight(e / (1.0 + e), 0.5) - 0.5).abs() < 1e-12);
        // clipping keeps the weight finite near 1
        assert!((boosting_weight(0.999, 1.0) - 99f64.ln()).abs() < 1e-12);

        let v = votes(&[vec![1]]);
        assert!(alpha_boosting(&v, &LabelerAccuracy::new(vec![1.0]).unwrap(), 1.0).is_err());
        assert!(alpha_boosting(&v, &LabelerAccuracy::new(vec![0.0]).unwrap(), 1.0).is_err());
    }

    #[test]
    fn accuracy_estimates() {
        // labeler 0: 8 of 10 labeled votes correct; labeler 1: silent; labeler 2: 5 of 5
        let mut rows = Vec::new();
        let mut truth = Vec::new();
        for i in 0..10 {
            let y = (i % 2) as u8;
            truth.push((i, y));
            let v0 = if i < 8 { y as i8 } else { 1 - y as i8 };
            let v2 = if i < 5 { y as i8 } else { -1 };
            rows.push(vec![v0, -1, v2]);
        }
        let acc = estimate_accuracy_from_labeled(&votes(&rows), &LabelSet::new(truth).unwrap()).unwrap();
        assert_eq!(acc.values(), &[0.75, 0.5, 6.0 / 7.0]);
    }

    fn line_features(xs: &[f64]) -> FeatureMatrix {
        FeatureMatrix::from_rows(xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    #[test]
    fn probabilistic_perfect_labeler_hits_cap() {
        let v = votes(&[vec![1], vec![0], vec![1]]);
        let labels = LabelSet::new(vec![(0, 1), (1, 0)]).unwrap();
        let a = alpha_probabilistic(
            &v,
            &line_features(&[0.0, 1.0, 2.0]),
            &labels,
            &ProbabilisticConfig::default(),
        )
        .unwrap();
        for i in 0..3 {
            assert!((a.get(i, 0) - 1e4).abs() < 1e-6);
        }
        assert!(!a.fallback[0]);
    }

    #[test]
    fn constant_residual_regression_is_constant() {
        let f = line_features(&[0.0, 1.0, 5.0, 9.0]);
        let support: Vec<(usize, f64)> = [0, 1, 2].iter().map(|&i| (i, log_residual(0.5, 1.0, 1e-4))).collect();
        for q in [-3.0, 0.5, 7.0] {
            let g = knn_mean(&f, &support, &[q], 2);
            assert!((1.0 / g.exp() - 1.0 / (0.25 + 1e-4)).abs() < 1e-9);
            assert!((1.0 / g.exp() - 4.0).abs() < 2e-3);
        }
    }

    #[test]
    fn equidistant_query_geometric_mean() {
        let f = line_features(&[-1.0, 1.0]);
        let support = vec![(0, log_residual(0.5, 0.0, 1e-4)), (1, log_residual(1.0, 0.0, 1e-4))];
        let alpha = 1.0 / knn_mean(&f, &support, &[0.0], 2).exp();
        let exact = 1.0 / ((0.25f64 + 1e-4) * (1.0 + 1e-4)).sqrt();
        assert!((alpha - exact).abs() < 1e-12);
        assert!((alpha - 2.0).abs() < 1e-3);
    }

    #[test]
    fn probabilistic_without_support_falls_back() {
        let v = votes(&[vec![1, -1], vec![0, 1]]);
        let labels = LabelSet::new(vec![(0, 1)]).unwrap();
        let a = alpha_probabilistic(
            &v,
            &line_features(&[0.0, 1.0]),
            &labels,
            &ProbabilisticConfig::default(),
        )
        .unwrap();
        assert!(a.fallback[1]);
        assert_eq!(a.get(1, 1), 0.5);
        assert_eq!(a.get(0, 1), 0.0);
    }

    #[test]
    fn bad_vote_encoding() {
        assert!(WeakVoteMatrix::from_encoded_rows(&[vec![2]]).is_err());
        assert!(WeakVoteMatrix::from_encoded_rows(&[vec![1, 0], vec![1]]).is_err());
        assert!(WeakVoteMatrix::from_encoded_rows(&[]).is_err());
    }
}
