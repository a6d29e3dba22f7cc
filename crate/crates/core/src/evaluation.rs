//! Scoring, synthetic data, and the method comparison pipeline.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bound::{bound_for_prediction, BoundReport};
use crate::error::{Error, Result};
use crate::graph::{build_threshold_graph, compute_neighborhoods, FeatureMatrix, Label, LabelSet};
use crate::multi_source::{
    alpha_accuracy, alpha_boosting, alpha_constant, alpha_oracle, alpha_probabilistic, estimate_accuracy_from_labeled,
    reduce_to_single_prior, solve_multi_source, AlphaAssignment, AlphaScheme, ProbabilisticConfig, WeakVoteMatrix,
};
use crate::solver::{solve_standard, solve_with_prior, PriorField, SolverConfig};

pub const DEFAULT_EPSILON: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Abstaining nodes earn half credit.
    pub accuracy: f64,
    pub coverage: f64,
    /// 0.5 when every node abstains.
    pub non_abstain_accuracy: f64,
    pub abstain_epsilon: f64,
    pub nodes: usize,
    pub abstained: usize,
    pub correct: usize,
}

/// A node abstains when `|fᵢ − 0.5| ≤ ε`; otherwise it predicts class 1 iff
/// `fᵢ > 0.5`.
pub fn evaluate(f: &[f64], truth: &[Label], epsilon: f64) -> Result<Metrics> {
    if f.len() != truth.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} true labels",
            f.len(),
            truth.len()
        )));
    }
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("ε must be non-negative, got {epsilon}")));
    }
    let mut abstained = 0;
    let mut correct = 0;
    for (&fi, &yi) in f.iter().zip(truth) {
        if (fi - 0.5).abs() <= epsilon {
            abstained += 1;
        } else if Label::from(fi > 0.5) == yi {
            correct += 1;
        }
    }
    let nodes = f.len();
    let decided = nodes - abstained;
    let coverage = if nodes == 0 { 0.0 } else { decided as f64 / nodes as f64 };
    let non_abstain_accuracy = if decided == 0 {
        0.5
    } else {
        correct as f64 / decided as f64
    };
    Ok(Metrics {
        accuracy: coverage * non_abstain_accuracy + (1.0 - coverage) * 0.5,
        coverage,
        non_abstain_accuracy,
        abstain_epsilon: epsilon,
        nodes,
        abstained,
        correct,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub cluster_count: usize,
    pub points_per_cluster: usize,
    /// Distance between consecutive cluster centers.
    pub separation: f64,
    pub dim: usize,
    /// Standard deviation of every coordinate around its center.
    pub noise: f64,
    pub labeler_accuracies: Vec<f64>,
    pub labeler_coverages: Vec<f64>,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            cluster_count: 2,
            points_per_cluster: 250,
            separation: 10.0,
            dim: 2,
            noise: 1.0,
            labeler_accuracies: vec![0.8; 3],
            labeler_coverages: vec![0.6; 3],
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.cluster_count == 0 || self.points_per_cluster == 0 || self.dim == 0 {
            return Err(Error::invalid(
                "cluster count, cluster size and dimension must be positive",
            ));
        }
        if !(self.separation.is_finite() && self.separation >= 0.0 && self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::invalid("separation and noise must be finite and non-negative"));
        }
        check_rates(&self.labeler_accuracies, &self.labeler_coverages)
    }

    pub fn node_count(&self) -> usize {
        self.cluster_count * self.points_per_cluster
    }
}

fn check_rates(accuracies: &[f64], coverages: &[f64]) -> Result<()> {
    if accuracies.len() != coverages.len() {
        return Err(Error::Dimension(format!(
            "{} labeler accuracies but {} coverages",
            accuracies.len(),
            coverages.len()
        )));
    }
    for (what, values) in [("accuracy", accuracies), ("coverage", coverages)] {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("labeler {what} {v} outside [0, 1]")));
        }
    }
    Ok(())
}

fn stream(seed: u64, salt: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(salt);
    rng
}

/// Gaussian blobs with centers spaced along the first axis; cluster `c` has
/// class `c mod 2`.
pub fn generate_clusters(spec: &SyntheticSpec) -> Result<(FeatureMatrix, Vec<Label>)> {
    spec.validate()?;
    let mut rng = stream(spec.seed, 1);
    let normal = Normal::new(0.0, spec.noise).map_err(|e| Error::invalid(e.to_string()))?;
    let mut rows = Vec::with_capacity(spec.node_count());
    let mut truth = Vec::with_capacity(spec.node_count());
    for c in 0..spec.cluster_count {
        for _ in 0..spec.points_per_cluster {
            let mut row: Vec<f64> = (0..spec.dim).map(|_| normal.sample(&mut rng)).collect();
            row[0] += c as f64 * spec.separation;
            rows.push(row);
            truth.push((c % 2) as Label);
        }
    }
    Ok((FeatureMatrix::from_rows(rows)?, truth))
}

/// Labeler `j` votes on each node with probability `coverages[j]`; a vote is
/// correct with probability `accuracies[j]`.
pub fn generate_weak_labelers(
    truth: &[Label],
    accuracies: &[f64],
    coverages: &[f64],
    seed: u64,
) -> Result<WeakVoteMatrix> {
    check_rates(accuracies, coverages)?;
    let k = accuracies.len();
    let mut rng = stream(seed, 2);
    let mut votes = Vec::with_capacity(truth.len() * k);
    for &y in truth {
        for j in 0..k {
            let covers = rng.random_bool(coverages[j]);
            let correct = rng.random_bool(accuracies[j]);
            votes.push(covers.then_some(if correct { y } else { 1 - y }));
        }
    }
    WeakVoteMatrix::new(truth.len(), k, votes)
}

/// `count` labeled nodes split evenly between the classes (the remainder
/// goes to class 0), drawn without replacement.
pub fn sample_balanced_labels(truth: &[Label], count: usize, seed: u64) -> Result<LabelSet> {
    let mut rng = stream(seed, 3);
    let mut entries = Vec::with_capacity(count);
    for (class, want) in [(0, count - count / 2), (1, count / 2)] {
        let pool: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] == class).collect();
        if want > pool.len() {
            return Err(Error::invalid(format!(
                "{want} labels of class {class} requested, only {} nodes available",
                pool.len()
            )));
        }
        entries.extend(
            sample(&mut rng, pool.len(), want)
                .into_iter()
                .map(|idx| (pool[idx], class)),
        );
    }
    LabelSet::new(entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Standard propagation from the labeled nodes only.
    Lpa,
    /// Accuracy-weighted average of the votes, no graph.
    WeightedPrior,
    /// Propagation with the accuracy-weighted prior at constant `μ`.
    LpaWl,
    /// Dongle-node fusion with the given trust weights.
    Lpad(AlphaScheme),
}

impl Method {
    pub fn all() -> Vec<Method> {
        let mut v = vec![Method::Lpa, Method::WeightedPrior, Method::LpaWl];
        v.extend(AlphaScheme::ALL.iter().map(|&s| Method::Lpad(s)));
        v
    }

    pub fn name(&self) -> String {
        match self {
            Method::Lpa => "lpa".into(),
            Method::WeightedPrior => "weighted-prior".into(),
            Method::LpaWl => "lpa+wl".into(),
            Method::Lpad(s) => format!("lpad-{}", s.as_str()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub labeled_count: usize,
    pub t: f64,
    pub mu: f64,
    pub epsilon: f64,
    pub alpha_constant: f64,
    pub boosting_scale: f64,
    pub probabilistic: ProbabilisticConfig,
    pub methods: Vec<Method>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            labeled_count: 100,
            t: 10.0,
            mu: 1.0,
            epsilon: DEFAULT_EPSILON,
            alpha_constant: 1.0,
            boosting_scale: 1.0,
            probabilistic: ProbabilisticConfig::default(),
            methods: Method::all(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub method: String,
    pub metrics: Metrics,
    /// Absent for methods that do not propagate.
    pub bound: Option<BoundReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub spec: SyntheticSpec,
    pub config: PipelineConfig,
    pub node_count: usize,
    pub edge_count: usize,
    pub average_degree: f64,
    pub estimated_accuracies: Vec<f64>,
    pub rows: Vec<MethodResult>,
}

impl ComparisonTable {
    pub fn row(&self, method: Method) -> Option<&MethodResult> {
        let name = method.name();
        self.rows.iter().find(|r| r.method == name)
    }

    /// Aligned-column text rendering.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "nodes {}  edges {}  avg degree {:.3}  labeled {}  seed {}",
            self.node_count, self.edge_count, self.average_degree, self.config.labeled_count, self.spec.seed
        );
        let _ = writeln!(
            s,
            "{:<20} {:>9} {:>9} {:>9} {:>11}",
            "method", "accuracy", "coverage", "na-acc", "max-bound"
        );
        for r in &self.rows {
            let bound = r
                .bound
                .as_ref()
                .and_then(|b| b.hops.iter().map(|h| h.exact_bound).reduce(f64::max))
                .map_or_else(|| "-".to_string(), |b| format!("{b:.4}"));
            let _ = writeln!(
                s,
                "{:<20} {:>9.4} {:>9.4} {:>9.4} {:>11}",
                r.method, r.metrics.accuracy, r.metrics.coverage, r.metrics.non_abstain_accuracy, bound
            );
        }
        s
    }
}

/// Generates one synthetic instance and runs every requested method on it.
pub fn pipeline_report(spec: &SyntheticSpec, config: &PipelineConfig) -> Result<ComparisonTable> {
    let (features, truth) = generate_clusters(spec)?;
    let votes = generate_weak_labelers(&truth, &spec.labeler_accuracies, &spec.labeler_coverages, spec.seed)?;
    let labels = sample_balanced_labels(&truth, config.labeled_count, spec.seed)?;
    let graph = build_threshold_graph(&features, config.t)?;
    let partition = compute_neighborhoods(&graph, &labels)?;
    let n = graph.node_count();
    let solver = SolverConfig::default();

    let acc = estimate_accuracy_from_labeled(&votes, &labels)?;
    let weighted = reduce_to_single_prior(&votes, &alpha_accuracy(&votes, &acc)?)?;

    let mut rows = Vec::with_capacity(config.methods.len());
    for &method in &config.methods {
        let (f, prior) = match method {
            Method::Lpa => (
                solve_standard(&graph, &labels, &solver)?.values,
                Some(PriorField::uninformative(n)),
            ),
            Method::WeightedPrior => {
                let mut f = weighted.h().to_vec();
                for &(i, y) in labels.entries() {
                    f[i] = f64::from(y);
                }
                (f, None)
            }
            Method::LpaWl => {
                let prior = PriorField::new(weighted.h().to_vec(), vec![config.mu; n])?;
                (solve_with_prior(&graph, &labels, &prior, &solver)?.values, Some(prior))
            }
            Method::Lpad(scheme) => {
                let alpha: AlphaAssignment = match scheme {
                    AlphaScheme::Oracle => alpha_oracle(&votes, &truth)?,
                    AlphaScheme::Accuracy => alpha_accuracy(&votes, &acc)?,
                    AlphaScheme::Boosting => alpha_boosting(&votes, &acc, config.boosting_scale)?,
                    AlphaScheme::Probabilistic => {
                        alpha_probabilistic(&votes, &features, &labels, &config.probabilistic)?
                    }
                    AlphaScheme::Constant => alpha_constant(&votes, config.alpha_constant)?,
                };
                let f = solve_multi_source(&graph, &labels, &votes, &alpha, &solver)?.values;
                (f, Some(reduce_to_single_prior(&votes, &alpha)?))
            }
        };
        let metrics = evaluate(&f, &truth, config.epsilon)?;
        let bound = prior
            .map(|p| bound_for_prediction(&graph, &truth, &p, &partition, &f))
            .transpose()?;
        rows.push(MethodResult {
            method: method.name(),
            metrics,
            bound,
        });
    }

    Ok(ComparisonTable {
        spec: spec.clone(),
        config: config.clone(),
        node_count: n,
        edge_count: graph.edge_count(),
        average_degree: graph.average_degree(),
        estimated_accuracies: acc.values().to_vec(),
        rows,
    })
}
