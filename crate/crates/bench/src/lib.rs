//! Fixtures shared by the benchmarks.

use priorprop::evaluation::{generate_clusters, generate_weak_labelers, sample_balanced_labels, SyntheticSpec};
use priorprop::multi_source::{alpha_accuracy, estimate_accuracy_from_labeled, reduce_to_single_prior};
use priorprop::{build_threshold_graph, FeatureMatrix, Graph, LabelSet, PriorField};

pub struct Instance {
    pub features: FeatureMatrix,
    pub graph: Graph,
    pub labels: LabelSet,
    pub prior: PriorField,
}

/// Two-cluster instance with `2 · points_per_cluster` nodes, a 10% labeled
/// set and the accuracy-weighted prior of three weak labelers.
pub fn two_clusters(points_per_cluster: usize, separation: f64, t: f64) -> Instance {
    let spec = SyntheticSpec {
        points_per_cluster,
        separation,
        ..SyntheticSpec::default()
    };
    let (features, truth) = generate_clusters(&spec).unwrap();
    let graph = build_threshold_graph(&features, t).unwrap();
    let labels = sample_balanced_labels(&truth, truth.len() / 10, spec.seed).unwrap();
    let votes = generate_weak_labelers(&truth, &spec.labeler_accuracies, &spec.labeler_coverages, spec.seed).unwrap();
    let acc = estimate_accuracy_from_labeled(&votes, &labels).unwrap();
    let prior = reduce_to_single_prior(&votes, &alpha_accuracy(&votes, &acc).unwrap()).unwrap();
    Instance {
        features,
        graph,
        labels,
        prior,
    }
}

/// Connected ring lattice: node `i` links to the next `k` nodes around the ring.
pub fn ring_lattice(n: usize, k: usize) -> Graph {
    let edges = (0..n).flat_map(|i| (1..=k).map(move |d| (i, (i + d) % n, 1.0)));
    Graph::from_edges(n, edges).unwrap()
}
