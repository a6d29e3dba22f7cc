//! Random instances and a dense quadratic-minimization oracle.
//!
//! The oracle never looks at the solvers: it recovers the quadratic form of
//! an objective from point evaluations and minimizes it with an SVD
//! pseudo-inverse.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use priorprop::multi_source::{AlphaAssignment, AlphaScheme, WeakVoteMatrix};
use priorprop::{Graph, Label, LabelSet, PriorField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64, max_weight: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                edges.push((i, j, rng.random_range(0.0..=max_weight)));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

pub fn random_truth(rng: &mut ChaCha8Rng, n: usize) -> Vec<Label> {
    (0..n).map(|_| rng.random_range(0..2)).collect()
}

/// Non-empty random subset of the nodes, labeled with `truth`.
pub fn random_labels(rng: &mut ChaCha8Rng, truth: &[Label], max_count: usize) -> LabelSet {
    let n = truth.len();
    let count = rng.random_range(1..=max_count.clamp(1, n));
    let nodes = rand::seq::index::sample(rng, n, count);
    LabelSet::from_truth(nodes, truth).unwrap()
}

pub fn random_prior(rng: &mut ChaCha8Rng, n: usize) -> PriorField {
    let h = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
    let mu = (0..n)
        .map(|_| match rng.random_range(0..4) {
            0 => 0.0,
            _ => rng.random_range(0.0..=5.0),
        })
        .collect();
    PriorField::new(h, mu).unwrap()
}

pub fn random_votes(rng: &mut ChaCha8Rng, n: usize, k: usize, abstain_rate: f64) -> WeakVoteMatrix {
    let votes = (0..n * k)
        .map(|_| (!rng.random_bool(abstain_rate)).then(|| rng.random_range(0..2)))
        .collect();
    WeakVoteMatrix::new(n, k, votes).unwrap()
}

pub fn random_alpha(rng: &mut ChaCha8Rng, votes: &WeakVoteMatrix) -> AlphaAssignment {
    let (n, k) = (votes.node_count(), votes.labeler_count());
    let mut values = vec![0.0; n * k];
    for i in 0..n {
        for j in 0..k {
            if votes.get(i, j).is_some() {
                values[i * k + j] = rng.random_range(0.0..=3.0);
            }
        }
    }
    AlphaAssignment::new(votes, values, AlphaScheme::Constant).unwrap()
}

/// Ordered-pair double sum `Σᵢ Σⱼ wᵢⱼ (fᵢ − fⱼ)²`.
pub fn ordered_pair_energy(graph: &Graph, f: &[f64]) -> f64 {
    let n = graph.node_count();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            total += graph.weight(i, j) * (f[i] - f[j]).powi(2);
        }
    }
    total
}

/// `½ Σᵢⱼ wᵢⱼ (fᵢ − fⱼ)² + Σᵢ μᵢ (fᵢ − hᵢ)²`.
pub fn prior_objective(graph: &Graph, prior: &PriorField, f: &[f64]) -> f64 {
    let reg: f64 = (0..f.len())
        .map(|i| prior.mu()[i] * (f[i] - prior.h()[i]).powi(2))
        .sum();
    0.5 * ordered_pair_energy(graph, f) + reg
}

/// `Σᵢⱼ wᵢⱼ (fᵢ − fⱼ)² + η Σ_{i∈L} (fᵢ − yᵢ)²`.
pub fn soft_objective(graph: &Graph, labels: &LabelSet, eta: f64, f: &[f64]) -> f64 {
    let fit: f64 = labels
        .entries()
        .iter()
        .map(|&(i, y)| (f[i] - f64::from(y)).powi(2))
        .sum();
    ordered_pair_energy(graph, f) + eta * fit
}

/// `½ Σᵢⱼ wᵢⱼ (fᵢ − fⱼ)² + Σᵢ Σⱼ αⱼ(xᵢ) (fᵢ − vⱼ(xᵢ))²`.
pub fn vote_objective(graph: &Graph, votes: &WeakVoteMatrix, alpha: &AlphaAssignment, f: &[f64]) -> f64 {
    let mut reg = 0.0;
    for (i, fi) in f.iter().enumerate() {
        for j in 0..votes.labeler_count() {
            if let Some(v) = votes.get(i, j) {
                reg += alpha.get(i, j) * (fi - f64::from(v)).powi(2);
            }
        }
    }
    0.5 * ordered_pair_energy(graph, f) + reg
}

/// Minimizes a quadratic `J` over the coordinates in `free`, holding the rest
/// of `base` fixed. Where the minimizer is not unique the minimum-norm
/// solution is returned.
pub fn dense_minimize(base: &[f64], free: &[usize], objective: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    let m = free.len();
    if m == 0 {
        return base.to_vec();
    }
    let mut point = base.to_vec();
    for &i in free {
        point[i] = 0.0;
    }
    let eval = |shifts: &[(usize, f64)]| {
        let mut p = point.clone();
        for &(idx, d) in shifts {
            p[free[idx]] += d;
        }
        objective(&p)
    };
    let j0 = eval(&[]);
    let plus: Vec<f64> = (0..m).map(|a| eval(&[(a, 1.0)])).collect();
    let minus: Vec<f64> = (0..m).map(|a| eval(&[(a, -1.0)])).collect();
    let mut hess = DMatrix::zeros(m, m);
    let mut grad = DVector::zeros(m);
    for a in 0..m {
        grad[a] = (plus[a] - minus[a]) / 2.0;
        hess[(a, a)] = plus[a] + minus[a] - 2.0 * j0;
        for b in a + 1..m {
            let both = eval(&[(a, 1.0), (b, 1.0)]);
            let v = both - plus[a] - plus[b] + j0;
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    // J(x) = ½ xᵀ H x + gᵀ x + J(0)  ⇒  H x = −g
    let x = hess.svd(true, true).solve(&(-grad), 1e-10).expect("svd solve");
    let mut out = base.to_vec();
    for (a, &i) in free.iter().enumerate() {
        out[i] = x[a];
    }
    out
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Oracle for the hard-constrained problem with a prior.
pub fn oracle_with_prior(graph: &Graph, labels: &LabelSet, prior: &PriorField) -> Vec<f64> {
    let n = graph.node_count();
    let mut base = vec![0.0; n];
    for &(i, y) in labels.entries() {
        base[i] = f64::from(y);
    }
    let free: Vec<usize> = (0..n).filter(|&i| labels.get(i).is_none()).collect();
    dense_minimize(&base, &free, |f| prior_objective(graph, prior, f))
}

pub fn oracle_soft(graph: &Graph, labels: &LabelSet, eta: f64) -> Vec<f64> {
    let n = graph.node_count();
    let free: Vec<usize> = (0..n).collect();
    dense_minimize(&vec![0.0; n], &free, |f| soft_objective(graph, labels, eta, f))
}

pub fn oracle_votes(graph: &Graph, labels: &LabelSet, votes: &WeakVoteMatrix, alpha: &AlphaAssignment) -> Vec<f64> {
    let n = graph.node_count();
    let mut base = vec![0.0; n];
    for &(i, y) in labels.entries() {
        base[i] = f64::from(y);
    }
    let free: Vec<usize> = (0..n).filter(|&i| labels.get(i).is_none()).collect();
    dense_minimize(&base, &free, |f| vote_objective(graph, votes, alpha, f))
}
