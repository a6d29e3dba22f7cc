mod common;

use common::*;
use priorprop::multi_source::{augment_with_dongles, reduce_to_single_prior, solve_multi_source};
use priorprop::solver::{fixed_point_residual, solve_soft, solve_with_prior};
use priorprop::{NodeFlag, Prediction, SolverConfig};
use rand::Rng;

fn compare_anchored(pred: &Prediction, oracle: &[f64], tol: f64) {
    for (i, flag) in pred.flags.iter().enumerate() {
        match flag {
            NodeFlag::Ok => assert!(
                (pred.values[i] - oracle[i]).abs() < tol,
                "node {i}: {} vs {}",
                pred.values[i],
                oracle[i]
            ),
            NodeFlag::Unreachable => assert_eq!(pred.values[i], 0.5),
            NodeFlag::Nonconverged => panic!("direct solve flagged nonconverged"),
        }
    }
}

#[test]
fn prior_solver_matches_dense_oracle() {
    let mut rng = rng(1);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let g = random_graph(&mut rng, n, 0.5, 2.0);
        let truth = random_truth(&mut rng, n);
        let labels = random_labels(&mut rng, &truth, n);
        let prior = random_prior(&mut rng, n);
        let pred = solve_with_prior(&g, &labels, &prior, &SolverConfig::default()).unwrap();
        compare_anchored(&pred, &oracle_with_prior(&g, &labels, &prior), 1e-5);
    }
}

#[test]
fn iterative_solver_matches_dense_oracle() {
    let mut rng = rng(2);
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let g = random_graph(&mut rng, n, 0.6, 2.0);
        let truth = random_truth(&mut rng, n);
        let labels = random_labels(&mut rng, &truth, n);
        let prior = random_prior(&mut rng, n);
        let pred = solve_with_prior(&g, &labels, &prior, &SolverConfig::iterative()).unwrap();
        if pred.converged {
            compare_anchored(&pred, &oracle_with_prior(&g, &labels, &prior), 1e-5);
        }
    }
}

#[test]
fn soft_solver_matches_dense_oracle() {
    let mut rng = rng(3);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let g = random_graph(&mut rng, n, 0.5, 2.0);
        let truth = random_truth(&mut rng, n);
        let labels = random_labels(&mut rng, &truth, n);
        let eta = rng.random_range(0.05..=20.0);
        let pred = solve_soft(&g, &labels, eta).unwrap();
        compare_anchored(&pred, &oracle_soft(&g, &labels, eta), 1e-5);
    }
}

#[test]
fn multi_source_matches_dense_oracle() {
    let mut rng = rng(4);
    for _ in 0..200 {
        let n = rng.random_range(2..=8);
        let k = rng.random_range(1..=4);
        let g = random_graph(&mut rng, n, 0.5, 2.0);
        let truth = random_truth(&mut rng, n);
        let labels = random_labels(&mut rng, &truth, n);
        let votes = random_votes(&mut rng, n, k, 0.5);
        let alpha = random_alpha(&mut rng, &votes);
        let pred = solve_multi_source(&g, &labels, &votes, &alpha, &SolverConfig::default()).unwrap();
        compare_anchored(&pred, &oracle_votes(&g, &labels, &votes, &alpha), 1e-5);
    }
}

#[test]
fn hard_solutions_satisfy_averaging_update() {
    let mut rng = rng(5);
    for _ in 0..300 {
        let n = rng.random_range(2..=30);
        let g = random_graph(&mut rng, n, 0.3, 2.0);
        let truth = random_truth(&mut rng, n);
        let labels = random_labels(&mut rng, &truth, n / 2 + 1);
        let prior = random_prior(&mut rng, n);
        let pred = solve_with_prior(&g, &labels, &prior, &SolverConfig::default()).unwrap();
        assert!(pred.residual < 1e-6, "reported residual {}", pred.residual);
        if pred.flags.iter().all(|&f| f == NodeFlag::Ok) {
            assert!(fixed_point_residual(&g, &labels, &prior, &pred.values) < 1e-6);
        }
    }
}

#[test]
fn dongle_solution_equals_reduced_prior_solution() {
    let mut rng = rng(6);
    for _ in 0..100 {
        let n = rng.random_range(2..=12);
        let k = rng.random_range(1..=4);
        let g = random_graph(&mut rng, n, 0.4, 2.0);
        let truth = random_truth(&mut rng, n);
        let labels = random_labels(&mut rng, &truth, n);
        let abstain = rng.random_range(0.0..=0.5);
        let votes = random_votes(&mut rng, n, k, abstain);
        let alpha = random_alpha(&mut rng, &votes);
        let cfg = SolverConfig::default();
        let dongle = solve_multi_source(&g, &labels, &votes, &alpha, &cfg).unwrap();
        let prior = reduce_to_single_prior(&votes, &alpha).unwrap();
        let reduced = solve_with_prior(&g, &labels, &prior, &cfg).unwrap();
        assert_eq!(dongle.flags, reduced.flags);
        assert!(max_abs_diff(&dongle.values, &reduced.values) < 1e-8);
    }
}

#[test]
fn augmented_graph_adds_two_dongles_per_labeler() {
    let mut rng = rng(7);
    let g = random_graph(&mut rng, 6, 0.5, 1.0);
    let votes = random_votes(&mut rng, 6, 3, 0.3);
    let alpha = random_alpha(&mut rng, &votes);
    let aug = augment_with_dongles(&g, &votes, &alpha).unwrap();
    assert_eq!(aug.graph.node_count(), 6 + 2 * 3);
    for e in &aug.dongle_edges {
        let class = (e.dongle - 6) / 3;
        let labeler = (e.dongle - 6) % 3;
        assert_eq!(votes.get(e.node, labeler), Some(class as u8));
        assert_eq!(e.weight, alpha.get(e.node, labeler));
    }
}
