use priorprop::bound::{audit_inequalities, compute_bound, compute_flows, smoothness, AuditKind, AUDIT_SLACK};
use priorprop::solver::solve_with_prior;
use priorprop::spectral::{second_smallest_eigenvalue, spectral_beta, spectral_bound, spectral_rhs, FullParams};
use priorprop::{compute_neighborhoods, Graph, LabelSet, PriorField, SolverConfig};

fn clique(offset: usize, size: usize) -> Vec<(usize, usize, f64)> {
    (0..size)
        .flat_map(|i| (i + 1..size).map(move |j| (offset + i, offset + j, 1.0)))
        .collect()
}

/// Two 5-cliques joined by one bridge whose endpoints carry the labels.
fn smooth_two_cluster() -> (Graph, Vec<u8>, LabelSet) {
    let mut edges = clique(0, 5);
    edges.extend(clique(5, 5));
    edges.push((0, 5, 1.0));
    let g = Graph::from_edges(10, edges).unwrap();
    let truth: Vec<u8> = (0..10).map(|i| u8::from(i >= 5)).collect();
    let labels = LabelSet::from_truth([0, 5], &truth).unwrap();
    (g, truth, labels)
}

#[test]
fn smooth_labels_with_exact_prior_give_zero_bound() {
    let (g, truth, labels) = smooth_two_cluster();
    let p = compute_neighborhoods(&g, &labels).unwrap();
    let prior = PriorField::new(truth.iter().map(|&y| f64::from(y)).collect(), vec![1.0; 10]).unwrap();
    let report = compute_bound(&g, &truth, &prior, &p, &SolverConfig::default()).unwrap();
    assert!(!report.hops.is_empty());
    for h in &report.hops {
        assert_eq!(h.c, 0.0);
        assert_eq!(h.d, 0.0);
        assert_eq!(h.informal_bound, 0.0);
        assert_eq!(h.exact_bound, 0.0);
        assert!(h.error < 1e-10);
    }
}

#[test]
fn crossing_in_edges_give_unit_c2() {
    // labeled p = 0 (class 0) and q = 1 (class 1); a1..a4 hang off p and
    // b1..b4 off q; x (class 0) sees only the b's, y (class 1) only the a's
    let (p, q, x, y) = (0, 1, 10, 11);
    let a: Vec<usize> = (2..6).collect();
    let b: Vec<usize> = (6..10).collect();
    let mut edges = Vec::new();
    for &ai in &a {
        edges.push((p, ai, 1.0));
        edges.push((ai, y, 1.0));
    }
    for &bi in &b {
        edges.push((q, bi, 1.0));
        edges.push((bi, x, 1.0));
    }
    let g = Graph::from_edges(12, edges).unwrap();
    let mut truth = vec![0u8; 12];
    truth[q] = 1;
    for &bi in &b {
        truth[bi] = 1;
    }
    truth[y] = 1;
    let labels = LabelSet::from_truth([p, q], &truth).unwrap();
    let part = compute_neighborhoods(&g, &labels).unwrap();
    assert_eq!(part.hop(2), &[x, y]);
    let flows = compute_flows(&g, &part).unwrap();
    assert_eq!(flows.c_in[2], 8.0);
    assert_eq!(smoothness(&g, &truth, &part, 2), 8.0);
    let report = compute_bound(
        &g,
        &truth,
        &PriorField::uninformative(12),
        &part,
        &SolverConfig::default(),
    )
    .unwrap();
    assert_eq!(report.hops[1].c, 1.0);
}

#[test]
fn symmetric_hop_has_unit_error_ratios() {
    // 0 labeled; 1 and 2 mirror each other; 3 closes the diamond
    let g = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]).unwrap();
    let truth = vec![0u8; 4];
    let labels = LabelSet::from_truth([0], &truth).unwrap();
    let part = compute_neighborhoods(&g, &labels).unwrap();
    let prior = PriorField::uniform(4, 1.0, 1.0).unwrap();
    let report = compute_bound(&g, &truth, &prior, &part, &SolverConfig::default()).unwrap();
    let hop = &report.hops[0];
    assert!((hop.a.unwrap() - 1.0).abs() < 1e-12);
    assert!((hop.b.unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn perturbed_prediction_fails_node_audit() {
    let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
    let truth = vec![0u8, 0];
    let labels = LabelSet::from_truth([0], &truth).unwrap();
    let part = compute_neighborhoods(&g, &labels).unwrap();
    let prior = PriorField::uninformative(2);
    let mut pred = solve_with_prior(&g, &labels, &prior, &SolverConfig::default()).unwrap();
    let clean = audit_inequalities(&g, &truth, &prior, &pred, &part, AUDIT_SLACK).unwrap();
    assert!(clean.passed);
    pred.values[1] += 0.2;
    let bad = audit_inequalities(&g, &truth, &prior, &pred, &part, AUDIT_SLACK).unwrap();
    assert!(!bad.passed);
    let node = bad.summary.iter().find(|s| s.kind == AuditKind::NodeError).unwrap();
    assert_eq!(node.failed, 1);
}

#[test]
fn single_hop_audits_skip_interior_checks() {
    let g = Graph::from_edges(4, [(0, 1, 1.0), (0, 2, 1.0), (0, 3, 2.0)]).unwrap();
    let truth = vec![0u8, 1, 0, 0];
    let labels = LabelSet::from_truth([0], &truth).unwrap();
    let part = compute_neighborhoods(&g, &labels).unwrap();
    let prior = PriorField::uninformative(4);
    let pred = solve_with_prior(&g, &labels, &prior, &SolverConfig::default()).unwrap();
    let audit = audit_inequalities(&g, &truth, &prior, &pred, &part, AUDIT_SLACK).unwrap();
    let count = |k| audit.summary.iter().find(|s| s.kind == k).unwrap().checked;
    assert_eq!(count(AuditKind::HopBalance), 0);
    assert_eq!(count(AuditKind::HopRecursion), 0);
    assert_eq!(count(AuditKind::LastHopBalance), 1);
    assert_eq!(count(AuditKind::NodeError), 3);
}

#[test]
fn four_cycle_has_lambda_two() {
    let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
    assert!((second_smallest_eigenvalue(&g).unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn complete_graph_spectral_report_matches_formula() {
    let g = Graph::from_edges(4, clique(0, 4)).unwrap();
    let truth = vec![0u8, 1, 0, 1];
    let labels = LabelSet::from_truth(0..4, &truth).unwrap();
    let f = [0.1, 0.8, 0.3, 0.9];
    let (eta, delta) = (1.0, 0.1);
    let r = spectral_bound(&g, &f, &labels, &truth, eta, delta, None).unwrap();
    let lambda: f64 = 4.0;
    let n: f64 = 4.0;
    let beta = 3.0 * eta * eta * n.sqrt() / (lambda - eta).powi(2) + 4.0 * eta / (lambda - eta);
    let bound = beta + (2.0 * (2.0f64 / delta).ln() / n).sqrt() * (n * beta + 4.0);
    assert!((r.beta.unwrap() - beta).abs() < 1e-12);
    assert!((r.bound.unwrap() - bound).abs() < 1e-12);
    let rn = (0.01 + 0.04 + 0.09 + 0.01) / 4.0;
    assert!((r.empirical_risk - rn).abs() < 1e-15);
    assert_eq!(r.empirical_risk, r.risk);
}

#[test]
fn full_parameters_enter_the_formula() {
    let p = FullParams { t: 2.0, m: 1.0, k: 3.0 };
    let beta = spectral_beta(10.0, 1.5, 9, p).unwrap();
    let expected = 3.0 * 1.5 * 1.5 * (18.0f64).sqrt() / 49.0 + 4.0 * 1.5 / 7.0;
    assert!((beta - expected).abs() < 1e-12);
    let rhs = spectral_rhs(beta, 9, 0.05, p);
    let expected_rhs = beta + (2.0 * 40.0f64.ln() / 9.0).sqrt() * (9.0 * beta + 16.0);
    assert!((rhs - expected_rhs).abs() < 1e-12);
    assert_eq!(spectral_beta(3.0, 1.5, 9, p), None);
}

#[test]
fn exact_fit_has_zero_risk_gap() {
    let g = Graph::from_edges(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (4, 0, 1.0)]).unwrap();
    let truth = vec![1u8, 0, 1, 1, 0];
    let f: Vec<f64> = truth.iter().map(|&y| f64::from(y)).collect();
    let labels = LabelSet::from_truth([0, 1, 2, 3], &truth).unwrap();
    let r = spectral_bound(&g, &f, &labels, &truth, 0.1, 0.1, None).unwrap();
    assert_eq!((r.empirical_risk, r.risk, r.risk_gap), (0.0, 0.0, 0.0));
    assert!(r.risk_gap <= r.bound.unwrap());
}

#[test]
fn bound_report_survives_json() {
    let (g, truth, labels) = smooth_two_cluster();
    let p = compute_neighborhoods(&g, &labels).unwrap();
    let prior = PriorField::uniform(10, 0.3, 2.0).unwrap();
    let report = compute_bound(&g, &truth, &prior, &p, &SolverConfig::default()).unwrap();
    let text = serde_json::to_string(&report).unwrap();
    let back: priorprop::bound::BoundReport = serde_json::from_str(&text).unwrap();
    assert_eq!(back, report);
}
