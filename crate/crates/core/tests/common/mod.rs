#![allow(dead_code)]

use qkdnet::graph::{generate, GraphSpec, NetworkGraph};
use qkdnet::pathloss::LossModel;

/// Minimum loss from `s` to `t` over every simple path, by exhaustive search.
pub fn brute_force_loss(g: &NetworkGraph, model: &LossModel, s: usize, t: usize) -> Option<f64> {
    let n = g.nodes.len();
    let mut adj = vec![Vec::new(); n];
    for e in &g.edges {
        adj[e.u].push((e.v, e.length_km));
        adj[e.v].push((e.u, e.length_km));
    }
    let mut best: Option<f64> = None;
    let mut seen = vec![false; n];
    fn walk(
        u: usize,
        t: usize,
        cost: f64,
        adj: &[Vec<(usize, f64)>],
        model: &LossModel,
        seen: &mut [bool],
        best: &mut Option<f64>,
    ) {
        if u == t {
            if best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            return;
        }
        seen[u] = true;
        for &(v, len) in &adj[u] {
            if !seen[v] {
                walk(v, t, cost + model.edge_cost(len), adj, model, seen, best);
            }
        }
        seen[u] = false;
    }
    walk(s, t, 0.0, &adj, model, &mut seen, &mut best);
    best
}

/// Small random graph with at most eight nodes.
pub fn small_graph(seed: u64, n_sources: usize, n_candidates: usize, box_km: f64) -> NetworkGraph {
    let degree = ((n_sources + n_candidates - 1) as f64).min(3.0);
    generate(&GraphSpec::new(box_km, n_sources, n_candidates, degree), seed).expect("valid spec")
}
