//! Minimum-loss routing from every source over fibre plus switch losses.
//!
//! Each edge entered costs one switch traversal, so a direct link pays one
//! switch and a `k`-edge path pays `k`. Equal-loss paths are broken by the
//! lexicographically smallest node sequence.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::NetworkGraph;

/// Name of the switch accounting rule, recorded in output metadata.
pub const SWITCH_ACCOUNTING: &str = "per-edge";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossModel {
    pub alpha_db_per_km: f64,
    pub switch_db: f64,
}

impl LossModel {
    pub fn new(alpha_db_per_km: f64, switch_db: f64) -> Result<Self> {
        if !(alpha_db_per_km > 0.0 && alpha_db_per_km.is_finite()) {
            return Err(Error::InvalidParams(format!("alpha {alpha_db_per_km} dB/km")));
        }
        if !(switch_db >= 0.0 && switch_db.is_finite()) {
            return Err(Error::InvalidParams(format!("switch loss {switch_db} dB")));
        }
        Ok(Self {
            alpha_db_per_km,
            switch_db,
        })
    }

    pub fn edge_cost(&self, length_km: f64) -> f64 {
        self.alpha_db_per_km * length_km + self.switch_db
    }
}

/// A realised route from one source.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Route {
    pub loss_db: f64,
    pub fibre_km: f64,
    pub hops: usize,
    pub nodes: Vec<usize>,
}

/// Weighted adjacency lists, neighbours sorted by id.
#[derive(Debug, Clone)]
pub struct Adjacency {
    lists: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    pub fn new(g: &NetworkGraph) -> Self {
        let mut lists = vec![Vec::new(); g.nodes.len()];
        for e in &g.edges {
            lists[e.u].push((e.v, e.length_km));
            lists[e.v].push((e.u, e.length_km));
        }
        for list in &mut lists {
            list.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        }
        Self { lists }
    }

    pub fn neighbours(&self, u: usize) -> &[(usize, f64)] {
        &self.lists[u]
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    /// Length of the shortest parallel edge between `u` and `v`.
    pub fn edge_length(&self, u: usize, v: usize) -> Option<f64> {
        self.lists[u]
            .iter()
            .filter(|&&(w, _)| w == v)
            .map(|&(_, len)| len)
            .min_by(|a, b| a.total_cmp(b))
    }
}

#[derive(PartialEq)]
struct Label {
    cost: f64,
    path: Vec<usize>,
}

impl Eq for Label {}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.path.cmp(&other.path))
    }
}

/// Minimum-loss routes from `source` to every node.
pub fn routes_from(adj: &Adjacency, source: usize, model: &LossModel) -> Vec<Option<Route>> {
    let n = adj.len();
    let mut best: Vec<Option<Label>> = (0..n).map(|_| None).collect();
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    best[source] = Some(Label {
        cost: 0.0,
        path: vec![source],
    });
    heap.push(Reverse(Label {
        cost: 0.0,
        path: vec![source],
    }));
    while let Some(Reverse(label)) = heap.pop() {
        let u = *label.path.last().expect("paths are never empty");
        if done[u] {
            continue;
        }
        done[u] = true;
        for &(v, len) in adj.neighbours(u) {
            if done[v] {
                continue;
            }
            let mut path = label.path.clone();
            path.push(v);
            let candidate = Label {
                cost: label.cost + model.edge_cost(len),
                path,
            };
            if best[v].as_ref().is_none_or(|cur| candidate < *cur) {
                heap.push(Reverse(Label {
                    cost: candidate.cost,
                    path: candidate.path.clone(),
                }));
                best[v] = Some(candidate);
            }
        }
    }
    best.into_iter()
        .map(|label| {
            label.map(|l| {
                let fibre_km = l
                    .path
                    .windows(2)
                    .map(|w| adj.edge_length(w[0], w[1]).expect("route follows edges"))
                    .sum();
                Route {
                    loss_db: l.cost,
                    fibre_km,
                    hops: l.path.len() - 1,
                    nodes: l.path,
                }
            })
        })
        .collect()
}

/// Routes from every source to every node of a graph.
#[derive(Debug, Clone)]
pub struct LossTable {
    model: LossModel,
    sources: Vec<usize>,
    candidates: Vec<usize>,
    row_of: HashMap<usize, usize>,
    rows: Vec<Vec<Route>>,
    adjacency: Adjacency,
}

impl LossTable {
    pub fn model(&self) -> &LossModel {
        &self.model
    }

    pub fn sources(&self) -> &[usize] {
        &self.sources
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn route(&self, source: usize, to: usize) -> &Route {
        let row = self.row_of[&source];
        &self.rows[row][to]
    }

    pub fn loss(&self, source: usize, to: usize) -> f64 {
        self.route(source, to).loss_db
    }

    pub fn hops(&self, source: usize, to: usize) -> usize {
        self.route(source, to).hops
    }

    /// Fibre lengths of the edges along the route, in path order.
    pub fn edge_lengths(&self, source: usize, to: usize) -> Vec<f64> {
        self.route(source, to)
            .nodes
            .windows(2)
            .map(|w| self.adjacency.edge_length(w[0], w[1]).expect("route follows edges"))
            .collect()
    }

    /// Arm losses with a detector at the fibre midpoint of the realised route.
    pub fn midpoint_arms(&self, source: usize, to: usize) -> (f64, f64) {
        split_at_midpoint(&self.edge_lengths(source, to), &self.model)
    }

    /// `(from, to, loss_db, hops)` rows for source-to-source and
    /// source-to-candidate routes.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["from", "to", "loss_db", "hops"])?;
        for &s in &self.sources {
            for &t in self.sources.iter().chain(&self.candidates) {
                if t == s {
                    continue;
                }
                let r = self.route(s, t);
                w.write_record([s.to_string(), t.to_string(), r.loss_db.to_string(), r.hops.to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }
}

pub fn build_loss_table(g: &NetworkGraph, model: &LossModel) -> Result<LossTable> {
    let adjacency = Adjacency::new(g);
    let sources = g.sources();
    let rows: Vec<Vec<Route>> = sources
        .par_iter()
        .map(|&s| {
            routes_from(&adjacency, s, model)
                .into_iter()
                .enumerate()
                .map(|(to, r)| r.ok_or(Error::Disconnected { from: s, to }))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(LossTable {
        model: *model,
        row_of: sources.iter().enumerate().map(|(row, &s)| (s, row)).collect(),
        candidates: g.candidates(),
        sources,
        rows,
        adjacency,
    })
}

/// Split a route at its fibre midpoint into two arm losses.
///
/// Both arms get half the fibre. The edge containing the cut pays its switch
/// to the upstream arm; a cut exactly on a node leaves every edge whole.
pub fn split_at_midpoint(edge_lengths_km: &[f64], model: &LossModel) -> (f64, f64) {
    if edge_lengths_km.is_empty() {
        return (0.0, 0.0);
    }
    let total: f64 = edge_lengths_km.iter().sum();
    let half = total / 2.0;
    let mut upstream_edges = edge_lengths_km.len();
    let mut covered = 0.0;
    for (i, len) in edge_lengths_km.iter().enumerate() {
        covered += len;
        if covered >= half {
            upstream_edges = i + 1;
            break;
        }
    }
    let fibre = model.alpha_db_per_km * half;
    let a = fibre + model.switch_db * upstream_edges as f64;
    let b = fibre + model.switch_db * (edge_lengths_km.len() - upstream_edges) as f64;
    (a, b)
}
