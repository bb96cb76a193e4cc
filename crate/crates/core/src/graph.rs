//! Random network instances: sources and candidate detector sites placed in a
//! square box, joined by straight fibre runs.

use std::collections::{BTreeSet, HashMap};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Source,
    Candidate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: usize,
    pub x_km: f64,
    pub y_km: f64,
    pub role: Role,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length_km: f64,
}

/// How fibre links are drawn between placed nodes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorKind {
    /// Shortest node pairs first, globally, until the mean degree is reached.
    #[default]
    NearestPair,
    /// Nodes take turns linking to their nearest non-neighbour.
    RoundRobinNearest,
    /// Uniformly random node pairs, blind to geometry.
    RandomPairs,
}

impl GeneratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratorKind::NearestPair => "nearest-pair",
            GeneratorKind::RoundRobinNearest => "round-robin-nearest",
            GeneratorKind::RandomPairs => "random-pairs",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkGraph {
    pub box_side_km: f64,
    /// Generator that produced the edges; links are always topped up with
    /// minimum-spanning-tree edges until the graph is connected.
    pub generator: GeneratorKind,
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

/// Parameters of [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub box_side_km: f64,
    pub n_sources: usize,
    pub n_candidates: usize,
    pub target_mean_degree: f64,
    pub generator: GeneratorKind,
}

impl GraphSpec {
    pub fn new(box_side_km: f64, n_sources: usize, n_candidates: usize, target_mean_degree: f64) -> Self {
        Self {
            box_side_km,
            n_sources,
            n_candidates,
            target_mean_degree,
            generator: GeneratorKind::default(),
        }
    }

    pub fn with_generator(mut self, generator: GeneratorKind) -> Self {
        self.generator = generator;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.n_sources < 2 {
            return Err(Error::InvalidGraph("need at least 2 sources".into()));
        }
        if self.n_candidates < 1 {
            return Err(Error::InvalidGraph("need at least 1 candidate site".into()));
        }
        if !(self.box_side_km >= 0.0 && self.box_side_km.is_finite()) {
            return Err(Error::InvalidGraph(format!("box side {} km", self.box_side_km)));
        }
        let n = self.n_sources + self.n_candidates;
        if !(self.target_mean_degree >= 2.0) {
            return Err(Error::InvalidGraph(format!(
                "target mean degree {} is below 2",
                self.target_mean_degree
            )));
        }
        if self.target_mean_degree > (n - 1) as f64 {
            return Err(Error::InvalidGraph(format!(
                "target mean degree {} exceeds n - 1 = {}",
                self.target_mean_degree,
                n - 1
            )));
        }
        Ok(())
    }
}

fn distance(a: &Node, b: &Node) -> f64 {
    (a.x_km - b.x_km).hypot(a.y_km - b.y_km)
}

struct DisjointSet {
    parent: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// All node pairs ordered by distance, ties by ids.
fn pairs_by_distance(nodes: &[Node]) -> Vec<(f64, usize, usize)> {
    let mut pairs = Vec::with_capacity(nodes.len() * nodes.len() / 2);
    for u in 0..nodes.len() {
        for v in u + 1..nodes.len() {
            pairs.push((distance(&nodes[u], &nodes[v]), u, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    pairs
}

/// Build a random network. Nodes `0..n_sources` are sources, the rest are
/// candidate detector sites.
pub fn generate(spec: &GraphSpec, seed: u64) -> Result<NetworkGraph> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = spec.n_sources + spec.n_candidates;
    let nodes: Vec<Node> = (0..n)
        .map(|id| Node {
            id,
            x_km: rng.random::<f64>() * spec.box_side_km,
            y_km: rng.random::<f64>() * spec.box_side_km,
            role: if id < spec.n_sources {
                Role::Source
            } else {
                Role::Candidate
            },
        })
        .collect();

    let target_edges = (spec.target_mean_degree * n as f64 / 2.0).ceil() as usize;
    let by_distance = pairs_by_distance(&nodes);
    let mut chosen: BTreeSet<(usize, usize)> = BTreeSet::new();

    match spec.generator {
        GeneratorKind::NearestPair => {
            for &(_, u, v) in by_distance.iter().take(target_edges) {
                chosen.insert((u, v));
            }
        }
        GeneratorKind::RoundRobinNearest => {
            let mut neighbours: Vec<Vec<usize>> = (0..n)
                .map(|u| {
                    let mut others: Vec<usize> = (0..n).filter(|&v| v != u).collect();
                    others.sort_by(|&a, &b| {
                        distance(&nodes[u], &nodes[a])
                            .total_cmp(&distance(&nodes[u], &nodes[b]))
                            .then(a.cmp(&b))
                    });
                    others.reverse();
                    others
                })
                .collect();
            'fill: loop {
                let mut progressed = false;
                for u in 0..n {
                    while let Some(v) = neighbours[u].pop() {
                        if chosen.insert((u.min(v), u.max(v))) {
                            progressed = true;
                            break;
                        }
                    }
                    if chosen.len() >= target_edges {
                        break 'fill;
                    }
                }
                if !progressed {
                    break;
                }
            }
        }
        GeneratorKind::RandomPairs => {
            let mut all: Vec<(usize, usize)> = by_distance.iter().map(|&(_, u, v)| (u, v)).collect();
            all.sort_unstable();
            all.shuffle(&mut rng);
            chosen.extend(all.into_iter().take(target_edges));
        }
    }

    let mut components = DisjointSet::new(n);
    for &(u, v) in &chosen {
        components.union(u, v);
    }
    for &(_, u, v) in &by_distance {
        if components.union(u, v) {
            chosen.insert((u, v));
        }
    }

    let edges = chosen
        .into_iter()
        .map(|(u, v)| Edge {
            u,
            v,
            length_km: distance(&nodes[u], &nodes[v]),
        })
        .collect();
    Ok(NetworkGraph {
        box_side_km: spec.box_side_km,
        generator: spec.generator,
        nodes,
        edges,
    })
}

/// Structural summary of a graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphDiagnostics {
    pub connected: bool,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub n_sources: usize,
    pub n_candidates: usize,
    pub mean_degree: f64,
    pub min_degree: usize,
    pub max_degree: usize,
    pub self_loops: usize,
    pub duplicate_edges: usize,
    pub nodes_outside_box: usize,
    /// Edges whose length differs from the endpoint distance by over 1e-9 km.
    pub length_mismatches: usize,
}

impl GraphDiagnostics {
    pub fn is_well_formed(&self) -> bool {
        self.connected
            && self.self_loops == 0
            && self.duplicate_edges == 0
            && self.nodes_outside_box == 0
            && self.length_mismatches == 0
    }
}

pub fn validate(g: &NetworkGraph) -> GraphDiagnostics {
    let n = g.nodes.len();
    let index: HashMap<usize, usize> = g.nodes.iter().enumerate().map(|(i, node)| (node.id, i)).collect();
    let mut degree = vec![0usize; n];
    let mut seen = BTreeSet::new();
    let mut components = DisjointSet::new(n);
    let (mut self_loops, mut duplicate_edges, mut length_mismatches) = (0, 0, 0);
    for e in &g.edges {
        let (Some(&a), Some(&b)) = (index.get(&e.u), index.get(&e.v)) else {
            length_mismatches += 1;
            continue;
        };
        if a == b {
            self_loops += 1;
            continue;
        }
        if !seen.insert((a.min(b), a.max(b))) {
            duplicate_edges += 1;
        }
        degree[a] += 1;
        degree[b] += 1;
        components.union(a, b);
        if (distance(&g.nodes[a], &g.nodes[b]) - e.length_km).abs() > 1e-9 {
            length_mismatches += 1;
        }
    }
    let connected = n > 0 && (0..n).all(|i| components.find(i) == components.find(0));
    let side = g.box_side_km;
    GraphDiagnostics {
        connected,
        n_nodes: n,
        n_edges: g.edges.len(),
        n_sources: g.nodes.iter().filter(|x| x.role == Role::Source).count(),
        n_candidates: g.nodes.iter().filter(|x| x.role == Role::Candidate).count(),
        mean_degree: if n == 0 {
            0.0
        } else {
            degree.iter().sum::<usize>() as f64 / n as f64
        },
        min_degree: degree.iter().copied().min().unwrap_or(0),
        max_degree: degree.iter().copied().max().unwrap_or(0),
        self_loops,
        duplicate_edges,
        nodes_outside_box: g
            .nodes
            .iter()
            .filter(|x| !(0.0..=side).contains(&x.x_km) || !(0.0..=side).contains(&x.y_km))
            .count(),
        length_mismatches,
    }
}

impl NetworkGraph {
    pub fn sources(&self) -> Vec<usize> {
        self.ids_with(Role::Source)
    }

    pub fn candidates(&self) -> Vec<usize> {
        self.ids_with(Role::Candidate)
    }

    fn ids_with(&self, role: Role) -> Vec<usize> {
        self.nodes.iter().filter(|x| x.role == role).map(|x| x.id).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let g: NetworkGraph = serde_json::from_str(text)?;
        for (i, node) in g.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidGraph(format!("node at position {i} has id {}", node.id)));
            }
        }
        if let Some(e) = g.edges.iter().find(|e| e.u >= g.nodes.len() || e.v >= g.nodes.len()) {
            return Err(Error::InvalidGraph(format!(
                "edge ({}, {}) references a missing node",
                e.u, e.v
            )));
        }
        Ok(g)
    }

    /// Hex SHA-256 of the JSON serialisation.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("graph serialisation cannot fail");
        hex::encode(Sha256::digest(&json))
    }
}
