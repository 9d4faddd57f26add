//! Undirected AS adjacency graphs built from data-plane paths, their
//! enforcement-pruned variants and graph metrics.

mod edgelist;
mod metrics;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

pub use edgelist::{format_edge_list, parse_edge_list, EdgeListError};
pub use metrics::{format_metrics_table, metrics, metrics_without_spectrum, GraphError, GraphMetrics};

use crate::ingest::{Hop, IxpId, MeasuredPath};
use crate::rpki::{Asn, Validity};
use crate::simnet::Topology;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Direct,
    /// Adjacency observed only across the given IXP's address space.
    Indirect(IxpId),
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeKind::Direct => f.write_str("direct"),
            EdgeKind::Indirect(_) => f.write_str("indirect"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeData {
    pub kind: EdgeKind,
    pub valid: u32,
    pub invalid: u32,
}

/// Undirected simple graph over ASes. Edge keys hold the lower ASN first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathGraph {
    vertices: BTreeSet<Asn>,
    edges: BTreeMap<(Asn, Asn), EdgeData>,
}

fn key(a: Asn, b: Asn) -> (Asn, Asn) {
    (a.min(b), a.max(b))
}

impl PathGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_vertex(&mut self, v: Asn) {
        self.vertices.insert(v);
    }

    /// Adds or merges an edge. A pair seen directly at least once stays
    /// direct; otherwise the lowest IXP id is kept. Self-loops are ignored.
    pub fn add_edge(&mut self, a: Asn, b: Asn, kind: EdgeKind, valid: u32, invalid: u32) {
        if a == b {
            return;
        }
        self.vertices.insert(a);
        self.vertices.insert(b);
        let e = self.edges.entry(key(a, b)).or_insert(EdgeData {
            kind,
            valid: 0,
            invalid: 0,
        });
        e.kind = e.kind.min(kind);
        e.valid += valid;
        e.invalid += invalid;
    }

    pub fn vertices(&self) -> &BTreeSet<Asn> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeMap<(Asn, Asn), EdgeData> {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, a: Asn, b: Asn) -> Option<&EdgeData> {
        self.edges.get(&key(a, b))
    }

    pub fn adjacency(&self) -> BTreeMap<Asn, Vec<Asn>> {
        let mut adj: BTreeMap<Asn, Vec<Asn>> = self.vertices.iter().map(|v| (*v, Vec::new())).collect();
        for (a, b) in self.edges.keys() {
            adj.get_mut(a).expect("endpoint").push(*b);
            adj.get_mut(b).expect("endpoint").push(*a);
        }
        adj
    }

    fn filtered(&self, keep: impl Fn(&(Asn, Asn), &EdgeData) -> bool) -> PathGraph {
        PathGraph {
            vertices: self.vertices.clone(),
            edges: self
                .edges
                .iter()
                .filter(|(k, e)| keep(k, e))
                .map(|(k, e)| (*k, *e))
                .collect(),
        }
    }

    /// Session graph of a simulated topology, IXP nodes excluded.
    pub fn from_topology(topology: &Topology) -> PathGraph {
        let mut g = PathGraph::new();
        for n in topology.nodes() {
            if n.kind != crate::simnet::AsKind::Ixp {
                g.add_vertex(n.asn);
            }
        }
        for s in topology.sessions() {
            let kind = match s.via_ixp {
                Some(v) => EdgeKind::Indirect(crate::simnet::emit::ixp_id(v.ixp)),
                None => EdgeKind::Direct,
            };
            g.add_edge(s.a, s.b, kind, 0, 0);
        }
        g
    }
}

/// G1: every AS on any path; consecutive ASes give direct edges and ASes
/// separated by a single IXP hop give indirect edges. Edge counters accrue
/// each reached path once.
pub fn build_g1(paths: &[MeasuredPath]) -> PathGraph {
    let mut g = PathGraph::new();
    for p in paths {
        for h in &p.hops {
            if let Hop::As(a) = h {
                g.add_vertex(*a);
            }
        }
        let (valid, invalid) = match p.verdict {
            Validity::Valid => (1, 0),
            Validity::Invalid => (0, 1),
            Validity::Unknown => (0, 0),
        };
        let mut seen = BTreeMap::new();
        for (i, h) in p.hops.iter().enumerate() {
            let Hop::As(a) = *h else { continue };
            let (b, kind) = match (p.hops.get(i + 1), p.hops.get(i + 2)) {
                (Some(Hop::As(b)), _) => (*b, EdgeKind::Direct),
                (Some(Hop::Ixp(ixp)), Some(Hop::As(b))) => (*b, EdgeKind::Indirect(*ixp)),
                _ => continue,
            };
            let e = seen.entry(key(a, b)).or_insert((a, b, kind));
            e.2 = e.2.min(kind);
        }
        for (a, b, kind) in seen.into_values() {
            g.add_edge(a, b, kind, valid, invalid);
        }
    }
    g
}

/// G2: G1 without any edge incident to an enforcing AS.
pub fn derive_g2(g1: &PathGraph, enforcing: &BTreeSet<Asn>) -> PathGraph {
    g1.filtered(|(a, b), _| !enforcing.contains(a) && !enforcing.contains(b))
}

/// G3: G1 without indirect edges that never carried an invalid path.
pub fn derive_g3(g1: &PathGraph) -> PathGraph {
    g1.filtered(|_, e| !(matches!(e.kind, EdgeKind::Indirect(_)) && e.invalid == 0))
}

/// Minimum hop count from any root; unreachable vertices map to `None`.
pub fn tree_depth(g: &PathGraph, roots: &BTreeSet<Asn>) -> BTreeMap<Asn, Option<u32>> {
    let adj = g.adjacency();
    let mut depth: BTreeMap<Asn, Option<u32>> = g.vertices.iter().map(|v| (*v, None)).collect();
    let mut queue = VecDeque::new();
    for r in roots {
        if let Some(d) = depth.get_mut(r) {
            *d = Some(0);
            queue.push_back(*r);
        }
    }
    while let Some(v) = queue.pop_front() {
        let dv = depth[&v].expect("queued vertices have a depth");
        for n in &adj[&v] {
            let slot = depth.get_mut(n).expect("neighbor is a vertex");
            if slot.is_none() {
                *slot = Some(dv + 1);
                queue.push_back(*n);
            }
        }
    }
    depth
}
