use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use thiserror::Error;

use super::PathGraph;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    EmptyGraph,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphMetrics {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub component_count: usize,
    pub largest_component_size: usize,
    /// Edges per vertex.
    pub avg_node_degree: f64,
    /// Mean Fiedler value over components with at least two vertices;
    /// `None` when skipped or when no such component exists.
    pub avg_algebraic_connectivity: Option<f64>,
    /// Mean distance over ordered reachable pairs of distinct vertices.
    pub avg_shortest_path_length: f64,
    /// Mean eccentricity within each vertex's component.
    pub avg_longest_path_length: f64,
}

impl GraphMetrics {
    /// Graph-theoretic mean degree, 2E/V.
    pub fn mean_degree(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.vertex_count as f64
    }
}

struct Indexed {
    adj: Vec<Vec<usize>>,
}

fn index(g: &PathGraph) -> Indexed {
    let ids: BTreeMap<_, usize> = g.vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let mut adj = vec![Vec::new(); ids.len()];
    for (a, b) in g.edges.keys() {
        let (i, j) = (ids[a], ids[b]);
        adj[i].push(j);
        adj[j].push(i);
    }
    Indexed { adj }
}

fn components(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let mut comp = vec![usize::MAX; adj.len()];
    let mut out = Vec::new();
    for start in 0..adj.len() {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut members = vec![start];
        comp[start] = id;
        let mut i = 0;
        while i < members.len() {
            for &n in &adj[members[i]] {
                if comp[n] == usize::MAX {
                    comp[n] = id;
                    members.push(n);
                }
            }
            i += 1;
        }
        out.push(members);
    }
    out
}

/// Second-smallest Laplacian eigenvalue of the subgraph induced by
/// `members`, which must be connected.
fn fiedler(adj: &[Vec<usize>], members: &[usize]) -> f64 {
    let local: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = members.len();
    let mut lap = DMatrix::<f64>::zeros(n, n);
    for (i, v) in members.iter().enumerate() {
        lap[(i, i)] = adj[*v].len() as f64;
        for w in &adj[*v] {
            lap[(i, local[w])] -= 1.0;
        }
    }
    let mut eig: Vec<f64> = lap.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    eig[1]
}

fn compute(g: &PathGraph, spectral: bool) -> Result<GraphMetrics, GraphError> {
    if g.vertices.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let Indexed { adj } = index(g);
    let n = adj.len();
    let comps = components(&adj);

    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let (mut pair_sum, mut pairs, mut ecc_sum) = (0u64, 0u64, 0u64);
    for s in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[s] = 0;
        queue.push_back(s);
        let mut ecc = 0;
        while let Some(v) = queue.pop_front() {
            let dv = dist[v];
            if dv > 0 {
                pair_sum += dv as u64;
                pairs += 1;
            }
            ecc = ecc.max(dv);
            for &w in &adj[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dv + 1;
                    queue.push_back(w);
                }
            }
        }
        ecc_sum += ecc as u64;
    }

    let avg_algebraic_connectivity = if spectral {
        let values: Vec<f64> = comps.iter().filter(|c| c.len() >= 2).map(|c| fiedler(&adj, c)).collect();
        (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
    } else {
        None
    };

    Ok(GraphMetrics {
        vertex_count: n,
        edge_count: g.edges.len(),
        component_count: comps.len(),
        largest_component_size: comps.iter().map(Vec::len).max().unwrap_or(0),
        avg_node_degree: g.edges.len() as f64 / n as f64,
        avg_algebraic_connectivity,
        avg_shortest_path_length: if pairs == 0 { 0.0 } else { pair_sum as f64 / pairs as f64 },
        avg_longest_path_length: ecc_sum as f64 / n as f64,
    })
}

pub fn metrics(g: &PathGraph) -> Result<GraphMetrics, GraphError> {
    compute(g, true)
}

/// Everything except the eigenvalue computation, which dominates the cost
/// on large components.
pub fn metrics_without_spectrum(g: &PathGraph) -> Result<GraphMetrics, GraphError> {
    compute(g, false)
}

/// One row per metric, one column per graph.
pub fn format_metrics_table(columns: &[(&str, &GraphMetrics)]) -> String {
    let mut s = String::from("metric");
    for (name, _) in columns {
        s.push(',');
        s.push_str(name);
    }
    s.push('\n');
    let rows: [(&str, fn(&GraphMetrics) -> String); 9] = [
        ("vertices", |m| m.vertex_count.to_string()),
        ("edges", |m| m.edge_count.to_string()),
        ("components", |m| m.component_count.to_string()),
        ("largest_component", |m| m.largest_component_size.to_string()),
        ("avg_node_degree", |m| format!("{:.2}", m.avg_node_degree)),
        ("avg_algebraic_connectivity", |m| {
            m.avg_algebraic_connectivity.map(|v| format!("{v:.4}")).unwrap_or_default()
        }),
        ("avg_shortest_path_length", |m| format!("{:.2}", m.avg_shortest_path_length)),
        ("avg_longest_path_length", |m| format!("{:.2}", m.avg_longest_path_length)),
        ("mean_degree_2e_over_v", |m| format!("{:.2}", m.mean_degree())),
    ];
    for (label, f) in rows {
        s.push_str(label);
        for (_, m) in columns {
            let _ = write!(s, ",{}", f(m));
        }
        s.push('\n');
    }
    s
}
