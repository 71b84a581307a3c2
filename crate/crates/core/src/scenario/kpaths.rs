use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use super::ScenarioError;
use crate::routing::Edge;

#[derive(Debug, Clone, PartialEq)]
pub struct KPaths {
    /// Edge sequences, by zero-load cost then lexicographically.
    pub paths: Vec<Vec<usize>>,
    pub costs: Vec<f64>,
    /// Fewer than `k` loopless paths exist.
    pub truncated: bool,
}

#[derive(PartialEq)]
struct Label {
    dist: f64,
    path: Vec<usize>,
    node: usize,
}

impl Eq for Label {}

impl Ord for Label {
    // reversed for a min-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then_with(|| other.path.cmp(&self.path))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path with lexicographically smallest edge sequence among ties.
fn dijkstra(
    out: &[Vec<usize>],
    edges: &[Edge],
    weight: &[f64],
    from: usize,
    to: usize,
    banned_edges: &HashSet<usize>,
    banned_nodes: &[bool],
    through: &dyn Fn(usize) -> bool,
) -> Option<(f64, Vec<usize>)> {
    let mut best: Vec<Option<(f64, Vec<usize>)>> = vec![None; out.len()];
    let mut done = vec![false; out.len()];
    let mut heap = BinaryHeap::new();
    best[from] = Some((0.0, Vec::new()));
    heap.push(Label { dist: 0.0, path: Vec::new(), node: from });
    while let Some(Label { dist, path, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == to {
            return Some((dist, path));
        }
        if node != from && !through(node) {
            continue;
        }
        for &e in &out[node] {
            let v = edges[e].head;
            if done[v] || banned_nodes[v] || banned_edges.contains(&e) {
                continue;
            }
            let d = dist + weight[e];
            let better = match &best[v] {
                None => true,
                Some((bd, bp)) => d < *bd || (d == *bd && {
                    let mut cand = path.clone();
                    cand.push(e);
                    cand < *bp
                }),
            };
            if better {
                let mut p = path.clone();
                p.push(e);
                best[v] = Some((d, p.clone()));
                heap.push(Label { dist: d, path: p, node: v });
            }
        }
    }
    None
}

/// Yen's `k` loopless shortest paths under zero-load costs `c_e(0)`.
/// `through(v)` says whether a path may pass through vertex `v`.
pub fn k_shortest_paths(
    vertex_count: usize,
    edges: &[Edge],
    origin: usize,
    destination: usize,
    k: usize,
    through: &dyn Fn(usize) -> bool,
) -> Result<KPaths, ScenarioError> {
    if k == 0 {
        return Err(ScenarioError::InvalidParam("k must be at least 1".into()));
    }
    if origin >= vertex_count || destination >= vertex_count || origin == destination {
        return Err(ScenarioError::InvalidParam(format!("invalid OD pair {origin} -> {destination}")));
    }
    let weight: Vec<f64> = edges.iter().map(|e| e.cost.eval(0.0)).collect();
    let mut out = vec![Vec::new(); vertex_count];
    for (i, e) in edges.iter().enumerate() {
        out[e.tail].push(i);
    }
    let cost_of = |p: &[usize]| p.iter().map(|&e| weight[e]).sum::<f64>();
    let nodes_of = |p: &[usize]| -> Vec<usize> {
        std::iter::once(origin).chain(p.iter().map(|&e| edges[e].head)).collect()
    };

    let no_nodes = vec![false; vertex_count];
    let Some((_, first)) = dijkstra(&out, edges, &weight, origin, destination, &HashSet::new(), &no_nodes, through) else {
        return Ok(KPaths { paths: Vec::new(), costs: Vec::new(), truncated: true });
    };
    let mut accepted: Vec<Vec<usize>> = vec![first];
    let mut candidates: Vec<(f64, Vec<usize>)> = Vec::new();
    while accepted.len() < k {
        let prev = accepted.last().unwrap().clone();
        let prev_nodes = nodes_of(&prev);
        for i in 0..prev.len() {
            let spur = prev_nodes[i];
            let root = &prev[..i];
            let banned_edges: HashSet<usize> =
                accepted.iter().filter(|p| p.len() > i && &p[..i] == root).map(|p| p[i]).collect();
            let mut banned_nodes = vec![false; vertex_count];
            for &v in &prev_nodes[..i] {
                banned_nodes[v] = true;
            }
            if let Some((_, tail)) =
                dijkstra(&out, edges, &weight, spur, destination, &banned_edges, &banned_nodes, through)
            {
                let mut total = root.to_vec();
                total.extend(tail);
                if !accepted.contains(&total) && !candidates.iter().any(|c| c.1 == total) {
                    candidates.push((cost_of(&total), total));
                }
            }
        }
        if candidates.is_empty() {
            break;
        }
        let best = (0..candidates.len())
            .min_by(|&a, &b| candidates[a].0.total_cmp(&candidates[b].0).then_with(|| candidates[a].1.cmp(&candidates[b].1)))
            .unwrap();
        accepted.push(candidates.swap_remove(best).1);
    }
    let costs = accepted.iter().map(|p| cost_of(p)).collect();
    let truncated = accepted.len() < k;
    Ok(KPaths { paths: accepted, costs, truncated })
}
