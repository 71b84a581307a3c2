use std::collections::HashSet;
use std::ops::Range;

use super::{CostFunction, RoutingError};

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub cost: CostFunction,
}

impl Edge {
    pub fn new(tail: usize, head: usize, cost: CostFunction) -> Self {
        Edge { tail, head, cost }
    }
}

/// Origin-destination pair with its admissible paths, each a sequence of
/// edge indices.
#[derive(Debug, Clone, PartialEq)]
pub struct OdPair {
    pub origin: usize,
    pub destination: usize,
    pub paths: Vec<Vec<usize>>,
}

impl OdPair {
    pub fn new(origin: usize, destination: usize, paths: Vec<Vec<usize>>) -> Self {
        OdPair { origin, destination, paths }
    }
}

/// Directed multigraph with explicit per-pair path sets.
///
/// Paths are also numbered globally: pair `i` owns the contiguous range
/// [`Network::pair_paths`]`(i)`. Flow vectors use this global numbering.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    vertex_count: usize,
    edges: Vec<Edge>,
    pairs: Vec<OdPair>,
    offsets: Vec<usize>,
    path_pair: Vec<usize>,
}

impl Network {
    pub fn new(vertex_count: usize, edges: Vec<Edge>, pairs: Vec<OdPair>) -> Result<Self, RoutingError> {
        for (k, e) in edges.iter().enumerate() {
            if e.tail >= vertex_count || e.head >= vertex_count {
                return Err(RoutingError::Structure(format!(
                    "edge {k} ({} -> {}) references a vertex outside 0..{vertex_count}",
                    e.tail, e.head
                )));
            }
            e.cost.validate().map_err(|err| RoutingError::Structure(format!("edge {k}: {err}")))?;
        }
        if pairs.is_empty() {
            return Err(RoutingError::Structure("network has no OD pairs".into()));
        }
        let mut seen: HashSet<&[usize]> = HashSet::new();
        let mut offsets = vec![0];
        let mut path_pair = Vec::new();
        for (i, pair) in pairs.iter().enumerate() {
            if pair.origin >= vertex_count || pair.destination >= vertex_count {
                return Err(RoutingError::Structure(format!("pair {i} references an unknown vertex")));
            }
            if pair.paths.is_empty() {
                return Err(RoutingError::Structure(format!("pair {i} has an empty path set")));
            }
            for (j, path) in pair.paths.iter().enumerate() {
                check_path(&edges, pair, path)
                    .map_err(|msg| RoutingError::Structure(format!("pair {i}, path {j}: {msg}")))?;
                if !seen.insert(path.as_slice()) {
                    return Err(RoutingError::Structure(format!(
                        "pair {i}, path {j}: edge sequence {path:?} appears more than once"
                    )));
                }
                path_pair.push(i);
            }
            offsets.push(offsets[i] + pair.paths.len());
        }
        Ok(Network { vertex_count, edges, pairs, offsets, path_pair })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn cost(&self, edge: usize) -> &CostFunction {
        &self.edges[edge].cost
    }

    pub fn pairs(&self) -> &[OdPair] {
        &self.pairs
    }

    pub fn pair_count(&self) -> usize {
        self.pairs.len()
    }

    /// Total number of paths over all pairs.
    pub fn path_count(&self) -> usize {
        self.path_pair.len()
    }

    /// Global indices of the paths of pair `i`.
    pub fn pair_paths(&self, i: usize) -> Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// Edge sequence of global path `p`.
    pub fn path(&self, p: usize) -> &[usize] {
        let i = self.path_pair[p];
        &self.pairs[i].paths[p - self.offsets[i]]
    }

    /// Pair owning global path `p`.
    pub fn path_pair(&self, p: usize) -> usize {
        self.path_pair[p]
    }

    /// Iterate `(global index, edge sequence)` over all paths.
    pub fn paths(&self) -> impl Iterator<Item = (usize, &[usize])> + '_ {
        (0..self.path_count()).map(move |p| (p, self.path(p)))
    }

    /// Longest path length in edges.
    pub fn max_path_len(&self) -> usize {
        self.paths().map(|(_, p)| p.len()).max().unwrap_or(0)
    }

    /// Same graph and paths with every cost replaced through `f`.
    pub fn map_costs(&self, mut f: impl FnMut(usize, &CostFunction) -> CostFunction) -> Result<Self, RoutingError> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| Edge::new(e.tail, e.head, f(k, &e.cost)))
            .collect();
        Network::new(self.vertex_count, edges, self.pairs.clone())
    }
}

fn check_path(edges: &[Edge], pair: &OdPair, path: &[usize]) -> Result<(), String> {
    let first = *path.first().ok_or("path is empty")?;
    let mut at = pair.origin;
    for &e in path {
        let edge = edges.get(e).ok_or_else(|| format!("edge index {e} out of range"))?;
        if edge.tail != at {
            let msg = if e == first {
                format!("starts at vertex {} instead of origin {}", edge.tail, pair.origin)
            } else {
                format!("edge {e} does not continue from vertex {at}")
            };
            return Err(msg);
        }
        at = edge.head;
    }
    if at != pair.destination {
        return Err(format!("ends at vertex {at} instead of destination {}", pair.destination));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(n: usize) -> Vec<Edge> {
        (0..n).map(|k| Edge::new(k, k + 1, CostFunction::monomial(1, 1.0).unwrap())).collect()
    }

    #[test]
    fn global_path_numbering() {
        let mut edges = line(2);
        edges.push(Edge::new(0, 2, CostFunction::constant(1.0).unwrap()));
        let net = Network::new(
            3,
            edges,
            vec![
                OdPair::new(0, 2, vec![vec![0, 1], vec![2]]),
                OdPair::new(1, 2, vec![vec![1]]),
            ],
        )
        .unwrap();
        assert_eq!(net.path_count(), 3);
        assert_eq!(net.pair_paths(1), 2..3);
        assert_eq!(net.path(2), &[1]);
        assert_eq!(net.path_pair(1), 0);
        assert_eq!(net.max_path_len(), 2);
    }

    #[test]
    fn rejects_broken_paths() {
        let bad = |paths: Vec<Vec<usize>>| Network::new(3, line(2), vec![OdPair::new(0, 2, paths)]);
        assert!(bad(vec![vec![1]]).is_err());
        assert!(bad(vec![vec![0]]).is_err());
        assert!(bad(vec![vec![0, 7]]).is_err());
        assert!(bad(vec![]).is_err());
        assert!(bad(vec![vec![0, 1], vec![0, 1]]).is_err());
        assert!(bad(vec![vec![0, 1]]).is_ok());
    }

    #[test]
    fn rejects_shared_paths_across_pairs() {
        let r = Network::new(
            3,
            line(2),
            vec![OdPair::new(0, 2, vec![vec![0, 1]]), OdPair::new(0, 2, vec![vec![0, 1]])],
        );
        assert!(r.is_err());
    }
}
