use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::index::variation_degree;
use super::{
    check_rates, edge_index_with, edge_ratio, AsymptoticsError, Benchmark, ExtReal, Label, NumericLimitConfig,
    TrafficLimit,
};
use crate::routing::Network;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub index: ExtReal,
    pub label: Label,
}

impl IndexEntry {
    fn new(index: ExtReal) -> Self {
        IndexEntry { index, label: Label::of(index) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathEntry {
    pub pair: usize,
    pub edges: Vec<usize>,
    pub index: ExtReal,
    pub label: Label,
}

/// Indices and labels of every edge, path, pair and the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub limit: TrafficLimit,
    pub benchmark: Benchmark,
    pub edges: Vec<IndexEntry>,
    /// Global path order.
    pub paths: Vec<PathEntry>,
    pub pairs: Vec<IndexEntry>,
    pub network: IndexEntry,
    /// `0 < α < ∞`.
    pub tight: bool,
}

impl ClassificationReport {
    /// Network index over a subset of pairs.
    pub fn network_index_over(&self, pairs: &[usize]) -> ExtReal {
        pairs.iter().map(|&i| self.pairs[i].index).fold(ExtReal::ZERO, ExtReal::max)
    }
}

/// `α_p = max_{e∈p} α_e`, `α^i = min_{p∈P^i} α_p`, `α = max_i α^i`.
pub fn classify(
    net: &Network,
    benchmark: &Benchmark,
    limit: TrafficLimit,
) -> Result<ClassificationReport, AsymptoticsError> {
    classify_with(net, benchmark, limit, &NumericLimitConfig::default())
}

pub(crate) fn classify_with(
    net: &Network,
    benchmark: &Benchmark,
    limit: TrafficLimit,
    cfg: &NumericLimitConfig,
) -> Result<ClassificationReport, AsymptoticsError> {
    let edge_idx = (0..net.edge_count())
        .map(|e| edge_index_with(net, e, benchmark, limit, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let paths: Vec<PathEntry> = net
        .paths()
        .map(|(p, edges)| {
            let index = edges.iter().map(|&e| edge_idx[e]).fold(ExtReal::ZERO, ExtReal::max);
            PathEntry { pair: net.path_pair(p), edges: edges.to_vec(), index, label: Label::of(index) }
        })
        .collect();
    let pairs: Vec<IndexEntry> = (0..net.pair_count())
        .map(|i| IndexEntry::new(net.pair_paths(i).map(|p| paths[p].index).fold(ExtReal::Infinite, ExtReal::min)))
        .collect();
    let network = IndexEntry::new(pairs.iter().map(|e| e.index).fold(ExtReal::ZERO, ExtReal::max));
    Ok(ClassificationReport {
        limit,
        benchmark: *benchmark,
        edges: edge_idx.into_iter().map(IndexEntry::new).collect(),
        paths,
        pairs,
        network,
        tight: network.index.is_positive_finite(),
    })
}

/// Benchmark from the total preorder `e ≼ e'` iff `lim c_e/c_{e'} ≤ 1`:
/// a maximal edge per path, a path with minimal such edge per pair, and the
/// maximal choice across pairs. Ties go to the lowest index.
pub fn auto_benchmark(net: &Network, limit: TrafficLimit) -> Result<Benchmark, AsymptoticsError> {
    let all: Vec<usize> = (0..net.pair_count()).collect();
    auto_benchmark_over(net, limit, &all, &NumericLimitConfig::default())
}

pub(crate) fn auto_benchmark_over(
    net: &Network,
    limit: TrafficLimit,
    pairs: &[usize],
    cfg: &NumericLimitConfig,
) -> Result<Benchmark, AsymptoticsError> {
    let memo: RefCell<HashMap<(usize, usize), ExtReal>> = RefCell::new(HashMap::new());
    let le = |e: usize, e2: usize| -> Result<bool, AsymptoticsError> {
        if e == e2 {
            return Ok(true);
        }
        let cached = memo.borrow().get(&(e, e2)).copied();
        let r = match cached {
            Some(r) => r,
            None => {
                let r = edge_ratio(net, e, e2, limit, cfg)?;
                let mut m = memo.borrow_mut();
                m.insert((e, e2), r);
                m.insert((e2, e), r.recip());
                r
            }
        };
        Ok(matches!(r, ExtReal::Finite(v) if v <= 1.0))
    };

    let mut chosen: Option<usize> = None;
    for &i in pairs {
        let mut pair_best: Option<usize> = None;
        for p in net.pair_paths(i) {
            let edges = net.path(p);
            let mut top = edges[0];
            for &e in &edges[1..] {
                if !le(e, top)? {
                    top = e;
                }
            }
            pair_best = Some(match pair_best {
                Some(b) if le(b, top)? => b,
                _ => top,
            });
        }
        let b = pair_best.expect("path sets are nonempty");
        chosen = Some(match chosen {
            Some(c) if le(b, c)? => c,
            _ => b,
        });
    }
    let edge = chosen.ok_or_else(|| AsymptoticsError::InvalidInput("no OD pair selected".into()))?;
    if net.cost(edge).is_identically_zero() {
        return Err(AsymptoticsError::Hypothesis(
            "every selected pair has a path of identically zero cost; no nontrivial benchmark exists".into(),
        ));
    }
    Ok(Benchmark::EdgeCost { edge })
}

/// Verdict on `lim PoA = 1` at a traffic limit for fixed relative inflows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum PoaVerdict {
    /// The pairs with positive inflow form a tight network under `benchmark`.
    ConvergesToOne { benchmark: Benchmark, network_index: ExtReal },
    /// The sufficient conditions fail; the limit may still be 1.
    Inconclusive { reason: String },
}

pub fn predict_poa_limit(net: &Network, rates: &[f64], limit: TrafficLimit) -> Result<PoaVerdict, AsymptoticsError> {
    check_rates(rates, net.pair_count())?;
    let active: Vec<usize> = (0..net.pair_count()).filter(|&i| rates[i] > 0.0).collect();
    let cfg = NumericLimitConfig::default();
    let inconclusive = |reason: String| Ok(PoaVerdict::Inconclusive { reason });
    let benchmark = match auto_benchmark_over(net, limit, &active, &cfg) {
        Ok(b) => b,
        Err(AsymptoticsError::NotComparable(msg)) => return inconclusive(format!("no benchmark exists: {msg}")),
        Err(AsymptoticsError::Hypothesis(msg)) => return inconclusive(msg),
        Err(e) => return Err(e),
    };
    let Benchmark::EdgeCost { edge } = benchmark else { unreachable!("auto benchmark is an edge cost") };
    if let Err(e) = variation_degree(net.cost(edge), limit, &cfg) {
        return inconclusive(format!("benchmark edge {edge}: {e}"));
    }
    let report = match classify_with(net, &benchmark, limit, &cfg) {
        Ok(r) => r,
        Err(AsymptoticsError::NotComparable(msg)) => return inconclusive(msg),
        Err(e) => return Err(e),
    };
    let alpha = report.network_index_over(&active);
    if alpha.is_positive_finite() {
        Ok(PoaVerdict::ConvergesToOne { benchmark, network_index: alpha })
    } else {
        inconclusive(format!("network index {alpha} under benchmark {benchmark} is not finite and positive"))
    }
}
