#![allow(dead_code)]

use poa_core::routing::{CostFunction, Edge, Network, OdPair};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// `p/q` with `p ∈ 1..=9`, `q ∈ 1..=4`.
pub fn rational(rng: &mut StdRng) -> f64 {
    rng.gen_range(1..=9) as f64 / rng.gen_range(1..=4) as f64
}

/// Polynomial with 1 to 3 terms of degree at most `max_degree` and positive
/// rational coefficients.
pub fn random_polynomial(rng: &mut StdRng, max_degree: u32) -> CostFunction {
    let n = rng.gen_range(1..=3);
    let terms: Vec<(u32, f64)> = (0..n).map(|_| (rng.gen_range(0..=max_degree), rational(rng))).collect();
    CostFunction::polynomial(&terms).unwrap()
}

/// Pairs share the origin `s = 0`. Edges: `c ∈ {1, 2}` parallel trunks
/// `s → h`, then per pair `h → t_i` and a direct `s → t_i`. Pair `i` routes
/// directly or over any trunk. At most 4 pairs and 10 edges.
pub fn random_network(seed: u64) -> (Network, Vec<f64>) {
    let mut rng = StdRng::seed_from_u64(seed);
    let pairs = rng.gen_range(1..=4);
    let trunks = rng.gen_range(1..=2);
    let hub = 1;
    let mut edges: Vec<Edge> = (0..trunks).map(|_| Edge::new(0, hub, random_polynomial(&mut rng, 5))).collect();
    let mut ods = Vec::new();
    for i in 0..pairs {
        let t = 2 + i;
        let spoke = edges.len();
        edges.push(Edge::new(hub, t, random_polynomial(&mut rng, 5)));
        let direct = edges.len();
        edges.push(Edge::new(0, t, random_polynomial(&mut rng, 5)));
        let mut paths = vec![vec![direct]];
        paths.extend((0..trunks).map(|k| vec![k, spoke]));
        ods.push(OdPair::new(0, t, paths));
    }
    let weights: Vec<f64> = (0..pairs).map(|_| rng.gen_range(1..=5) as f64).collect();
    let total: f64 = weights.iter().sum();
    let rates = weights.iter().map(|w| w / total).collect();
    (Network::new(2 + pairs, edges, ods).unwrap(), rates)
}

/// Parallel links `0 → 1` with the given costs and a single OD pair.
pub fn parallel(costs: Vec<CostFunction>) -> Network {
    let n = costs.len();
    Network::new(
        2,
        costs.into_iter().map(|c| Edge::new(0, 1, c)).collect(),
        vec![OdPair::new(0, 1, (0..n).map(|k| vec![k]).collect())],
    )
    .unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}
