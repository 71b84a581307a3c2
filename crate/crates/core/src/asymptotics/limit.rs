use serde::{Deserialize, Serialize};

use super::{check_rates, classify, AsymptoticsError, Benchmark, TrafficLimit};
use crate::routing::Network;
use crate::solvers::{minimize, PathSystem, SolverConfig};

/// Solution of `V_ρ(λ) = min_y Σ_e α_e ζ_e(y, λ)^ρ` over the product of path
/// simplices, with paths through slow edges removed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitValue {
    pub rho: f64,
    pub value: f64,
    /// Per-path share of its pair's inflow, global path order.
    pub allocation: Vec<f64>,
    pub benchmark: Benchmark,
    pub limit: TrafficLimit,
    pub relative_gap: f64,
    pub iterations: usize,
}

impl LimitValue {
    /// Predicted optimum scaling `g(M) = M·c(M)`, so that `Opt ≈ V·g(M)`.
    pub fn scaling(&self, net: &Network, m: f64) -> f64 {
        m * self.benchmark.eval(net, m)
    }
}

pub fn limit_value(
    net: &Network,
    rates: &[f64],
    benchmark: &Benchmark,
    limit: TrafficLimit,
) -> Result<LimitValue, AsymptoticsError> {
    check_rates(rates, net.pair_count())?;
    let beta = benchmark.degree(net, limit)?;
    let rho = 1.0 + beta;
    let report = classify(net, benchmark, limit)?;
    let alpha: Vec<f64> = report.edges.iter().map(|e| e.index.to_f64()).collect();

    if !(0..net.pair_count()).any(|i| rates[i] > 0.0 && report.pairs[i].index.is_positive_finite()) {
        return Err(AsymptoticsError::Hypothesis(format!(
            "no OD pair with positive inflow is tight under benchmark {benchmark}"
        )));
    }

    let allowed = |p: usize| net.path(p).iter().all(|&e| report.edges[e].index.finite().is_some());
    let mut paths = Vec::new();
    let mut origin = Vec::new();
    let mut pairs = Vec::new();
    let mut demand = Vec::new();
    let mut allocation = vec![0.0; net.path_count()];
    for i in 0..net.pair_count() {
        let keep: Vec<usize> = net.pair_paths(i).filter(|&p| allowed(p)).collect();
        if rates[i] == 0.0 {
            for &p in &keep {
                allocation[p] = 1.0 / keep.len() as f64;
            }
            continue;
        }
        if keep.is_empty() {
            return Err(AsymptoticsError::Hypothesis(format!("every path of OD pair {i} is slow")));
        }
        let start = paths.len();
        for p in keep {
            paths.push(net.path(p));
            origin.push(p);
        }
        pairs.push(start..paths.len());
        demand.push(rates[i]);
    }

    let sys = PathSystem { edge_count: net.edge_count(), paths, pairs, demand };
    let objective = |z: &[f64]| -> f64 {
        z.iter().zip(&alpha).filter(|(_, a)| a.is_finite()).map(|(&ze, &a)| a * ze.powf(rho)).sum()
    };
    let cfg = SolverConfig::default();
    let out = minimize(&sys, |e, ze| rho * alpha[e] * ze.powf(rho - 1.0), objective, &cfg, None);
    let value = objective(&out.loads);
    if !(value > 1e-300 && value.is_finite()) {
        return Err(AsymptoticsError::Hypothesis(format!("limit value {value:e} is not finite and positive")));
    }
    for (k, &p) in origin.iter().enumerate() {
        allocation[p] = out.flow[k] / rates[net.path_pair(p)];
    }
    Ok(LimitValue {
        rho,
        value,
        allocation,
        benchmark: *benchmark,
        limit,
        relative_gap: out.relative_gap,
        iterations: out.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::routing::{CostFunction, Edge, OdPair};

    fn parallel(costs: Vec<CostFunction>) -> Network {
        let n = costs.len();
        Network::new(
            2,
            costs.into_iter().map(|c| Edge::new(0, 1, c)).collect(),
            vec![OdPair::new(0, 1, (0..n).map(|k| vec![k]).collect())],
        )
        .unwrap()
    }

    const X: Benchmark = Benchmark::Monomial { degree: 1.0 };

    #[test]
    fn slow_path_is_dropped() {
        let net = parallel(vec![CostFunction::monomial(1, 1.0).unwrap(), CostFunction::monomial(2, 1.0).unwrap()]);
        let v = limit_value(&net, &[1.0], &X, TrafficLimit::Heavy).unwrap();
        assert_eq!(v.rho, 2.0);
        assert!((v.value - 1.0).abs() < 1e-12);
        assert_eq!(v.allocation, vec![1.0, 0.0]);
        assert_eq!(v.scaling(&net, 10.0), 100.0);
    }

    #[test]
    fn two_tight_edges_split() {
        let net = parallel(vec![CostFunction::monomial(1, 1.0).unwrap(), CostFunction::monomial(1, 2.0).unwrap()]);
        let v = limit_value(&net, &[1.0], &X, TrafficLimit::Heavy).unwrap();
        // 2y = 4(1 − y)
        assert!((v.allocation[0] - 2.0 / 3.0).abs() < 1e-6);
        assert!((v.value - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn linear_benchmark_in_heavy_traffic() {
        let net = parallel(vec![CostFunction::constant(1.0).unwrap(), CostFunction::monomial(1, 1.0).unwrap()]);
        let v = limit_value(&net, &[1.0], &Benchmark::ConstantOne, TrafficLimit::Heavy).unwrap();
        assert_eq!(v.rho, 1.0);
        assert!((v.value - 1.0).abs() < 1e-12);
        assert_eq!(v.allocation, vec![1.0, 0.0]);
    }

    #[test]
    fn hypothesis_failures() {
        let net = parallel(vec![CostFunction::monomial(2, 1.0).unwrap(), CostFunction::monomial(3, 1.0).unwrap()]);
        assert!(matches!(limit_value(&net, &[1.0], &X, TrafficLimit::Heavy), Err(AsymptoticsError::Hypothesis(_))));
        let fast = parallel(vec![CostFunction::monomial(1, 1.0).unwrap()]);
        let x2 = Benchmark::Monomial { degree: 2.0 };
        assert!(matches!(limit_value(&fast, &[1.0], &x2, TrafficLimit::Heavy), Err(AsymptoticsError::Hypothesis(_))));
    }
}
