use serde::{Deserialize, Serialize};

use super::LabError;
use crate::asymptotics::ExtReal;
use crate::routing::{Demand, Network};
use crate::solvers::{solve_optimum, solve_wardrop, SolverConfig};

/// Below this optimum cost the ratio is taken to be 1.
pub const OPT_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoaPoint {
    pub m: f64,
    pub eq_cost: f64,
    pub opt_cost: f64,
    pub poa: f64,
    pub eq_gap: f64,
    pub opt_gap: f64,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// `Eq/Opt`, with `PoA = 1` when `M = 0` or `Opt` vanishes.
pub fn price_of_anarchy(net: &Network, demand: &Demand, cfg: &SolverConfig) -> Result<PoaPoint, LabError> {
    demand.check(net)?;
    let m = demand.total();
    if m <= 0.0 {
        return Ok(PoaPoint {
            m,
            eq_cost: 0.0,
            opt_cost: 0.0,
            poa: 1.0,
            eq_gap: 0.0,
            opt_gap: 0.0,
            converged: true,
            warnings: Vec::new(),
        });
    }
    let eq = solve_wardrop(net, demand, cfg)?;
    let opt = solve_optimum(net, demand, cfg)?;
    let poa = if opt.objective <= OPT_FLOOR { 1.0 } else { eq.objective / opt.objective };
    let mut warnings = eq.warnings;
    warnings.extend(opt.warnings);
    Ok(PoaPoint {
        m,
        eq_cost: eq.objective,
        opt_cost: opt.objective,
        poa,
        eq_gap: eq.relative_gap,
        opt_gap: opt.relative_gap,
        converged: eq.converged && opt.converged,
        warnings,
    })
}

/// Largest `M` below which every pair keeps all traffic on its unique
/// cheapest zero-load path, for both costs and marginal costs.
///
/// For each pair with cheapest set `P_min` at zero load, the condition is
/// `max_{p∈P_min} c_p(M) < min_{p'∉P_min} c_{p'}(0)`; path costs at `M`
/// bound every feasible load. Pairs with a single path impose nothing.
pub fn lock_in_threshold(net: &Network) -> Result<ExtReal, LabError> {
    let path_at = |p: usize, m: f64, marginal: bool| -> f64 {
        net.path(p)
            .iter()
            .map(|&e| if marginal { net.cost(e).marginal(m) } else { net.cost(e).eval(m) })
            .sum()
    };
    let mut threshold = ExtReal::Infinite;
    for i in 0..net.pair_count() {
        let zero: Vec<(usize, f64)> = net.pair_paths(i).map(|p| (p, path_at(p, 0.0, false))).collect();
        let best = zero.iter().map(|z| z.1).fold(f64::INFINITY, f64::min);
        let minimal: Vec<usize> = zero.iter().filter(|z| z.1 == best).map(|z| z.0).collect();
        let rival = zero.iter().filter(|z| z.1 > best).map(|z| z.1).fold(f64::INFINITY, f64::min);
        if minimal.len() > 1 {
            return Err(LabError::InvalidInput(format!(
                "OD pair {i} has {} cheapest paths at zero load; lock-in needs a unique one",
                minimal.len()
            )));
        }
        if rival.is_infinite() {
            continue;
        }
        for marginal in [false, true] {
            let f = |m: f64| minimal.iter().map(|&p| path_at(p, m, marginal)).fold(f64::NEG_INFINITY, f64::max);
            let t = largest_below(f, rival);
            threshold = threshold.min(t);
        }
    }
    Ok(threshold)
}

/// `sup{M ≥ 0 : f(M) < level}` for nondecreasing `f` with `f(0) < level`.
fn largest_below(f: impl Fn(f64) -> f64, level: f64) -> ExtReal {
    let mut hi = 1.0;
    while f(hi) < level {
        hi *= 2.0;
        if hi > 1e300 {
            return ExtReal::Infinite;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ExtReal::Finite(lo)
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

    #[test]
    fn pigou_affine() {
        let net = parallel(vec![CostFunction::constant(1.0).unwrap(), CostFunction::monomial(1, 1.0).unwrap()]);
        let p = price_of_anarchy(&net, &Demand::new(vec![1.0]).unwrap(), &SolverConfig::default()).unwrap();
        assert!((p.poa - 4.0 / 3.0).abs() < 1e-9);
        assert!(p.converged);
    }

    #[test]
    fn pigou_monomial_closed_form() {
        let net = parallel(vec![CostFunction::monomial(1, 1.0).unwrap(), CostFunction::monomial(2, 1.0).unwrap()]);
        let p = price_of_anarchy(&net, &Demand::new(vec![1.0]).unwrap(), &SolverConfig::default()).unwrap();
        // Eq: x = y² with x + y = 1; Opt: 2x = 3y² with x + y = 1
        let y = (5f64.sqrt() - 1.0) / 2.0;
        let eq = (1.0 - y) * (1.0 - y) + y.powi(3);
        let z = (-2.0 + 28f64.sqrt()) / 6.0;
        let opt = (1.0 - z) * (1.0 - z) + z.powi(3);
        assert!((p.poa - eq / opt).abs() < 1e-9, "{} vs {}", p.poa, eq / opt);
    }

    #[test]
    fn vacuous_cases() {
        let net = parallel(vec![CostFunction::zero(), CostFunction::zero()]);
        let cfg = SolverConfig::default();
        assert_eq!(price_of_anarchy(&net, &Demand::new(vec![3.0]).unwrap(), &cfg).unwrap().poa, 1.0);
        let pigou = parallel(vec![CostFunction::constant(1.0).unwrap(), CostFunction::monomial(1, 1.0).unwrap()]);
        assert_eq!(price_of_anarchy(&pigou, &Demand::new(vec![0.0]).unwrap(), &cfg).unwrap().poa, 1.0);
    }

    #[test]
    fn lock_in_for_affine_pair() {
        // c1 = 1 + x, c2 = 2 + x: marginal 1 + 2M < 2 binds first at M = 1/2
        let net = parallel(vec![CostFunction::affine(1.0, 1.0).unwrap(), CostFunction::affine(2.0, 1.0).unwrap()]);
        let t = lock_in_threshold(&net).unwrap().finite().unwrap();
        assert!((t - 0.5).abs() < 1e-12);
        let tie = parallel(vec![CostFunction::affine(1.0, 1.0).unwrap(), CostFunction::affine(1.0, 2.0).unwrap()]);
        assert!(lock_in_threshold(&tie).is_err());
    }
}
