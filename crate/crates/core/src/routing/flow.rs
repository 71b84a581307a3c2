use serde::{Deserialize, Serialize};

use super::{CostFunction, Network, RoutingError};

/// Absolute per-pair conservation tolerance, as a multiple of the total inflow.
pub const FEASIBILITY_TOL: f64 = 1e-12;
/// A path counts as used when its flow exceeds this multiple of its pair's inflow.
pub const USE_THRESHOLD: f64 = 1e-9;

/// Inflow rate per OD pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Demand(Vec<f64>);

impl Demand {
    pub fn new(inflows: Vec<f64>) -> Result<Self, RoutingError> {
        if let Some((i, m)) = inflows.iter().enumerate().find(|(_, m)| !m.is_finite() || **m < 0.0) {
            return Err(RoutingError::InvalidDemand(format!("inflow of pair {i} is {m}")));
        }
        Ok(Demand(inflows))
    }

    /// `total · λ` for relative rates `λ` on the simplex.
    pub fn from_rates(total: f64, rates: &[f64]) -> Result<Self, RoutingError> {
        let sum: f64 = rates.iter().sum();
        if rates.iter().any(|r| !r.is_finite() || *r < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(RoutingError::InvalidDemand(format!("relative rates {rates:?} are not on the simplex")));
        }
        Demand::new(rates.iter().map(|r| total * r).collect())
    }

    /// Check that there is one inflow per pair of `net`.
    pub fn check(&self, net: &Network) -> Result<(), RoutingError> {
        if self.0.len() != net.pair_count() {
            return Err(RoutingError::Dimension { what: "demand", expected: net.pair_count(), got: self.0.len() });
        }
        Ok(())
    }

    pub fn inflows(&self) -> &[f64] {
        &self.0
    }

    pub fn inflow(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Total inflow `M`.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Relative rates `λ^i = m^i / M`; `None` when `M = 0`.
    pub fn rates(&self) -> Option<Vec<f64>> {
        let total = self.total();
        (total > 0.0).then(|| self.0.iter().map(|m| m / total).collect())
    }

    pub fn scaled(&self, factor: f64) -> Result<Self, RoutingError> {
        Demand::new(self.0.iter().map(|m| m * factor).collect())
    }
}

/// Flow per path, indexed by global path number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FlowProfile(pub Vec<f64>);

impl FlowProfile {
    /// Each pair's inflow split evenly over its paths.
    pub fn uniform(net: &Network, demand: &Demand) -> Self {
        let mut f = vec![0.0; net.path_count()];
        for i in 0..net.pair_count() {
            let r = net.pair_paths(i);
            let share = demand.inflow(i) / r.len() as f64;
            f[r].fill(share);
        }
        FlowProfile(f)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Verify nonnegativity and per-pair conservation within `1e-12 · M`.
    pub fn check_feasible(&self, net: &Network, demand: &Demand) -> Result<(), RoutingError> {
        if self.0.len() != net.path_count() {
            return Err(RoutingError::Dimension { what: "flow", expected: net.path_count(), got: self.0.len() });
        }
        demand.check(net)?;
        let tol = FEASIBILITY_TOL * demand.total();
        for i in 0..net.pair_count() {
            let routed = &self.0[net.pair_paths(i)];
            let got: f64 = routed.iter().sum();
            if routed.iter().any(|f| !(*f >= -tol)) || (got - demand.inflow(i)).abs() > tol {
                return Err(RoutingError::InfeasibleFlow { pair: i, expected: demand.inflow(i), got });
            }
        }
        Ok(())
    }
}

/// Load per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LoadProfile(pub Vec<f64>);

impl LoadProfile {
    pub fn zero(net: &Network) -> Self {
        LoadProfile(vec![0.0; net.edge_count()])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    fn check(&self, net: &Network) -> Result<(), RoutingError> {
        if self.0.len() != net.edge_count() {
            return Err(RoutingError::Dimension { what: "loads", expected: net.edge_count(), got: self.0.len() });
        }
        Ok(())
    }
}

/// `x_e = Σ_{p ∋ e} f_p`.
pub fn edge_loads(net: &Network, flow: &FlowProfile) -> Result<LoadProfile, RoutingError> {
    if flow.0.len() != net.path_count() {
        return Err(RoutingError::Dimension { what: "flow", expected: net.path_count(), got: flow.0.len() });
    }
    let mut x = vec![0.0; net.edge_count()];
    for (p, edges) in net.paths() {
        for &e in edges {
            x[e] += flow.0[p];
        }
    }
    Ok(LoadProfile(x))
}

/// `Σ_{e ∈ path} c_e(x_e)` for an arbitrary edge sequence.
pub fn path_cost(net: &Network, loads: &LoadProfile, path: &[usize]) -> Result<f64, RoutingError> {
    loads.check(net)?;
    path.iter()
        .map(|&e| {
            if e >= net.edge_count() {
                Err(RoutingError::Structure(format!("edge index {e} out of range")))
            } else {
                Ok(net.cost(e).eval(loads.0[e]))
            }
        })
        .sum()
}

/// `L(x) = Σ_e x_e c_e(x_e)`.
pub fn social_cost(net: &Network, loads: &LoadProfile) -> Result<f64, RoutingError> {
    loads.check(net)?;
    Ok(net.edges().iter().zip(&loads.0).map(|(e, &x)| e.cost.total(x)).sum())
}

/// `Σ_e C_e(x_e)` with `C_e` the primitive of `c_e`.
pub fn beckmann_potential(net: &Network, loads: &LoadProfile) -> Result<f64, RoutingError> {
    loads.check(net)?;
    net.edges().iter().zip(&loads.0).map(|(e, &x)| e.cost.primitive(x)).sum()
}

/// `c(x) + x c'(x)`.
pub fn marginal_cost(cost: &CostFunction, x: f64) -> f64 {
    cost.marginal(x)
}

/// Largest excess of a used path's cost over the cheapest path of its pair.
pub fn wardrop_residual(net: &Network, demand: &Demand, flow: &FlowProfile) -> Result<f64, RoutingError> {
    residual(net, demand, flow, CostFunction::eval)
}

/// [`wardrop_residual`] under marginal costs; vanishes at a social optimum.
pub fn marginal_residual(net: &Network, demand: &Demand, flow: &FlowProfile) -> Result<f64, RoutingError> {
    residual(net, demand, flow, CostFunction::marginal)
}

fn residual(
    net: &Network,
    demand: &Demand,
    flow: &FlowProfile,
    field: fn(&CostFunction, f64) -> f64,
) -> Result<f64, RoutingError> {
    flow.check_feasible(net, demand)?;
    let x = edge_loads(net, flow)?;
    let mut worst: f64 = 0.0;
    for i in 0..net.pair_count() {
        let m = demand.inflow(i);
        if m <= 0.0 {
            continue;
        }
        let mut min = f64::INFINITY;
        let mut max_used = f64::NEG_INFINITY;
        for p in net.pair_paths(i) {
            let c: f64 = net.path(p).iter().map(|&e| field(net.cost(e), x.0[e])).sum();
            min = min.min(c);
            if flow.0[p] > USE_THRESHOLD * m {
                max_used = max_used.max(c);
            }
        }
        worst = worst.max(max_used - min);
    }
    Ok(worst)
}
