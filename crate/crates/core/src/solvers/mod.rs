//! Wardrop equilibria and social optima by path-based Frank-Wolfe, plus an
//! exhaustive grid oracle for small instances.

mod brute;
pub(crate) mod frank_wolfe;

use serde::{Deserialize, Serialize};

use crate::routing::{
    social_cost, CostFunction, Demand, FlowProfile, LoadProfile, Network, RoutingError,
};

pub use brute::{brute_force_solve, Objective, MAX_BRUTE_FORCE_PATHS};
pub use frank_wolfe::Variant;
pub(crate) use frank_wolfe::{minimize, PathSystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("total inflow is zero; the price of anarchy is 1 by convention and no flow needs solving")]
    ZeroDemand,
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("instance too large for the grid oracle: {0}")]
    TooLarge(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Stop once the relative duality gap drops to this value and no used
    /// path costs more than this fraction of the costliest used path above
    /// the cheapest path of its pair.
    pub gap_tolerance: f64,
    pub max_iterations: usize,
    /// Bisection stops when the bracket is this fraction of its upper end.
    pub line_search_tolerance: f64,
    /// Grid resolution per pair for [`brute_force_solve`].
    pub brute_force_resolution: usize,
    pub variant: Variant,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            gap_tolerance: 1e-10,
            max_iterations: 200_000,
            line_search_tolerance: 1e-14,
            brute_force_resolution: 1000,
            variant: Variant::Pairwise,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.gap_tolerance > 0.0) || !(self.line_search_tolerance > 0.0) {
            return Err(SolverError::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub flow: FlowProfile,
    pub loads: LoadProfile,
    /// Social cost `L(x)` of the returned loads, for both problems.
    pub objective: f64,
    pub relative_gap: f64,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Wardrop equilibrium: minimize the Beckmann potential.
pub fn solve_wardrop(net: &Network, demand: &Demand, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    solve(net, demand, cfg, None, Problem::Equilibrium)
}

/// [`solve_wardrop`] started from `init` instead of the uniform split.
pub fn solve_wardrop_from(
    net: &Network,
    demand: &Demand,
    init: &FlowProfile,
    cfg: &SolverConfig,
) -> Result<SolveResult, SolverError> {
    init.check_feasible(net, demand)?;
    solve(net, demand, cfg, Some(init.0.clone()), Problem::Equilibrium)
}

/// Social optimum: equilibrium of the marginal costs.
pub fn solve_optimum(net: &Network, demand: &Demand, cfg: &SolverConfig) -> Result<SolveResult, SolverError> {
    solve(net, demand, cfg, None, Problem::Optimum)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Problem {
    Equilibrium,
    Optimum,
}

pub(crate) fn path_system<'a>(net: &'a Network, demand: &Demand) -> PathSystem<'a> {
    PathSystem {
        edge_count: net.edge_count(),
        paths: net.paths().map(|(_, p)| p).collect(),
        pairs: (0..net.pair_count()).map(|i| net.pair_paths(i)).collect(),
        demand: demand.inflows().to_vec(),
    }
}

fn solve(
    net: &Network,
    demand: &Demand,
    cfg: &SolverConfig,
    init: Option<Vec<f64>>,
    problem: Problem,
) -> Result<SolveResult, SolverError> {
    cfg.validate()?;
    demand.check(net)?;
    if demand.total() <= 0.0 {
        return Err(SolverError::ZeroDemand);
    }
    let sys = path_system(net, demand);
    let social = |x: &[f64]| -> f64 { x.iter().enumerate().map(|(e, &xe)| net.cost(e).total(xe)).sum() };
    let out = match problem {
        Problem::Equilibrium => minimize(&sys, |e, xe| net.cost(e).eval(xe), social, cfg, init),
        Problem::Optimum => minimize(&sys, |e, xe| net.cost(e).marginal(xe), social, cfg, init),
    };
    let mut warnings = Vec::new();
    if problem == Problem::Optimum {
        warnings.extend(convexity_warnings(net, demand.total()));
    }
    if !out.converged {
        warnings.push(format!(
            "stopped after {} iterations with relative gap {:e}",
            out.iterations, out.relative_gap
        ));
    }
    let loads = LoadProfile(out.loads);
    Ok(SolveResult {
        objective: social_cost(net, &loads)?,
        flow: FlowProfile(out.flow),
        loads,
        relative_gap: out.relative_gap,
        iterations: out.iterations,
        converged: out.converged,
        warnings,
    })
}

/// Sampled check that `x c(x)` is convex on `(0, total]` for generic costs.
fn convexity_warnings(net: &Network, total: f64) -> Vec<String> {
    let mut out = Vec::new();
    for (k, edge) in net.edges().iter().enumerate() {
        if !matches!(edge.cost, CostFunction::Generic(_)) {
            continue;
        }
        let mut prev = edge.cost.marginal(0.0);
        for j in 1..=200 {
            let x = total * j as f64 / 200.0;
            let m = edge.cost.marginal(x);
            if m < prev - 1e-9 * prev.abs().max(1e-300) {
                out.push(format!(
                    "marginal cost of edge {k} decreases near x={x:e}; the optimum is only a stationary point"
                ));
                break;
            }
            prev = m;
        }
    }
    out
}
