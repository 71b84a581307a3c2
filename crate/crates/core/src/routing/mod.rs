//! Routing-game domain model: networks with explicit path sets, edge costs,
//! demands, flows and loads, and the cost functionals built on them.

pub mod cost;
pub mod expr;
mod flow;
mod network;

pub use cost::{CostFunction, Evaluator, GenericCost, IndexHints, Phase, Polynomial, PowerHint};
pub use expr::{Expr, ExprError};
pub use flow::{
    beckmann_potential, edge_loads, marginal_cost, marginal_residual, path_cost, social_cost,
    wardrop_residual, Demand, FlowProfile, LoadProfile, FEASIBILITY_TOL, USE_THRESHOLD,
};
pub use network::{Edge, Network, OdPair};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoutingError {
    #[error("invalid cost function: {0}")]
    InvalidCost(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("quadrature for '{expr}' did not converge at x={x:e} (error estimate {error_estimate:e})")]
    Quadrature { expr: String, x: f64, error_estimate: f64 },
    #[error("invalid network: {0}")]
    Structure(String),
    #[error("{what} has length {got}, expected {expected}")]
    Dimension { what: &'static str, expected: usize, got: usize },
    #[error("invalid demand: {0}")]
    InvalidDemand(String),
    #[error("flow infeasible for pair {pair}: routes {got}, demand is {expected}")]
    InfeasibleFlow { pair: usize, expected: f64, got: f64 },
}
