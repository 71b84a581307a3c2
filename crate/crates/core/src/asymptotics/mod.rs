//! Asymptotic calculus for routing networks at a traffic limit: edge,
//! path, pair and network indices against a benchmark; automatic benchmark
//! selection; polynomial orders, rate exponents and explicit bound
//! constants; closed-form Pigou rates; and the limit problem `V_ρ(λ)`.

mod classify;
mod ext;
mod index;
mod limit;
mod orders;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::routing::RoutingError;

pub use classify::{
    auto_benchmark, classify, predict_poa_limit, ClassificationReport, IndexEntry, PathEntry, PoaVerdict,
};
pub use ext::{ExtReal, Order};
pub use index::{edge_index, edge_index_with, edge_ratio, Benchmark, NumericLimitConfig};
pub use limit::{limit_value, LimitValue};
pub use orders::{
    pigou_asymptotics, poly_orders, rate_bound_constants, rate_exponent, LimitOrders, PolyOrders, Provenance,
    RateBound, RateEstimate,
};

/// Traffic limit `ω`: light is `M → 0`, heavy is `M → ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrafficLimit {
    Light,
    Heavy,
}

impl fmt::Display for TrafficLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TrafficLimit::Light => "light",
            TrafficLimit::Heavy => "heavy",
        })
    }
}

impl std::str::FromStr for TrafficLimit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "light" | "0" => Ok(TrafficLimit::Light),
            "heavy" | "inf" => Ok(TrafficLimit::Heavy),
            _ => Err(format!("unknown traffic limit '{s}' (expected light or heavy)")),
        }
    }
}

/// Fast (index 0), tight (finite positive) or slow (infinite).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Fast,
    Tight,
    Slow,
    Undetermined,
}

impl Label {
    pub fn of(index: ExtReal) -> Self {
        match index {
            ExtReal::Finite(v) if v == 0.0 => Label::Fast,
            ExtReal::Finite(_) => Label::Tight,
            ExtReal::Infinite => Label::Slow,
            ExtReal::Undefined => Label::Undetermined,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Label::Fast => "fast",
            Label::Tight => "tight",
            Label::Slow => "slow",
            Label::Undetermined => "undetermined",
        })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("costs are not regularly comparable: {0}")]
    NotComparable(String),
    #[error("invalid benchmark: {0}")]
    InvalidBenchmark(String),
    #[error("edge {edge} is not a polynomial with integer degrees: {reason}")]
    NotPolynomial { edge: usize, reason: String },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl AsymptoticsError {
    pub(crate) fn describe(self, context: String) -> Self {
        match self {
            AsymptoticsError::NotComparable(msg) => AsymptoticsError::NotComparable(format!("{context}: {msg}")),
            other => other,
        }
    }
}

/// Check that `rates` is a relative-inflow vector for `pairs` pairs.
pub(crate) fn check_rates(rates: &[f64], pairs: usize) -> Result<(), AsymptoticsError> {
    if rates.len() != pairs {
        return Err(AsymptoticsError::InvalidInput(format!("{} relative rates for {pairs} pairs", rates.len())));
    }
    let sum: f64 = rates.iter().sum();
    if rates.iter().any(|r| !r.is_finite() || *r < 0.0) || (sum - 1.0).abs() > 1e-9 {
        return Err(AsymptoticsError::InvalidInput(format!("relative rates {rates:?} are not on the simplex")));
    }
    Ok(())
}
