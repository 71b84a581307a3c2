//! Builtin scenarios, the network JSON schema, TNTP ingestion and
//! k-shortest path sets.

mod builtin;
mod json;
mod kpaths;
mod tntp;

pub use builtin::{builtin, builtin_sequence, BuiltinInfo, Scenario, ScenarioParams, BUILTINS, SEQUENCES};
pub use json::{network_from_json, network_to_json, SCHEMA};
pub use kpaths::{k_shortest_paths, KPaths};
pub use tntp::{parse_tntp_net, parse_tntp_trips, tntp_network, TntpLink, TntpNetwork, TntpTrips};

use crate::routing::RoutingError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("unknown scenario '{0}'")]
    UnknownScenario(String),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
}
