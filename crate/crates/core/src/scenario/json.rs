//! Versioned JSON form of a network (`"schema": "routing-network/1"`).
//!
//! ```json
//! {
//!   "schema": "routing-network/1",
//!   "vertex_count": 2,
//!   "edges": [
//!     {"tail": 0, "head": 1, "cost": {"kind": "polynomial", "terms": [[0, 1.0]]}},
//!     {"tail": 0, "head": 1, "cost": {"kind": "bpr", "free_flow": 1.0, "multiplier": 0.15,
//!                                     "capacity": 10.0, "power": 4.0}}
//!   ],
//!   "pairs": [{"origin": 0, "destination": 1, "paths": [[0], [1]]}]
//! }
//! ```
//!
//! Other cost kinds are `{"kind": "oscillating", "degree": 2, "phase": "sine"}`
//! and `{"kind": "generic", "expr": "1 + sqrt(x)", "primitive": "...",
//! "hints": {"heavy": {"degree": 0.5, "leading": 1.0}}}`.

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::routing::{CostFunction, Edge, GenericCost, IndexHints, Network, OdPair, Phase};

pub const SCHEMA: &str = "routing-network/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum CostDoc {
    Polynomial {
        terms: Vec<(u32, f64)>,
    },
    Bpr {
        free_flow: f64,
        multiplier: f64,
        capacity: f64,
        power: f64,
    },
    Oscillating {
        degree: u32,
        phase: Phase,
    },
    Generic {
        expr: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        primitive: Option<String>,
        #[serde(default)]
        hints: IndexHints,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    tail: usize,
    head: usize,
    cost: CostDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    origin: usize,
    destination: usize,
    paths: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    schema: String,
    vertex_count: usize,
    edges: Vec<EdgeDoc>,
    pairs: Vec<PairDoc>,
}

fn cost_doc(c: &CostFunction) -> CostDoc {
    match c {
        CostFunction::Polynomial(p) => CostDoc::Polynomial { terms: p.terms().to_vec() },
        CostFunction::Bpr { free_flow, multiplier, capacity, power } => CostDoc::Bpr {
            free_flow: *free_flow,
            multiplier: *multiplier,
            capacity: *capacity,
            power: *power,
        },
        CostFunction::OscillatingMonomial { degree, phase } => CostDoc::Oscillating { degree: *degree, phase: *phase },
        CostFunction::Generic(g) => CostDoc::Generic {
            expr: g.expr().to_string(),
            primitive: g.primitive_expr().map(String::from),
            hints: *g.hints(),
        },
    }
}

fn cost_from(doc: CostDoc) -> Result<CostFunction, ScenarioError> {
    Ok(match doc {
        CostDoc::Polynomial { terms } => CostFunction::polynomial(&terms)?,
        CostDoc::Bpr { free_flow, multiplier, capacity, power } => {
            CostFunction::bpr(free_flow, multiplier, capacity, power)?
        }
        CostDoc::Oscillating { degree, phase } => CostFunction::oscillating(degree, phase)?,
        CostDoc::Generic { expr, primitive, hints } => {
            CostFunction::generic(GenericCost::from_expr(&expr, primitive.as_deref(), hints)?)?
        }
    })
}

pub fn network_to_json(net: &Network) -> String {
    let doc = NetworkDoc {
        schema: SCHEMA.to_string(),
        vertex_count: net.vertex_count(),
        edges: net.edges().iter().map(|e| EdgeDoc { tail: e.tail, head: e.head, cost: cost_doc(&e.cost) }).collect(),
        pairs: net
            .pairs()
            .iter()
            .map(|p| PairDoc { origin: p.origin, destination: p.destination, paths: p.paths.clone() })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("network documents always serialize")
}

pub fn network_from_json(text: &str) -> Result<Network, ScenarioError> {
    let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| ScenarioError::Schema(e.to_string()))?;
    if doc.schema != SCHEMA {
        return Err(ScenarioError::Schema(format!("unsupported schema '{}', expected '{SCHEMA}'", doc.schema)));
    }
    let edges = doc
        .edges
        .into_iter()
        .enumerate()
        .map(|(k, e)| {
            let cost = cost_from(e.cost).map_err(|err| ScenarioError::Schema(format!("edge {k}: {err}")))?;
            Ok(Edge::new(e.tail, e.head, cost))
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let pairs = doc.pairs.into_iter().map(|p| OdPair::new(p.origin, p.destination, p.paths)).collect();
    Ok(Network::new(doc.vertex_count, edges, pairs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin, ScenarioParams, BUILTINS};

    #[test]
    fn builtins_round_trip() {
        for info in BUILTINS {
            let net = builtin(info.name, &ScenarioParams::default()).unwrap().network;
            let back = network_from_json(&network_to_json(&net)).unwrap();
            assert_eq!(back, net, "{}", info.name);
            for e in 0..net.edge_count() {
                for x in [0.0, 0.7, 3.0] {
                    let (a, b) = (net.cost(e).eval(x), back.cost(e).eval(x));
                    assert!((a - b).abs() <= 1e-14 * a.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn schema_errors() {
        let bad_kind = r#"{"schema":"routing-network/1","vertex_count":2,
            "edges":[{"tail":0,"head":1,"cost":{"kind":"spline","knots":[]}}],
            "pairs":[{"origin":0,"destination":1,"paths":[[0]]}]}"#;
        assert!(matches!(network_from_json(bad_kind), Err(ScenarioError::Schema(_))));
        let no_paths = r#"{"schema":"routing-network/1","vertex_count":2,
            "edges":[{"tail":0,"head":1,"cost":{"kind":"polynomial","terms":[[1,1.0]]}}],
            "pairs":[{"origin":0,"destination":1}]}"#;
        assert!(matches!(network_from_json(no_paths), Err(ScenarioError::Schema(_))));
        let version = no_paths.replace("network/1", "network/9").replace("}]}", ",\"paths\":[[0]]}]}");
        assert!(matches!(network_from_json(&version), Err(ScenarioError::Schema(_))));
    }
}
