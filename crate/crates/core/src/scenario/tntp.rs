//! TNTP network and trip-table formats.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{k_shortest_paths, ScenarioError};
use crate::routing::{CostFunction, Demand, Edge, Network, OdPair};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TntpLink {
    pub init_node: usize,
    pub term_node: usize,
    pub capacity: f64,
    pub length: f64,
    pub free_flow_time: f64,
    pub b: f64,
    pub power: f64,
    pub speed: f64,
    pub toll: f64,
    pub link_type: i64,
}

impl TntpLink {
    /// `fft·(1 + b·(x/capacity)^power)`.
    pub fn cost(&self) -> Result<CostFunction, ScenarioError> {
        Ok(CostFunction::bpr(self.free_flow_time, self.free_flow_time * self.b, self.capacity, self.power)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TntpNetwork {
    pub node_count: usize,
    pub first_thru_node: usize,
    pub links: Vec<TntpLink>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TntpTrips {
    pub zone_count: Option<usize>,
    pub declared_total: f64,
    /// `(origin, destination) → flow`, 1-based, nonzero entries only.
    pub flows: BTreeMap<(usize, usize), f64>,
    pub warnings: Vec<String>,
}

impl TntpTrips {
    pub fn total(&self) -> f64 {
        self.flows.values().sum()
    }
}

fn err(line: usize, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Parse { line, message: message.into() }
}

/// Metadata tags up to `<END OF METADATA>` and the line number where the body starts.
fn metadata(text: &str) -> Result<(BTreeMap<String, (usize, String)>, usize), ScenarioError> {
    let mut tags = BTreeMap::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        let Some(rest) = line.strip_prefix('<') else {
            return Err(err(k + 1, "data before <END OF METADATA>"));
        };
        let Some((tag, value)) = rest.split_once('>') else {
            return Err(err(k + 1, format!("unterminated metadata tag '{line}'")));
        };
        let tag = tag.trim().to_ascii_uppercase();
        if tag == "END OF METADATA" {
            return Ok((tags, k + 1));
        }
        tags.insert(tag, (k + 1, value.trim().to_string()));
    }
    Err(err(text.lines().count(), "missing <END OF METADATA>"))
}

fn tag<T: std::str::FromStr>(tags: &BTreeMap<String, (usize, String)>, name: &str) -> Result<T, ScenarioError> {
    let (line, value) = tags.get(name).ok_or_else(|| err(0, format!("missing <{name}>")))?;
    value.parse().map_err(|_| err(*line, format!("<{name}> value '{value}' is not a valid number")))
}

pub fn parse_tntp_net(text: &str) -> Result<TntpNetwork, ScenarioError> {
    let (tags, body) = metadata(text)?;
    let node_count: usize = tag(&tags, "NUMBER OF NODES")?;
    let link_count: usize = tag(&tags, "NUMBER OF LINKS")?;
    let first_thru_node: usize = tag(&tags, "FIRST THRU NODE")?;
    let mut links = Vec::with_capacity(link_count);
    for (k, raw) in text.lines().enumerate().skip(body) {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        let record = line.trim_end_matches(';').trim_end();
        let fields: Vec<&str> = record.split_whitespace().collect();
        if fields.len() != 10 || !line.ends_with(';') {
            return Err(err(line_no, format!("expected 10 fields terminated by ';', got '{line}'")));
        }
        let num = |i: usize| -> Result<f64, ScenarioError> {
            fields[i].parse::<f64>().map_err(|_| err(line_no, format!("field {} '{}' is not a number", i + 1, fields[i])))
        };
        let node = |i: usize| -> Result<usize, ScenarioError> {
            let v: usize = fields[i].parse().map_err(|_| err(line_no, format!("node '{}' is not an integer", fields[i])))?;
            if v == 0 || v > node_count {
                return Err(err(line_no, format!("node {v} outside 1..={node_count}")));
            }
            Ok(v)
        };
        let link = TntpLink {
            init_node: node(0)?,
            term_node: node(1)?,
            capacity: num(2)?,
            length: num(3)?,
            free_flow_time: num(4)?,
            b: num(5)?,
            power: num(6)?,
            speed: num(7)?,
            toll: num(8)?,
            link_type: fields[9].parse().map_err(|_| err(line_no, format!("link type '{}' is not an integer", fields[9])))?,
        };
        if !(link.capacity > 0.0) {
            return Err(err(line_no, format!("capacity {} must be positive", link.capacity)));
        }
        links.push(link);
    }
    if links.len() != link_count {
        return Err(err(text.lines().count(), format!("{} links read, <NUMBER OF LINKS> says {link_count}", links.len())));
    }
    Ok(TntpNetwork { node_count, first_thru_node, links })
}

pub fn parse_tntp_trips(text: &str) -> Result<TntpTrips, ScenarioError> {
    let (tags, body) = metadata(text)?;
    let declared_total: f64 = tag(&tags, "TOTAL OD FLOW")?;
    let zone_count: Option<usize> = tags.contains_key("NUMBER OF ZONES").then(|| tag(&tags, "NUMBER OF ZONES")).transpose()?;
    let mut flows = BTreeMap::new();
    let mut warnings = Vec::new();
    let mut origin: Option<usize> = None;
    for (k, raw) in text.lines().enumerate().skip(body) {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('~') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("Origin") {
            let o: usize =
                rest.trim().parse().map_err(|_| err(line_no, format!("origin '{}' is not an integer", rest.trim())))?;
            origin = Some(o);
            continue;
        }
        let o = origin.ok_or_else(|| err(line_no, "entry before any 'Origin' line"))?;
        for entry in line.split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (d, f) = entry.split_once(':').ok_or_else(|| err(line_no, format!("malformed entry '{entry}'")))?;
            let d: usize = d.trim().parse().map_err(|_| err(line_no, format!("destination '{}' is not an integer", d.trim())))?;
            let f: f64 = f.trim().parse().map_err(|_| err(line_no, format!("flow '{}' is not a number", f.trim())))?;
            if !(f.is_finite() && f >= 0.0) {
                return Err(err(line_no, format!("flow {f} must be finite and nonnegative")));
            }
            if f == 0.0 {
                continue;
            }
            if d == o {
                warnings.push(format!("line {line_no}: dropped intrazonal flow {f} at zone {o}"));
                continue;
            }
            *flows.entry((o, d)).or_insert(0.0) += f;
        }
    }
    let total: f64 = flows.values().sum();
    if (total - declared_total).abs() > 1e-6 * declared_total.abs().max(1.0) {
        warnings.push(format!("parsed total flow {total} differs from <TOTAL OD FLOW> {declared_total}"));
    }
    Ok(TntpTrips { zone_count, declared_total, flows, warnings })
}

/// Network with BPR links and the `k` shortest free-flow paths per OD pair,
/// plus its demand. Zones below the first through node are never crossed.
pub fn tntp_network(
    net: &TntpNetwork,
    trips: &TntpTrips,
    k: usize,
) -> Result<(Network, Demand, Vec<String>), ScenarioError> {
    let edges = net
        .links
        .iter()
        .map(|l| Ok(Edge::new(l.init_node - 1, l.term_node - 1, l.cost()?)))
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    let through = |v: usize| v + 1 >= net.first_thru_node;
    let mut pairs = Vec::with_capacity(trips.flows.len());
    let mut inflows = Vec::with_capacity(trips.flows.len());
    let mut warnings = Vec::new();
    for (&(o, d), &flow) in &trips.flows {
        if o == 0 || d == 0 || o > net.node_count || d > net.node_count {
            return Err(ScenarioError::InvalidParam(format!("OD pair {o} -> {d} references an unknown node")));
        }
        let found = k_shortest_paths(net.node_count, &edges, o - 1, d - 1, k, &through)?;
        if found.paths.is_empty() {
            return Err(ScenarioError::InvalidParam(format!("no path from {o} to {d}")));
        }
        if found.truncated {
            warnings.push(format!("OD pair {o} -> {d}: only {} loopless paths exist", found.paths.len()));
        }
        pairs.push(OdPair::new(o - 1, d - 1, found.paths));
        inflows.push(flow);
    }
    Ok((Network::new(net.node_count, edges, pairs)?, Demand::new(inflows)?, warnings))
}

#[cfg(test)]
mod tests {
    use super::*;

    const NET: &str = "<NUMBER OF ZONES> 3
<NUMBER OF NODES> 3
<FIRST THRU NODE> 1
<NUMBER OF LINKS> 3
<END OF METADATA>

~ Init node  Term node  Capacity  Length  Free Flow Time  B  Power  Speed limit  Toll  Type ;
	1	2	25900.2	6	6	0.15	4	0	0	1	;
	2	3	100	1	2	0.15	4	0	0	1	;
	1	3	50	1	9	0.15	4	0	0	1	;
";

    const TRIPS: &str = "<NUMBER OF ZONES> 3
<TOTAL OD FLOW> 150.0
<END OF METADATA>

Origin 1
    2 :     100.0;    3 :     50.0;
Origin 2
    3 :     0.0;
";

    #[test]
    fn parses_links() {
        let net = parse_tntp_net(NET).unwrap();
        assert_eq!(net.node_count, 3);
        let l = &net.links[0];
        assert_eq!((l.init_node, l.term_node, l.capacity, l.free_flow_time, l.b, l.power), (1, 2, 25900.2, 6.0, 0.15, 4.0));
        for l in &net.links {
            let c = l.cost().unwrap();
            let want = l.free_flow_time * (1.0 + l.b);
            assert!((c.eval(l.capacity) - want).abs() <= 2.0 * f64::EPSILON * want);
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let missing = NET.replace("<NUMBER OF LINKS> 3\n", "");
        assert!(matches!(parse_tntp_net(&missing), Err(ScenarioError::Parse { .. })));
        let bad_row = NET.replace("2\t3\t100", "2\t3\tabc");
        assert!(matches!(parse_tntp_net(&bad_row), Err(ScenarioError::Parse { line: 9, .. })));
        let zero_cap = NET.replace("\t50\t", "\t0\t");
        assert!(matches!(parse_tntp_net(&zero_cap), Err(ScenarioError::Parse { line: 10, .. })));
    }

    #[test]
    fn parses_trips() {
        let t = parse_tntp_trips(TRIPS).unwrap();
        assert_eq!(t.flows.get(&(1, 2)), Some(&100.0));
        assert_eq!(t.flows.len(), 2);
        assert!(t.warnings.is_empty());
        let off = parse_tntp_trips(&TRIPS.replace("150.0", "160.0")).unwrap();
        assert_eq!(off.warnings.len(), 1);
        assert!(matches!(parse_tntp_trips(&TRIPS.replace("3 :     50.0", "3 50.0")), Err(ScenarioError::Parse { line: 6, .. })));
    }

    #[test]
    fn builds_network() {
        let (net, demand, warnings) = tntp_network(&parse_tntp_net(NET).unwrap(), &parse_tntp_trips(TRIPS).unwrap(), 5).unwrap();
        assert_eq!(net.pair_count(), 2);
        assert_eq!(demand.inflows(), &[100.0, 50.0]);
        // 1 -> 3 has paths [1->2->3] (cost 8) and [1->3] (cost 9)
        assert_eq!(net.pairs()[1].paths, vec![vec![0, 1], vec![2]]);
        assert_eq!(warnings.len(), 2);
    }
}
