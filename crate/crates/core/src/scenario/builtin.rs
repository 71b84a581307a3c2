use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::ScenarioError;
use crate::lab::{Affine, DemandSequence, InflowRule};
use crate::routing::{CostFunction, Edge, GenericCost, IndexHints, Network, OdPair, Phase, PowerHint};

/// A network together with the relative inflows it is usually studied with.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub network: Network,
    pub rates: Vec<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScenarioParams {
    pub d1: Option<u32>,
    pub d2: Option<u32>,
    pub d: Option<u32>,
}

pub struct BuiltinInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

pub const BUILTINS: &[BuiltinInfo] = &[
    BuiltinInfo { name: "pigou_affine", params: "", summary: "two parallel links with costs 1 and x" },
    BuiltinInfo {
        name: "pigou_monomial",
        params: "--d1 D1 --d2 D2 (default 1, 2)",
        summary: "two parallel links with costs x^d1 and x^d2",
    },
    BuiltinInfo {
        name: "oscillating_three_link",
        params: "--d D (integer >= 2, default 2)",
        summary: "three parallel links x^d(1 + sin(ln x)/2), x^d, x^d(1 + cos(ln x)/2)",
    },
    BuiltinInfo {
        name: "wheatstone",
        params: "",
        summary: "four nodes, two OD pairs, costs x, x^2, ln(1+x), 1+sqrt(x), e^x",
    },
    BuiltinInfo {
        name: "uncoupled",
        params: "",
        summary: "a Pigou pair (1, x) next to an independent zero-cost link",
    },
    BuiltinInfo { name: "braess", params: "", summary: "four-road Braess network with a zero-cost shortcut (auxiliary)" },
];

fn parallel(costs: Vec<CostFunction>) -> Result<Network, ScenarioError> {
    let n = costs.len();
    Ok(Network::new(
        2,
        costs.into_iter().map(|c| Edge::new(0, 1, c)).collect(),
        vec![OdPair::new(0, 1, (0..n).map(|k| vec![k]).collect())],
    )?)
}

fn hint(degree: f64, leading: Option<f64>) -> Option<PowerHint> {
    Some(PowerHint { degree, leading })
}

/// `(1 + x) ln(1 + x) − x`, by its series near 0 where the closed form cancels.
fn log1p_primitive(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x2 / 2.0 - x2 * x / 6.0 + x2 * x2 / 12.0 - x2 * x2 * x / 20.0
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

/// Vertices A = 0, B = 1, C = 2, D = 3. Pair 1 routes A → C over `e1` or
/// `e2 e5`; pair 2 routes D → B over `e4` or `e5 e3`.
fn wheatstone() -> Result<Network, ScenarioError> {
    let log = GenericCost::native(
        "log1p(x)",
        Arc::new(f64::ln_1p),
        Some(("(1 + x) * log1p(x) - x", Arc::new(log1p_primitive))),
        IndexHints { light: hint(1.0, Some(1.0)), heavy: hint(0.0, None) },
    );
    let root = GenericCost::native(
        "1 + sqrt(x)",
        Arc::new(|x: f64| 1.0 + x.sqrt()),
        Some(("x + 2 / 3 * x ^ 1.5", Arc::new(|x: f64| x + 2.0 / 3.0 * x * x.sqrt()))),
        IndexHints { light: hint(0.0, Some(1.0)), heavy: hint(0.5, Some(1.0)) },
    );
    let exp = GenericCost::native(
        "exp(x)",
        Arc::new(f64::exp),
        Some(("expm1(x)", Arc::new(f64::exp_m1))),
        IndexHints { light: hint(0.0, Some(1.0)), heavy: None },
    );
    Ok(Network::new(
        4,
        vec![
            Edge::new(0, 2, CostFunction::monomial(1, 1.0)?),
            Edge::new(0, 3, CostFunction::monomial(2, 1.0)?),
            Edge::new(2, 1, CostFunction::generic(log)?),
            Edge::new(3, 1, CostFunction::generic(root)?),
            Edge::new(3, 2, CostFunction::generic(exp)?),
        ],
        vec![OdPair::new(0, 2, vec![vec![0], vec![1, 4]]), OdPair::new(3, 1, vec![vec![3], vec![4, 2]])],
    )?)
}

fn uncoupled() -> Result<Network, ScenarioError> {
    Ok(Network::new(
        4,
        vec![
            Edge::new(0, 1, CostFunction::constant(1.0)?),
            Edge::new(0, 1, CostFunction::monomial(1, 1.0)?),
            Edge::new(2, 3, CostFunction::zero()),
        ],
        vec![OdPair::new(0, 1, vec![vec![0], vec![1]]), OdPair::new(2, 3, vec![vec![2]])],
    )?)
}

/// s = 0, v = 1, w = 2, t = 3.
fn braess() -> Result<Network, ScenarioError> {
    Ok(Network::new(
        4,
        vec![
            Edge::new(0, 1, CostFunction::monomial(1, 1.0)?),
            Edge::new(1, 3, CostFunction::constant(1.0)?),
            Edge::new(0, 2, CostFunction::constant(1.0)?),
            Edge::new(2, 3, CostFunction::monomial(1, 1.0)?),
            Edge::new(1, 2, CostFunction::zero()),
        ],
        vec![OdPair::new(0, 3, vec![vec![0, 1], vec![2, 3], vec![0, 4, 3]])],
    )?)
}

pub fn builtin(name: &str, params: &ScenarioParams) -> Result<Scenario, ScenarioError> {
    let unused = |what: &[(&str, Option<u32>)]| -> Result<(), ScenarioError> {
        match what.iter().find(|(_, v)| v.is_some()) {
            Some((flag, _)) => Err(ScenarioError::InvalidParam(format!("{name} takes no parameter {flag}"))),
            None => Ok(()),
        }
    };
    let (network, rates) = match name {
        "pigou_affine" => {
            unused(&[("d1", params.d1), ("d2", params.d2), ("d", params.d)])?;
            (parallel(vec![CostFunction::constant(1.0)?, CostFunction::monomial(1, 1.0)?])?, vec![1.0])
        }
        "pigou_monomial" => {
            unused(&[("d", params.d)])?;
            let (d1, d2) = (params.d1.unwrap_or(1), params.d2.unwrap_or(2));
            if d1 == 0 || d2 == 0 {
                return Err(ScenarioError::InvalidParam(format!("degrees must be positive, got d1={d1}, d2={d2}")));
            }
            (parallel(vec![CostFunction::monomial(d1, 1.0)?, CostFunction::monomial(d2, 1.0)?])?, vec![1.0])
        }
        "oscillating_three_link" => {
            unused(&[("d1", params.d1), ("d2", params.d2)])?;
            let d = params.d.unwrap_or(2);
            if d < 2 {
                return Err(ScenarioError::InvalidParam(format!("oscillating degree must be at least 2, got {d}")));
            }
            let costs = [Phase::Sine, Phase::None, Phase::Cosine]
                .into_iter()
                .map(|p| CostFunction::oscillating(d, p))
                .collect::<Result<Vec<_>, _>>()?;
            (parallel(costs)?, vec![1.0])
        }
        "wheatstone" => {
            unused(&[("d1", params.d1), ("d2", params.d2), ("d", params.d)])?;
            (wheatstone()?, vec![0.5, 0.5])
        }
        "uncoupled" => {
            unused(&[("d1", params.d1), ("d2", params.d2), ("d", params.d)])?;
            (uncoupled()?, vec![0.5, 0.5])
        }
        "braess" => {
            unused(&[("d1", params.d1), ("d2", params.d2), ("d", params.d)])?;
            (braess()?, vec![1.0])
        }
        _ => return Err(ScenarioError::UnknownScenario(name.to_string())),
    };
    Ok(Scenario { name: name.to_string(), network, rates })
}

/// Named inflow sequences on the `uncoupled` network, pair order (Pigou, zero-cost link).
pub const SEQUENCES: &[BuiltinInfo] = &[
    BuiltinInfo {
        name: "example_inefficient",
        params: "",
        summary: "odd n: m = (1, 2n); even n: m = (1 + 2n, 0)",
    },
    BuiltinInfo { name: "example_efficient", params: "", summary: "m = (sqrt(n), n)" },
];

pub fn builtin_sequence(name: &str) -> Result<DemandSequence, ScenarioError> {
    let affine = |intercept, slope| Affine { intercept, slope };
    match name {
        "example_inefficient" => Ok(DemandSequence::new(vec![
            InflowRule::Alternating { odd: affine(1.0, 0.0), even: affine(1.0, 2.0) },
            InflowRule::Alternating { odd: affine(0.0, 2.0), even: affine(0.0, 0.0) },
        ])),
        "example_efficient" => Ok(DemandSequence::new(vec![
            InflowRule::Power { coefficient: 1.0, exponent: 0.5 },
            InflowRule::Power { coefficient: 1.0, exponent: 1.0 },
        ])),
        _ => Err(ScenarioError::UnknownScenario(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLES: [f64; 5] = [0.0, 0.3, 1.0, 2.5, 7.0];

    fn check(net: &Network, formulas: &[&dyn Fn(f64) -> f64]) {
        assert_eq!(net.edge_count(), formulas.len());
        for (e, f) in formulas.iter().enumerate() {
            for x in SAMPLES {
                let (got, want) = (net.cost(e).eval(x), f(x));
                assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "edge {e} at {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn wheatstone_costs() {
        let s = builtin("wheatstone", &ScenarioParams::default()).unwrap();
        check(
            &s.network,
            &[&|x| x, &|x| x * x, &|x| (1.0 + x).ln(), &|x| 1.0 + x.sqrt(), &|x| x.exp()],
        );
        assert_eq!(s.network.pair_count(), 2);
        assert!((0..2).all(|i| s.network.pair_paths(i).len() == 2));
        for e in 2..5 {
            let c = s.network.cost(e);
            let h = 1e-4;
            for x in [0.5, 3.0] {
                let d = (c.primitive(x + h).unwrap() - c.primitive(x - h).unwrap()) / (2.0 * h);
                assert!((d - c.eval(x)).abs() < 1e-6, "edge {e}");
            }
        }
    }

    #[test]
    fn oscillating_costs() {
        let s = builtin("oscillating_three_link", &ScenarioParams { d: Some(2), ..Default::default() }).unwrap();
        let osc = |phase: fn(f64) -> f64| move |x: f64| if x == 0.0 { 0.0 } else { x * x * (1.0 + 0.5 * phase(x.ln())) };
        check(&s.network, &[&osc(f64::sin), &|x| x * x, &osc(f64::cos)]);
        assert!(builtin("oscillating_three_link", &ScenarioParams { d: Some(1), ..Default::default() }).is_err());
    }

    #[test]
    fn small_scenarios() {
        let p = ScenarioParams::default();
        check(&builtin("pigou_affine", &p).unwrap().network, &[&|_| 1.0, &|x| x]);
        let m = builtin("pigou_monomial", &ScenarioParams { d1: Some(2), d2: Some(5), d: None }).unwrap();
        check(&m.network, &[&|x| x * x, &|x| x.powi(5)]);
        let u = builtin("uncoupled", &p).unwrap();
        check(&u.network, &[&|_| 1.0, &|x| x, &|_| 0.0]);
        assert_eq!(u.rates, vec![0.5, 0.5]);
        let b = builtin("braess", &p).unwrap();
        check(&b.network, &[&|x| x, &|_| 1.0, &|_| 1.0, &|x| x, &|_| 0.0]);
        assert!(matches!(builtin("nope", &p), Err(ScenarioError::UnknownScenario(_))));
        assert!(builtin("pigou_affine", &ScenarioParams { d: Some(3), ..Default::default() }).is_err());
    }

    #[test]
    fn sequences() {
        let ineff = builtin_sequence("example_inefficient").unwrap();
        assert_eq!(ineff.inflows(5).unwrap(), vec![1.0, 10.0]);
        assert_eq!(ineff.inflows(6).unwrap(), vec![13.0, 0.0]);
        let eff = builtin_sequence("example_efficient").unwrap();
        assert_eq!(eff.inflows(16).unwrap(), vec![4.0, 16.0]);
        assert!(SEQUENCES.iter().all(|s| builtin_sequence(s.name).is_ok()));
    }

    #[test]
    fn log_primitive_series_matches() {
        for x in [1e-3, 1.01e-3, 0.999e-3] {
            let closed = (1.0 + x) * f64::ln_1p(x) - x;
            assert!((log1p_primitive(x) - closed).abs() < 1e-12 * closed);
        }
    }
}
