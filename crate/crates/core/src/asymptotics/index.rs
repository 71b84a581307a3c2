//! Limits of cost ratios at a traffic limit.
//!
//! Structured costs are reduced to their leading behaviour and compared in
//! closed form. Anything else is compared numerically on a geometric grid
//! toward the limit.

use serde::{Deserialize, Serialize};

use super::{AsymptoticsError, ExtReal, TrafficLimit};
use crate::routing::{CostFunction, Network, Phase};

/// Reference function `c(x)` against which edge indices are taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Benchmark {
    /// `x^degree`.
    Monomial { degree: f64 },
    ConstantOne,
    /// The cost function of an edge of the network.
    EdgeCost { edge: usize },
}

impl Benchmark {
    fn check(&self, net: &Network) -> Result<(), AsymptoticsError> {
        match *self {
            Benchmark::Monomial { degree } if !(degree >= 0.0 && degree.is_finite()) => {
                Err(AsymptoticsError::InvalidBenchmark(format!("monomial degree {degree} must be finite and nonnegative")))
            }
            Benchmark::EdgeCost { edge } if edge >= net.edge_count() => {
                Err(AsymptoticsError::InvalidBenchmark(format!("edge {edge} does not exist")))
            }
            Benchmark::EdgeCost { edge } if net.cost(edge).is_identically_zero() => {
                Err(AsymptoticsError::InvalidBenchmark(format!("cost of edge {edge} vanishes identically")))
            }
            _ => Ok(()),
        }
    }

    /// Regular-variation degree `β` at `limit`.
    pub fn degree(&self, net: &Network, limit: TrafficLimit) -> Result<f64, AsymptoticsError> {
        self.check(net)?;
        match *self {
            Benchmark::Monomial { degree } => Ok(degree),
            Benchmark::ConstantOne => Ok(0.0),
            Benchmark::EdgeCost { edge } => match asymptote(net.cost(edge), limit) {
                Asymptote::Power { degree, .. } => Ok(degree),
                Asymptote::Bounded { .. } => Err(AsymptoticsError::InvalidBenchmark(format!(
                    "cost of edge {edge} is not regularly varying"
                ))),
                Asymptote::Zero => Err(AsymptoticsError::InvalidBenchmark(format!("cost of edge {edge} vanishes"))),
                Asymptote::Unknown => Err(AsymptoticsError::InvalidBenchmark(format!(
                    "cost of edge {edge} has no declared degree at {limit}"
                ))),
            },
        }
    }

    /// `c(x)`.
    pub fn eval(&self, net: &Network, x: f64) -> f64 {
        match *self {
            Benchmark::Monomial { degree } => x.powf(degree),
            Benchmark::ConstantOne => 1.0,
            Benchmark::EdgeCost { edge } => net.cost(edge).eval(x),
        }
    }

    fn asymptote(&self, net: &Network, limit: TrafficLimit) -> Asymptote {
        match *self {
            Benchmark::Monomial { degree } => Asymptote::Power { degree, leading: Some(1.0) },
            Benchmark::ConstantOne => Asymptote::Power { degree: 0.0, leading: Some(1.0) },
            Benchmark::EdgeCost { edge } => asymptote(net.cost(edge), limit),
        }
    }
}

impl std::fmt::Display for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Benchmark::Monomial { degree } => write!(f, "x^{degree}"),
            Benchmark::ConstantOne => f.write_str("1"),
            Benchmark::EdgeCost { edge } => write!(f, "c_{edge}"),
        }
    }
}

/// Parameters of the numeric ratio test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NumericLimitConfig {
    pub points: u32,
    pub factor: f64,
    /// Relative spread of the last five ratios accepted as convergence.
    pub spread: f64,
    /// Ratios above `cap` (increasing) count as `∞`, below `1/cap` as `0`.
    pub cap: f64,
    /// Minimum per-decade change of `log ratio` for the monotone-trend rule.
    pub trend: f64,
}

impl Default for NumericLimitConfig {
    fn default() -> Self {
        NumericLimitConfig { points: 20, factor: 10.0, spread: 1e-3, cap: 1e12, trend: 0.05 }
    }
}

/// Leading behaviour of a cost at a traffic limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Asymptote {
    Zero,
    /// `c(x) ~ leading · x^degree`; `leading` unknown for slowly varying factors.
    Power { degree: f64, leading: Option<f64> },
    /// `Θ(x^degree)` without a limit ratio.
    Bounded { degree: f64 },
    Unknown,
}

pub(crate) fn asymptote(cost: &CostFunction, limit: TrafficLimit) -> Asymptote {
    match cost {
        CostFunction::Polynomial(p) => {
            let terms = p.terms();
            let pick = match limit {
                TrafficLimit::Light => terms.first(),
                TrafficLimit::Heavy => terms.last(),
            };
            pick.map_or(Asymptote::Zero, |&(k, c)| Asymptote::Power { degree: k as f64, leading: Some(c) })
        }
        CostFunction::Bpr { free_flow, multiplier, capacity, power } => {
            let mono = (*multiplier > 0.0).then(|| (*power, multiplier / capacity.powf(*power)));
            match (mono, limit) {
                (None, _) if *free_flow > 0.0 => Asymptote::Power { degree: 0.0, leading: Some(*free_flow) },
                (None, _) => Asymptote::Zero,
                (Some((p, b)), _) if p == 0.0 => Asymptote::Power { degree: 0.0, leading: Some(free_flow + b) },
                (Some(_), TrafficLimit::Light) if *free_flow > 0.0 => {
                    Asymptote::Power { degree: 0.0, leading: Some(*free_flow) }
                }
                (Some((p, b)), _) => Asymptote::Power { degree: p, leading: Some(b) },
            }
        }
        CostFunction::OscillatingMonomial { degree, phase } => match phase {
            Phase::None => Asymptote::Power { degree: *degree as f64, leading: Some(1.0) },
            _ => Asymptote::Bounded { degree: *degree as f64 },
        },
        CostFunction::Generic(g) => {
            let hint = match limit {
                TrafficLimit::Light => g.hints().light,
                TrafficLimit::Heavy => g.hints().heavy,
            };
            hint.map_or(Asymptote::Unknown, |h| Asymptote::Power { degree: h.degree, leading: h.leading })
        }
    }
}

/// `lim_{x→ω} c_e(x) / c(x)`.
pub fn edge_index(
    net: &Network,
    edge: usize,
    benchmark: &Benchmark,
    limit: TrafficLimit,
) -> Result<ExtReal, AsymptoticsError> {
    edge_index_with(net, edge, benchmark, limit, &NumericLimitConfig::default())
}

pub fn edge_index_with(
    net: &Network,
    edge: usize,
    benchmark: &Benchmark,
    limit: TrafficLimit,
    cfg: &NumericLimitConfig,
) -> Result<ExtReal, AsymptoticsError> {
    benchmark.check(net)?;
    if edge >= net.edge_count() {
        return Err(AsymptoticsError::InvalidInput(format!("edge {edge} does not exist")));
    }
    let cost = net.cost(edge);
    if let Benchmark::EdgeCost { edge: b } = *benchmark {
        if cost == net.cost(b) {
            return Ok(ExtReal::Finite(1.0));
        }
    }
    let a = asymptote(cost, limit);
    let b = benchmark.asymptote(net, limit);
    resolve(compare(a, b, limit), || numeric_ratio(|x| cost.eval(x), |x| benchmark.eval(net, x), limit, cfg))
        .map_err(|e| e.describe(format!("edge {edge} against benchmark {benchmark}")))
}

/// `lim_{x→ω} c_e(x) / c_{e'}(x)`, with two identically zero costs tying at 1.
pub fn edge_ratio(
    net: &Network,
    e: usize,
    e2: usize,
    limit: TrafficLimit,
    cfg: &NumericLimitConfig,
) -> Result<ExtReal, AsymptoticsError> {
    let (c1, c2) = (net.cost(e), net.cost(e2));
    if c1 == c2 {
        return Ok(ExtReal::Finite(1.0));
    }
    resolve(compare(asymptote(c1, limit), asymptote(c2, limit), limit), || {
        numeric_ratio(|x| c1.eval(x), |x| c2.eval(x), limit, cfg)
    })
    .map_err(|err| err.describe(format!("edges {e} and {e2}")))
}

fn resolve(
    closed: Option<ExtReal>,
    numeric: impl FnOnce() -> Result<ExtReal, AsymptoticsError>,
) -> Result<ExtReal, AsymptoticsError> {
    match closed {
        Some(ExtReal::Undefined) => {
            Err(AsymptoticsError::NotComparable("an oscillating factor keeps the ratio from converging".into()))
        }
        Some(v) => Ok(v),
        None => numeric(),
    }
}

/// Regular-variation degree of a cost at `limit`, from its structure or, for
/// undeclared generic costs, from the numeric limit of `c(2x)/c(x) = 2^ρ`.
pub(crate) fn variation_degree(
    cost: &CostFunction,
    limit: TrafficLimit,
    cfg: &NumericLimitConfig,
) -> Result<f64, AsymptoticsError> {
    match asymptote(cost, limit) {
        Asymptote::Power { degree, .. } => Ok(degree),
        Asymptote::Zero => Err(AsymptoticsError::NotComparable("cost vanishes identically".into())),
        Asymptote::Bounded { .. } => {
            Err(AsymptoticsError::NotComparable("oscillating cost is not regularly varying".into()))
        }
        Asymptote::Unknown => match numeric_ratio(|x| cost.eval(2.0 * x), |x| cost.eval(x), limit, cfg)? {
            ExtReal::Finite(v) if v > 0.0 => Ok(v.log2()),
            other => Err(AsymptoticsError::NotComparable(format!(
                "c(2x)/c(x) tends to {other}, so the cost is not regularly varying"
            ))),
        },
    }
}

/// Closed-form comparison; `None` means fall back to numerics.
fn compare(a: Asymptote, b: Asymptote, limit: TrafficLimit) -> Option<ExtReal> {
    use Asymptote::*;
    let by_degree = |d1: f64, d2: f64| -> ExtReal {
        let num_dominates = match limit {
            TrafficLimit::Heavy => d1 > d2,
            TrafficLimit::Light => d1 < d2,
        };
        if num_dominates {
            ExtReal::Infinite
        } else {
            ExtReal::ZERO
        }
    };
    match (a, b) {
        (Zero, Zero) => Some(ExtReal::Finite(1.0)),
        (Zero, _) => Some(ExtReal::ZERO),
        (_, Zero) => Some(ExtReal::Infinite),
        (Unknown, _) | (_, Unknown) => None,
        (Power { degree: d1, leading: l1 }, Power { degree: d2, leading: l2 }) => {
            if d1 != d2 {
                Some(by_degree(d1, d2))
            } else {
                match (l1, l2) {
                    (Some(c1), Some(c2)) => Some(ExtReal::Finite(c1 / c2)),
                    _ => None,
                }
            }
        }
        (Bounded { degree: d1 }, Power { degree: d2, .. })
        | (Power { degree: d1, .. }, Bounded { degree: d2 })
        | (Bounded { degree: d1 }, Bounded { degree: d2 }) => {
            if d1 != d2 {
                Some(by_degree(d1, d2))
            } else if matches!((a, b), (Bounded { .. }, Bounded { .. })) {
                None
            } else {
                Some(ExtReal::Undefined)
            }
        }
    }
}

/// Evaluate `num/den` on `factor^{±k}`, `k = 1..=points`, and read off the limit.
pub(crate) fn numeric_ratio(
    num: impl Fn(f64) -> f64,
    den: impl Fn(f64) -> f64,
    limit: TrafficLimit,
    cfg: &NumericLimitConfig,
) -> Result<ExtReal, AsymptoticsError> {
    let mut ratios = Vec::with_capacity(cfg.points as usize);
    for k in 1..=cfg.points as i32 {
        let x = match limit {
            TrafficLimit::Heavy => cfg.factor.powi(k),
            TrafficLimit::Light => cfg.factor.powi(-k),
        };
        let (n, d) = (num(x), den(x));
        if n.is_nan() || d.is_nan() {
            break;
        }
        match (n.is_finite(), d.is_finite()) {
            (true, true) if d > 0.0 => ratios.push(n / d),
            (true, true) if n > 0.0 => return Ok(ExtReal::Infinite),
            (true, true) => ratios.push(1.0),
            (false, true) => return Ok(ExtReal::Infinite),
            (true, false) => return Ok(ExtReal::ZERO),
            (false, false) => break,
        }
    }
    classify_sequence(&ratios, cfg)
}

fn classify_sequence(r: &[f64], cfg: &NumericLimitConfig) -> Result<ExtReal, AsymptoticsError> {
    if r.len() < 5 {
        return Err(AsymptoticsError::NotComparable(format!("only {} finite ratio samples", r.len())));
    }
    let tail = &r[r.len() - 5..];
    let last = tail[4];
    let increasing = tail.windows(2).all(|w| w[1] > w[0]);
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    if last > cfg.cap && increasing {
        return Ok(ExtReal::Infinite);
    }
    if last < 1.0 / cfg.cap {
        return Ok(ExtReal::ZERO);
    }
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= cfg.spread * hi.abs() {
        return Ok(ExtReal::Finite(last));
    }
    // steady power-law trend that would cross the caps further out
    let per_step = cfg.trend * cfg.factor.log10() * std::f64::consts::LN_10;
    let steady = |sign: f64| tail.windows(2).all(|w| sign * (w[1].ln() - w[0].ln()) >= per_step);
    if increasing && steady(1.0) {
        return Ok(ExtReal::Infinite);
    }
    if decreasing && steady(-1.0) {
        return Ok(ExtReal::ZERO);
    }
    Err(AsymptoticsError::NotComparable(format!(
        "ratio does not settle: last samples {:?}",
        tail.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>()
    )))
}
