//! Polynomial orders, convergence exponents and explicit rate-bound constants.

use serde::{Deserialize, Serialize};

use super::{check_rates, AsymptoticsError, ExtReal, Order, TrafficLimit};
use crate::routing::{CostFunction, Network, Polynomial};

/// Orders of one traffic limit. Light: `q_e`, `q_p = min`, `q^i = max`,
/// `q = min`, slow set `{q_e < q}` and `q̃ = max` over it. Heavy: `d_e`,
/// `d_p = max`, `d^i = min`, `d = max`, slow set `{d_e > d}` and `d̃ = min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitOrders {
    pub edge: Vec<Order>,
    pub path: Vec<Order>,
    pub pair: Vec<Order>,
    pub network: Order,
    pub slow_edges: Vec<usize>,
    /// `q̃` (`-inf` without slow edges) or `d̃` (`inf` without slow edges).
    pub gap: Order,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyOrders {
    pub light: LimitOrders,
    pub heavy: LimitOrders,
}

impl PolyOrders {
    pub fn at(&self, limit: TrafficLimit) -> &LimitOrders {
        match limit {
            TrafficLimit::Light => &self.light,
            TrafficLimit::Heavy => &self.heavy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    TheoremExponent,
    PigouClosedForm,
    EmpiricalFit,
}

/// `PoA − 1 ≈ b·M^a` (light) or `b·M^{−a}` (heavy).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub exponent: ExtReal,
    pub constant: Option<f64>,
    pub provenance: Provenance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Degree/coefficient pairs with positive coefficients, ascending.
fn degree_terms(cost: &CostFunction) -> Result<Vec<(f64, f64)>, String> {
    match cost {
        CostFunction::Polynomial(p) => Ok(p.terms().iter().map(|&(k, c)| (k as f64, c)).collect()),
        CostFunction::Bpr { free_flow, multiplier, capacity, power } => {
            let mut t = Vec::new();
            if *free_flow > 0.0 {
                t.push((0.0, *free_flow));
            }
            if *multiplier > 0.0 {
                let b = multiplier / capacity.powf(*power);
                match t.first_mut() {
                    Some(first) if *power == 0.0 => first.1 += b,
                    _ => t.push((*power, b)),
                }
            }
            Ok(t)
        }
        CostFunction::OscillatingMonomial { .. } => Err("oscillating costs have no polynomial order".into()),
        CostFunction::Generic(g) => Err(format!("generic cost '{}' has no polynomial form", g.expr())),
    }
}

/// Integer-degree polynomial form, converting BPR costs with integer power.
fn integer_polynomial(net: &Network, edge: usize) -> Result<Polynomial, AsymptoticsError> {
    let terms = degree_terms(net.cost(edge)).map_err(|reason| AsymptoticsError::NotPolynomial { edge, reason })?;
    let mut out = Vec::with_capacity(terms.len());
    for (k, c) in terms {
        if k.fract() != 0.0 || k > u32::MAX as f64 {
            return Err(AsymptoticsError::NotPolynomial { edge, reason: format!("degree {k} is not an integer") });
        }
        out.push((k as u32, c));
    }
    Ok(Polynomial::new(&out)?)
}

fn edge_orders(net: &Network) -> Result<(Vec<Order>, Vec<Order>), AsymptoticsError> {
    let mut q = Vec::with_capacity(net.edge_count());
    let mut d = Vec::with_capacity(net.edge_count());
    for e in 0..net.edge_count() {
        let t = degree_terms(net.cost(e)).map_err(|reason| AsymptoticsError::NotPolynomial { edge: e, reason })?;
        match (t.first(), t.last()) {
            (Some(lo), Some(hi)) => {
                q.push(Order::Finite(lo.0));
                d.push(Order::Finite(hi.0));
            }
            // zero cost: q_e = ∞, d_e = 0
            _ => {
                q.push(Order::PosInf);
                d.push(Order::Finite(0.0));
            }
        }
    }
    Ok((q, d))
}

fn aggregate(net: &Network, edge: Vec<Order>, limit: TrafficLimit, pairs: &[usize]) -> LimitOrders {
    let light = limit == TrafficLimit::Light;
    let (path_fold, pair_fold): (fn(Order, Order) -> Order, fn(Order, Order) -> Order) =
        if light { (Order::min, Order::max) } else { (Order::max, Order::min) };
    let (path_init, pair_init) = if light { (Order::PosInf, Order::NegInf) } else { (Order::NegInf, Order::PosInf) };
    let path: Vec<Order> =
        net.paths().map(|(_, edges)| edges.iter().map(|&e| edge[e]).fold(path_init, path_fold)).collect();
    let pair: Vec<Order> =
        (0..net.pair_count()).map(|i| net.pair_paths(i).map(|p| path[p]).fold(pair_init, pair_fold)).collect();
    let network = pairs.iter().map(|&i| pair[i]).fold(path_init, path_fold);
    let slow_edges: Vec<usize> = (0..edge.len())
        .filter(|&e| if light { edge[e] < network } else { edge[e] > network })
        .collect();
    // max ∅ = −∞ (light), min ∅ = +∞ (heavy)
    let gap = slow_edges.iter().map(|&e| edge[e]).fold(pair_init, pair_fold);
    LimitOrders { edge, path, pair, network, slow_edges, gap }
}

/// Orders for polynomial and BPR networks over all pairs.
pub fn poly_orders(net: &Network) -> Result<PolyOrders, AsymptoticsError> {
    let all: Vec<usize> = (0..net.pair_count()).collect();
    orders_over(net, &all)
}

fn orders_over(net: &Network, pairs: &[usize]) -> Result<PolyOrders, AsymptoticsError> {
    let (q, d) = edge_orders(net)?;
    Ok(PolyOrders {
        light: aggregate(net, q, TrafficLimit::Light, pairs),
        heavy: aggregate(net, d, TrafficLimit::Heavy, pairs),
    })
}

/// Exponent from the orders: `a = q/q̃ − 1` (light), `a = 1 − d/d̃` (heavy).
pub fn rate_exponent(net: &Network, limit: TrafficLimit) -> Result<RateEstimate, AsymptoticsError> {
    let orders = poly_orders(net)?;
    exponent_of(orders.at(limit), limit)
}

fn exponent_of(o: &LimitOrders, limit: TrafficLimit) -> Result<RateEstimate, AsymptoticsError> {
    let estimate = |a: ExtReal, note: Option<&str>| RateEstimate {
        exponent: a,
        constant: None,
        provenance: Provenance::TheoremExponent,
        note: note.map(String::from),
    };
    let no_slow = "no slow edges: K_a = 0 and the linear term governs";
    match limit {
        TrafficLimit::Light => {
            let Order::Finite(q) = o.network else {
                return Err(AsymptoticsError::Hypothesis("every OD pair has a path of zero cost".into()));
            };
            match o.gap {
                Order::Finite(qt) if qt > 0.0 => Ok(estimate(ExtReal::Finite(q / qt - 1.0), None)),
                Order::Finite(_) => Ok(estimate(
                    ExtReal::Infinite,
                    Some("slow edges have constant terms and carry no optimal flow for small M; the linear term governs"),
                )),
                _ => Ok(estimate(ExtReal::Finite(1.0), Some(no_slow))),
            }
        }
        TrafficLimit::Heavy => {
            let d = o.network.finite().unwrap_or(0.0);
            match o.gap {
                Order::Finite(dt) => Ok(estimate(ExtReal::Finite(1.0 - d / dt), None)),
                _ => Ok(estimate(ExtReal::Finite(1.0), Some(no_slow))),
            }
        }
    }
}

/// Two-link Pigou network with costs `x^{d1}` and `x^{d2}`, unit coefficients.
pub fn pigou_asymptotics(d1: f64, d2: f64, limit: TrafficLimit) -> Result<RateEstimate, AsymptoticsError> {
    if !(d1 > 0.0 && d1 <= d2 && d2.is_finite()) {
        return Err(AsymptoticsError::InvalidInput(format!("need 0 < d1 <= d2 < inf, got d1 = {d1}, d2 = {d2}")));
    }
    let (a, b) = match limit {
        TrafficLimit::Light => (d2 / d1 - 1.0, d1 * ((1.0 + d2) / (1.0 + d1)).powf(1.0 + 1.0 / d1) - d2),
        TrafficLimit::Heavy => (1.0 - d1 / d2, d2 * ((1.0 + d1) / (1.0 + d2)).powf(1.0 + 1.0 / d2) - d1),
    };
    let b = if d1 == d2 { 0.0 } else { b };
    Ok(RateEstimate { exponent: ExtReal::Finite(a), constant: Some(b), provenance: Provenance::PigouClosedForm, note: None })
}

/// Explicit constants of the polynomial rate bound and its validity range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateBound {
    pub limit: TrafficLimit,
    /// `q` or `d` over the pairs with positive inflow.
    pub order: f64,
    pub gap_order: Order,
    pub slow_edges: Vec<usize>,
    pub tight_pairs: Vec<usize>,
    pub g: f64,
    pub b: f64,
    /// `c₀` (heavy) or `c*₀` (light); absent without slow edges.
    pub c0: Option<f64>,
    pub d: f64,
    pub h: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub h_bar: f64,
    pub k1: f64,
    pub ka: f64,
    pub exponent: ExtReal,
    /// `M₀`: the bound holds for `M ≥ M₀` (heavy) or `M ≤ M₀` (light).
    pub threshold: ExtReal,
}

impl RateBound {
    pub fn is_valid_at(&self, m: f64) -> bool {
        match (self.limit, self.threshold) {
            (_, ExtReal::Undefined) => false,
            (TrafficLimit::Heavy, ExtReal::Finite(m0)) => m >= m0,
            (TrafficLimit::Heavy, ExtReal::Infinite) => false,
            (TrafficLimit::Light, ExtReal::Finite(m0)) => m > 0.0 && m <= m0,
            (TrafficLimit::Light, ExtReal::Infinite) => m > 0.0,
        }
    }

    /// `1 + K₁/M + K_a/M^a` (heavy) or `1 + K₁M + K_a M^a` (light).
    pub fn bound_value(&self, m: f64) -> f64 {
        let slow_term = match self.exponent {
            _ if self.ka == 0.0 => 0.0,
            ExtReal::Finite(a) => match self.limit {
                TrafficLimit::Heavy => self.ka / m.powf(a),
                TrafficLimit::Light => self.ka * m.powf(a),
            },
            _ => 0.0,
        };
        let linear = match self.limit {
            TrafficLimit::Heavy => self.k1 / m,
            TrafficLimit::Light => self.k1 * m,
        };
        1.0 + linear + slow_term
    }
}

pub fn rate_bound_constants(net: &Network, rates: &[f64], limit: TrafficLimit) -> Result<RateBound, AsymptoticsError> {
    check_rates(rates, net.pair_count())?;
    let polys = (0..net.edge_count()).map(|e| integer_polynomial(net, e)).collect::<Result<Vec<_>, _>>()?;
    let active: Vec<usize> = (0..net.pair_count()).filter(|&i| rates[i] > 0.0).collect();
    let orders = orders_over(net, &active)?;
    let o = orders.at(limit);
    let Order::Finite(order) = o.network else {
        return Err(AsymptoticsError::Hypothesis("every OD pair with positive inflow has a path of zero cost".into()));
    };
    let tight_pairs: Vec<usize> = active.iter().copied().filter(|&i| o.pair[i] == o.network).collect();
    if tight_pairs.is_empty() {
        return Err(AsymptoticsError::Hypothesis("no tight OD pair carries positive inflow".into()));
    }
    let slow = |e: usize| o.slow_edges.binary_search(&e).is_ok();
    let nonzero: Vec<usize> = (0..polys.len()).filter(|&e| !polys[e].is_zero()).collect();
    if nonzero.is_empty() {
        return Err(AsymptoticsError::Hypothesis("all edge costs vanish".into()));
    }
    let lo = |p: &Polynomial| p.terms()[0];
    let hi = |p: &Polynomial| *p.terms().last().expect("nonzero polynomial");
    let ord = order as u32;

    let (g, b, c0, h) = match limit {
        TrafficLimit::Heavy => {
            let g: f64 = polys
                .iter()
                .flat_map(|p| p.terms().iter().filter(|t| t.0 < ord))
                .map(|&(k, c)| (order - k as f64) / (k as f64 + 1.0) * c)
                .fold(0.0, |acc, v| acc + v);
            let b: f64 = (0..polys.len()).filter(|&e| !slow(e)).flat_map(|e| polys[e].terms()).map(|t| t.1).sum();
            let c0 = o.slow_edges.iter().map(|&e| hi(&polys[e]).1).fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
            let h = nonzero.iter().map(|&e| hi(&polys[e]).1).fold(f64::INFINITY, f64::min);
            (g, b, c0, h)
        }
        TrafficLimit::Light => {
            let g: f64 = polys
                .iter()
                .flat_map(|p| p.terms().iter().filter(|t| t.0 > ord))
                .map(|&(k, c)| (k as f64 - order) / (k as f64 + 1.0) * c)
                .fold(0.0, |acc, v| acc + v);
            let b: f64 = (0..polys.len())
                .filter(|&e| !slow(e))
                .flat_map(|e| polys[e].terms())
                .map(|&(k, c)| (k as f64 + 1.0) * c)
                .sum();
            let c0 = o
                .slow_edges
                .iter()
                .map(|&e| {
                    let (k, c) = lo(&polys[e]);
                    (k as f64 + 1.0) * c
                })
                .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
            let h = nonzero.iter().map(|&e| lo(&polys[e]).1).fold(f64::INFINITY, f64::min);
            (g, b, c0, h)
        }
    };

    let kappa = 1.0 / (tight_pairs.len() as f64 * net.path_count() as f64);
    let epsilon: f64 = tight_pairs.iter().map(|&i| rates[i]).sum();
    let h_bar = h * (kappa * epsilon).powf(order + 1.0);
    let n_slow = o.slow_edges.len() as f64;
    let exponent = exponent_of(o, limit)?.exponent;

    let (d, threshold) = match limit {
        TrafficLimit::Heavy => {
            let mut m0 = 1.0f64.max(1.0 / (kappa * epsilon));
            let d = match (c0, o.gap) {
                (Some(c0), Order::Finite(dt)) => {
                    // B·M^d/c₀ ≥ 1
                    if order > 0.0 {
                        m0 = m0.max((c0 / b).powf(1.0 / order));
                    } else if b < c0 {
                        m0 = f64::INFINITY;
                    }
                    b * (b / c0).powf(1.0 / dt) * n_slow
                }
                _ => 0.0,
            };
            (d, if m0.is_finite() { ExtReal::Finite(m0) } else { ExtReal::Infinite })
        }
        TrafficLimit::Light => {
            let mut m0 = 1.0f64.min(1.0 / (kappa * epsilon));
            let d = match (c0, o.gap) {
                (Some(c0), Order::Finite(qt)) => {
                    // B·M^q/c*₀ ≤ 1; order > q̃ ≥ 0 here
                    let cap = (c0 / b).powf(1.0 / order);
                    if qt > 0.0 {
                        m0 = m0.min(cap);
                        b * (b / c0).powf(1.0 / qt) * n_slow
                    } else {
                        // slow edges are unused at the optimum strictly below the cap
                        m0 = m0.min(cap * (1.0 - 1e-12));
                        0.0
                    }
                }
                _ => 0.0,
            };
            (d, ExtReal::Finite(m0))
        }
    };

    Ok(RateBound {
        limit,
        order,
        gap_order: o.gap,
        slow_edges: o.slow_edges.clone(),
        tight_pairs,
        g,
        b,
        c0,
        d,
        h,
        kappa,
        epsilon,
        h_bar,
        k1: g / h_bar,
        ka: d / h_bar,
        exponent,
        threshold,
    })
}
