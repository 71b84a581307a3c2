//! Edge cost functions.
//!
//! Every variant exposes the value `c(x)`, the derivative `c'(x)`, the
//! marginal cost `c(x) + x c'(x)` and the primitive `C(x) = ∫₀ˣ c(w) dw`.
//! Structured variants use closed forms; [`GenericCost`] falls back to
//! finite differences and adaptive quadrature unless a primitive is supplied.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::expr::Expr;
use super::RoutingError;

/// Shared scalar evaluator for generic costs.
pub type Evaluator = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Trigonometric factor of an oscillating monomial `x^d (1 + ½ s(log x))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Sine,
    Cosine,
    /// Plain monomial `x^d`.
    None,
}

/// Declared power-law behaviour `c(x) ~ leading · x^degree` at one traffic limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerHint {
    pub degree: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leading: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IndexHints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub light: Option<PowerHint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heavy: Option<PowerHint>,
}

/// Sparse polynomial with nonnegative coefficients, stored as sorted
/// `(degree, coefficient)` pairs with zero coefficients removed.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: Vec<(u32, f64)>,
}

impl Polynomial {
    pub fn new(terms: &[(u32, f64)]) -> Result<Self, RoutingError> {
        let mut merged: Vec<(u32, f64)> = Vec::with_capacity(terms.len());
        let mut sorted = terms.to_vec();
        sorted.sort_by_key(|t| t.0);
        for (k, c) in sorted {
            if !c.is_finite() || c < 0.0 {
                return Err(RoutingError::InvalidCost(format!(
                    "polynomial coefficient of degree {k} must be finite and nonnegative, got {c}"
                )));
            }
            match merged.last_mut() {
                Some(last) if last.0 == k => last.1 += c,
                _ => merged.push((k, c)),
            }
        }
        merged.retain(|t| t.1 > 0.0);
        Ok(Polynomial { terms: merged })
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, degree: u32) -> f64 {
        self.terms.iter().find(|t| t.0 == degree).map_or(0.0, |t| t.1)
    }

    fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(k, c)| c * x.powi(k as i32)).sum()
    }

    fn derivative(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.0 > 0)
            .map(|&(k, c)| k as f64 * c * x.powi(k as i32 - 1))
            .sum()
    }

    fn marginal(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(k, c)| (k + 1) as f64 * c * x.powi(k as i32)).sum()
    }

    fn primitive(&self, x: f64) -> f64 {
        self.terms.iter().map(|&(k, c)| c * x.powi(k as i32 + 1) / (k + 1) as f64).sum()
    }
}

/// A cost given by an arbitrary evaluator.
///
/// `expr` is the textual form used for serialization; builtin scenarios pair
/// it with a native closure computing the same function.
#[derive(Clone)]
pub struct GenericCost {
    expr: String,
    eval: Evaluator,
    primitive_expr: Option<String>,
    primitive: Option<Evaluator>,
    hints: IndexHints,
}

impl GenericCost {
    /// Parse `expr` (and optionally its primitive) into an evaluator.
    pub fn from_expr(
        expr: &str,
        primitive: Option<&str>,
        hints: IndexHints,
    ) -> Result<Self, RoutingError> {
        let parsed = Expr::parse(expr)?;
        let eval: Evaluator = Arc::new(move |x| parsed.eval(x));
        let (primitive_expr, primitive) = match primitive {
            Some(p) => {
                let parsed = Expr::parse(p)?;
                let f: Evaluator = Arc::new(move |x| parsed.eval(x));
                (Some(p.to_string()), Some(f))
            }
            None => (None, None),
        };
        Ok(GenericCost { expr: expr.to_string(), eval, primitive_expr, primitive, hints })
    }

    /// Wrap native closures. `expr` must describe the same function so that
    /// the cost survives a serialization round trip.
    pub fn native(
        expr: &str,
        eval: Evaluator,
        primitive: Option<(&str, Evaluator)>,
        hints: IndexHints,
    ) -> Self {
        let (primitive_expr, primitive) = match primitive {
            Some((s, f)) => (Some(s.to_string()), Some(f)),
            None => (None, None),
        };
        GenericCost { expr: expr.to_string(), eval, primitive_expr, primitive, hints }
    }

    pub fn expr(&self) -> &str {
        &self.expr
    }

    pub fn primitive_expr(&self) -> Option<&str> {
        self.primitive_expr.as_deref()
    }

    pub fn hints(&self) -> &IndexHints {
        &self.hints
    }

    pub fn has_primitive(&self) -> bool {
        self.primitive.is_some()
    }

    fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    fn derivative(&self, x: f64) -> f64 {
        let h = (1e-6 * x).max(1e-6);
        if x >= h {
            (self.eval(x + h) - self.eval(x - h)) / (2.0 * h)
        } else {
            (self.eval(x + h) - self.eval(x)) / h
        }
    }

    fn primitive(&self, x: f64) -> Result<f64, RoutingError> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if let Some(p) = &self.primitive {
            return Ok(p(x) - p(0.0));
        }
        // for nondecreasing c, x c(0) ≤ C(x) ≤ x c(x)
        let scale = (x * self.eval(x).abs()).max(x * self.eval(0.0).abs()).max(f64::MIN_POSITIVE);
        let target = 1e-12 * scale;
        let out = quadrature::double_exponential::integrate(|w| self.eval(w), 0.0, x, target);
        if !out.integral.is_finite() || out.error_estimate > 1e3 * target {
            return Err(RoutingError::Quadrature {
                expr: self.expr.clone(),
                x,
                error_estimate: out.error_estimate,
            });
        }
        Ok(out.integral)
    }
}

impl PartialEq for GenericCost {
    fn eq(&self, other: &Self) -> bool {
        self.expr == other.expr
            && self.primitive_expr == other.primitive_expr
            && self.hints == other.hints
    }
}

impl fmt::Debug for GenericCost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GenericCost")
            .field("expr", &self.expr)
            .field("primitive_expr", &self.primitive_expr)
            .field("hints", &self.hints)
            .finish()
    }
}

/// Nondecreasing, nonnegative edge cost.
#[derive(Debug, Clone, PartialEq)]
pub enum CostFunction {
    Polynomial(Polynomial),
    /// `free_flow + multiplier · (x / capacity)^power`.
    Bpr { free_flow: f64, multiplier: f64, capacity: f64, power: f64 },
    /// `x^degree · (1 + ½ s(log x))` with `s` chosen by `phase`; `c(0) = 0`.
    OscillatingMonomial { degree: u32, phase: Phase },
    Generic(GenericCost),
}

impl CostFunction {
    pub fn polynomial(terms: &[(u32, f64)]) -> Result<Self, RoutingError> {
        Ok(CostFunction::Polynomial(Polynomial::new(terms)?))
    }

    /// `coefficient · x^degree`.
    pub fn monomial(degree: u32, coefficient: f64) -> Result<Self, RoutingError> {
        Self::polynomial(&[(degree, coefficient)])
    }

    pub fn constant(value: f64) -> Result<Self, RoutingError> {
        Self::polynomial(&[(0, value)])
    }

    /// `intercept + slope · x`.
    pub fn affine(intercept: f64, slope: f64) -> Result<Self, RoutingError> {
        Self::polynomial(&[(0, intercept), (1, slope)])
    }

    pub fn zero() -> Self {
        CostFunction::Polynomial(Polynomial::default())
    }

    pub fn bpr(free_flow: f64, multiplier: f64, capacity: f64, power: f64) -> Result<Self, RoutingError> {
        let c = CostFunction::Bpr { free_flow, multiplier, capacity, power };
        c.validate()?;
        Ok(c)
    }

    pub fn oscillating(degree: u32, phase: Phase) -> Result<Self, RoutingError> {
        let c = CostFunction::OscillatingMonomial { degree, phase };
        c.validate()?;
        Ok(c)
    }

    pub fn generic(cost: GenericCost) -> Result<Self, RoutingError> {
        let c = CostFunction::Generic(cost);
        c.validate()?;
        Ok(c)
    }

    /// Check parameter ranges, and for generic costs sample nonnegativity and
    /// monotonicity on a logarithmic grid.
    pub fn validate(&self) -> Result<(), RoutingError> {
        match self {
            CostFunction::Polynomial(p) => {
                if p.terms.iter().any(|t| !t.1.is_finite() || t.1 < 0.0) {
                    return Err(RoutingError::InvalidCost("negative polynomial coefficient".into()));
                }
            }
            CostFunction::Bpr { free_flow, multiplier, capacity, power } => {
                let ok = free_flow.is_finite()
                    && *free_flow >= 0.0
                    && multiplier.is_finite()
                    && *multiplier >= 0.0
                    && capacity.is_finite()
                    && *capacity > 0.0
                    && power.is_finite()
                    && *power >= 0.0;
                if !ok {
                    return Err(RoutingError::InvalidCost(format!(
                        "BPR parameters out of range: a={free_flow}, b={multiplier}, capacity={capacity}, power={power}"
                    )));
                }
            }
            CostFunction::OscillatingMonomial { degree, .. } => {
                if *degree == 0 {
                    return Err(RoutingError::InvalidCost(
                        "oscillating monomial needs a positive degree".into(),
                    ));
                }
            }
            CostFunction::Generic(g) => {
                let mut prev = g.eval(0.0);
                if prev.is_nan() || prev < 0.0 {
                    return Err(RoutingError::InvalidCost(format!(
                        "generic cost '{}' is negative or undefined at 0",
                        g.expr
                    )));
                }
                for k in -60..=30 {
                    let x = 10f64.powf(k as f64 / 10.0);
                    let v = g.eval(x);
                    if v.is_nan() || v < 0.0 || v < prev - 1e-12 * prev.abs() {
                        return Err(RoutingError::InvalidCost(format!(
                            "generic cost '{}' is not nonnegative and nondecreasing near x={x:e}",
                            g.expr
                        )));
                    }
                    prev = v;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            CostFunction::Polynomial(p) => p.eval(x),
            CostFunction::Bpr { free_flow, multiplier, capacity, power } => {
                free_flow + multiplier * (x / capacity).powf(*power)
            }
            CostFunction::OscillatingMonomial { degree, phase } => {
                if x <= 0.0 {
                    return 0.0;
                }
                x.powi(*degree as i32) * (1.0 + 0.5 * phase_factor(*phase, x.ln()))
            }
            CostFunction::Generic(g) => g.eval(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            CostFunction::Polynomial(p) => p.derivative(x),
            CostFunction::Bpr { multiplier, capacity, power, .. } => {
                if *power == 0.0 {
                    0.0
                } else {
                    multiplier * power * (x / capacity).powf(power - 1.0) / capacity
                }
            }
            CostFunction::OscillatingMonomial { degree, phase } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let d = *degree as f64;
                let t = x.ln();
                x.powi(*degree as i32 - 1)
                    * (d * (1.0 + 0.5 * phase_factor(*phase, t)) + 0.5 * phase_factor_deriv(*phase, t))
            }
            CostFunction::Generic(g) => g.derivative(x),
        }
    }

    /// `c(x) + x c'(x)`, the derivative of `x c(x)`.
    pub fn marginal(&self, x: f64) -> f64 {
        match self {
            CostFunction::Polynomial(p) => p.marginal(x),
            CostFunction::Bpr { free_flow, multiplier, capacity, power } => {
                free_flow + (power + 1.0) * multiplier * (x / capacity).powf(*power)
            }
            CostFunction::OscillatingMonomial { degree, phase } => {
                if x <= 0.0 {
                    return 0.0;
                }
                let d1 = (*degree + 1) as f64;
                let t = x.ln();
                x.powi(*degree as i32)
                    * (d1 * (1.0 + 0.5 * phase_factor(*phase, t)) + 0.5 * phase_factor_deriv(*phase, t))
            }
            CostFunction::Generic(g) => {
                if x <= 0.0 {
                    g.eval(0.0)
                } else {
                    g.eval(x) + x * g.derivative(x)
                }
            }
        }
    }

    /// `∫₀ˣ c(w) dw`.
    pub fn primitive(&self, x: f64) -> Result<f64, RoutingError> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        Ok(match self {
            CostFunction::Polynomial(p) => p.primitive(x),
            CostFunction::Bpr { free_flow, multiplier, capacity, power } => {
                free_flow * x + multiplier * capacity * (x / capacity).powf(power + 1.0) / (power + 1.0)
            }
            CostFunction::OscillatingMonomial { degree, phase } => {
                // substitute x = e^t: ∫ e^{(d+1)t} sin t dt = e^{(d+1)t}((d+1) sin t − cos t)/((d+1)² + 1)
                let d1 = (*degree + 1) as f64;
                let t = x.ln();
                let xd1 = x.powi(*degree as i32 + 1);
                let osc = match phase {
                    Phase::Sine => (d1 * t.sin() - t.cos()) / (d1 * d1 + 1.0),
                    Phase::Cosine => (d1 * t.cos() + t.sin()) / (d1 * d1 + 1.0),
                    Phase::None => 0.0,
                };
                xd1 / d1 + 0.5 * xd1 * osc
            }
            CostFunction::Generic(g) => g.primitive(x)?,
        })
    }

    /// `x c(x)`, the edge's contribution to the social cost.
    pub fn total(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            x * self.eval(x)
        }
    }

    /// True when `c ≡ 0`.
    pub fn is_identically_zero(&self) -> bool {
        match self {
            CostFunction::Polynomial(p) => p.is_zero(),
            CostFunction::Bpr { free_flow, multiplier, .. } => *free_flow == 0.0 && *multiplier == 0.0,
            _ => false,
        }
    }
}

fn phase_factor(phase: Phase, t: f64) -> f64 {
    match phase {
        Phase::Sine => t.sin(),
        Phase::Cosine => t.cos(),
        Phase::None => 0.0,
    }
}

fn phase_factor_deriv(phase: Phase, t: f64) -> f64 {
    match phase {
        Phase::Sine => t.cos(),
        Phase::Cosine => -t.sin(),
        Phase::None => 0.0,
    }
}
