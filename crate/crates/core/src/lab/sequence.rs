use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::LabError;
use crate::routing::Demand;

/// `intercept + slope·n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub intercept: f64,
    pub slope: f64,
}

impl Affine {
    pub fn at(&self, n: f64) -> f64 {
        self.intercept + self.slope * n
    }
}

/// Inflow `m_n^i` of one OD pair as a function of the sequence index.
#[derive(Clone, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum InflowRule {
    Constant { value: f64 },
    /// `coefficient · n^exponent`.
    Power { coefficient: f64, exponent: f64 },
    /// Separate affine laws for odd and even `n`.
    Alternating { odd: Affine, even: Affine },
    #[serde(skip)]
    Custom(Arc<dyn Fn(u64) -> f64 + Send + Sync>),
}

impl InflowRule {
    pub fn at(&self, n: u64) -> f64 {
        let x = n as f64;
        match self {
            InflowRule::Constant { value } => *value,
            InflowRule::Power { coefficient, exponent } => coefficient * x.powf(*exponent),
            InflowRule::Alternating { odd, even } => {
                if n % 2 == 1 {
                    odd.at(x)
                } else {
                    even.at(x)
                }
            }
            InflowRule::Custom(f) => f(n),
        }
    }
}

impl fmt::Debug for InflowRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InflowRule::Constant { value } => write!(f, "Constant({value})"),
            InflowRule::Power { coefficient, exponent } => write!(f, "Power({coefficient}·n^{exponent})"),
            InflowRule::Alternating { odd, even } => write!(f, "Alternating(odd: {odd:?}, even: {even:?})"),
            InflowRule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Per-pair inflow rules `n ↦ m_n^i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DemandSequence {
    pub rules: Vec<InflowRule>,
}

impl DemandSequence {
    pub fn new(rules: Vec<InflowRule>) -> Self {
        DemandSequence { rules }
    }

    pub fn inflows(&self, n: u64) -> Result<Vec<f64>, LabError> {
        let m: Vec<f64> = self.rules.iter().map(|r| r.at(n)).collect();
        if let Some(i) = m.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(LabError::InvalidInput(format!("inflow of OD pair {i} at n = {n} is {}", m[i])));
        }
        if m.iter().sum::<f64>() <= 0.0 {
            return Err(LabError::InvalidInput(format!("total inflow vanishes at n = {n}")));
        }
        Ok(m)
    }

    pub fn demand(&self, n: u64) -> Result<Demand, LabError> {
        Ok(Demand::new(self.inflows(n)?)?)
    }

    /// `λ_n^i = m_n^i / M_n`.
    pub fn rates(&self, n: u64) -> Result<Vec<f64>, LabError> {
        let m = self.inflows(n)?;
        let total: f64 = m.iter().sum();
        Ok(m.into_iter().map(|v| v / total).collect())
    }
}

pub const DEFAULT_SALIENCE_THRESHOLD: f64 = 1e-6;
/// Tail windows longer than this are sampled instead of enumerated.
const MAX_TAIL_EVALUATIONS: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SalienceReport {
    pub subset: Vec<usize>,
    pub horizon: u64,
    /// `min_{N/2 ≤ n ≤ N} Σ_{i∈subset} λ_n^i`.
    pub tail_min: f64,
    pub threshold: f64,
    pub salient: bool,
    /// Number of indices evaluated in the tail window.
    pub evaluated: u64,
    pub note: String,
}

/// Finite-horizon stand-in for `liminf_n Σ_{i∈subset} λ_n^i > 0`.
///
/// Windows longer than about a million indices are sampled at evenly spaced
/// consecutive pairs `(n, n+1)`, so both parities are always represented.
pub fn salience_check(
    seq: &DemandSequence,
    subset: &[usize],
    horizon: u64,
    threshold: f64,
) -> Result<SalienceReport, LabError> {
    if horizon < 10 {
        return Err(LabError::InvalidInput(format!("horizon {horizon} is below 10")));
    }
    if let Some(&i) = subset.iter().find(|&&i| i >= seq.rules.len()) {
        return Err(LabError::InvalidInput(format!("OD pair {i} is not in the sequence")));
    }
    let lo = horizon / 2;
    let len = horizon - lo + 1;
    let indices: Vec<u64> = if len <= MAX_TAIL_EVALUATIONS {
        (lo..=horizon).collect()
    } else {
        let pairs = MAX_TAIL_EVALUATIONS / 2;
        let step = (len - 1) as f64 / (pairs - 1) as f64;
        (0..pairs)
            .flat_map(|k| {
                let n = (lo + (k as f64 * step) as u64).min(horizon - 1);
                [n, n + 1]
            })
            .collect()
    };
    let mut tail_min = f64::INFINITY;
    for &n in &indices {
        let rates = seq.rates(n)?;
        tail_min = tail_min.min(subset.iter().map(|&i| rates[i]).sum::<f64>());
    }
    let sampled = len > MAX_TAIL_EVALUATIONS;
    Ok(SalienceReport {
        subset: subset.to_vec(),
        horizon,
        tail_min,
        threshold,
        salient: tail_min > threshold,
        evaluated: indices.len() as u64,
        note: format!(
            "finite-horizon approximation of the liminf over n in [{lo}, {horizon}]{}",
            if sampled { ", sampled" } else { "" }
        ),
    })
}
