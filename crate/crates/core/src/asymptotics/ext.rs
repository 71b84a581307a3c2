use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Nonnegative extended real: a finite value, `+∞`, or undetermined.
///
/// Aggregation uses explicit case analysis instead of IEEE infinities;
/// `Undefined` absorbs in [`ExtReal::max`] and [`ExtReal::min`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
    Undefined,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_zero(self) -> bool {
        self == ExtReal::ZERO
    }

    pub fn is_infinite(self) -> bool {
        self == ExtReal::Infinite
    }

    /// Finite and strictly positive.
    pub fn is_positive_finite(self) -> bool {
        matches!(self, ExtReal::Finite(v) if v > 0.0)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// IEEE view, with `Undefined` as NaN. For display and plotting only.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
            ExtReal::Undefined => f64::NAN,
        }
    }

    pub fn from_f64(v: f64) -> Self {
        if v.is_nan() {
            ExtReal::Undefined
        } else if v == f64::INFINITY {
            ExtReal::Infinite
        } else {
            ExtReal::Finite(v)
        }
    }

    fn cmp_defined(self, other: Self) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Undefined, _) | (_, ExtReal::Undefined) => None,
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, _) => Some(Ordering::Greater),
            (_, ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(&b),
        }
    }

    pub fn max(self, other: Self) -> Self {
        match self.cmp_defined(other) {
            None => ExtReal::Undefined,
            Some(Ordering::Less) => other,
            Some(_) => self,
        }
    }

    pub fn min(self, other: Self) -> Self {
        match self.cmp_defined(other) {
            None => ExtReal::Undefined,
            Some(Ordering::Greater) => other,
            Some(_) => self,
        }
    }

    /// `1/x` with `1/0 = ∞` and `1/∞ = 0`.
    pub fn recip(self) -> Self {
        match self {
            ExtReal::Finite(v) if v == 0.0 => ExtReal::Infinite,
            ExtReal::Finite(v) => ExtReal::Finite(1.0 / v),
            ExtReal::Infinite => ExtReal::ZERO,
            ExtReal::Undefined => ExtReal::Undefined,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.cmp_defined(*other)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::Infinite => f.write_str("inf"),
            ExtReal::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::Infinite => s.serialize_str("inf"),
            ExtReal::Undefined => s.serialize_str("undefined"),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrTag {
    Num(f64),
    Tag(String),
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumOrTag::deserialize(d)? {
            NumOrTag::Num(v) => Ok(ExtReal::Finite(v)),
            NumOrTag::Tag(t) if t == "inf" => Ok(ExtReal::Infinite),
            NumOrTag::Tag(t) if t == "undefined" => Ok(ExtReal::Undefined),
            NumOrTag::Tag(t) => Err(serde::de::Error::custom(format!("expected number, \"inf\" or \"undefined\", got \"{t}\""))),
        }
    }
}

/// Polynomial order on the full extended line, used for `q̃ = −∞` and
/// `q_e = +∞` conventions.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Order {
    NegInf,
    Finite(f64),
    PosInf,
}

impl Order {
    pub fn finite(self) -> Option<f64> {
        match self {
            Order::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::NegInf => f.write_str("-inf"),
            Order::Finite(v) => write!(f, "{v}"),
            Order::PosInf => f.write_str("inf"),
        }
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Order::NegInf => s.serialize_str("-inf"),
            Order::Finite(v) => s.serialize_f64(*v),
            Order::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match NumOrTag::deserialize(d)? {
            NumOrTag::Num(v) => Ok(Order::Finite(v)),
            NumOrTag::Tag(t) if t == "inf" => Ok(Order::PosInf),
            NumOrTag::Tag(t) if t == "-inf" => Ok(Order::NegInf),
            NumOrTag::Tag(t) => Err(serde::de::Error::custom(format!("expected number, \"inf\" or \"-inf\", got \"{t}\""))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_and_absorption() {
        let one = ExtReal::Finite(1.0);
        assert_eq!(one.max(ExtReal::Infinite), ExtReal::Infinite);
        assert_eq!(one.min(ExtReal::Infinite), one);
        assert_eq!(ExtReal::ZERO.min(one), ExtReal::ZERO);
        assert_eq!(one.max(ExtReal::Undefined), ExtReal::Undefined);
        assert_eq!(ExtReal::Infinite.recip(), ExtReal::ZERO);
        assert_eq!(ExtReal::ZERO.recip(), ExtReal::Infinite);
        assert!(Order::NegInf < Order::Finite(-1e300));
        assert_eq!(Order::PosInf.min(Order::Finite(3.0)), Order::Finite(3.0));
    }

    #[test]
    fn json_forms() {
        let v = vec![ExtReal::Finite(0.5), ExtReal::Infinite, ExtReal::Undefined];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[0.5,"inf","undefined"]"#);
        assert_eq!(serde_json::from_str::<Vec<ExtReal>>(&s).unwrap(), v);
        let o = vec![Order::NegInf, Order::Finite(2.0), Order::PosInf];
        let s = serde_json::to_string(&o).unwrap();
        assert_eq!(s, r#"["-inf",2.0,"inf"]"#);
        assert_eq!(serde_json::from_str::<Vec<Order>>(&s).unwrap(), o);
    }
}
