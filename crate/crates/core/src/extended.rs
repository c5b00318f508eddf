//! Nonnegative extended reals.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A value in `[0, ∞]`. Infinity is a tag, never a floating-point overflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtendedReal {
    Finite(f64),
    Infinite,
}

impl ExtendedReal {
    pub fn value(self) -> Option<f64> {
        match self {
            ExtendedReal::Finite(v) => Some(v),
            ExtendedReal::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtendedReal::Finite(_))
    }

    /// Multiplication by a finite positive factor.
    pub fn scaled(self, factor: f64) -> Self {
        match self {
            ExtendedReal::Finite(v) => ExtendedReal::Finite(v * factor),
            ExtendedReal::Infinite => ExtendedReal::Infinite,
        }
    }
}

impl fmt::Display for ExtendedReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtendedReal::Finite(v) => write!(f, "{v}"),
            ExtendedReal::Infinite => f.write_str("infinity"),
        }
    }
}

impl Serialize for ExtendedReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtendedReal::Finite(v) => s.serialize_f64(*v),
            ExtendedReal::Infinite => s.serialize_str("infinity"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtendedReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Tag(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(ExtendedReal::Finite(v)),
            Repr::Tag(t) if t == "infinity" => Ok(ExtendedReal::Infinite),
            Repr::Tag(t) => Err(serde::de::Error::custom(format!("unknown extended real `{t}`"))),
        }
    }
}
