//! Unit-tagged physical quantities for run configurations.
//!
//! A quantity is written as a string, `"2.1 um"` or `"32.2mW"`; bare numbers
//! are rejected. The original unit is kept so serialization reproduces it.

use std::fmt;
use std::marker::PhantomData;
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantityError {
    #[error("'{0}' has no unit; write e.g. \"{0} {1}\"")]
    Unitless(String, &'static str),
    #[error("'{0}' is not a number followed by a unit")]
    Malformed(String),
    #[error("unit '{unit}' is not a {dimension} unit (expected one of {allowed})")]
    WrongUnit { unit: String, dimension: &'static str, allowed: String },
    #[error("{0} must be finite")]
    NotFinite(String),
}

/// A physical dimension: its accepted units and their scale to the base unit.
pub trait Dimension: Copy + fmt::Debug + PartialEq + 'static {
    const NAME: &'static str;
    /// (unit, factor to the base unit); the first entry is the base unit.
    const UNITS: &'static [(&'static str, f64)];
}

macro_rules! dimension {
    ($(#[$m:meta])* $name:ident, $label:literal, [$(($u:literal, $f:expr)),+ $(,)?]) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name;
        impl Dimension for $name {
            const NAME: &'static str = $label;
            const UNITS: &'static [(&'static str, f64)] = &[$(($u, $f)),+];
        }
    };
}

dimension!(
    /// Base unit μm.
    Length, "length", [("um", 1.0), ("nm", 1e-3), ("mm", 1e3), ("cm", 1e4), ("m", 1e6)]
);
dimension!(
    /// Base unit s.
    Time, "time", [("s", 1.0), ("ns", 1e-9), ("ps", 1e-12), ("fs", 1e-15)]
);
dimension!(
    /// Base unit W.
    Power, "power", [("W", 1.0), ("mW", 1e-3), ("uW", 1e-6)]
);
dimension!(
    /// Base unit Hz.
    Frequency, "frequency", [("Hz", 1.0), ("kHz", 1e3), ("MHz", 1e6), ("GHz", 1e9), ("THz", 1e12)]
);
dimension!(
    /// Base unit dB/cm.
    Attenuation, "attenuation", [("dBcm", 1.0), ("dB/cm", 1.0), ("dBm", 1e-2), ("dB/m", 1e-2)]
);
dimension!(
    /// Base unit m²/W.
    NonlinearIndex, "nonlinear index", [("m2/W", 1.0), ("cm2/W", 1e-4)]
);

/// A value with its unit, e.g. 2.1 μm stored as (2.1, "um").
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity<D: Dimension> {
    value: f64,
    unit: &'static str,
    _d: PhantomData<D>,
}

impl<D: Dimension> Quantity<D> {
    pub fn new(value: f64, unit: &str) -> Result<Self, QuantityError> {
        let &(u, _) = D::UNITS.iter().find(|(u, _)| *u == unit).ok_or_else(|| QuantityError::WrongUnit {
            unit: unit.into(),
            dimension: D::NAME,
            allowed: D::UNITS.iter().map(|(u, _)| *u).collect::<Vec<_>>().join(", "),
        })?;
        if !value.is_finite() {
            return Err(QuantityError::NotFinite(format!("{value} {unit}")));
        }
        Ok(Self { value, unit: u, _d: PhantomData })
    }

    /// Quantity in the base unit.
    pub fn base(value: f64) -> Self {
        Self { value, unit: D::UNITS[0].0, _d: PhantomData }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn unit(&self) -> &'static str {
        self.unit
    }

    /// Magnitude in the base unit of the dimension.
    pub fn si(&self) -> f64 {
        let f = D::UNITS.iter().find(|(u, _)| *u == self.unit).map_or(1.0, |p| p.1);
        self.value * f
    }
}

impl<D: Dimension> fmt::Display for Quantity<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl<D: Dimension> FromStr for Quantity<D> {
    type Err = QuantityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let split = t
            .char_indices()
            .find(|&(i, c)| c.is_ascii_alphabetic() && !is_exponent(t, i))
            .map(|(i, _)| i);
        let Some(i) = split else {
            return Err(if t.parse::<f64>().is_ok() {
                QuantityError::Unitless(t.into(), D::UNITS[0].0)
            } else {
                QuantityError::Malformed(t.into())
            });
        };
        let value: f64 = t[..i].trim().parse().map_err(|_| QuantityError::Malformed(t.into()))?;
        Self::new(value, t[i..].trim())
    }
}

/// Whether the `e`/`E` at byte `i` is a float exponent rather than a unit.
fn is_exponent(t: &str, i: usize) -> bool {
    let b = t.as_bytes();
    matches!(b[i], b'e' | b'E')
        && i > 0
        && (b[i - 1].is_ascii_digit() || b[i - 1] == b'.')
        && b.get(i + 1).is_some_and(|c| c.is_ascii_digit() || *c == b'-' || *c == b'+')
}

impl<D: Dimension> Serialize for Quantity<D> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de, D: Dimension> Deserialize<'de> for Quantity<D> {
    fn deserialize<De: Deserializer<'de>>(d: De) -> Result<Self, De::Error> {
        struct V<D>(PhantomData<D>);
        impl<D: Dimension> Visitor<'_> for V<D> {
            type Value = Quantity<D>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a {} with an explicit unit, e.g. \"1.0 {}\"", D::NAME, D::UNITS[0].0)
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Err(E::custom(QuantityError::Unitless(v.to_string(), D::UNITS[0].0)))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Err(E::custom(QuantityError::Unitless(v.to_string(), D::UNITS[0].0)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                Err(E::custom(QuantityError::Unitless(v.to_string(), D::UNITS[0].0)))
            }
        }
        d.deserialize_any(V(PhantomData))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_scales() {
        let q: Quantity<Length> = "1550 nm".parse().unwrap();
        assert!((q.si() - 1.55).abs() < 1e-12);
        let p: Quantity<Power> = "32.2mW".parse().unwrap();
        assert!((p.si() - 0.0322).abs() < 1e-15);
        let f: Quantity<Frequency> = "1e12 Hz".parse().unwrap();
        assert_eq!(f.si(), 1e12);
        let t: Quantity<Time> = "-2.5E-1 ps".parse().unwrap();
        assert_eq!(t.value(), -0.25);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!("2.1".parse::<Quantity<Length>>(), Err(QuantityError::Unitless(..))));
        assert!(matches!("2.1 ps".parse::<Quantity<Length>>(), Err(QuantityError::WrongUnit { .. })));
        assert!(matches!("um".parse::<Quantity<Length>>(), Err(QuantityError::Malformed(_))));
        assert!("inf um".parse::<Quantity<Length>>().is_err());
    }

    #[test]
    fn display_round_trips() {
        let l: Quantity<Length> = "2.1 um".parse().unwrap();
        assert_eq!(l.to_string().parse::<Quantity<Length>>().unwrap(), l);
        let a: Quantity<Attenuation> = "7.3 dBcm".parse().unwrap();
        assert_eq!(a.to_string().parse::<Quantity<Attenuation>>().unwrap(), a);
        let n: Quantity<NonlinearIndex> = "2.7e-18 m2/W".parse().unwrap();
        assert_eq!(n.to_string().parse::<Quantity<NonlinearIndex>>().unwrap(), n);
    }
}
