//! Quantities that accept unit suffixes in configuration files.
//!
//! A bare number is read in SI units. A string may carry a suffix:
//! lengths accept `m`, `mm`, `um`, `nm`; inverse lengths accept `/m`,
//! `/mm`, `/um` (also written `mm^-1`).

use std::fmt;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Kind {
    Length,
    InverseLength,
}

/// Decimal exponent of the unit relative to SI.
fn exponent(kind: Kind, unit: &str) -> Option<i32> {
    let unit = unit.trim().replace(' ', "");
    match kind {
        Kind::Length => match unit.as_str() {
            "" | "m" => Some(0),
            "mm" => Some(-3),
            "um" | "µm" => Some(-6),
            "nm" => Some(-9),
            _ => None,
        },
        Kind::InverseLength => match unit.as_str() {
            "" | "/m" | "m^-1" | "1/m" => Some(0),
            "/mm" | "mm^-1" | "1/mm" => Some(3),
            "/um" | "um^-1" | "1/um" | "/µm" => Some(6),
            _ => None,
        },
    }
}

fn parse(kind: Kind, text: &str) -> Result<f64, String> {
    let text = text.trim();
    // The longest prefix that reads as a number; the rest is the unit.
    let (number, unit) = text
        .char_indices()
        .map(|(i, _)| i)
        .chain([text.len()])
        .rev()
        .find(|&i| text[..i].trim().parse::<f64>().is_ok())
        .map(|i| (text[..i].trim(), &text[i..]))
        .ok_or_else(|| format!("cannot read a number from {text:?}"))?;
    let shift = exponent(kind, unit).ok_or_else(|| {
        let expected = match kind {
            Kind::Length => "m, mm, um or nm",
            Kind::InverseLength => "/m, /mm or /um",
        };
        format!(
            "unknown unit {:?} in {text:?}; expected {expected}",
            unit.trim()
        )
    })?;
    // Shift the decimal exponent so "0.1999 mm" reads exactly like 0.1999e-3.
    let (mantissa, exp) = number.split_once(['e', 'E']).unwrap_or((number, "0"));
    let exp: i32 = exp
        .parse()
        .map_err(|_| format!("cannot read a number from {text:?}"))?;
    format!("{mantissa}e{}", exp + shift)
        .parse()
        .map_err(|_| format!("cannot read a number from {text:?}"))
}

struct QuantityVisitor(Kind);

impl Visitor<'_> for QuantityVisitor {
    type Value = f64;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self.0 {
            Kind::Length => f.write_str("a length in meters or a string such as \"4 mm\""),
            Kind::InverseLength => {
                f.write_str("an inverse length in 1/m or a string such as \"2 /mm\"")
            }
        }
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<f64, E> {
        Ok(v)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<f64, E> {
        Ok(v as f64)
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<f64, E> {
        parse(self.0, v).map_err(E::custom)
    }
}

macro_rules! quantity {
    ($name:ident, $kind:expr) => {
        #[derive(Clone, Copy, Debug, PartialEq)]
        pub struct $name(pub f64);

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.serialize_f64(self.0)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                d.deserialize_any(QuantityVisitor($kind)).map($name)
            }
        }
    };
}

quantity!(Length, Kind::Length);
quantity!(InverseLength, Kind::InverseLength);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lengths() {
        assert_eq!(parse(Kind::Length, "4 mm").unwrap(), 4e-3);
        assert_eq!(parse(Kind::Length, "800nm").unwrap(), 800e-9);
        assert_eq!(parse(Kind::Length, "0.1999 mm").unwrap(), 0.1999e-3);
        assert_eq!(parse(Kind::Length, "1.5e-3").unwrap(), 1.5e-3);
        assert_eq!(parse(Kind::Length, "2e-1 mm").unwrap(), 2e-4);
        assert_eq!(parse(Kind::Length, "-1.5E+2 um").unwrap(), -1.5e-4);
        assert!(parse(Kind::Length, "4 furlongs").is_err());
        assert!(parse(Kind::Length, "mm").is_err());
    }

    #[test]
    fn inverse_lengths() {
        assert_eq!(parse(Kind::InverseLength, "2 /mm").unwrap(), 2e3);
        assert_eq!(parse(Kind::InverseLength, "2/mm").unwrap(), 2e3);
        assert_eq!(parse(Kind::InverseLength, "1 mm^-1").unwrap(), 1e3);
        assert_eq!(parse(Kind::InverseLength, "2000").unwrap(), 2e3);
        assert!(parse(Kind::InverseLength, "2 mm").is_err());
    }

    #[test]
    fn from_toml() {
        #[derive(Deserialize)]
        struct T {
            a: Length,
            b: InverseLength,
            c: Length,
        }
        let t: T = toml::from_str("a = \"4 mm\"\nb = \"2 /mm\"\nc = 3").unwrap();
        assert_eq!((t.a.0, t.b.0, t.c.0), (4e-3, 2e3, 3.0));
    }
}
