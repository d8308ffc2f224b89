//! TOML definition files for interval exchanges with an attached cocycle.
//!
//! Lengths are written as exact rationals: either `"p/q"` or a finite
//! decimal string, both parsed without rounding. Example:
//!
//! ```toml
//! alphabet = ["A", "B", "C", "D"]
//! top = ["A", "B", "C", "D"]
//! bottom = ["D", "C", "B", "A"]
//! lengths = { A = "3/10", B = "0.25", C = "0.15", D = "3/10" }
//!
//! [cocycle]
//! d = 2
//! values = { A = [1, 0], B = [0, 1], C = [0, -1], D = [-1, 0] }
//! ```

use crate::error::IetError;
use crate::iet::{Cocycle, Iet};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Deserialize)]
struct RawDef {
    #[serde(default)]
    name: Option<String>,
    alphabet: Vec<String>,
    top: Vec<String>,
    bottom: Vec<String>,
    lengths: BTreeMap<String, String>,
    #[serde(default)]
    cocycle: Option<RawCocycle>,
}

#[derive(Debug, Deserialize)]
struct RawCocycle {
    d: usize,
    values: BTreeMap<String, Vec<i64>>,
}

/// Parsed definition: an exact interval exchange plus optional cocycle.
#[derive(Debug, Clone)]
pub struct IetDefinition {
    pub name: Option<String>,
    pub iet: Iet<BigRational>,
    pub cocycle: Option<Cocycle>,
}

impl IetDefinition {
    pub fn from_str(text: &str) -> Result<Self, IetError> {
        let raw: RawDef =
            toml::from_str(text).map_err(|e| IetError::BadData(format!("toml: {e}")))?;
        let lengths: Vec<BigRational> = raw
            .alphabet
            .iter()
            .map(|name| {
                let s = raw
                    .lengths
                    .get(name)
                    .ok_or_else(|| IetError::BadData(format!("missing length for {name}")))?;
                parse_rational(s)
            })
            .collect::<Result<_, _>>()?;
        if raw.lengths.len() != raw.alphabet.len() {
            return Err(IetError::BadData("extra letters in the lengths table".into()));
        }
        let top: Vec<&str> = raw.top.iter().map(String::as_str).collect();
        let bottom: Vec<&str> = raw.bottom.iter().map(String::as_str).collect();
        let iet = Iet::new(raw.alphabet.clone(), &top, &bottom, lengths)?;
        let cocycle = match raw.cocycle {
            None => None,
            Some(rc) => {
                let values: Vec<Vec<i64>> = raw
                    .alphabet
                    .iter()
                    .map(|name| {
                        let v = rc.values.get(name).ok_or_else(|| {
                            IetError::BadData(format!("missing cocycle value for {name}"))
                        })?;
                        if v.len() != rc.d {
                            return Err(IetError::BadData(format!(
                                "cocycle value for {name} has {} components, expected {}",
                                v.len(),
                                rc.d
                            )));
                        }
                        Ok(v.clone())
                    })
                    .collect::<Result<_, _>>()?;
                Some(Cocycle::new(rc.d, values))
            }
        };
        Ok(IetDefinition { name: raw.name, iet, cocycle })
    }

    pub fn from_path(path: &Path) -> Result<Self, IetError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| IetError::BadData(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn iet_f64(&self) -> Iet<f64> {
        self.iet.to_f64()
    }
}

/// Parse `"p/q"` or a finite decimal string into an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational, IetError> {
    let s = s.trim();
    let bad = || IetError::BadData(format!("cannot parse rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let num: BigInt = p.trim().parse().map_err(|_| bad())?;
        let den: BigInt = q.trim().parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(num, den));
    }
    let (sign, digits) = match s.strip_prefix('-') {
        Some(rest) => (-BigInt::one(), rest),
        None => (BigInt::one(), s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let mut num: BigInt = if int_part.is_empty() { BigInt::zero() } else { int_part.parse().map_err(|_| bad())? };
    let mut den = BigInt::one();
    for c in frac_part.chars() {
        num = num * 10 + (c as u8 - b'0');
        den *= 10;
    }
    Ok(BigRational::new(sign * num, den))
}
