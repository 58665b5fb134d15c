//! Canonical text forms for exact numbers in the JSON artifacts.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{Int, Rat};

/// `"p"` for integers, `"p/q"` otherwise; `q > 0` and the fraction reduced.
pub fn rat_to_string(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::Arithmetic(format!("cannot parse rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: Int = n.trim().parse().map_err(|_| bad())?;
            let d: Int = d.trim().parse().map_err(|_| bad())?;
            if d == Int::from(0) {
                return Err(bad());
            }
            Ok(Rat::new(n, d))
        }
        None => Ok(Rat::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

/// Numerator/denominator pair as strings, used by series and polynomial files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NumDen {
    pub num: String,
    pub den: String,
}

impl NumDen {
    pub fn from_rat(r: &Rat) -> Self {
        NumDen { num: r.numer().to_string(), den: r.denom().to_string() }
    }

    pub fn to_rat(&self) -> Result<Rat> {
        parse_rat(&format!("{}/{}", self.num, self.den))
    }
}

/// Serializes an integer as its decimal string.
pub fn int_as_string<S: serde::Serializer>(v: &Int, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Pretty JSON with a trailing newline. `serde_json` preserves struct field
/// order and all maps in this crate are ordered, so equal values give equal
/// bytes.
pub fn to_canonical_string<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat_frac;

    #[test]
    fn rational_text_round_trip() {
        for r in [rat_frac(3, 4), rat_frac(-6, 4), rat_frac(0, 5), rat_frac(12, 1)] {
            assert_eq!(parse_rat(&rat_to_string(&r)).unwrap(), r);
            assert_eq!(NumDen::from_rat(&r).to_rat().unwrap(), r);
        }
        assert_eq!(rat_to_string(&rat_frac(-6, 4)), "-3/2");
        assert!(parse_rat("1/0").is_err());
    }
}
