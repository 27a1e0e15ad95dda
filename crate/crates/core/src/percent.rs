use std::fmt;

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A percentage with two decimals, stored as hundredths of a percent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Percent {
    hundredths: u64,
}

impl Percent {
    pub fn from_hundredths(hundredths: u64) -> Self {
        Percent { hundredths }
    }

    /// `100 * part / whole`, rounded half-up to two decimals.
    pub fn from_ratio(part: &BigUint, whole: &BigUint) -> Self {
        if whole.is_zero() {
            return Percent::default();
        }
        let scaled = (part * 20_000u32 + whole) / (whole * 2u32);
        Percent {
            hundredths: scaled.to_u64().expect("percent of a sub-count fits u64"),
        }
    }

    pub fn hundredths(self) -> u64 {
        self.hundredths
    }

    pub fn as_f64(self) -> f64 {
        self.hundredths as f64 / 100.0
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&format!(
            "{}.{:02}",
            self.hundredths / 100,
            self.hundredths % 100
        ))
    }
}

impl Serialize for Percent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(self.as_f64())
    }
}

impl<'de> Deserialize<'de> for Percent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let x = f64::deserialize(d)?;
        if !(x >= 0.0 && x.is_finite()) {
            return Err(serde::de::Error::custom(
                "percent must be a nonnegative number",
            ));
        }
        Ok(Percent {
            hundredths: (x * 100.0).round() as u64,
        })
    }
}
