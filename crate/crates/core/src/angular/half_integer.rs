use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An exact half-integer, stored as twice its value.
///
/// Used for angular-momentum magnitudes `j` and projections `m` alike, so the
/// stored value may be negative. Magnitude/projection validity is checked by
/// [`check_projection`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HalfInteger(i32);

impl HalfInteger {
    pub const ZERO: HalfInteger = HalfInteger(0);
    pub const HALF: HalfInteger = HalfInteger(1);
    pub const ONE: HalfInteger = HalfInteger(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInteger(twice)
    }

    pub const fn from_int(value: i32) -> Self {
        HalfInteger(2 * value)
    }

    #[inline]
    pub const fn twice(self) -> i32 {
        self.0
    }

    #[inline]
    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    #[inline]
    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    /// Integer value, if this is an integer.
    pub const fn as_int(self) -> Option<i32> {
        if self.is_integer() {
            Some(self.0 / 2)
        } else {
            None
        }
    }

    pub const fn abs(self) -> Self {
        HalfInteger(self.0.abs())
    }

    /// Projections `j, j-1, …, -j` in descending order.
    pub fn projections(self) -> impl Iterator<Item = HalfInteger> {
        let j = self.0;
        let count = if j >= 0 { j + 1 } else { 0 };
        (0..count).map(move |k| HalfInteger(j - 2 * k))
    }
}

impl std::ops::Add for HalfInteger {
    type Output = HalfInteger;
    fn add(self, rhs: Self) -> Self {
        HalfInteger(self.0 + rhs.0)
    }
}

impl std::ops::Sub for HalfInteger {
    type Output = HalfInteger;
    fn sub(self, rhs: Self) -> Self {
        HalfInteger(self.0 - rhs.0)
    }
}

impl std::ops::Neg for HalfInteger {
    type Output = HalfInteger;
    fn neg(self) -> Self {
        HalfInteger(-self.0)
    }
}

impl fmt::Display for HalfInteger {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl FromStr for HalfInteger {
    type Err = Error;

    /// Accepts `"3"`, `"-1"`, `"3/2"`, `"-1/2"` and decimal halves such as `"1.5"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("not a half-integer: {s:?}"));
        if let Some((num, den)) = s.split_once('/') {
            let num: i32 = num.trim().parse().map_err(|_| bad())?;
            match den.trim() {
                "1" => Ok(HalfInteger(2 * num)),
                "2" => Ok(HalfInteger(num)),
                _ => Err(bad()),
            }
        } else if let Ok(v) = s.parse::<i32>() {
            Ok(HalfInteger(2 * v))
        } else {
            let v: f64 = s.parse().map_err(|_| bad())?;
            let twice = 2.0 * v;
            if twice.fract() != 0.0 || twice.abs() > f64::from(i32::MAX) {
                return Err(bad());
            }
            Ok(HalfInteger(twice as i32))
        }
    }
}

/// Check that `(j, m)` is a valid angular-momentum pair: `j ≥ 0`, `|m| ≤ j`,
/// and `j - m` integral.
pub fn check_projection(j: HalfInteger, m: HalfInteger) -> Result<()> {
    if j.0 < 0 {
        return Err(Error::Index(format!("negative angular momentum j = {j}")));
    }
    if (j.0 - m.0) % 2 != 0 {
        return Err(Error::Index(format!("j - m is not an integer (j = {j}, m = {m})")));
    }
    if m.0.abs() > j.0 {
        return Err(Error::Index(format!("|m| > j (j = {j}, m = {m})")));
    }
    Ok(())
}
