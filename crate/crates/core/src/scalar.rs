//! Exact field scalars.
//!
//! Everything that does linear algebra is generic over [`Field`]. Only exact
//! fields implement it: elimination decides zero-ness with `==`, so an
//! inexact type would give wrong ranks instead of approximate ones.

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, NumAssign, Signed};

pub trait Field:
    Clone + Debug + Display + PartialEq + Eq + NumAssign + Signed + FromPrimitive
{
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num).expect("numerator fits")
            / Self::from_i64(den).expect("denominator fits")
    }

    /// `p/q` (or `p` when the denominator is one).
    fn to_ratio_string(&self) -> String {
        self.to_string()
    }
}

impl<T> Field for Ratio<T>
where
    T: Clone + Debug + Display + Integer + Signed + NumAssign + FromPrimitive,
    Ratio<T>: FromPrimitive,
{
}

/// Parses `p/q` or `p` into any exact field.
pub fn parse_ratio<S: Field>(s: &str) -> Option<S> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = n.parse().ok()?;
    let d: i64 = d.parse().ok()?;
    if d == 0 {
        return None;
    }
    Some(S::from_ratio(n, d))
}

/// Small-factorial helper that stays exact in the target field.
pub fn factorial<S: Field>(n: usize) -> S {
    (1..=n).fold(S::one(), |acc, k| acc * S::from_usize(k).expect("fits"))
}
