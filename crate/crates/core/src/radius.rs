//! Radii and norms on the log scale.
//!
//! A radius `ρ = p^{-r}` is stored through its exponent `r`, an exact rational.
//! Radius zero has exponent `+∞`, an infinite radius has exponent `-∞`.
//! Ordering on [`LogRadius`] is ordering of the radii, so it runs opposite to
//! the ordering of exponents.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Exact rational used for exponents, valuations and slopes.
pub type Rat = Ratio<i64>;

pub fn rat(n: i64, d: i64) -> Rat {
    Ratio::new(n, d)
}

pub fn int(n: i64) -> Rat {
    Ratio::from_integer(n)
}

pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
            let d: i64 = d.trim().parse().map_err(|_| Error::Parse(s.to_string()))?;
            if d == 0 {
                return Err(Error::Parse(format!("zero denominator in {s}")));
            }
            Ok(Ratio::new(n, d))
        }
        None => s
            .parse::<i64>()
            .map(Ratio::from_integer)
            .map_err(|_| Error::Parse(s.to_string())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogRadius {
    /// Radius 0 (exponent +∞); also the norm of the zero element.
    Zero,
    /// Radius `p^{-r}`.
    Finite(Rat),
    /// Radius +∞ (exponent -∞).
    Infinite,
}

impl LogRadius {
    pub fn from_exponent(r: Rat) -> Self {
        LogRadius::Finite(r)
    }

    pub fn from_int_exponent(r: i64) -> Self {
        LogRadius::Finite(int(r))
    }

    pub const ONE: LogRadius = LogRadius::Finite(Ratio::new_raw(0, 1));

    /// `ω = p^{-1/(p-1)}`, the radius of convergence of `exp`.
    pub fn omega(p: u64) -> Self {
        LogRadius::Finite(rat(1, p as i64 - 1))
    }

    /// Exponent, `None` when infinite in either direction.
    pub fn exponent(&self) -> Option<Rat> {
        match self {
            LogRadius::Finite(r) => Some(*r),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LogRadius::Zero)
    }

    /// Product of radii (sum of exponents).
    pub fn mul(&self, other: &LogRadius) -> LogRadius {
        use LogRadius::*;
        match (self, other) {
            (Zero, Infinite) | (Infinite, Zero) => {
                panic!("0·∞ is undefined for radii")
            }
            (Zero, _) | (_, Zero) => Zero,
            (Infinite, _) | (_, Infinite) => Infinite,
            (Finite(a), Finite(b)) => Finite(a + b),
        }
    }

    /// Quotient of radii (difference of exponents).
    pub fn div(&self, other: &LogRadius) -> LogRadius {
        self.mul(&other.inv())
    }

    pub fn inv(&self) -> LogRadius {
        match self {
            LogRadius::Zero => LogRadius::Infinite,
            LogRadius::Infinite => LogRadius::Zero,
            LogRadius::Finite(r) => LogRadius::Finite(-r),
        }
    }

    /// `ρ^k` for an integer `k`.
    pub fn pow(&self, k: i64) -> LogRadius {
        match self {
            LogRadius::Finite(r) => LogRadius::Finite(r * k),
            _ if k == 0 => LogRadius::ONE,
            _ if k > 0 => *self,
            _ => self.inv(),
        }
    }

    /// Exact `k`-th root.
    pub fn root(&self, k: i64) -> LogRadius {
        assert!(k > 0, "root index must be positive");
        match self {
            LogRadius::Finite(r) => LogRadius::Finite(r / k),
            other => *other,
        }
    }

    pub fn min(self, other: LogRadius) -> LogRadius {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: LogRadius) -> LogRadius {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn to_json_string(&self) -> String {
        match self {
            LogRadius::Zero => "inf".to_string(),
            LogRadius::Infinite => "-inf".to_string(),
            LogRadius::Finite(r) => format_rat(r),
        }
    }

    pub fn parse(s: &str) -> Result<LogRadius> {
        match s.trim() {
            "inf" | "+inf" => Ok(LogRadius::Zero),
            "-inf" => Ok(LogRadius::Infinite),
            other => parse_rat(other).map(LogRadius::Finite),
        }
    }
}

impl Ord for LogRadius {
    fn cmp(&self, other: &Self) -> Ordering {
        use LogRadius::*;
        match (self, other) {
            (Zero, Zero) | (Infinite, Infinite) => Ordering::Equal,
            (Zero, _) => Ordering::Less,
            (_, Zero) => Ordering::Greater,
            (Infinite, _) => Ordering::Greater,
            (_, Infinite) => Ordering::Less,
            // larger exponent means smaller radius
            (Finite(a), Finite(b)) => b.cmp(a),
        }
    }
}

impl PartialOrd for LogRadius {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for LogRadius {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LogRadius::Zero => write!(f, "0"),
            LogRadius::Infinite => write!(f, "∞"),
            LogRadius::Finite(r) if r.is_zero() => write!(f, "1"),
            LogRadius::Finite(r) if r.is_negative() => write!(f, "p^{}", -r),
            LogRadius::Finite(r) => write!(f, "p^-{}", r),
        }
    }
}

/// Floor of a rational.
pub fn floor_rat(r: &Rat) -> i64 {
    r.floor().to_integer()
}

pub fn ceil_rat(r: &Rat) -> i64 {
    r.ceil().to_integer()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_reverses_exponents() {
        let small = LogRadius::from_int_exponent(2);
        let big = LogRadius::from_int_exponent(-1);
        assert!(small < big);
        assert!(LogRadius::Zero < small);
        assert!(big < LogRadius::Infinite);
        assert_eq!(small.min(big), small);
    }

    #[test]
    fn products_and_roots_are_exact() {
        let w = LogRadius::omega(3);
        assert_eq!(w.exponent(), Some(rat(1, 2)));
        let prod = w.mul(&LogRadius::from_int_exponent(1));
        assert_eq!(prod.exponent(), Some(rat(3, 2)));
        assert_eq!(prod.root(3).exponent(), Some(rat(1, 2)));
        assert_eq!(LogRadius::Zero.mul(&w), LogRadius::Zero);
        assert_eq!(w.div(&w), LogRadius::ONE);
    }

    #[test]
    fn json_round_trip() {
        for r in [LogRadius::Zero, LogRadius::Infinite, LogRadius::Finite(rat(-5, 6))] {
            assert_eq!(LogRadius::parse(&r.to_json_string()).unwrap(), r);
        }
    }
}
