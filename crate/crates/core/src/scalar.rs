//! The coefficient abstraction shared by every series kernel.
//!
//! Series, matrices, stratifications and deformations are generic over
//! [`Scalar`]. Three instances ship with the crate:
//!
//! * [`PadicScalar`](crate::padic::PadicScalar): `Q_p` with precision tracking,
//!   the production type;
//! * [`RationalScalar`]: exact elements of `Q` viewed inside `Q_p`, used as an
//!   independent oracle in tests and for small exact computations;
//! * [`Dual`]: first-order infinitesimals `a + b·ε` with `ε² = 0` over any
//!   scalar, used to differentiate deformation families with respect to
//!   `(q, h)`.
//!
//! The trait is deliberately not `num_traits::Num`: a p-adic scalar needs a
//! prime and a precision cap that a context-free `zero()` cannot supply, so
//! constants are always created "like" an existing value.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub trait Scalar: Clone + fmt::Debug + PartialEq + Send + Sync + 'static {
    /// Zero in the same field/precision context as `self`.
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self {
        self.from_i64_like(1)
    }
    fn from_i64_like(&self, n: i64) -> Self;
    fn from_bigint_like(&self, n: &BigInt) -> Self;

    /// Indistinguishable from zero at the known precision.
    fn is_zero(&self) -> bool;
    fn is_exact(&self) -> bool;

    fn add_ref(&self, rhs: &Self) -> Self;
    fn sub_ref(&self, rhs: &Self) -> Self;
    fn mul_ref(&self, rhs: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn try_div(&self, rhs: &Self) -> Result<Self>;

    /// p-adic valuation; `None` for a value that is zero to its precision.
    fn valuation(&self) -> Option<i64>;
    /// Absolute precision `N` (value known modulo `p^N`); `None` when exact.
    fn abs_precision(&self) -> Option<i64>;
    /// Lower the absolute precision to at most `cap`.
    fn with_abs_cap(&self, cap: i64) -> Self;
    fn prime(&self) -> u64;

    /// Lower bound for the valuation: the valuation itself, or the precision
    /// for an inexact zero, or `None` for an exact zero.
    fn valuation_bound(&self) -> Option<i64> {
        match self.valuation() {
            Some(v) => Some(v),
            None => self.abs_precision(),
        }
    }

    fn pow_u(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    fn div_i64(&self, n: i64) -> Result<Self> {
        self.try_div(&self.from_i64_like(n))
    }
}

/// p-adic valuation of a nonzero integer.
pub fn int_valuation(n: &BigInt, p: u64) -> i64 {
    assert!(!n.is_zero(), "valuation of 0");
    let pb = BigInt::from(p);
    let mut m = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

pub fn u64_valuation(mut n: u64, p: u64) -> i64 {
    assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// `v_p(n!)` by Legendre's formula.
pub fn factorial_valuation(n: u64, p: u64) -> i64 {
    let mut v = 0;
    let mut m = n / p;
    while m > 0 {
        v += m as i64;
        m /= p;
    }
    v
}

/// An exact rational number regarded as an element of `Q_p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalScalar {
    p: u64,
    value: BigRational,
}

impl RationalScalar {
    pub fn new(p: u64, value: BigRational) -> Self {
        RationalScalar { p, value }
    }

    pub fn from_i64(p: u64, n: i64) -> Self {
        RationalScalar { p, value: BigRational::from_integer(BigInt::from(n)) }
    }

    pub fn from_frac(p: u64, n: i64, d: i64) -> Self {
        RationalScalar { p, value: BigRational::new(BigInt::from(n), BigInt::from(d)) }
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }
}

impl Scalar for RationalScalar {
    fn zero_like(&self) -> Self {
        RationalScalar { p: self.p, value: BigRational::zero() }
    }
    fn from_i64_like(&self, n: i64) -> Self {
        RationalScalar::from_i64(self.p, n)
    }
    fn from_bigint_like(&self, n: &BigInt) -> Self {
        RationalScalar { p: self.p, value: BigRational::from_integer(n.clone()) }
    }
    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }
    fn is_exact(&self) -> bool {
        true
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        RationalScalar { p: self.p, value: &self.value + &rhs.value }
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        RationalScalar { p: self.p, value: &self.value - &rhs.value }
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        RationalScalar { p: self.p, value: &self.value * &rhs.value }
    }
    fn neg_ref(&self) -> Self {
        RationalScalar { p: self.p, value: -&self.value }
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        if rhs.value.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(RationalScalar { p: self.p, value: &self.value / &rhs.value })
    }
    fn valuation(&self) -> Option<i64> {
        if self.value.is_zero() {
            return None;
        }
        Some(int_valuation(self.value.numer(), self.p) - int_valuation(self.value.denom(), self.p))
    }
    fn abs_precision(&self) -> Option<i64> {
        None
    }
    fn with_abs_cap(&self, _cap: i64) -> Self {
        // exact rationals carry no precision model
        self.clone()
    }
    fn prime(&self) -> u64 {
        self.p
    }
}

impl fmt::Display for RationalScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// `re + eps·ε` with `ε² = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<S> {
    pub re: S,
    pub eps: S,
}

impl<S: Scalar> Dual<S> {
    pub fn new(re: S, eps: S) -> Self {
        Dual { re, eps }
    }

    pub fn real(re: S) -> Self {
        let eps = re.zero_like();
        Dual { re, eps }
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn zero_like(&self) -> Self {
        Dual::real(self.re.zero_like())
    }
    fn from_i64_like(&self, n: i64) -> Self {
        Dual::real(self.re.from_i64_like(n))
    }
    fn from_bigint_like(&self, n: &BigInt) -> Self {
        Dual::real(self.re.from_bigint_like(n))
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.eps.is_zero()
    }
    fn is_exact(&self) -> bool {
        self.re.is_exact() && self.eps.is_exact()
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        Dual { re: self.re.add_ref(&rhs.re), eps: self.eps.add_ref(&rhs.eps) }
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        Dual { re: self.re.sub_ref(&rhs.re), eps: self.eps.sub_ref(&rhs.eps) }
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        Dual {
            re: self.re.mul_ref(&rhs.re),
            eps: self.re.mul_ref(&rhs.eps).add_ref(&self.eps.mul_ref(&rhs.re)),
        }
    }
    fn neg_ref(&self) -> Self {
        Dual { re: self.re.neg_ref(), eps: self.eps.neg_ref() }
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        let re = self.re.try_div(&rhs.re)?;
        // (a + bε)/(c + dε) = a/c + (b − (a/c)·d)/c · ε
        let eps = self.eps.sub_ref(&re.mul_ref(&rhs.eps)).try_div(&rhs.re)?;
        Ok(Dual { re, eps })
    }
    fn valuation(&self) -> Option<i64> {
        match (self.re.valuation(), self.eps.valuation()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
    fn abs_precision(&self) -> Option<i64> {
        match (self.re.abs_precision(), self.eps.abs_precision()) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        }
    }
    fn with_abs_cap(&self, cap: i64) -> Self {
        Dual { re: self.re.with_abs_cap(cap), eps: self.eps.with_abs_cap(cap) }
    }
    fn prime(&self) -> u64 {
        self.re.prime()
    }
}

/// Sign-aware rendering helper for big integers.
pub(crate) fn bigint_is_unit_pm1(n: &BigInt) -> bool {
    n.abs().is_one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_matches_direct_product() {
        for p in [3u64, 5, 7] {
            let mut fact = BigInt::one();
            for n in 1..60u64 {
                fact *= n;
                assert_eq!(factorial_valuation(n, p), int_valuation(&fact, p), "n={n} p={p}");
            }
        }
    }

    #[test]
    fn rational_valuation() {
        let x = RationalScalar::from_frac(5, 25, 12);
        assert_eq!(x.valuation(), Some(2));
        let y = RationalScalar::from_frac(3, 1, 18);
        assert_eq!(y.valuation(), Some(-2));
        assert_eq!(x.zero_like().valuation(), None);
    }

    #[test]
    fn dual_quotient_rule() {
        let a = Dual::new(RationalScalar::from_i64(3, 2), RationalScalar::from_i64(3, 5));
        let b = Dual::new(RationalScalar::from_i64(3, 4), RationalScalar::from_i64(3, 1));
        let q = a.try_div(&b).unwrap();
        // (2 + 5ε)/(4 + ε) = 1/2 + (5·4 − 2·1)/16 ε
        assert_eq!(q.re, RationalScalar::from_frac(3, 1, 2));
        assert_eq!(q.eps, RationalScalar::from_frac(3, 18, 16));
        assert_eq!(q.mul_ref(&b), a);
    }
}
