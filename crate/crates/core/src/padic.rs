//! Elements of `Q_p` with absolute precision tracking.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::radius::LogRadius;
use crate::scalar::{bigint_is_unit_pm1, int_valuation, Scalar};

/// Precision used when an exact value has to be turned into an approximate
/// one and nothing better is known.
pub const DEFAULT_PRECISION: i64 = 40;

thread_local! {
    static POW_CACHE: RefCell<HashMap<u64, Vec<BigInt>>> = RefCell::new(HashMap::new());
}

/// `p^k` for `k ≥ 0`, cached per thread.
pub fn pow_p(p: u64, k: u64) -> BigInt {
    if k > 4096 {
        return num_traits::pow(BigInt::from(p), k as usize);
    }
    POW_CACHE.with(|cell| {
        let mut map = cell.borrow_mut();
        let table = map.entry(p).or_insert_with(|| vec![BigInt::one()]);
        while table.len() <= k as usize {
            let next = table.last().unwrap() * p;
            table.push(next);
        }
        table[k as usize].clone()
    })
}

/// Remove the largest power of `p` dividing `n` (`n ≠ 0`).
fn split_p(n: BigInt, p: u64) -> (i64, BigInt) {
    let pb = BigInt::from(p);
    let mut m = n;
    let mut v = 0i64;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return (v, m);
        }
        m = q;
        v += 1;
    }
}

pub fn check_prime(p: u64) -> Result<()> {
    if p < 3 || p % 2 == 0 || !(3..).step_by(2).take_while(|d| d * d <= p).all(|d| p % d != 0) {
        return Err(Error::UnsupportedPrime(p));
    }
    Ok(())
}

/// `p^v·m` known modulo `p^N`.
///
/// Exact values keep `m` as an ordinary integer and use `prec` only as the
/// precision to fall back to when an operation (such as division by a
/// non-trivial unit) cannot stay exact. Inexact values keep `m` as the
/// canonical residue in `[0, p^(N−v))`.
#[derive(Clone, Debug)]
pub struct PadicScalar {
    p: u64,
    val: Option<i64>,
    unit: BigInt,
    prec: i64,
    exact: bool,
}

impl PartialEq for PadicScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.p != other.p || self.exact != other.exact || self.val != other.val {
            return false;
        }
        if self.exact {
            self.unit == other.unit
        } else {
            self.prec == other.prec && self.unit == other.unit
        }
    }
}

impl PadicScalar {
    pub fn exact_int(p: u64, n: impl Into<BigInt>, cap: i64) -> Self {
        let n = n.into();
        if n.is_zero() {
            return PadicScalar { p, val: None, unit: BigInt::zero(), prec: cap, exact: true };
        }
        let (v, m) = split_p(n, p);
        PadicScalar { p, val: Some(v), unit: m, prec: cap, exact: true }
    }

    pub fn exact_i64(p: u64, n: i64) -> Self {
        Self::exact_int(p, n, DEFAULT_PRECISION)
    }

    /// `p^v·u` exactly, for an integer `u` prime to `p`.
    pub fn exact_pow_times(p: u64, v: i64, u: impl Into<BigInt>, cap: i64) -> Self {
        let u = u.into();
        if u.is_zero() {
            return Self::exact_int(p, 0, cap);
        }
        let (w, m) = split_p(u, p);
        PadicScalar { p, val: Some(v + w), unit: m, prec: cap, exact: true }
    }

    /// The integer `n` known modulo `p^N`.
    pub fn from_int_mod(p: u64, n: &BigInt, prec: i64) -> Self {
        Self::normalize_inexact(p, 0, n.clone(), prec)
    }

    /// `p^v·m` modulo `p^N` with `m` any integer.
    pub fn from_parts(p: u64, v: i64, m: BigInt, prec: i64) -> Self {
        Self::normalize_inexact(p, v, m, prec)
    }

    pub fn zero_mod(p: u64, prec: i64) -> Self {
        PadicScalar { p, val: None, unit: BigInt::zero(), prec, exact: false }
    }

    fn normalize_inexact(p: u64, v: i64, m: BigInt, prec: i64) -> Self {
        if v >= prec || m.is_zero() {
            return Self::zero_mod(p, prec);
        }
        let modulus = pow_p(p, (prec - v) as u64);
        let m = m.mod_floor(&modulus);
        if m.is_zero() {
            return Self::zero_mod(p, prec);
        }
        let (w, u) = split_p(m, p);
        let v = v + w;
        if v >= prec {
            return Self::zero_mod(p, prec);
        }
        // u is already reduced modulo p^(prec - v) after dividing out p^w
        PadicScalar { p, val: Some(v), unit: u, prec, exact: false }
    }

    fn normalize_exact(p: u64, v: i64, m: BigInt, cap: i64) -> Self {
        if m.is_zero() {
            return PadicScalar { p, val: None, unit: BigInt::zero(), prec: cap, exact: true };
        }
        let (w, u) = split_p(m, p);
        PadicScalar { p, val: Some(v + w), unit: u, prec: cap, exact: true }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn unit(&self) -> &BigInt {
        &self.unit
    }

    /// Absolute precision, or the fallback cap for exact values.
    pub fn precision_or_cap(&self) -> i64 {
        self.prec
    }

    /// The exact value as a rational, when exact.
    pub fn to_rational(&self) -> Option<BigRational> {
        if !self.exact {
            return None;
        }
        Some(match self.val {
            None => BigRational::zero(),
            Some(v) if v >= 0 => BigRational::from_integer(&self.unit * pow_p(self.p, v as u64)),
            Some(v) => BigRational::new(self.unit.clone(), pow_p(self.p, (-v) as u64)),
        })
    }

    /// Representative of `p^v·m` as an integer modulo `p^k`, requiring `v ≥ 0`
    /// and `k ≤ N`.
    pub fn residue(&self, k: i64) -> Result<BigInt> {
        if k < 0 {
            return Err(Error::Invalid(format!("negative modulus exponent {k}")));
        }
        if !self.exact && k > self.prec {
            return Err(Error::AllPrecisionLost(self.prec));
        }
        let modulus = pow_p(self.p, k as u64);
        match self.val {
            None => Ok(BigInt::zero()),
            Some(v) if v < 0 => Err(Error::Invalid(format!("not integral: valuation {v}"))),
            Some(v) if v >= k => Ok(BigInt::zero()),
            Some(v) => Ok((&self.unit * pow_p(self.p, v as u64)).mod_floor(&modulus)),
        }
    }

    /// Valuation of `self − other`, capped at the joint precision.
    pub fn agreement(&self, other: &PadicScalar) -> Option<i64> {
        let d = self.sub_ref(other);
        match d.val {
            Some(v) => Some(v),
            None => d.abs_precision(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "v": match self.val { Some(v) => json!(v), None => json!("inf") },
            "m": self.unit.to_string(),
            "N": if self.exact { json!("exact") } else { json!(self.prec) },
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let bad = |what: &str| Error::Parse(format!("scalar: {what}"));
        let p = v.get("p").and_then(Value::as_u64).ok_or_else(|| bad("missing p"))?;
        check_prime(p)?;
        let m: BigInt = v
            .get("m")
            .and_then(Value::as_str)
            .ok_or_else(|| bad("missing m"))?
            .parse()
            .map_err(|_| bad("m is not an integer"))?;
        let val = match v.get("v") {
            Some(Value::String(s)) if s == "inf" => None,
            Some(x) => Some(x.as_i64().ok_or_else(|| bad("v"))?),
            None => return Err(bad("missing v")),
        };
        let n = v.get("N").ok_or_else(|| bad("missing N"))?;
        let exact = n.as_str() == Some("exact");
        let prec = if exact { DEFAULT_PRECISION } else { n.as_i64().ok_or_else(|| bad("N"))? };
        match (val, exact) {
            (None, true) => Ok(Self::exact_int(p, 0, prec)),
            (None, false) => Ok(Self::zero_mod(p, prec)),
            (Some(v), true) => Ok(Self::exact_pow_times(p, v, m, prec)),
            (Some(v), false) => Ok(Self::from_parts(p, v, m, prec)),
        }
    }

    fn same_prime(&self, other: &PadicScalar) {
        assert_eq!(self.p, other.p, "mixing p-adic scalars of different primes");
    }

    fn prec_opt(&self) -> Option<i64> {
        if self.exact {
            None
        } else {
            Some(self.prec)
        }
    }

    /// Valuation with an inexact zero counted as its precision.
    fn v_eff(&self) -> Option<i64> {
        self.val.or(self.prec_opt())
    }

    fn lin_comb(&self, other: &PadicScalar, negate: bool) -> PadicScalar {
        self.same_prime(other);
        let p = self.p;
        if self.exact && other.exact {
            let cap = self.prec.min(other.prec);
            return match (self.val, other.val) {
                (None, None) => Self::exact_int(p, 0, cap),
                (None, Some(_)) => {
                    let mut r = if negate { other.neg_ref() } else { other.clone() };
                    r.prec = cap;
                    r
                }
                (Some(_), None) => {
                    let mut r = self.clone();
                    r.prec = cap;
                    r
                }
                (Some(a), Some(b)) => {
                    let lo = a.min(b);
                    let x = &self.unit * pow_p(p, (a - lo) as u64);
                    let y = &other.unit * pow_p(p, (b - lo) as u64);
                    let s = if negate { x - y } else { x + y };
                    Self::normalize_exact(p, lo, s, cap)
                }
            };
        }
        let prec = match (self.prec_opt(), other.prec_opt()) {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => unreachable!(),
        };
        let a = self.val.filter(|&v| v < prec);
        let b = other.val.filter(|&v| v < prec);
        match (a, b) {
            (None, None) => Self::zero_mod(p, prec),
            (Some(a), None) => Self::normalize_inexact(p, a, self.unit.clone(), prec),
            (None, Some(b)) => {
                let u = if negate { -&other.unit } else { other.unit.clone() };
                Self::normalize_inexact(p, b, u, prec)
            }
            (Some(a), Some(b)) => {
                let lo = a.min(b);
                let x = &self.unit * pow_p(p, (a - lo) as u64);
                let y = &other.unit * pow_p(p, (b - lo) as u64);
                let s = if negate { x - y } else { x + y };
                Self::normalize_inexact(p, lo, s, prec)
            }
        }
    }

    fn mul_impl(&self, other: &PadicScalar) -> PadicScalar {
        self.same_prime(other);
        let p = self.p;
        let cap = self.prec.min(other.prec);
        if (self.exact && self.val.is_none()) || (other.exact && other.val.is_none()) {
            return Self::exact_int(p, 0, cap);
        }
        if self.exact && other.exact {
            let (a, b) = (self.val.unwrap(), other.val.unwrap());
            return PadicScalar { p, val: Some(a + b), unit: &self.unit * &other.unit, prec: cap, exact: true };
        }
        // both nonzero-or-inexact here
        let vx = self.v_eff().unwrap();
        let vy = other.v_eff().unwrap();
        let prec = match (self.prec_opt(), other.prec_opt()) {
            (Some(nx), Some(ny)) => (nx + vy).min(ny + vx),
            (Some(nx), None) => nx + vy,
            (None, Some(ny)) => ny + vx,
            (None, None) => unreachable!(),
        };
        match (self.val, other.val) {
            (Some(a), Some(b)) => Self::normalize_inexact(p, a + b, &self.unit * &other.unit, prec),
            _ => Self::zero_mod(p, prec),
        }
    }

    fn div_impl(&self, other: &PadicScalar) -> Result<PadicScalar> {
        self.same_prime(other);
        let p = self.p;
        let vy = match other.val {
            None if other.exact => return Err(Error::DivisionByZero),
            None => return Err(Error::AllPrecisionLost(other.prec)),
            Some(v) => v,
        };
        let cap = self.prec.min(other.prec);
        if self.exact && self.val.is_none() {
            return Ok(Self::exact_int(p, 0, cap));
        }
        if self.exact && other.exact {
            let vx = self.val.unwrap();
            if bigint_is_unit_pm1(&other.unit) {
                let u = if other.unit.is_negative() { -&self.unit } else { self.unit.clone() };
                return Ok(PadicScalar { p, val: Some(vx - vy), unit: u, prec: cap, exact: true });
            }
            let v = vx - vy;
            if v >= cap {
                return Ok(Self::zero_mod(p, cap));
            }
            let r = (cap - v) as u64;
            let modulus = pow_p(p, r);
            let inv = other.unit.mod_floor(&modulus).modinv(&modulus).expect("unit is invertible");
            return Ok(Self::normalize_inexact(p, v, &self.unit * inv, cap));
        }
        let ry = other.prec_opt().map(|n| n - vy);
        match self.val {
            None => Ok(Self::zero_mod(p, self.prec - vy)),
            Some(vx) => {
                let rx = self.prec_opt().map(|n| n - vx);
                let r = match (rx, ry) {
                    (Some(a), Some(b)) => a.min(b),
                    (Some(a), None) | (None, Some(a)) => a,
                    (None, None) => unreachable!(),
                };
                let v = vx - vy;
                let modulus = pow_p(p, r as u64);
                let inv = other.unit.mod_floor(&modulus).modinv(&modulus).expect("unit is invertible");
                Ok(Self::normalize_inexact(p, v, &self.unit * inv, v + r))
            }
        }
    }

    /// The approximate version of `self` at absolute precision `n`.
    pub fn truncate(&self, n: i64) -> PadicScalar {
        match self.val {
            None => Self::zero_mod(self.p, if self.exact { n } else { n.min(self.prec) }),
            Some(v) => {
                let n = if self.exact { n } else { n.min(self.prec) };
                Self::normalize_inexact(self.p, v, self.unit.clone(), n)
            }
        }
    }

    pub fn norm(&self) -> LogRadius {
        norm_of(self)
    }

    pub fn is_one(&self) -> bool {
        self.val == Some(0) && self.unit.is_one() && self.exact
    }

    pub fn unit_i64(&self) -> Option<i64> {
        self.unit.to_i64()
    }
}

/// `a/b` in `Q_p`, exact when `b/p^{v_p(b)} = ±1`, otherwise modulo `p^N`.
pub fn padic_from_rational(a: i64, b: i64, p: u64, n: i64) -> Result<PadicScalar> {
    padic_from_bigrational(&BigInt::from(a), &BigInt::from(b), p, n)
}

pub fn padic_from_bigrational(a: &BigInt, b: &BigInt, p: u64, n: i64) -> Result<PadicScalar> {
    check_prime(p)?;
    if b.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let num = PadicScalar::exact_int(p, a.clone(), n);
    let den = PadicScalar::exact_int(p, b.clone(), n);
    num.div_impl(&den)
}

pub fn norm_of(x: &PadicScalar) -> LogRadius {
    match x.val {
        None => LogRadius::Zero,
        Some(v) => LogRadius::from_int_exponent(v),
    }
}

impl Scalar for PadicScalar {
    fn zero_like(&self) -> Self {
        PadicScalar::exact_int(self.p, 0, self.prec)
    }
    fn from_i64_like(&self, n: i64) -> Self {
        PadicScalar::exact_int(self.p, n, self.prec)
    }
    fn from_bigint_like(&self, n: &BigInt) -> Self {
        PadicScalar::exact_int(self.p, n.clone(), self.prec)
    }
    fn is_zero(&self) -> bool {
        self.val.is_none()
    }
    fn is_exact(&self) -> bool {
        self.exact
    }
    fn add_ref(&self, rhs: &Self) -> Self {
        self.lin_comb(rhs, false)
    }
    fn sub_ref(&self, rhs: &Self) -> Self {
        self.lin_comb(rhs, true)
    }
    fn mul_ref(&self, rhs: &Self) -> Self {
        self.mul_impl(rhs)
    }
    fn neg_ref(&self) -> Self {
        match self.val {
            None => self.clone(),
            Some(_) if self.exact => PadicScalar { unit: -&self.unit, ..self.clone() },
            Some(v) => PadicScalar::normalize_inexact(self.p, v, -&self.unit, self.prec),
        }
    }
    fn try_div(&self, rhs: &Self) -> Result<Self> {
        self.div_impl(rhs)
    }
    fn valuation(&self) -> Option<i64> {
        self.val
    }
    fn abs_precision(&self) -> Option<i64> {
        self.prec_opt()
    }
    fn with_abs_cap(&self, cap: i64) -> Self {
        if self.exact || cap < self.prec {
            self.truncate(cap)
        } else {
            self.clone()
        }
    }
    fn prime(&self) -> u64 {
        self.p
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.val {
            None => write!(f, "0")?,
            Some(0) => write!(f, "{}", self.unit)?,
            Some(v) => write!(f, "{}^{}*{}", self.p, v, self.unit)?,
        }
        if !self.exact {
            write!(f, " + O({}^{})", self.p, self.prec)?;
        }
        Ok(())
    }
}

/// Reduce an exact rational into `Q_p` (used by oracle code).
pub fn padic_from_ratio(r: &BigRational, p: u64, n: i64) -> Result<PadicScalar> {
    padic_from_bigrational(r.numer(), r.denom(), p, n)
}

/// `v_p` of a nonzero rational.
pub fn rational_valuation(r: &BigRational, p: u64) -> Option<i64> {
    if r.is_zero() {
        None
    } else {
        Some(int_valuation(r.numer(), p) - int_valuation(r.denom(), p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_rational_examples() {
        let one = padic_from_rational(1, 1, 5, 10).unwrap();
        assert!(one.is_exact() && one.is_one());
        let x = padic_from_rational(25, 12, 5, 10).unwrap();
        assert_eq!(x.valuation(), Some(2));
        assert_eq!(x.abs_precision(), Some(10));
        let m8 = pow_p(5, 8);
        assert!(((x.unit() * BigInt::from(12)) - BigInt::one()).mod_floor(&m8).is_zero());
        let z = padic_from_rational(0, 7, 3, 10).unwrap();
        assert!(z.is_zero() && z.is_exact());
        assert_eq!(padic_from_rational(1, 0, 3, 10), Err(Error::DivisionByZero));
        assert_eq!(padic_from_rational(1, 2, 4, 10), Err(Error::UnsupportedPrime(4)));
    }

    #[test]
    fn arithmetic_examples() {
        let three = PadicScalar::exact_i64(3, 3);
        let six = PadicScalar::exact_i64(3, 6);
        let s = three.add_ref(&six);
        assert_eq!(s.valuation(), Some(2));
        assert!(s.unit().is_one());
        let p = PadicScalar::exact_i64(3, 3);
        let pinv = padic_from_rational(1, 3, 3, 10).unwrap();
        assert!(p.mul_ref(&pinv).is_one());
        let a = PadicScalar::from_int_mod(3, &BigInt::from(1), 5);
        let b = PadicScalar::from_int_mod(3, &BigInt::from(-1), 2);
        let c = a.add_ref(&b);
        assert!(c.is_zero());
        assert_eq!(c.abs_precision(), Some(2));
    }

    #[test]
    fn precision_rules() {
        let x = PadicScalar::from_parts(5, 1, BigInt::from(2), 6);
        let y = PadicScalar::from_parts(5, 2, BigInt::from(3), 7);
        // min(6 + 2, 7 + 1)
        assert_eq!(x.mul_ref(&y).abs_precision(), Some(8));
        let q = x.try_div(&y).unwrap();
        // relative precisions 5 and 5
        assert_eq!(q.valuation(), Some(-1));
        assert_eq!(q.abs_precision(), Some(4));
        let z = PadicScalar::zero_mod(5, 3);
        assert_eq!(x.try_div(&z), Err(Error::AllPrecisionLost(3)));
        let e = PadicScalar::exact_i64(5, 0);
        assert_eq!(x.try_div(&e), Err(Error::DivisionByZero));
        assert!(e.mul_ref(&x).is_exact());
    }

    #[test]
    fn negative_exact_units_survive() {
        let a = PadicScalar::exact_i64(3, -2);
        let b = PadicScalar::exact_i64(3, 2);
        assert!(a.add_ref(&b).is_zero());
        assert!(a.try_div(&b).unwrap().add_ref(&a.one_like()).is_zero());
    }

    #[test]
    fn json_round_trip() {
        for x in [
            padic_from_rational(25, 12, 5, 10).unwrap(),
            PadicScalar::exact_i64(7, -49),
            PadicScalar::zero_mod(3, 4),
        ] {
            assert_eq!(PadicScalar::from_json(&x.to_json()).unwrap(), x);
        }
    }

    #[test]
    fn norm_examples() {
        assert_eq!(norm_of(&PadicScalar::exact_i64(3, 3)), LogRadius::from_int_exponent(1));
        assert_eq!(norm_of(&padic_from_rational(25, 12, 5, 10).unwrap()), LogRadius::from_int_exponent(2));
        assert_eq!(norm_of(&PadicScalar::exact_i64(3, 0)), LogRadius::Zero);
    }
}
