//! Truncated Laurent series in `u = T − c` with coefficients in any [`Scalar`].
//!
//! A series either is an exact Laurent polynomial (`trunc == None`) or is
//! known modulo `u^{M+1}` (`trunc == Some(M)`), in which case exactly the
//! coefficients of index `min_index..=M` are stored.

mod logexp;
mod newton;
mod twisted;

use num_traits::Zero;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::PadicScalar;
use crate::radius::{floor_rat, int, Rat};
use crate::scalar::Scalar;

pub use logexp::{padic_exp, padic_log, series_exp, series_log, series_log_composition};
pub use newton::{
    gauss_norm, gauss_norm_flagged, gauss_norm_with_tail, lower_hull, newton_polygon, newton_polygon_with_tail,
    radius_bracket_of_points, radius_bracket_p_block, radius_estimate, radius_estimate_p_block, NewtonPolygon, RadiusBracket,
};
pub use twisted::{
    compose_affine, from_twisted_basis, to_twisted_basis, twisted_derivative, twisted_nodes, DifferenceOperator,
};

#[derive(Clone, Debug)]
pub struct Series<S> {
    center: S,
    min_index: i64,
    coeffs: Vec<S>,
    trunc: Option<i64>,
}

impl<S: Scalar> PartialEq for Series<S> {
    /// Coefficientwise equality; storage layout (leading zeros) is ignored.
    fn eq(&self, other: &Self) -> bool {
        if self.center != other.center || self.trunc != other.trunc {
            return false;
        }
        let lo = self.min_index.min(other.min_index);
        let hi = self.max_index().max(other.max_index());
        (lo..=hi).all(|n| self.coeff(n) == other.coeff(n))
    }
}

/// Extrapolation of the dropped tail of a truncated series: the coefficient of
/// index `n > M` is modelled as having valuation `b + s·(n − M − 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailModel {
    pub b: Rat,
    pub s: Rat,
}

impl TailModel {
    /// Lower estimate for the valuation of `Σ_{n>M} a_n·C(n,k)·x^{n−k}`-type
    /// tails where each extra power of `u` is multiplied by something of
    /// valuation `e`. The estimate for coefficient `k` is the minimum over
    /// `n > M` of `b + s(n−M−1) + (n−k)e`.
    pub fn mixing_bound(&self, m: i64, k: i64, e: Rat) -> Rat {
        let first = self.b + e * (m + 1 - k);
        if self.s + e >= Rat::zero() {
            first
        } else {
            // decreasing model: look a fixed horizon ahead
            let far = 4 * (m + 1);
            self.b + self.s * (far - m - 1) + e * (far - k)
        }
    }
}

impl<S: Scalar> Series<S> {
    pub fn polynomial(center: S, coeffs: Vec<S>) -> Self {
        let mut s = Series { center, min_index: 0, coeffs, trunc: None };
        s.trim();
        s
    }

    /// Power series known modulo `u^{m+1}`; missing coefficients are zero.
    pub fn truncated(center: S, mut coeffs: Vec<S>, m: i64) -> Self {
        assert!(m >= -1, "truncation order must be at least -1");
        let zero = center.zero_like();
        coeffs.resize((m + 1) as usize, zero);
        Series { center, min_index: 0, coeffs, trunc: Some(m) }
    }

    pub fn laurent(center: S, min_index: i64, mut coeffs: Vec<S>, trunc: Option<i64>) -> Self {
        if let Some(m) = trunc {
            let len = (m - min_index + 1).max(0) as usize;
            let zero = center.zero_like();
            coeffs.resize(len, zero);
        }
        let mut s = Series { center, min_index, coeffs, trunc };
        s.trim();
        s
    }

    pub fn zero(center: S) -> Self {
        Series { center, min_index: 0, coeffs: vec![], trunc: None }
    }

    pub fn constant(center: S, a: S) -> Self {
        Series::polynomial(center, vec![a])
    }

    pub fn one(center: S) -> Self {
        let one = center.one_like();
        Series::constant(center, one)
    }

    /// `a·u^n`.
    pub fn monomial(center: S, a: S, n: i64) -> Self {
        Series::laurent(center, n, vec![a], None)
    }

    /// The coordinate `T = c + u` as a polynomial around `c`.
    pub fn variable(center: S) -> Self {
        let c = center.clone();
        let one = center.one_like();
        Series::polynomial(center, vec![c, one])
    }

    fn trim(&mut self) {
        if self.trunc.is_none() {
            while self.coeffs.last().is_some_and(|a| a.is_zero() && a.is_exact()) {
                self.coeffs.pop();
            }
            if self.coeffs.is_empty() {
                self.min_index = self.min_index.min(0);
            }
        }
    }

    pub fn center(&self) -> &S {
        &self.center
    }

    pub fn min_index(&self) -> i64 {
        self.min_index
    }

    pub fn trunc(&self) -> Option<i64> {
        self.trunc
    }

    pub fn is_polynomial(&self) -> bool {
        self.trunc.is_none()
    }

    pub fn prime(&self) -> u64 {
        self.center.prime()
    }

    /// Highest stored index (the truncation order for truncated series).
    pub fn max_index(&self) -> i64 {
        self.min_index + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[S] {
        &self.coeffs
    }

    /// Coefficient of `u^n`; zero outside the stored range.
    pub fn coeff(&self, n: i64) -> S {
        self.get(n).cloned().unwrap_or_else(|| self.center.zero_like())
    }

    pub fn get(&self, n: i64) -> Option<&S> {
        if n < self.min_index {
            return None;
        }
        self.coeffs.get((n - self.min_index) as usize)
    }

    /// Index of the first coefficient that is not an exact zero.
    pub fn order_index(&self) -> i64 {
        match self.coeffs.iter().position(|a| !(a.is_zero() && a.is_exact())) {
            Some(i) => self.min_index + i as i64,
            None => self.trunc.map_or(self.min_index, |m| m + 1),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|a| a.is_zero())
    }

    pub fn is_exact(&self) -> bool {
        self.trunc.is_none() && self.coeffs.iter().all(|a| a.is_exact())
    }

    fn same_center(&self, other: &Self) {
        assert!(self.center == other.center, "series expanded around different centres");
    }

    fn combined_trunc(a: Option<i64>, b: Option<i64>) -> Option<i64> {
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, None) => x,
            (None, y) => y,
        }
    }

    fn lin(&self, other: &Self, negate: bool) -> Self {
        self.same_center(other);
        let trunc = Self::combined_trunc(self.trunc, other.trunc);
        let lo = self.min_index.min(other.min_index);
        let hi = match trunc {
            Some(m) => m,
            None => self.max_index().max(other.max_index()),
        };
        let mut coeffs = Vec::with_capacity((hi - lo + 1).max(0) as usize);
        for n in lo..=hi {
            let c = match (self.get(n), other.get(n)) {
                (Some(a), Some(b)) => {
                    if negate {
                        a.sub_ref(b)
                    } else {
                        a.add_ref(b)
                    }
                }
                (Some(a), None) => a.clone(),
                (None, Some(b)) => {
                    if negate {
                        b.neg_ref()
                    } else {
                        b.clone()
                    }
                }
                (None, None) => self.center.zero_like(),
            };
            coeffs.push(c);
        }
        Series::laurent(self.center.clone(), lo, coeffs, trunc)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.lin(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.lin(other, true)
    }

    pub fn neg(&self) -> Self {
        self.map(|a| a.neg_ref())
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|a| a.mul_ref(s))
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(f).collect();
        out.trim();
        out
    }

    pub fn try_map(&self, f: impl Fn(&S) -> Result<S>) -> Result<Self> {
        let mut out = self.clone();
        out.coeffs = self.coeffs.iter().map(f).collect::<Result<_>>()?;
        out.trim();
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_center(other);
        let lo = self.min_index + other.min_index;
        let trunc = match (self.trunc, other.trunc) {
            (Some(a), Some(b)) => Some((a + other.order_index()).min(b + self.order_index())),
            (Some(a), None) => Some(a + other.order_index()),
            (None, Some(b)) => Some(b + self.order_index()),
            (None, None) => None,
        };
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return match trunc {
                Some(m) => Series::laurent(self.center.clone(), lo, vec![], Some(m)),
                None => Series::zero(self.center.clone()),
            };
        }
        let hi = match trunc {
            Some(m) => m,
            None => self.max_index() + other.max_index(),
        };
        let len = (hi - lo + 1).max(0) as usize;
        let mut acc: Vec<Option<S>> = vec![None; len];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() && a.is_exact() {
                continue;
            }
            let max_j = (len as i64 - i as i64).min(other.coeffs.len() as i64);
            for j in 0..max_j.max(0) as usize {
                let b = &other.coeffs[j];
                if b.is_zero() && b.is_exact() {
                    continue;
                }
                let t = a.mul_ref(b);
                let slot = &mut acc[i + j];
                *slot = Some(match slot.take() {
                    Some(s) => s.add_ref(&t),
                    None => t,
                });
            }
        }
        let zero = self.center.zero_like();
        let coeffs = acc.into_iter().map(|c| c.unwrap_or_else(|| zero.clone())).collect();
        Series::laurent(self.center.clone(), lo, coeffs, trunc)
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Series::one(self.center.clone());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `d/du`.
    pub fn derivative(&self) -> Self {
        let lo = if self.min_index >= 0 { 0 } else { self.min_index - 1 };
        let trunc = self.trunc.map(|m| m - 1);
        let mut coeffs = Vec::new();
        let hi = match trunc {
            Some(m) => m,
            None => self.max_index() - 1,
        };
        for n in lo..=hi {
            let k = n + 1;
            coeffs.push(self.coeff(k).mul_ref(&self.center.from_i64_like(k)));
        }
        Series::laurent(self.center.clone(), lo, coeffs, trunc)
    }

    /// Multiply by `u^k`.
    pub fn shift(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.min_index += k;
        out.trunc = self.trunc.map(|m| m + k);
        out
    }

    /// Forget everything above `u^m`.
    pub fn truncate_to(&self, m: i64) -> Self {
        let m = match self.trunc {
            Some(t) => t.min(m),
            None => m,
        };
        let keep = (m - self.min_index + 1).max(0) as usize;
        let mut coeffs: Vec<S> = self.coeffs.iter().take(keep).cloned().collect();
        coeffs.resize(keep, self.center.zero_like());
        Series { center: self.center.clone(), min_index: self.min_index, coeffs, trunc: Some(m) }
    }

    /// Lower every coefficient's absolute precision to at most `n`.
    pub fn cap_precision(&self, n: i64) -> Self {
        self.map(|a| a.with_abs_cap(n))
    }

    /// Smallest absolute precision among coefficients (`None` when all exact).
    pub fn min_precision(&self) -> Option<i64> {
        self.coeffs.iter().filter_map(|a| a.abs_precision()).min()
    }

    /// Smallest valuation bound among coefficients up to index `upto`.
    pub fn min_valuation_upto(&self, upto: i64) -> Option<i64> {
        (self.min_index..=upto.min(self.max_index())).filter_map(|n| self.get(n).and_then(|a| a.valuation_bound())).min()
    }

    /// Multiplicative inverse of a power series with invertible constant term,
    /// to order `order` (or the truncation order, whichever is smaller).
    pub fn inverse(&self, order: i64) -> Result<Self> {
        if self.min_index < 0 {
            return Err(Error::Invalid("inverse of a Laurent tail is not supported".into()));
        }
        let m = match self.trunc {
            Some(t) => t.min(order),
            None => order,
        };
        let a0 = self.coeff(0);
        let mut b: Vec<S> = Vec::with_capacity((m + 1).max(0) as usize);
        for n in 0..=m {
            let mut s = if n == 0 { a0.one_like() } else { a0.zero_like() };
            for k in 1..=n {
                if let Some(a) = self.get(k) {
                    if a.is_zero() && a.is_exact() {
                        continue;
                    }
                    s = s.sub_ref(&a.mul_ref(&b[(n - k) as usize]));
                }
            }
            b.push(s.try_div(&a0)?);
        }
        Ok(Series::truncated(self.center.clone(), b, m))
    }

    /// `self / other` to order `order`.
    pub fn div(&self, other: &Self, order: i64) -> Result<Self> {
        let inv = other.inverse(order)?;
        Ok(self.mul(&inv).truncate_to(order))
    }

    /// Tail extrapolation for truncated series. Over the upper half `[M/2, M]`
    /// the slope is the smallest hull slope and the line of that slope is
    /// pushed down to support every point; segments near `M` are left out
    /// since truncation bends the hull upwards there.
    pub fn tail_model(&self) -> Option<TailModel> {
        let m = self.trunc?;
        let pts: Vec<(i64, Rat)> = (self.min_index..=m)
            .filter_map(|n| self.get(n).and_then(|a| a.valuation_bound()).map(|v| (n, int(v))))
            .collect();
        if pts.is_empty() {
            return None;
        }
        let upper: Vec<(i64, Rat)> = pts.iter().copied().filter(|&(n, _)| 2 * n >= m).collect();
        let window = if upper.len() >= 2 { upper } else { pts };
        let hull = lower_hull(&window);
        // chord of the hull across the window: a single flat step should not
        // flatten the whole extrapolation, and b below stays a lower envelope
        let s = match (hull.first(), hull.last()) {
            (Some(a), Some(z)) if z.0 > a.0 => (z.1 - a.1) / (z.0 - a.0),
            _ => Rat::zero(),
        };
        let b = window.iter().map(|&(n, v)| v + s * (m + 1 - n)).min()?;
        Some(TailModel { b, s })
    }

    /// `Σ a_n (x − c)^n`, with the dropped tail folded into the precision.
    pub fn evaluate(&self, x: &S) -> Result<S> {
        let u = x.sub_ref(&self.center);
        if self.min_index < 0 {
            return Err(Error::Invalid("evaluation of Laurent series is not supported".into()));
        }
        let mut acc = self.center.zero_like();
        for a in self.coeffs.iter().rev() {
            acc = acc.mul_ref(&u).add_ref(a);
        }
        if let (Some(m), Some(tail)) = (self.trunc, self.tail_model()) {
            let e = match u.valuation() {
                Some(v) => int(v),
                None => return Ok(acc),
            };
            let bound = tail.mixing_bound(m, 0, e);
            acc = acc.with_abs_cap(floor_rat(&bound));
        }
        Ok(acc)
    }

    /// Coefficientwise agreement valuation with another series over the
    /// common index range (capped by precision); `None` if they agree exactly.
    pub fn agreement(&self, other: &Self, upto: i64) -> Option<i64> {
        let lo = self.min_index.min(other.min_index);
        let mut worst: Option<i64> = None;
        for n in lo..=upto {
            let d = self.coeff(n).sub_ref(&other.coeff(n));
            let v = d.valuation_bound();
            worst = match (worst, v) {
                (Some(w), Some(v)) => Some(w.min(v)),
                (w, None) => w,
                (None, v) => v,
            };
        }
        worst
    }

    /// Same coefficients, re-expanded as if around a different (equal) centre
    /// value; only used to align exact and inexact representatives of `c`.
    pub fn with_center(&self, center: S) -> Self {
        let mut out = self.clone();
        out.center = center;
        out
    }
}

impl Series<PadicScalar> {
    pub fn to_json(&self) -> Value {
        json!({
            "p": self.prime(),
            "center": self.center.to_json(),
            "min_index": self.min_index,
            "M": self.trunc,
            "coeffs": self.coeffs.iter().map(|a| a.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let center = PadicScalar::from_json(v.get("center").ok_or_else(|| Error::Parse("series: missing center".into()))?)?;
        let min_index = v.get("min_index").and_then(Value::as_i64).unwrap_or(0);
        let trunc = match v.get("M") {
            None | Some(Value::Null) => None,
            Some(x) => Some(x.as_i64().ok_or_else(|| Error::Parse("series: M".into()))?),
        };
        let coeffs = v
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("series: missing coeffs".into()))?
            .iter()
            .map(PadicScalar::from_json)
            .collect::<Result<Vec<_>>>()?;
        if coeffs.iter().any(|a| a.p() != center.p()) {
            return Err(Error::Parse("series: coefficients over different primes".into()));
        }
        Ok(Series::laurent(center, min_index, coeffs, trunc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::RationalScalar;

    fn rs(n: i64) -> RationalScalar {
        RationalScalar::from_i64(3, n)
    }

    fn poly(c: &[i64]) -> Series<RationalScalar> {
        Series::polynomial(rs(0), c.iter().map(|&x| rs(x)).collect())
    }

    #[test]
    fn polynomial_product() {
        let f = poly(&[1, 1]);
        let g = poly(&[-1, 1]);
        assert_eq!(f.mul(&g), poly(&[-1, 0, 1]));
        assert_eq!(f.sub(&f), poly(&[]));
    }

    #[test]
    fn truncated_product_order() {
        let f = Series::truncated(rs(0), vec![rs(1), rs(1), rs(1)], 2);
        let g = poly(&[0, 1]);
        let h = f.mul(&g);
        assert_eq!(h.trunc(), Some(3));
        assert_eq!(h.coeff(3), rs(1));
    }

    #[test]
    fn inverse_of_geometric() {
        let f = poly(&[1, -1]);
        let inv = f.inverse(10).unwrap();
        for n in 0..=10 {
            assert_eq!(inv.coeff(n), rs(1));
        }
    }

    #[test]
    fn derivative_and_shift() {
        let f = poly(&[5, 3, 2]);
        assert_eq!(f.derivative(), poly(&[3, 4]));
        let g = f.shift(-1);
        assert_eq!(g.min_index(), -1);
        assert_eq!(g.derivative().coeff(-2), rs(-5));
    }
}
