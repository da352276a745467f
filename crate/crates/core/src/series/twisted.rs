//! The affine automorphisms `σ_{q,h}: T ↦ qT + h` and the twisted calculus
//! attached to them.

use super::Series;
use crate::error::{Error, Result};
use crate::radius::{floor_rat, int, Rat};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct DifferenceOperator<S> {
    q: S,
    h: S,
}

impl<S: Scalar> DifferenceOperator<S> {
    /// Requires `|q − 1| < 1`.
    pub fn new(q: S, h: S) -> Result<Self> {
        let qm1 = q.sub_ref(&q.one_like());
        if let Some(v) = qm1.valuation() {
            if v < 1 {
                return Err(Error::Invalid(format!("|q − 1| must be < 1, got valuation {v}")));
            }
        }
        Ok(DifferenceOperator { q, h })
    }

    pub fn q(&self) -> &S {
        &self.q
    }

    pub fn h(&self) -> &S {
        &self.h
    }

    pub fn is_identity(&self) -> bool {
        let qm1 = self.q.sub_ref(&self.q.one_like());
        qm1.is_zero() && self.h.is_zero()
    }

    /// `σ(c) = qc + h`.
    pub fn apply(&self, c: &S) -> S {
        self.q.mul_ref(c).add_ref(&self.h)
    }

    /// `δ(c) = σ(c) − c = (q − 1)c + h`.
    pub fn delta_at(&self, c: &S) -> S {
        self.apply(c).sub_ref(c)
    }

    /// `(q − 1)T + h` expanded around `c`.
    pub fn delta_series(&self, c: &S) -> Series<S> {
        let qm1 = self.q.sub_ref(&self.q.one_like());
        Series::polynomial(c.clone(), vec![self.delta_at(c), qm1])
    }

    /// Composition of ring endomorphisms: `self ∘ other` sends `T` to
    /// `other(T)` evaluated at `self(T)`, i.e. `σ_{q₁q₂, q₂h₁ + h₂}`.
    pub fn compose(&self, other: &Self) -> Self {
        DifferenceOperator { q: self.q.mul_ref(&other.q), h: other.q.mul_ref(&self.h).add_ref(&other.h) }
    }

    /// `σ^n = σ_{q^n, [n]_q h}`.
    pub fn iterate(&self, n: u64) -> Self {
        let mut qn = self.q.one_like();
        let mut qint = self.q.zero_like();
        for _ in 0..n {
            qint = qint.add_ref(&qn);
            qn = qn.mul_ref(&self.q);
        }
        DifferenceOperator { q: qn, h: qint.mul_ref(&self.h) }
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&S) -> T) -> DifferenceOperator<T> {
        DifferenceOperator { q: f(&self.q), h: f(&self.h) }
    }
}

/// `d_k = σ^k(c) − c` for `k < n`.
pub fn twisted_nodes<S: Scalar>(sigma: &DifferenceOperator<S>, c: &S, n: usize) -> Vec<S> {
    let delta = sigma.delta_at(c);
    let mut out = Vec::with_capacity(n);
    let mut d = c.zero_like();
    for _ in 0..n {
        out.push(d.clone());
        d = sigma.q().mul_ref(&d).add_ref(&delta);
    }
    out
}

fn mixing_valuation<S: Scalar>(delta: &S) -> Option<Rat> {
    if delta.is_zero() && delta.is_exact() {
        None
    } else {
        delta.valuation_bound().map(int)
    }
}

/// Cap coefficient precisions of a truncated result for the unknown tail of
/// `source`, which leaks into index `k` through `M + 1 − k` factors of
/// valuation at least `e`.
fn apply_tail_caps<S: Scalar>(coeffs: &mut [S], source: &Series<S>, e: Option<Rat>) {
    let (m, e) = match (source.trunc(), e) {
        (Some(m), Some(e)) => (m, e),
        _ => return,
    };
    let model = match source.tail_model() {
        Some(t) => t,
        None => return,
    };
    for (k, a) in coeffs.iter_mut().enumerate() {
        let cap = floor_rat(&model.mixing_bound(m, k as i64, e));
        *a = a.with_abs_cap(cap);
    }
}

/// `f(σ(T))` re-expanded around the same centre.
pub fn compose_affine<S: Scalar>(f: &Series<S>, sigma: &DifferenceOperator<S>) -> Result<Series<S>> {
    if f.min_index() < 0 {
        return Err(Error::Invalid("affine substitution into a Laurent tail is not supported".into()));
    }
    let c = f.center();
    let delta = sigma.delta_at(c);
    let q = sigma.q();
    let top = f.max_index();
    if top < 0 {
        return Ok(f.clone());
    }
    let len = match f.trunc() {
        Some(m) => (m + 1) as usize,
        None => (top + 1) as usize,
    };
    let mut acc: Vec<S> = Vec::with_capacity(len);
    // Horner in (q·u + δ)
    for n in (0..=top).rev() {
        let mut next = Vec::with_capacity((acc.len() + 1).min(len));
        for k in 0..(acc.len() + 1).min(len) {
            let mut t = if k < acc.len() { acc[k].mul_ref(&delta) } else { c.zero_like() };
            if k >= 1 {
                t = t.add_ref(&acc[k - 1].mul_ref(q));
            }
            next.push(t);
        }
        if next.is_empty() {
            next.push(c.zero_like());
        }
        next[0] = next[0].add_ref(&f.coeff(n));
        acc = next;
    }
    apply_tail_caps(&mut acc, f, mixing_valuation(&delta));
    Ok(match f.trunc() {
        Some(m) => Series::truncated(c.clone(), acc, m),
        None => Series::polynomial(c.clone(), acc),
    })
}

/// Coefficients `ã_n` with `f = Σ ã_n (T − c)^{[n]}_{q,h}`.
pub fn to_twisted_basis<S: Scalar>(f: &Series<S>, sigma: &DifferenceOperator<S>) -> Result<Vec<S>> {
    if f.min_index() < 0 {
        return Err(Error::Invalid("twisted expansion of a Laurent tail is not supported".into()));
    }
    let c = f.center();
    let top = f.max_index();
    if top < 0 {
        return Ok(vec![]);
    }
    let nodes = twisted_nodes(sigma, c, (top + 1) as usize);
    let mut work: Vec<S> = (0..=top).map(|n| f.coeff(n)).collect();
    let mut out = Vec::with_capacity(work.len());
    for d in nodes.iter() {
        // synthetic division of `work` by (u − d): quotient and remainder
        let deg = work.len() - 1;
        let mut quotient = vec![c.zero_like(); deg];
        let mut carry = work[deg].clone();
        for i in (0..deg).rev() {
            quotient[i] = carry.clone();
            carry = work[i].add_ref(&carry.mul_ref(d));
        }
        out.push(carry);
        if quotient.is_empty() {
            break;
        }
        work = quotient;
    }
    apply_tail_caps(&mut out, f, mixing_valuation(&sigma.delta_at(c)));
    Ok(out)
}

/// Inverse of [`to_twisted_basis`]. `trunc` is the truncation order of the
/// resulting series (`None` for an exact polynomial).
pub fn from_twisted_basis<S: Scalar>(
    coeffs: &[S],
    sigma: &DifferenceOperator<S>,
    c: &S,
    trunc: Option<i64>,
) -> Series<S> {
    if coeffs.is_empty() {
        return match trunc {
            Some(m) => Series::truncated(c.clone(), vec![], m),
            None => Series::zero(c.clone()),
        };
    }
    let nodes = twisted_nodes(sigma, c, coeffs.len());
    let mut acc: Vec<S> = vec![coeffs[coeffs.len() - 1].clone()];
    for k in (0..coeffs.len() - 1).rev() {
        // acc·(u − d_k) + ã_k
        let d = &nodes[k];
        let mut next = vec![c.zero_like(); acc.len() + 1];
        for (i, a) in acc.iter().enumerate() {
            next[i + 1] = next[i + 1].add_ref(a);
            next[i] = next[i].sub_ref(&a.mul_ref(d));
        }
        next[0] = next[0].add_ref(&coeffs[k]);
        acc = next;
    }
    match trunc {
        Some(m) => {
            let source = Series::truncated(c.clone(), coeffs.to_vec(), m);
            let mut kept: Vec<S> = acc.into_iter().take((m + 1) as usize).collect();
            apply_tail_caps(&mut kept, &source, mixing_valuation(&sigma.delta_at(c)));
            Series::truncated(c.clone(), kept, m)
        }
        None => Series::polynomial(c.clone(), acc),
    }
}

/// `d_{q,h}(f) = (f∘σ − f)/((q−1)T + h)`, computed through the twisted basis.
pub fn twisted_derivative<S: Scalar>(f: &Series<S>, sigma: &DifferenceOperator<S>) -> Result<Series<S>> {
    if sigma.is_identity() {
        return Err(Error::Degenerate("(q, h) = (1, 0): use the ordinary derivative".into()));
    }
    let c = f.center();
    let a = to_twisted_basis(f, sigma)?;
    let q = sigma.q();
    let mut qint = c.zero_like();
    let mut qpow = c.one_like();
    let mut b = Vec::with_capacity(a.len().saturating_sub(1));
    for (n, an) in a.iter().enumerate() {
        // qint = [n]_q
        if n >= 1 {
            b.push(an.mul_ref(&qint));
        }
        qint = qint.add_ref(&qpow);
        qpow = qpow.mul_ref(q);
    }
    Ok(from_twisted_basis(&b, sigma, c, f.trunc().map(|m| m - 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::RationalScalar;

    fn r(n: i64) -> RationalScalar {
        RationalScalar::from_i64(3, n)
    }

    fn poly(c: &[i64]) -> Series<RationalScalar> {
        Series::polynomial(r(0), c.iter().map(|&x| r(x)).collect())
    }

    #[test]
    fn substitution_examples() {
        let h = r(3);
        let sigma = DifferenceOperator::new(r(1), h).unwrap();
        let t2 = poly(&[0, 0, 1]);
        assert_eq!(compose_affine(&t2, &sigma).unwrap(), poly(&[9, 6, 1]));
        let s2 = DifferenceOperator::new(r(4), r(3)).unwrap();
        assert_eq!(compose_affine(&poly(&[0, 1]), &s2).unwrap(), poly(&[3, 4]));
    }

    #[test]
    fn twisted_square_with_pure_shift() {
        let sigma = DifferenceOperator::new(r(1), r(3)).unwrap();
        let a = to_twisted_basis(&poly(&[0, 0, 1]), &sigma).unwrap();
        assert_eq!(a, vec![r(0), r(3), r(1)]);
        let back = from_twisted_basis(&a, &sigma, &r(0), None);
        assert_eq!(back, poly(&[0, 0, 1]));
    }

    #[test]
    fn twisted_derivative_examples() {
        let sigma = DifferenceOperator::new(r(1), r(3)).unwrap();
        assert_eq!(twisted_derivative(&poly(&[0, 0, 1]), &sigma).unwrap(), poly(&[3, 2]));
        assert_eq!(twisted_derivative(&poly(&[7]), &sigma).unwrap(), poly(&[]));
        let q = DifferenceOperator::new(r(4), r(0)).unwrap();
        // d_{q,0}(T³) = [3]_q T² = 21 T²
        assert_eq!(twisted_derivative(&poly(&[0, 0, 0, 1]), &q).unwrap(), poly(&[0, 0, 21]));
        let id = DifferenceOperator::new(r(1), r(0)).unwrap();
        assert!(twisted_derivative(&poly(&[1, 1]), &id).is_err());
    }

    #[test]
    fn iterate_law() {
        let s = DifferenceOperator::new(r(4), r(3)).unwrap();
        let mut it = s.clone();
        for _ in 1..9 {
            it = it.compose(&s);
        }
        assert_eq!(it, s.iterate(9));
    }
}
