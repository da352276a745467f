//! q-integers, q-factorials, twisted powers and the constants `ω`, `ω_q`.

use crate::radius::{int, rat, LogRadius, Rat};
use crate::scalar::Scalar;
use crate::series::{twisted_nodes, DifferenceOperator, Series};

/// `[n]_q = 1 + q + … + q^{n−1}`.
pub fn q_int<S: Scalar>(n: u64, q: &S) -> S {
    let mut acc = q.zero_like();
    let mut pow = q.one_like();
    for _ in 0..n {
        acc = acc.add_ref(&pow);
        pow = pow.mul_ref(q);
    }
    acc
}

/// `[n]_q! = [1]_q⋯[n]_q`, with `[0]_q! = 1`.
pub fn q_factorial<S: Scalar>(n: u64, q: &S) -> S {
    let mut acc = q.one_like();
    let mut qint = q.zero_like();
    let mut pow = q.one_like();
    for _ in 0..n {
        qint = qint.add_ref(&pow);
        pow = pow.mul_ref(q);
        acc = acc.mul_ref(&qint);
    }
    acc
}

/// Valuations `v([k]_q!)` for `k = 0..=n`, accumulated from `v([k]_q)`.
pub fn q_factorial_valuations<S: Scalar>(n: u64, q: &S) -> Vec<Option<i64>> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = Some(0i64);
    out.push(acc);
    let mut qint = q.zero_like();
    let mut pow = q.one_like();
    for _ in 0..n {
        qint = qint.add_ref(&pow);
        pow = pow.mul_ref(q);
        acc = match (acc, qint.valuation()) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        out.push(acc);
    }
    out
}

#[derive(Clone, Debug)]
pub struct QContext<S> {
    pub p: u64,
    pub q: S,
    pub h: S,
    /// Smallest `κ ≥ 1` with `|q^κ − 1| < ω`, if one exists below the search
    /// bound.
    pub kappa: Option<u64>,
}

impl<S: Scalar> QContext<S> {
    pub fn new(q: S, h: S) -> Self {
        let p = q.prime();
        let w = rat(1, p as i64 - 1);
        let mut kappa = None;
        let mut pow = q.clone();
        for k in 1..=(p * p) {
            let d = pow.sub_ref(&q.one_like());
            let ok = match d.valuation() {
                None => true,
                Some(v) => int(v) > w,
            };
            if ok {
                kappa = Some(k);
                break;
            }
            pow = pow.mul_ref(&q);
        }
        QContext { p, q, h, kappa }
    }

    pub fn is_root_of_unity(&self) -> bool {
        // the only root of unity with |q − 1| < 1 in Q_p, p odd, is 1
        q_is_one(&self.q)
    }
}

pub fn q_is_one<S: Scalar>(q: &S) -> bool {
    q.sub_ref(&q.one_like()).is_zero()
}

/// `ω = p^{−1/(p−1)}`.
pub fn omega(p: u64) -> LogRadius {
    LogRadius::omega(p)
}

/// `ω_q = ([κ]_q·ω)^{1/κ}` given `κ` and the exponent of `|[κ]_q|`.
pub fn omega_q_formula(p: u64, kappa: u64, v_qint_kappa: Rat) -> LogRadius {
    if kappa == 1 {
        return omega(p);
    }
    LogRadius::Finite((v_qint_kappa + rat(1, p as i64 - 1)) / kappa as i64)
}

pub fn omega_q<S: Scalar>(ctx: &QContext<S>) -> LogRadius {
    match ctx.kappa {
        Some(1) | None => omega(ctx.p),
        Some(k) => {
            let v = q_int(k, &ctx.q).valuation().unwrap_or(0);
            omega_q_formula(ctx.p, k, int(v))
        }
    }
}

/// `(T − c)^{[n]}_{q,h} = ∏_{k<n} (T − σ^k(c))`, expanded around `c`, kept
/// modulo `(T − c)^{M+1}` when `n > M`.
pub fn twisted_power<S: Scalar>(n: usize, c: &S, sigma: &DifferenceOperator<S>, m: i64) -> Series<S> {
    let nodes = twisted_nodes(sigma, c, n);
    let mut acc = Series::one(c.clone());
    for d in &nodes {
        let factor = Series::polynomial(c.clone(), vec![d.neg_ref(), c.one_like()]);
        acc = acc.mul(&factor);
    }
    if n as i64 > m {
        acc.truncate_to(m)
    } else {
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicScalar;
    use crate::scalar::{factorial_valuation, RationalScalar};
    use crate::series::twisted_derivative;

    #[test]
    fn q_integer_examples() {
        let one = RationalScalar::from_i64(3, 1);
        assert_eq!(q_int(5, &one), RationalScalar::from_i64(3, 5));
        assert_eq!(q_factorial(5, &one), RationalScalar::from_i64(3, 120));
        assert_eq!(q_factorial(0, &one), one);
        let two = RationalScalar::from_i64(3, 2);
        assert_eq!(q_int(3, &two), RationalScalar::from_i64(3, 7));
        let q = PadicScalar::exact_i64(3, 4);
        assert_eq!(q_int(3, &q).valuation(), Some(1));
    }

    #[test]
    fn omega_q_cases() {
        let q = PadicScalar::exact_i64(3, 10);
        let ctx = QContext::new(q.clone(), q.zero_like());
        assert_eq!(ctx.kappa, Some(1));
        assert_eq!(omega_q(&ctx), LogRadius::Finite(rat(1, 2)));
        let one = QContext::new(PadicScalar::exact_i64(5, 1), PadicScalar::exact_i64(5, 0));
        assert_eq!(omega_q(&one), LogRadius::Finite(rat(1, 4)));
        assert!(one.is_root_of_unity());
        // synthetic κ = 2 with |[2]_q| = p^{-1/2}, p = 3
        assert_eq!(omega_q_formula(3, 2, rat(1, 2)), LogRadius::Finite(rat(1, 2)));
        assert_eq!(omega_q_formula(5, 3, int(1)), LogRadius::Finite(rat(5, 12)));
    }

    #[test]
    fn q_factorial_growth_matches_omega() {
        let q = PadicScalar::exact_i64(3, 4);
        let vals = q_factorial_valuations(200, &q);
        for n in [27u64, 81, 200] {
            assert_eq!(vals[n as usize], Some(factorial_valuation(n, 3)));
        }
        // v([3^k]_q!)/3^k → 1/2
        assert_eq!(int(vals[81].unwrap()) / 81 - rat(1, 2), rat(-1, 162));
    }

    #[test]
    fn twisted_power_examples() {
        let r = |n| RationalScalar::from_i64(3, n);
        let s = DifferenceOperator::new(r(1), r(3)).unwrap();
        assert_eq!(twisted_power(0, &r(0), &s, 10), Series::one(r(0)));
        let t2 = twisted_power(2, &r(0), &s, 10);
        assert_eq!(t2, Series::polynomial(r(0), vec![r(0), r(-3), r(1)]));
        let plain = DifferenceOperator::new(r(4), r(0)).unwrap();
        assert_eq!(twisted_power(3, &r(0), &plain, 10), Series::monomial(r(0), r(1), 3));
        // d(P_n) = [n]_q P_{n−1}
        let sig = DifferenceOperator::new(r(10), r(6)).unwrap();
        let c = r(2);
        for n in 1..8 {
            let lhs = twisted_derivative(&twisted_power(n, &c, &sig, 20), &sig).unwrap();
            let rhs = twisted_power(n - 1, &c, &sig, 20).scale(&q_int(n as u64, &r(10)));
            assert_eq!(lhs, rhs, "n={n}");
        }
    }
}
