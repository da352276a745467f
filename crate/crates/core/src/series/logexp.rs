//! `exp` and `log` of scalars and of power series.

use super::Series;
use crate::error::{Error, Result};
use crate::radius::{rat, Rat};
use crate::scalar::Scalar;

fn log_p_floor(k: u64, p: u64) -> i64 {
    let mut e = 0;
    let mut x = k;
    while x >= p {
        x /= p;
        e += 1;
    }
    e
}

/// `exp(x)` for `v(x) > 1/(p−1)`, to absolute precision `prec`.
pub fn padic_exp<S: Scalar>(x: &S, prec: i64) -> Result<S> {
    let p = x.prime();
    let v = match x.valuation() {
        None => return Ok(x.one_like().with_abs_cap(prec)),
        Some(v) => v,
    };
    let margin = Rat::from_integer(v) - rat(1, p as i64 - 1);
    if margin <= Rat::from_integer(0) {
        return Err(Error::Convergence(format!("exp needs v(x) > 1/(p−1), got v(x) = {v}")));
    }
    let mut acc = x.one_like();
    let mut term = x.one_like();
    let mut n = 1i64;
    loop {
        term = term.mul_ref(x).div_i64(n)?;
        acc = acc.add_ref(&term);
        // every later term has valuation ≥ n·margin
        if margin * n >= Rat::from_integer(prec) {
            break;
        }
        n += 1;
    }
    Ok(acc.with_abs_cap(prec))
}

/// Principal `log(u)` for `|u − 1| < 1`, to absolute precision `prec`.
pub fn padic_log<S: Scalar>(u: &S, prec: i64) -> Result<S> {
    let p = u.prime();
    let x = u.sub_ref(&u.one_like());
    let v = match x.valuation() {
        None => return Ok(u.zero_like().with_abs_cap(prec)),
        Some(v) => v,
    };
    if v < 1 {
        return Err(Error::Convergence(format!("log needs |u − 1| < 1, got v(u − 1) = {v}")));
    }
    let mut acc = u.zero_like();
    let mut pow = u.one_like();
    let mut k: u64 = 1;
    loop {
        pow = pow.mul_ref(&x);
        let term = pow.div_i64(k as i64)?;
        acc = if k % 2 == 1 { acc.add_ref(&term) } else { acc.sub_ref(&term) };
        let next = k + 1;
        if (next as i64) * v - log_p_floor(next, p) >= prec && next as i64 * v >= prec {
            break;
        }
        k = next;
    }
    Ok(acc.with_abs_cap(prec))
}

fn working_order<S: Scalar>(f: &Series<S>, order: i64) -> i64 {
    match f.trunc() {
        Some(m) => m.min(order),
        None => order,
    }
}

fn scalar_precision<S: Scalar>(a: &S, fallback: i64) -> i64 {
    a.abs_precision().unwrap_or(fallback)
}

/// `exp(f)` for a power series whose constant term `a` has `v(a) > 1/(p−1)`.
/// `prec` is used for `exp(a)` when `a` is exact.
pub fn series_exp<S: Scalar>(f: &Series<S>, order: i64, prec: i64) -> Result<Series<S>> {
    if f.min_index() < 0 {
        return Err(Error::Invalid("exp of a Laurent tail".into()));
    }
    let m = working_order(f, order);
    let a0 = f.coeff(0);
    let e0 = if a0.is_zero() { a0.one_like() } else { padic_exp(&a0, scalar_precision(&a0, prec))? };
    // n·E_n = Σ_{k=1}^{n} k·f_k·E_{n−k}
    let mut e: Vec<S> = vec![e0];
    for n in 1..=m {
        let mut s = a0.zero_like();
        for k in 1..=n {
            let fk = f.coeff(k);
            if fk.is_zero() && fk.is_exact() {
                continue;
            }
            s = s.add_ref(&fk.mul_ref(&e[(n - k) as usize]).mul_ref(&a0.from_i64_like(k)));
        }
        e.push(s.div_i64(n)?);
    }
    Ok(Series::truncated(f.center().clone(), e, m))
}

/// `log(f)` for a power series with `|f(c) − 1| < 1`, via `∫ f′/f`.
pub fn series_log<S: Scalar>(f: &Series<S>, order: i64, prec: i64) -> Result<Series<S>> {
    if f.min_index() < 0 {
        return Err(Error::Invalid("log of a Laurent tail".into()));
    }
    let m = working_order(f, order);
    let u = f.coeff(0);
    let l0 = padic_log(&u, scalar_precision(&u, prec))?;
    let ratio = f.derivative().div(&f.truncate_to(m), m - 1)?;
    let mut coeffs = vec![l0];
    for n in 0..m {
        coeffs.push(ratio.coeff(n).div_i64(n + 1)?);
    }
    Ok(Series::truncated(f.center().clone(), coeffs, m))
}

/// `log(f) = log(u) + Σ_{k≥1} (−1)^{k+1} g^k / k` with `g = f/u − 1`, by
/// direct composition with the logarithm series.
pub fn series_log_composition<S: Scalar>(f: &Series<S>, order: i64, prec: i64) -> Result<Series<S>> {
    if f.min_index() < 0 {
        return Err(Error::Invalid("log of a Laurent tail".into()));
    }
    let m = working_order(f, order);
    let u = f.coeff(0);
    let l0 = padic_log(&u, scalar_precision(&u, prec))?;
    let g = f.truncate_to(m).try_map(|a| a.try_div(&u))?.sub(&Series::one(f.center().clone()));
    let mut acc = Series::truncated(f.center().clone(), vec![l0], m);
    let mut pow = Series::one(f.center().clone());
    for k in 1..=m {
        pow = pow.mul(&g).truncate_to(m);
        let term = pow.try_map(|a| a.div_i64(k))?;
        acc = if k % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicScalar;
    use crate::scalar::RationalScalar;

    #[test]
    fn exp_log_inverse_pair() {
        let one = RationalScalar::from_i64(3, 1);
        let zero = one.zero_like();
        let f = Series::polynomial(zero.clone(), vec![one.clone(), one.clone()]);
        let l = series_log(&f, 12, 0).unwrap();
        let l2 = series_log_composition(&f, 12, 0).unwrap();
        assert_eq!(l, l2);
        let e = series_exp(&l, 12, 0).unwrap();
        assert_eq!(e.truncate_to(12), f.truncate_to(12));
    }

    #[test]
    fn scalar_exp_log() {
        let x = PadicScalar::exact_int(3, 9, 30);
        let e = padic_exp(&x, 30).unwrap();
        let back = padic_log(&e, 30).unwrap();
        assert!(back.sub_ref(&x).valuation_bound().unwrap() >= 28);
        let bad = PadicScalar::exact_int(3, 1, 30);
        assert!(padic_exp(&bad, 30).is_err());
    }
}
