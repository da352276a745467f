use padic_confluence::qcalc::{q_factorial_valuations, q_int};
use padic_confluence::radius::Rat;
use padic_confluence::scalar::factorial_valuation;
use padic_confluence::series::{newton_polygon, padic_exp, padic_log};
use padic_confluence::{padic_from_rational, ExactSeries, PadicScalar, RationalScalar, Scalar, Series};
use proptest::prelude::*;

const PRIMES: [u64; 3] = [3, 5, 7];

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(PRIMES.to_vec())
}

/// (slope, horizontal length) pairs of a Newton polygon, merged by slope.
fn slope_profile(vertices: &[(i64, Rat)]) -> Vec<(Rat, i64)> {
    let mut out: Vec<(Rat, i64)> = Vec::new();
    for w in vertices.windows(2) {
        let len = w[1].0 - w[0].0;
        let s = (w[1].1 - w[0].1) / len;
        out.push((s, len));
    }
    out
}

fn merge(mut a: Vec<(Rat, i64)>) -> Vec<(Rat, i64)> {
    a.sort();
    let mut out: Vec<(Rat, i64)> = Vec::new();
    for (s, l) in a {
        match out.last_mut() {
            Some(last) if last.0 == s => last.1 += l,
            _ => out.push((s, l)),
        }
    }
    out
}

fn exact_poly(p: u64, coeffs: &[i64]) -> ExactSeries {
    let c = RationalScalar::from_i64(p, 0);
    Series::polynomial(c, coeffs.iter().map(|&a| RationalScalar::from_i64(p, a)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuation_is_additive(p in prime(), a in -10_000i64..10_000, b in -10_000i64..10_000) {
        prop_assume!(a != 0 && b != 0);
        let x = PadicScalar::exact_int(p, a, 40);
        let y = PadicScalar::exact_int(p, b, 40);
        prop_assert_eq!(x.mul_ref(&y).valuation(), Some(x.valuation().unwrap() + y.valuation().unwrap()));
    }

    #[test]
    fn rational_embedding_round_trip(p in prime(), a in -500i64..500, b in 1i64..500) {
        prop_assume!(b % p as i64 != 0);
        let x = padic_from_rational(a, b, p, 30).unwrap();
        let back = x.mul_ref(&PadicScalar::exact_int(p, b, 30)).sub_ref(&PadicScalar::exact_int(p, a, 30));
        prop_assert!(back.is_zero());
    }

    #[test]
    fn distributive_to_precision(p in prime(), a in -999i64..999, b in -999i64..999, c in 1i64..999) {
        let prec = 25;
        let x = padic_from_rational(a, c, p, prec);
        prop_assume!(x.is_ok());
        let x = x.unwrap();
        let y = PadicScalar::exact_int(p, b, prec);
        let z = padic_from_rational(1, 1 + p as i64 * c, p, prec).unwrap();
        let lhs = x.add_ref(&y).mul_ref(&z);
        let rhs = x.mul_ref(&z).add_ref(&y.mul_ref(&z));
        prop_assert!(lhs.sub_ref(&rhs).is_zero());
    }

    #[test]
    fn log_inverts_exp(p in prime(), k in 1i64..200) {
        let prec = 20;
        let x = PadicScalar::exact_int(p, p as i64 * k, prec);
        let e = padic_exp(&x, prec).unwrap();
        let l = padic_log(&e, prec).unwrap();
        prop_assert!(l.sub_ref(&x).is_zero(), "{:?}", l.sub_ref(&x));
    }

    #[test]
    fn q_factorial_matches_factorial_for_q_one_plus_p(p in prime(), n in 1u64..60) {
        // v([k]_q) = v(k) when v(q − 1) = 1
        let q = PadicScalar::exact_int(p, 1 + p as i64, 80);
        let vals = q_factorial_valuations(n, &q);
        for (k, v) in vals.iter().enumerate() {
            prop_assert_eq!(*v, Some(factorial_valuation(k as u64, p)));
        }
        prop_assert!(!q_int(n, &q).is_zero());
    }

    #[test]
    fn inverse_is_exact_over_rationals(p in prime(), tail in prop::collection::vec(-9i64..9, 1..6)) {
        let mut coeffs = vec![1i64];
        coeffs.extend(tail);
        let f = exact_poly(p, &coeffs);
        let g = f.inverse(12).unwrap();
        let prod = f.mul(&g).truncate_to(12);
        prop_assert!(prod.sub(&Series::one(f.center().clone())).truncate_to(12).is_zero());
    }

    #[test]
    fn newton_polygon_of_product_adds_slopes(
        p in prime(),
        a in prop::collection::vec(1i64..200, 2..6),
        b in prop::collection::vec(1i64..200, 2..6),
    ) {
        let f = exact_poly(p, &a);
        let g = exact_poly(p, &b);
        let nf = newton_polygon(&f);
        let ng = newton_polygon(&g);
        let nfg = newton_polygon(&f.mul(&g));
        let mut both = slope_profile(&nf.vertices);
        both.extend(slope_profile(&ng.vertices));
        prop_assert_eq!(merge(slope_profile(&nfg.vertices)), merge(both));
        prop_assert_eq!(nfg.vertices[0].1, nf.vertices[0].1 + ng.vertices[0].1);
    }
}
