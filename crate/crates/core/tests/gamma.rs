use num_bigint::BigInt;
use padic_confluence::gamma::*;
use padic_confluence::radius::{int, rat};
use padic_confluence::{PadicScalar, Scalar};

fn residue(x: &PadicScalar, k: i64) -> BigInt {
    x.residue(k).unwrap()
}

#[test]
fn wilson_and_continuity() {
    for p in [3u64, 5, 7, 11] {
        // Γ_p(p) = (−1)^p (p−1)! ≡ 1 mod p
        assert_eq!(residue(&gamma_at(p, p).unwrap(), 1), BigInt::from(1));
        // Γ_p(n + p^k) ≡ Γ_p(n) mod p^k
        for k in 1..=2u32 {
            let pk = p.pow(k);
            for n in 1..12u64 {
                let a = gamma_at(n, p).unwrap();
                let b = gamma_at(n + pk, p).unwrap();
                assert!(a.sub_ref(&b).valuation().is_none_or(|v| v >= k as i64), "p={p} n={n} k={k}");
            }
        }
    }
}

#[test]
fn shift_polynomial_mod_p() {
    // A(1, p; T) = −∏_{0<i<p}(T + i) ≡ 1 − T^{p−1} mod p
    for p in [3u64, 5, 7] {
        let a = shift_polynomial(p, p, 40).unwrap();
        assert_eq!(a.max_index(), p as i64 - 1);
        for k in 0..p as i64 {
            let want = if k == 0 {
                1
            } else if k == p as i64 - 1 {
                p as i64 - 1
            } else {
                0
            };
            assert_eq!(residue(&a.coeff(k), 1), BigInt::from(want), "p={p} k={k}");
        }
    }
    assert!(shift_polynomial(3, 4, 40).is_err());
}

#[test]
fn taylor_series_reproduces_integer_values() {
    let gs = gamma_taylor(3, 120, 30).unwrap();
    assert!(gs.certified_b >= 30);
    assert!(gs.gamma(0).is_one());
    for n in [3i64, 6, 9, 27] {
        let x = PadicScalar::exact_int(3, n, 60);
        let v = gs.series.evaluate(&x).unwrap();
        let want = gamma_at(n as u64, 3).unwrap();
        let d = v.sub_ref(&want);
        assert!(d.valuation_bound().is_none_or(|b| b >= 15), "n={n}: {:?}", d.valuation_bound());
    }
}

#[test]
fn shifted_expansions_start_at_gamma_values() {
    let gs = gamma_taylor(5, 40, 20).unwrap();
    for i in 1..5u64 {
        let s = gamma_shift(&gs, i).unwrap();
        assert!(s.coeff(0).sub_ref(&gamma_at(i, 5).unwrap()).is_zero(), "i={i}");
    }
    assert!(gamma_shift(&gs, 0).is_err());
    assert!(gamma_shift(&gs, 5).is_err());
}

#[test]
fn coefficient_bound_breakpoints() {
    let p = 3;
    let breaks: Vec<u64> = (1..60u64).filter(|&k| g0_coefficient_bound(p, k) != g0_coefficient_bound(p, k - 1)).collect();
    assert_eq!(breaks, vec![2, 6, 18, 54]);
    assert_eq!(g0_coefficient_bound(5, 3), 0);
    assert_eq!(g0_coefficient_bound(5, 4), -1);
    assert_eq!(g0_coefficient_bound(5, 20), -2);
}

#[test]
fn gauss_norm_formula_branches() {
    assert_eq!(g0_norm_exponent(3, rat(1, 3)), Some(rat(-1, 3)));
    assert_eq!(g0_norm_exponent(3, rat(1, 4)), Some(rat(-1, 2)));
    assert_eq!(g0_norm_exponent(3, rat(1, 2)), None);
    assert_eq!(g0_norm_exponent(3, int(0)), None);
    // continuity at the breakpoint r_1 = 1/6 (exponent 1/(deg(p−1)) with deg 3)
    let left = g0_norm_exponent(3, rat(1, 6)).unwrap();
    let right = g0_norm_exponent(3, rat(1, 6) + rat(1, 1_000_000)).unwrap();
    assert!((left - right) < rat(1, 1000) && (right - left) < rat(1, 1000));
}

#[test]
fn harmonic_drift_grows() {
    let d = harmonic_drift(3, 5);
    let vals: Vec<i64> = d.iter().map(|v| v.unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
}

#[test]
fn lvalue_routes_agree() {
    let gs = gamma_taylor(3, 40, 30).unwrap();
    let table = lvalues(&gs, 10).unwrap();
    assert_eq!(table.entries.len(), 10);
    assert!(table.entries.iter().all(|e| e.routes_agree));
    assert_eq!(table.get(1).unwrap().value.valuation(), Some(-1));
    assert!(lvalues(&gs, 40).is_err());
}

#[test]
fn power_sums_exact() {
    assert_eq!(sum_powers_rational(1, 5, 5).to_string(), "25/12");
    assert_eq!(sum_powers_rational(2, 5, 5).to_string(), "205/144");
    assert!(sum_powers(0, 5, 5, 10).is_err());
}
