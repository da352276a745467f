use padic_confluence::confluence::{confluent_connection_limit, DiffModule, LimitOptions};
use padic_confluence::matrix::SeriesMatrix;
use padic_confluence::profiles::{controlling_graph_endpoint, sigma_radius_profile, PieceValue};
use padic_confluence::qcalc::{omega_q, twisted_power, QContext};
use padic_confluence::radius::{int, rat};
use padic_confluence::series::padic_exp;
use padic_confluence::strat::*;
use padic_confluence::{DifferenceOperator, Error, LogRadius, PadicScalar, Scalar, Series};

const PREC: i64 = 30;

fn e(p: u64, n: i64) -> PadicScalar {
    PadicScalar::exact_int(p, n, PREC)
}

fn unit_disc() -> Region {
    Region::Disc { radius: LogRadius::Finite(int(0)) }
}

#[test]
fn omega_q_examples() {
    // κ = 1 whenever |q − 1| < ω
    assert_eq!(omega_q(&QContext::new(e(3, 4), e(3, 0))), LogRadius::Finite(rat(1, 2)));
    // q = 2, p = 3: κ = 2, |[2]_q| = |3|, so ω_q = (|3|·ω)^{1/2}
    let ctx = QContext::new(e(3, 2), e(3, 0));
    assert_eq!(ctx.kappa, Some(2));
    assert_eq!(omega_q(&ctx), LogRadius::Finite(rat(3, 4)));
    assert!(!ctx.is_root_of_unity());
}

#[test]
fn twisted_powers_expand() {
    let zero = e(5, 0);
    let dil = DifferenceOperator::new(e(5, 6), e(5, 0)).unwrap();
    let t3 = twisted_power(3, &zero, &dil, 10);
    assert_eq!(t3.max_index(), 3);
    assert!(t3.coeff(0).is_zero() && t3.coeff(1).is_zero() && t3.coeff(2).is_zero());
    // T(T − h)(T − 2h) for the shift by h
    let shift = DifferenceOperator::new(e(5, 1), e(5, 5)).unwrap();
    let want = Series::polynomial(zero.clone(), vec![e(5, 0), e(5, 50), e(5, -15), e(5, 1)]);
    assert!(twisted_power(3, &zero, &shift, 10).sub(&want).is_zero());
}

#[test]
fn closed_form_generic_radius() {
    // G = 1/3 at ρ = 1: radius ω/|G| = 3^{−3/2}
    let p = 3;
    let g = Series::constant(e(p, 0), e(p, 1).try_div(&e(p, 3)).unwrap());
    let sys = DiffSystem::new(SeriesMatrix::scalar(g), Region::AffineLine);
    let r = radius_at(&sys, &LogRadius::Finite(int(0)), 12).unwrap();
    assert_eq!(r.closed_form, Some(LogRadius::Finite(rat(3, 2))));
}

#[test]
fn incompatible_sigma_is_refused() {
    let p = 3;
    let sys = DiffSystem::new(SeriesMatrix::scalar(Series::constant(e(p, 0), e(p, 1))), unit_disc());
    // the shift by a unit moves points farther than ω
    let sigma = DifferenceOperator::new(e(p, 1), e(p, 1)).unwrap();
    let cert = compatible_system(&sys, &sigma, None, 32).unwrap();
    assert_ne!(cert.verdict, Verdict::Compatible);
    let err = deform_checked(&sys, &sigma, &DeformOptions { order: 8, prec: PREC, n_max: 100 }).unwrap_err();
    assert!(matches!(err, Error::NotCompatible(_) | Error::Inconclusive(_)));
}

#[test]
fn shift_deformation_of_exp_is_constant() {
    // σ = T + 9 and G = 1 give A = exp(9)
    let p = 3;
    let sys = DiffSystem::new(SeriesMatrix::scalar(Series::constant(e(p, 0), e(p, 1))), unit_disc());
    let sigma = DifferenceOperator::new(e(p, 1), e(p, 9)).unwrap();
    let (a, cert) = deform_checked(&sys, &sigma, &DeformOptions { order: 12, prec: PREC, n_max: 200 }).unwrap();
    assert_eq!(cert.verdict, Verdict::Compatible);
    let want = padic_exp(&e(p, 9), PREC).unwrap();
    assert!(a.get(0, 0).coeff(0).sub_ref(&want).is_zero());
    for k in 1..=12 {
        assert!(a.get(0, 0).coeff(k).is_zero(), "k={k}");
    }
}

#[test]
fn limit_recovers_rank_two_connection() {
    let p = 3;
    let c = e(p, 0);
    let g = SeriesMatrix::new(
        2,
        vec![
            Series::constant(c.clone(), e(p, 1)),
            Series::polynomial(c.clone(), vec![e(p, 0), e(p, 2)]),
            Series::constant(c.clone(), e(p, 0)),
            Series::constant(c.clone(), e(p, -1)),
        ],
    )
    .unwrap();
    let sys = DiffSystem::new(g, unit_disc());
    let sigma = DifferenceOperator::new(e(p, 10), e(p, 0)).unwrap();
    let (a, _) = deform_checked(&sys, &sigma, &DeformOptions { order: 48, prec: PREC, n_max: 400 }).unwrap();
    let module = DiffModule::new(a, sigma, sys.region.clone()).unwrap();
    let lim = confluent_connection_limit(&module, &LimitOptions { n_max: 8, target: 6, order: 6 }).unwrap();
    let prec = lim.precision.unwrap_or(PREC);
    assert!(prec >= 6);
    let d = lim.g.sub(&sys.g).truncate_to(6);
    for entry in d.entries() {
        assert!(entry.min_valuation_upto(6).is_none_or(|v| v >= prec), "{:?}", entry.min_valuation_upto(6));
    }
}

#[test]
fn profile_over_padics() {
    let p = 3;
    let sigma = DifferenceOperator::new(e(p, 4), e(p, 3)).unwrap();
    let a = controlling_graph_endpoint(&sigma).unwrap().unwrap();
    assert!(a.sub_ref(&e(p, -1)).is_zero());
    // centred at 2: |σ(2) − 2| = |9| and the fixed point sits at distance |3|
    let prof = sigma_radius_profile(&sigma, &e(p, 2), &LogRadius::Finite(int(4)), &LogRadius::Finite(int(-2))).unwrap();
    assert_eq!(prof.breakpoints(), vec![int(1)]);
    assert_eq!(prof.pieces[0].value, PieceValue::Affine { alpha: int(1), beta: 1 });
    assert_eq!(prof.pieces[1].value, PieceValue::Affine { alpha: int(2), beta: 0 });
    assert!(prof.is_continuous() && prof.is_log_convex() && prof.slopes_are_integral());
    assert_eq!(prof.slope_jump(int(1)), 1);
    assert_eq!(prof.slope_jump(int(1)), prof.zeros_on_sphere(int(1)));
}
