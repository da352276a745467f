//! The ten acceptance criteria as runnable checks.
//!
//! Each check returns a [`CriterionResult`]; nothing here panics on a failed
//! criterion. Random cases are drawn from a ChaCha stream seeded per
//! criterion, so a run is reproducible from its [`AcceptanceConfig`].

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::confluence::{
    confluent_connection_derivative, confluent_connection_limit, generic_radius, DeformationFamily, DiffModule,
    LimitOptions,
};
use crate::error::{Error, Result};
use crate::gamma::{
    check_sum_identity, functional_residual, g0_gauss_norm, g0_newton, g0_norm_exponent, g0_series, gamma_interpolant,
    gamma_taylor, lvalues, sum_powers_rational,
};
use crate::matrix::SeriesMatrix;
use crate::padic::{padic_from_bigrational, PadicScalar};
use crate::profiles::{controlling_graph_endpoint, sigma_radius_profile};
use crate::qcalc::omega;
use crate::radius::{format_rat, int, rat, LogRadius};
use crate::scalar::{RationalScalar, Scalar};
use crate::series::{
    compose_affine, from_twisted_basis, gauss_norm, radius_estimate, radius_estimate_p_block, to_twisted_basis,
    twisted_derivative, DifferenceOperator, Series,
};
use crate::strat::{deform_checked, DeformOptions, DiffSystem, Region, Verdict};

#[derive(Clone, Debug)]
pub struct AcceptanceConfig {
    /// Prime for the criteria that are not tied to a specific prime.
    pub p: u64,
    /// Precision target `N` for the Γ data.
    pub prec: i64,
    /// Truncation order `M` for the Γ data.
    pub order: usize,
    pub seed: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig { p: 3, prec: 40, order: 200, seed: 7 }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<28} {}  ({:.2}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }

    pub fn to_json(&self) -> Value {
        json!({ "id": self.id, "name": self.name, "passed": self.passed, "detail": self.detail, "seconds": self.seconds })
    }
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "functional equation"),
    (2, "newton polygon of g0"),
    (3, "l-value valuations"),
    (4, "radius of gamma"),
    (5, "gauss-norm law"),
    (6, "sums of powers"),
    (7, "deformation round trips"),
    (8, "twisted calculus"),
    (9, "small radius"),
    (10, "profiles"),
];

pub fn run_all(cfg: &AcceptanceConfig) -> Vec<CriterionResult> {
    CRITERIA.iter().map(|&(id, _)| run_one(id, cfg)).collect()
}

pub fn run_one(id: u32, cfg: &AcceptanceConfig) -> CriterionResult {
    let name = CRITERIA.iter().find(|c| c.0 == id).map(|c| c.1).unwrap_or("unknown");
    let start = Instant::now();
    let outcome = match id {
        1 => functional_equation(cfg),
        2 => newton_vertices(cfg),
        3 => lvalue_valuations(cfg),
        4 => gamma_radius(cfg),
        5 => gauss_law(cfg),
        6 => power_sums(cfg),
        7 => round_trips(cfg),
        8 => twisted_calculus(cfg),
        9 => small_radius(cfg),
        10 => profiles(cfg),
        _ => Err(Error::Invalid(format!("no criterion {id}"))),
    };
    let (passed, detail) = match outcome {
        Ok(x) => x,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn rng_for(cfg: &AcceptanceConfig, id: u32) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(1000).wrapping_add(id as u64))
}

/// All coefficients `0..=upto` of `a − b` vanish to their tracked precision,
/// which is at least `floor`. Returns the worst tracked precision.
fn zero_to<S: Scalar>(a: &Series<S>, b: &Series<S>, upto: i64, floor: i64) -> (bool, Option<i64>) {
    let mut ok = true;
    let mut worst: Option<i64> = None;
    for k in 0..=upto {
        let d = a.coeff(k).sub_ref(&b.coeff(k));
        if !d.is_zero() {
            ok = false;
        }
        if let Some(v) = d.valuation_bound() {
            worst = Some(worst.map_or(v, |w| w.min(v)));
            if v < floor {
                ok = false;
            }
        }
    }
    (ok, worst)
}

fn matrix_zero_to<S: Scalar>(a: &SeriesMatrix<S>, b: &SeriesMatrix<S>, upto: i64, floor: i64) -> (bool, Option<i64>) {
    let mut ok = true;
    let mut worst: Option<i64> = None;
    for (x, y) in a.entries().iter().zip(b.entries()) {
        let (o, w) = zero_to(x, y, upto, floor);
        ok &= o;
        if let Some(w) = w {
            worst = Some(worst.map_or(w, |v| v.min(w)));
        }
    }
    (ok, worst)
}

fn show(v: Option<i64>) -> String {
    v.map_or("exact".to_string(), |v| format!("p^{v}"))
}

fn functional_equation(_cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let upto = 150;
    let floor = 30;
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [3u64, 5] {
        let gs = gamma_interpolant(p, upto + floor + 5)?;
        let res = functional_residual(&gs, 1, upto)?;
        let zero = Series::zero(res.center().clone());
        let (good, worst) = zero_to(&res, &zero, upto, floor);
        ok &= good;
        parts.push(format!("p={p}: zero to {} through T^{upto} ({} nodes)", show(worst), gs.check_nodes));
    }
    Ok((ok, parts.join("; ")))
}

fn newton_vertices(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let cases: [(u64, usize, &[(i64, i64)]); 3] = [
        (3, cfg.order, &[(2, -1), (6, -2), (18, -3)]),
        (5, cfg.order, &[(4, -1), (20, -2)]),
        (7, cfg.order.min(100), &[(6, -1), (42, -2)]),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, m, want) in cases {
        let gs = gamma_taylor(p, m, cfg.prec)?;
        let np = g0_newton(&g0_series(&gs)?);
        let missing: Vec<String> = want
            .iter()
            .filter(|&&(n, v)| !np.is_certified_vertex(n, int(v)))
            .map(|(n, v)| format!("({n},{v})"))
            .collect();
        ok &= missing.is_empty();
        if missing.is_empty() {
            parts.push(format!("p={p}: {} certified", want.iter().map(|(n, v)| format!("({n},{v})")).collect::<Vec<_>>().join("")));
        } else {
            parts.push(format!("p={p}: missing {}", missing.join("")));
        }
    }
    Ok((ok, parts.join("; ")))
}

fn lvalue_valuations(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, want) in [(3u64, vec![(1u64, -1i64), (3, -2)]), (5, vec![(2, -1)])] {
        let m_max = 12.min((cfg.order as u64 - 1) / 2);
        let gs = gamma_taylor(p, cfg.order, cfg.prec)?;
        let table = lvalues(&gs, m_max)?;
        for (m, v) in want {
            let got = table.get(m).and_then(|e| e.value.valuation());
            if got != Some(v) {
                ok = false;
                parts.push(format!("p={p} s={}: v={got:?}, expected {v}", 1 + 2 * m));
            } else {
                parts.push(format!("v_{p}(L({})) = {v}", 1 + 2 * m));
            }
        }
        let mut flagged = 0;
        for e in &table.entries {
            if !e.routes_agree {
                ok = false;
                parts.push(format!("p={p} s={}: extraction routes differ", 1 + 2 * e.m));
            }
            match e.value.valuation() {
                Some(v) if v < e.lower_bound => {
                    ok = false;
                    parts.push(format!("p={p} s={}: v={v} below bound {}", 1 + 2 * e.m, e.lower_bound));
                }
                None => flagged += 1,
                _ => {}
            }
        }
        parts.push(format!("p={p}: {} values within bounds, {flagged} flagged", table.entries.len() - flagged));
    }
    Ok((ok, parts.join("; ")))
}

fn gamma_radius(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let m = 2 * cfg.order;
    let want = LogRadius::Finite(rat(5, 6));
    let gs = gamma_taylor(3, m, 2 * cfg.prec)?;
    let b = radius_estimate_p_block(&gs.series)?;
    let width = b.width().unwrap_or(int(i64::MAX));
    let half = gamma_taylor(3, m / 2, cfg.prec)?;
    let bh = radius_estimate_p_block(&half.series)?;
    let wh = bh.width().unwrap_or(int(i64::MAX));
    let generic = radius_estimate(&gs.series)?;
    let ok = b.contains(&want) && width <= rat(1, 20) && width <= wh;
    Ok((
        ok,
        format!(
            "M={m}: bracket [{}, {}] (width {}), M={}: width {}; window bracket [{}, {}]",
            b.upper.to_json_string(),
            b.lower.to_json_string(),
            format_rat(&width),
            m / 2,
            format_rat(&wh),
            generic.upper.to_json_string(),
            generic.lower.to_json_string()
        ),
    ))
}

fn gauss_law(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let gs = gamma_taylor(3, cfg.order, cfg.prec)?;
    let g0 = g0_series(&gs)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for r in [rat(1, 3), rat(3, 10), rat(1, 4)] {
        let want = r * 2 - 1;
        let got = g0_gauss_norm(&g0, &LogRadius::Finite(r))?;
        let law = g0_norm_exponent(3, r);
        let good = got == LogRadius::Finite(want) && law == Some(want);
        ok &= good;
        parts.push(format!("r={}: {}", format_rat(&r), got.to_json_string()));
    }
    Ok((ok, parts.join(", ")))
}

fn power_sums(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let p = 5;
    let target = 20;
    let m_max = 16;
    let gs = gamma_taylor(p, (2 * m_max + 8) as usize, cfg.prec + 20)?;
    let g0 = g0_series(&gs)?;
    let table = lvalues(&gs, m_max)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for ell in 1..=3u32 {
        let chk = check_sum_identity(ell, 1, &table, Some(&g0), target)?;
        ok &= chk.passed();
        let mut s = format!("l={ell}: residual {} (tail p^{})", show(chk.residual), format_rat(&chk.tail_bound));
        if let Some(sc) = chk.shortcut {
            s.push_str(&format!(", shortcut p^{}", format_rat(&sc)));
        }
        parts.push(s);
    }
    let s1 = sum_powers_rational(1, 5, 5) == BigRational::new(25.into(), 12.into());
    let s2 = sum_powers_rational(2, 5, 5) == BigRational::new(205.into(), 144.into());
    ok &= s1 && s2;
    parts.push(format!("S_1(5)=25/12 {s1}, S_2(5)=205/144 {s2}"));
    Ok((ok, parts.join("; ")))
}

fn unit_disc() -> Region {
    Region::Disc { radius: LogRadius::Finite(int(0)) }
}

/// Degree drawn uniformly from `0..=max_deg`.
fn random_polynomial<S: Scalar>(rng: &mut ChaCha8Rng, c: &S, max_deg: usize, bound: i64) -> Series<S> {
    let deg = rng.gen_range(0..=max_deg);
    let coeffs = (0..=deg).map(|_| c.from_i64_like(rng.gen_range(-bound..=bound))).collect();
    Series::polynomial(c.clone(), coeffs)
}

/// Deform `sys` along `sigma`, then recover the connection by both confluence
/// methods. Returns (limit ok, derivative ok, description).
fn round_trip(
    sys: &DiffSystem<PadicScalar>,
    sigma: &DifferenceOperator<PadicScalar>,
    prec: i64,
    order: i64,
) -> Result<(bool, bool, String)> {
    let (a, cert) = deform_checked(sys, sigma, &DeformOptions { order, prec, n_max: 400 })?;
    debug_assert_eq!(cert.verdict, Verdict::Compatible);
    let module = DiffModule::new(a, sigma.clone(), sys.region.clone())?;
    let target = 6;
    let lim = confluent_connection_limit(&module, &LimitOptions { n_max: 8, target, order: 6 })?;
    let lim_prec = lim.precision.unwrap_or(prec);
    let (lim_ok, _) = matrix_zero_to(&lim.g, &sys.g, 6, target.min(lim_prec));
    let fam = DeformationFamily { system: sys.clone(), prec };
    let c = sys.center().clone();
    let one = c.one_like();
    let zero = c.zero_like();
    let mut der_ok = true;
    let mut worst: Option<i64> = None;
    for (x, y) in [(&one, &zero), (&zero, &one)] {
        let g = confluent_connection_derivative(&fam, x, y, order - 2)?;
        let (o, w) = matrix_zero_to(&g, &sys.g, order - 2, prec - 4);
        der_ok &= o;
        if let Some(w) = w {
            worst = Some(worst.map_or(w, |v: i64| v.min(w)));
        }
    }
    Ok((lim_ok, der_ok, format!("limit to {}, derivative to {}", show(lim.precision), show(worst))))
}

fn round_trips(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let p = cfg.p;
    let prec = 30;
    let order = 48;
    let c = PadicScalar::exact_int(p, 0, prec);
    let mut parts = Vec::new();

    // exp: A = exp((q − 1)T) for G = 1
    let p2 = (p * p) as i64;
    let sigma = DifferenceOperator::new(PadicScalar::exact_int(p, 1 + p2, prec), c.clone())?;
    let sys = DiffSystem::new(SeriesMatrix::scalar(Series::constant(c.clone(), c.one_like())), unit_disc());
    let (a, _) = deform_checked(&sys, &sigma, &DeformOptions { order, prec, n_max: 400 })?;
    let mut fact = BigInt::from(1);
    let mut exact = Vec::new();
    for k in 0..=order {
        if k > 0 {
            fact *= k;
        }
        exact.push(padic_from_bigrational(&BigInt::from(p2).pow(k as u32), &fact, p, prec)?);
    }
    let (exp_ok, worst) = zero_to(a.get(0, 0), &Series::polynomial(c.clone(), exact), order, prec);
    parts.push(format!("exp((q-1)T) to {}", show(worst)));
    let (l, d, s) = round_trip(&sys, &sigma, prec, order)?;
    let mut ok = exp_ok && l && d;
    parts.push(format!("exp: {s}"));

    let mut rng = rng_for(cfg, 7);
    let mut done = 0;
    let mut failures = 0;
    let mut attempts = 0;
    let mut notes = Vec::new();
    while done < 10 && attempts < 60 {
        attempts += 1;
        let rank = if done < 5 { 1 } else { 2 };
        let entries: Vec<Series<PadicScalar>> =
            (0..rank * rank).map(|_| random_polynomial(&mut rng, &c, 2, 4)).collect();
        let sys = DiffSystem::new(SeriesMatrix::new(rank, entries)?, unit_disc());
        let qi = 1 + p2 * rng.gen_range(1..p as i64);
        let hi = p2 * p as i64 * rng.gen_range(0..p as i64);
        let q = PadicScalar::exact_int(p, qi, prec);
        let h = PadicScalar::exact_int(p, hi, prec);
        let sigma = DifferenceOperator::new(q, h)?;
        let label = format!("system {attempts} (rank {rank}, q={qi}, h={hi})");
        match round_trip(&sys, &sigma, prec, order) {
            Ok((l, d, s)) => {
                done += 1;
                if !(l && d) {
                    failures += 1;
                    notes.push(format!("{label}: {s}"));
                }
            }
            Err(Error::NotCompatible(_)) | Err(Error::Inconclusive(_)) => continue,
            Err(e) => {
                done += 1;
                failures += 1;
                notes.push(format!("{label}: {e}"));
            }
        }
    }
    ok &= done == 10 && failures == 0;
    parts.push(format!("{done} random systems certified, {failures} round-trip failures"));
    parts.extend(notes);
    Ok((ok, parts.join("; ")))
}

fn random_sigma(rng: &mut ChaCha8Rng, p: u64) -> DifferenceOperator<RationalScalar> {
    loop {
        let pi = p as i64;
        let q = RationalScalar::from_i64(p, 1 + pi * rng.gen_range(-3..=3));
        let h = RationalScalar::from_i64(p, pi * rng.gen_range(-3..=3));
        let s = DifferenceOperator::new(q, h).expect("|q - 1| < 1");
        if !s.is_identity() {
            return s;
        }
    }
}

fn twisted_calculus(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let p = cfg.p;
    let mut rng = rng_for(cfg, 8);
    let (mut leibniz, mut trip, mut norms) = (0, 0, 0);
    let cases = 100;
    for _ in 0..cases {
        let sigma = random_sigma(&mut rng, p);
        let c = RationalScalar::from_i64(p, rng.gen_range(-3..=3));
        let f = random_polynomial(&mut rng, &c, 30, 9);
        let g = random_polynomial(&mut rng, &c, 30, 9);
        let lhs = twisted_derivative(&f.mul(&g), &sigma)?;
        let rhs = twisted_derivative(&f, &sigma)?.mul(&compose_affine(&g, &sigma)?).add(&f.mul(&twisted_derivative(&g, &sigma)?));
        leibniz += usize::from(lhs == rhs);
        let back = from_twisted_basis(&to_twisted_basis(&f, &sigma)?, &sigma, &c, None);
        trip += usize::from(back == f);
        let tw = to_twisted_basis(&f, &sigma)?;
        let v = sigma.delta_at(&c).valuation().unwrap_or(3);
        let mut good = true;
        for r in [int(v) - rat(1, 2), int(v - 1), int(v) - rat(3, 2), int(v - 2), int(v - 3)] {
            let direct = gauss_norm(&f, &LogRadius::Finite(r))?;
            let twisted = tw
                .iter()
                .enumerate()
                .filter_map(|(n, a)| a.valuation().map(|x| int(x) + r * n as i64))
                .min()
                .map_or(LogRadius::Zero, LogRadius::Finite);
            good &= direct == twisted;
        }
        norms += usize::from(good);
    }
    let ok = leibniz == cases && trip == cases && norms == cases;
    Ok((ok, format!("Leibniz {leibniz}/{cases}, round trip {trip}/{cases}, norm invariance {norms}/{cases}")))
}

fn small_radius(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let p = cfg.p;
    let pi = p as i64;
    let mut rng = rng_for(cfg, 9);
    let w = omega(p).exponent().expect("finite");
    let cap = 64;
    let (mut collapsed, mut contained) = (0, 0);
    let cases = 20;
    let mut notes = Vec::new();
    for i in 0..cases {
        let r: i64 = rng.gen_range(-1..=1);
        let k: i64 = rng.gen_range(1..=3);
        let e = -r - k;
        let c = PadicScalar::exact_int(p, 0, cap);
        let unit = loop {
            let u = rng.gen_range(1..=20i64);
            if u % pi != 0 {
                break u;
            }
        };
        let lead = PadicScalar::exact_pow_times(p, e, unit, cap);
        let g = Series::polynomial(c.clone(), vec![lead, c.from_i64_like(rng.gen_range(-2..=2))]);
        let sigma = random_sigma(&mut rng, p).map_scalars(|x| padic_from_bigrational(x.value().numer(), x.value().denom(), p, cap).expect("integer"));
        let rho = LogRadius::Finite(int(r));
        let e1 = match gauss_norm(&g, &rho)? {
            LogRadius::Finite(x) => x,
            other => return Err(Error::Invalid(format!("unexpected norm {other:?}"))),
        };
        let a = Series::one(c.clone()).add(&sigma.delta_series(&c).mul(&g));
        let module = DiffModule::new(SeriesMatrix::scalar(a), sigma, Region::AffineLine)?;
        let gr = generic_radius(&module, &rho, 48)?;
        let want = LogRadius::Finite(w - e1);
        let exact = gr.closed_form == Some(want) && gr.lower == want && gr.upper == want;
        let inside = gr.bracket.as_ref().is_some_and(|b| b.contains(&want));
        collapsed += usize::from(exact);
        contained += usize::from(inside);
        if !(exact && inside) && notes.len() < 3 {
            notes.push(format!("case {i}: r={r}, |G| exponent {}, got {:?}", format_rat(&e1), gr.bracket));
        }
    }
    let ok = collapsed == cases && contained == cases;
    let mut detail = format!("closed form {collapsed}/{cases}, bracket contains it {contained}/{cases}");
    if !notes.is_empty() {
        detail.push_str(&format!(" [{}]", notes.join("; ")));
    }
    Ok((ok, detail))
}

fn profiles(cfg: &AcceptanceConfig) -> Result<(bool, String)> {
    let p = cfg.p;
    let pi = p as i64;
    let mut rng = rng_for(cfg, 10);
    let cases = 20;
    let (mut endpoints, mut shapes, mut total) = (0, 0, 0);
    for _ in 0..cases {
        let q = RationalScalar::from_i64(p, 1 + pi * loop {
            let a = rng.gen_range(-4..=4i64);
            if a != 0 {
                break a;
            }
        });
        let h = RationalScalar::from_i64(p, pi.pow(rng.gen_range(0..=3)) * rng.gen_range(-4..=4));
        let sigma = DifferenceOperator::new(q.clone(), h.clone())?;
        let a = controlling_graph_endpoint(&sigma)?;
        let want = RationalScalar::new(p, -h.value().clone() / (q.value() - BigRational::from_integer(1.into())));
        endpoints += usize::from(a.as_ref() == Some(&want));
        let mut centres = vec![want.clone(), RationalScalar::from_i64(p, 0)];
        centres.push(RationalScalar::from_i64(p, rng.gen_range(-30..=30)));
        for c in centres {
            let hi = int(rng.gen_range(-3..=0));
            let lo = hi + rng.gen_range(1..=6);
            let prof = sigma_radius_profile(&sigma, &c, &LogRadius::Finite(lo), &LogRadius::Finite(hi))?;
            let mut good = prof.slopes_are_integral() && prof.is_continuous() && prof.is_log_convex();
            for b in prof.breakpoints() {
                good &= prof.slope_jump(b) == prof.zeros_on_sphere(b);
            }
            total += 1;
            shapes += usize::from(good);
        }
    }
    let ok = endpoints == cases && shapes == total;
    Ok((ok, format!("endpoint -h/(q-1) {endpoints}/{cases}, profiles integral/continuous/convex {shapes}/{total}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_criterion_fails_cleanly() {
        let r = run_one(42, &AcceptanceConfig::default());
        assert!(!r.passed);
        assert!(r.line().contains("FAIL"));
    }
}
