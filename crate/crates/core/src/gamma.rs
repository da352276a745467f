//! Morita's `Γ_p`: values at integers, certified Taylor data at 0, the
//! logarithmic derivative `g_0`, L-values and sums of inverse powers.
//!
//! Taylor coefficients come from Newton interpolation of `Γ_p(pX)` at the
//! nodes `X = 0, 1, …, K`. Writing `Γ_p(pX) = Σ_j b_j X^j`, a run with `K`
//! nodes is repeated with `2K` nodes and the digits on which the two runs
//! agree are certified. The precision target `N` applies to the `b_j`, so
//! `γ_j = b_j p^{−j}` is certified modulo `p^{N−j}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::{check_prime, padic_from_ratio, pow_p, PadicScalar};
use crate::radius::{format_rat, int, rat, LogRadius, Rat};
use crate::scalar::{factorial_valuation, u64_valuation, Scalar};
use crate::series::{
    compose_affine, gauss_norm_with_tail, newton_polygon_with_tail, series_log_composition, DifferenceOperator, NewtonPolygon, Series,
};

type PSeries = Series<PadicScalar>;

/// `Γ_p(n) = (−1)^n ∏_{i<n, p∤i} i`, exactly.
pub fn gamma_at(n: u64, p: u64) -> Result<PadicScalar> {
    check_prime(p)?;
    let mut prod = BigInt::one();
    for i in 1..n {
        if i % p != 0 {
            prod *= i;
        }
    }
    if n % 2 == 1 {
        prod = -prod;
    }
    let cap = 64.max(prod.bits() as i64);
    Ok(PadicScalar::exact_int(p, prod, cap))
}

/// `A(1, N; T) = Γ_p⁰(T + N)/Γ_p⁰(T) = (−1)^N ∏_{0<i<N, p∤i} (T + i)` for
/// `p | N`.
pub fn shift_polynomial(p: u64, n: u64, cap: i64) -> Result<PSeries> {
    check_prime(p)?;
    if n % p != 0 {
        return Err(Error::Invalid(format!("shift {n} is not a multiple of p = {p}")));
    }
    let c = PadicScalar::exact_int(p, 0, cap);
    let mut acc: Vec<BigInt> = vec![if n % 2 == 1 { -BigInt::one() } else { BigInt::one() }];
    for i in 1..n {
        if i % p == 0 {
            continue;
        }
        let mut next = vec![BigInt::zero(); acc.len() + 1];
        for (k, a) in acc.iter().enumerate() {
            next[k + 1] += a;
            next[k] += a * i;
        }
        acc = next;
    }
    let coeffs = acc.into_iter().map(|a| PadicScalar::exact_int(p, a, cap)).collect();
    Ok(Series::polynomial(c, coeffs))
}

/// `1 − 1/(p−1) − 1/p`: decay rate of the Newton coefficients of `Γ_p(pX)`.
pub fn interpolation_decay(p: u64) -> Rat {
    let p = p as i64;
    int(1) - rat(1, p - 1) - rat(1, p)
}

/// Coefficients `Q_j` (`j ≤ m`) with `b_j = Q_j·p^{−v(K!)}` mod `p^{W−v(K!)}`.
struct Run {
    q: Vec<BigInt>,
    vfact: i64,
    work: i64,
}

fn interpolation_run(p: u64, nodes: usize, m: usize, b_prec: i64) -> Run {
    let vfact = factorial_valuation(nodes as u64, p);
    let work = vfact + b_prec;
    let modulus = pow_p(p, work as u64);

    // Γ_p(ip) modulo p^W
    let mut vals = Vec::with_capacity(nodes + 1);
    let mut prod = BigInt::one();
    vals.push(BigInt::one());
    for i in 1..=nodes as u64 {
        for j in (i - 1) * p + 1..i * p {
            prod = (prod * j) % &modulus;
        }
        let v = if (i * p) % 2 == 1 { (&modulus - &prod) % &modulus } else { prod.clone() };
        vals.push(v);
    }

    // forward differences in place: vals[k] = Δ^k f(0)
    for level in 1..=nodes {
        for i in (level..=nodes).rev() {
            let (lo, hi) = vals.split_at_mut(i);
            let cur = &mut hi[0];
            *cur -= &lo[i - 1];
            if cur.is_negative() {
                *cur += &modulus;
            }
        }
    }

    // inverse unit parts of k!, from K down
    let unit_of = |k: u64| -> u64 {
        let mut k = k;
        while k % p == 0 {
            k /= p;
        }
        k
    };
    let mut ufact = BigInt::one();
    for k in 1..=nodes as u64 {
        ufact = (ufact * unit_of(k)) % &modulus;
    }
    let mut inv = ufact.modinv(&modulus).expect("unit is invertible");
    let mut inv_units = vec![BigInt::zero(); nodes + 1];
    for k in (0..=nodes).rev() {
        inv_units[k] = inv.clone();
        if k >= 1 {
            inv = (inv * unit_of(k as u64)) % &modulus;
        }
    }

    // d_k = Δ^k f(0)/k! scaled by p^{v(K!)}
    let mut d = Vec::with_capacity(nodes + 1);
    for k in 0..=nodes {
        let shift = vfact - factorial_valuation(k as u64, p);
        let x = (&vals[k] * &inv_units[k]) % &modulus;
        d.push((x * pow_p(p, shift as u64)) % &modulus);
    }
    drop(vals);

    // Horner in the falling-factorial basis: P ← P·(x − k) + d_k
    let mut poly: Vec<BigInt> = vec![d[nodes].clone()];
    for k in (0..nodes).rev() {
        let len = (poly.len() + 1).min(m + 1);
        let mut next = vec![BigInt::zero(); len];
        for (j, a) in poly.iter().enumerate() {
            if j + 1 < len {
                next[j + 1] += a;
            }
            next[j] -= a * k;
        }
        next[0] += &d[k];
        for a in next.iter_mut() {
            *a = a.mod_floor(&modulus);
        }
        poly = next;
    }
    poly.resize(m + 1, BigInt::zero());
    Run { q: poly, vfact, work }
}

impl Run {
    /// `b_j` as a p-adic number.
    fn b(&self, p: u64, j: usize) -> PadicScalar {
        PadicScalar::from_parts(p, -self.vfact, self.q[j].clone(), self.work - self.vfact)
    }
}

/// Certified Taylor expansion of `Γ_p` at 0.
#[derive(Clone, Debug)]
pub struct GammaSeries {
    pub p: u64,
    /// `Γ_p⁰(T) = Σ γ_n T^n`, truncated at `M`.
    pub series: PSeries,
    /// Precision target for `b_j = p^j γ_j`.
    pub target: i64,
    pub nodes: usize,
    pub check_nodes: usize,
    /// Smallest certified precision among the `b_j`.
    pub certified_b: i64,
    /// The series holds every coefficient of the `2K`-node interpolant, so
    /// its only error is the interpolation remainder.
    pub complete: bool,
}

impl GammaSeries {
    pub fn order(&self) -> i64 {
        self.series.trunc().unwrap_or(0)
    }

    pub fn gamma(&self, n: i64) -> PadicScalar {
        self.series.coeff(n)
    }

    /// `λ_0 = γ_1`.
    pub fn lambda0(&self) -> PadicScalar {
        self.series.coeff(1)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "p": self.p,
            "M": self.order(),
            "target": self.target,
            "nodes": self.nodes,
            "check_nodes": self.check_nodes,
            "certified_b": self.certified_b,
            "series": self.series.to_json(),
        })
    }
}

/// Taylor coefficients `γ_0..γ_M` of `Γ_p` at 0, each certified modulo
/// `p^{N−j}` by agreement between a `K`-node and a `2K`-node run.
pub fn gamma_taylor(p: u64, m: usize, n: i64) -> Result<GammaSeries> {
    taylor(p, Some(m), n)
}

/// All `2K + 1` coefficients of the fine interpolant, for precision target `N`.
pub fn gamma_interpolant(p: u64, n: i64) -> Result<GammaSeries> {
    taylor(p, None, n)
}

fn taylor(p: u64, m: Option<usize>, n: i64) -> Result<GammaSeries> {
    check_prime(p)?;
    let eps = interpolation_decay(p);
    let mut margin = 6i64;
    let mut k = 8usize;
    for _ in 0..4 {
        let need = Rat::from_integer(n.max(1) + margin) / eps;
        k = (need.ceil().to_integer() as usize).max(8);
        let lk = (k as f64).log(p as f64).ceil() as i64;
        if margin >= 2 * lk + 4 {
            break;
        }
        margin = 2 * lk + 4;
    }
    let guard = 4;
    // the fine run must reach degree M
    if let Some(m) = m {
        k = k.max(m.div_ceil(2));
    }
    let complete = m.is_none_or(|m| m >= 2 * k);
    let m = m.unwrap_or(2 * k);
    let coarse = interpolation_run(p, k, m, n + guard);
    let fine = interpolation_run(p, 2 * k, m, n + guard);
    let mut coeffs = Vec::with_capacity(m + 1);
    let mut worst = i64::MAX;
    for j in 0..=m {
        let bf = fine.b(p, j);
        let bc = coarse.b(p, j);
        let diff = bf.sub_ref(&bc);
        let cert = match diff.valuation() {
            Some(v) => v.min(bf.abs_precision().unwrap()),
            None => diff.abs_precision().unwrap(),
        };
        worst = worst.min(cert);
        let gj = bf.with_abs_cap(cert);
        let gj = PadicScalar::from_parts(p, gj.valuation().unwrap_or(0) - j as i64, gj.unit().clone(), cert - j as i64);
        coeffs.push(gj);
    }
    if worst < n {
        return Err(Error::Certification { wanted: n, achieved: worst });
    }
    coeffs[0] = PadicScalar::exact_int(p, 1, n);
    Ok(GammaSeries { p, series: Series::truncated(PadicScalar::exact_int(p, 0, n), coeffs, m as i64), target: n, nodes: k, check_nodes: 2 * k, certified_b: worst, complete })
}

/// `Γ_p⁰(T + Np) − A(1, Np; T)·Γ_p⁰(T)` up to `T^{upto}`.
pub fn functional_residual(gs: &GammaSeries, n: u64, upto: i64) -> Result<PSeries> {
    let p = gs.p;
    let big = gs.target + gs.order() + 16;
    let shift = PadicScalar::exact_int(p, n * p, big);
    let sigma = DifferenceOperator::new(PadicScalar::exact_int(p, 1, big), shift)?;
    let f = if gs.complete {
        Series::polynomial(gs.series.center().clone(), gs.series.coeffs().to_vec())
    } else {
        gs.series.clone()
    };
    let lhs = compose_affine(&f, &sigma)?;
    let a = shift_polynomial(p, n * p, big)?;
    let rhs = a.mul(&f);
    Ok(lhs.sub(&rhs).truncate_to(upto))
}

/// `(−1)^i (T+1)⋯(T+i−1)·Γ_p⁰(T)`, the expansion of `Γ_p` at `i`.
pub fn gamma_shift(gs: &GammaSeries, i: u64) -> Result<PSeries> {
    let p = gs.p;
    if i == 0 || i >= p {
        return Err(Error::Invalid(format!("shift index {i} outside 1..{p}")));
    }
    let cap = gs.target + 16;
    let c = PadicScalar::exact_int(p, 0, cap);
    let mut poly = Series::constant(c.clone(), PadicScalar::exact_int(p, if i % 2 == 1 { -1 } else { 1 }, cap));
    for j in 1..i {
        poly = poly.mul(&Series::polynomial(c.clone(), vec![PadicScalar::exact_int(p, j as i64, cap), PadicScalar::exact_int(p, 1, cap)]));
    }
    Ok(poly.mul(&gs.series))
}

/// `g_0 = (Γ_p⁰)′/Γ_p⁰`.
pub fn g0_series(gs: &GammaSeries) -> Result<PSeries> {
    let m = gs.order();
    gs.series.derivative().div(&gs.series, m - 1)
}

/// Lower bound for `v_p` of the `k`-th coefficient of `g_0`: `0` for
/// `k ≤ p−2`, `−n` for `p^{n−1}(p−1) ≤ k < p^n(p−1)`.
pub fn g0_coefficient_bound(p: u64, k: u64) -> i64 {
    if k <= p - 2 {
        return 0;
    }
    let mut n = 1;
    let mut lo = p - 1;
    loop {
        if k < lo * p {
            return -n;
        }
        lo *= p;
        n += 1;
    }
}

/// Exponent of `|g_0|(x_{0,ρ})` for `ρ = p^{−r}` with `r_n ≤ ρ ≤ r_{n−1}`,
/// `n ≥ 1`: `p^{n−1}(p−1)·r − n`. `None` for `ρ < |p|^{1/p}`, where only an
/// upper bound is known.
pub fn g0_norm_exponent(p: u64, r: Rat) -> Option<Rat> {
    let pi = p as i64;
    if r > rat(1, pi) {
        return None;
    }
    if r <= int(0) {
        return None;
    }
    let mut n = 1i64;
    let mut deg = pi - 1;
    loop {
        // r_n has exponent 1/(p^{n−1}(p−1)^2)
        let rn = rat(1, deg * (pi - 1));
        if r >= rn {
            return Some(r * deg - n);
        }
        n += 1;
        deg *= pi;
        if n > 40 {
            return None;
        }
    }
}

/// `g_0` cut before the first coefficient whose precision has dropped to the
/// known lower bound; from there on the bound carries more information.
fn trusted_prefix(g0: &PSeries) -> PSeries {
    let p = g0.prime();
    let top = g0.trunc().unwrap_or(g0.max_index());
    for k in 0..=top {
        let a = g0.coeff(k);
        if a.valuation().is_none() && a.abs_precision().is_none_or(|n| n <= g0_coefficient_bound(p, k as u64)) {
            return g0.truncate_to(k - 1);
        }
    }
    g0.truncate_to(top)
}

/// Newton polygon of `g_0`, with the coefficient bounds closing the tail.
pub fn g0_newton(g0: &PSeries) -> NewtonPolygon {
    let p = g0.prime();
    let tail = move |n: i64| int(g0_coefficient_bound(p, n as u64));
    newton_polygon_with_tail(&trusted_prefix(g0), Some(&tail))
}

/// `|g_0|(x_{0,ρ})`, certified with the coefficient bounds as tail.
pub fn g0_gauss_norm(g0: &PSeries, rho: &LogRadius) -> Result<LogRadius> {
    let p = g0.prime();
    let tail = move |n: i64| int(g0_coefficient_bound(p, n as u64));
    gauss_norm_with_tail(&trusted_prefix(g0), rho, &tail)
}

#[derive(Clone, Debug)]
pub struct LEntry {
    pub m: u64,
    /// `L_p(1+2m, ω̄^{2m}) = −[T^{2m}] g_0`.
    pub value: PadicScalar,
    /// `−(1+2m)·[T^{1+2m}] log Γ_p⁰`.
    pub via_log: PadicScalar,
    pub index: u64,
    pub lower_bound: i64,
    /// The two routes agree to their common precision.
    pub routes_agree: bool,
    /// Precision too low to determine the valuation.
    pub flagged: bool,
}

#[derive(Clone, Debug)]
pub struct LValueTable {
    pub p: u64,
    pub entries: Vec<LEntry>,
    pub lambda0: PadicScalar,
}

impl LValueTable {
    pub fn get(&self, m: u64) -> Option<&LEntry> {
        self.entries.iter().find(|e| e.m == m)
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "m": e.m,
                    "s": 1 + 2 * e.m,
                    "index": e.index,
                    "valuation": e.value.valuation(),
                    "precision": e.value.abs_precision(),
                    "lower_bound": e.lower_bound,
                    "routes_agree": e.routes_agree,
                    "flagged": e.flagged,
                    "value": e.value.to_json(),
                })
            })
            .collect();
        json!({ "p": self.p, "lambda0": self.lambda0.to_json(), "entries": rows })
    }
}

pub fn lvalues(gs: &GammaSeries, m_max: u64) -> Result<LValueTable> {
    let p = gs.p;
    let top = 2 * m_max as i64 + 1;
    if top > gs.order() {
        return Err(Error::Invalid(format!("need order ≥ {top} for m ≤ {m_max}, have {}", gs.order())));
    }
    let g0 = g0_series(gs)?;
    let lg = series_log_composition(&gs.series, top, gs.target)?;
    let mut entries = Vec::with_capacity(m_max as usize);
    for m in 1..=m_max {
        let k = 2 * m as i64;
        let value = g0.coeff(k).neg_ref();
        let via_log = lg.coeff(k + 1).mul_ref(&PadicScalar::exact_int(p, k + 1, gs.target)).neg_ref();
        let routes_agree = value.sub_ref(&via_log).is_zero();
        let flagged = value.valuation().is_none();
        entries.push(LEntry { m, value, via_log, index: k as u64, lower_bound: g0_coefficient_bound(p, k as u64), routes_agree, flagged });
    }
    Ok(LValueTable { p, entries, lambda0: g0.coeff(0) })
}

/// `S_ℓ(k) = Σ_{0<i<k, p∤i} i^{−ℓ}` as an exact rational.
pub fn sum_powers_rational(ell: u32, k: u64, p: u64) -> BigRational {
    let mut acc = BigRational::zero();
    for i in 1..k {
        if i % p != 0 {
            acc += BigRational::new(BigInt::one(), BigInt::from(i).pow(ell));
        }
    }
    acc
}

pub fn sum_powers(ell: u32, k: u64, p: u64, n: i64) -> Result<PadicScalar> {
    check_prime(p)?;
    if ell == 0 || k == 0 {
        return Err(Error::Invalid("need ℓ ≥ 1 and k ≥ 1".into()));
    }
    let s = sum_powers_rational(ell, k, p);
    if s.is_zero() {
        return Ok(PadicScalar::exact_int(p, 0, n));
    }
    padic_from_ratio(&s, p, n)
}

#[derive(Clone, Debug)]
pub struct SumCheck {
    pub ell: u32,
    pub n: u64,
    /// Valuation bound of LHS − (truncated RHS).
    pub residual: Option<i64>,
    /// Certified lower bound for the valuation of the dropped tail.
    pub tail_bound: Rat,
    /// `min(residual, tail)`.
    pub achieved: Rat,
    pub target: i64,
    /// For `ℓ = 1`: valuation bound of `S_1(np) − (g_0(np) − g_0(0))`.
    pub shortcut: Option<Rat>,
}

impl SumCheck {
    pub fn passed(&self) -> bool {
        self.achieved >= int(self.target) && self.shortcut.is_none_or(|s| s >= int(self.target))
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ell": self.ell,
            "n": self.n,
            "residual_valuation": self.residual,
            "tail_bound": format_rat(&self.tail_bound),
            "achieved": format_rat(&self.achieved),
            "target": self.target,
            "shortcut": self.shortcut.map(|s| format_rat(&s)),
            "passed": self.passed(),
        })
    }
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn as_rat(v: Option<i64>) -> Rat {
    // exact agreement counts as arbitrarily good; cap at a large finite value
    v.map(int).unwrap_or(int(i64::MAX / 4))
}

/// Check the identity between `S_ℓ(np)` and the L-values in `table`.
pub fn check_sum_identity(
    ell: u32,
    n: u64,
    table: &LValueTable,
    g0: Option<&PSeries>,
    target: i64,
) -> Result<SumCheck> {
    let p = table.p;
    let np = n * p;
    let vnp = u64_valuation(np, p);
    let work = target + 8;
    let mut lhs = sum_powers(ell, np, p, work + ell as i64)?;
    lhs = lhs.try_div(&PadicScalar::exact_int(p, ell as i64, work))?;
    if ell % 2 == 0 {
        lhs = lhs.neg_ref();
    }
    let m_lo = 1.max((ell as u64).div_ceil(2));
    let m_max = table.entries.iter().map(|e| e.m).max().unwrap_or(0);
    let mut rhs = PadicScalar::exact_int(p, 0, work);
    for e in table.entries.iter().filter(|e| e.m >= m_lo) {
        let s = 1 + 2 * e.m;
        let coef = PadicScalar::exact_int(p, binomial(s, ell as u64) * BigInt::from(np).pow((s - ell as u64) as u32), work);
        let b = e.value.try_div(&PadicScalar::exact_int(p, s as i64, work))?;
        rhs = rhs.add_ref(&coef.mul_ref(&b));
    }
    rhs = rhs.neg_ref();
    let residual = lhs.sub_ref(&rhs).valuation_bound();

    // dropped terms: m > m_max, valued with the coefficient bounds
    let mut tail = None::<i64>;
    let mut m = m_max.max(m_lo - 1) + 1;
    loop {
        let s = 1 + 2 * m;
        let t = (s as i64 - ell as i64) * vnp + g0_coefficient_bound(p, 2 * m) - u64_valuation(s, p);
        tail = min_opt(tail, Some(t));
        // later terms grow at least like 2·v(np) per step minus a log
        let floor = (s as i64 - ell as i64) * vnp - 2 * (((s as f64).log(p as f64)).ceil() as i64) - 2;
        if floor > tail.unwrap() + 2 || m > m_max + 100_000 {
            break;
        }
        m += 1;
    }
    let tail_bound = int(tail.unwrap());
    let achieved = as_rat(residual).min(tail_bound);

    let shortcut = match (ell, g0) {
        (1, Some(g)) => {
            let x = PadicScalar::exact_int(p, np as i64, work);
            let mut acc = PadicScalar::exact_int(p, 0, work);
            let mut pow = x.clone();
            let top = g.trunc().unwrap_or(g.max_index());
            for k in 1..=top {
                acc = acc.add_ref(&g.coeff(k).mul_ref(&pow));
                pow = pow.mul_ref(&x);
            }
            let s1 = sum_powers(1, np, p, work)?;
            let r = s1.sub_ref(&acc).valuation_bound();
            let mut t = None::<i64>;
            for k in (top + 1)..(top + 1 + 64 * (work + 4)) {
                let b = g0_coefficient_bound(p, k as u64) + k * vnp;
                t = min_opt(t, Some(b));
            }
            Some(as_rat(r).min(int(t.unwrap_or(i64::MAX / 4))))
        }
        _ => None,
    };
    if tail_bound < int(target) {
        return Err(Error::Inconclusive(format!(
            "dropped tail only bounded by p^{} (target p^{target}); extend the L-value table",
            format_rat(&tail_bound)
        )));
    }
    Ok(SumCheck { ell, n, residual, tail_bound, achieved, target, shortcut })
}

/// `v_p(S_1(p^k)) − k` for `k = 1..=kmax`.
pub fn harmonic_drift(p: u64, kmax: u32) -> Vec<Option<i64>> {
    (1..=kmax)
        .map(|k| {
            let s = sum_powers_rational(1, p.pow(k), p);
            crate::padic::rational_valuation(&s, p).map(|v| v - k as i64)
        })
        .collect()
}

/// Generic radius exponent of `Y′ = g_0 Y` at `x_{0,ρ}`, from the closed
/// form on `[r_n, r_{n−1}]` (`None` outside the reachable branches).
pub fn gamma_module_radius_exponent(p: u64, r: Rat) -> Option<LogRadius> {
    let pi = p as i64;
    let w = rat(1, pi - 1);
    if r >= rat(1, pi) {
        return Some(LogRadius::Finite(w + rat(1, pi)));
    }
    let g = g0_norm_exponent(p, r)?;
    // ω/|g_0| once |g_0| > ρ^{-1}
    if g < -r {
        Some(LogRadius::Finite(w - g))
    } else {
        None
    }
}
