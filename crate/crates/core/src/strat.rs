//! Differential systems `Y' = G·Y`, their stratifications and the
//! deformation to `(q,h)`-difference systems `σ(Y) = A·Y`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::SeriesMatrix;
use crate::radius::{int, rat, LogRadius, Rat};
use crate::scalar::{factorial_valuation, Scalar};
use crate::series::{radius_bracket_of_points, DifferenceOperator, RadiusBracket, Series};

/// Where the system lives, relative to the expansion centre `c`.
#[derive(Clone, Debug, PartialEq)]
pub enum Region {
    AffineLine,
    /// Open disc `D⁻(c, R)`.
    Disc { radius: LogRadius },
    /// Open annulus `inner < |T − c| < outer`.
    Annulus { inner: LogRadius, outer: LogRadius },
}

impl Region {
    /// Whether the generic point `x_{c,ρ}` lies in the region.
    pub fn contains(&self, rho: &LogRadius) -> bool {
        match self {
            Region::AffineLine => !matches!(rho, LogRadius::Infinite),
            Region::Disc { radius } => rho < radius,
            Region::Annulus { inner, outer } => inner < rho && rho < outer,
        }
    }

    /// Radius of the largest open disc around `x_{c,ρ}` inside the region.
    pub fn disc_radius_at(&self, rho: &LogRadius) -> LogRadius {
        match self {
            Region::AffineLine => LogRadius::Infinite,
            Region::Disc { radius } => *radius,
            Region::Annulus { .. } => *rho,
        }
    }

    /// Default sample radii (as `log_p`-exponents `r` with `ρ = p^{−r}`).
    pub fn default_samples(&self) -> Vec<LogRadius> {
        let shift = |base: Rat, ds: &[Rat]| ds.iter().map(|d| LogRadius::Finite(base + *d)).collect::<Vec<_>>();
        match self {
            Region::AffineLine => shift(Rat::from_integer(0), &[int(0), int(-1), int(-2)]),
            Region::Disc { radius } => match radius {
                LogRadius::Finite(r) => shift(*r, &[rat(1, 2), int(1), int(2)]),
                LogRadius::Infinite => shift(int(0), &[int(0), int(-1), int(-2)]),
                LogRadius::Zero => vec![],
            },
            Region::Annulus { inner, outer } => match (inner, outer) {
                (LogRadius::Finite(a), LogRadius::Finite(b)) => {
                    let w = *a - *b;
                    shift(*b, &[w / 4, w / 2, w * 3 / 4])
                }
                (LogRadius::Finite(a), LogRadius::Infinite) => shift(*a, &[int(-1), int(-2), int(-3)]),
                (LogRadius::Zero, LogRadius::Finite(b)) => shift(*b, &[int(1), int(2), int(3)]),
                _ => shift(int(0), &[int(0), int(-1), int(1)]),
            },
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Region::AffineLine => json!({ "kind": "line" }),
            Region::Disc { radius } => json!({ "kind": "disc", "radius": radius.to_json_string() }),
            Region::Annulus { inner, outer } => {
                json!({ "kind": "annulus", "inner": inner.to_json_string(), "outer": outer.to_json_string() })
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let kind = v.get("kind").and_then(Value::as_str).unwrap_or("line");
        let field = |k: &str| -> Result<LogRadius> {
            let s = v.get(k).and_then(Value::as_str).ok_or_else(|| Error::Parse(format!("region: missing {k}")))?;
            LogRadius::parse(s)
        };
        match kind {
            "line" => Ok(Region::AffineLine),
            "disc" => Ok(Region::Disc { radius: field("radius")? }),
            "annulus" => {
                let (inner, outer) = (field("inner")?, field("outer")?);
                if inner >= outer {
                    return Err(Error::Invalid("annulus with inner radius ≥ outer radius".into()));
                }
                Ok(Region::Annulus { inner, outer })
            }
            other => Err(Error::Parse(format!("unknown region kind {other:?}"))),
        }
    }
}

/// `Y' = G·Y` on a region, with `G` expanded around the region's centre.
#[derive(Clone, Debug)]
pub struct DiffSystem<S> {
    pub g: SeriesMatrix<S>,
    pub region: Region,
}

impl<S: Scalar> DiffSystem<S> {
    pub fn new(g: SeriesMatrix<S>, region: Region) -> Self {
        DiffSystem { g, region }
    }

    pub fn center(&self) -> &S {
        self.g.center()
    }

    pub fn rank(&self) -> usize {
        self.g.rank()
    }
}

/// `G_0 = Id`, `G_{n+1} = G_n' + G_n·G`, keeping `G_n` modulo
/// `u^{order − n + 1}`.
pub fn strat_sequence<S: Scalar>(sys: &DiffSystem<S>, n_max: usize, order: i64) -> Vec<SeriesMatrix<S>> {
    let c = sys.center();
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = SeriesMatrix::identity(c, sys.rank());
    for n in 0..=n_max {
        let next = if n < n_max { Some(cur.derivative().add(&cur.mul(&sys.g))) } else { None };
        out.push(cur);
        match next {
            Some(m) => cur = clip(&m, order - n as i64),
            None => break,
        }
    }
    out
}

/// Keep polynomials whole while their degree stays below the working order.
fn clip<S: Scalar>(m: &SeriesMatrix<S>, order: i64) -> SeriesMatrix<S> {
    m.map(|e| if e.trunc().is_none() && e.max_index() <= order { e.clone() } else { e.truncate_to(order.min(e.trunc().unwrap_or(order))) })
}

/// Independent recurrence `G_{n+1} = Σ_k C(n,k) G^{(k)} G_{n−k}`.
pub fn strat_sequence_binomial<S: Scalar>(sys: &DiffSystem<S>, n_max: usize, order: i64) -> Vec<SeriesMatrix<S>> {
    let c = sys.center();
    let mut derivs = vec![sys.g.clone()];
    for _ in 1..n_max {
        let d = derivs.last().unwrap().derivative();
        derivs.push(d);
    }
    let mut out = vec![SeriesMatrix::identity(c, sys.rank())];
    for n in 0..n_max {
        let mut acc = SeriesMatrix::zero(c, sys.rank());
        let mut binom = c.one_like();
        for k in 0..=n {
            acc = acc.add(&derivs[k].mul(&out[n - k]).scale(&binom));
            binom = binom.mul_ref(&c.from_i64_like((n - k) as i64)).div_i64(k as i64 + 1).expect("binomial");
        }
        out.push(clip(&acc, order - n as i64));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenericRadius {
    pub lower: LogRadius,
    pub upper: LogRadius,
    /// Exact value when a closed form applies.
    pub closed_form: Option<LogRadius>,
    /// Liminf bracket from the norm sequence (before clamping).
    pub bracket: Option<RadiusBracket>,
    /// All norms used were certified.
    pub certified: bool,
}

impl GenericRadius {
    pub fn to_json(&self) -> Value {
        json!({
            "lower": self.lower.to_json_string(),
            "upper": self.upper.to_json_string(),
            "closed_form": self.closed_form.map(|r| r.to_json_string()),
            "certified": self.certified,
        })
    }
}

/// Assemble a generic radius from the points `(n, −log_p|G_n/n!|)`.
pub(crate) fn radius_from_points(
    points: &[(i64, Rat)],
    m: i64,
    p: u64,
    cap: LogRadius,
    a_priori: LogRadius,
    closed_form: Option<LogRadius>,
    certified: bool,
) -> Result<GenericRadius> {
    let bracket = radius_bracket_of_points(points, m, p);
    if let Some(cf) = closed_form {
        let v = cf.min(cap);
        return Ok(GenericRadius { lower: v, upper: v, closed_form: Some(v), bracket: bracket.ok(), certified });
    }
    let b = bracket?;
    let lower = b.lower.max(a_priori).min(cap);
    let upper = b.upper.max(lower).min(cap);
    Ok(GenericRadius { lower, upper, closed_form: None, bracket: Some(b), certified })
}

/// Generic radius of convergence of the solutions at `x_{c,ρ}`.
pub fn radius_at<S: Scalar>(sys: &DiffSystem<S>, rho: &LogRadius, m: usize) -> Result<GenericRadius> {
    let r = match rho {
        LogRadius::Finite(r) => *r,
        _ => return Err(Error::Invalid("generic point needs 0 < ρ < ∞".into())),
    };
    if !sys.region.contains(rho) {
        return Err(Error::Invalid(format!("x_(c,ρ) with log ρ exponent {} is outside the region", rho.to_json_string())));
    }
    let p = sys.center().prime();
    let order = sys.g.trunc().unwrap_or(i64::MAX / 4).min(2 * m as i64 + 64);
    let seq = strat_sequence(sys, m, order);
    let mut certified = true;
    let mut points = Vec::with_capacity(m);
    for (n, gn) in seq.iter().enumerate().skip(1) {
        let (norm, ok) = gn.gauss_norm_flagged(rho);
        certified &= ok;
        if let LogRadius::Finite(e) = norm {
            points.push((n as i64, e - factorial_valuation(n as u64, p)));
        }
    }
    let cap = sys.region.disc_radius_at(rho);
    let e1 = match sys.g.gauss_norm_flagged(rho).0 {
        LogRadius::Finite(e) => e,
        LogRadius::Zero => {
            // G = 0: solutions are constant
            return Ok(GenericRadius { lower: cap, upper: cap, closed_form: Some(cap), bracket: None, certified });
        }
        LogRadius::Infinite => return Err(Error::Invalid("unbounded connection matrix".into())),
    };
    let w = rat(1, p as i64 - 1);
    // ‖d/dT‖ on the generic disc is ρ^{-1}, exponent −r
    let a_priori = LogRadius::Finite(w - e1.min(-r));
    let closed = if sys.rank() == 1 && e1 < -r { Some(LogRadius::Finite(w - e1)) } else { None };
    radius_from_points(&points, m as i64, p, cap, a_priori, closed, certified)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Compatible,
    Incompatible,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Compatible => "compatible",
            Verdict::Incompatible => "incompatible",
            Verdict::Inconclusive => "inconclusive",
        }
    }

    /// Compare `R_σ = |(q−1)T + h|(x)` with a generic-radius bracket.
    pub fn judge(r_sigma: &LogRadius, lo: &LogRadius, hi: &LogRadius) -> Verdict {
        if r_sigma < lo {
            Verdict::Compatible
        } else if hi <= r_sigma {
            Verdict::Incompatible
        } else {
            Verdict::Inconclusive
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificateEntry {
    pub rho: LogRadius,
    pub r_sigma: LogRadius,
    pub lo: LogRadius,
    pub hi: LogRadius,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub entries: Vec<CertificateEntry>,
    pub verdict: Verdict,
}

impl Certificate {
    pub fn from_entries(entries: Vec<CertificateEntry>) -> Self {
        let verdict = if entries.iter().any(|e| e.verdict == Verdict::Incompatible) {
            Verdict::Incompatible
        } else if !entries.is_empty() && entries.iter().all(|e| e.verdict == Verdict::Compatible) {
            Verdict::Compatible
        } else {
            Verdict::Inconclusive
        };
        Certificate { entries, verdict }
    }

    pub fn to_json(&self, center: &str) -> Value {
        let pts: Vec<Value> = self
            .entries
            .iter()
            .map(|e| {
                json!({
                    "point": { "center": center, "log_rho": e.rho.to_json_string() },
                    "R_sigma": e.r_sigma.to_json_string(),
                    "R_generic_lo": e.lo.to_json_string(),
                    "R_generic_hi": e.hi.to_json_string(),
                    "verdict": e.verdict.as_str(),
                })
            })
            .collect();
        json!({ "verdict": self.verdict.as_str(), "points": pts })
    }
}

/// `R_σ(x_{c,ρ})`, the Gauss norm of `(q−1)(T − c) + δ(c)`.
pub fn r_sigma<S: Scalar>(sigma: &DifferenceOperator<S>, c: &S, rho: &LogRadius) -> LogRadius {
    let qm1 = sigma.q().sub_ref(&sigma.q().one_like());
    let dc = sigma.delta_at(c);
    let a = match qm1.valuation() {
        Some(v) => LogRadius::Finite(int(v)).mul(rho),
        None => LogRadius::Zero,
    };
    let b = match dc.valuation() {
        Some(v) => LogRadius::Finite(int(v)),
        None => LogRadius::Zero,
    };
    a.max(b)
}

/// Sample `R_σ < R_generic` at generic points of the region.
pub fn compatible_system<S: Scalar>(
    sys: &DiffSystem<S>,
    sigma: &DifferenceOperator<S>,
    samples: Option<&[LogRadius]>,
    m: usize,
) -> Result<Certificate> {
    let default = sys.region.default_samples();
    let samples = samples.unwrap_or(&default);
    let mut entries = Vec::with_capacity(samples.len());
    for rho in samples {
        let gr = radius_at(sys, rho, m)?;
        let rs = r_sigma(sigma, sys.center(), rho);
        entries.push(CertificateEntry { rho: *rho, r_sigma: rs, lo: gr.lower, hi: gr.upper, verdict: Verdict::judge(&rs, &gr.lower, &gr.upper) });
    }
    Ok(Certificate::from_entries(entries))
}

#[derive(Clone, Debug)]
pub struct DeformOptions {
    /// Truncation order of the result.
    pub order: i64,
    /// Absolute precision target.
    pub prec: i64,
    /// Hard limit on the number of Taylor terms.
    pub n_max: usize,
}

impl Default for DeformOptions {
    fn default() -> Self {
        DeformOptions { order: 30, prec: 40, n_max: 400 }
    }
}

/// `A = Σ_n G_n·δ^n/n!` with `δ = (q−1)(T−c) + δ(c)` given as a series.
pub(crate) fn deform_with_delta<S: Scalar>(
    sys: &DiffSystem<S>,
    delta: &Series<S>,
    opts: &DeformOptions,
) -> Result<SeriesMatrix<S>> {
    let c = sys.center();
    let work = opts.order + opts.n_max as i64;
    let mut gn = SeriesMatrix::identity(c, sys.rank());
    let mut dn = Series::one(c.clone()).cap_precision(opts.prec);
    let mut acc = SeriesMatrix::identity(c, sys.rank());
    let mut quiet = 0;
    for n in 1..=opts.n_max {
        gn = clip(&gn.derivative().add(&gn.mul(&sys.g)), work - n as i64);
        dn = dn.mul(delta).truncate_to(opts.order).try_map(|a| a.div_i64(n as i64))?;
        let term = gn.mul_series(&dn).truncate_to(opts.order);
        if let Some(t) = gn.trunc() {
            if t < opts.order {
                return Err(Error::Convergence(format!(
                    "connection matrix known to order {} only; need {} more terms",
                    sys.g.trunc().unwrap_or(0),
                    opts.order - t
                )));
            }
        }
        let small = term.entries().iter().all(|e| (0..=opts.order).all(|k| e.coeff(k).valuation_bound().is_none_or(|v| v >= opts.prec)));
        acc = acc.add(&term);
        quiet = if small { quiet + 1 } else { 0 };
        if quiet >= 4 {
            return Ok(acc.cap_precision(opts.prec).truncate_to(opts.order));
        }
    }
    Err(Error::Convergence(format!("Taylor series did not reach precision {} within {} terms", opts.prec, opts.n_max)))
}

/// Deform a differential system along `σ_{q,h}`; requires a compatible
/// certificate for the same system and operator.
pub fn deform<S: Scalar>(
    sys: &DiffSystem<S>,
    sigma: &DifferenceOperator<S>,
    cert: &Certificate,
    opts: &DeformOptions,
) -> Result<SeriesMatrix<S>> {
    match cert.verdict {
        Verdict::Compatible => {}
        Verdict::Incompatible => return Err(Error::NotCompatible("R_σ ≥ generic radius at a sample point".into())),
        Verdict::Inconclusive => return Err(Error::Inconclusive("radius bracket straddles R_σ".into())),
    }
    deform_with_delta(sys, &sigma.delta_series(sys.center()), opts)
}

/// Certify with the default samples, then deform.
pub fn deform_checked<S: Scalar>(
    sys: &DiffSystem<S>,
    sigma: &DifferenceOperator<S>,
    opts: &DeformOptions,
) -> Result<(SeriesMatrix<S>, Certificate)> {
    let cert = compatible_system(sys, sigma, None, 32)?;
    let a = deform(sys, sigma, &cert, opts)?;
    Ok((a, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicScalar;
    use crate::scalar::RationalScalar;

    fn r(n: i64) -> RationalScalar {
        RationalScalar::from_i64(3, n)
    }

    #[test]
    fn strat_recurrences_agree() {
        let g = SeriesMatrix::new(
            2,
            vec![
                Series::polynomial(r(0), vec![r(1), r(2)]),
                Series::polynomial(r(0), vec![r(0), r(0), r(1)]),
                Series::constant(r(0), r(3)),
                Series::polynomial(r(0), vec![r(-1), r(1)]),
            ],
        )
        .unwrap();
        let sys = DiffSystem::new(g, Region::AffineLine);
        let a = strat_sequence(&sys, 8, 100);
        let b = strat_sequence_binomial(&sys, 8, 100);
        assert_eq!(a, b);
    }

    #[test]
    fn exp_radius_is_omega() {
        let one = PadicScalar::exact_i64(5, 1);
        let sys = DiffSystem::new(SeriesMatrix::scalar(Series::constant(one.zero_like(), one)), Region::AffineLine);
        let gr = radius_at(&sys, &LogRadius::Finite(int(0)), 60).unwrap();
        // |G| = 1 = ρ^{-1}: no closed form, bracket from the factorials
        assert!(gr.closed_form.is_none());
        assert!(gr.lower <= LogRadius::omega(5) && LogRadius::omega(5) <= gr.upper);
        assert_eq!(gr.lower, LogRadius::omega(5));
    }

    #[test]
    fn deform_exp_matches_closed_form() {
        let p = 3;
        let one = PadicScalar::exact_i64(p, 1);
        let c = one.zero_like();
        let unit_disc = Region::Disc { radius: LogRadius::Finite(int(0)) };
        let sys = DiffSystem::new(SeriesMatrix::scalar(Series::constant(c.clone(), one.clone())), unit_disc);
        let sigma = DifferenceOperator::new(PadicScalar::exact_i64(p, 10), c.clone()).unwrap();
        let (a, cert) = deform_checked(&sys, &sigma, &DeformOptions { order: 12, prec: 30, n_max: 200 }).unwrap();
        assert_eq!(cert.verdict, Verdict::Compatible);
        // exp(9T)
        let mut coeff = one.clone();
        for k in 0..=12 {
            let ak = a.get(0, 0).coeff(k);
            assert!(ak.sub_ref(&coeff).valuation_bound().is_none_or(|v| v >= 30), "k={k}");
            coeff = coeff.mul_ref(&PadicScalar::exact_i64(p, 9)).div_i64(k + 1).unwrap();
        }
    }

    #[test]
    fn deform_refuses_incompatible() {
        let one = PadicScalar::exact_i64(3, 1);
        let c = one.zero_like();
        let sys = DiffSystem::new(SeriesMatrix::scalar(Series::constant(c.clone(), one.clone())), Region::AffineLine);
        // h = 1 is far too big: R_σ = 1 > ω
        let sigma = DifferenceOperator::new(one.clone(), one.clone()).unwrap();
        let err = deform_checked(&sys, &sigma, &DeformOptions::default()).unwrap_err();
        assert!(matches!(err, Error::NotCompatible(_)));
    }
}
