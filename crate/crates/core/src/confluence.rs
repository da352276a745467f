//! `σ_{q,h}`-modules `σ(Y) = A·Y` and their confluence to differential
//! systems.

use crate::error::{Error, Result};
use crate::matrix::SeriesMatrix;
use crate::qcalc::{omega_q, q_factorial_valuations, q_is_one, QContext};
use crate::radius::{floor_rat, int, LogRadius};
use crate::scalar::{Dual, Scalar};
use crate::series::{twisted_derivative, DifferenceOperator, Series};
use crate::strat::{
    deform_with_delta, r_sigma, radius_from_points, Certificate, CertificateEntry, DeformOptions, DiffSystem,
    GenericRadius, Region, Verdict,
};

#[derive(Clone, Debug)]
pub struct DiffModule<S> {
    pub a: SeriesMatrix<S>,
    pub sigma: DifferenceOperator<S>,
    pub region: Region,
}

/// `(q, h) ≠ (1, 0)`. Over `Q_p` with `|q − 1| < 1` the only root of unity
/// in reach is `q = 1`.
pub fn nondegenerate<S: Scalar>(sigma: &DifferenceOperator<S>) -> bool {
    !sigma.is_identity()
}

impl<S: Scalar> DiffModule<S> {
    pub fn new(a: SeriesMatrix<S>, sigma: DifferenceOperator<S>, region: Region) -> Result<Self> {
        if !nondegenerate(&sigma) {
            return Err(Error::Degenerate("σ is the identity".into()));
        }
        Ok(DiffModule { a, sigma, region })
    }

    pub fn center(&self) -> &S {
        self.a.center()
    }

    pub fn rank(&self) -> usize {
        self.a.rank()
    }

    /// `G_[1] = (A − Id)/((q−1)T + h)`.
    pub fn first_connection(&self) -> Result<SeriesMatrix<S>> {
        divide_by_delta(&self.a, &self.sigma)
    }
}

fn divide_by_delta<S: Scalar>(a: &SeriesMatrix<S>, sigma: &DifferenceOperator<S>) -> Result<SeriesMatrix<S>> {
    let c = a.center();
    let num = a.sub(&SeriesMatrix::identity(c, a.rank()));
    let qm1 = sigma.q().sub_ref(&sigma.q().one_like());
    let dc = sigma.delta_at(c);
    if q_is_one(sigma.q()) {
        return num.try_map(|e| e.try_map(|x| x.try_div(sigma.h())));
    }
    let alpha = dc.neg_ref().try_div(&qm1)?;
    num.try_map(|e| divide_by_root(e, &alpha)?.try_map(|x| x.try_div(&qm1)))
}

/// `f/(u − α)`, failing when `α` is not a root of `f` to known precision.
pub(crate) fn divide_by_root<S: Scalar>(f: &Series<S>, alpha: &S) -> Result<Series<S>> {
    let c = f.center();
    if f.min_index() < 0 {
        return Err(Error::Invalid("division of a Laurent tail".into()));
    }
    let malformed = |r: &S| Error::MalformedModule(format!("A − Id does not vanish at the fixed point (remainder valuation {:?})", r.valuation()));
    let top = f.max_index();
    if alpha.is_zero() {
        let r = f.coeff(0);
        if !r.is_zero() {
            return Err(malformed(&r));
        }
        let coeffs: Vec<S> = (1..=top.max(0)).map(|n| f.coeff(n)).collect();
        return Ok(match f.trunc() {
            Some(m) => Series::truncated(c.clone(), coeffs, m - 1),
            None => Series::polynomial(c.clone(), coeffs),
        });
    }
    let e = alpha.valuation_bound().unwrap_or(0);
    match f.trunc() {
        None => {
            if top < 0 {
                return Ok(f.clone());
            }
            let (q, r) = synthetic_top_down(f, alpha, top);
            if !r.is_zero() {
                return Err(malformed(&r));
            }
            Ok(Series::polynomial(c.clone(), q))
        }
        Some(m) if e > 0 => {
            let (mut q, mut r) = synthetic_top_down(f, alpha, m);
            if let Some(model) = f.tail_model() {
                for (i, b) in q.iter_mut().enumerate() {
                    *b = b.with_abs_cap(floor_rat(&model.mixing_bound(m, i as i64 + 1, int(e))));
                }
                r = r.with_abs_cap(floor_rat(&model.mixing_bound(m, 0, int(e))));
            }
            if !r.is_zero() {
                return Err(malformed(&r));
            }
            Ok(Series::truncated(c.clone(), q, m - 1))
        }
        Some(m) => {
            // |α| ≥ 1: (u − α) is a unit and the bottom-up recursion is stable
            let mut q = Vec::with_capacity(m as usize + 1);
            let mut prev = c.zero_like();
            for k in 0..=m {
                let b = prev.sub_ref(&f.coeff(k)).try_div(alpha)?;
                q.push(b.clone());
                prev = b;
            }
            Ok(Series::truncated(c.clone(), q, m))
        }
    }
}

/// Quotient coefficients `b_0..b_{top−1}` and remainder of `Σ_{k≤top} a_k u^k`
/// divided by `u − α`.
fn synthetic_top_down<S: Scalar>(f: &Series<S>, alpha: &S, top: i64) -> (Vec<S>, S) {
    let c = f.center();
    let mut q = vec![c.zero_like(); top.max(0) as usize];
    let mut carry = f.coeff(top);
    for i in (0..top).rev() {
        q[i as usize] = carry.clone();
        carry = f.coeff(i).add_ref(&carry.mul_ref(alpha));
    }
    (q, carry)
}

/// `G_[0] = Id`, `G_[n+1] = σ(G_[n])·G_[1] + d_{q,h}(G_[n])`.
pub fn twisted_strat_sequence<S: Scalar>(module: &DiffModule<S>, n_max: usize) -> Result<Vec<SeriesMatrix<S>>> {
    let g1 = module.first_connection()?;
    let mut out = vec![SeriesMatrix::identity(module.center(), module.rank())];
    let mut cur = g1.clone();
    for n in 1..=n_max {
        out.push(cur.clone());
        if n == n_max {
            break;
        }
        let shifted = cur.compose_affine(&module.sigma)?;
        let d = cur.try_map(|e| twisted_derivative(e, &module.sigma))?;
        cur = shifted.mul(&g1).add(&d);
        if cur.trunc().is_some_and(|t| t < 0) {
            return Err(Error::Convergence(format!("A known to too low an order for {n_max} twisted derivatives")));
        }
    }
    Ok(out)
}

/// Generic radius of the module at `x_{c,ρ}` from `|G_[n]/[n]_q!|`.
pub fn generic_radius<S: Scalar>(module: &DiffModule<S>, rho: &LogRadius, m: usize) -> Result<GenericRadius> {
    let r = match rho {
        LogRadius::Finite(r) => *r,
        _ => return Err(Error::Invalid("generic point needs 0 < ρ < ∞".into())),
    };
    if !module.region.contains(rho) {
        return Err(Error::Invalid(format!("log ρ exponent {} is outside the region", rho.to_json_string())));
    }
    let q = module.sigma.q();
    let seq = twisted_strat_sequence(module, m)?;
    let qfact = q_factorial_valuations(m as u64, q);
    let mut certified = true;
    let mut points = Vec::with_capacity(m);
    for (n, gn) in seq.iter().enumerate().skip(1) {
        let (norm, ok) = gn.gauss_norm_flagged(rho);
        certified &= ok;
        if let (LogRadius::Finite(e), Some(vf)) = (norm, qfact[n]) {
            points.push((n as i64, e - vf));
        }
    }
    let cap = module.region.disc_radius_at(rho);
    let ctx = QContext::new(q.clone(), module.sigma.h().clone());
    let wq = match omega_q(&ctx) {
        LogRadius::Finite(w) => w,
        _ => return Err(Error::Invalid("ω_q undefined".into())),
    };
    let e1 = match seq[1].gauss_norm_flagged(rho).0 {
        LogRadius::Finite(e) => e,
        LogRadius::Zero => return Ok(GenericRadius { lower: cap, upper: cap, closed_form: Some(cap), bracket: None, certified }),
        LogRadius::Infinite => return Err(Error::Invalid("unbounded G_[1]".into())),
    };
    // ‖d_{q,h}‖ on the generic disc is taken as ρ^{-1}
    let a_priori = LogRadius::Finite(wq - e1.min(-r));
    let closed = if module.rank() == 1 && e1 < -r { Some(LogRadius::Finite(wq - e1)) } else { None };
    radius_from_points(&points, m as i64, module.center().prime(), cap, a_priori, closed, certified)
}

/// Sample `R_σ < R_generic` for a module.
pub fn compatible<S: Scalar>(module: &DiffModule<S>, samples: Option<&[LogRadius]>, m: usize) -> Result<Certificate> {
    let default = module.region.default_samples();
    let samples = samples.unwrap_or(&default);
    let mut entries = Vec::with_capacity(samples.len());
    for rho in samples {
        let gr = generic_radius(module, rho, m)?;
        let rs = r_sigma(&module.sigma, module.center(), rho);
        entries.push(CertificateEntry { rho: *rho, r_sigma: rs, lo: gr.lower, hi: gr.upper, verdict: Verdict::judge(&rs, &gr.lower, &gr.upper) });
    }
    Ok(Certificate::from_entries(entries))
}

#[derive(Clone, Debug)]
pub struct LimitOptions {
    /// Largest `n` in `τ = σ^{p^n}`.
    pub n_max: u32,
    /// Agreement valuation required between consecutive approximations.
    pub target: i64,
    /// Compare coefficients up to this index.
    pub order: i64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions { n_max: 8, target: 6, order: 10 }
    }
}

#[derive(Clone, Debug)]
pub struct Confluence<S> {
    pub g: SeriesMatrix<S>,
    /// Agreement valuation per step (`None` when two steps agree exactly).
    pub history: Vec<Option<i64>>,
    /// Certified absolute precision of `g`.
    pub precision: Option<i64>,
}

/// `G = lim_n (A_{σ^{p^n}} − Id)/((q^{p^n}−1)T + [p^n]_q h)`.
pub fn confluent_connection_limit<S: Scalar>(module: &DiffModule<S>, opts: &LimitOptions) -> Result<Confluence<S>> {
    let p = module.center().prime();
    let mut tau = module.sigma.clone();
    let mut a_tau = module.a.clone();
    let mut prev: Option<SeriesMatrix<S>> = None;
    let mut history = Vec::new();
    for n in 0..=opts.n_max {
        let g = divide_by_delta(&a_tau, &tau)?;
        if let Some(pg) = &prev {
            let upto = opts.order.min(g.trunc().unwrap_or(opts.order)).min(pg.trunc().unwrap_or(opts.order));
            let agree = g.agreement(pg, upto);
            history.push(agree);
            let growing = history.len() < 2 || match (history[history.len() - 2], agree) {
                (_, None) => true,
                (Some(x), Some(y)) => y >= x,
                (None, Some(_)) => false,
            };
            if agree.is_none_or(|v| v >= opts.target) && growing {
                let g = match agree {
                    Some(v) => g.cap_precision(v),
                    None => g,
                };
                return Ok(Confluence { g, history, precision: agree });
            }
        }
        prev = Some(g);
        if n == opts.n_max {
            break;
        }
        // A_{τ^{j+1}} = (A_{τ^j}∘τ)·A_τ, j = 1..p−1
        let mut acc = a_tau.clone();
        for _ in 1..p {
            acc = acc.compose_affine(&tau)?.mul(&a_tau);
        }
        a_tau = acc;
        tau = tau.iterate(p);
    }
    Err(Error::Divergence(format!(
        "agreement {:?} after {} steps, wanted {}",
        history.last().copied().flatten(),
        opts.n_max,
        opts.target
    )))
}

/// A family `A(q, h; T)` analytic in `(q − 1, h)` near `(0, 0)`.
pub trait AnalyticFamily<S: Scalar> {
    fn center(&self) -> S;
    /// `A(1 + a·ε, b·ε; T)` with `ε² = 0`, to order `order`.
    fn first_order(&self, a: &S, b: &S, order: i64) -> Result<SeriesMatrix<Dual<S>>>;
}

/// A differential system viewed as the family of its deformations.
pub struct DeformationFamily<S> {
    pub system: DiffSystem<S>,
    pub prec: i64,
}

impl<S: Scalar> AnalyticFamily<S> for DeformationFamily<S> {
    fn center(&self) -> S {
        self.system.center().clone()
    }

    fn first_order(&self, a: &S, b: &S, order: i64) -> Result<SeriesMatrix<Dual<S>>> {
        let lift = |e: &Series<S>| -> Series<Dual<S>> {
            let c = Dual::real(e.center().clone());
            let coeffs: Vec<Dual<S>> = (0..=e.max_index().max(0)).map(|k| Dual::real(e.coeff(k))).collect();
            match e.trunc() {
                Some(m) => Series::truncated(c, coeffs, m),
                None => Series::polynomial(c, coeffs),
            }
        };
        let c = self.system.center();
        let sys = DiffSystem::new(self.system.g.map_scalars(lift), self.system.region.clone());
        let zero = c.zero_like();
        let dc = a.mul_ref(c).add_ref(b);
        let delta = Series::polynomial(Dual::real(c.clone()), vec![Dual::new(zero.clone(), dc), Dual::new(zero, a.clone())]);
        deform_with_delta(&sys, &delta, &DeformOptions { order, prec: self.prec, n_max: 16 })
    }
}

/// `G = (a·∂_q A + b·∂_h A)|_{(1,0)} / (a·T + b)`.
pub fn confluent_connection_derivative<S: Scalar>(
    family: &dyn AnalyticFamily<S>,
    a: &S,
    b: &S,
    order: i64,
) -> Result<SeriesMatrix<S>> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::Invalid("direction (a, b) = (0, 0)".into()));
    }
    let c = family.center();
    let fo = family.first_order(a, b, order + 1)?;
    let eps = fo.map_scalars(|e| {
        let coeffs: Vec<S> = (0..=e.max_index().max(0)).map(|k| e.coeff(k).eps).collect();
        match e.trunc() {
            Some(m) => Series::truncated(c.clone(), coeffs, m),
            None => Series::polynomial(c.clone(), coeffs),
        }
    });
    let beta = a.mul_ref(&c).add_ref(b);
    let g = if a.is_zero() {
        eps.try_map(|e| e.try_map(|x| x.try_div(&beta)))?
    } else {
        let alpha = beta.neg_ref().try_div(a)?;
        eps.try_map(|e| divide_by_root(e, &alpha)?.try_map(|x| x.try_div(a)))?
    };
    Ok(g.truncate_to(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicScalar;
    use crate::series::series_exp;

    fn exp_module(p: u64, qm1: i64, order: i64, prec: i64) -> DiffModule<PadicScalar> {
        let c = PadicScalar::exact_i64(p, 0);
        let lin = Series::polynomial(c.clone(), vec![c.clone(), PadicScalar::exact_i64(p, qm1)]);
        let a = series_exp(&lin, order, prec).unwrap();
        let sigma = DifferenceOperator::new(PadicScalar::exact_i64(p, 1 + qm1), c).unwrap();
        DiffModule::new(SeriesMatrix::scalar(a), sigma, Region::Disc { radius: LogRadius::Finite(int(0)) }).unwrap()
    }

    #[test]
    fn exp_module_first_connection() {
        let m = exp_module(3, 9, 20, 40);
        let g1 = m.first_connection().unwrap();
        // (exp(9T) − 1)/(9T) = 1 + 9T/2 + …
        assert!(g1.get(0, 0).coeff(0).sub_ref(&PadicScalar::exact_i64(3, 1)).is_zero());
        assert_eq!(g1.get(0, 0).coeff(1).valuation(), Some(2));
    }

    #[test]
    fn malformed_when_a_moves_fixed_point() {
        let c = PadicScalar::exact_i64(3, 0);
        let a = SeriesMatrix::scalar(Series::constant(c.clone(), PadicScalar::exact_i64(3, 2)));
        let sigma = DifferenceOperator::new(PadicScalar::exact_i64(3, 4), c).unwrap();
        let m = DiffModule::new(a, sigma, Region::AffineLine).unwrap();
        assert!(matches!(m.first_connection(), Err(Error::MalformedModule(_))));
    }

    #[test]
    fn limit_recovers_exp_connection() {
        let m = exp_module(3, 9, 16, 60);
        let res = confluent_connection_limit(&m, &LimitOptions { n_max: 8, target: 6, order: 8 }).unwrap();
        let g = res.g.get(0, 0);
        assert!(g.coeff(0).sub_ref(&PadicScalar::exact_i64(3, 1)).valuation_bound().is_none_or(|v| v >= 6));
        for k in 1..=8 {
            assert!(g.coeff(k).valuation_bound().is_none_or(|v| v >= 6), "k={k}: {:?}", g.coeff(k));
        }
    }

    #[test]
    fn derivative_method_inverts_deformation() {
        let p = 5;
        let c = PadicScalar::exact_i64(p, 0);
        let g = Series::polynomial(c.clone(), vec![PadicScalar::exact_i64(p, 2), PadicScalar::exact_i64(p, 7)]);
        let fam = DeformationFamily { system: DiffSystem::new(SeriesMatrix::scalar(g.clone()), Region::AffineLine), prec: 40 };
        let zero = c.clone();
        let one = PadicScalar::exact_i64(p, 1);
        let via_h = confluent_connection_derivative(&fam, &zero, &one, 10).unwrap();
        let via_q = confluent_connection_derivative(&fam, &one, &zero, 10).unwrap();
        assert!(via_h.get(0, 0).agreement(&g, 10).is_none_or(|v| v >= 38));
        assert!(via_q.get(0, 0).agreement(&g, 9).is_none_or(|v| v >= 38));
    }

    #[test]
    fn exp_module_is_compatible_on_unit_disc() {
        let m = exp_module(3, 9, 60, 80);
        let cert = compatible(&m, None, 24).unwrap();
        assert_eq!(cert.verdict, Verdict::Compatible, "{cert:?}");
    }
}
