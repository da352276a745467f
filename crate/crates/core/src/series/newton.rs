//! Newton polygons, Gauss norms and radius brackets.

use num_traits::Zero;
use serde_json::{json, Value};

use super::Series;
use crate::error::{Error, Result};
use crate::radius::{format_rat, int, LogRadius, Rat};
use crate::scalar::Scalar;

/// Lower convex hull of points sorted by strictly increasing abscissa.
/// Collinear middle points are dropped.
pub fn lower_hull(points: &[(i64, Rat)]) -> Vec<(i64, Rat)> {
    let mut hull: Vec<(i64, Rat)> = Vec::with_capacity(points.len());
    for &pt in points {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.1 - o.1) * (pt.0 - o.0) - (pt.1 - o.1) * (a.0 - o.0);
            // a is kept only if it lies strictly below the chord o–pt
            if cross >= Rat::zero() {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

fn merged_sorted(a: &[(i64, Rat)], b: &[(i64, Rat)]) -> Vec<(i64, Rat)> {
    let mut all: Vec<(i64, Rat)> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| x.0.cmp(&y.0).then(x.1.cmp(&y.1)));
    // keep the lowest point per abscissa
    all.dedup_by(|later, earlier| later.0 == earlier.0);
    all
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonPolygon {
    pub vertices: Vec<(i64, Rat)>,
    /// Number of leading vertices that cannot be removed by unknown data.
    pub certified: usize,
}

impl NewtonPolygon {
    pub fn provisional(&self) -> bool {
        self.certified < self.vertices.len()
    }

    pub fn slopes(&self) -> Vec<Rat> {
        self.vertices.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect()
    }

    pub fn contains_vertex(&self, n: i64, v: Rat) -> bool {
        self.vertices.iter().any(|&(m, w)| m == n && w == v)
    }

    pub fn is_certified_vertex(&self, n: i64, v: Rat) -> bool {
        self.vertices[..self.certified].iter().any(|&(m, w)| m == n && w == v)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "vertices": self.vertices.iter().map(|(n, v)| json!([n, format_rat(v)])).collect::<Vec<_>>(),
            "provisional": self.provisional(),
        })
    }
}

/// Known points `(n, v(a_n))` and lower-bound points (inexact zeros).
fn coefficient_points<S: Scalar>(f: &Series<S>) -> (Vec<(i64, Rat)>, Vec<(i64, Rat)>) {
    let mut known = Vec::new();
    let mut bounds = Vec::new();
    for (i, a) in f.coeffs().iter().enumerate() {
        let n = f.min_index() + i as i64;
        match (a.valuation(), a.abs_precision()) {
            (Some(v), _) => known.push((n, int(v))),
            (None, Some(prec)) => bounds.push((n, int(prec))),
            (None, None) => {}
        }
    }
    (known, bounds)
}

pub fn newton_polygon<S: Scalar>(f: &Series<S>) -> NewtonPolygon {
    newton_polygon_with_tail(f, None)
}

/// Newton polygon with an optional lower bound `tail(n)` for the valuations of
/// dropped coefficients `n > M`. Without it the dropped tail is modelled as
/// continuing the terminal segment.
pub fn newton_polygon_with_tail<S: Scalar>(f: &Series<S>, tail: Option<&dyn Fn(i64) -> Rat>) -> NewtonPolygon {
    let (known, mut uncertain) = coefficient_points(f);
    let vertices = lower_hull(&known);
    if vertices.is_empty() {
        return NewtonPolygon { vertices, certified: 0 };
    }
    if let Some(m) = f.trunc() {
        let horizon = 4 * (m + 1);
        match tail {
            Some(t) => uncertain.extend((m + 1..=horizon).map(|n| (n, t(n)))),
            None => {
                if let Some(model) = f.tail_model() {
                    uncertain.extend((m + 1..=horizon).map(|n| (n, model.b + model.s * (n - m - 1))));
                }
            }
        }
    }
    if uncertain.is_empty() {
        let certified = vertices.len();
        return NewtonPolygon { vertices, certified };
    }
    let extended = lower_hull(&merged_sorted(&known, &uncertain));
    let mut certified = 0;
    for v in &vertices {
        if extended.contains(v) {
            certified += 1;
        } else {
            break;
        }
    }
    NewtonPolygon { vertices, certified }
}

fn finite_exponent(rho: &LogRadius) -> Option<Rat> {
    rho.exponent()
}

/// `|f|(x_{c,ρ})` together with a flag telling whether the finite maximum is
/// provably the supremum over the full series.
pub fn gauss_norm_flagged<S: Scalar>(f: &Series<S>, rho: &LogRadius) -> (LogRadius, bool) {
    gauss_norm_impl(f, rho, None)
}

pub fn gauss_norm<S: Scalar>(f: &Series<S>, rho: &LogRadius) -> Result<LogRadius> {
    match gauss_norm_flagged(f, rho) {
        (n, true) => Ok(n),
        (bound, false) => Err(Error::Uncertified { bound }),
    }
}

/// Gauss norm with an explicit lower bound for dropped-coefficient valuations.
pub fn gauss_norm_with_tail<S: Scalar>(f: &Series<S>, rho: &LogRadius, tail: &dyn Fn(i64) -> Rat) -> Result<LogRadius> {
    match gauss_norm_impl(f, rho, Some(tail)) {
        (n, true) => Ok(n),
        (bound, false) => Err(Error::Uncertified { bound }),
    }
}

fn gauss_norm_impl<S: Scalar>(f: &Series<S>, rho: &LogRadius, tail: Option<&dyn Fn(i64) -> Rat>) -> (LogRadius, bool) {
    let (known, bounds) = coefficient_points(f);
    let r = match finite_exponent(rho) {
        Some(r) => r,
        None => return degenerate_radius_norm(f, rho, &known),
    };
    let best = known.iter().map(|&(n, v)| v + r * n).min();
    let best_bound = bounds.iter().map(|&(n, v)| v + r * n).min();
    let mut certified = match (best, best_bound) {
        (Some(b), Some(bb)) => bb > b,
        (Some(_), None) => true,
        (None, _) => false,
    };
    let norm = match (best, best_bound) {
        (Some(b), Some(bb)) => LogRadius::Finite(b.min(bb)),
        (Some(b), None) => LogRadius::Finite(b),
        (None, Some(bb)) => LogRadius::Finite(bb),
        (None, None) => LogRadius::Zero,
    };
    if let Some(m) = f.trunc() {
        let floor = match norm {
            LogRadius::Finite(x) => x,
            _ => {
                return (norm, false);
            }
        };
        match tail {
            Some(t) => {
                let horizon = 4 * (m + 1);
                if (m + 1..=horizon).any(|n| t(n) + r * n <= floor) {
                    certified = false;
                }
            }
            None => match f.tail_model() {
                Some(model) if model.s + r > Rat::zero() => {
                    if model.b + r * (m + 1) <= floor {
                        certified = false;
                    }
                }
                _ => certified = false,
            },
        }
    } else if best.is_none() && best_bound.is_none() {
        // the zero polynomial
        certified = true;
    }
    (norm, certified)
}

fn degenerate_radius_norm<S: Scalar>(f: &Series<S>, rho: &LogRadius, known: &[(i64, Rat)]) -> (LogRadius, bool) {
    match rho {
        LogRadius::Zero => {
            if f.min_index() < 0 && known.iter().any(|&(n, _)| n < 0) {
                return (LogRadius::Infinite, true);
            }
            match f.get(0).and_then(|a| a.valuation()) {
                Some(v) => (LogRadius::from_int_exponent(v), true),
                None => (LogRadius::Zero, f.get(0).map_or(true, |a| a.is_exact())),
            }
        }
        _ => {
            if f.trunc().is_some() {
                return (LogRadius::Infinite, false);
            }
            if known.iter().any(|&(n, _)| n > 0) {
                (LogRadius::Infinite, true)
            } else if let Some(&(_, v)) = known.iter().find(|&&(n, _)| n == 0) {
                (LogRadius::Finite(v), true)
            } else {
                (LogRadius::Zero, true)
            }
        }
    }
}

/// Two-sided estimate of a radius of convergence `liminf |a_n|^{-1/n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusBracket {
    /// Smaller radius (larger exponent).
    pub lower: LogRadius,
    pub upper: LogRadius,
    /// The bracket computed from the first half of the data is identical.
    pub stabilized: bool,
}

impl RadiusBracket {
    pub fn contains(&self, r: &LogRadius) -> bool {
        self.lower <= *r && *r <= self.upper
    }

    /// Width in exponent units, when both ends are finite.
    pub fn width(&self) -> Option<Rat> {
        Some(self.lower.exponent()? - self.upper.exponent()?)
    }

    pub fn closed_form(&self) -> Option<LogRadius> {
        (self.stabilized && self.lower == self.upper).then_some(self.lower)
    }
}

/// `min(m/2, p^{k−1})` where `p^k ≤ m < p^{k+1}`, so that the window always
/// spans a full segment between consecutive powers of `p`.
fn window_start(m: i64, p: u64) -> i64 {
    let p = p as i64;
    let mut pk: i64 = 1;
    while pk.saturating_mul(p) <= m {
        pk *= p;
    }
    (m / 2).min((pk / p).max(1))
}

fn bracket_once(points: &[(i64, Rat)], m: i64, p: u64) -> Result<(LogRadius, LogRadius)> {
    if m < 8 {
        return Err(Error::Indeterminate(format!("truncation order {m} is below 8")));
    }
    let ws = window_start(m, p);
    let pts: Vec<(i64, Rat)> = points.iter().copied().filter(|&(n, _)| n <= m && n >= ws).collect();
    if pts.len() < 2 {
        return Err(Error::Indeterminate(format!("fewer than two nonzero coefficients in [{ws}, {m}]")));
    }
    let hull = lower_hull(&pts);
    let mut segments: Vec<&[(i64, Rat)]> = hull.windows(2).collect();
    // the last data point is a vertex of every truncated hull, so the segment
    // ending there says more about the truncation than about the series
    if segments.len() > 1 {
        segments.pop();
    }
    let slopes: Vec<Rat> = segments.iter().map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    if slopes.is_empty() {
        return Err(Error::Indeterminate("no hull segment meets the window".into()));
    }
    let smin = *slopes.iter().min().unwrap();
    let smax = *slopes.iter().max().unwrap();
    Ok((LogRadius::Finite(-smin), LogRadius::Finite(-smax)))
}

/// Bracket the radius of `Σ a_n X^n` from points `(n, v(a_n))`, `n ≤ m`.
///
/// Only points in the window `[min(m/2, p^{k−1}), m]` are used, `p^k` being
/// the largest power of `p` not exceeding `m`. The bracket is spanned by the
/// slopes of the lower hull of those points, except the terminal segment when
/// others exist.
pub fn radius_bracket_of_points(points: &[(i64, Rat)], m: i64, p: u64) -> Result<RadiusBracket> {
    let (lower, upper) = bracket_once(points, m, p)?;
    let stabilized = match bracket_once(points, m / 2, p) {
        Ok((l, u)) => l == lower && u == upper,
        Err(_) => false,
    };
    Ok(RadiusBracket { lower, upper, stabilized })
}

pub fn radius_estimate<S: Scalar>(f: &Series<S>) -> Result<RadiusBracket> {
    let m = match f.trunc() {
        Some(m) => m,
        None => {
            return Ok(RadiusBracket { lower: LogRadius::Infinite, upper: LogRadius::Infinite, stabilized: true });
        }
    };
    let (known, _) = coefficient_points(f);
    radius_bracket_of_points(&known, m, f.prime())
}

fn block_once(pts: &[(i64, Rat)]) -> Option<(LogRadius, LogRadius)> {
    let hull = lower_hull(pts);
    if hull.len() < 2 {
        return None;
    }
    let slopes: Vec<Rat> = hull.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    let smin = *slopes.iter().min().unwrap();
    let smax = *slopes.iter().max().unwrap();
    Some((LogRadius::Finite(-smin), LogRadius::Finite(-smax)))
}

/// Radius bracket from the hull over the last complete block `[p^{k−1}, p^k]`
/// below `m`. Suited to series whose Newton polygon has its vertices at powers
/// of `p` (exponentials, Dwork-type functions), where every hull segment to the
/// right of `p^k` comes from the truncation. Not suited to logarithmic decay.
pub fn radius_bracket_p_block(points: &[(i64, Rat)], m: i64, p: u64) -> Result<RadiusBracket> {
    let pi = p as i64;
    let mut pk: i64 = 1;
    while pk.saturating_mul(pi) <= m {
        pk *= pi;
    }
    if pk < pi * pi {
        return Err(Error::Indeterminate(format!("truncation order {m} is below p^2")));
    }
    let block = |hi: i64| {
        let lo = hi / pi;
        let pts: Vec<(i64, Rat)> = points.iter().copied().filter(|&(n, _)| n >= lo && n <= hi).collect();
        block_once(&pts)
    };
    let (lower, upper) = block(pk).ok_or_else(|| Error::Indeterminate(format!("too few coefficients in [{}, {pk}]", pk / pi)))?;
    let stabilized = block(pk / pi) == Some((lower, upper));
    Ok(RadiusBracket { lower, upper, stabilized })
}

pub fn radius_estimate_p_block<S: Scalar>(f: &Series<S>) -> Result<RadiusBracket> {
    let m = f.trunc().ok_or_else(|| Error::Invalid("polynomial: radius is infinite".into()))?;
    let (known, _) = coefficient_points(f);
    radius_bracket_p_block(&known, m, f.prime())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::PadicScalar;
    use crate::radius::rat;
    use crate::scalar::{factorial_valuation, RationalScalar};

    fn p3(n: i64) -> PadicScalar {
        PadicScalar::exact_i64(3, n)
    }

    #[test]
    fn hull_of_small_example() {
        let f = Series::polynomial(p3(0), vec![p3(1), p3(3), p3(1)]);
        let np = newton_polygon(&f);
        assert_eq!(np.vertices, vec![(0, int(0)), (2, int(0))]);
        assert!(!np.provisional());
        let g = Series::monomial(p3(0), p3(18), 5);
        assert_eq!(newton_polygon(&g).vertices, vec![(5, int(2))]);
    }

    #[test]
    fn gauss_norm_examples() {
        let f = Series::polynomial(p3(0), vec![p3(3), p3(0), p3(1)]);
        assert_eq!(gauss_norm(&f, &LogRadius::from_int_exponent(1)).unwrap(), LogRadius::from_int_exponent(1));
        let a = Series::constant(p3(0), p3(9));
        for r in [-3, 0, 5] {
            assert_eq!(gauss_norm(&a, &LogRadius::from_int_exponent(r)).unwrap(), LogRadius::from_int_exponent(2));
        }
        // A(1,3;T) − 1 = −T² − 3T − 3
        let g = Series::polynomial(p3(0), vec![p3(-3), p3(-3), p3(-1)]);
        assert_eq!(gauss_norm(&g, &LogRadius::ONE).unwrap(), LogRadius::ONE);
    }

    #[test]
    fn exp_bracket_contains_omega() {
        for p in [3u64, 5, 7] {
            let m = 200;
            let pts: Vec<(i64, Rat)> =
                (0..=m).map(|n| (n, -int(factorial_valuation(n as u64, p)))).collect();
            let b = radius_bracket_of_points(&pts, m, p).unwrap();
            assert!(b.contains(&LogRadius::omega(p)), "p={p}: {b:?}");
        }
    }

    #[test]
    fn geometric_bracket_is_unit_radius() {
        let one = RationalScalar::from_i64(3, 1);
        let f = Series::truncated(one.zero_like(), vec![one; 65], 64);
        let b = radius_estimate(&f).unwrap();
        assert_eq!(b.lower, LogRadius::ONE);
        assert_eq!(b.upper, LogRadius::ONE);
        assert_eq!(b.closed_form(), Some(LogRadius::ONE));
    }

    #[test]
    fn p_block_bracket_of_exp() {
        for p in [3u64, 5] {
            let pts: Vec<(i64, Rat)> = (0..=200).map(|n| (n, -int(factorial_valuation(n as u64, p)))).collect();
            let b = radius_bracket_p_block(&pts, 200, p).unwrap();
            assert_eq!(b.lower, LogRadius::omega(p));
            assert_eq!(b.upper, LogRadius::omega(p));
            assert!(b.stabilized);
        }
        assert!(radius_bracket_p_block(&[(0, int(0)), (1, int(0))], 5, 3).is_err());
    }

    #[test]
    fn log_bracket_contains_unit_radius() {
        let p = 3u64;
        let pts: Vec<(i64, Rat)> =
            (1..=150).map(|n| (n, -int(crate::scalar::u64_valuation(n as u64, p)))).collect();
        let b = radius_bracket_of_points(&pts, 150, p).unwrap();
        assert!(b.contains(&LogRadius::ONE), "{b:?}");
    }

    #[test]
    fn tail_bound_certifies_vertices() {
        let c: Vec<PadicScalar> = (0..=10).map(|n| if n == 4 { p3(1) } else { p3(9) }).collect();
        let f = Series::truncated(p3(0), c, 10);
        let np = newton_polygon_with_tail(&f, Some(&|_n| int(5)));
        assert!(np.contains_vertex(4, int(0)));
        assert!(np.is_certified_vertex(4, int(0)));
        let weak = newton_polygon_with_tail(&f, Some(&|_n| rat(-5, 1)));
        assert!(!weak.is_certified_vertex(4, int(0)));
    }
}
