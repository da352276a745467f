//! Exact profiles of `R(x, σ_{q,h}) = |(q−1)T + h|(x)` along canonical
//! segments `[x_{c,ρ_lo}, x_{c,ρ_hi}]`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::qcalc::q_is_one;
use crate::radius::{format_rat, int, LogRadius, Rat};
use crate::scalar::Scalar;
use crate::series::DifferenceOperator;

/// Value on a piece, as a function of the exponent `r` (`ρ = p^{−r}`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PieceValue {
    /// Exponent `α + β·r`.
    Affine { alpha: Rat, beta: i64 },
    /// The radius vanishes identically (σ fixes every point).
    Vanishing,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProfilePiece {
    /// Exponent interval `[from, to]`, `from ≤ to`.
    pub from: Rat,
    pub to: Rat,
    pub value: PieceValue,
}

#[derive(Clone, Debug)]
pub struct SegmentProfile<S> {
    pub center: S,
    pub r_lo: Rat,
    pub r_hi: Rat,
    /// Sorted by increasing exponent, i.e. from the outer end inwards.
    pub pieces: Vec<ProfilePiece>,
    /// Zero of `(q−1)T + h` relative to the centre, as an exponent of
    /// `|a − c|`; `None` when there is no finite zero or `a = c`.
    zero_exponent: Option<Rat>,
}

impl PieceValue {
    pub fn at(&self, r: Rat) -> LogRadius {
        match self {
            PieceValue::Affine { alpha, beta } => LogRadius::Finite(*alpha + r * *beta),
            PieceValue::Vanishing => LogRadius::Zero,
        }
    }
}

fn exponent_of<S: Scalar>(x: &S) -> Option<Rat> {
    x.valuation().map(int)
}

/// Profile of `ρ ↦ max(|q−1|ρ, |(q−1)c + h|)` for `ρ` between `rho_lo` and
/// `rho_hi` (both finite and nonzero).
pub fn sigma_radius_profile<S: Scalar>(
    sigma: &DifferenceOperator<S>,
    c: &S,
    rho_lo: &LogRadius,
    rho_hi: &LogRadius,
) -> Result<SegmentProfile<S>> {
    let (lo_exp, hi_exp) = match (rho_lo, rho_hi) {
        (LogRadius::Finite(a), LogRadius::Finite(b)) => (*a, *b),
        _ => return Err(Error::Invalid("segment endpoints must be finite nonzero radii".into())),
    };
    // ρ_lo ≤ ρ_hi means exponent(ρ_lo) ≥ exponent(ρ_hi)
    let (r_lo, r_hi) = if lo_exp <= hi_exp { (lo_exp, hi_exp) } else { (hi_exp, lo_exp) };
    let qm1 = exponent_of(&sigma.q().sub_ref(&sigma.q().one_like()));
    let dc = exponent_of(&sigma.delta_at(c));
    let line = |v: Rat| PieceValue::Affine { alpha: v, beta: 1 };
    let flat = |v: Rat| PieceValue::Affine { alpha: v, beta: 0 };
    let mut pieces = Vec::new();
    let mut zero_exponent = None;
    match (qm1, dc) {
        (None, None) => pieces.push(ProfilePiece { from: r_lo, to: r_hi, value: PieceValue::Vanishing }),
        (None, Some(d)) => pieces.push(ProfilePiece { from: r_lo, to: r_hi, value: flat(d) }),
        (Some(a), None) => pieces.push(ProfilePiece { from: r_lo, to: r_hi, value: line(a) }),
        (Some(a), Some(d)) => {
            let star = d - a;
            zero_exponent = Some(star);
            if star <= r_lo {
                pieces.push(ProfilePiece { from: r_lo, to: r_hi, value: flat(d) });
            } else if star >= r_hi {
                pieces.push(ProfilePiece { from: r_lo, to: r_hi, value: line(a) });
            } else {
                pieces.push(ProfilePiece { from: r_lo, to: star, value: line(a) });
                pieces.push(ProfilePiece { from: star, to: r_hi, value: flat(d) });
            }
        }
    }
    Ok(SegmentProfile { center: c.clone(), r_lo, r_hi, pieces, zero_exponent })
}

impl<S: Scalar> SegmentProfile<S> {
    pub fn value_at(&self, r: Rat) -> Option<LogRadius> {
        self.pieces.iter().find(|pc| pc.from <= r && r <= pc.to).map(|pc| pc.value.at(r))
    }

    pub fn breakpoints(&self) -> Vec<Rat> {
        self.pieces.iter().skip(1).map(|pc| pc.from).collect()
    }

    pub fn slopes_are_integral(&self) -> bool {
        // β is stored as an integer; this also checks the pieces tile the segment
        self.pieces.first().is_some_and(|pc| pc.from == self.r_lo)
            && self.pieces.last().is_some_and(|pc| pc.to == self.r_hi)
            && self.pieces.windows(2).all(|w| w[0].to == w[1].from)
    }

    pub fn is_continuous(&self) -> bool {
        self.pieces.windows(2).all(|w| w[0].value.at(w[0].to) == w[1].value.at(w[1].from))
    }

    /// `log R` is convex in `log ρ`: the exponent slopes `β` do not increase
    /// with `r`.
    pub fn is_log_convex(&self) -> bool {
        let betas: Vec<i64> = self
            .pieces
            .iter()
            .filter_map(|pc| match pc.value {
                PieceValue::Affine { beta, .. } => Some(beta),
                PieceValue::Vanishing => None,
            })
            .collect();
        betas.windows(2).all(|w| w[0] >= w[1])
    }

    /// Sum of the outgoing slopes of `log R` (in `log ρ`) along the two
    /// segment directions at exponent `r`.
    pub fn slope_jump(&self, r: Rat) -> i64 {
        let beta = |pc: &ProfilePiece| match pc.value {
            PieceValue::Affine { beta, .. } => beta,
            PieceValue::Vanishing => 0,
        };
        let outer = self.pieces.iter().find(|pc| pc.from < r && r <= pc.to).map(beta);
        let inner = self.pieces.iter().find(|pc| pc.from <= r && r < pc.to).map(beta);
        match (outer, inner) {
            (Some(o), Some(i)) => o - i,
            _ => 0,
        }
    }

    /// Zeros of `(q−1)T + h` on the sphere `|T − c| = ρ`.
    pub fn zeros_on_sphere(&self, r: Rat) -> i64 {
        i64::from(self.zero_exponent == Some(r))
    }

    pub fn to_json(&self) -> Value {
        let pieces: Vec<Value> = self
            .pieces
            .iter()
            .map(|pc| {
                let value = match pc.value {
                    PieceValue::Affine { alpha, beta } => json!({ "alpha": format_rat(&alpha), "beta": beta }),
                    PieceValue::Vanishing => json!("vanishing"),
                };
                json!({ "from": format_rat(&pc.from), "to": format_rat(&pc.to), "exponent": value })
            })
            .collect();
        json!({ "r_lo": format_rat(&self.r_lo), "r_hi": format_rat(&self.r_hi), "pieces": pieces })
    }
}

/// `|σ(c) − c| < ρ` (open) or `≤ ρ` (closed).
pub fn stable_disc<S: Scalar>(sigma: &DifferenceOperator<S>, c: &S, rho: &LogRadius, closed: bool) -> bool {
    let d = match sigma.delta_at(c).valuation() {
        None => return true,
        Some(v) => LogRadius::Finite(int(v)),
    };
    if closed {
        d <= *rho
    } else {
        d < *rho
    }
}

/// The finite fixed point `a = −h/(q−1)`, or `None` when `q = 1`.
pub fn controlling_graph_endpoint<S: Scalar>(sigma: &DifferenceOperator<S>) -> Result<Option<S>> {
    if sigma.is_identity() {
        return Err(Error::Degenerate("the identity fixes every point".into()));
    }
    if q_is_one(sigma.q()) {
        return Ok(None);
    }
    let qm1 = sigma.q().sub_ref(&sigma.q().one_like());
    Ok(Some(sigma.h().neg_ref().try_div(&qm1)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radius::rat;
    use crate::scalar::RationalScalar;

    fn r(n: i64) -> RationalScalar {
        RationalScalar::from_i64(3, n)
    }

    fn fin(x: Rat) -> LogRadius {
        LogRadius::Finite(x)
    }

    #[test]
    fn breakpoint_example() {
        let s = DifferenceOperator::new(r(4), r(0)).unwrap();
        let prof = sigma_radius_profile(&s, &r(1), &fin(int(3)), &fin(int(-3))).unwrap();
        assert_eq!(prof.breakpoints(), vec![int(0)]);
        assert_eq!(prof.value_at(int(2)), Some(fin(int(1))));
        assert_eq!(prof.value_at(int(-2)), Some(fin(int(-1))));
        assert!(prof.is_continuous() && prof.is_log_convex() && prof.slopes_are_integral());
        assert_eq!(prof.slope_jump(int(0)), 1);
        assert_eq!(prof.zeros_on_sphere(int(0)), 1);
        assert_eq!(prof.slope_jump(rat(1, 2)), 0);
    }

    #[test]
    fn centred_at_fixed_point_and_translation() {
        let s = DifferenceOperator::new(r(4), r(3)).unwrap();
        let a = controlling_graph_endpoint(&s).unwrap().unwrap();
        assert_eq!(a, r(-1));
        let prof = sigma_radius_profile(&s, &a, &fin(int(2)), &fin(int(0))).unwrap();
        assert_eq!(prof.pieces.len(), 1);
        assert_eq!(prof.pieces[0].value, PieceValue::Affine { alpha: int(1), beta: 1 });
        let t = DifferenceOperator::new(r(1), r(3)).unwrap();
        let prof = sigma_radius_profile(&t, &r(5), &fin(int(2)), &fin(int(-1))).unwrap();
        assert_eq!(prof.pieces[0].value, PieceValue::Affine { alpha: int(1), beta: 0 });
        assert_eq!(controlling_graph_endpoint(&t).unwrap(), None);
        assert!(controlling_graph_endpoint(&DifferenceOperator::new(r(1), r(0)).unwrap()).is_err());
    }

    #[test]
    fn stable_disc_examples() {
        let t = DifferenceOperator::new(r(1), r(3)).unwrap();
        assert!(!stable_disc(&t, &r(0), &fin(int(1)), false));
        assert!(stable_disc(&t, &r(0), &fin(int(1)), true));
        assert!(stable_disc(&t, &r(0), &fin(int(0)), false));
        let s = DifferenceOperator::new(r(4), r(3)).unwrap();
        assert!(stable_disc(&s, &r(-1), &fin(int(7)), false));
    }
}
