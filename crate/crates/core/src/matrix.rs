//! Square matrices of series.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::padic::PadicScalar;
use crate::radius::LogRadius;
use crate::scalar::Scalar;
use crate::series::{compose_affine, gauss_norm_flagged, DifferenceOperator, Series};

#[derive(Clone, Debug)]
pub struct SeriesMatrix<S> {
    rank: usize,
    entries: Vec<Series<S>>,
}

impl<S: Scalar> PartialEq for SeriesMatrix<S> {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.entries == other.entries
    }
}

impl<S: Scalar> SeriesMatrix<S> {
    /// Row-major entries.
    pub fn new(rank: usize, entries: Vec<Series<S>>) -> Result<Self> {
        if rank == 0 || entries.len() != rank * rank {
            return Err(Error::Invalid(format!("need {} entries for rank {rank}", rank * rank)));
        }
        let c = entries[0].center().clone();
        if entries.iter().any(|e| *e.center() != c) {
            return Err(Error::Invalid("matrix entries expanded around different centres".into()));
        }
        Ok(SeriesMatrix { rank, entries })
    }

    pub fn scalar(f: Series<S>) -> Self {
        SeriesMatrix { rank: 1, entries: vec![f] }
    }

    pub fn identity(center: &S, rank: usize) -> Self {
        let entries = (0..rank * rank)
            .map(|k| if k / rank == k % rank { Series::one(center.clone()) } else { Series::zero(center.clone()) })
            .collect();
        SeriesMatrix { rank, entries }
    }

    pub fn zero(center: &S, rank: usize) -> Self {
        SeriesMatrix { rank, entries: vec![Series::zero(center.clone()); rank * rank] }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn center(&self) -> &S {
        self.entries[0].center()
    }

    pub fn entries(&self) -> &[Series<S>] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Series<S> {
        &self.entries[i * self.rank + j]
    }

    pub fn map(&self, f: impl Fn(&Series<S>) -> Series<S>) -> Self {
        SeriesMatrix { rank: self.rank, entries: self.entries.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&Series<S>) -> Result<Series<S>>) -> Result<Self> {
        Ok(SeriesMatrix { rank: self.rank, entries: self.entries.iter().map(f).collect::<Result<_>>()? })
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        SeriesMatrix { rank: self.rank, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.add(b)).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        SeriesMatrix { rank: self.rank, entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a.sub(b)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.rank, other.rank);
        let r = self.rank;
        let mut entries = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                let mut acc: Option<Series<S>> = None;
                for k in 0..r {
                    let t = self.get(i, k).mul(other.get(k, j));
                    acc = Some(match acc {
                        Some(a) => a.add(&t),
                        None => t,
                    });
                }
                entries.push(acc.unwrap());
            }
        }
        SeriesMatrix { rank: r, entries }
    }

    /// Multiply every entry by the same series.
    pub fn mul_series(&self, f: &Series<S>) -> Self {
        self.map(|e| e.mul(f))
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|e| e.scale(s))
    }

    pub fn derivative(&self) -> Self {
        self.map(|e| e.derivative())
    }

    pub fn truncate_to(&self, m: i64) -> Self {
        self.map(|e| e.truncate_to(m))
    }

    pub fn cap_precision(&self, n: i64) -> Self {
        self.map(|e| e.cap_precision(n))
    }

    pub fn compose_affine(&self, sigma: &DifferenceOperator<S>) -> Result<Self> {
        self.try_map(|e| compose_affine(e, sigma))
    }

    /// Smallest truncation order among entries.
    pub fn trunc(&self) -> Option<i64> {
        self.entries.iter().filter_map(|e| e.trunc()).min()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    /// Max of the entries' Gauss norms, and whether every entry is certified.
    pub fn gauss_norm_flagged(&self, rho: &LogRadius) -> (LogRadius, bool) {
        let mut best = LogRadius::Zero;
        let mut ok = true;
        for e in &self.entries {
            let (n, c) = gauss_norm_flagged(e, rho);
            best = best.max(n);
            ok &= c;
        }
        (best, ok)
    }

    /// Worst coefficientwise agreement valuation with `other` up to `upto`.
    pub fn agreement(&self, other: &Self, upto: i64) -> Option<i64> {
        self.entries
            .iter()
            .zip(&other.entries)
            .filter_map(|(a, b)| a.agreement(b, upto))
            .min()
    }

    /// Determinant by cofactor expansion (ranks used here are small).
    pub fn determinant(&self) -> Series<S> {
        fn det<S: Scalar>(m: &[Vec<Series<S>>]) -> Series<S> {
            let n = m.len();
            if n == 1 {
                return m[0][0].clone();
            }
            let mut acc: Option<Series<S>> = None;
            for j in 0..n {
                let minor: Vec<Vec<Series<S>>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, e)| e.clone()).collect()).collect();
                let t = m[0][j].mul(&det(&minor));
                acc = Some(match acc {
                    None => t,
                    Some(a) if j % 2 == 0 => a.add(&t),
                    Some(a) => a.sub(&t),
                });
            }
            acc.unwrap()
        }
        let rows: Vec<Vec<Series<S>>> = (0..self.rank).map(|i| (0..self.rank).map(|j| self.get(i, j).clone()).collect()).collect();
        det(&rows)
    }

    pub fn map_scalars<T: Scalar>(&self, f: impl Fn(&Series<S>) -> Series<T>) -> SeriesMatrix<T> {
        SeriesMatrix { rank: self.rank, entries: self.entries.iter().map(f).collect() }
    }
}

impl SeriesMatrix<PadicScalar> {
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = (0..self.rank)
            .map(|i| Value::Array((0..self.rank).map(|j| self.get(i, j).to_json()).collect()))
            .collect();
        json!({ "rank": self.rank, "entries": rows })
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let rows = v
            .get("entries")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("matrix: missing entries".into()))?;
        let rank = rows.len();
        let mut entries = Vec::with_capacity(rank * rank);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_array().ok_or_else(|| Error::Parse(format!("matrix: row {i} is not an array")))?;
            if row.len() != rank {
                return Err(Error::Parse(format!("matrix: row {i} has {} entries, expected {rank}", row.len())));
            }
            for (j, e) in row.iter().enumerate() {
                entries.push(Series::from_json(e).map_err(|err| Error::Parse(format!("entries[{i}][{j}]: {err}")))?);
            }
        }
        SeriesMatrix::new(rank, entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::RationalScalar;

    #[test]
    fn identity_and_determinant() {
        let c = RationalScalar::from_i64(3, 0);
        let id = SeriesMatrix::identity(&c, 3);
        assert_eq!(id.mul(&id), id);
        assert_eq!(id.determinant(), Series::one(c.clone()));
        let r = |n| RationalScalar::from_i64(3, n);
        let m = SeriesMatrix::new(
            2,
            vec![
                Series::polynomial(r(0), vec![r(1), r(1)]),
                Series::constant(r(0), r(2)),
                Series::constant(r(0), r(3)),
                Series::polynomial(r(0), vec![r(0), r(1)]),
            ],
        )
        .unwrap();
        // (1+T)T − 6
        assert_eq!(m.determinant(), Series::polynomial(r(0), vec![r(-6), r(1), r(1)]));
    }
}
