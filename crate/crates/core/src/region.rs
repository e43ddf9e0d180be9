//! Closed intervals and finite unions of closed intervals with exact
//! Lebesgue measure.
//!
//! Set operations act on closures: `subtract` and `symmetric_difference`
//! return the closure of the true set difference, which differs from it
//! only in finitely many points. Measures are therefore exact.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawInterval")]
pub struct Interval {
    lo: Dyadic,
    hi: Dyadic,
}

#[derive(Deserialize)]
struct RawInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl TryFrom<RawInterval> for Interval {
    type Error = Error;
    fn try_from(raw: RawInterval) -> Result<Self> {
        Interval::new(raw.lo, raw.hi)
    }
}

impl Interval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Result<Self> {
        if lo > hi {
            return Err(Error::MalformedInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn unit() -> Self {
        Interval {
            lo: Dyadic::zero(),
            hi: Dyadic::one(),
        }
    }

    pub fn point(t: Dyadic) -> Self {
        Interval {
            lo: t.clone(),
            hi: t,
        }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn length(&self) -> Dyadic {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> Dyadic {
        (&self.lo + &self.hi).half()
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, t: &Dyadic) -> bool {
        &self.lo <= t && t <= &self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Closed intersection, possibly a single point.
    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// True when the interiors meet.
    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo < other.hi && other.lo < self.hi
    }

    pub fn translate(&self, by: &Dyadic) -> Interval {
        Interval {
            lo: &self.lo + by,
            hi: &self.hi + by,
        }
    }

    /// Splits at the dyadic midpoint.
    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.midpoint();
        (
            Interval {
                lo: self.lo.clone(),
                hi: m.clone(),
            },
            Interval {
                lo: m,
                hi: self.hi.clone(),
            },
        )
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A normalized finite union of closed intervals: parts sorted, pairwise
/// disjoint, with touching parts merged.
#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct Region {
    parts: Vec<Interval>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Intersect,
    Subtract,
    Union,
    SymmetricDifference,
}

impl Region {
    pub fn empty() -> Self {
        Region { parts: Vec::new() }
    }

    pub fn unit() -> Self {
        Region {
            parts: vec![Interval::unit()],
        }
    }

    pub fn interval(i: Interval) -> Self {
        Region { parts: vec![i] }
    }

    /// `[lo, hi]` as a region; panics on `lo > hi`. Meant for literals.
    pub fn span(lo: Dyadic, hi: Dyadic) -> Self {
        Region::interval(Interval::new(lo, hi).expect("span: lo > hi"))
    }

    /// Sorts and merges an arbitrary list of intervals.
    pub fn normalize(mut intervals: Vec<Interval>) -> Self {
        intervals.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| b.hi.cmp(&a.hi)));
        let mut parts: Vec<Interval> = Vec::with_capacity(intervals.len());
        for iv in intervals {
            match parts.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => parts.push(iv),
            }
        }
        Region { parts }
    }

    /// Checked construction from `(lo, hi)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Dyadic, Dyadic)>) -> Result<Self> {
        let ivs = pairs
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Region::normalize(ivs))
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> Dyadic {
        self.parts
            .iter()
            .fold(Dyadic::zero(), |acc, p| acc + p.length())
    }

    pub fn contains(&self, t: &Dyadic) -> bool {
        let idx = self.parts.partition_point(|p| &p.hi < t);
        self.parts.get(idx).is_some_and(|p| p.contains(t))
    }

    pub fn contains_interval(&self, iv: &Interval) -> bool {
        let idx = self.parts.partition_point(|p| p.hi < iv.lo);
        self.parts.get(idx).is_some_and(|p| p.contains_interval(iv))
    }

    /// Smallest interval containing the region.
    pub fn hull(&self) -> Option<Interval> {
        let first = self.parts.first()?;
        let last = self.parts.last()?;
        Some(Interval {
            lo: first.lo.clone(),
            hi: last.hi.clone(),
        })
    }

    /// Every endpoint, in order.
    pub fn boundary(&self) -> Vec<Dyadic> {
        let mut out = Vec::with_capacity(2 * self.parts.len());
        for p in &self.parts {
            out.push(p.lo.clone());
            if p.hi != p.lo {
                out.push(p.hi.clone());
            }
        }
        out
    }

    pub fn translate(&self, by: &Dyadic) -> Region {
        Region {
            parts: self.parts.iter().map(|p| p.translate(by)).collect(),
        }
    }

    pub fn combine(&self, other: &Region, op: SetOp) -> Region {
        match op {
            SetOp::Intersect => self.intersect(other),
            SetOp::Subtract => self.subtract(other),
            SetOp::Union => self.union(other),
            SetOp::SymmetricDifference => self.symmetric_difference(other),
        }
    }

    pub fn union(&self, other: &Region) -> Region {
        let mut all = self.parts.clone();
        all.extend(other.parts.iter().cloned());
        Region::normalize(all)
    }

    pub fn intersect(&self, other: &Region) -> Region {
        let (a, b) = (&self.parts, &other.parts);
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            if let Some(x) = a[i].intersect(&b[j]) {
                out.push(x);
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        Region::normalize(out)
    }

    pub fn intersect_interval(&self, iv: &Interval) -> Region {
        self.intersect(&Region::interval(iv.clone()))
    }

    /// Closure of `self \ other`.
    pub fn subtract(&self, other: &Region) -> Region {
        let cut: Vec<&Interval> = other.parts.iter().filter(|p| !p.is_degenerate()).collect();
        let mut out = Vec::new();
        let mut j = 0;
        for part in &self.parts {
            while j < cut.len() && cut[j].hi <= part.lo {
                j += 1;
            }
            if part.is_degenerate() {
                let at = cut.partition_point(|c| c.hi < part.lo);
                let covered = cut.get(at).is_some_and(|c| c.contains(&part.lo));
                if !covered {
                    out.push(part.clone());
                }
                continue;
            }
            let mut cursor = part.lo.clone();
            let mut k = j;
            while k < cut.len() && cut[k].lo < part.hi {
                if cut[k].lo > cursor {
                    out.push(Interval {
                        lo: cursor.clone(),
                        hi: cut[k].lo.clone(),
                    });
                }
                if cut[k].hi > cursor {
                    cursor = cut[k].hi.clone();
                }
                k += 1;
            }
            if cursor < part.hi {
                out.push(Interval {
                    lo: cursor,
                    hi: part.hi.clone(),
                });
            }
        }
        Region::normalize(out)
    }

    pub fn symmetric_difference(&self, other: &Region) -> Region {
        self.subtract(other).union(&other.subtract(self))
    }

    /// Closure of `[lo, hi] \ self`.
    pub fn complement_within(&self, within: &Interval) -> Region {
        Region::interval(within.clone()).subtract(self)
    }

    /// Drops measure-zero parts.
    pub fn without_points(&self) -> Region {
        Region {
            parts: self
                .parts
                .iter()
                .filter(|p| !p.is_degenerate())
                .cloned()
                .collect(),
        }
    }

    /// Exact distance from `t` to the region (`None` when empty).
    pub fn distance_to(&self, t: &Dyadic) -> Option<Dyadic> {
        self.parts
            .iter()
            .map(|p| {
                if t < &p.lo {
                    &p.lo - t
                } else if t > &p.hi {
                    t - &p.hi
                } else {
                    Dyadic::zero()
                }
            })
            .min()
    }

    /// True when some point of the open interval `(lo, hi)` lies in the region.
    pub fn meets_open(&self, lo: &Dyadic, hi: &Dyadic) -> bool {
        if lo >= hi {
            return false;
        }
        let idx = self.parts.partition_point(|p| &p.hi <= lo);
        self.parts.get(idx).is_some_and(|p| &p.lo < hi)
    }

    /// True when some point of the closed interval `[lo, hi]` lies in the region.
    pub fn meets_closed(&self, lo: &Dyadic, hi: &Dyadic) -> bool {
        let idx = self.parts.partition_point(|p| &p.hi < lo);
        self.parts.get(idx).is_some_and(|p| &p.lo <= hi)
    }
}

impl fmt::Debug for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.parts.iter()).finish()
    }
}

impl<'de> Deserialize<'de> for Region {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let parts = Vec::<Interval>::deserialize(deserializer)?;
        Ok(Region::normalize(parts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    fn reg(pairs: &[(&str, &str)]) -> Region {
        Region::from_pairs(pairs.iter().map(|(a, b)| (d(a), d(b)))).unwrap()
    }

    /// Point-set oracle: which closed grid cells of width 2^-k lie in the
    /// region (cell-midpoint membership decides measure).
    fn grid_cells(r: &Region, k: u32) -> Vec<bool> {
        (0..(1i64 << k))
            .map(|j| r.contains(&Dyadic::ratio(2 * j + 1, k + 1)))
            .collect()
    }

    #[test]
    fn normalize_merges_touching() {
        assert_eq!(reg(&[("0", "1/2"), ("1/2", "1")]), reg(&[("0", "1")]));
        assert_eq!(reg(&[]).parts().len(), 0);
    }

    #[test]
    fn normalize_overlap_matches_grid_oracle() {
        let r = reg(&[("0", "3/8"), ("1/4", "1/2")]);
        assert_eq!(r, reg(&[("0", "1/2")]));
        let cells = grid_cells(&r, 6);
        let expected: Vec<bool> = (0..64).map(|j| j < 32).collect();
        assert_eq!(cells, expected);
        assert_eq!(r.measure(), d("1/2"));
    }

    #[test]
    fn malformed_interval_rejected() {
        assert!(Interval::new(d("1/2"), d("1/4")).is_err());
        assert!(Region::from_pairs([(d("1"), d("0"))]).is_err());
    }

    #[test]
    fn measures() {
        assert_eq!(reg(&[("0", "1/2"), ("3/4", "1")]).measure(), d("3/4"));
        assert_eq!(Region::empty().measure(), Dyadic::zero());
    }

    #[test]
    fn combine_examples() {
        let unit = Region::unit();
        assert!(unit.combine(&unit, SetOp::SymmetricDifference).is_empty());
        assert_eq!(
            reg(&[("0", "1/2")]).combine(&reg(&[("1/4", "3/4")]), SetOp::Intersect),
            reg(&[("1/4", "1/2")])
        );
        let a = reg(&[("0", "1/2"), ("3/4", "1")]);
        let b = reg(&[("3/8", "7/8")]);
        let diff = a.combine(&b, SetOp::Subtract);
        assert_eq!(diff, reg(&[("0", "3/8"), ("7/8", "1")]));
        let (ga, gb, gd) = (grid_cells(&a, 6), grid_cells(&b, 6), grid_cells(&diff, 6));
        for j in 0..64 {
            assert_eq!(gd[j], ga[j] && !gb[j]);
        }
    }

    #[test]
    fn subtract_keeps_closure_and_points() {
        let a = reg(&[("0", "1")]);
        let hole = Region::normalize(vec![Interval::point(d("1/2"))]);
        assert_eq!(a.subtract(&hole), a);
        let pts = Region::normalize(vec![Interval::point(d("1/4")), Interval::point(d("3/4"))]);
        let cut = reg(&[("1/2", "1")]);
        assert_eq!(
            pts.subtract(&cut),
            Region::normalize(vec![Interval::point(d("1/4"))])
        );
    }

    #[test]
    fn open_and_closed_meets() {
        let r = reg(&[("1/4", "1/2")]);
        assert!(!r.meets_open(&d("1/2"), &d("1")));
        assert!(r.meets_closed(&d("1/2"), &d("1")));
        assert!(r.meets_open(&d("0"), &d("5/16")));
        assert!(!r.meets_open(&d("0"), &d("1/4")));
        assert_eq!(r.distance_to(&d("3/4")), Some(d("1/4")));
        assert_eq!(r.distance_to(&d("3/8")), Some(Dyadic::zero()));
    }
}
