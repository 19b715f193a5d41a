//! Closed intervals and canonical unions of them.
//!
//! An [`IntervalSet`] is kept sorted with strictly positive gaps between
//! consecutive parts; every constructor funnels through one sort-then-sweep
//! merge. On the exact backend touching intervals merge and nothing else
//! does. On the floating backend parts whose gap is at most the merge
//! tolerance are merged, and parts separated by more than it never are.

use std::cmp::Ordering;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A closed interval `[lo, hi]` with `lo <= hi`.
#[derive(Clone, PartialEq)]
pub struct Interval<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo > hi || lo.partial_cmp(&hi).is_none() {
            return Err(Error::MalformedInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Interval { lo, hi })
    }

    /// Builds `[min(a, b), max(a, b)]`.
    pub fn spanning(a: T, b: T) -> Self {
        if b < a {
            Interval { lo: b, hi: a }
        } else {
            Interval { lo: a, hi: b }
        }
    }

    pub fn point(x: T) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn unit() -> Self {
        Interval {
            lo: T::zero(),
            hi: T::one(),
        }
    }

    pub fn lo(&self) -> &T {
        &self.lo
    }

    pub fn hi(&self) -> &T {
        &self.hi
    }

    pub fn into_bounds(self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn length(&self) -> T {
        self.hi.clone() - self.lo.clone()
    }

    pub fn contains(&self, x: &T) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval<T>) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    /// Closed intersection test: touching intervals intersect.
    pub fn intersects(&self, other: &Interval<T>) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersection(&self, other: &Interval<T>) -> Option<Interval<T>> {
        let lo = T::max_of(self.lo.clone(), other.lo.clone());
        let hi = T::min_of(self.hi.clone(), other.hi.clone());
        (lo <= hi).then_some(Interval { lo, hi })
    }

    pub fn hull(&self, other: &Interval<T>) -> Interval<T> {
        Interval {
            lo: T::min_of(self.lo.clone(), other.lo.clone()),
            hi: T::max_of(self.hi.clone(), other.hi.clone()),
        }
    }

    pub fn midpoint(&self) -> T {
        T::midpoint(&self.lo, &self.hi)
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Interval<U> {
        Interval::spanning(f(&self.lo), f(&self.hi))
    }

    pub fn to_f64(&self) -> Interval<f64> {
        Interval {
            lo: self.lo.to_f64(),
            hi: self.hi.to_f64(),
        }
    }
}

impl<T: fmt::Display> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

impl<T: fmt::Debug> fmt::Debug for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}, {:?}]", self.lo, self.hi)
    }
}

impl<T: Scalar> Serialize for Interval<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        (&self.lo, &self.hi).serialize(s)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Interval<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let (lo, hi) = <(T, T)>::deserialize(d)?;
        Interval::new(lo, hi).map_err(D::Error::custom)
    }
}

/// Canonical union of pairwise-disjoint closed intervals.
#[derive(Clone, PartialEq)]
pub struct IntervalSet<T> {
    parts: Vec<Interval<T>>,
}

/// Streaming sweep merge over intervals already sorted by `lo`.
pub(crate) struct SweepMerge<T> {
    eps: T,
    out: Vec<Interval<T>>,
}

impl<T: Scalar> SweepMerge<T> {
    pub(crate) fn new(eps: T) -> Self {
        SweepMerge {
            eps,
            out: Vec::new(),
        }
    }

    pub(crate) fn with_capacity(eps: T, cap: usize) -> Self {
        SweepMerge {
            eps,
            out: Vec::with_capacity(cap),
        }
    }

    /// Requires `iv.lo >= lo` of every interval pushed so far.
    #[inline]
    pub(crate) fn push(&mut self, iv: Interval<T>) {
        if let Some(last) = self.out.last_mut() {
            let reach = if T::EXACT {
                last.hi.clone()
            } else {
                last.hi.clone() + self.eps.clone()
            };
            if iv.lo <= reach {
                if iv.hi > last.hi {
                    last.hi = iv.hi;
                }
                return;
            }
        }
        self.out.push(iv);
    }

    pub(crate) fn finish(self) -> IntervalSet<T> {
        IntervalSet { parts: self.out }
    }
}

fn cmp_lo<T: Scalar>(a: &Interval<T>, b: &Interval<T>) -> Ordering {
    a.lo.total_cmp(&b.lo)
}

impl<T: Scalar> IntervalSet<T> {
    pub fn empty() -> Self {
        IntervalSet { parts: Vec::new() }
    }

    pub fn from_interval(iv: Interval<T>) -> Self {
        IntervalSet { parts: vec![iv] }
    }

    /// Canonical form of an arbitrary list, merging with the backend's
    /// default tolerance.
    pub fn normalize(raw: Vec<Interval<T>>) -> Self {
        Self::normalize_with_eps(raw, T::default_merge_eps())
    }

    pub fn normalize_with_eps(mut raw: Vec<Interval<T>>, eps: T) -> Self {
        // The stable sort is linear on inputs that are already sorted or made
        // of a few sorted runs, which is what row-wise image enumeration emits.
        raw.sort_by(cmp_lo);
        let mut sweep = SweepMerge::with_capacity(eps, raw.len().min(1024));
        for iv in raw {
            sweep.push(iv);
        }
        sweep.finish()
    }

    /// Validates raw `(lo, hi)` pairs and normalizes them.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (T, T)>) -> Result<Self> {
        let raw = pairs
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::normalize(raw))
    }

    pub fn parts(&self) -> &[Interval<T>] {
        &self.parts
    }

    pub fn into_parts(self) -> Vec<Interval<T>> {
        self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Interval<T>> {
        self.parts.iter()
    }

    pub fn union(&self, other: &IntervalSet<T>) -> IntervalSet<T> {
        self.union_with_eps(other, T::default_merge_eps())
    }

    /// Linear two-way merge of canonical sets.
    pub fn union_with_eps(&self, other: &IntervalSet<T>, eps: T) -> IntervalSet<T> {
        let mut sweep = SweepMerge::with_capacity(eps, self.len() + other.len());
        let (mut a, mut b) = (self.parts.iter().peekable(), other.parts.iter().peekable());
        loop {
            let next = match (a.peek(), b.peek()) {
                (Some(x), Some(y)) => {
                    if cmp_lo(x, y) != Ordering::Greater {
                        a.next()
                    } else {
                        b.next()
                    }
                }
                (Some(_), None) => a.next(),
                (None, Some(_)) => b.next(),
                (None, None) => break,
            };
            sweep.push(next.expect("peeked").clone());
        }
        sweep.finish()
    }

    /// Union of many canonical sets by pairwise tree reduction.
    pub fn union_all(mut sets: Vec<IntervalSet<T>>, eps: T) -> IntervalSet<T> {
        if sets.is_empty() {
            return IntervalSet::empty();
        }
        while sets.len() > 1 {
            let mut next = Vec::with_capacity(sets.len().div_ceil(2));
            let mut it = sets.into_iter();
            while let Some(a) = it.next() {
                match it.next() {
                    Some(b) => next.push(a.union_with_eps(&b, eps.clone())),
                    None => next.push(a),
                }
            }
            sets = next;
        }
        sets.pop().expect("nonempty")
    }

    pub fn measure(&self) -> T {
        self.parts
            .iter()
            .fold(T::zero(), |acc, iv| acc + iv.length())
    }

    /// Smallest interval containing the set.
    pub fn hull(&self) -> Option<Interval<T>> {
        let first = self.parts.first()?;
        let last = self.parts.last()?;
        Some(Interval {
            lo: first.lo.clone(),
            hi: last.hi.clone(),
        })
    }

    pub fn is_within(&self, hull: &Interval<T>) -> bool {
        match self.hull() {
            Some(h) => hull.contains_interval(&h),
            None => true,
        }
    }

    /// Closures of the maximal open intervals of `hull \ self`, including
    /// the slack at either end of the hull.
    pub fn gaps(&self, hull: &Interval<T>) -> Result<Vec<Interval<T>>> {
        if !self.is_within(hull) {
            return Err(Error::OutsideHull {
                hull: hull.to_string(),
            });
        }
        let mut gaps = Vec::new();
        let mut cursor = hull.lo.clone();
        for iv in &self.parts {
            if iv.lo > cursor {
                gaps.push(Interval {
                    lo: cursor.clone(),
                    hi: iv.lo.clone(),
                });
            }
            cursor = iv.hi.clone();
        }
        if hull.hi > cursor {
            gaps.push(Interval {
                lo: cursor,
                hi: hull.hi.clone(),
            });
        }
        Ok(gaps)
    }

    /// Length of the largest hole of `self` inside `hull`; zero iff the set
    /// covers the hull.
    pub fn max_gap(&self, hull: &Interval<T>) -> Result<T> {
        Ok(self
            .gaps(hull)?
            .iter()
            .map(Interval::length)
            .fold(T::zero(), T::max_of))
    }

    /// Largest hole inside the set's own hull.
    pub fn max_inner_gap(&self) -> T {
        match self.hull() {
            Some(h) => self.max_gap(&h).expect("hull contains the set"),
            None => T::zero(),
        }
    }

    fn locate(&self, x: &T) -> Option<&Interval<T>> {
        // First part whose hi >= x.
        let idx = self.parts.partition_point(|iv| iv.hi < *x);
        self.parts.get(idx).filter(|iv| iv.lo <= *x)
    }

    pub fn contains_point(&self, x: &T) -> bool {
        self.locate(x).is_some()
    }

    /// True iff a single part contains `iv` entirely.
    pub fn contains_interval(&self, iv: &Interval<T>) -> bool {
        self.locate(&iv.lo)
            .map(|part| part.contains_interval(iv))
            .unwrap_or(false)
    }

    pub fn is_subset_of(&self, other: &IntervalSet<T>) -> bool {
        self.parts.iter().all(|iv| other.contains_interval(iv))
    }

    /// Restriction to a closed window.
    pub fn clip(&self, window: &Interval<T>) -> IntervalSet<T> {
        IntervalSet {
            parts: self
                .parts
                .iter()
                .filter_map(|iv| iv.intersection(window))
                .collect(),
        }
    }

    /// Same number of parts, matching endpoints within `tol`.
    pub fn approx_eq(&self, other: &IntervalSet<T>, tol: &T) -> bool {
        let close = |a: &T, b: &T| (a.clone() - b.clone()).abs() <= *tol;
        self.len() == other.len()
            && self
                .parts
                .iter()
                .zip(&other.parts)
                .all(|(a, b)| close(&a.lo, &b.lo) && close(&a.hi, &b.hi))
    }

    pub fn to_f64(&self) -> IntervalSet<f64> {
        IntervalSet::normalize(self.parts.iter().map(Interval::to_f64).collect())
    }
}

impl<T: Scalar> Default for IntervalSet<T> {
    fn default() -> Self {
        IntervalSet::empty()
    }
}

impl<'a, T> IntoIterator for &'a IntervalSet<T> {
    type Item = &'a Interval<T>;
    type IntoIter = std::slice::Iter<'a, Interval<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.parts.iter()
    }
}

impl<T: fmt::Display> fmt::Display for IntervalSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, iv) in self.parts.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{iv}")?;
        }
        f.write_str("}")
    }
}

impl<T: fmt::Debug> fmt::Debug for IntervalSet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.parts.iter()).finish()
    }
}

impl<T: Scalar> Serialize for IntervalSet<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(s)
    }
}

/// Accepts any list of pairs and normalizes it.
impl<'de, T: Scalar> Deserialize<'de> for IntervalSet<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<Interval<T>>::deserialize(d)?;
        Ok(IntervalSet::normalize(raw))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{ratio, Rational};

    fn q(p: i128, d: i128) -> Rational {
        ratio(p, d)
    }

    fn set(pairs: &[(Rational, Rational)]) -> IntervalSet<Rational> {
        IntervalSet::from_pairs(pairs.iter().cloned()).unwrap()
    }

    fn iv(lo: Rational, hi: Rational) -> Interval<Rational> {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let cantor1 = set(&[(q(0, 1), q(1, 3)), (q(2, 3), q(1, 1))]);
        assert_eq!(cantor1.parts(), &[iv(q(0, 1), q(1, 3)), iv(q(2, 3), q(1, 1))]);

        let touching = set(&[(q(0, 1), q(1, 2)), (q(1, 2), q(1, 1))]);
        assert_eq!(touching.parts(), &[iv(q(0, 1), q(1, 1))]);

        // Rank-1 sum set for c = 2/5, n = 2.
        let overlapping = set(&[(q(0, 1), q(4, 5)), (q(3, 5), q(7, 5)), (q(6, 5), q(2, 1))]);
        assert_eq!(overlapping.parts(), &[iv(q(0, 1), q(2, 1))]);
    }

    #[test]
    fn malformed_interval_rejected() {
        let err = IntervalSet::from_pairs([(q(1, 1), q(0, 1))]).unwrap_err();
        assert_eq!(err.code(), "malformed-interval");
        assert!(Interval::new(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn union_examples() {
        let a = set(&[(q(0, 1), q(1, 1))]);
        assert_eq!(a.union(&IntervalSet::empty()), a);

        let left = set(&[(q(0, 1), q(1, 3))]);
        let right = set(&[(q(2, 3), q(1, 1))]);
        assert_eq!(left.union(&right).len(), 2);

        let d = set(&[(q(-1, 1), q(-1, 3))])
            .union(&set(&[(q(-1, 3), q(1, 3))]))
            .union(&set(&[(q(1, 3), q(1, 1))]));
        assert_eq!(d, set(&[(q(-1, 1), q(1, 1))]));
    }

    #[test]
    fn measure_examples() {
        assert_eq!(set(&[(q(0, 1), q(1, 3)), (q(2, 3), q(1, 1))]).measure(), q(2, 3));
        assert_eq!(IntervalSet::<Rational>::empty().measure(), q(0, 1));
        let rank2 = set(&[
            (q(0, 1), q(1, 9)),
            (q(2, 9), q(1, 3)),
            (q(2, 3), q(7, 9)),
            (q(8, 9), q(1, 1)),
        ]);
        assert_eq!(rank2.measure(), q(4, 9));
    }

    #[test]
    fn max_gap_examples() {
        let unit = Interval::unit();
        let cantor1 = set(&[(q(0, 1), q(1, 3)), (q(2, 3), q(1, 1))]);
        assert_eq!(cantor1.max_gap(&unit).unwrap(), q(1, 3));

        let full = set(&[(q(0, 1), q(2, 1))]);
        let hull = iv(q(0, 1), q(2, 1));
        assert_eq!(full.max_gap(&hull).unwrap(), q(0, 1));

        let holes = set(&[(q(0, 1), q(2, 5)), (q(4, 5), q(6, 5)), (q(8, 5), q(2, 1))]);
        assert_eq!(holes.max_gap(&hull).unwrap(), q(2, 5));

        assert_eq!(
            full.max_gap(&unit).unwrap_err(),
            Error::OutsideHull {
                hull: "[0, 1]".into()
            }
        );
    }

    #[test]
    fn end_slack_counts_as_gap() {
        let s = set(&[(q(1, 4), q(1, 2))]);
        let gaps = s.gaps(&Interval::unit()).unwrap();
        assert_eq!(gaps, vec![iv(q(0, 1), q(1, 4)), iv(q(1, 2), q(1, 1))]);
        assert_eq!(s.max_gap(&Interval::unit()).unwrap(), q(1, 2));
    }

    #[test]
    fn contains_interval_examples() {
        let d = set(&[(q(-1, 1), q(1, 1))]);
        assert!(d.contains_interval(&iv(q(-1, 2), q(1, 2))));
        let cantor1 = set(&[(q(0, 1), q(1, 3)), (q(2, 3), q(1, 1))]);
        assert!(!cantor1.contains_interval(&iv(q(3, 10), q(2, 5))));
        let full = set(&[(q(0, 1), q(2, 1))]);
        assert!(full.contains_interval(&iv(q(0, 1), q(2, 1))));
        assert!(!IntervalSet::<Rational>::empty().contains_interval(&iv(q(0, 1), q(0, 1))));
    }

    #[test]
    fn float_merge_tolerance() {
        let raw = vec![
            Interval::new(0.0, 1.0).unwrap(),
            Interval::new(1.0 + 5e-13, 2.0).unwrap(),
            Interval::new(2.0 + 1e-9, 3.0).unwrap(),
        ];
        let s = IntervalSet::normalize(raw.clone());
        assert_eq!(s.len(), 2);
        let tight = IntervalSet::normalize_with_eps(raw, 0.0);
        assert_eq!(tight.len(), 3);
    }

    #[test]
    fn serde_shapes() {
        let s = set(&[(q(0, 1), q(1, 3)), (q(2, 3), q(1, 1))]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"[["0","1/3"],["2/3","1"]]"#);
        let back: IntervalSet<Rational> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);

        let f = IntervalSet::normalize(vec![Interval::new(0.0, 0.5).unwrap()]);
        assert_eq!(serde_json::to_string(&f).unwrap(), "[[0.0,0.5]]");
        assert!(serde_json::from_str::<IntervalSet<f64>>("[[1.0,0.0]]").is_err());
    }
}
