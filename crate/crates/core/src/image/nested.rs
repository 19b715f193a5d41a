//! Images over nested interval hierarchies with coverage pruning.
//!
//! When the rank-`k` lists come with their coarser ancestors, a pair of
//! ancestor intervals whose image already lies inside the union built so
//! far cannot contribute anything new, so its descendants are skipped. The
//! result is the same set `pair_image` computes on the finest lists, but
//! the work tracks the boundary of the image rather than the number of
//! pairs.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::image::compute::{corner_image, monotone_signs, rect_image_unchecked, ImageOptions, PairImage};
use crate::image::domain::{DomainU, Placement, Rect};
use crate::image::model::FunctionModel;
use crate::interval_set::{Interval, IntervalSet};
use crate::scalar::Scalar;

#[derive(Clone, Debug)]
struct Key<T>(T);

impl<T: Scalar> PartialEq for Key<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Key<T> {}

impl<T: Scalar> PartialOrd for Key<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Key<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Disjoint closed intervals keyed by left end, merged on insertion.
pub(crate) struct Cover<T> {
    eps: T,
    parts: BTreeMap<Key<T>, T>,
}

impl<T: Scalar> Cover<T> {
    pub(crate) fn new(eps: T) -> Self {
        Cover {
            eps,
            parts: BTreeMap::new(),
        }
    }

    pub(crate) fn covers(&self, iv: &Interval<T>) -> bool {
        match self.parts.range(..=Key(iv.lo().clone())).next_back() {
            Some((_, hi)) => hi >= iv.hi(),
            None => false,
        }
    }

    pub(crate) fn insert(&mut self, iv: Interval<T>) {
        let (mut lo, mut hi) = iv.into_bounds();
        if let Some((k, v)) = self.parts.range(..=Key(lo.clone())).next_back() {
            if v.clone() + self.eps.clone() >= lo {
                if *v >= hi {
                    return;
                }
                lo = k.0.clone();
                self.parts.remove(&Key(lo.clone()));
            }
        }
        let reach = hi.clone() + self.eps.clone();
        while let Some((k, v)) = self.parts.range(Key(lo.clone())..).next() {
            if k.0 > reach {
                break;
            }
            if *v > hi {
                hi = v.clone();
            }
            let k = k.clone();
            self.parts.remove(&k);
        }
        self.parts.insert(Key(lo), hi);
    }

    pub(crate) fn into_set(self) -> IntervalSet<T> {
        let parts = self
            .parts
            .into_iter()
            .map(|(k, v)| Interval::spanning(k.0, v))
            .collect();
        IntervalSet::normalize_with_eps(parts, T::zero())
    }
}

/// For each interval of `coarse`, the range of `fine` indices it contains.
fn child_ranges<T: Scalar>(coarse: &[Interval<T>], fine: &[Interval<T>]) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::with_capacity(coarse.len());
    let mut j = 0;
    for parent in coarse {
        let start = j;
        while j < fine.len() && parent.contains_interval(&fine[j]) {
            j += 1;
        }
        out.push((start, j));
    }
    if j != fine.len() {
        return Err(Error::InvalidParams(format!(
            "interval {} is not nested in the coarser level",
            fine[j]
        )));
    }
    Ok(out)
}

/// `f_U(A_k, B_k)` for nested lists `xs[0] ⊇ xs[1] ⊇ … ⊇ xs[k]` (and the
/// same for `ys`), each sorted with disjoint interiors. Equal to
/// `pair_image(f, xs[k], ys[k], u, opts)`; `rectangles` counts every range
/// evaluated, coarse or fine. Runs on the calling thread.
pub fn nested_pair_image<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    xs: &[Vec<Interval<T>>],
    ys: &[Vec<Interval<T>>],
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<PairImage<T>> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InvalidParams("nested lists need the same nonzero depth".into()));
    }
    let depth = xs.len() - 1;
    let kids = |lv: &[Vec<Interval<T>>]| -> Result<Vec<Vec<(usize, usize)>>> {
        (0..depth).map(|d| child_ranges(&lv[d], &lv[d + 1])).collect()
    };
    let (kx, ky) = (kids(xs)?, kids(ys)?);
    let mut cover = Cover::new(opts.merge_eps.clone());
    let mut approximate = false;
    let mut work = 0u64;
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for i in (0..xs[0].len()).rev() {
        for j in (0..ys[0].len()).rev() {
            stack.push((0, i, j));
        }
    }
    while let Some((d, i, j)) = stack.pop() {
        work += 1;
        if work > opts.pair_cap {
            return Err(Error::CapExceeded {
                what: "rectangle evaluations",
                needed: work as u128,
                cap: opts.pair_cap,
            });
        }
        let rect = Rect::new(xs[d][i].clone(), ys[d][j].clone());
        let placement = u.classify(&rect);
        if placement == Placement::Outside {
            continue;
        }
        if d == depth {
            let pieces = match placement {
                Placement::Inside => vec![rect],
                _ => u.clip(&rect),
            };
            for piece in pieces {
                let img = rect_image_unchecked(f, &piece, opts)?;
                approximate |= !img.exact;
                cover.insert(img.range);
            }
            continue;
        }
        if placement == Placement::Inside && f.admits(&rect) {
            let range = match monotone_signs(f, &rect) {
                Some(signs) => corner_image(f, &rect.x, &rect.y, signs),
                None => f.range_f(&rect),
            };
            if cover.covers(&range) {
                continue;
            }
        }
        let (xa, xb) = kx[d][i];
        let (ya, yb) = ky[d][j];
        for ci in (xa..xb).rev() {
            for cj in (ya..yb).rev() {
                stack.push((d + 1, ci, cj));
            }
        }
    }
    Ok(PairImage {
        set: cover.into_set(),
        approximate,
        rectangles: work,
    })
}
