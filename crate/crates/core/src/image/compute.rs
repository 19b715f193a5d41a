//! Images of rectangles and of products of interval lists.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::domain::{DomainU, OpenBox, Placement, Rect};
use crate::image::model::{iv_abs, iv_div, FunctionModel};
use crate::interval_set::{Interval, IntervalSet, SweepMerge};
use crate::moran::{MoranSpec, Restriction, TheoremBounds, DEFAULT_LEVEL_CAP};
use crate::rational::Rational;
use crate::scalar::Scalar;

/// Default cap on rectangle evaluations per image.
pub const DEFAULT_PAIR_CAP: u64 = 100_000_000;
/// Default image tolerance of the floating backend.
pub const DEFAULT_IMG_EPS: f64 = 1e-10;
pub const DEFAULT_DEPTH_LIMIT: u32 = 40;

/// Knobs shared by every image computation.
#[derive(Clone, Debug)]
pub struct ImageOptions<T> {
    /// Merge tolerance for interval unions (zero on the exact backend).
    pub merge_eps: T,
    /// Subdivision stops once a piece's enclosure is this narrow.
    pub img_eps: T,
    pub depth_limit: u32,
    pub pair_cap: u64,
    pub level_cap: u64,
}

impl ImageOptions<Rational> {
    pub fn exact() -> Self {
        ImageOptions {
            merge_eps: Rational::zero(),
            img_eps: Rational::zero(),
            depth_limit: DEFAULT_DEPTH_LIMIT,
            pair_cap: DEFAULT_PAIR_CAP,
            level_cap: DEFAULT_LEVEL_CAP,
        }
    }
}

impl ImageOptions<f64> {
    pub fn float() -> Self {
        ImageOptions {
            merge_eps: f64::default_merge_eps(),
            img_eps: DEFAULT_IMG_EPS,
            depth_limit: DEFAULT_DEPTH_LIMIT,
            pair_cap: DEFAULT_PAIR_CAP,
            level_cap: DEFAULT_LEVEL_CAP,
        }
    }
}

impl<T: Scalar> Default for ImageOptions<T> {
    fn default() -> Self {
        ImageOptions {
            merge_eps: T::default_merge_eps(),
            img_eps: if T::EXACT { T::zero() } else { T::from_rational(&Rational::new(1, 10_000_000_000)) },
            depth_limit: DEFAULT_DEPTH_LIMIT,
            pair_cap: DEFAULT_PAIR_CAP,
            level_cap: DEFAULT_LEVEL_CAP,
        }
    }
}

/// Range of `f` over a rectangle. `exact` is false when some piece had to
/// fall back on an enclosure.
#[derive(Clone, Debug, PartialEq)]
pub struct RectImage<T> {
    pub range: Interval<T>,
    pub exact: bool,
}

/// `+1` if the interval is `>= 0`, `-1` if `<= 0`, `None` if it straddles.
fn sign_of<T: Scalar>(iv: &Interval<T>) -> Option<i32> {
    if iv.lo().signum() >= 0 {
        Some(1)
    } else if iv.hi().signum() <= 0 {
        Some(-1)
    } else {
        None
    }
}

/// Monotonicity of `f` on `r` in each variable.
pub fn monotone_signs<T: Scalar, F: FunctionModel<T> + ?Sized>(f: &F, r: &Rect<T>) -> Option<(i32, i32)> {
    Some((sign_of(&f.range_dx(r))?, sign_of(&f.range_dy(r))?))
}

/// Range over a rectangle on which `f` is monotone in each variable: the
/// extremes sit at opposite corners.
#[inline]
pub(crate) fn corner_image<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    x: &Interval<T>,
    y: &Interval<T>,
    (sx, sy): (i32, i32),
) -> Interval<T> {
    let (xmin, xmax) = if sx >= 0 { (x.lo(), x.hi()) } else { (x.hi(), x.lo()) };
    let (ymin, ymax) = if sy >= 0 { (y.lo(), y.hi()) } else { (y.hi(), y.lo()) };
    Interval::spanning(f.eval(xmin, ymin), f.eval(xmax, ymax))
}

/// Range of `f` over `r` without consulting `U`.
///
/// Exact whenever the partials keep a constant sign on `r`. Otherwise a
/// branch-and-bound bisection refines only pieces whose enclosure pokes
/// out of the hull found so far; pieces at the depth limit contribute their
/// enclosure and clear the `exact` flag.
pub fn rect_image_unchecked<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    r: &Rect<T>,
    opts: &ImageOptions<T>,
) -> Result<RectImage<T>> {
    if !f.admits(r) {
        return Err(Error::OutsideModelDomain {
            model: f.name(),
            rect: r.to_string(),
        });
    }
    if let Some(signs) = monotone_signs(f, r) {
        return Ok(RectImage {
            range: corner_image(f, &r.x, &r.y, signs),
            exact: true,
        });
    }
    // Seed the hull with the centre value so pruning has something to bite on.
    let (cx, cy) = (r.x.midpoint(), r.y.midpoint());
    let v = f.eval(&cx, &cy);
    let mut lo = v.clone();
    let mut hi = v;
    let mut exact = true;
    let mut stack = vec![(r.clone(), 0u32)];
    while let Some((piece, depth)) = stack.pop() {
        let enc = f.range_f(&piece);
        if *enc.lo() >= lo && *enc.hi() <= hi {
            continue;
        }
        if let Some(signs) = monotone_signs(f, &piece) {
            let img = corner_image(f, &piece.x, &piece.y, signs);
            lo = T::min_of(lo, img.lo().clone());
            hi = T::max_of(hi, img.hi().clone());
            continue;
        }
        let narrow = !T::EXACT && enc.length() <= opts.img_eps;
        if depth >= opts.depth_limit || narrow {
            if depth >= opts.depth_limit {
                exact = false;
            }
            lo = T::min_of(lo, enc.lo().clone());
            hi = T::max_of(hi, enc.hi().clone());
            continue;
        }
        let (a, b) = piece.bisect();
        stack.push((a, depth + 1));
        stack.push((b, depth + 1));
    }
    Ok(RectImage {
        range: Interval::spanning(lo, hi),
        exact,
    })
}

/// Range of `f` over a rectangle that must lie inside `U`.
pub fn rect_image<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    r: &Rect<T>,
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<RectImage<T>> {
    match u.classify(r) {
        Placement::Inside => rect_image_unchecked(f, r, opts),
        _ => Err(Error::StraddlesDomain { rect: r.to_string() }),
    }
}

/// `|∂y f / ∂x f|` over `r`, from the partial-derivative enclosures; `None`
/// when `∂x f` may vanish on `r`.
pub fn ratio_range<T: Scalar, F: FunctionModel<T> + ?Sized>(f: &F, r: &Rect<T>) -> Option<Interval<T>> {
    let dx = f.range_dx(r);
    if dx.contains(&T::zero()) {
        return None;
    }
    Some(iv_div(&iv_abs(&f.range_dy(r)), &iv_abs(&dx)))
}

/// Whether the derivative ratio stays strictly inside the theorem window
/// everywhere on `r`.
pub fn ratio_within<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    r: &Rect<T>,
    bounds: &TheoremBounds,
) -> bool {
    match ratio_range(f, r) {
        Some(range) => {
            T::from_rational(&bounds.lower) < *range.lo() && *range.hi() < T::from_rational(&bounds.upper)
        }
        None => false,
    }
}

/// Outer image of a product of interval lists.
#[derive(Clone, Debug, PartialEq)]
pub struct PairImage<T> {
    pub set: IntervalSet<T>,
    /// Some rectangle range came from an enclosure rather than an exact range.
    pub approximate: bool,
    pub rectangles: u64,
}

/// Balanced union of a stream of canonical sets: a binary counter of
/// partial unions keeps memory near the size of the result.
struct UnionStack<T> {
    eps: T,
    stack: Vec<(u32, IntervalSet<T>)>,
}

impl<T: Scalar> UnionStack<T> {
    fn new(eps: T) -> Self {
        UnionStack { eps, stack: Vec::new() }
    }

    fn push(&mut self, set: IntervalSet<T>) {
        let mut item = (0u32, set);
        while let Some((h, _)) = self.stack.last() {
            if *h != item.0 {
                break;
            }
            let (h, top) = self.stack.pop().expect("nonempty");
            item = (h + 1, top.union_with_eps(&item.1, self.eps.clone()));
        }
        self.stack.push(item);
    }

    fn finish(self) -> IntervalSet<T> {
        let eps = self.eps;
        self.stack
            .into_iter()
            .map(|(_, s)| s)
            .reduce(|a, b| a.union_with_eps(&b, eps.clone()))
            .unwrap_or_else(IntervalSet::empty)
    }
}

struct RowOutcome<T> {
    set: IntervalSet<T>,
    approximate: bool,
    rectangles: u64,
}

fn clip_run_end<'a, T: Scalar>(bx: &OpenBox<T>, y: &'a Interval<T>, end: bool) -> Cow<'a, Interval<T>> {
    if end {
        Cow::Owned(bx.clip_y(y))
    } else {
        Cow::Borrowed(y)
    }
}

/// Image of `{x} × ys` inside one box of `U`. `ys` is sorted and disjoint
/// up to shared endpoints.
fn row_image<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    x: &Interval<T>,
    ys: &[Interval<T>],
    bx: &OpenBox<T>,
    opts: &ImageOptions<T>,
) -> Result<RowOutcome<T>> {
    // The intervals meeting the box's y-range form a contiguous run; only
    // its two ends can need clipping.
    let start = match bx.y_lo() {
        Some(lo) => ys.partition_point(|y| y.hi() <= lo),
        None => 0,
    };
    let end = match bx.y_hi() {
        Some(hi) => ys.partition_point(|y| y.lo() < hi),
        None => ys.len(),
    };
    let run = if start < end { &ys[start..end] } else { &[][..] };
    let mut out = RowOutcome {
        set: IntervalSet::empty(),
        approximate: false,
        rectangles: run.len() as u64,
    };
    let (Some(first), Some(last)) = (run.first(), run.last()) else {
        return Ok(out);
    };
    let last_idx = run.len() - 1;
    let clip = |i: usize, y| clip_run_end(bx, y, i == 0 || i == last_idx);
    let strip = Rect::new(
        x.clone(),
        Interval::spanning(bx.clip_y(first).lo().clone(), bx.clip_y(last).hi().clone()),
    );
    if f.admits(&strip) {
        if let Some(signs) = monotone_signs(f, &strip) {
            // Lower corners move monotonically along the row, so images
            // arrive sorted by `lo` and merge as they come.
            let mut sweep = SweepMerge::new(opts.merge_eps.clone());
            if signs.1 >= 0 {
                for (i, y) in run.iter().enumerate() {
                    sweep.push(corner_image(f, x, &clip(i, y), signs));
                }
            } else {
                for (i, y) in run.iter().enumerate().rev() {
                    sweep.push(corner_image(f, x, &clip(i, y), signs));
                }
            }
            out.set = sweep.finish();
            return Ok(out);
        }
    }
    let mut raw = Vec::with_capacity(run.len());
    for (i, y) in run.iter().enumerate() {
        let img = rect_image_unchecked(f, &Rect::new(x.clone(), clip(i, y).into_owned()), opts)?;
        out.approximate |= !img.exact;
        raw.push(img.range);
    }
    out.set = IntervalSet::normalize_with_eps(raw, opts.merge_eps.clone());
    Ok(out)
}

/// `f_U(A, B)` for unions of the listed intervals: the canonical union of
/// the ranges of `f` over `(I × J) ∩ U`, taking closures of the clipped
/// rectangles.
///
/// `xs` and `ys` must be sorted by `lo` with disjoint interiors, as level
/// sets are.
pub fn pair_image<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    xs: &[Interval<T>],
    ys: &[Interval<T>],
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<PairImage<T>> {
    let needed = (xs.len() as u128) * (ys.len() as u128);
    if needed > opts.pair_cap as u128 {
        return Err(Error::CapExceeded {
            what: "rectangle evaluations",
            needed,
            cap: opts.pair_cap,
        });
    }
    let rows = xs
        .par_iter()
        .map(|x| -> Result<RowOutcome<T>> {
            let mut acc = RowOutcome {
                set: IntervalSet::empty(),
                approximate: false,
                rectangles: 0,
            };
            for bx in u.boxes() {
                if !bx.meets_x(x) {
                    continue;
                }
                let row = row_image(f, &bx.clip_x(x), ys, bx, opts)?;
                acc.set = acc.set.union_with_eps(&row.set, opts.merge_eps.clone());
                acc.approximate |= row.approximate;
                acc.rectangles += row.rectangles;
            }
            Ok(acc)
        })
        .fold(
            || Ok((UnionStack::new(opts.merge_eps.clone()), false, 0u64)),
            |acc: Result<(UnionStack<T>, bool, u64)>, row| {
                let (mut stack, approx, count) = acc?;
                let row = row?;
                stack.push(row.set);
                Ok((stack, approx | row.approximate, count + row.rectangles))
            },
        )
        .map(|acc| acc.map(|(stack, approx, count)| (stack.finish(), approx, count)))
        .reduce(
            || Ok((IntervalSet::empty(), false, 0)),
            |a, b| {
                let (sa, aa, ca) = a?;
                let (sb, ab, cb) = b?;
                Ok((sa.union_with_eps(&sb, opts.merge_eps.clone()), aa | ab, ca + cb))
            },
        )?;
    Ok(PairImage {
        set: rows.0,
        approximate: rows.1,
        rectangles: rows.2,
    })
}

/// One rank of an image sequence.
#[derive(Clone, Debug, Serialize)]
#[serde(bound(serialize = "T: Scalar"))]
pub struct RankImage<T> {
    pub k: usize,
    pub set: IntervalSet<T>,
    pub count: usize,
    pub measure: T,
    pub max_gap: T,
    pub approximate: bool,
}

/// Outer images at ranks `1..=k_max`. When a cap is hit the sequence stops
/// early and `truncated` carries the error.
#[derive(Clone, Debug)]
pub struct ImageSequence<T> {
    pub ranks: Vec<RankImage<T>>,
    pub truncated: Option<Error>,
}

impl<T: Scalar> ImageSequence<T> {
    pub fn achieved_rank(&self) -> usize {
        self.ranks.last().map_or(0, |r| r.k)
    }
}

pub(crate) fn extents_as<T: Scalar>(spec: &MoranSpec, k: usize, cap: u64) -> Result<Vec<Interval<T>>> {
    Ok(spec
        .level_extents(k, cap)?
        .iter()
        .map(|iv| iv.map(T::from_rational))
        .collect())
}

/// Image of `f` over the rank-`k` level sets of both specs.
pub fn level_image<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    spec1: &MoranSpec,
    spec2: &MoranSpec,
    k: usize,
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<PairImage<T>> {
    let xs = extents_as::<T>(spec1, k, opts.level_cap)?;
    let ys = extents_as::<T>(spec2, k, opts.level_cap)?;
    pair_image(f, &xs, &ys, u, opts)
}

pub(crate) fn rank_image<T: Scalar>(k: usize, img: PairImage<T>) -> RankImage<T> {
    let max_gap = img.set.max_inner_gap();
    RankImage {
        k,
        count: img.set.len(),
        measure: img.set.measure(),
        max_gap,
        approximate: img.approximate,
        set: img.set,
    }
}

/// Outer approximations `f_U(E_k, E_k)` for `k = 1..=k_max`.
pub fn image_sequence<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    spec1: &MoranSpec,
    spec2: &MoranSpec,
    u: &DomainU<T>,
    k_max: usize,
    opts: &ImageOptions<T>,
) -> Result<ImageSequence<T>> {
    let mut ranks = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        match level_image(f, spec1, spec2, k, u, opts) {
            Ok(img) => ranks.push(rank_image(k, img)),
            Err(e @ Error::CapExceeded { .. }) => {
                return Ok(ImageSequence {
                    ranks,
                    truncated: Some(e),
                })
            }
            Err(e) => return Err(e),
        }
    }
    Ok(ImageSequence { ranks, truncated: None })
}

/// Result of comparing consecutive window images.
#[derive(Clone, Debug)]
pub struct Stabilization<T> {
    pub k0: usize,
    /// `(n, image at n == image at n + 1)` for `n` in `k0..k_max`.
    pub steps: Vec<(usize, bool)>,
    /// Image at rank `k0`.
    pub image: IntervalSet<T>,
    /// The derivative ratio stays strictly inside the theorem window over
    /// the hull of the two windows.
    pub uniform_ratio: bool,
    /// Set only when every step was stable and the ratio condition holds:
    /// the rank-`k0` image is then the exact image over the windows.
    pub exact_image: Option<IntervalSet<T>>,
}

impl<T> Stabilization<T> {
    pub fn all_stable(&self) -> bool {
        self.steps.iter().all(|(_, ok)| *ok)
    }
}

fn window_image<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    w1: &Restriction,
    w2: &Restriction,
    n: usize,
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<IntervalSet<T>> {
    let conv = |r: &Restriction| -> Result<Vec<Interval<T>>> {
        Ok(r.level_capped(n, opts.level_cap)?
            .extents()
            .iter()
            .map(|iv| iv.map(T::from_rational))
            .collect())
    };
    Ok(pair_image(f, &conv(w1)?, &conv(w2)?, u, opts)?.set)
}

/// Checks `F(G_n, G_n) = F(G_{n+1}, G_{n+1})` on a pair of windows for
/// `n = k0..k_max`, comparing exactly on the rational backend and within
/// `tol` otherwise.
pub fn stabilization_check<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    w1: &Restriction,
    w2: &Restriction,
    u: &DomainU<T>,
    k_max: usize,
    tol: &T,
    opts: &ImageOptions<T>,
) -> Result<Stabilization<T>> {
    if w1.k0() != w2.k0() {
        return Err(Error::InvalidWindow(format!(
            "window ranks differ: {} vs {}",
            w1.k0(),
            w2.k0()
        )));
    }
    if !w1.spec().same_sequences(w2.spec()) {
        return Err(Error::MismatchedSequences);
    }
    let k0 = w1.k0();
    let image = window_image(f, w1, w2, k0, u, opts)?;
    let mut prev = image.clone();
    let mut steps = Vec::new();
    for n in k0..k_max {
        let next = window_image(f, w1, w2, n + 1, u, opts)?;
        let same = if T::EXACT { prev == next } else { prev.approx_eq(&next, tol) };
        steps.push((n, same));
        prev = next;
    }
    let hull = Rect::new(w1.window().map(T::from_rational), w2.window().map(T::from_rational));
    let bounds = w1.spec().theorem_bounds();
    let uniform_ratio =
        bounds.is_nonempty() && u.classify(&hull) == Placement::Inside && f.admits(&hull) && ratio_within(f, &hull, &bounds);
    let exact_image = (uniform_ratio && steps.iter().all(|(_, ok)| *ok)).then(|| image.clone());
    Ok(Stabilization {
        k0,
        steps,
        image,
        uniform_ratio,
        exact_image,
    })
}
