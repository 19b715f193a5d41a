//! Classical Cantor-arithmetic identities and sharp thresholds, reproduced
//! as finite-rank signatures.
//!
//! Outer images contain the true image at every rank. A limit that fills a
//! whole interval therefore shows up as a maximal gap that drops to (near)
//! zero, and a limit with a hole shows up as one gap interval that stays put
//! from rank to rank. Both are evidence about the limit, not proofs.
//!
//! The threshold cases use the overlapping three-map attractor `K`, which is
//! not a Moran set: its level sets are built by iterating the maps on
//! canonical interval unions.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{
    corner_image, monotone_signs, pair_image, ratio_range, rect_image_unchecked, Cover, Div, DomainU, FunctionModel,
    ImageOptions, Mul, OpenBox, PairImage, Placement, Rect, SqrtSum, Sub, DEFAULT_PAIR_CAP,
};
use crate::interval_set::{Interval, IntervalSet};
use crate::moran::{MoranSpec, DEFAULT_LEVEL_CAP};
use crate::rational::{ratio, Rational};
use crate::scalar::Scalar;

/// The attractor of `{λx, λx + c − λ, λx + 1 − λ}` with hull `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OverlapSpec {
    pub lambda: Rational,
    pub c: Rational,
}

impl OverlapSpec {
    /// Requires `f1(I) ∩ f2(I) ≠ ∅` (`c ≤ 2λ`), `f3(I)` disjoint from the
    /// other two (`c < 1 − λ`) and `f2(I) ⊆ I` (`c ≥ λ`), so that `[0, 1]`
    /// is the hull of `K`.
    pub fn new(lambda: Rational, c: Rational) -> Result<Self> {
        let zero = Rational::zero();
        let one = Rational::one();
        let two = Rational::from_integer(2);
        let bad = |msg: &str| Err(Error::InvalidOverlapSpec(format!("λ = {lambda}, c = {c}: {msg}")));
        if lambda <= zero || lambda >= one {
            return bad("λ must lie in (0, 1)");
        }
        if c < lambda {
            return bad("c < λ pushes f2([0, 1]) below 0");
        }
        if c > &two * &lambda {
            return bad("f1([0, 1]) and f2([0, 1]) do not meet (c > 2λ)");
        }
        if c >= &one - &lambda {
            return bad("f3([0, 1]) meets f1([0, 1]) ∪ f2([0, 1]) (c ≥ 1 − λ)");
        }
        Ok(OverlapSpec { lambda, c })
    }

    /// `(scale, shift)` of the three maps.
    pub fn maps(&self) -> [(Rational, Rational); 3] {
        let l = &self.lambda;
        [
            (l.clone(), Rational::zero()),
            (l.clone(), &self.c - l),
            (l.clone(), &Rational::one() - l),
        ]
    }

    /// `(1 − λ)^2 ≤ c`.
    pub fn product_criterion(&self) -> bool {
        let a = &Rational::one() - &self.lambda;
        &a * &a <= self.c
    }

    /// `√c + 1 ≥ 2√(1 − λ)`, decided exactly: both sides are nonnegative,
    /// so square twice.
    pub fn sqrt_criterion(&self) -> bool {
        // (1 + √c)^2 = 1 + c + 2√c ≥ 4(1 − λ)  ⇔  2√c ≥ 4(1 − λ) − 1 − c.
        let one = Rational::one();
        let rhs = &(&Rational::from_integer(4) * &(&one - &self.lambda)) - &(&one + &self.c);
        rhs.signum() <= 0 || &Rational::from_integer(4) * &self.c >= &rhs * &rhs
    }
}

/// `L_k = f1(L_{k-1}) ∪ f2(L_{k-1}) ∪ f3(L_{k-1})` with `L_0 = [0, 1]`.
pub fn ifs_level_set(spec: &OverlapSpec, k: usize) -> Result<IntervalSet<Rational>> {
    ifs_level_set_capped(spec, k, DEFAULT_LEVEL_CAP)
}

pub fn ifs_level_set_capped(spec: &OverlapSpec, k: usize, cap: u64) -> Result<IntervalSet<Rational>> {
    let needed = 3u128.checked_pow(k as u32).unwrap_or(u128::MAX);
    if needed > cap as u128 {
        return Err(Error::CapExceeded {
            what: "IFS compositions",
            needed,
            cap,
        });
    }
    let maps = spec.maps();
    let mut level = IntervalSet::from_interval(Interval::unit());
    for _ in 0..k {
        let pieces = maps
            .iter()
            .flat_map(|(a, b)| level.iter().map(move |iv| iv.map(|v| &(a * v) + b)))
            .collect();
        level = IntervalSet::normalize(pieces);
    }
    Ok(level)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseName {
    Steinhaus,
    CantorProduct,
    KkProduct,
    SqrtSum,
    KkDiv,
}

pub const CASE_NAMES: [&str; 5] = ["steinhaus", "cantor_product", "kk_product", "sqrt_sum", "kk_div"];

impl CaseName {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseName::Steinhaus => "steinhaus",
            CaseName::CantorProduct => "cantor_product",
            CaseName::KkProduct => "kk_product",
            CaseName::SqrtSum => "sqrt_sum",
            CaseName::KkDiv => "kk_div",
        }
    }

    /// Whether the case runs on the overlapping attractor `K`.
    pub fn uses_overlap(&self) -> bool {
        matches!(self, CaseName::KkProduct | CaseName::SqrtSum | CaseName::KkDiv)
    }

    /// Shipped `(λ, c)` presets: two on each side of the threshold.
    pub fn presets(&self) -> Vec<OverlapSpec> {
        let p = |l: (i128, i128), c: (i128, i128)| OverlapSpec::new(ratio(l.0, l.1), ratio(c.0, c.1)).expect("valid preset");
        match self {
            CaseName::KkProduct | CaseName::KkDiv => vec![
                p((3, 10), (49, 100)),
                p((2, 5), (9, 20)),
                p((7, 20), (2, 5)),
                p((1, 3), (2, 5)),
            ],
            CaseName::SqrtSum => vec![
                p((2, 5), (9, 20)),
                p((3, 10), (1, 2)),
                p((3, 10), (9, 20)),
                p((1, 3), (2, 5)),
            ],
            _ => Vec::new(),
        }
    }
}

impl fmt::Display for CaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "steinhaus" => CaseName::Steinhaus,
            "cantor_product" => CaseName::CantorProduct,
            "kk_product" => CaseName::KkProduct,
            "sqrt_sum" => CaseName::SqrtSum,
            "kk_div" => CaseName::KkDiv,
            other => return Err(Error::UnknownCase(other.to_string())),
        })
    }
}

/// A value from either backend; serializes as a `"p/q"` string or a number.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Num {
    Exact(Rational),
    Float(f64),
}

impl Num {
    pub fn to_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => r.to_f64(),
            Num::Float(x) => *x,
        }
    }

    fn of<T: Scalar>(v: &T) -> Num {
        match v.as_rational() {
            Some(r) => Num::Exact(r),
            None => Num::Float(v.to_f64()),
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) => write!(f, "{r}"),
            Num::Float(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseRank {
    pub k: usize,
    pub count: usize,
    pub measure: Num,
    pub max_gap: Num,
}

/// Finite-rank evidence for one case.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CaseReport {
    pub case: CaseName,
    pub params: Option<OverlapSpec>,
    /// The cited limit statement.
    pub claim: &'static str,
    /// Which side of the threshold the parameters are on, when the claim
    /// has one.
    pub criterion: Option<bool>,
    /// Hull the measures and gaps refer to.
    pub window: (Num, Num),
    pub ranks: Vec<CaseRank>,
    /// A gap of the rank-`persistent_from` image present unchanged at every
    /// later computed rank; the widest such gap.
    pub persistent_gap: Option<(Num, Num)>,
    pub persistent_from: Option<usize>,
    pub verdict: &'static str,
    /// Whether the verdict is the one the claim predicts; `None` when the
    /// claim says nothing for these parameters.
    pub agrees: Option<bool>,
}

/// Maximal gap below which a gap counts as vanished.
pub const VANISH_TOL: f64 = 1e-3;
/// First rank compared when looking for a persistent gap.
pub const PERSISTENCE_FROM: usize = 6;
const FLOAT_GAP_TOL: f64 = 1e-12;

struct Series<T> {
    window: Interval<T>,
    images: Vec<IntervalSet<T>>,
}

impl<T: Scalar> Series<T> {
    fn rows(&self) -> Result<Vec<CaseRank>> {
        self.images
            .iter()
            .enumerate()
            .map(|(i, set)| {
                Ok(CaseRank {
                    k: i + 1,
                    count: set.len(),
                    measure: Num::of(&set.measure()),
                    max_gap: Num::of(&set.max_gap(&self.window)?),
                })
            })
            .collect()
    }

    fn same_gap(a: &Interval<T>, b: &Interval<T>) -> bool {
        if T::EXACT {
            a == b
        } else {
            (a.lo().to_f64() - b.lo().to_f64()).abs() <= FLOAT_GAP_TOL
                && (a.hi().to_f64() - b.hi().to_f64()).abs() <= FLOAT_GAP_TOL
        }
    }

    /// Widest gap of the rank-`from` image that every later image repeats.
    fn persistent_gap(&self) -> Result<Option<(usize, Interval<T>)>> {
        let k_max = self.images.len();
        if k_max < 2 {
            return Ok(None);
        }
        let from = PERSISTENCE_FROM.min(k_max - 1);
        let later: Vec<Vec<Interval<T>>> = self.images[from..]
            .iter()
            .map(|s| s.gaps(&self.window))
            .collect::<Result<_>>()?;
        let widest = self.images[from - 1]
            .gaps(&self.window)?
            .into_iter()
            .filter(|g| later.iter().all(|gs| gs.iter().any(|h| Self::same_gap(g, h))))
            .max_by(|a, b| a.length().total_cmp(&b.length()));
        Ok(widest.map(|g| (from, g)))
    }

    fn vanishing(&self) -> Result<bool> {
        let gaps: Vec<f64> = self
            .images
            .iter()
            .map(|s| s.max_gap(&self.window).map(|g| g.to_f64()))
            .collect::<Result<_>>()?;
        let monotone = gaps.windows(2).all(|w| w[1] <= w[0] + FLOAT_GAP_TOL);
        Ok(monotone && gaps.last().is_some_and(|g| *g < VANISH_TOL))
    }
}

/// Images at ranks `1..=k_max` of a Moran construction.
fn moran_series<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    spec: &MoranSpec,
    k_max: usize,
    window: Interval<T>,
    opts: &ImageOptions<T>,
) -> Result<Series<T>> {
    let images = (1..=k_max)
        .map(|k| {
            let level: Vec<Interval<T>> = spec
                .level_extents(k, opts.level_cap)?
                .iter()
                .map(|iv| iv.map(T::from_rational))
                .collect();
            Ok(pair_image(f, &level, &level, &DomainU::plane(), opts)?.set.clip(&window))
        })
        .collect::<Result<_>>()?;
    Ok(Series { window, images })
}

/// Images at ranks `1..=k_max` over the attractor's level sets.
fn overlap_series<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    spec: &OverlapSpec,
    k_max: usize,
    u: &DomainU<T>,
    window: Interval<T>,
    opts: &ImageOptions<T>,
) -> Result<Series<T>> {
    let images = (1..=k_max)
        .map(|k| Ok(ifs_image_within(f, spec, k, u, Some(&window), opts)?.set))
        .collect::<Result<_>>()?;
    Ok(Series { window, images })
}

/// `f_U(L_k, L_k)`, built from pairs of cells `f_w([0, 1])` rather than
/// from the merged components of `L_k`.
///
/// A pair of equal-rank cells `I × J` is not subdivided when its image is
/// already covered, or when the ratio `|∂y f / ∂x f|` stays in `[g, λ/g]`
/// (or, with the roles of x and y swapped, in `[g/λ, 1/g]`) over the whole
/// rectangle, where `g = 1 − λ − c` is the widest gap between sibling
/// cells. The bound makes the images of consecutive children overlap at
/// every deeper rank, so the cells below `I × J` map onto `f(I × J)`
/// exactly. The result equals the image over the rank-`k` components.
pub fn ifs_pair_image<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    spec: &OverlapSpec,
    k: usize,
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<PairImage<T>> {
    ifs_image_within(f, spec, k, u, None, opts)
}

/// `ifs_pair_image`, or its intersection with `window` when one is given;
/// pairs mapping entirely outside the window are skipped.
fn ifs_image_within<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    spec: &OverlapSpec,
    k: usize,
    u: &DomainU<T>,
    window: Option<&Interval<T>>,
    opts: &ImageOptions<T>,
) -> Result<PairImage<T>> {
    let lambda = T::from_rational(&spec.lambda);
    let gap = T::from_rational(&(&(&Rational::one() - &spec.lambda) - &spec.c));
    let (lo_a, hi_a) = (gap.clone(), lambda.clone() / gap.clone());
    let (lo_b, hi_b) = (gap.clone() / lambda.clone(), T::one() / gap.clone());
    let shifts: Vec<T> = spec.maps().iter().map(|(_, b)| T::from_rational(b)).collect();
    let mut lengths = vec![T::one()];
    for r in 0..k {
        lengths.push(lengths[r].clone() * lambda.clone());
    }
    let chains = |rect: &Rect<T>| -> bool {
        match ratio_range(f, rect) {
            Some(r) => (*r.lo() >= lo_a && *r.hi() <= hi_a) || (*r.lo() >= lo_b && *r.hi() <= hi_b),
            None => false,
        }
    };
    let within = |iv: Interval<T>| match window {
        Some(w) => iv.intersection(w),
        None => Some(iv),
    };
    // An outer bound on the image of a rectangle, if f is bounded on it.
    let outer = |rect: &Rect<T>| -> Option<Interval<T>> {
        if !f.admits(rect) {
            return None;
        }
        Some(match monotone_signs(f, rect) {
            Some(signs) => corner_image(f, &rect.x, &rect.y, signs),
            None => f.range_f(rect),
        })
    };
    let mut cover = Cover::new(opts.merge_eps.clone());
    let mut approximate = false;
    let mut work = 0u64;
    let mut stack = vec![(0usize, T::zero(), T::zero())];
    while let Some((r, ax, ay)) = stack.pop() {
        work += 1;
        if work > opts.pair_cap {
            return Err(Error::CapExceeded {
                what: "rectangle evaluations",
                needed: work as u128,
                cap: opts.pair_cap,
            });
        }
        let len = &lengths[r];
        let rect = Rect::new(
            Interval::spanning(ax.clone(), ax.clone() + len.clone()),
            Interval::spanning(ay.clone(), ay.clone() + len.clone()),
        );
        let placement = u.classify(&rect);
        if placement == Placement::Outside {
            continue;
        }
        let pieces = match placement {
            Placement::Inside => vec![rect.clone()],
            _ => u.clip(&rect),
        };
        if r == k {
            for piece in pieces {
                let img = rect_image_unchecked(f, &piece, opts)?;
                approximate |= !img.exact;
                if let Some(iv) = within(img.range) {
                    cover.insert(iv);
                }
            }
            continue;
        }
        let ranges: Option<Vec<Interval<T>>> = pieces.iter().map(outer).collect();
        if let Some(ranges) = ranges {
            if ranges.into_iter().filter_map(within).all(|iv| cover.covers(&iv)) {
                continue;
            }
            if placement == Placement::Inside && chains(&rect) {
                if let Some(signs) = monotone_signs(f, &rect) {
                    if let Some(iv) = within(corner_image(f, &rect.x, &rect.y, signs)) {
                        cover.insert(iv);
                    }
                    continue;
                }
            }
        }
        for sx in shifts.iter().rev() {
            for sy in shifts.iter().rev() {
                stack.push((
                    r + 1,
                    ax.clone() + len.clone() * sx.clone(),
                    ay.clone() + len.clone() * sy.clone(),
                ));
            }
        }
    }
    Ok(PairImage {
        set: cover.into_set(),
        approximate,
        rectangles: work,
    })
}

/// Runs one case up to rank `k_max`. Cases on `K` need `params`; the two
/// middle-third cases take none.
pub fn run_case(name: CaseName, params: Option<OverlapSpec>, k_max: usize) -> Result<CaseReport> {
    run_case_capped(name, params, k_max, DEFAULT_PAIR_CAP, DEFAULT_LEVEL_CAP)
}

/// [`run_case`] with explicit caps on rectangle evaluations and on level
/// sizes.
pub fn run_case_capped(
    name: CaseName,
    params: Option<OverlapSpec>,
    k_max: usize,
    pair_cap: u64,
    level_cap: u64,
) -> Result<CaseReport> {
    if k_max == 0 {
        return Err(Error::InvalidParams("k_max must be at least 1".into()));
    }
    match (name.uses_overlap(), &params) {
        (true, None) => return Err(Error::InvalidParams(format!("{name} needs λ and c"))),
        (false, Some(_)) => return Err(Error::InvalidParams(format!("{name} takes no λ or c"))),
        _ => {}
    }
    let exact = ImageOptions::<Rational> {
        pair_cap,
        level_cap,
        ..ImageOptions::exact()
    };
    let float = ImageOptions::<f64> {
        pair_cap,
        level_cap,
        ..ImageOptions::float()
    };
    let w = |a: i128, b: i128| Interval::new(ratio(a, 1), ratio(b, 1)).expect("ordered");
    match name {
        CaseName::Steinhaus => {
            let series = moran_series(&Sub, &MoranSpec::middle_third(), k_max, w(-1, 1), &exact)?;
            let full = IntervalSet::from_interval(w(-1, 1));
            let ok = series.images.iter().all(|s| *s == full);
            finish(name, None, "C − C = [−1, 1]", None, series, if ok { "exact-match" } else { "mismatch" }, Some(ok))
        }
        CaseName::CantorProduct => {
            let series = moran_series(&Mul, &MoranSpec::middle_third(), k_max, w(0, 1), &exact)?;
            let floor = ratio(17, 21);
            let measures: Vec<Rational> = series.images.iter().map(|s| s.measure()).collect();
            let ok = measures.windows(2).all(|m| m[1] <= m[0]) && measures.iter().all(|m| *m >= floor);
            let verdict = if ok { "within-bounds" } else { "out-of-bounds" };
            finish(name, None, "17/21 ≤ L(C·C) ≤ 8/9", None, series, verdict, Some(ok))
        }
        CaseName::KkProduct => {
            let spec = params.expect("checked above");
            let series = overlap_series(&Mul, &spec, k_max, &DomainU::plane(), w(0, 1), &exact)?;
            let holds = spec.product_criterion();
            threshold(name, spec, "K·K = [0, 1] iff (1 − λ)² ≤ c", holds, true, series)
        }
        CaseName::SqrtSum => {
            let spec = params.expect("checked above");
            let window = Interval::new(0.0, 2.0).expect("ordered");
            let series = overlap_series(&SqrtSum, &spec, k_max, &DomainU::plane(), window, &float)?;
            let holds = spec.sqrt_criterion();
            threshold(name, spec, "√K + √K = [0, 2] iff √c + 1 ≥ 2√(1 − λ)", holds, true, series)
        }
        CaseName::KkDiv => {
            let spec = params.expect("checked above");
            let delta = ratio(1, 100);
            let u = DomainU::from_boxes(vec![
                OpenBox::new(ratio(-2, 1), ratio(2, 1), delta.clone(), ratio(2, 1))?,
                OpenBox::new(ratio(-2, 1), ratio(2, 1), ratio(-2, 1), -delta)?,
            ])?;
            let series = overlap_series(&Div, &spec, k_max, &u, w(0, 10), &exact)?;
            let holds = spec.product_criterion();
            threshold(name, spec, "K/K = [0, ∞) if c ≥ (1 − λ)², seen on [0, 10] with |y| > 1/100", holds, false, series)
        }
    }
}

fn threshold<T: Scalar>(
    name: CaseName,
    spec: OverlapSpec,
    claim: &'static str,
    holds: bool,
    two_sided: bool,
    series: Series<T>,
) -> Result<CaseReport> {
    let verdict = if series.persistent_gap()?.is_some() {
        "gap-persistent"
    } else if series.vanishing()? {
        "gap-vanishing"
    } else {
        "undetermined"
    };
    let agrees = if holds {
        Some(verdict == "gap-vanishing")
    } else if two_sided {
        Some(verdict == "gap-persistent")
    } else {
        None
    };
    finish(name, Some(spec), claim, Some(holds), series, verdict, agrees)
}

fn finish<T: Scalar>(
    case: CaseName,
    params: Option<OverlapSpec>,
    claim: &'static str,
    criterion: Option<bool>,
    series: Series<T>,
    verdict: &'static str,
    agrees: Option<bool>,
) -> Result<CaseReport> {
    let persistent = series.persistent_gap()?;
    Ok(CaseReport {
        case,
        params,
        claim,
        criterion,
        window: (Num::of(series.window.lo()), Num::of(series.window.hi())),
        ranks: series.rows()?,
        persistent_from: persistent.as_ref().map(|(k, _)| *k),
        persistent_gap: persistent.map(|(_, g)| (Num::of(g.lo()), Num::of(g.hi()))),
        verdict,
        agrees,
    })
}
