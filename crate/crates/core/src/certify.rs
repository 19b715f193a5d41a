//! Constructive form of the interior theorem: a witness point, a basic
//! rectangle on which the derivative ratio stays strictly inside the
//! window, and the certified interval `f(I × J)`.
//!
//! On the exact backend every step is rigorous. The ratio range comes from
//! enclosures of both partials over the whole rectangle, so the mean-value
//! argument behind the overlap of child images goes through with the worst
//! partials, not just the ones at the witness. On the floating backend the
//! same procedure runs but comparisons are subject to rounding.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::image::{monotone_signs, ratio_range, rect_image, DomainU, FunctionModel, ImageOptions, Placement, Rect};
use crate::interval_set::{Interval, IntervalSet};
use crate::moran::{BasicInterval, MoranSpec, TheoremBounds, Word};
use crate::rational::Rational;
use crate::scalar::Scalar;

pub const DEFAULT_SEARCH_RANK: usize = 6;
pub const DEFAULT_TIGHTEN_CAP: usize = 40;
pub const DEFAULT_AUDIT_DEPTH: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Satisfied,
    NotFound,
    EmptyWindow,
    InconclusiveBoundary,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Satisfied => "satisfied",
            Status::NotFound => "not_found",
            Status::EmptyWindow => "empty_window",
            Status::InconclusiveBoundary => "inconclusive_boundary",
        }
    }
}

/// The rank-`k*` basic rectangle `I × J` around the witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Neighborhood<T> {
    pub rank: usize,
    pub x: Interval<T>,
    pub y: Interval<T>,
    pub words: (Word, Word),
    /// Enclosure of `|∂y f / ∂x f|` over the rectangle.
    pub ratio_range: Interval<T>,
}

impl<T: Scalar> Neighborhood<T> {
    pub fn rect(&self) -> Rect<T> {
        Rect::new(self.x.clone(), self.y.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditEntry {
    pub rank: usize,
    pub overlap_ok: bool,
    /// Parent rectangles checked at this rank.
    pub rectangles: usize,
}

/// Everything a verifier needs to re-check the claim without searching.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Certificate<T> {
    pub status: Status,
    pub model: String,
    pub bounds: (Rational, Rational),
    pub witness: Option<(T, T)>,
    pub ratio: Option<T>,
    /// Rank of the endpoint grid the witness came from.
    pub search_rank: Option<usize>,
    pub neighborhood: Option<Neighborhood<T>>,
    pub certified: Option<Interval<T>>,
    pub audit: Vec<AuditEntry>,
    pub reason: Option<String>,
}

impl<T: Scalar> Certificate<T> {
    fn new(model: String, bounds: &TheoremBounds) -> Self {
        Certificate {
            status: Status::NotFound,
            model,
            bounds: (bounds.lower.clone(), bounds.upper.clone()),
            witness: None,
            ratio: None,
            search_rank: None,
            neighborhood: None,
            certified: None,
            audit: Vec::new(),
            reason: None,
        }
    }

    fn fail(mut self, status: Status, reason: impl Into<String>) -> Self {
        self.status = status;
        self.reason = Some(reason.into());
        self
    }

    pub fn is_satisfied(&self) -> bool {
        self.status == Status::Satisfied
    }

    fn window(&self) -> (T, T) {
        (T::from_rational(&self.bounds.0), T::from_rational(&self.bounds.1))
    }
}

#[derive(Clone, Debug)]
pub struct CertifyOptions<T> {
    /// Highest rank of the endpoint grid scanned for a witness.
    pub search_rank: usize,
    /// Deepest neighborhood rank tried.
    pub tighten_cap: usize,
    /// Overlap audits run at ranks `k* + 1 ..= k* + audit_depth`.
    pub audit_depth: usize,
    pub image: ImageOptions<T>,
}

impl<T: Scalar> Default for CertifyOptions<T> {
    fn default() -> Self {
        CertifyOptions {
            search_rank: DEFAULT_SEARCH_RANK,
            tighten_cap: DEFAULT_TIGHTEN_CAP,
            audit_depth: DEFAULT_AUDIT_DEPTH,
            image: ImageOptions::default(),
        }
    }
}

fn strictly_inside<T: Scalar>(x: &T, (lo, hi): &(T, T)) -> bool {
    lo < x && x < hi
}

enum Scan<T> {
    Found(T, T, T),
    Boundary,
    Nothing { all_dx_zero: bool },
}

fn scan_row<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    x: &T,
    ys: &[T],
    u: &DomainU<T>,
    window: &(T, T),
) -> Scan<T> {
    let mut boundary = false;
    let mut all_dx_zero = true;
    for y in ys {
        if !u.contains_point(x, y) || !f.admits(&Rect::new(Interval::point(x.clone()), Interval::point(y.clone()))) {
            continue;
        }
        let dx = f.dx(x, y);
        if dx.signum() == 0 {
            continue;
        }
        all_dx_zero = false;
        let ratio = f.dy(x, y).abs() / dx.abs();
        if strictly_inside(&ratio, window) {
            return Scan::Found(x.clone(), y.clone(), ratio);
        }
        if ratio == window.0 || ratio == window.1 {
            boundary = true;
        }
    }
    if boundary {
        Scan::Boundary
    } else {
        Scan::Nothing { all_dx_zero }
    }
}

fn check_pair(spec1: &MoranSpec, spec2: &MoranSpec) -> Result<()> {
    if spec1.same_sequences(spec2) {
        Ok(())
    } else {
        Err(Error::MismatchedSequences)
    }
}

/// Scans endpoint pairs of `E_r × E_r` inside `U` for `r = 0..=search_rank`,
/// lexicographically within each rank, and stops at the first point whose
/// ratio `|∂y f / ∂x f|` lies strictly inside the theorem window.
pub fn find_witness<T: Scalar, F: FunctionModel<T> + ?Sized>(
    spec1: &MoranSpec,
    spec2: &MoranSpec,
    f: &F,
    u: &DomainU<T>,
    search_rank: usize,
) -> Result<Certificate<T>> {
    check_pair(spec1, spec2)?;
    let bounds = spec1.theorem_bounds();
    let cert = Certificate::new(f.name(), &bounds);
    if !bounds.is_nonempty() {
        return Ok(cert.fail(
            Status::EmptyWindow,
            format!("window is empty: lower {} >= upper {}", bounds.lower, bounds.upper),
        ));
    }
    let window = cert.window();
    let mut boundary = false;
    let mut any_usable = false;
    for r in 0..=search_rank {
        let as_t = |pts: Vec<Rational>| pts.iter().map(T::from_rational).collect::<Vec<T>>();
        let xs = as_t(spec1.endpoint_points(r)?);
        let ys = as_t(spec2.endpoint_points(r)?);
        let scans: Vec<Scan<T>> = xs.par_iter().map(|x| scan_row(f, x, &ys, u, &window)).collect();
        for scan in scans {
            match scan {
                Scan::Found(x, y, ratio) => {
                    let mut cert = cert;
                    cert.status = Status::Satisfied;
                    cert.witness = Some((x, y));
                    cert.ratio = Some(ratio);
                    cert.search_rank = Some(r);
                    return Ok(cert);
                }
                Scan::Boundary => {
                    boundary = true;
                    any_usable = true;
                }
                Scan::Nothing { all_dx_zero } => any_usable |= !all_dx_zero,
            }
        }
    }
    Ok(if boundary {
        cert.fail(
            Status::InconclusiveBoundary,
            "the derivative ratio only meets the window at its endpoints",
        )
    } else if !any_usable {
        cert.fail(
            Status::NotFound,
            format!("no candidate point up to rank {search_rank} lies in U with ∂x f ≠ 0"),
        )
    } else {
        cert.fail(
            Status::NotFound,
            format!("no candidate point up to rank {search_rank} has its ratio inside the window"),
        )
    })
}

fn basic_containing(spec: &MoranSpec, x: &Rational, k: usize) -> Vec<BasicInterval> {
    spec.basic_intervals_containing(x, k)
}

/// Deepens the rank until some basic rectangle `I × J` holding the witness
/// lies inside one box of `U` and keeps the ratio enclosure strictly inside
/// the window; the certified interval is then `f(I × J)`.
///
/// The witness is a grid endpoint, so its rational coordinates are
/// recovered from the certificate's search rank.
pub fn tighten_neighborhood<T: Scalar, F: FunctionModel<T> + ?Sized>(
    cert: Certificate<T>,
    spec1: &MoranSpec,
    spec2: &MoranSpec,
    f: &F,
    u: &DomainU<T>,
    opts: &CertifyOptions<T>,
) -> Result<Certificate<T>> {
    check_pair(spec1, spec2)?;
    if cert.status != Status::Satisfied {
        return Ok(cert);
    }
    let (x0, y0) = rational_witness(&cert, spec1, spec2)?;
    let window = cert.window();
    for k in 0..=opts.tighten_cap {
        for bi in basic_containing(spec1, &x0, k) {
            for bj in basic_containing(spec2, &y0, k) {
                let rect = Rect::new(bi.extent.map(T::from_rational), bj.extent.map(T::from_rational));
                if u.classify(&rect) != Placement::Inside || !f.admits(&rect) {
                    continue;
                }
                let Some(range) = ratio_range(f, &rect) else { continue };
                if !(strictly_inside(range.lo(), &window) && strictly_inside(range.hi(), &window)) {
                    continue;
                }
                let img = rect_image(f, &rect, u, &opts.image)?;
                if !img.exact {
                    continue;
                }
                let mut cert = cert;
                cert.neighborhood = Some(Neighborhood {
                    rank: k,
                    x: rect.x,
                    y: rect.y,
                    words: (bi.word, bj.word),
                    ratio_range: range,
                });
                cert.certified = Some(img.range);
                return Ok(cert);
            }
        }
    }
    Ok(cert.fail(
        Status::NotFound,
        format!(
            "the ratio enclosure never fits strictly inside the window on a basic rectangle up to rank {}",
            opts.tighten_cap
        ),
    ))
}

fn rational_witness<T: Scalar>(
    cert: &Certificate<T>,
    spec1: &MoranSpec,
    spec2: &MoranSpec,
) -> Result<(Rational, Rational)> {
    let (x, y) = cert
        .witness
        .as_ref()
        .ok_or_else(|| Error::InvalidParams("certificate has no witness".into()))?;
    let r = cert.search_rank.unwrap_or(0);
    let find = |spec: &MoranSpec, v: &T| -> Result<Rational> {
        spec.endpoint_points(r)?
            .into_iter()
            .find(|p| T::from_rational(p) == *v)
            .ok_or_else(|| Error::InvalidParams(format!("witness coordinate {v} is not a rank-{r} endpoint")))
    };
    Ok((find(spec1, x)?, find(spec2, y)?))
}

/// One consecutive-pair comparison inside [`OverlapReport`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct Link<T> {
    /// `None` for a link between row unions, otherwise the row index.
    pub row: Option<usize>,
    /// Indices of the two compared pieces, in sweep order.
    pub pair: (usize, usize),
    pub left: Interval<T>,
    pub right: Interval<T>,
    pub overlap: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct OverlapReport<T> {
    pub ok: bool,
    /// Signs of `∂x f` and `∂y f` on the parent rectangle.
    pub signs: Option<(i32, i32)>,
    pub links: Vec<Link<T>>,
    /// The union of the child images equals the parent image.
    pub union_matches_parent: bool,
}

/// Checks `f(I, J) = f(Ĩ, J̃)` for the rank-`(k-1)` basic rectangle `I × J`
/// with `rect = I × J`: inside every child row the images `f(I_i × J_j)`
/// chain up in the sweep order of `y`, and the row unions chain up in the
/// sweep order of `x`. Sweep orders follow the signs of the partials, so
/// decreasing directions are handled like the mirrored construction.
pub fn overlap_check<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    spec1: &MoranSpec,
    spec2: &MoranSpec,
    rect: &Rect<Rational>,
    k: usize,
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<OverlapReport<T>> {
    if k == 0 {
        return Err(Error::InvalidParams("overlap_check needs k >= 1".into()));
    }
    let locate = |spec: &MoranSpec, iv: &Interval<Rational>| -> Result<BasicInterval> {
        basic_containing(spec, iv.lo(), k - 1)
            .into_iter()
            .find(|b| b.extent == *iv)
            .ok_or_else(|| Error::InvalidParams(format!("{iv} is not a rank-{} basic interval", k - 1)))
    };
    let bi = locate(spec1, &rect.x)?;
    let bj = locate(spec2, &rect.y)?;
    let parent = Rect::new(rect.x.map(T::from_rational), rect.y.map(T::from_rational));
    if u.classify(&parent) != Placement::Inside {
        return Err(Error::StraddlesDomain { rect: parent.to_string() });
    }
    let xs: Vec<Interval<T>> = spec1.children(&bi).iter().map(|b| b.extent.map(T::from_rational)).collect();
    let ys: Vec<Interval<T>> = spec2.children(&bj).iter().map(|b| b.extent.map(T::from_rational)).collect();
    let signs = monotone_signs(f, &parent);
    let (sx, sy) = signs.unwrap_or((1, 1));
    let order = |len: usize, s: i32| -> Vec<usize> {
        if s >= 0 {
            (0..len).collect()
        } else {
            (0..len).rev().collect()
        }
    };
    let mut links = Vec::new();
    let mut ok = signs.is_some();
    let mut rows: Vec<(usize, Interval<T>)> = Vec::new();
    let mut all = Vec::new();
    for i in order(xs.len(), sx) {
        let mut row_hull: Option<Interval<T>> = None;
        let mut prev: Option<(usize, Interval<T>)> = None;
        for j in order(ys.len(), sy) {
            let img = rect_image(f, &Rect::new(xs[i].clone(), ys[j].clone()), u, opts)?.range;
            all.push(img.clone());
            if let Some((pj, p)) = prev.take() {
                let overlap = p.intersects(&img);
                ok &= overlap;
                links.push(Link {
                    row: Some(i),
                    pair: (pj, j),
                    left: p,
                    right: img.clone(),
                    overlap,
                });
            }
            row_hull = Some(match row_hull {
                Some(h) => h.hull(&img),
                None => img.clone(),
            });
            prev = Some((j, img));
        }
        rows.push((i, row_hull.expect("n_k >= 2")));
    }
    for w in rows.windows(2) {
        let overlap = w[0].1.intersects(&w[1].1);
        ok &= overlap;
        links.push(Link {
            row: None,
            pair: (w[0].0, w[1].0),
            left: w[0].1.clone(),
            right: w[1].1.clone(),
            overlap,
        });
    }
    let parent_img = rect_image(f, &parent, u, opts)?.range;
    let union = IntervalSet::normalize_with_eps(all, T::zero());
    let union_matches_parent = union.parts() == [parent_img];
    Ok(OverlapReport {
        ok,
        signs,
        links,
        union_matches_parent,
    })
}

/// Overlap audit over every rank-`(k-1)` basic rectangle inside the
/// neighborhood, for `k = k* + 1 ..= k* + depth`.
pub fn audit_neighborhood<T: Scalar, F: FunctionModel<T> + ?Sized>(
    f: &F,
    spec1: &MoranSpec,
    spec2: &MoranSpec,
    nb: &Neighborhood<T>,
    depth: usize,
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<Vec<AuditEntry>> {
    let mut rows = vec![spec1.basic_interval(&nb.words.0)?];
    let mut cols = vec![spec2.basic_interval(&nb.words.1)?];
    let mut audit = Vec::with_capacity(depth);
    for k in nb.rank + 1..=nb.rank + depth {
        let mut overlap_ok = true;
        for bi in &rows {
            for bj in &cols {
                let rect = Rect::new(bi.extent.clone(), bj.extent.clone());
                overlap_ok &= overlap_check(f, spec1, spec2, &rect, k, u, opts)?.ok;
            }
        }
        audit.push(AuditEntry {
            rank: k,
            overlap_ok,
            rectangles: rows.len() * cols.len(),
        });
        rows = rows.iter().flat_map(|b| spec1.children(b)).collect();
        cols = cols.iter().flat_map(|b| spec2.children(b)).collect();
    }
    Ok(audit)
}

/// Witness search, neighborhood tightening and overlap audit in one go.
pub fn certify<T: Scalar, F: FunctionModel<T> + ?Sized>(
    spec1: &MoranSpec,
    spec2: &MoranSpec,
    f: &F,
    u: &DomainU<T>,
    opts: &CertifyOptions<T>,
) -> Result<Certificate<T>> {
    let cert = find_witness(spec1, spec2, f, u, opts.search_rank)?;
    let mut cert = tighten_neighborhood(cert, spec1, spec2, f, u, opts)?;
    if let Some(nb) = &cert.neighborhood {
        cert.audit = audit_neighborhood(f, spec1, spec2, nb, opts.audit_depth, u, &opts.image)?;
        if let Some(bad) = cert.audit.iter().find(|a| !a.overlap_ok) {
            let rank = bad.rank;
            cert = cert.fail(Status::NotFound, format!("overlap audit failed at rank {rank}"));
        }
    }
    Ok(cert)
}

/// Failed checks found by [`verify`]; empty means the certificate holds.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Verification {
    pub failures: Vec<String>,
}

impl Verification {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-checks a satisfied certificate from its recorded data alone.
pub fn verify<T: Scalar, F: FunctionModel<T> + ?Sized>(
    cert: &Certificate<T>,
    spec1: &MoranSpec,
    spec2: &MoranSpec,
    f: &F,
    u: &DomainU<T>,
    opts: &ImageOptions<T>,
) -> Result<Verification> {
    let mut failures = Vec::new();
    let mut check = |cond: bool, msg: &str| {
        if !cond {
            failures.push(msg.to_string());
        }
    };
    check(spec1.same_sequences(spec2), "factors use different sequences");
    let bounds = spec1.theorem_bounds();
    check(
        cert.bounds == (bounds.lower.clone(), bounds.upper.clone()),
        "recorded bounds differ from the construction's theorem window",
    );
    check(cert.status == Status::Satisfied, "status is not satisfied");
    let (Some((x, y)), Some(ratio), Some(nb), Some(certified)) =
        (&cert.witness, &cert.ratio, &cert.neighborhood, &cert.certified)
    else {
        failures.push("certificate is missing witness, ratio, neighborhood or certified interval".into());
        return Ok(Verification { failures });
    };
    let window = cert.window();
    let rect = nb.rect();
    check(u.contains_point(x, y), "witness is outside U");
    check(rect.contains_point(x, y), "witness is outside the neighborhood");
    let dx = f.dx(x, y);
    check(
        dx.signum() != 0 && f.dy(x, y).abs() / dx.abs() == *ratio,
        "recorded ratio does not match the model",
    );
    check(strictly_inside(ratio, &window), "ratio at the witness is not inside the window");
    let bi = spec1.basic_interval(&nb.words.0)?;
    let bj = spec2.basic_interval(&nb.words.1)?;
    check(
        bi.rank() == nb.rank && bj.rank() == nb.rank,
        "neighborhood words have the wrong rank",
    );
    check(
        bi.extent.map(T::from_rational) == nb.x && bj.extent.map(T::from_rational) == nb.y,
        "neighborhood is not the basic rectangle of its words",
    );
    check(u.classify(&rect) == Placement::Inside, "neighborhood is not inside one box of U");
    check(f.admits(&rect), "neighborhood leaves the model's domain");
    match ratio_range(f, &rect) {
        Some(range) => check(
            strictly_inside(range.lo(), &window) && strictly_inside(range.hi(), &window),
            "ratio enclosure over the neighborhood leaves the window",
        ),
        None => check(false, "∂x f may vanish on the neighborhood"),
    }
    if f.admits(&rect) && u.classify(&rect) == Placement::Inside {
        let img = rect_image(f, &rect, u, opts)?;
        check(img.exact, "neighborhood image is only an enclosure");
        check(img.range == *certified, "certified interval differs from f(I × J)");
    }
    check(certified.lo() < certified.hi(), "certified interval is degenerate");
    Ok(Verification { failures })
}
