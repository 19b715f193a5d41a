//! Closed rectangles and the open domain `U`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_set::Interval;
use crate::scalar::Scalar;

/// The closed rectangle `x × y`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Rect<T> {
    pub x: Interval<T>,
    pub y: Interval<T>,
}

impl<T: Scalar> Rect<T> {
    pub fn new(x: Interval<T>, y: Interval<T>) -> Self {
        Rect { x, y }
    }

    pub fn contains_point(&self, x: &T, y: &T) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }

    pub fn contains_rect(&self, other: &Rect<T>) -> bool {
        self.x.contains_interval(&other.x) && self.y.contains_interval(&other.y)
    }

    /// Splits along the wider side.
    pub fn bisect(&self) -> (Rect<T>, Rect<T>) {
        if self.x.length() >= self.y.length() {
            let m = self.x.midpoint();
            (
                Rect::new(Interval::spanning(self.x.lo().clone(), m.clone()), self.y.clone()),
                Rect::new(Interval::spanning(m, self.x.hi().clone()), self.y.clone()),
            )
        } else {
            let m = self.y.midpoint();
            (
                Rect::new(self.x.clone(), Interval::spanning(self.y.lo().clone(), m.clone())),
                Rect::new(self.x.clone(), Interval::spanning(m, self.y.hi().clone())),
            )
        }
    }

    pub fn to_f64(&self) -> Rect<f64> {
        Rect::new(self.x.to_f64(), self.y.to_f64())
    }
}

impl<T: fmt::Display> fmt::Display for Rect<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} × {}", self.x, self.y)
    }
}

/// Open interval `(lo, hi)`, either end possibly unbounded.
#[derive(Clone, Debug, PartialEq)]
struct OpenRange<T> {
    lo: Option<T>,
    hi: Option<T>,
}

impl<T: Scalar> OpenRange<T> {
    fn contains(&self, v: &T) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo < v) && self.hi.as_ref().is_none_or(|hi| v < hi)
    }

    /// The closed interval lies in the open one.
    fn contains_closed(&self, iv: &Interval<T>) -> bool {
        self.contains(iv.lo()) && self.contains(iv.hi())
    }

    /// The closed interval meets the open one.
    fn meets(&self, iv: &Interval<T>) -> bool {
        self.lo.as_ref().is_none_or(|lo| lo < iv.hi()) && self.hi.as_ref().is_none_or(|hi| iv.lo() < hi)
    }

    /// Closure of the intersection; call only when `meets`.
    fn clip(&self, iv: &Interval<T>) -> Interval<T> {
        let lo = match &self.lo {
            Some(l) => T::max_of(l.clone(), iv.lo().clone()),
            None => iv.lo().clone(),
        };
        let hi = match &self.hi {
            Some(h) => T::min_of(h.clone(), iv.hi().clone()),
            None => iv.hi().clone(),
        };
        Interval::spanning(lo, hi)
    }
}

/// An open box `(x_lo, x_hi) × (y_lo, y_hi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct OpenBox<T> {
    x: OpenRange<T>,
    y: OpenRange<T>,
}

impl<T: Scalar> OpenBox<T> {
    pub fn new(x_lo: T, x_hi: T, y_lo: T, y_hi: T) -> Result<Self> {
        if !(x_lo < x_hi && y_lo < y_hi) {
            return Err(Error::InvalidParams(format!(
                "open box ({x_lo}, {x_hi}) × ({y_lo}, {y_hi}) is empty"
            )));
        }
        Ok(OpenBox {
            x: OpenRange {
                lo: Some(x_lo),
                hi: Some(x_hi),
            },
            y: OpenRange {
                lo: Some(y_lo),
                hi: Some(y_hi),
            },
        })
    }

    fn whole() -> Self {
        OpenBox {
            x: OpenRange { lo: None, hi: None },
            y: OpenRange { lo: None, hi: None },
        }
    }

    pub fn contains_point(&self, x: &T, y: &T) -> bool {
        self.x.contains(x) && self.y.contains(y)
    }

    pub fn contains_rect(&self, r: &Rect<T>) -> bool {
        self.x.contains_closed(&r.x) && self.y.contains_closed(&r.y)
    }

    pub fn meets(&self, r: &Rect<T>) -> bool {
        self.x.meets(&r.x) && self.y.meets(&r.y)
    }

    pub fn clip(&self, r: &Rect<T>) -> Option<Rect<T>> {
        self.meets(r)
            .then(|| Rect::new(self.x.clip(&r.x), self.y.clip(&r.y)))
    }

    pub(crate) fn meets_x(&self, iv: &Interval<T>) -> bool {
        self.x.meets(iv)
    }

    pub(crate) fn y_lo(&self) -> Option<&T> {
        self.y.lo.as_ref()
    }

    pub(crate) fn y_hi(&self) -> Option<&T> {
        self.y.hi.as_ref()
    }

    pub(crate) fn clip_x(&self, iv: &Interval<T>) -> Interval<T> {
        self.x.clip(iv)
    }

    pub(crate) fn clip_y(&self, iv: &Interval<T>) -> Interval<T> {
        self.y.clip(iv)
    }

    fn bounds(&self) -> [Option<&T>; 4] {
        [self.x.lo.as_ref(), self.x.hi.as_ref(), self.y.lo.as_ref(), self.y.hi.as_ref()]
    }
}

/// Where a closed rectangle sits relative to `U`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Placement {
    /// Inside a single box of `U`.
    Inside,
    Outside,
    Straddling,
}

/// The open set `U`: a finite union of open boxes, or the whole plane.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainU<T> {
    boxes: Vec<OpenBox<T>>,
}

impl<T: Scalar> DomainU<T> {
    pub fn plane() -> Self {
        DomainU {
            boxes: vec![OpenBox::whole()],
        }
    }

    pub fn from_boxes(boxes: Vec<OpenBox<T>>) -> Result<Self> {
        if boxes.is_empty() {
            return Err(Error::InvalidParams("U needs at least one box".into()));
        }
        Ok(DomainU { boxes })
    }

    /// Single box `(x_lo, x_hi) × (y_lo, y_hi)`.
    pub fn single(x_lo: T, x_hi: T, y_lo: T, y_hi: T) -> Result<Self> {
        Self::from_boxes(vec![OpenBox::new(x_lo, x_hi, y_lo, y_hi)?])
    }

    pub fn boxes(&self) -> &[OpenBox<T>] {
        &self.boxes
    }

    pub fn is_plane(&self) -> bool {
        self.boxes.len() == 1 && self.boxes[0].x.lo.is_none() && self.boxes[0].x.hi.is_none()
            && self.boxes[0].y.lo.is_none() && self.boxes[0].y.hi.is_none()
    }

    pub fn contains_point(&self, x: &T, y: &T) -> bool {
        self.boxes.iter().any(|b| b.contains_point(x, y))
    }

    pub fn classify(&self, r: &Rect<T>) -> Placement {
        if self.boxes.iter().any(|b| b.contains_rect(r)) {
            Placement::Inside
        } else if self.boxes.iter().any(|b| b.meets(r)) {
            Placement::Straddling
        } else {
            Placement::Outside
        }
    }

    /// Closures of `r ∩ B` over the boxes `B` that meet `r`.
    pub fn clip(&self, r: &Rect<T>) -> Vec<Rect<T>> {
        self.boxes.iter().filter_map(|b| b.clip(r)).collect()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> DomainU<U> {
        let m = |r: &OpenRange<T>| OpenRange {
            lo: r.lo.as_ref().map(&f),
            hi: r.hi.as_ref().map(&f),
        };
        DomainU {
            boxes: self
                .boxes
                .iter()
                .map(|b| OpenBox { x: m(&b.x), y: m(&b.y) })
                .collect(),
        }
    }

    /// `"xlo,xhi,ylo,yhi"` strings, one per box; `inf` allowed.
    pub fn to_strings(&self) -> Vec<String> {
        self.boxes
            .iter()
            .map(|b| {
                let [a, c, d, e] = b.bounds();
                let s = |v: Option<&T>, neg: bool| match v {
                    Some(v) => v.to_string(),
                    None if neg => "-inf".to_string(),
                    None => "inf".to_string(),
                };
                format!("{},{},{},{}", s(a, true), s(c, false), s(d, true), s(e, false))
            })
            .collect()
    }
}

/// Parses `"xlo,xhi,ylo,yhi"`; `-inf` / `inf` leave a side unbounded.
impl<T: Scalar + FromStr> FromStr for OpenBox<T>
where
    T::Err: fmt::Display,
{
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return Err(Error::InvalidParams(format!(
                "box `{s}` must have four comma-separated bounds"
            )));
        }
        let parse = |v: &str| -> Result<Option<T>> {
            match v {
                "-inf" | "inf" | "+inf" => Ok(None),
                v => v
                    .parse::<T>()
                    .map(Some)
                    .map_err(|e| Error::InvalidParams(format!("bad bound `{v}`: {e}"))),
            }
        };
        let x = OpenRange {
            lo: parse(fields[0])?,
            hi: parse(fields[1])?,
        };
        let y = OpenRange {
            lo: parse(fields[2])?,
            hi: parse(fields[3])?,
        };
        for r in [&x, &y] {
            if let (Some(lo), Some(hi)) = (&r.lo, &r.hi) {
                if lo >= hi {
                    return Err(Error::InvalidParams(format!("box `{s}` is empty")));
                }
            }
        }
        Ok(OpenBox { x, y })
    }
}
