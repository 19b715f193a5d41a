//! Function models: a C¹ function of two variables together with its
//! partial derivatives and rectangle enclosures of all three.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::domain::Rect;
use crate::interval_set::Interval;
use crate::rational::Rational;
use crate::scalar::Scalar;

/// A function `f(x, y)` with partials and range enclosures.
///
/// Each `range_*` must contain the true range of the respective function
/// over the closed rectangle. `admits` reports whether the rectangle lies
/// where the model is defined and continuously differentiable on the
/// interior.
pub trait FunctionModel<T: Scalar>: Send + Sync {
    fn name(&self) -> String;
    fn eval(&self, x: &T, y: &T) -> T;
    fn dx(&self, x: &T, y: &T) -> T;
    fn dy(&self, x: &T, y: &T) -> T;
    fn range_f(&self, r: &Rect<T>) -> Interval<T>;
    fn range_dx(&self, r: &Rect<T>) -> Interval<T>;
    fn range_dy(&self, r: &Rect<T>) -> Interval<T>;

    fn admits(&self, _r: &Rect<T>) -> bool {
        true
    }
}

impl<T: Scalar, M: FunctionModel<T> + ?Sized> FunctionModel<T> for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }
    fn eval(&self, x: &T, y: &T) -> T {
        (**self).eval(x, y)
    }
    fn dx(&self, x: &T, y: &T) -> T {
        (**self).dx(x, y)
    }
    fn dy(&self, x: &T, y: &T) -> T {
        (**self).dy(x, y)
    }
    fn range_f(&self, r: &Rect<T>) -> Interval<T> {
        (**self).range_f(r)
    }
    fn range_dx(&self, r: &Rect<T>) -> Interval<T> {
        (**self).range_dx(r)
    }
    fn range_dy(&self, r: &Rect<T>) -> Interval<T> {
        (**self).range_dy(r)
    }
    fn admits(&self, r: &Rect<T>) -> bool {
        (**self).admits(r)
    }
}

// Interval arithmetic on closed intervals. Exact on the rational backend.

pub(crate) fn iv_add<T: Scalar>(a: &Interval<T>, b: &Interval<T>) -> Interval<T> {
    Interval::spanning(a.lo().clone() + b.lo().clone(), a.hi().clone() + b.hi().clone())
}

pub(crate) fn iv_sub<T: Scalar>(a: &Interval<T>, b: &Interval<T>) -> Interval<T> {
    Interval::spanning(a.lo().clone() - b.hi().clone(), a.hi().clone() - b.lo().clone())
}

pub(crate) fn iv_neg<T: Scalar>(a: &Interval<T>) -> Interval<T> {
    Interval::spanning(-a.hi().clone(), -a.lo().clone())
}

pub(crate) fn iv_mul<T: Scalar>(a: &Interval<T>, b: &Interval<T>) -> Interval<T> {
    let products = [
        a.lo().clone() * b.lo().clone(),
        a.lo().clone() * b.hi().clone(),
        a.hi().clone() * b.lo().clone(),
        a.hi().clone() * b.hi().clone(),
    ];
    hull_of(products)
}

pub(crate) fn iv_scale<T: Scalar>(k: &T, a: &Interval<T>) -> Interval<T> {
    Interval::spanning(k.clone() * a.lo().clone(), k.clone() * a.hi().clone())
}

/// `a / b` for `b` not containing zero.
pub(crate) fn iv_div<T: Scalar>(a: &Interval<T>, b: &Interval<T>) -> Interval<T> {
    debug_assert!(!b.contains(&T::zero()));
    let quotients = [
        a.lo().clone() / b.lo().clone(),
        a.lo().clone() / b.hi().clone(),
        a.hi().clone() / b.lo().clone(),
        a.hi().clone() / b.hi().clone(),
    ];
    hull_of(quotients)
}

/// `a^p`, tight for every integer power.
pub(crate) fn iv_pow<T: Scalar>(a: &Interval<T>, p: u32) -> Interval<T> {
    if p == 0 {
        return Interval::point(T::one());
    }
    let pow = |x: &T| (1..p).fold(x.clone(), |acc, _| acc * x.clone());
    let (lo, hi) = (pow(a.lo()), pow(a.hi()));
    if p.is_multiple_of(2) && a.contains(&T::zero()) {
        Interval::spanning(T::zero(), T::max_of(lo, hi))
    } else {
        Interval::spanning(lo, hi)
    }
}

/// `|a|` as an interval.
pub(crate) fn iv_abs<T: Scalar>(a: &Interval<T>) -> Interval<T> {
    if a.lo().signum() >= 0 {
        a.clone()
    } else if a.hi().signum() <= 0 {
        iv_neg(a)
    } else {
        Interval::spanning(T::zero(), T::max_of(-a.lo().clone(), a.hi().clone()))
    }
}

fn hull_of<T: Scalar, const N: usize>(xs: [T; N]) -> Interval<T> {
    let mut it = xs.into_iter();
    let first = it.next().expect("nonempty");
    let (lo, hi) = it.fold((first.clone(), first), |(lo, hi), x| {
        (T::min_of(lo, x.clone()), T::max_of(hi, x))
    });
    Interval::spanning(lo, hi)
}

/// `x + y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Add;

impl<T: Scalar> FunctionModel<T> for Add {
    fn name(&self) -> String {
        "add".into()
    }
    fn eval(&self, x: &T, y: &T) -> T {
        x.clone() + y.clone()
    }
    fn dx(&self, _x: &T, _y: &T) -> T {
        T::one()
    }
    fn dy(&self, _x: &T, _y: &T) -> T {
        T::one()
    }
    fn range_f(&self, r: &Rect<T>) -> Interval<T> {
        iv_add(&r.x, &r.y)
    }
    fn range_dx(&self, _r: &Rect<T>) -> Interval<T> {
        Interval::point(T::one())
    }
    fn range_dy(&self, _r: &Rect<T>) -> Interval<T> {
        Interval::point(T::one())
    }
}

/// `x - y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sub;

impl<T: Scalar> FunctionModel<T> for Sub {
    fn name(&self) -> String {
        "sub".into()
    }
    fn eval(&self, x: &T, y: &T) -> T {
        x.clone() - y.clone()
    }
    fn dx(&self, _x: &T, _y: &T) -> T {
        T::one()
    }
    fn dy(&self, _x: &T, _y: &T) -> T {
        -T::one()
    }
    fn range_f(&self, r: &Rect<T>) -> Interval<T> {
        iv_sub(&r.x, &r.y)
    }
    fn range_dx(&self, _r: &Rect<T>) -> Interval<T> {
        Interval::point(T::one())
    }
    fn range_dy(&self, _r: &Rect<T>) -> Interval<T> {
        Interval::point(-T::one())
    }
}

/// `x y`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Mul;

impl<T: Scalar> FunctionModel<T> for Mul {
    fn name(&self) -> String {
        "mul".into()
    }
    fn eval(&self, x: &T, y: &T) -> T {
        x.clone() * y.clone()
    }
    fn dx(&self, _x: &T, y: &T) -> T {
        y.clone()
    }
    fn dy(&self, x: &T, _y: &T) -> T {
        x.clone()
    }
    fn range_f(&self, r: &Rect<T>) -> Interval<T> {
        iv_mul(&r.x, &r.y)
    }
    fn range_dx(&self, r: &Rect<T>) -> Interval<T> {
        r.y.clone()
    }
    fn range_dy(&self, r: &Rect<T>) -> Interval<T> {
        r.x.clone()
    }
}

/// `x / y`, defined away from `y = 0`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Div;

impl<T: Scalar> FunctionModel<T> for Div {
    fn name(&self) -> String {
        "div".into()
    }
    fn eval(&self, x: &T, y: &T) -> T {
        x.clone() / y.clone()
    }
    fn dx(&self, _x: &T, y: &T) -> T {
        T::one() / y.clone()
    }
    fn dy(&self, x: &T, y: &T) -> T {
        -(x.clone() / (y.clone() * y.clone()))
    }
    fn range_f(&self, r: &Rect<T>) -> Interval<T> {
        iv_div(&r.x, &r.y)
    }
    fn range_dx(&self, r: &Rect<T>) -> Interval<T> {
        iv_div(&Interval::point(T::one()), &r.y)
    }
    fn range_dy(&self, r: &Rect<T>) -> Interval<T> {
        iv_neg(&iv_div(&r.x, &iv_pow(&r.y, 2)))
    }
    fn admits(&self, r: &Rect<T>) -> bool {
        !r.y.contains(&T::zero())
    }
}

/// `√x + √y` on the closed first quadrant (floating only).
#[derive(Clone, Copy, Debug, Default)]
pub struct SqrtSum;

fn inv_two_sqrt(x: f64) -> f64 {
    if x == 0.0 {
        f64::INFINITY
    } else {
        0.5 / x.sqrt()
    }
}

impl FunctionModel<f64> for SqrtSum {
    fn name(&self) -> String {
        "sqrtsum".into()
    }
    fn eval(&self, x: &f64, y: &f64) -> f64 {
        x.sqrt() + y.sqrt()
    }
    fn dx(&self, x: &f64, _y: &f64) -> f64 {
        inv_two_sqrt(*x)
    }
    fn dy(&self, _x: &f64, y: &f64) -> f64 {
        inv_two_sqrt(*y)
    }
    fn range_f(&self, r: &Rect<f64>) -> Interval<f64> {
        Interval::spanning(
            r.x.lo().sqrt() + r.y.lo().sqrt(),
            r.x.hi().sqrt() + r.y.hi().sqrt(),
        )
    }
    fn range_dx(&self, r: &Rect<f64>) -> Interval<f64> {
        Interval::spanning(inv_two_sqrt(*r.x.hi()), inv_two_sqrt(*r.x.lo()))
    }
    fn range_dy(&self, r: &Rect<f64>) -> Interval<f64> {
        Interval::spanning(inv_two_sqrt(*r.y.hi()), inv_two_sqrt(*r.y.lo()))
    }
    fn admits(&self, r: &Rect<f64>) -> bool {
        *r.x.lo() >= 0.0 && *r.y.lo() >= 0.0
    }
}

/// `Σ c_ij x^i y^j`, with `coeffs[i][j] = c_ij`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Poly<T> {
    #[serde(rename = "poly")]
    coeffs: Vec<Vec<T>>,
}

impl<T: Scalar> Poly<T> {
    pub fn new(coeffs: Vec<Vec<T>>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().all(Vec::is_empty) {
            return Err(Error::InvalidModel("empty coefficient grid".into()));
        }
        Ok(Poly { coeffs })
    }

    pub fn coeffs(&self) -> &[Vec<T>] {
        &self.coeffs
    }

    fn terms(&self) -> impl Iterator<Item = (u32, u32, &T)> + '_ {
        self.coeffs.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .filter(|(_, c)| c.signum() != 0)
                .map(move |(j, c)| (i as u32, j as u32, c))
        })
    }

    fn derivative(&self, wrt_x: bool) -> Poly<T> {
        let rows = self.coeffs.len();
        let cols = self.coeffs.iter().map(Vec::len).max().unwrap_or(0);
        let mut out = vec![vec![T::zero(); cols.max(1)]; rows.max(1)];
        for (i, j, c) in self.terms() {
            if wrt_x && i > 0 {
                out[i as usize - 1][j as usize] = c.clone() * T::from_i64(i as i64);
            } else if !wrt_x && j > 0 {
                out[i as usize][j as usize - 1] = c.clone() * T::from_i64(j as i64);
            }
        }
        Poly { coeffs: out }
    }

    fn eval_at(&self, x: &T, y: &T) -> T {
        let pow = |v: &T, p: u32| (0..p).fold(T::one(), |acc, _| acc * v.clone());
        self.terms().fold(T::zero(), |acc, (i, j, c)| {
            acc + c.clone() * pow(x, i) * pow(y, j)
        })
    }

    fn range_on(&self, r: &Rect<T>) -> Interval<T> {
        self.terms().fold(Interval::point(T::zero()), |acc, (i, j, c)| {
            let term = iv_scale(c, &iv_mul(&iv_pow(&r.x, i), &iv_pow(&r.y, j)));
            iv_add(&acc, &term)
        })
    }
}

impl<T: Scalar> FunctionModel<T> for Poly<T> {
    fn name(&self) -> String {
        format!("poly{}", serde_json::to_string(&self.coeffs).unwrap_or_default())
    }
    fn eval(&self, x: &T, y: &T) -> T {
        self.eval_at(x, y)
    }
    fn dx(&self, x: &T, y: &T) -> T {
        self.derivative(true).eval_at(x, y)
    }
    fn dy(&self, x: &T, y: &T) -> T {
        self.derivative(false).eval_at(x, y)
    }
    fn range_f(&self, r: &Rect<T>) -> Interval<T> {
        self.range_on(r)
    }
    fn range_dx(&self, r: &Rect<T>) -> Interval<T> {
        self.derivative(true).range_on(r)
    }
    fn range_dy(&self, r: &Rect<T>) -> Interval<T> {
        self.derivative(false).range_on(r)
    }
}

/// `s f(φ(x), ψ(y))` where `φ`, `ψ` are the identity or `t -> 1 - t` and
/// `s = ±1`: the reflections that move the signs of the partials into the
/// positive quadrant.
#[derive(Clone, Debug)]
pub struct Conjugate<M> {
    pub inner: M,
    pub mirror_x: bool,
    pub mirror_y: bool,
    pub negate: bool,
}

impl<M> Conjugate<M> {
    pub fn new(inner: M, mirror_x: bool, mirror_y: bool, negate: bool) -> Self {
        Conjugate {
            inner,
            mirror_x,
            mirror_y,
            negate,
        }
    }
}

fn reflect<T: Scalar>(on: bool, v: &T) -> T {
    if on {
        T::one() - v.clone()
    } else {
        v.clone()
    }
}

fn reflect_iv<T: Scalar>(on: bool, v: &Interval<T>) -> Interval<T> {
    if on {
        Interval::spanning(T::one() - v.hi().clone(), T::one() - v.lo().clone())
    } else {
        v.clone()
    }
}

fn flip<T: Scalar>(on: bool, v: T) -> T {
    if on {
        -v
    } else {
        v
    }
}

fn flip_iv<T: Scalar>(on: bool, v: Interval<T>) -> Interval<T> {
    if on {
        iv_neg(&v)
    } else {
        v
    }
}

impl<M> Conjugate<M> {
    fn pull<T: Scalar>(&self, r: &Rect<T>) -> Rect<T> {
        Rect::new(reflect_iv(self.mirror_x, &r.x), reflect_iv(self.mirror_y, &r.y))
    }
}

impl<T: Scalar, M: FunctionModel<T>> FunctionModel<T> for Conjugate<M> {
    fn name(&self) -> String {
        format!(
            "{}{}{}{}",
            if self.negate { "-" } else { "" },
            self.inner.name(),
            if self.mirror_x { "∘x̄" } else { "" },
            if self.mirror_y { "∘ȳ" } else { "" }
        )
    }
    fn eval(&self, x: &T, y: &T) -> T {
        let (u, v) = (reflect(self.mirror_x, x), reflect(self.mirror_y, y));
        flip(self.negate, self.inner.eval(&u, &v))
    }
    fn dx(&self, x: &T, y: &T) -> T {
        let (u, v) = (reflect(self.mirror_x, x), reflect(self.mirror_y, y));
        flip(self.negate != self.mirror_x, self.inner.dx(&u, &v))
    }
    fn dy(&self, x: &T, y: &T) -> T {
        let (u, v) = (reflect(self.mirror_x, x), reflect(self.mirror_y, y));
        flip(self.negate != self.mirror_y, self.inner.dy(&u, &v))
    }
    fn range_f(&self, r: &Rect<T>) -> Interval<T> {
        flip_iv(self.negate, self.inner.range_f(&self.pull(r)))
    }
    fn range_dx(&self, r: &Rect<T>) -> Interval<T> {
        flip_iv(self.negate != self.mirror_x, self.inner.range_dx(&self.pull(r)))
    }
    fn range_dy(&self, r: &Rect<T>) -> Interval<T> {
        flip_iv(self.negate != self.mirror_y, self.inner.range_dy(&self.pull(r)))
    }
    fn admits(&self, r: &Rect<T>) -> bool {
        self.inner.admits(&self.pull(r))
    }
}

/// Names accepted for the built-in models.
pub const BUILTIN_NAMES: [&str; 5] = ["add", "sub", "mul", "div", "sqrtsum"];

/// A built-in or polynomial model chosen at run time.
#[derive(Clone, Debug, PartialEq)]
pub enum ModelSpec {
    Add,
    Sub,
    Mul,
    Div,
    SqrtSum,
    Poly(Vec<Vec<Rational>>),
}

impl ModelSpec {
    /// Parses a built-in name or a `{"poly": [[...], ...]}` grid.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "add" => Ok(ModelSpec::Add),
            "sub" => Ok(ModelSpec::Sub),
            "mul" => Ok(ModelSpec::Mul),
            "div" => Ok(ModelSpec::Div),
            "sqrtsum" => Ok(ModelSpec::SqrtSum),
            other if other.starts_with('{') => {
                let poly: Poly<Rational> = serde_json::from_str(other)
                    .map_err(|e| Error::InvalidModel(format!("bad polynomial JSON: {e}")))?;
                Poly::new(poly.coeffs.clone())?;
                Ok(ModelSpec::Poly(poly.coeffs))
            }
            other => Err(Error::InvalidModel(format!(
                "unknown model `{other}` (expected one of {} or a poly grid)",
                BUILTIN_NAMES.join(", ")
            ))),
        }
    }

    /// Whether the model can run on the exact backend.
    pub fn supports_exact(&self) -> bool {
        !matches!(self, ModelSpec::Div | ModelSpec::SqrtSum)
    }

    pub fn exact(&self) -> Result<Box<dyn FunctionModel<Rational>>> {
        Ok(match self {
            ModelSpec::Add => Box::new(Add),
            ModelSpec::Sub => Box::new(Sub),
            ModelSpec::Mul => Box::new(Mul),
            ModelSpec::Poly(c) => Box::new(Poly::new(c.clone())?),
            ModelSpec::Div | ModelSpec::SqrtSum => {
                return Err(Error::InvalidModel(format!(
                    "`{self}` needs the floating backend"
                )))
            }
        })
    }

    pub fn float(&self) -> Result<Box<dyn FunctionModel<f64>>> {
        Ok(match self {
            ModelSpec::Add => Box::new(Add),
            ModelSpec::Sub => Box::new(Sub),
            ModelSpec::Mul => Box::new(Mul),
            ModelSpec::Div => Box::new(Div),
            ModelSpec::SqrtSum => Box::new(SqrtSum),
            ModelSpec::Poly(c) => Box::new(Poly::new(
                c.iter().map(|row| row.iter().map(Rational::to_f64).collect()).collect(),
            )?),
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Add => f.write_str("add"),
            ModelSpec::Sub => f.write_str("sub"),
            ModelSpec::Mul => f.write_str("mul"),
            ModelSpec::Div => f.write_str("div"),
            ModelSpec::SqrtSum => f.write_str("sqrtsum"),
            ModelSpec::Poly(c) => write!(f, "poly{}", serde_json::to_string(c).unwrap_or_default()),
        }
    }
}
