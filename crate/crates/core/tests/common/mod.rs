//! Independent reference implementations shared by the test targets.

#![allow(dead_code)]

use moran_core::{ratio, Interval, Layout, MoranSpec, ParamSequence, Rational};

/// The specs the oracle comparisons run over.
pub fn preset_specs() -> Vec<(&'static str, MoranSpec)> {
    let homogeneous = |c: Rational, n: u32, layout| MoranSpec::homogeneous(c, n, layout).unwrap();
    vec![
        ("middle-third", MoranSpec::middle_third()),
        ("c=1/5", homogeneous(ratio(1, 5), 2, Layout::Uniform)),
        ("c=2/5", homogeneous(ratio(2, 5), 2, Layout::Uniform)),
        ("n=3 left", homogeneous(ratio(1, 4), 3, Layout::LeftPacked)),
        (
            "mixed random",
            MoranSpec::new(
                ParamSequence::new(vec![ratio(1, 4)], vec![ratio(2, 7), ratio(1, 3)]).unwrap(),
                ParamSequence::new(vec![3], vec![3, 2]).unwrap(),
                Layout::Random { seed: 7 },
            )
            .unwrap(),
        ),
    ]
}

/// Closed box `[x0, x1] × [y0, y1]` standing in for the open box of the
/// same bounds.
pub type BoxBounds<T> = (T, T, T, T);

fn clip<T: PartialOrd + Clone>(a: &(T, T), b: &(T, T), bx: &Option<BoxBounds<T>>) -> Option<((T, T), (T, T))> {
    let Some((x0, x1, y0, y1)) = bx else {
        return Some((a.clone(), b.clone()));
    };
    let max = |p: &T, q: &T| if p > q { p.clone() } else { q.clone() };
    let min = |p: &T, q: &T| if p < q { p.clone() } else { q.clone() };
    let (xl, xh) = (max(&a.0, x0), min(&a.1, x1));
    let (yl, yh) = (max(&b.0, y0), min(&b.1, y1));
    (xl < xh && yl < yh).then_some(((xl, xh), (yl, yh)))
}

/// Sort and merge closed intervals that overlap or come within `eps`.
pub fn merge<T: PartialOrd + Clone + std::ops::Add<Output = T>>(mut parts: Vec<(T, T)>, eps: T) -> Vec<(T, T)> {
    parts.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    let mut out: Vec<(T, T)> = Vec::new();
    for (lo, hi) in parts {
        match out.last_mut() {
            Some(last) if lo <= last.1.clone() + eps.clone() => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Image over every pair by evaluating the four corners; exact for
/// functions monotone in each variable on the rectangles involved.
pub fn brute_exact(
    f: fn(&Rational, &Rational) -> Rational,
    xs: &[Interval<Rational>],
    ys: &[Interval<Rational>],
    bx: &Option<BoxBounds<Rational>>,
) -> Vec<(Rational, Rational)> {
    let mut parts = Vec::new();
    for a in xs {
        for b in ys {
            let Some((x, y)) = clip(&(a.lo().clone(), a.hi().clone()), &(b.lo().clone(), b.hi().clone()), bx) else {
                continue;
            };
            let vals = [f(&x.0, &y.0), f(&x.0, &y.1), f(&x.1, &y.0), f(&x.1, &y.1)];
            let lo = vals.iter().min().unwrap().clone();
            let hi = vals.iter().max().unwrap().clone();
            parts.push((lo, hi));
        }
    }
    merge(parts, Rational::zero())
}

/// Image over every pair by sampling a 50 × 50 grid that includes the
/// corners.
pub fn brute_sampled(
    f: fn(f64, f64) -> f64,
    xs: &[Interval<Rational>],
    ys: &[Interval<Rational>],
    bx: &Option<BoxBounds<f64>>,
) -> Vec<(f64, f64)> {
    const N: usize = 50;
    let mut parts = Vec::new();
    for a in xs {
        for b in ys {
            let Some((x, y)) = clip(&(a.lo().to_f64(), a.hi().to_f64()), &(b.lo().to_f64(), b.hi().to_f64()), bx) else {
                continue;
            };
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for i in 0..N {
                let px = x.0 + (x.1 - x.0) * i as f64 / (N - 1) as f64;
                for j in 0..N {
                    let py = y.0 + (y.1 - y.0) * j as f64 / (N - 1) as f64;
                    let v = f(px, py);
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            parts.push((lo, hi));
        }
    }
    merge(parts, 1e-9)
}

pub fn exact_fn(name: &str) -> fn(&Rational, &Rational) -> Rational {
    match name {
        "add" => |x, y| x.clone() + y.clone(),
        "sub" => |x, y| x.clone() - y.clone(),
        "mul" => |x, y| x.clone() * y.clone(),
        "div" => |x, y| x.clone() / y.clone(),
        other => panic!("no exact oracle for {other}"),
    }
}

pub fn float_fn(name: &str) -> fn(f64, f64) -> f64 {
    match name {
        "add" => |x, y| x + y,
        "sub" => |x, y| x - y,
        "mul" => |x, y| x * y,
        "div" => |x, y| x / y,
        "sqrtsum" => |x, y| x.sqrt() + y.sqrt(),
        other => panic!("no oracle for {other}"),
    }
}

/// Same components, endpoints within `tol`.
pub fn close(a: &[(f64, f64)], b: &[(f64, f64)], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(p, q)| (p.0 - q.0).abs() <= tol && (p.1 - q.1).abs() <= tol)
}
