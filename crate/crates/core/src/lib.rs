//! Moran sets, exact images of two-variable functions over them, and
//! certificates that such an image contains an interval.
//!
//! The crate is organized bottom-up:
//!
//! - [`rational`] and [`scalar`]: the exact and floating number backends.
//! - [`interval_set`]: canonical unions of closed intervals.
//! - [`moran`]: Moran constructions, basic intervals and level sets.
//! - [`image`]: function models and finite-rank outer images `f(E_k, E_k)`.
//! - [`certify`]: the derivative-ratio certificate for interval containment.
//! - [`cases`]: classical Cantor-arithmetic case studies.

pub mod cases;
pub mod certify;
pub mod error;
pub mod image;
pub mod interval_set;
pub mod moran;
pub mod rational;
pub mod scalar;

pub use certify::{certify, Certificate, CertifyOptions, Status};
pub use error::{Error, Result};
pub use interval_set::{Interval, IntervalSet};
pub use moran::{BasicInterval, Layout, Level, MoranSpec, ParamSequence, TheoremBounds, Word};
pub use rational::{ratio, Rational};
pub use scalar::Scalar;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/interval-sets.md")]
    mod interval_sets {}
    #[doc = include_str!("../../../book/src/moran-sets.md")]
    mod moran_sets {}
    #[doc = include_str!("../../../book/src/images.md")]
    mod images {}
    #[doc = include_str!("../../../book/src/certification.md")]
    mod certification {}
    #[doc = include_str!("../../../book/src/case-studies.md")]
    mod case_studies {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
