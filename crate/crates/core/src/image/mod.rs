//! Function models and finite-rank images `f_U(E_k, E_k)`.
//!
//! The image of a continuous `f` over a product of level sets is the union
//! of its ranges over the products of basic intervals. Each range is exact
//! when the partials of `f` keep a sign on the rectangle, which is the
//! normal case for the built-in models. Because level sets shrink with the
//! rank, these images are outer approximations of `f_U(E_1, E_2)` that can
//! only shrink as the rank grows.

mod compute;
mod domain;
mod model;
mod nested;

pub use compute::{
    image_sequence, level_image, monotone_signs, pair_image, ratio_range, ratio_within, rect_image,
    rect_image_unchecked, stabilization_check, ImageOptions, ImageSequence, PairImage, RankImage,
    RectImage, Stabilization, DEFAULT_DEPTH_LIMIT, DEFAULT_IMG_EPS, DEFAULT_PAIR_CAP,
};
pub use nested::nested_pair_image;
pub(crate) use compute::corner_image;
pub(crate) use nested::Cover;
pub use domain::{DomainU, OpenBox, Placement, Rect};
pub use model::{Add, Conjugate, Div, FunctionModel, ModelSpec, Mul, Poly, SqrtSum, Sub, BUILTIN_NAMES};
