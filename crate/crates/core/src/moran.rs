//! Moran structures with eventually periodic parameters.
//!
//! A [`MoranSpec`] fixes the contraction ratios `c_k`, the child counts
//! `n_k` and a gap-layout policy. Every rank-`(k-1)` basic interval `T`
//! holds `n_k` children of length `c_k |T|`, the first flush with the left
//! end of `T` and the last flush with the right end; the layout decides
//! where the slack `|T| (1 - n_k c_k)` goes between them.

use std::fmt;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval_set::{Interval, IntervalSet};
use crate::rational::Rational;

/// Default cap on the number of basic intervals a level may hold.
pub const DEFAULT_LEVEL_CAP: u64 = 10_000_000;

/// `head` followed by `period` repeated forever; indexed from 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamSequence<T> {
    #[serde(default = "Vec::new")]
    head: Vec<T>,
    period: Vec<T>,
}

impl<T: Clone> ParamSequence<T> {
    pub fn new(head: Vec<T>, period: Vec<T>) -> Result<Self> {
        if period.is_empty() {
            return Err(Error::InvalidSpec("sequence period must be nonempty".into()));
        }
        Ok(ParamSequence { head, period })
    }

    pub fn constant(v: T) -> Self {
        ParamSequence {
            head: Vec::new(),
            period: vec![v],
        }
    }

    pub fn head(&self) -> &[T] {
        &self.head
    }

    pub fn period(&self) -> &[T] {
        &self.period
    }

    /// The `k`-th term, `k >= 1`.
    pub fn get(&self, k: usize) -> &T {
        assert!(k >= 1, "sequences are indexed from 1");
        if k <= self.head.len() {
            &self.head[k - 1]
        } else {
            &self.period[(k - 1 - self.head.len()) % self.period.len()]
        }
    }
}

/// Where the slack between children goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    /// Equal gaps.
    Uniform,
    /// Children `1..n-1` contiguous from the left end, child `n` at the right end.
    LeftPacked,
    /// Child 1 at the left end, children `2..n` contiguous up to the right end.
    RightPacked,
    /// Gaps proportional to integer weights drawn per parent from a seeded RNG.
    Random { seed: u64 },
}

impl Layout {
    pub fn name(&self) -> &'static str {
        match self {
            Layout::Uniform => "uniform",
            Layout::LeftPacked => "left",
            Layout::RightPacked => "right",
            Layout::Random { .. } => "random",
        }
    }

    /// Layout of the reflected construction `x -> 1 - x`, when it is again
    /// one of the fixed policies.
    pub fn mirrored(&self) -> Option<Layout> {
        match self {
            Layout::Uniform => Some(Layout::Uniform),
            Layout::LeftPacked => Some(Layout::RightPacked),
            Layout::RightPacked => Some(Layout::LeftPacked),
            Layout::Random { .. } => None,
        }
    }
}

/// A word `(σ_1, …, σ_k)` with `1 <= σ_j <= n_j`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn root() -> Self {
        Word(Vec::new())
    }

    pub fn letters(&self) -> &[u32] {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn child(&self, letter: u32) -> Word {
        let mut letters = Vec::with_capacity(self.0.len() + 1);
        letters.extend_from_slice(&self.0);
        letters.push(letter);
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(".")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// The basic interval `T_σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BasicInterval {
    pub word: Word,
    pub extent: Interval<Rational>,
}

impl BasicInterval {
    pub fn root() -> Self {
        BasicInterval {
            word: Word::root(),
            extent: Interval::unit(),
        }
    }

    pub fn rank(&self) -> usize {
        self.word.rank()
    }
}

/// All basic intervals of one rank, plus their union.
#[derive(Clone, Debug)]
pub struct Level {
    pub rank: usize,
    pub basic: Vec<BasicInterval>,
    pub set: IntervalSet<Rational>,
}

impl Level {
    fn from_basic(rank: usize, basic: Vec<BasicInterval>) -> Self {
        let set = IntervalSet::normalize(basic.iter().map(|b| b.extent.clone()).collect());
        Level { rank, basic, set }
    }

    pub fn extents(&self) -> Vec<Interval<Rational>> {
        self.basic.iter().map(|b| b.extent.clone()).collect()
    }
}

/// The open window `(sup_k {1 - c_k n_k}, inf_k {c_k / (1 - n_k c_k)})`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremBounds {
    pub lower: Rational,
    pub upper: Rational,
}

impl TheoremBounds {
    pub fn is_nonempty(&self) -> bool {
        self.lower < self.upper
    }

    pub fn contains_strictly(&self, x: &Rational) -> bool {
        self.lower < *x && *x < self.upper
    }

    pub fn on_boundary(&self, x: &Rational) -> bool {
        *x == self.lower || *x == self.upper
    }
}

/// Parameters of one Moran construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MoranSpec {
    c: ParamSequence<Rational>,
    n: ParamSequence<u32>,
    layout: Layout,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn child_key(parent: u64, letter: u32) -> u64 {
    splitmix(parent ^ (letter as u64).wrapping_mul(0x2545_f491_4f6c_dd1d))
}

fn word_key(seed: u64, word: &Word) -> u64 {
    word.letters()
        .iter()
        .fold(splitmix(seed), |key, &l| child_key(key, l))
}

impl MoranSpec {
    pub fn new(c: ParamSequence<Rational>, n: ParamSequence<u32>, layout: Layout) -> Result<Self> {
        let spec = MoranSpec { c, n, layout };
        spec.validate()?;
        Ok(spec)
    }

    /// Constant sequences `c_k = c`, `n_k = n`.
    pub fn homogeneous(c: Rational, n: u32, layout: Layout) -> Result<Self> {
        Self::new(ParamSequence::constant(c), ParamSequence::constant(n), layout)
    }

    /// The middle-third Cantor construction.
    pub fn middle_third() -> Self {
        Self::homogeneous(Rational::new(1, 3), 2, Layout::Uniform).expect("valid")
    }

    pub fn c(&self) -> &ParamSequence<Rational> {
        &self.c
    }

    pub fn n(&self) -> &ParamSequence<u32> {
        &self.n
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn with_layout(&self, layout: Layout) -> Self {
        MoranSpec {
            layout,
            ..self.clone()
        }
    }

    pub fn c_at(&self, k: usize) -> &Rational {
        self.c.get(k)
    }

    pub fn n_at(&self, k: usize) -> u32 {
        *self.n.get(k)
    }

    /// Number of leading indices after which the joint sequence `(c_k, n_k)`
    /// has started repeating, plus one full joint period.
    pub fn horizon(&self) -> usize {
        let head = self.c.head.len().max(self.n.head.len());
        head + self.c.period.len().lcm(&self.n.period.len())
    }

    fn validate(&self) -> Result<()> {
        let one = Rational::one();
        for k in 1..=self.horizon() {
            let (c, n) = (self.c_at(k), self.n_at(k));
            if *c <= Rational::zero() || *c >= one {
                return Err(Error::InvalidSpec(format!("c_{k} = {c} is not in (0, 1)")));
            }
            if n < 2 {
                return Err(Error::InvalidSpec(format!("n_{k} = {n} is below 2")));
            }
            if c * &Rational::from_integer(n as i64) >= one {
                return Err(Error::InvalidSpec(format!(
                    "c_{k} n_{k} = {c} * {n} is not below 1"
                )));
            }
        }
        Ok(())
    }

    /// Whether both specs define the same `c_k` and `n_k` for every `k`.
    pub fn same_sequences(&self, other: &MoranSpec) -> bool {
        let horizon = self.horizon().max(other.horizon());
        let h = horizon * 2;
        (1..=h).all(|k| self.c_at(k) == other.c_at(k) && self.n_at(k) == other.n_at(k))
    }

    /// Reflection `x -> 1 - x` of the construction, if its layout has a
    /// fixed-policy mirror image.
    pub fn mirrored(&self) -> Option<MoranSpec> {
        Some(self.with_layout(self.layout.mirrored()?))
    }

    /// `c_1 c_2 ⋯ c_k`.
    pub fn basic_length(&self, k: usize) -> Rational {
        (1..=k).fold(Rational::one(), |acc, i| acc * self.c_at(i).clone())
    }

    /// `n_1 n_2 ⋯ n_k`, saturating.
    pub fn count_at(&self, k: usize) -> u128 {
        (1..=k).fold(1u128, |acc, i| acc.saturating_mul(self.n_at(i) as u128))
    }

    fn check_cap(&self, k: usize, cap: u64) -> Result<()> {
        let needed = self.count_at(k);
        if needed > cap as u128 {
            return Err(Error::CapExceeded {
                what: "basic intervals",
                needed,
                cap,
            });
        }
        Ok(())
    }

    /// Gap after each of the first `n - 1` children.
    fn gaps(&self, k: usize, parent_len: &Rational, key: u64) -> Vec<Rational> {
        let n = self.n_at(k) as usize;
        let c = self.c_at(k);
        let slack = parent_len * &(Rational::one() - c * &Rational::from_integer(n as i64));
        let zero = Rational::zero();
        match self.layout {
            Layout::Uniform => vec![&slack / &Rational::from_integer(n as i64 - 1); n - 1],
            Layout::LeftPacked => {
                let mut g = vec![zero; n - 1];
                g[n - 2] = slack;
                g
            }
            Layout::RightPacked => {
                let mut g = vec![zero; n - 1];
                g[0] = slack;
                g
            }
            Layout::Random { .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(key);
                let weights: Vec<i64> = (0..n - 1).map(|_| rng.gen_range(1..=16)).collect();
                let total = Rational::from_integer(weights.iter().sum());
                weights
                    .into_iter()
                    .map(|w| &(&slack * &Rational::from_integer(w)) / &total)
                    .collect()
            }
        }
    }

    fn child_extents(&self, k: usize, parent: &Interval<Rational>, key: u64) -> Vec<Interval<Rational>> {
        let parent_len = parent.length();
        let child_len = &parent_len * self.c_at(k);
        let gaps = self.gaps(k, &parent_len, key);
        let n = self.n_at(k) as usize;
        let mut out = Vec::with_capacity(n);
        let mut lo = parent.lo().clone();
        for i in 0..n {
            let hi = if i + 1 == n {
                // Pinned to the parent's right end.
                parent.hi().clone()
            } else {
                &lo + &child_len
            };
            out.push(Interval::new(lo.clone(), hi.clone()).expect("ordered"));
            if i + 1 < n {
                lo = &hi + &gaps[i];
            }
        }
        out
    }

    fn key_of(&self, word: &Word) -> u64 {
        match self.layout {
            Layout::Random { seed } => word_key(seed, word),
            _ => 0,
        }
    }

    /// The `n_k` children of a rank-`(k-1)` basic interval, left to right.
    pub fn children(&self, parent: &BasicInterval) -> Vec<BasicInterval> {
        let k = parent.rank() + 1;
        self.child_extents(k, &parent.extent, self.key_of(&parent.word))
            .into_iter()
            .enumerate()
            .map(|(i, extent)| BasicInterval {
                word: parent.word.child(i as u32 + 1),
                extent,
            })
            .collect()
    }

    fn expand(&self, mut level: Vec<BasicInterval>, from: usize, to: usize) -> Vec<BasicInterval> {
        for _ in from..to {
            level = level.iter().flat_map(|b| self.children(b)).collect();
        }
        level
    }

    /// All rank-`k` basic intervals and their union `E_k`.
    pub fn level_set(&self, k: usize) -> Result<Level> {
        self.level_set_capped(k, DEFAULT_LEVEL_CAP)
    }

    pub fn level_set_capped(&self, k: usize, cap: u64) -> Result<Level> {
        self.check_cap(k, cap)?;
        Ok(Level::from_basic(k, self.expand(vec![BasicInterval::root()], 0, k)))
    }

    /// Extents of the rank-`k` basic intervals without materializing words.
    pub fn level_extents(&self, k: usize, cap: u64) -> Result<Vec<Interval<Rational>>> {
        self.check_cap(k, cap)?;
        let root_key = match self.layout {
            Layout::Random { seed } => splitmix(seed),
            _ => 0,
        };
        let mut level = vec![(root_key, Interval::unit())];
        for rank in 1..=k {
            level = level
                .iter()
                .flat_map(|(key, extent)| {
                    self.child_extents(rank, extent, *key)
                        .into_iter()
                        .enumerate()
                        .map(move |(i, e)| (child_key(*key, i as u32 + 1), e))
                })
                .collect();
        }
        Ok(level.into_iter().map(|(_, e)| e).collect())
    }

    /// The basic interval with the given word.
    pub fn basic_interval(&self, word: &Word) -> Result<BasicInterval> {
        let mut current = BasicInterval::root();
        for (j, &letter) in word.letters().iter().enumerate() {
            let n = self.n_at(j + 1);
            if letter < 1 || letter > n {
                return Err(Error::InvalidParams(format!(
                    "letter {letter} at position {} exceeds n = {n}",
                    j + 1
                )));
            }
            current = self.children(&current).swap_remove(letter as usize - 1);
        }
        Ok(current)
    }

    /// The rank-`k` basic intervals containing `x`, left to right (two when
    /// `x` is a shared endpoint of touching siblings).
    pub fn basic_intervals_containing(&self, x: &Rational, k: usize) -> Vec<BasicInterval> {
        let mut frontier = vec![BasicInterval::root()];
        if !frontier[0].extent.contains(x) {
            return Vec::new();
        }
        for _ in 0..k {
            frontier = frontier
                .iter()
                .flat_map(|b| self.children(b))
                .filter(|b| b.extent.contains(x))
                .collect();
        }
        frontier
    }

    /// Sorted, deduplicated endpoints of all rank-`k` basic intervals.
    pub fn endpoint_points(&self, k: usize) -> Result<Vec<Rational>> {
        self.endpoint_points_capped(k, DEFAULT_LEVEL_CAP)
    }

    pub fn endpoint_points_capped(&self, k: usize, cap: u64) -> Result<Vec<Rational>> {
        let extents = self.level_extents(k, cap)?;
        let mut pts: Vec<Rational> = extents
            .into_iter()
            .flat_map(|e| {
                let (lo, hi) = e.into_bounds();
                [lo, hi]
            })
            .collect();
        pts.sort();
        pts.dedup();
        Ok(pts)
    }

    /// Exact `sup_k {1 - c_k n_k}` and `inf_k {c_k / (1 - n_k c_k)}`.
    pub fn theorem_bounds(&self) -> TheoremBounds {
        let one = Rational::one();
        let mut lower: Option<Rational> = None;
        let mut upper: Option<Rational> = None;
        for k in 1..=self.horizon() {
            let c = self.c_at(k);
            let cn = c * &Rational::from_integer(self.n_at(k) as i64);
            let lo = &one - &cn;
            let up = c / &lo;
            lower = Some(match lower {
                Some(l) => l.max(lo),
                None => lo,
            });
            upper = Some(match upper {
                Some(u) => u.min(up),
                None => up,
            });
        }
        TheoremBounds {
            lower: lower.expect("horizon >= 1"),
            upper: upper.expect("horizon >= 1"),
        }
    }

    /// `G_n` generator for the basic intervals inside `window`, which must
    /// run from the left end of one rank-`k0` basic interval to the right
    /// end of another.
    pub fn restrict(&self, k0: usize, window: &Interval<Rational>) -> Result<Restriction> {
        let level = self.level_set(k0)?;
        let starts = level.basic.iter().any(|b| b.extent.lo() == window.lo());
        let ends = level.basic.iter().any(|b| b.extent.hi() == window.hi());
        if !starts || !ends {
            return Err(Error::InvalidWindow(format!(
                "{window} does not run from a left to a right endpoint of rank-{k0} basic intervals"
            )));
        }
        let roots: Vec<BasicInterval> = level
            .basic
            .into_iter()
            .filter(|b| window.contains_interval(&b.extent))
            .collect();
        if roots.is_empty() {
            return Err(Error::InvalidWindow(format!(
                "{window} contains no rank-{k0} basic interval"
            )));
        }
        Ok(Restriction {
            spec: self.clone(),
            k0,
            window: window.clone(),
            roots,
        })
    }
}

/// Basic intervals of a Moran construction that lie inside a window.
#[derive(Clone, Debug)]
pub struct Restriction {
    spec: MoranSpec,
    k0: usize,
    window: Interval<Rational>,
    roots: Vec<BasicInterval>,
}

impl Restriction {
    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn window(&self) -> &Interval<Rational> {
        &self.window
    }

    pub fn spec(&self) -> &MoranSpec {
        &self.spec
    }

    /// `G_n` for `n >= k0`.
    pub fn level(&self, n: usize) -> Result<Level> {
        self.level_capped(n, DEFAULT_LEVEL_CAP)
    }

    pub fn level_capped(&self, n: usize, cap: u64) -> Result<Level> {
        if n < self.k0 {
            return Err(Error::InvalidParams(format!(
                "rank {n} is below the window rank {}",
                self.k0
            )));
        }
        let per_root = (self.k0 + 1..=n)
            .fold(1u128, |acc, i| acc.saturating_mul(self.spec.n_at(i) as u128));
        let needed = per_root.saturating_mul(self.roots.len() as u128);
        if needed > cap as u128 {
            return Err(Error::CapExceeded {
                what: "basic intervals",
                needed,
                cap,
            });
        }
        Ok(Level::from_basic(
            n,
            self.spec.expand(self.roots.clone(), self.k0, n),
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct SpecJson {
    c: ParamSequence<Rational>,
    n: ParamSequence<u32>,
    layout: String,
    #[serde(default)]
    seed: u64,
}

impl Serialize for MoranSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let seed = match self.layout {
            Layout::Random { seed } => seed,
            _ => 0,
        };
        SpecJson {
            c: self.c.clone(),
            n: self.n.clone(),
            layout: self.layout.name().to_string(),
            seed,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MoranSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SpecJson::deserialize(d)?;
        let layout = match raw.layout.as_str() {
            "uniform" => Layout::Uniform,
            "left" => Layout::LeftPacked,
            "right" => Layout::RightPacked,
            "random" => Layout::Random { seed: raw.seed },
            other => {
                return Err(D::Error::custom(format!(
                    "unknown layout `{other}` (expected uniform, left, right or random)"
                )))
            }
        };
        if raw.c.period.is_empty() || raw.n.period.is_empty() {
            return Err(D::Error::custom("sequence period must be nonempty"));
        }
        MoranSpec::new(raw.c, raw.n, layout).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn iv(a: Rational, b: Rational) -> Interval<Rational> {
        Interval::new(a, b).unwrap()
    }

    fn extents(list: &[BasicInterval]) -> Vec<Interval<Rational>> {
        list.iter().map(|b| b.extent.clone()).collect()
    }

    #[test]
    fn children_examples() {
        for layout in [Layout::Uniform, Layout::LeftPacked, Layout::RightPacked, Layout::Random { seed: 7 }] {
            let spec = MoranSpec::homogeneous(ratio(1, 3), 2, layout).unwrap();
            let kids = spec.children(&BasicInterval::root());
            assert_eq!(
                extents(&kids),
                vec![iv(ratio(0, 1), ratio(1, 3)), iv(ratio(2, 3), ratio(1, 1))]
            );
        }

        let uniform = MoranSpec::homogeneous(ratio(1, 5), 3, Layout::Uniform).unwrap();
        assert_eq!(
            extents(&uniform.children(&BasicInterval::root())),
            vec![
                iv(ratio(0, 1), ratio(1, 5)),
                iv(ratio(2, 5), ratio(3, 5)),
                iv(ratio(4, 5), ratio(1, 1))
            ]
        );

        let left = uniform.with_layout(Layout::LeftPacked);
        assert_eq!(
            extents(&left.children(&BasicInterval::root())),
            vec![
                iv(ratio(0, 1), ratio(1, 5)),
                iv(ratio(1, 5), ratio(2, 5)),
                iv(ratio(4, 5), ratio(1, 1))
            ]
        );

        let right = uniform.with_layout(Layout::RightPacked);
        assert_eq!(
            extents(&right.children(&BasicInterval::root())),
            vec![
                iv(ratio(0, 1), ratio(1, 5)),
                iv(ratio(3, 5), ratio(4, 5)),
                iv(ratio(4, 5), ratio(1, 1))
            ]
        );
    }

    #[test]
    fn child_words_extend_parent() {
        let spec = MoranSpec::homogeneous(ratio(1, 5), 3, Layout::Uniform).unwrap();
        let kids = spec.children(&BasicInterval::root());
        let grandkids = spec.children(&kids[1]);
        let words: Vec<Vec<u32>> = grandkids.iter().map(|b| b.word.letters().to_vec()).collect();
        assert_eq!(words, vec![vec![2, 1], vec![2, 2], vec![2, 3]]);
        assert_eq!(spec.basic_interval(&grandkids[2].word).unwrap(), grandkids[2]);
        assert_eq!(grandkids[2].word.to_string(), "2.3");
    }

    #[test]
    fn level_set_examples() {
        let cantor = MoranSpec::middle_third();
        let l2 = cantor.level_set(2).unwrap();
        assert_eq!(
            l2.set,
            IntervalSet::from_pairs([
                (ratio(0, 1), ratio(1, 9)),
                (ratio(2, 9), ratio(1, 3)),
                (ratio(2, 3), ratio(7, 9)),
                (ratio(8, 9), ratio(1, 1)),
            ])
            .unwrap()
        );
        assert_eq!(l2.basic.len(), 4);
        assert_eq!(l2.set.measure(), ratio(4, 9));

        let l0 = cantor.level_set(0).unwrap();
        assert_eq!(l0.set.parts(), &[Interval::unit()]);

        let c04 = MoranSpec::homogeneous(ratio(2, 5), 2, Layout::Uniform).unwrap();
        let l1 = c04.level_set(1).unwrap();
        assert_eq!(
            l1.set.parts(),
            &[iv(ratio(0, 1), ratio(2, 5)), iv(ratio(3, 5), ratio(1, 1))]
        );
        assert_eq!(l1.set.measure(), ratio(4, 5));
    }

    #[test]
    fn level_cap_is_enforced() {
        let cantor = MoranSpec::middle_third();
        let err = cantor.level_set_capped(5, 16).unwrap_err();
        assert_eq!(
            err,
            Error::CapExceeded {
                what: "basic intervals",
                needed: 32,
                cap: 16
            }
        );
        assert!(cantor.level_set_capped(4, 16).is_ok());
    }

    #[test]
    fn level_extents_agree_with_words() {
        for layout in [Layout::Uniform, Layout::LeftPacked, Layout::Random { seed: 3 }] {
            let spec = MoranSpec::homogeneous(ratio(1, 5), 3, layout).unwrap();
            let lvl = spec.level_set(4).unwrap();
            assert_eq!(lvl.extents(), spec.level_extents(4, DEFAULT_LEVEL_CAP).unwrap());
        }
    }

    #[test]
    fn restrict_examples() {
        let cantor = MoranSpec::middle_third();
        let r = cantor.restrict(1, &iv(ratio(0, 1), ratio(1, 3))).unwrap();
        assert_eq!(r.level(1).unwrap().set.parts(), &[iv(ratio(0, 1), ratio(1, 3))]);
        assert_eq!(
            r.level(2).unwrap().set.parts(),
            &[iv(ratio(0, 1), ratio(1, 9)), iv(ratio(2, 9), ratio(1, 3))]
        );

        let full = cantor.restrict(0, &Interval::unit()).unwrap();
        for n in 0..5 {
            assert_eq!(full.level(n).unwrap().set, cantor.level_set(n).unwrap().set);
        }

        let c04 = MoranSpec::homogeneous(ratio(2, 5), 2, Layout::Uniform).unwrap();
        let r = c04.restrict(1, &iv(ratio(3, 5), ratio(1, 1))).unwrap();
        assert_eq!(
            r.level(2).unwrap().set.parts(),
            &[iv(ratio(3, 5), ratio(19, 25)), iv(ratio(21, 25), ratio(1, 1))]
        );
    }

    #[test]
    fn restrict_rejects_bad_windows() {
        let cantor = MoranSpec::middle_third();
        let err = cantor.restrict(1, &iv(ratio(1, 9), ratio(1, 3))).unwrap_err();
        assert_eq!(err.code(), "invalid-window");
        let err = cantor.restrict(1, &iv(ratio(0, 1), ratio(2, 3))).unwrap_err();
        assert_eq!(err.code(), "invalid-window");
        let r = cantor.restrict(1, &iv(ratio(0, 1), ratio(1, 3))).unwrap();
        assert!(r.level(0).is_err());
    }

    #[test]
    fn theorem_bounds_examples() {
        let b = MoranSpec::middle_third().theorem_bounds();
        assert_eq!((b.lower.clone(), b.upper.clone()), (ratio(1, 3), ratio(1, 1)));
        assert!(b.is_nonempty());

        let b = MoranSpec::homogeneous(ratio(2, 5), 2, Layout::Uniform).unwrap().theorem_bounds();
        assert_eq!((b.lower.clone(), b.upper.clone()), (ratio(1, 5), ratio(2, 1)));

        let b = MoranSpec::homogeneous(ratio(1, 5), 2, Layout::Uniform).unwrap().theorem_bounds();
        assert_eq!((b.lower.clone(), b.upper.clone()), (ratio(3, 5), ratio(1, 3)));
        assert!(!b.is_nonempty());
    }

    #[test]
    fn theorem_bounds_scan_head_and_joint_period() {
        // Head of one term, then c and n periods of lengths 2 and 3.
        let c = ParamSequence::new(vec![ratio(1, 3)], vec![ratio(1, 4), ratio(1, 5)]).unwrap();
        let n = ParamSequence::new(vec![], vec![2, 2, 3]).unwrap();
        let spec = MoranSpec::new(c, n, Layout::Uniform).unwrap();
        assert_eq!(spec.horizon(), 7);
        let mut lower = ratio(-100, 1);
        let mut upper = ratio(100, 1);
        for k in 1..=60 {
            let c = spec.c_at(k).clone();
            let cn = &c * &Rational::from_integer(spec.n_at(k) as i64);
            lower = lower.max(Rational::one() - cn.clone());
            upper = upper.min(&c / &(Rational::one() - cn));
        }
        let b = spec.theorem_bounds();
        assert_eq!(b.lower, lower);
        assert_eq!(b.upper, upper);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(MoranSpec::homogeneous(ratio(1, 2), 2, Layout::Uniform).is_err());
        assert!(MoranSpec::homogeneous(ratio(1, 5), 1, Layout::Uniform).is_err());
        assert!(MoranSpec::homogeneous(ratio(0, 1), 2, Layout::Uniform).is_err());
        assert!(ParamSequence::<u32>::new(vec![2], vec![]).is_err());
        // Violation hidden in the period.
        let c = ParamSequence::new(vec![ratio(1, 5)], vec![ratio(1, 5), ratio(2, 5)]).unwrap();
        let n = ParamSequence::constant(3);
        assert!(MoranSpec::new(c, n, Layout::Uniform).is_err());
    }

    #[test]
    fn endpoint_points_examples() {
        let cantor = MoranSpec::middle_third();
        assert_eq!(
            cantor.endpoint_points(1).unwrap(),
            vec![ratio(0, 1), ratio(1, 3), ratio(2, 3), ratio(1, 1)]
        );
        assert_eq!(
            cantor.endpoint_points(2).unwrap(),
            [(0, 1), (1, 9), (2, 9), (1, 3), (2, 3), (7, 9), (8, 9), (1, 1)]
                .iter()
                .map(|&(p, q)| ratio(p, q))
                .collect::<Vec<_>>()
        );
        assert_eq!(cantor.endpoint_points(0).unwrap(), vec![ratio(0, 1), ratio(1, 1)]);
    }

    #[test]
    fn containing_intervals_at_shared_endpoint() {
        let left = MoranSpec::homogeneous(ratio(1, 5), 3, Layout::LeftPacked).unwrap();
        let hits = left.basic_intervals_containing(&ratio(1, 5), 1);
        assert_eq!(hits.len(), 2);
        let hits = MoranSpec::middle_third().basic_intervals_containing(&ratio(1, 3), 2);
        assert_eq!(extents(&hits), vec![iv(ratio(2, 9), ratio(1, 3))]);
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"c": {"head": ["2/5"], "period": ["2/5"]}, "n": {"head": [2], "period": [2]}, "layout": "uniform", "seed": 0}"#;
        let spec: MoranSpec = serde_json::from_str(json).unwrap();
        assert_eq!(spec.c_at(1), &ratio(2, 5));
        assert_eq!(spec.layout(), Layout::Uniform);
        let back: MoranSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        let random: MoranSpec = serde_json::from_str(
            r#"{"c": {"head": [], "period": ["1/5"]}, "n": {"head": [], "period": [3]}, "layout": "random", "seed": 9}"#,
        )
        .unwrap();
        assert_eq!(random.layout(), Layout::Random { seed: 9 });

        let bad = r#"{"c": {"head": [], "period": ["1/2"]}, "n": {"head": [], "period": [2]}, "layout": "uniform"}"#;
        assert!(serde_json::from_str::<MoranSpec>(bad).is_err());
        let bad = r#"{"c": {"head": [], "period": ["1/3"]}, "n": {"head": [], "period": [2]}, "layout": "zigzag"}"#;
        assert!(serde_json::from_str::<MoranSpec>(bad).is_err());
    }
}
