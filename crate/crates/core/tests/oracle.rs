mod common;

use proptest::prelude::*;

use moran_core::cases::{ifs_level_set, ifs_pair_image, OverlapSpec};
use moran_core::image::{nested_pair_image, pair_image, Add, DomainU, FunctionModel, ImageOptions, Mul, Sub};
use moran_core::{ratio, Interval, Layout, MoranSpec, ParamSequence, Rational};

use common::{brute_exact, exact_fn, preset_specs};

fn model(i: usize) -> (&'static str, &'static dyn FunctionModel<Rational>) {
    [("add", &Add as &dyn FunctionModel<Rational>), ("sub", &Sub), ("mul", &Mul)][i]
}

fn spec_strategy() -> impl Strategy<Value = MoranSpec> {
    let step = (2u32..=4).prop_flat_map(|n| (Just(n), (n as i128 + 1)..=12)).prop_flat_map(|(n, q)| {
        (Just(n), 1..=(q - 1) / n as i128, Just(q))
    });
    let layout = prop_oneof![
        Just(Layout::Uniform),
        Just(Layout::LeftPacked),
        Just(Layout::RightPacked),
        any::<u64>().prop_map(|seed| Layout::Random { seed }),
    ];
    (prop::collection::vec(step, 1..=3), layout).prop_map(|(steps, layout)| {
        let cs = steps.iter().map(|&(_, p, q)| ratio(p, q)).collect();
        let ns = steps.iter().map(|&(n, _, _)| n).collect();
        MoranSpec::new(ParamSequence::new(vec![], cs).unwrap(), ParamSequence::new(vec![], ns).unwrap(), layout).unwrap()
    })
}

fn box_strategy() -> impl Strategy<Value = Option<(Rational, Rational, Rational, Rational)>> {
    prop::option::of((-4i128..24, 1i128..24, -4i128..24, 1i128..24).prop_map(|(a, w, c, h)| {
        (ratio(a, 20), ratio(a + w, 20), ratio(c, 20), ratio(c + h, 20))
    }))
}

fn domain(bx: &Option<(Rational, Rational, Rational, Rational)>) -> DomainU<Rational> {
    match bx {
        Some((a, b, c, d)) => DomainU::single(a.clone(), b.clone(), c.clone(), d.clone()).unwrap(),
        None => DomainU::plane(),
    }
}

fn as_pairs(set: &moran_core::IntervalSet<Rational>) -> Vec<(Rational, Rational)> {
    set.iter().map(|i| (i.lo().clone(), i.hi().clone())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn pair_image_matches_brute_force(spec in spec_strategy(), k in 1usize..=4, bx in box_strategy(), m in 0usize..3) {
        prop_assume!(spec.count_at(k) <= 300);
        let (name, f) = model(m);
        let lv = spec.level_extents(k, u64::MAX).unwrap();
        let img = pair_image(f, &lv, &lv, &domain(&bx), &ImageOptions::exact()).unwrap();
        prop_assert_eq!(as_pairs(&img.set), brute_exact(exact_fn(name), &lv, &lv, &bx));
    }

    #[test]
    fn nested_matches_flat(spec in spec_strategy(), k in 1usize..=4, bx in box_strategy(), m in 0usize..3) {
        prop_assume!(spec.count_at(k) <= 300);
        let (_, f) = model(m);
        let lv: Vec<Vec<Interval<Rational>>> = (0..=k).map(|r| spec.level_extents(r, u64::MAX).unwrap()).collect();
        let u = domain(&bx);
        let flat = pair_image(f, &lv[k], &lv[k], &u, &ImageOptions::exact()).unwrap();
        let nested = nested_pair_image(f, &lv, &lv, &u, &ImageOptions::exact()).unwrap();
        prop_assert_eq!(flat.set, nested.set);
    }

    #[test]
    fn cell_tree_matches_brute_force(
        (l, c) in (2i128..=9).prop_flat_map(|l| (Just(l), l..=(2 * l).min(19 - l))),
        k in 0usize..=4,
        bx in box_strategy(),
        m in 0usize..3,
    ) {
        let spec = OverlapSpec::new(ratio(l, 20), ratio(c, 20)).unwrap();
        let (name, f) = model(m);
        let lv = ifs_level_set(&spec, k).unwrap().into_parts();
        let img = ifs_pair_image(f, &spec, k, &domain(&bx), &ImageOptions::exact()).unwrap();
        prop_assert_eq!(as_pairs(&img.set), brute_exact(exact_fn(name), &lv, &lv, &bx));
    }
}

#[test]
fn presets_against_brute_force_with_div() {
    let bx = Some((ratio(-1, 1), ratio(2, 1), ratio(1, 20), ratio(2, 1)));
    let u = domain(&bx);
    for (label, spec) in preset_specs() {
        for k in 0..=4 {
            let lv = spec.level_extents(k, u64::MAX).unwrap();
            let img = pair_image(&moran_core::image::Div, &lv, &lv, &u, &ImageOptions::exact()).unwrap();
            assert_eq!(as_pairs(&img.set), brute_exact(exact_fn("div"), &lv, &lv, &bx), "{label} k={k}");
        }
    }
}
