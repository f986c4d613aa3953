mod common;

use std::sync::Arc;

use common::{arb_function, arb_pair};
use orbex_core::measure::{parse_function_document, refine_diffuse, MeasureSpace, Piece, SimpleFunction};
use orbex_core::oracle::sample_orbit;
use orbex_core::scales::{
    add_scales, co_scale, cumulative, distribution, majorise_check, majorises, rearrange, StepScale,
};
use orbex_core::Rational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

/// `λ(f)` as a function on `[0, 1)` with Lebesgue measure.
fn as_atomless(scale: &StepScale) -> SimpleFunction {
    let pieces = scale.steps().iter().map(|s| Piece::new(s.value.clone(), s.length.clone())).collect();
    SimpleFunction::new(Arc::new(MeasureSpace::atomless()), vec![], pieces).unwrap()
}

fn probe_levels(f: &SimpleFunction) -> Vec<Rational> {
    let mut out: Vec<Rational> = f.cells().map(|(v, _)| v.clone()).collect();
    let extra: Vec<Rational> = out.iter().flat_map(|v| [v - Rational::new(1, 2), v + Rational::new(1, 3)]).collect();
    out.extend(extra);
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn document_round_trip(f in arb_function(3, true)) {
        let text = serde_json::to_string(&f.to_json()).unwrap();
        prop_assert_eq!(parse_function_document(&text).unwrap(), f);
    }

    #[test]
    fn total_mass_is_one(f in arb_function(3, true)) {
        let total: Rational = f.cells().map(|(_, m)| m.clone()).sum();
        prop_assert_eq!(total, Rational::one());
    }

    #[test]
    fn refinement_keeps_the_scale(f in arb_function(3, true), k in 1usize..=8) {
        prop_assert_eq!(rearrange(&refine_diffuse(&f, k)), rearrange(&f));
    }

    #[test]
    fn equimeasurable_with_its_scale(f in arb_function(3, true)) {
        let flat = as_atomless(&rearrange(&f));
        for s in probe_levels(&f) {
            prop_assert_eq!(distribution(&f, &s), distribution(&flat, &s));
        }
    }

    #[test]
    fn trace_identity(f in arb_function(3, true)) {
        let l = rearrange(&f);
        prop_assert_eq!(cumulative(&l, &Rational::one()).unwrap(), f.integral());
        prop_assert_eq!(co_scale(&f).total(), f.integral());
    }

    #[test]
    fn shift_moves_the_scale(f in arb_function(3, true), c in -7i64..=7, d in 1i64..=4) {
        let c = Rational::new(c, d);
        prop_assert_eq!(rearrange(&f.shift(&c)), rearrange(&f).shift(&c));
    }

    #[test]
    fn triangle_inequality((f, g) in arb_pair(3, true)) {
        let sum = rearrange(&f.add(&g).unwrap());
        let bound = add_scales(&rearrange(&f), &rearrange(&g));
        prop_assert!(majorise_check(&sum, &bound).holds);
    }

    #[test]
    fn order_properties(y in arb_function(3, true), s1 in any::<u64>(), s2 in any::<u64>()) {
        prop_assert!(majorises(&y, &y));
        let x = sample_orbit(&y, s1);
        let z = sample_orbit(&x, s2);
        prop_assert!(majorises(&x, &y) && majorises(&z, &x) && majorises(&z, &y));
        let both = majorises(&x, &y) && majorises(&y, &x);
        prop_assert_eq!(both, rearrange(&x) == rearrange(&y));
    }

    #[test]
    fn antisymmetry_on_arbitrary_pairs((f, g) in arb_pair(3, true)) {
        let both = majorises(&f, &g) && majorises(&g, &f);
        prop_assert_eq!(both, rearrange(&f) == rearrange(&g));
    }

    #[test]
    fn breakpoints_suffice((f, g) in arb_pair(3, true)) {
        // shift g to the same integral so that only the inequalities matter
        let g = g.shift(&(f.integral() - g.integral()));
        let (lf, lg) = (rearrange(&f), rearrange(&g));
        let denom: i64 = 4 * f.cells().chain(g.cells())
            .map(|(_, m)| m.denom().to_i64().unwrap())
            .fold(1i64, num_integer::lcm);
        let dense = (0..=denom).all(|k| {
            let t = Rational::new(k, denom);
            cumulative(&lf, &t).unwrap() <= cumulative(&lg, &t).unwrap()
        });
        prop_assert_eq!(majorise_check(&lf, &lg).holds, dense);
    }

    #[test]
    fn cut_identity(f in arb_function(3, true), pick in any::<prop::sample::Index>()) {
        // restrict f to its top k level sets; the result has the top part
        // of λ(f) as its scale
        let l = rearrange(&f);
        let k = pick.index(l.steps().len()) + 1;
        let floor = l.steps()[k - 1].value.clone();
        let t: Rational = l.steps()[..k].iter().map(|s| s.length.clone()).sum();
        let mut kept: Vec<(Rational, Rational)> =
            f.cells().filter(|(v, _)| **v >= floor).map(|(v, m)| (v.clone(), m.clone())).collect();
        kept.sort();
        let mass: Rational = kept.iter().map(|(_, m)| m.clone()).sum();
        prop_assert_eq!(&mass, &t);
        let window = l.window(&Rational::zero(), &t);
        let restricted = StepScale::from_pairs(kept.into_iter().map(|(v, m)| (v, m / &t))).unwrap();
        let rescaled: Vec<(Rational, Rational)> = window.iter().map(|s| (s.value.clone(), &s.length / &t)).collect();
        let from_window: Vec<(Rational, Rational)> =
            restricted.steps().iter().map(|s| (s.value.clone(), s.length.clone())).collect();
        prop_assert_eq!(from_window, rescaled);
    }
}
