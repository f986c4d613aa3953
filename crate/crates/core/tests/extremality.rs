mod common;

use std::sync::Arc;

use common::{function_on, on, space_shape};
use orbex_core::extremality::{check_extreme, constancy_intervals, evaluate_criterion, is_extreme, Condition};
use orbex_core::measure::{refine_diffuse, MeasureSpace, Piece, SimpleFunction};
use orbex_core::oracle::{enumerate_extreme, oracle_extreme, sample_orbit};
use orbex_core::scales::{cumulative, rearrange, StepScale};
use orbex_core::witness::{admissible_delta, build_witness, inspect_witness, CaseTag};
use orbex_core::{rat, Rational};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(x, y)` with `x ≺ y`: `x` sampled from the orbit of `y`, or `y`'s own
/// layout refined first.
fn orbit_pair(max_atoms: usize, allow_diffuse: bool) -> impl Strategy<Value = (SimpleFunction, SimpleFunction)> {
    space_shape(max_atoms, allow_diffuse)
        .prop_flat_map(|s| (function_on(s.build()), any::<u64>(), 1usize..=2))
        .prop_map(|(y, seed, k)| (sample_orbit(&refine_diffuse(&y, k), seed), y))
}

fn random_direction(x: &SimpleFunction, rng: &mut ChaCha8Rng) -> Option<SimpleFunction> {
    let atoms = x.atom_values().iter().map(|_| Rational::from_int(rng.random_range(-4..=4))).collect();
    let pieces = x
        .pieces()
        .iter()
        .map(|p| Piece::new(Rational::from_int(rng.random_range(-4..=4)), p.mass.clone()))
        .collect();
    let u = SimpleFunction::new(x.space().clone(), atoms, pieces).unwrap();
    let u = u.shift(&-u.integral());
    (!u.is_zero_ae()).then_some(u)
}

fn slack(x: &StepScale, y: &StepScale, t: &Rational) -> Rational {
    cumulative(y, t).unwrap() - cumulative(x, t).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn equal_weights_recover_permutations(values in prop::collection::vec(-4i64..=4, 1..=5), seed in any::<u64>()) {
        let space = Arc::new(MeasureSpace::uniform(values.len()));
        let y = SimpleFunction::on_atoms(space, values.into_iter().map(Rational::from_int).collect()).unwrap();
        let x = sample_orbit(&y, seed);
        let mut a = x.atom_values().to_vec();
        let mut b = y.atom_values().to_vec();
        a.sort();
        b.sort();
        prop_assert_eq!(is_extreme(&x, &y).unwrap(), a == b);
    }

    #[test]
    fn atomless_recovers_equimeasurability((x, y) in orbit_pair(0, true)) {
        prop_assert_eq!(is_extreme(&x, &y).unwrap(), rearrange(&x) == rearrange(&y));
    }

    #[test]
    fn agrees_with_the_oracle((x, y) in orbit_pair(5, false)) {
        prop_assert_eq!(is_extreme(&x, &y).unwrap(), oracle_extreme(&x, &y).unwrap());
    }

    #[test]
    fn non_extreme_points_carry_sound_witnesses((x, y) in orbit_pair(3, true)) {
        let v = check_extreme(&x, &y).unwrap();
        if let Some(w) = v.witness {
            let check = inspect_witness(&x, &rearrange(&y), &w);
            prop_assert!(check.is_valid(), "{:?}", check);
            prop_assert_eq!(w.x_plus.integral(), x.integral());
            prop_assert_eq!(w.x_minus.integral(), y.integral());

            // λ(x±) agrees with λ(x) away from the perturbed region
            let (s1, s4) = w.perturbation.region.clone();
            let (lx, lp, lm) = (rearrange(&x), rearrange(&w.x_plus), rearrange(&w.x_minus));
            let mut starts = vec![Rational::zero()];
            for sc in [&lx, &lp, &lm] {
                starts.extend(sc.breakpoints().into_iter().filter(|t| *t < Rational::one()));
            }
            for t in starts.into_iter().filter(|t| *t < s1 || *t >= s4) {
                prop_assert_eq!(lp.value_at(&t).unwrap(), lx.value_at(&t).unwrap());
                prop_assert_eq!(lm.value_at(&t).unwrap(), lx.value_at(&t).unwrap());
            }
        } else {
            prop_assert!(v.is_extreme());
        }
    }

    #[test]
    fn extreme_points_admit_no_two_sided_step((x, y) in orbit_pair(3, true), seed in any::<u64>()) {
        if is_extreme(&x, &y).unwrap() {
            let x = refine_diffuse(&x, 2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..20 {
                if let Some(u) = random_direction(&x, &mut rng) {
                    prop_assert_eq!(admissible_delta(&x, &y, &u).unwrap(), Rational::zero());
                }
            }
        }
    }

    #[test]
    fn extreme_points_have_slack_only_inside_balanced_atoms((x, y) in orbit_pair(3, true)) {
        let ly = rearrange(&y);
        let verdicts = evaluate_criterion(&x, &ly).unwrap();
        if verdicts.iter().all(|v| v.condition.is_some()) {
            let lx = rearrange(&x);
            for v in &verdicts {
                let iv = &v.interval;
                prop_assert_eq!(slack(&lx, &ly, &iv.t1), Rational::zero());
                prop_assert_eq!(slack(&lx, &ly, &iv.t2), Rational::zero());
                if v.condition == Some(Condition::Matches) {
                    let mid = (&iv.t1 + &iv.t2) / Rational::from_int(2);
                    prop_assert_eq!(slack(&lx, &ly, &mid), Rational::zero());
                }
            }
        }
    }

    #[test]
    fn refinement_never_changes_the_verdict((x, y) in orbit_pair(3, true), k in 1usize..=8) {
        prop_assert_eq!(is_extreme(&refine_diffuse(&x, k), &y).unwrap(), is_extreme(&x, &y).unwrap());
    }

    #[test]
    fn enumerated_points_are_extreme_and_midpoints_are_not(
        shape in space_shape(4, false).prop_flat_map(|s| function_on(s.build()))
    ) {
        let points = enumerate_extreme(&shape).unwrap();
        for p in &points {
            prop_assert!(oracle_extreme(p, &shape).unwrap());
        }
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                let mid = a.add(b).unwrap().scale(&Rational::new(1, 2));
                prop_assert!(!is_extreme(&mid, &shape).unwrap());
                prop_assert!(!oracle_extreme(&mid, &shape).unwrap());
            }
        }
    }
}

#[test]
fn witness_cases_are_all_exercised() {
    let uniform = |v: &[&str]| on(&Arc::new(MeasureSpace::uniform(v.len())), v);
    let three = build_witness(&uniform(&["5", "4", "3", "2"]), &uniform(&["8", "4", "2", "0"])).unwrap();
    assert_eq!(three.perturbation.case_tag, CaseTag::ThreeValues);
    let two = build_witness(&uniform(&["5/2", "3/2"]), &uniform(&["3", "1"])).unwrap();
    assert_eq!(two.perturbation.case_tag, CaseTag::TwoValues);
    let split = build_witness(&uniform(&["2", "2"]), &uniform(&["3", "1"])).unwrap();
    assert_eq!(split.perturbation.case_tag, CaseTag::SplitLevel);
}

#[test]
fn constancy_intervals_follow_the_scale() {
    let s = Arc::new(MeasureSpace::atomic(&[rat("1/2"), rat("1/4"), rat("1/4")]).unwrap());
    let x = on(&s, &["3", "4", "0"]);
    let iv = constancy_intervals(&x);
    let ends: Vec<(String, String)> = iv.iter().map(|i| (i.t1.to_string(), i.t2.to_string())).collect();
    assert_eq!(ends, vec![("0".into(), "1/4".into()), ("1/4".into(), "3/4".into()), ("3/4".into(), "1".into())]);
}

#[test]
fn truncated_inverse_root_family() {
    let steps = orbex_core::acceptance::inverse_root_steps();
    assert_eq!(steps[0], rat("4"));
    assert_eq!(steps[3], rat("2"));
    assert!(steps.windows(2).all(|w| w[0] > w[1]));
}
