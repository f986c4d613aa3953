//! The extremality criterion for `x ∈ Ω(y)`.
//!
//! `x` is extreme iff every maximal constancy interval `I = [t1, t2)` of
//! `λ(x)`, with value `v`, satisfies one of
//!
//! 1. `λ(x) = λ(y)` on all of `I`; or
//! 2. the level set `{x = v}` is a single atom and
//!    `∫_I λ(y) = v · (t2 − t1)`.
//!
//! Condition 2 does not depend on the point inside `I`, and condition 1
//! failing anywhere in `I` forces condition 2 there, so checking whole
//! intervals is the same as checking every `t`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::SimpleFunction;
use crate::rational::Rational;
use crate::scales::{cumulative, majorise_check, rearrange, StepScale};
use crate::witness::{build_witness_scale, WitnessPair};

/// How the level set `{x = v}` is made up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LevelKind {
    SingleAtom(String),
    MultipleAtoms(Vec<String>),
    Diffuse,
    Mixed,
}

impl LevelKind {
    pub fn name(&self) -> &'static str {
        match self {
            LevelKind::SingleAtom(_) => "single_atom",
            LevelKind::MultipleAtoms(_) => "multiple_atoms",
            LevelKind::Diffuse => "diffuse",
            LevelKind::Mixed => "mixed",
        }
    }

    pub fn is_single_atom(&self) -> bool {
        matches!(self, LevelKind::SingleAtom(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstancyInterval {
    pub t1: Rational,
    pub t2: Rational,
    pub value: Rational,
    pub kind: LevelKind,
}

impl ConstancyInterval {
    pub fn length(&self) -> Rational {
        &self.t2 - &self.t1
    }
}

/// Which alternative of the criterion justified an interval.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Condition {
    /// `λ(x) = λ(y)` on the interval.
    Matches,
    /// Single-atom level whose value is the mean of `λ(y)` over the interval.
    BalancedAtom,
}

impl Condition {
    pub fn number(self) -> u8 {
        match self {
            Condition::Matches => 1,
            Condition::BalancedAtom => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntervalVerdict {
    pub interval: ConstancyInterval,
    /// `None` marks a violating interval.
    pub condition: Option<Condition>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Extreme,
    NotExtreme,
}

#[derive(Clone, Debug)]
pub struct ExtremalityVerdict {
    pub verdict: Verdict,
    pub intervals: Vec<IntervalVerdict>,
    pub witness: Option<WitnessPair>,
}

impl ExtremalityVerdict {
    pub fn is_extreme(&self) -> bool {
        self.verdict == Verdict::Extreme
    }

    /// `{"verdict", "intervals", "witness"?}`; the witness is emitted only
    /// when `with_witness` is set.
    pub fn to_json(&self, with_witness: bool) -> serde_json::Value {
        let intervals: Vec<_> = self
            .intervals
            .iter()
            .map(|iv| {
                serde_json::json!({
                    "t1": iv.interval.t1.to_string(),
                    "t2": iv.interval.t2.to_string(),
                    "value": iv.interval.value.to_string(),
                    "kind": iv.interval.kind.name(),
                    "condition": iv.condition.map(Condition::number),
                })
            })
            .collect();
        let mut out = serde_json::json!({
            "verdict": match self.verdict {
                Verdict::Extreme => "extreme",
                Verdict::NotExtreme => "not_extreme",
            },
            "intervals": intervals,
        });
        if with_witness {
            if let Some(w) = &self.witness {
                out["witness"] = w.to_json();
            }
        }
        out
    }
}

pub fn classify_level(x: &SimpleFunction, v: &Rational) -> Result<LevelKind> {
    let atoms: Vec<String> = x
        .space()
        .atoms()
        .iter()
        .zip(x.atom_values())
        .filter(|(_, val)| *val == v)
        .map(|(a, _)| a.id.clone())
        .collect();
    let diffuse = x.pieces().iter().any(|p| p.value == *v);
    Ok(match (atoms.len(), diffuse) {
        (0, false) => return Err(Error::ValueNotAttained(v.to_string())),
        (0, true) => LevelKind::Diffuse,
        (1, false) => LevelKind::SingleAtom(atoms.into_iter().next().expect("one atom")),
        (_, false) => LevelKind::MultipleAtoms(atoms),
        (_, true) => LevelKind::Mixed,
    })
}

/// Maximal constancy intervals of `λ(x)`, in order, partitioning `[0, 1)`.
pub fn constancy_intervals(x: &SimpleFunction) -> Vec<ConstancyInterval> {
    let mut start = Rational::zero();
    rearrange(x)
        .steps()
        .iter()
        .map(|s| {
            let end = &start + &s.length;
            let iv = ConstancyInterval {
                t1: start.clone(),
                t2: end.clone(),
                value: s.value.clone(),
                kind: classify_level(x, &s.value).expect("scale values are attained"),
            };
            start = end;
            iv
        })
        .collect()
}

/// Evaluates both conditions on each interval. Fails with `NotInOrbit`
/// unless `x ≺ y`.
pub fn evaluate_criterion(x: &SimpleFunction, y: &StepScale) -> Result<Vec<IntervalVerdict>> {
    if !majorise_check(&rearrange(x), y).holds {
        return Err(Error::NotInOrbit);
    }
    Ok(constancy_intervals(x)
        .into_iter()
        .map(|iv| {
            let matches = y.window(&iv.t1, &iv.t2).iter().all(|s| s.value == iv.value);
            let condition = if matches {
                Some(Condition::Matches)
            } else if iv.kind.is_single_atom() && is_balanced(y, &iv) {
                Some(Condition::BalancedAtom)
            } else {
                None
            };
            IntervalVerdict { interval: iv, condition }
        })
        .collect())
}

fn is_balanced(y: &StepScale, iv: &ConstancyInterval) -> bool {
    let mass = cumulative(y, &iv.t2).expect("t2 ≤ 1") - cumulative(y, &iv.t1).expect("t1 ≥ 0");
    mass == &iv.value * iv.length()
}

/// Verdict only, no witness.
pub fn is_extreme_scale(x: &SimpleFunction, y: &StepScale) -> Result<bool> {
    Ok(evaluate_criterion(x, y)?.iter().all(|iv| iv.condition.is_some()))
}

pub fn is_extreme(x: &SimpleFunction, y: &SimpleFunction) -> Result<bool> {
    is_extreme_scale(x, &rearrange(y))
}

/// Decides extremality of `x` in `Ω(y)`. Only `λ(y)` is used, so `y` may
/// live on a different space. A `NotExtreme` verdict carries a verified
/// witness pair.
pub fn check_extreme(x: &SimpleFunction, y: &SimpleFunction) -> Result<ExtremalityVerdict> {
    check_extreme_scale(x, &rearrange(y))
}

pub fn check_extreme_scale(x: &SimpleFunction, y: &StepScale) -> Result<ExtremalityVerdict> {
    let intervals = evaluate_criterion(x, y)?;
    if intervals.iter().all(|iv| iv.condition.is_some()) {
        return Ok(ExtremalityVerdict { verdict: Verdict::Extreme, intervals, witness: None });
    }
    let witness = build_witness_scale(x, y)?;
    Ok(ExtremalityVerdict { verdict: Verdict::NotExtreme, intervals, witness: Some(witness) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{Atom, MeasureSpace, Piece};
    use crate::rational::rat;
    use std::sync::Arc;

    fn equal(values: &[&str]) -> SimpleFunction {
        let space = Arc::new(MeasureSpace::uniform(values.len()));
        SimpleFunction::on_atoms(space, values.iter().map(|v| rat(v)).collect()).unwrap()
    }

    fn abc(values: &[&str]) -> SimpleFunction {
        let space = MeasureSpace::new(
            vec![
                Atom { id: "a".into(), weight: rat("1/2") },
                Atom { id: "b".into(), weight: rat("1/4") },
                Atom { id: "c".into(), weight: rat("1/4") },
            ],
            rat("0"),
        )
        .unwrap();
        SimpleFunction::on_atoms(Arc::new(space), values.iter().map(|v| rat(v)).collect()).unwrap()
    }

    fn half_atom_space() -> Arc<MeasureSpace> {
        Arc::new(MeasureSpace::new(vec![Atom { id: "e".into(), weight: rat("1/2") }], rat("1/2")).unwrap())
    }

    #[test]
    fn intervals_of_simple_examples() {
        let iv = constancy_intervals(&equal(&["3", "1"]));
        assert_eq!(iv.len(), 2);
        assert_eq!((iv[0].t1.clone(), iv[0].t2.clone(), iv[0].value.clone()), (rat("0"), rat("1/2"), rat("3")));
        assert!(iv[0].kind.is_single_atom() && iv[1].kind.is_single_atom());

        let iv = constancy_intervals(&equal(&["2", "2"]));
        assert_eq!(iv.len(), 1);
        assert!(matches!(iv[0].kind, LevelKind::MultipleAtoms(ref ids) if ids.len() == 2));

        let f = SimpleFunction::new(half_atom_space(), vec![rat("2")], vec![Piece::new(rat("2"), rat("1/2"))]).unwrap();
        let iv = constancy_intervals(&f);
        assert_eq!(iv.len(), 1);
        assert_eq!(iv[0].kind, LevelKind::Mixed);
    }

    #[test]
    fn classify_examples() {
        let f = SimpleFunction::new(
            half_atom_space(),
            vec![rat("3")],
            vec![Piece::new(rat("4"), rat("1/4")), Piece::new(rat("2"), rat("1/4"))],
        )
        .unwrap();
        assert_eq!(classify_level(&f, &rat("3")).unwrap(), LevelKind::SingleAtom("e".into()));
        assert_eq!(classify_level(&f, &rat("4")).unwrap(), LevelKind::Diffuse);
        assert_eq!(classify_level(&f, &rat("9")).unwrap_err().code(), "ValueNotAttained");
        assert!(matches!(classify_level(&equal(&["2", "2", "1"]), &rat("2")).unwrap(), LevelKind::MultipleAtoms(_)));
    }

    #[test]
    fn permutation_is_extreme() {
        let v = check_extreme(&equal(&["1", "3"]), &equal(&["3", "1"])).unwrap();
        assert!(v.is_extreme());
        assert!(v.intervals.iter().all(|iv| iv.condition == Some(Condition::Matches)));
        assert!(v.witness.is_none());
    }

    #[test]
    fn average_is_not_extreme() {
        let v = check_extreme(&equal(&["2", "2"]), &equal(&["3", "1"])).unwrap();
        assert_eq!(v.verdict, Verdict::NotExtreme);
        assert_eq!(v.intervals[0].condition, None);
        assert!(v.witness.is_some());
    }

    #[test]
    fn weighted_golden_example() {
        let v = check_extreme(&abc(&["3", "4", "0"]), &abc(&["4", "2", "0"])).unwrap();
        assert!(v.is_extreme());
        let conds: Vec<_> = v.intervals.iter().map(|iv| iv.condition).collect();
        assert_eq!(
            conds,
            vec![Some(Condition::Matches), Some(Condition::BalancedAtom), Some(Condition::Matches)]
        );
        assert_eq!(v.intervals[1].interval.t1, rat("1/4"));
        assert_eq!(v.intervals[1].interval.t2, rat("3/4"));
        assert_eq!(v.intervals[1].interval.kind, LevelKind::SingleAtom("a".into()));
    }

    #[test]
    fn atom_plus_diffuse_golden_example() {
        let space = half_atom_space();
        let y = SimpleFunction::new(
            space.clone(),
            vec![rat("0")],
            vec![Piece::new(rat("4"), rat("1/4")), Piece::new(rat("2"), rat("1/4"))],
        )
        .unwrap();
        let x = SimpleFunction::new(space, vec![rat("3")], vec![Piece::new(rat("0"), rat("1/2"))]).unwrap();
        let v = check_extreme(&x, &y).unwrap();
        assert!(v.is_extreme());
        let conds: Vec<_> = v.intervals.iter().map(|iv| iv.condition).collect();
        assert_eq!(conds, vec![Some(Condition::BalancedAtom), Some(Condition::Matches)]);
    }

    #[test]
    fn not_in_orbit_is_an_error() {
        let e = check_extreme(&equal(&["3", "1"]), &equal(&["2", "2"])).unwrap_err();
        assert_eq!(e.code(), "NotInOrbit");
    }

    #[test]
    fn y_may_live_elsewhere() {
        let y = SimpleFunction::new(
            Arc::new(MeasureSpace::atomless()),
            vec![],
            vec![Piece::new(rat("3"), rat("1/2")), Piece::new(rat("1"), rat("1/2"))],
        )
        .unwrap();
        assert!(is_extreme(&equal(&["1", "3"]), &y).unwrap());
        assert!(!is_extreme(&equal(&["2", "2"]), &y).unwrap());
    }

    #[test]
    fn verdict_json_shape() {
        let v = check_extreme(&equal(&["2", "2"]), &equal(&["3", "1"])).unwrap();
        let j = v.to_json(true);
        assert_eq!(j["verdict"], "not_extreme");
        assert_eq!(j["intervals"][0]["kind"], "multiple_atoms");
        assert!(j["intervals"][0]["condition"].is_null());
        assert!(j["witness"].is_object());
        assert!(v.to_json(false).get("witness").is_none());
    }
}
