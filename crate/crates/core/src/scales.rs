//! Decreasing rearrangements and the Hardy–Littlewood–Pólya order.
//!
//! A [`StepScale`] is the canonical form of `λ(f)`: a right-continuous
//! non-increasing step function on `[0, 1)` whose steps have strictly
//! decreasing values and positive rational lengths summing to one.
//! `Φ(s) = ∫₀ˢ λ` is piecewise linear and concave, so comparing two of them at
//! the union of their breakpoints decides majorisation exactly.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::SimpleFunction;
use crate::rational::Rational;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Step {
    pub value: Rational,
    pub length: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ScaleDoc")]
pub struct StepScale {
    steps: Vec<Step>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScaleDoc {
    steps: Vec<Step>,
}

impl TryFrom<ScaleDoc> for StepScale {
    type Error = Error;
    fn try_from(doc: ScaleDoc) -> Result<Self> {
        let sorted = doc.steps.windows(2).all(|w| w[0].value > w[1].value);
        if !sorted {
            return Err(Error::Schema("scale values must be strictly decreasing".into()));
        }
        StepScale::from_pairs(doc.steps.into_iter().map(|s| (s.value, s.length)))
    }
}

impl StepScale {
    /// Sorts `(value, mass)` pairs by decreasing value and merges ties.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Rational, Rational)>) -> Result<Self> {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        if pairs.iter().any(|(_, m)| !m.is_positive()) {
            return Err(Error::Schema("scale lengths must be positive".into()));
        }
        let total: Rational = pairs.iter().map(|(_, m)| m).sum();
        if total != Rational::one() {
            return Err(Error::Normalization { total: total.to_string() });
        }
        pairs.sort_by(|a, b| b.0.cmp(&a.0));
        Ok(StepScale { steps: merge_sorted(pairs) })
    }

    /// The constant scale `c` on `[0, 1)`.
    pub fn constant(c: Rational) -> Self {
        StepScale { steps: vec![Step { value: c, length: Rational::one() }] }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// `λ(t)` for `t ∈ [0, 1)`.
    pub fn value_at(&self, t: &Rational) -> Result<&Rational> {
        if t.is_negative() || *t >= Rational::one() {
            return Err(Error::Domain(t.to_string()));
        }
        let mut end = Rational::zero();
        for s in &self.steps {
            end += &s.length;
            if *t < end {
                return Ok(&s.value);
            }
        }
        unreachable!("lengths sum to one")
    }

    /// `λ(1⁻)`, the value of the last step.
    pub fn last_value(&self) -> &Rational {
        &self.steps.last().expect("scales are never empty").value
    }

    /// Right ends of the steps, ending with `1`.
    pub fn breakpoints(&self) -> Vec<Rational> {
        let mut acc = Rational::zero();
        self.steps
            .iter()
            .map(|s| {
                acc += &s.length;
                acc.clone()
            })
            .collect()
    }

    pub fn shift(&self, c: &Rational) -> StepScale {
        StepScale {
            steps: self
                .steps
                .iter()
                .map(|s| Step { value: &s.value + c, length: s.length.clone() })
                .collect(),
        }
    }

    /// `∫₀¹ λ`.
    pub fn total(&self) -> Rational {
        self.steps.iter().map(|s| &s.value * &s.length).sum()
    }

    /// The steps of `λ` restricted to `[t1, t2)`, as `(value, length)` pairs.
    pub fn window(&self, t1: &Rational, t2: &Rational) -> Vec<Step> {
        let mut out = Vec::new();
        let mut start = Rational::zero();
        for s in &self.steps {
            let end = &start + &s.length;
            let lo = start.clone().max(t1.clone());
            let hi = end.clone().min(t2.clone());
            if lo < hi {
                out.push(Step { value: s.value.clone(), length: hi - lo });
            }
            start = end;
        }
        out
    }

    /// `Φ` at each point of the ascending sequence `points ⊂ [0, 1]`.
    pub(crate) fn cumulative_sorted(&self, points: &[Rational]) -> Vec<Rational> {
        let mut out = Vec::with_capacity(points.len());
        let mut idx = 0;
        let mut start = Rational::zero();
        let mut acc = Rational::zero();
        for p in points {
            while idx < self.steps.len() {
                let end = &start + &self.steps[idx].length;
                if end <= *p && idx + 1 < self.steps.len() {
                    acc += &self.steps[idx].value * &self.steps[idx].length;
                    start = end;
                    idx += 1;
                } else {
                    break;
                }
            }
            out.push(&acc + &self.steps[idx].value * (p - &start));
        }
        out
    }
}

fn merge_sorted(pairs: Vec<(Rational, Rational)>) -> Vec<Step> {
    let mut steps: Vec<Step> = Vec::with_capacity(pairs.len());
    for (value, length) in pairs {
        match steps.last_mut() {
            Some(last) if last.value == value => last.length += length,
            _ => steps.push(Step { value, length }),
        }
    }
    steps
}

/// `λ̌(f)`: the right-continuous non-decreasing rearrangement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IncreasingScale {
    steps: Vec<Step>,
}

impl IncreasingScale {
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn total(&self) -> Rational {
        self.steps.iter().map(|s| &s.value * &s.length).sum()
    }

    /// The decreasing scale read backwards.
    pub fn from_decreasing(scale: &StepScale) -> Self {
        IncreasingScale { steps: scale.steps.iter().rev().cloned().collect() }
    }
}

pub fn rearrange(f: &SimpleFunction) -> StepScale {
    StepScale::from_pairs(f.cells().map(|(v, m)| (v.clone(), m.clone())))
        .expect("simple functions have total mass one")
}

/// `d(s; f) = ν{f > s}`.
pub fn distribution(f: &SimpleFunction, s: &Rational) -> Rational {
    f.cells().filter(|(v, _)| *v > s).map(|(_, m)| m).sum()
}

pub fn co_scale(f: &SimpleFunction) -> IncreasingScale {
    IncreasingScale::from_decreasing(&rearrange(f))
}

/// `μ(f) = λ(|f|)`.
pub fn singular_scale(f: &SimpleFunction) -> StepScale {
    rearrange(&f.abs())
}

/// `Φ(s) = ∫₀ˢ λ(t) dt` for `s ∈ [0, 1]`.
pub fn cumulative(scale: &StepScale, s: &Rational) -> Result<Rational> {
    if s.is_negative() || *s > Rational::one() {
        return Err(Error::Domain(s.to_string()));
    }
    Ok(scale.cumulative_sorted(std::slice::from_ref(s)).remove(0))
}

fn union_breakpoints(a: &StepScale, b: &StepScale) -> Vec<Rational> {
    let set: BTreeSet<Rational> = a.breakpoints().into_iter().chain(b.breakpoints()).collect();
    set.into_iter().collect()
}

/// Pointwise sum `λ(a) + λ(b)` of two decreasing step functions.
pub fn add_scales(a: &StepScale, b: &StepScale) -> StepScale {
    let mut steps = Vec::new();
    let mut start = Rational::zero();
    for end in union_breakpoints(a, b) {
        let v = a.value_at(&start).expect("start < 1") + b.value_at(&start).expect("start < 1");
        steps.push((v, &end - &start));
        start = end;
    }
    StepScale { steps: merge_sorted(steps) }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Slack<T> {
    pub t: T,
    pub slack: T,
}

/// Outcome of comparing `Φ_x` with `Φ_y`.
///
/// `breakpoint_slacks` holds `Φ_y(t) − Φ_x(t)` at every interior breakpoint
/// of either scale; `total_gap` is `Φ_y(1) − Φ_x(1)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorisationReport<T = Rational> {
    pub holds: bool,
    pub breakpoint_slacks: Vec<Slack<T>>,
    pub total_gap: T,
}

/// Decides `x ≺ y` for two scales.
pub fn majorise_check(x: &StepScale, y: &StepScale) -> MajorisationReport {
    let points = union_breakpoints(x, y);
    let phi_x = x.cumulative_sorted(&points);
    let phi_y = y.cumulative_sorted(&points);
    let one = Rational::one();
    let mut slacks = Vec::with_capacity(points.len());
    let mut total_gap = Rational::zero();
    for ((t, px), py) in points.into_iter().zip(phi_x).zip(phi_y) {
        if t == one {
            total_gap = py - px;
        } else {
            slacks.push(Slack { t, slack: py - px });
        }
    }
    let holds = total_gap.is_zero() && slacks.iter().all(|s| !s.slack.is_negative());
    MajorisationReport { holds, breakpoint_slacks: slacks, total_gap }
}

/// `x ≺ y` for functions.
pub fn majorises(x: &SimpleFunction, y: &SimpleFunction) -> bool {
    majorise_check(&rearrange(x), &rearrange(y)).holds
}

/// Decides `x ≺≺ y`: `∫₀ᵗ μ(x) ≤ ∫₀ᵗ μ(y)` for all `t`, with no equality
/// requirement at `t = 1`.
pub fn submajorise_check(x: &SimpleFunction, y: &SimpleFunction) -> bool {
    let (mx, my) = (singular_scale(x), singular_scale(y));
    let points = union_breakpoints(&mx, &my);
    mx.cumulative_sorted(&points)
        .iter()
        .zip(my.cumulative_sorted(&points))
        .all(|(a, b)| *a <= b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{MeasureSpace, Piece};
    use crate::rational::rat;
    use std::sync::Arc;

    fn atomic(weights: &[&str], values: &[&str]) -> SimpleFunction {
        let space = MeasureSpace::atomic(&weights.iter().map(|w| rat(w)).collect::<Vec<_>>()).unwrap();
        SimpleFunction::on_atoms(Arc::new(space), values.iter().map(|v| rat(v)).collect()).unwrap()
    }

    fn scale(pairs: &[(&str, &str)]) -> StepScale {
        StepScale::from_pairs(pairs.iter().map(|(v, l)| (rat(v), rat(l)))).unwrap()
    }

    fn pairs(s: &StepScale) -> Vec<(String, String)> {
        s.steps().iter().map(|st| (st.value.to_string(), st.length.to_string())).collect()
    }

    #[test]
    fn rearrange_sorts_and_merges() {
        let f = atomic(&["1/2", "1/4", "1/4"], &["1", "3", "2"]);
        assert_eq!(rearrange(&f), scale(&[("3", "1/4"), ("2", "1/4"), ("1", "1/2")]));

        let c = SimpleFunction::constant(Arc::new(MeasureSpace::uniform(3)), rat("5"));
        assert_eq!(rearrange(&c), StepScale::constant(rat("5")));

        let space = Arc::new(
            MeasureSpace::new(
                vec![crate::measure::Atom { id: "e".into(), weight: rat("1/2") }],
                rat("1/2"),
            )
            .unwrap(),
        );
        let g = SimpleFunction::new(
            space,
            vec![rat("0")],
            vec![Piece::new(rat("4"), rat("1/4")), Piece::new(rat("2"), rat("1/4"))],
        )
        .unwrap();
        assert_eq!(pairs(&rearrange(&g)), vec![("4".into(), "1/4".into()), ("2".into(), "1/4".into()), ("0".into(), "1/2".into())]);
    }

    #[test]
    fn distribution_examples() {
        let f = atomic(&["1/2", "1/4", "1/4"], &["1", "3", "2"]);
        assert_eq!(distribution(&f, &rat("3/2")), rat("1/2"));
        assert_eq!(distribution(&f, &rat("3")), rat("0"));
        assert_eq!(distribution(&f, &rat("7")), rat("0"));
        assert_eq!(distribution(&f, &rat("0")), rat("1"));
        // right-continuity at a level: {f > 2} excludes the level itself
        assert_eq!(distribution(&f, &rat("2")), rat("1/4"));
    }

    #[test]
    fn co_scale_reverses() {
        let f = atomic(&["1/4", "3/4"], &["3", "1"]);
        let co = co_scale(&f);
        let got: Vec<_> = co.steps().iter().map(|s| (s.value.to_string(), s.length.to_string())).collect();
        assert_eq!(got, vec![("1".into(), "3/4".into()), ("3".into(), "1/4".into())]);
        let neg = rearrange(&f.negate());
        let flipped: Vec<_> = neg.steps().iter().map(|s| (-&s.value, s.length.clone())).collect();
        let co_pairs: Vec<_> = co.steps().iter().map(|s| (s.value.clone(), s.length.clone())).collect();
        assert_eq!(flipped, co_pairs);
    }

    #[test]
    fn singular_scale_examples() {
        assert_eq!(singular_scale(&atomic(&["1/2", "1/2"], &["1", "-1"])), StepScale::constant(rat("1")));
        let pos = atomic(&["1/2", "1/4", "1/4"], &["1", "3", "2"]);
        assert_eq!(singular_scale(&pos), rearrange(&pos));
        assert_eq!(
            singular_scale(&atomic(&["1/4", "3/4"], &["-4", "2"])),
            scale(&[("4", "1/4"), ("2", "3/4")])
        );
    }

    #[test]
    fn cumulative_examples() {
        let s = scale(&[("3", "1/4"), ("2", "1/4"), ("1", "1/2")]);
        assert_eq!(cumulative(&s, &rat("1/4")).unwrap(), rat("3/4"));
        assert_eq!(cumulative(&s, &rat("0")).unwrap(), rat("0"));
        assert_eq!(cumulative(&s, &rat("1")).unwrap(), rat("7/4"));
        assert_eq!(cumulative(&s, &rat("3/8")).unwrap(), rat("3/4") + rat("1/4"));
        assert_eq!(cumulative(&s, &rat("5/4")).unwrap_err().code(), "DomainError");
        assert_eq!(cumulative(&s, &rat("-1/4")).unwrap_err().code(), "DomainError");
    }

    #[test]
    fn add_scales_examples() {
        assert_eq!(
            add_scales(&StepScale::constant(rat("1")), &StepScale::constant(rat("2"))),
            StepScale::constant(rat("3"))
        );
        let a = scale(&[("3", "1/2"), ("1", "1/2")]);
        let b = scale(&[("2", "1/4"), ("0", "3/4")]);
        assert_eq!(add_scales(&a, &b), scale(&[("5", "1/4"), ("3", "1/4"), ("1", "1/2")]));
        assert_eq!(add_scales(&a, &StepScale::constant(rat("0"))), a);
    }

    #[test]
    fn majorise_examples() {
        let x = scale(&[("2", "1")]);
        let y = scale(&[("3", "1/2"), ("1", "1/2")]);
        let r = majorise_check(&x, &y);
        assert!(r.holds);
        assert_eq!(r.breakpoint_slacks, vec![Slack { t: rat("1/2"), slack: rat("1/2") }]);
        assert!(r.total_gap.is_zero());

        let r = majorise_check(&y, &y);
        assert!(r.holds && r.breakpoint_slacks.iter().all(|s| s.slack.is_zero()));

        let r = majorise_check(&y, &x);
        assert!(!r.holds);
        assert_eq!(r.breakpoint_slacks[0].slack, rat("-1/2"));
    }

    #[test]
    fn majorise_requires_equal_totals() {
        let r = majorise_check(&StepScale::constant(rat("1")), &StepScale::constant(rat("2")));
        assert!(!r.holds);
        assert_eq!(r.total_gap, rat("1"));
    }

    #[test]
    fn submajorise_examples() {
        let h = ["1/2", "1/2"];
        assert!(submajorise_check(&atomic(&h, &["1", "-1"]), &atomic(&h, &["2", "0"])));
        let x = atomic(&h, &["3", "0"]);
        assert!(submajorise_check(&x, &x));
        assert!(!submajorise_check(&x, &atomic(&h, &["1", "1"])));
    }

    #[test]
    fn scale_json_shape() {
        let s = scale(&[("3", "1/4"), ("1", "3/4")]);
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"steps":[{"value":"3","length":"1/4"},{"value":"1","length":"3/4"}]})
        );
        let back: StepScale = serde_json::from_value(v).unwrap();
        assert_eq!(back, s);
        let bad = serde_json::json!({"steps":[{"value":"1","length":"1/2"},{"value":"3","length":"1/2"}]});
        assert!(serde_json::from_value::<StepScale>(bad).is_err());
    }

    #[test]
    fn window_restricts() {
        let s = scale(&[("3", "1/4"), ("2", "1/4"), ("1", "1/2")]);
        let w = s.window(&rat("1/8"), &rat("3/4"));
        let got: Vec<_> = w.iter().map(|st| (st.value.to_string(), st.length.to_string())).collect();
        assert_eq!(got, vec![("3".into(), "1/8".into()), ("2".into(), "1/4".into()), ("1".into(), "1/4".into())]);
        assert_eq!(s.value_at(&rat("1/4")).unwrap(), &rat("2"));
        assert_eq!(s.last_value(), &rat("1"));
    }
}
