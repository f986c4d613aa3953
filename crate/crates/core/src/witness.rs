//! Non-extremality certificates `x± = x ± δu`.
//!
//! The direction `u` has zero integral and lives on at most two level sets
//! of `x`:
//!
//! * `SplitLevel`: a level that is not a single atom is cut into parts
//!   `p₁, p₂` and `u = 1_{p₁} − (ν(p₁)/ν(p₂)) 1_{p₂}`.
//! * `TwoValues` / `ThreeValues`: inside a maximal open region where
//!   `Φ_y > Φ_x`, two adjacent levels `C₁ > C₂` are balanced,
//!   `u = 1_{C₁} − (|C₁|/|C₂|) 1_{C₂}`. With three or more levels in the
//!   region the first level is skipped so the raised level starts strictly
//!   inside it.
//!
//! `δ` is half the exact supremum [`admissible_delta`].

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremality::{evaluate_criterion, ConstancyInterval, IntervalVerdict};
use crate::measure::{common_refinement, Refinement, SimpleFunction};
use crate::rational::Rational;
use crate::scales::{cumulative, majorise_check, rearrange, StepScale};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    ThreeValues,
    TwoValues,
    SplitLevel,
}

impl CaseTag {
    pub fn name(self) -> &'static str {
        match self {
            CaseTag::ThreeValues => "three_values",
            CaseTag::TwoValues => "two_values",
            CaseTag::SplitLevel => "split_level",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Perturbation {
    pub u: SimpleFunction,
    pub delta: Rational,
    pub case_tag: CaseTag,
    /// `[s₁, s₄]`: the part of `[0, 1]` where `λ(x±)` differs from `λ(x)`.
    pub region: (Rational, Rational),
}

#[derive(Clone, Debug)]
pub struct WitnessPair {
    pub x_plus: SimpleFunction,
    pub x_minus: SimpleFunction,
    pub perturbation: Perturbation,
}

impl WitnessPair {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "x_plus": self.x_plus.to_json(),
            "x_minus": self.x_minus.to_json(),
            "direction": self.perturbation.u.to_json(),
            "delta": self.perturbation.delta.to_string(),
            "case": self.perturbation.case_tag.name(),
        })
    }
}

/// One cell of the common refinement of `x` and `u`.
struct Cell {
    mass: Rational,
    x: Rational,
    u: Rational,
}

fn cells(x: &SimpleFunction, u: &SimpleFunction) -> Result<Vec<Cell>> {
    if !x.same_space(u) {
        return Err(Error::Schema("direction lives on a different space".into()));
    }
    let mut out: Vec<Cell> = x
        .space()
        .atoms()
        .iter()
        .zip(x.atom_values().iter().zip(u.atom_values()))
        .map(|(a, (xv, uv))| Cell { mass: a.weight.clone(), x: xv.clone(), u: uv.clone() })
        .collect();
    out.extend(
        common_refinement(x.pieces(), u.pieces())
            .into_iter()
            .map(|(mass, xv, uv)| Cell { mass, x: xv.clone(), u: uv.clone() }),
    );
    Ok(out)
}

/// Largest `δ` for which `x + δw` keeps its decreasing order fixed, and the
/// tightest majorisation bound in that range.
fn one_sided_bound(cells: &[Cell], sign: &Rational, y: &StepScale) -> Option<Rational> {
    let w: Vec<Rational> = cells.iter().map(|c| &c.u * sign).collect();
    let mut best: Option<Rational> = None;
    let mut offer = |b: Rational| {
        if best.as_ref().is_none_or(|cur| b < *cur) {
            best = Some(b);
        }
    };

    // order preservation
    for (i, ci) in cells.iter().enumerate() {
        for (j, cj) in cells.iter().enumerate() {
            if ci.x > cj.x && w[i] < w[j] {
                offer((&ci.x - &cj.x) / (&w[j] - &w[i]));
            }
        }
    }

    // with the order fixed, Φ_{x+δw}(t) = A(t) + δB(t) at every t
    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by(|&a, &b| cells[b].x.cmp(&cells[a].x).then_with(|| w[b].cmp(&w[a])));
    let mut ends = Vec::with_capacity(order.len());
    let mut acc = Rational::zero();
    for &k in &order {
        acc += &cells[k].mass;
        ends.push(acc.clone());
    }
    let mut points: Vec<Rational> = ends.iter().cloned().chain(y.breakpoints()).collect();
    points.sort();
    points.dedup();
    let phi_y = y.cumulative_sorted(&points);

    let (mut idx, mut start) = (0usize, Rational::zero());
    let (mut a_acc, mut b_acc) = (Rational::zero(), Rational::zero());
    for (t, py) in points.iter().zip(phi_y) {
        while idx + 1 < order.len() && ends[idx] <= *t {
            let c = &cells[order[idx]];
            a_acc += &c.x * &c.mass;
            b_acc += &w[order[idx]] * &c.mass;
            start = ends[idx].clone();
            idx += 1;
        }
        let c = &cells[order[idx]];
        let span = t - &start;
        let a = &a_acc + &c.x * &span;
        let b = &b_acc + &w[order[idx]] * &span;
        if b.is_positive() {
            offer((py - a) / b);
        }
    }
    best
}

/// The supremum `δ*` of `δ ≥ 0` with `x ± δu ≺ y` and the level order of
/// `x` preserved. All constraints are linear in `δ`, so `δ*` is exact.
pub fn admissible_delta(x: &SimpleFunction, y: &SimpleFunction, u: &SimpleFunction) -> Result<Rational> {
    admissible_delta_scale(x, &rearrange(y), u)
}

pub fn admissible_delta_scale(x: &SimpleFunction, y: &StepScale, u: &SimpleFunction) -> Result<Rational> {
    if u.is_zero_ae() {
        return Err(Error::DegenerateDirection);
    }
    if !u.integral().is_zero() {
        return Err(Error::Schema("direction must integrate to zero".into()));
    }
    if !majorise_check(&rearrange(x), y).holds {
        return Err(Error::NotInOrbit);
    }
    let cells = cells(x, u)?;
    let plus = one_sided_bound(&cells, &Rational::one(), y);
    let minus = one_sided_bound(&cells, &-Rational::one(), y);
    match (plus, minus) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::Invariant("admissible step is unbounded for a nonzero direction".into())),
    }
}

/// Builds `x± = x ± δu` with `δ = δ*/2` for the leftmost interval that
/// violates the criterion.
pub fn build_witness(x: &SimpleFunction, y: &SimpleFunction) -> Result<WitnessPair> {
    build_witness_scale(x, &rearrange(y))
}

pub(crate) fn build_witness_scale(x: &SimpleFunction, y: &StepScale) -> Result<WitnessPair> {
    let intervals = evaluate_criterion(x, y)?;
    let idx = intervals
        .iter()
        .position(|iv| iv.condition.is_none())
        .ok_or(Error::CriterionSatisfied)?;
    let violating = &intervals[idx].interval;

    let (base, u, case_tag, region) = if violating.kind.is_single_atom() {
        balance_levels(x, y, &intervals, idx)?
    } else {
        let (base, u) = split_level(x, violating)?;
        (base, u, CaseTag::SplitLevel, (violating.t1.clone(), violating.t2.clone()))
    };

    let star = admissible_delta_scale(&base, y, &u)?;
    if !star.is_positive() {
        return Err(Error::Invariant(format!(
            "no admissible step for the {} direction on [{}, {})",
            case_tag.name(),
            violating.t1,
            violating.t2
        )));
    }
    let delta = star / Rational::from_int(2);
    let step = u.scale(&delta);
    let pair = WitnessPair {
        x_plus: base.add(&step)?,
        x_minus: base.sub(&step)?,
        perturbation: Perturbation { u, delta, case_tag, region },
    };
    if !verify_witness_scale(x, y, &pair) {
        return Err(Error::Invariant("constructed witness failed verification".into()));
    }
    Ok(pair)
}

fn indicator_direction(
    x: &SimpleFunction,
    atom_weight: impl Fn(usize, &Rational) -> Rational,
    piece_weight: impl Fn(usize, &Rational) -> Rational,
) -> SimpleFunction {
    let atom_values = x.atom_values().iter().enumerate().map(|(i, v)| atom_weight(i, v)).collect();
    let pieces = x
        .pieces()
        .iter()
        .enumerate()
        .map(|(i, p)| crate::measure::Piece::new(piece_weight(i, &p.value), p.mass.clone()))
        .collect();
    SimpleFunction::new(x.space().clone(), atom_values, pieces).expect("same layout as x")
}

/// Cuts a non-atomic level `{x = v}` into `p₁` (its first atom, else its
/// first piece) and `p₂` (the rest). A level made of one piece is refined
/// into two equal halves first.
fn split_level(x: &SimpleFunction, level: &ConstancyInterval) -> Result<(SimpleFunction, SimpleFunction)> {
    let v = &level.value;
    let atoms: Vec<usize> = (0..x.atom_values().len()).filter(|&i| x.atom_values()[i] == *v).collect();
    let pieces: Vec<usize> = (0..x.pieces().len()).filter(|&i| x.pieces()[i].value == *v).collect();

    let base = if atoms.is_empty() && pieces.len() == 1 {
        let half = &x.pieces()[pieces[0]].mass / Rational::from_int(2);
        Refinement::new(x.clone(), BTreeMap::from([(pieces[0], vec![half.clone(), half])]))?.apply()
    } else {
        x.clone()
    };
    let atoms: Vec<usize> = (0..base.atom_values().len()).filter(|&i| base.atom_values()[i] == *v).collect();
    let pieces: Vec<usize> = (0..base.pieces().len()).filter(|&i| base.pieces()[i].value == *v).collect();
    let (first_atom, first_piece) = match atoms.first() {
        Some(&a) => (Some(a), None),
        None => (None, pieces.first().copied()),
    };
    let weights = base.space().atoms();
    let p1_mass = match (first_atom, first_piece) {
        (Some(a), _) => weights[a].weight.clone(),
        (None, Some(p)) => base.pieces()[p].mass.clone(),
        (None, None) => return Err(Error::Invariant("empty level".into())),
    };
    let p2_mass = &level.length() - &p1_mass;
    if !p2_mass.is_positive() {
        return Err(Error::Invariant("level cannot be split".into()));
    }
    let ratio = &p1_mass / &p2_mass;
    let u = indicator_direction(
        &base,
        |i, val| {
            if Some(i) == first_atom {
                Rational::one()
            } else if val == v {
                -ratio.clone()
            } else {
                Rational::zero()
            }
        },
        |i, val| {
            if Some(i) == first_piece {
                Rational::one()
            } else if val == v {
                -ratio.clone()
            } else {
                Rational::zero()
            }
        },
    );
    Ok((base, u))
}

type Construction = (SimpleFunction, SimpleFunction, CaseTag, (Rational, Rational));

/// Two adjacent levels inside the strict-slack region around interval `idx`.
fn balance_levels(
    x: &SimpleFunction,
    y: &StepScale,
    intervals: &[IntervalVerdict],
    idx: usize,
) -> Result<Construction> {
    let phi_x = rearrange(x);
    let slack = |t: &Rational| -> Rational {
        cumulative(y, t).expect("t in [0,1]") - cumulative(&phi_x, t).expect("t in [0,1]")
    };
    // Φ_y − Φ_x is concave on each interval, so it is positive on the
    // interior iff it is positive at the midpoint.
    let inside_positive = |k: usize| {
        let iv = &intervals[k].interval;
        slack(&((&iv.t1 + &iv.t2) / Rational::from_int(2))).is_positive()
    };
    if !inside_positive(idx) {
        return Err(Error::Invariant("violating single-atom level has no slack".into()));
    }
    let mut lo = idx;
    while lo > 0 && inside_positive(lo - 1) && slack(&intervals[lo].interval.t1).is_positive() {
        lo -= 1;
    }
    let mut hi = idx;
    while hi + 1 < intervals.len() && inside_positive(hi + 1) && slack(&intervals[hi].interval.t2).is_positive() {
        hi += 1;
    }
    let count = hi - lo + 1;
    let (first, tag) = match count {
        0 | 1 => return Err(Error::Invariant("strict-slack region holds a single level".into())),
        2 => (lo, CaseTag::TwoValues),
        _ => (lo + 1, CaseTag::ThreeValues),
    };
    let upper = &intervals[first].interval;
    let lower = &intervals[first + 1].interval;
    let ratio = upper.length() / lower.length();
    let weight = |val: &Rational| {
        if *val == upper.value {
            Rational::one()
        } else if *val == lower.value {
            -ratio.clone()
        } else {
            Rational::zero()
        }
    };
    let u = indicator_direction(x, |_, v| weight(v), |_, v| weight(v));
    Ok((x.clone(), u, tag, (upper.t1.clone(), lower.t2.clone())))
}

/// Detailed outcome of checking a witness pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessCheck {
    pub midpoint: bool,
    pub distinct: bool,
    pub plus_in_orbit: bool,
    pub minus_in_orbit: bool,
    /// `Φ_x(s₁) + λ(s₁;x)(s − s₁) ≤ Φ_y(s)` on the perturbed region, for the
    /// level-balancing cases. Reported, not required: it is a sufficient
    /// condition for non-extremality that balanced pairs need not meet.
    pub tangent_bound: Option<bool>,
}

impl WitnessCheck {
    pub fn is_valid(&self) -> bool {
        self.midpoint && self.distinct && self.plus_in_orbit && self.minus_in_orbit
    }
}

pub fn inspect_witness(x: &SimpleFunction, y: &StepScale, w: &WitnessPair) -> WitnessCheck {
    let midpoint = w
        .x_plus
        .add(&w.x_minus)
        .map(|s| s.scale(&Rational::new(1, 2)).ae_eq(x))
        .unwrap_or(false);
    let distinct = !w.x_plus.ae_eq(&w.x_minus);
    let plus_in_orbit = majorise_check(&rearrange(&w.x_plus), y).holds;
    let minus_in_orbit = majorise_check(&rearrange(&w.x_minus), y).holds;
    let tangent_bound = match w.perturbation.case_tag {
        CaseTag::SplitLevel => None,
        CaseTag::TwoValues | CaseTag::ThreeValues => Some(tangent_bound_holds(x, y, &w.perturbation.region)),
    };
    WitnessCheck { midpoint, distinct, plus_in_orbit, minus_in_orbit, tangent_bound }
}

fn tangent_bound_holds(x: &SimpleFunction, y: &StepScale, region: &(Rational, Rational)) -> bool {
    let (s1, s4) = region;
    let lx = rearrange(x);
    if *s1 >= Rational::one() {
        return true;
    }
    let slope = lx.value_at(s1).expect("s1 < 1").clone();
    let base = cumulative(&lx, s1).expect("s1 in [0,1]");
    // the bound is linear and Φ_y concave: the endpoints decide it
    [s1, s4].iter().all(|s| {
        let line = &base + &slope * (*s - s1);
        line <= cumulative(y, s).expect("s in [0,1]")
    })
}

/// Midpoint identity, distinctness, and `x± ≺ y`, all exact.
pub fn verify_witness(x: &SimpleFunction, y: &SimpleFunction, w: &WitnessPair) -> bool {
    verify_witness_scale(x, &rearrange(y), w)
}

pub fn verify_witness_scale(x: &SimpleFunction, y: &StepScale, w: &WitnessPair) -> bool {
    inspect_witness(x, y, w).is_valid()
}
