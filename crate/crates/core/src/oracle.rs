//! Ground truth on purely atomic spaces.
//!
//! With atoms of weight `w₁,…,wₙ` the orbit is the polytope
//! `{x : Σ_{i∈S} wᵢxᵢ ≤ Φ_y(w(S)) for all S ≠ ∅, Σ wᵢxᵢ = Φ_y(1)}`, and a
//! point is a vertex iff the normals `w∘1_S` of its tight constraints have
//! rank `n`. Nothing here consults the extremality criterion except
//! [`enumerate_extreme`], which uses it as a filter on generated candidates.

use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extremality::is_extreme_scale;
use crate::measure::{MeasureSpace, Piece, SimpleFunction};
use crate::rational::Rational;
use crate::scales::{cumulative, majorise_check, rearrange, StepScale};

pub const ORACLE_MAX_ATOMS: usize = 20;
pub const ENUMERATE_MAX_ATOMS: usize = 6;

/// Ω(y) on an atomic space in subset form.
#[derive(Clone, Debug)]
pub struct OrbitPolytope {
    space: Arc<MeasureSpace>,
    y_scale: StepScale,
    /// `(w(S), Φ_y(w(S)))` indexed by the bitmask of `S`.
    bounds: Vec<(Rational, Rational)>,
}

/// Constraints active at a point, as atom-index bitmasks. Always contains
/// the full set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TightSet {
    pub subsets: Vec<u32>,
}

impl TightSet {
    pub fn members(mask: u32, n: usize) -> Vec<usize> {
        (0..n).filter(|i| mask & (1 << i) != 0).collect()
    }
}

impl OrbitPolytope {
    pub fn new(space: Arc<MeasureSpace>, y_scale: StepScale) -> Result<Self> {
        if !space.is_purely_atomic() {
            return Err(Error::NotAtomic);
        }
        let n = space.atoms().len();
        if n > ORACLE_MAX_ATOMS {
            return Err(Error::SizeLimit { size: n, limit: ORACLE_MAX_ATOMS });
        }
        let weights: Vec<&Rational> = space.atoms().iter().map(|a| &a.weight).collect();
        let mut bounds = Vec::with_capacity(1 << n);
        bounds.push((Rational::zero(), Rational::zero()));
        for mask in 1u32..(1u32 << n) {
            let low = mask.trailing_zeros() as usize;
            let mass = &bounds[(mask & (mask - 1)) as usize].0 + weights[low];
            let cap = cumulative(&y_scale, &mass)?;
            bounds.push((mass, cap));
        }
        Ok(OrbitPolytope { space, y_scale, bounds })
    }

    /// The polytope for `λ(y)` over the atoms of `space`.
    pub fn for_function(space: Arc<MeasureSpace>, y: &SimpleFunction) -> Result<Self> {
        Self::new(space, rearrange(y))
    }

    pub fn n(&self) -> usize {
        self.space.atoms().len()
    }

    pub fn y_scale(&self) -> &StepScale {
        &self.y_scale
    }

    /// `2ⁿ − 1` inequalities plus the equality.
    pub fn constraint_count(&self) -> usize {
        self.bounds.len()
    }

    fn loads(&self, x: &SimpleFunction) -> Result<Vec<Rational>> {
        if !x.space().as_ref().eq(self.space.as_ref()) {
            return Err(Error::Schema("point lives on a different space".into()));
        }
        let terms: Vec<Rational> = x
            .atom_values()
            .iter()
            .zip(self.space.atoms())
            .map(|(v, a)| v * &a.weight)
            .collect();
        let mut out = Vec::with_capacity(self.bounds.len());
        out.push(Rational::zero());
        for mask in 1u32..(self.bounds.len() as u32) {
            let low = mask.trailing_zeros() as usize;
            let prev = &out[(mask & (mask - 1)) as usize];
            out.push(prev + &terms[low]);
        }
        Ok(out)
    }

    /// All subset inequalities and the total equality.
    pub fn contains(&self, x: &SimpleFunction) -> Result<bool> {
        let loads = self.loads(x)?;
        let full = loads.len() - 1;
        Ok(loads[full] == self.bounds[full].1
            && loads.iter().zip(&self.bounds).skip(1).all(|(l, (_, cap))| l <= cap))
    }

    pub fn tight_set(&self, x: &SimpleFunction) -> Result<TightSet> {
        let loads = self.loads(x)?;
        let subsets = (1..loads.len())
            .filter(|&m| loads[m] == self.bounds[m].1)
            .map(|m| m as u32)
            .collect();
        Ok(TightSet { subsets })
    }

    /// Rank of the tight normals, capped at `n`.
    pub fn tight_rank(&self, x: &SimpleFunction) -> Result<usize> {
        let n = self.n();
        let scale = self
            .space
            .atoms()
            .iter()
            .fold(BigInt::from(1), |acc, a| acc.lcm(a.weight.denom()));
        let numer: Vec<BigInt> = self
            .space
            .atoms()
            .iter()
            .map(|a| a.weight.numer() * (&scale / a.weight.denom()))
            .collect();
        let mut basis = RowEchelon::new(n);
        for mask in self.tight_set(x)?.subsets {
            let row = (0..n)
                .map(|i| if mask & (1 << i) != 0 { numer[i].clone() } else { BigInt::zero() })
                .collect();
            if basis.insert(row) == n {
                break;
            }
        }
        Ok(basis.rank())
    }
}

/// Incremental fraction-free elimination over the integers.
struct RowEchelon {
    width: usize,
    rows: Vec<(usize, Vec<BigInt>)>,
}

impl RowEchelon {
    fn new(width: usize) -> Self {
        RowEchelon { width, rows: Vec::new() }
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn insert(&mut self, mut row: Vec<BigInt>) -> usize {
        for (pivot, basis) in &self.rows {
            if row[*pivot].is_zero() {
                continue;
            }
            let (a, b) = (basis[*pivot].clone(), row[*pivot].clone());
            for (r, e) in row.iter_mut().zip(basis) {
                *r = &*r * &a - e * &b;
            }
            let content = row.iter().fold(BigInt::zero(), |g, e| g.gcd(e));
            if !content.is_zero() {
                row.iter_mut().for_each(|e| *e = &*e / &content);
            }
        }
        if let Some(pivot) = (0..self.width).find(|&j| !row[j].is_zero()) {
            if row[pivot].is_negative() {
                row.iter_mut().for_each(|e| *e = -&*e);
            }
            self.rows.push((pivot, row));
        }
        self.rows.len()
    }
}

/// Vertex test on the subset polytope.
pub fn oracle_extreme(x: &SimpleFunction, y: &SimpleFunction) -> Result<bool> {
    oracle_extreme_scale(x, &rearrange(y))
}

pub fn oracle_extreme_scale(x: &SimpleFunction, y: &StepScale) -> Result<bool> {
    let poly = OrbitPolytope::new(x.space().clone(), y.clone())?;
    if !poly.contains(x)? {
        return Err(Error::NotInOrbit);
    }
    Ok(poly.tight_rank(x)? == poly.n())
}

/// Majorisation decided through the subset inequalities alone.
pub fn subset_majorises(x: &SimpleFunction, y: &SimpleFunction) -> Result<bool> {
    OrbitPolytope::for_function(x.space().clone(), y)?.contains(x)
}

/// All extreme points of Ω(y) for `y` on a purely atomic space.
///
/// Candidates come from orderings of the atoms: walking `[0, 1)` left to
/// right, the next atom of weight `w` at cursor `t` takes the mean of `λ(y)`
/// over `[t, t + w)`. Where `λ(y)` is constant that is the level value, and
/// otherwise it is the balanced single-atom value. Orderings producing an
/// increase are pruned, the rest are filtered by the criterion and
/// deduplicated. Output is sorted lexicographically descending on atom
/// values.
pub fn enumerate_extreme(y: &SimpleFunction) -> Result<Vec<SimpleFunction>> {
    let space = y.space().clone();
    if !space.is_purely_atomic() {
        return Err(Error::NotAtomic);
    }
    let n = space.atoms().len();
    if n > ENUMERATE_MAX_ATOMS {
        return Err(Error::SizeLimit { size: n, limit: ENUMERATE_MAX_ATOMS });
    }
    let ys = rearrange(y);
    let mut found: Vec<Vec<Rational>> = Vec::new();
    let mut values: Vec<Option<Rational>> = vec![None; n];
    place(&space, &ys, &Rational::zero(), None, &mut values, &mut found)?;

    found.sort_by(|a, b| b.cmp(a));
    found.dedup();
    let mut out = Vec::with_capacity(found.len());
    for v in found {
        let x = SimpleFunction::on_atoms(space.clone(), v)?;
        if is_extreme_scale(&x, &ys)? {
            out.push(x);
        }
    }
    Ok(out)
}

fn place(
    space: &MeasureSpace,
    ys: &StepScale,
    cursor: &Rational,
    ceiling: Option<&Rational>,
    values: &mut Vec<Option<Rational>>,
    found: &mut Vec<Vec<Rational>>,
) -> Result<()> {
    if values.iter().all(Option::is_some) {
        found.push(values.iter().map(|v| v.clone().expect("all placed")).collect());
        return Ok(());
    }
    let start = cumulative(ys, cursor)?;
    for (i, atom) in space.atoms().iter().enumerate() {
        if values[i].is_some() {
            continue;
        }
        let end = cursor + &atom.weight;
        let value = (cumulative(ys, &end)? - &start) / &atom.weight;
        if ceiling.is_some_and(|c| value > *c) {
            continue;
        }
        values[i] = Some(value.clone());
        place(space, ys, &end, Some(&value), values, found)?;
        values[i] = None;
    }
    Ok(())
}

/// Replaces the values on the given cells (atoms first, then pieces, in
/// [`SimpleFunction::cells`] order) by their weighted mean.
pub fn partial_average(f: &SimpleFunction, cells: &[usize]) -> Result<SimpleFunction> {
    let n_atoms = f.atom_values().len();
    let total = n_atoms + f.pieces().len();
    if let Some(&bad) = cells.iter().find(|&&c| c >= total) {
        return Err(Error::Schema(format!("cell index {bad} out of range")));
    }
    let all: Vec<(&Rational, &Rational)> = f.cells().collect();
    let (mut mass, mut integral) = (Rational::zero(), Rational::zero());
    for &c in cells {
        mass += all[c].1;
        integral += all[c].0 * all[c].1;
    }
    if mass.is_zero() {
        return Ok(f.clone());
    }
    let mean = integral / mass;
    let pick = |c: usize, old: &Rational| if cells.contains(&c) { mean.clone() } else { old.clone() };
    let atom_values = f.atom_values().iter().enumerate().map(|(i, v)| pick(i, v)).collect();
    let pieces = f
        .pieces()
        .iter()
        .enumerate()
        .map(|(j, p)| Piece::new(pick(n_atoms + j, &p.value), p.mass.clone()))
        .collect();
    SimpleFunction::new(f.space().clone(), atom_values, pieces)
}

/// A seeded element of Ω(y): zero to three partial averages over random
/// sub-collections of cells, each cell joining with probability 1/2.
pub fn sample_orbit(y: &SimpleFunction, seed: u64) -> SimpleFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_orbit_with(y, &mut rng)
}

pub fn sample_orbit_with<R: Rng>(y: &SimpleFunction, rng: &mut R) -> SimpleFunction {
    let total = y.atom_values().len() + y.pieces().len();
    let rounds = rng.random_range(0..=3);
    let mut x = y.clone();
    for _ in 0..rounds {
        let mut picked: Vec<usize> = (0..total).filter(|_| rng.random_bool(0.5)).collect();
        picked.shuffle(rng);
        if picked.len() >= 2 {
            x = partial_average(&x, &picked).expect("indices in range");
        }
    }
    x
}

/// Whether `majorise_check` and the subset description agree on `x`.
pub fn descriptions_agree(x: &SimpleFunction, y: &SimpleFunction) -> Result<bool> {
    let by_scale = majorise_check(&rearrange(x), &rearrange(y)).holds;
    Ok(by_scale == subset_majorises(x, y)?)
}
