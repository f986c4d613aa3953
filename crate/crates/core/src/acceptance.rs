//! The acceptance suite, shared by the `acceptance` test target and the
//! CLI `selftest` command.
//!
//! Every criterion is deterministic in the seed. Randomized criteria
//! (1, 3, 4, 7, 8) take their instance counts from
//! [`AcceptanceConfig::trials`] when set; the exact ones (2, 5, 6) always run
//! in full.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::extremality::{check_extreme, evaluate_criterion, Condition};
use crate::matrix::{
    birkhoff_decompose, check_extreme_diag, identity_suite, random_doubly_stochastic, random_hermitian,
    random_unitary, schur_horn_check, t_transform_chain, CMatrix, DoublyStochastic, HermitianOperator,
};
use crate::measure::{Atom, MeasureSpace, Piece, SimpleFunction};
use crate::oracle::{enumerate_extreme, oracle_extreme, partial_average, sample_orbit_with, subset_majorises};
use crate::rational::{rat, Rational};
use crate::scales::{cumulative, rearrange};
use crate::witness::{admissible_delta, verify_witness};

/// Deliberate defects for negative controls.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Every extremality verdict is inverted before it is compared.
    FlipVerdict,
}

#[derive(Clone, Debug, Default)]
pub struct AcceptanceConfig {
    pub seed: u64,
    pub trials: Option<usize>,
    pub fault: Option<Fault>,
}

impl AcceptanceConfig {
    pub fn new(seed: u64) -> Self {
        AcceptanceConfig { seed, ..Default::default() }
    }

    fn count(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    fn rng(&self, criterion: u64, case: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ (criterion << 56));
        rng.set_stream(case as u64);
        rng
    }

    fn verdict(&self, x: &SimpleFunction, y: &SimpleFunction) -> Result<bool> {
        let v = check_extreme(x, y)?.is_extreme();
        Ok(if self.fault == Some(Fault::FlipVerdict) { !v } else { v })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub cases: usize,
    pub passed: usize,
    /// At most the first 20 failure descriptions.
    pub failures: Vec<String>,
    pub failure_count: usize,
    pub seconds: f64,
    pub budget_seconds: Option<f64>,
    pub notes: Vec<String>,
}

impl CriterionResult {
    fn new(id: u8, name: &'static str) -> Self {
        CriterionResult {
            id,
            name,
            cases: 0,
            passed: 0,
            failures: Vec::new(),
            failure_count: 0,
            seconds: 0.0,
            budget_seconds: None,
            notes: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failure_count += 1;
            if self.failures.len() < 20 {
                self.failures.push(what());
            }
        }
    }

    fn check_result(&mut self, r: Result<bool>, what: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.check(ok, what),
            Err(e) => self.check(false, || format!("{}: {e}", what())),
        }
    }

    pub fn within_budget(&self) -> bool {
        self.budget_seconds.is_none_or(|b| self.seconds < b)
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0 && self.within_budget()
    }

    /// `PASS [1] name: 1000/1000 cases (0.84 s)`.
    pub fn line(&self) -> String {
        let budget = match self.budget_seconds {
            Some(b) if !self.within_budget() => format!(", over the {b} s budget"),
            _ => String::new(),
        };
        format!(
            "{} [{}] {}: {}/{} cases ({:.2} s{})",
            if self.passed() { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.passed,
            self.cases,
            self.seconds,
            budget
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceReport {
    pub seed: u64,
    pub trials: Option<usize>,
    pub criteria: Vec<CriterionResult>,
    pub seconds: f64,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.criteria.iter().all(CriterionResult::passed)
    }
}

pub const CRITERIA: [u8; 8] = [1, 2, 3, 4, 5, 6, 7, 8];

pub fn run_all(cfg: &AcceptanceConfig) -> AcceptanceReport {
    let start = Instant::now();
    let criteria = CRITERIA.iter().map(|&id| run_criterion(id, cfg)).collect();
    AcceptanceReport { seed: cfg.seed, trials: cfg.trials, criteria, seconds: start.elapsed().as_secs_f64() }
}

pub fn run_criterion(id: u8, cfg: &AcceptanceConfig) -> CriterionResult {
    let start = Instant::now();
    let mut r = match id {
        1 => criterion_oracle(cfg),
        2 => criterion_permutations(cfg),
        3 => criterion_ryff(cfg),
        4 => criterion_witness(cfg),
        5 => criterion_golden(cfg),
        6 => criterion_truncations(cfg),
        7 => criterion_matrix(cfg),
        8 => criterion_identities(cfg),
        _ => panic!("no acceptance criterion {id}"),
    };
    r.seconds = start.elapsed().as_secs_f64();
    r
}

// ---------------------------------------------------------------------------
// instance generators

/// `count` positive multiples of `1/denom` summing to one.
fn dyadic_masses<R: Rng>(rng: &mut R, count: usize, denom: i64) -> Vec<Rational> {
    let mut cuts: Vec<i64> = (1..denom).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take(count - 1).collect();
    cuts.sort_unstable();
    cuts.push(denom);
    let mut prev = 0;
    cuts.into_iter()
        .map(|c| {
            let m = Rational::new(c - prev, denom);
            prev = c;
            m
        })
        .collect()
}

fn small_int<R: Rng>(rng: &mut R) -> Rational {
    Rational::from_int(rng.random_range(-3..=5))
}

/// An atomic instance for criterion 1: even cases sample the orbit, odd
/// ones take an enumerated extreme point or the midpoint of two.
fn atomic_instance(rng: &mut ChaCha8Rng, case: usize) -> Result<(SimpleFunction, SimpleFunction)> {
    let n = rng.random_range(2..=5);
    let denom = if rng.random_bool(0.5) { 8 } else { 16 };
    let weights = dyadic_masses(rng, n, denom);
    let space = Arc::new(MeasureSpace::atomic(&weights)?);
    let y = SimpleFunction::on_atoms(space, (0..n).map(|_| small_int(rng)).collect())?;
    if case % 2 == 0 {
        return Ok((sample_orbit_with(&y, rng), y));
    }
    let points = enumerate_extreme(&y)?;
    let a = points.choose(rng).expect("orbits have extreme points").clone();
    if rng.random_bool(1.0 / 3.0) {
        let b = points.choose(rng).expect("nonempty");
        let mid = a.add(b)?.scale(&Rational::new(1, 2));
        return Ok((mid, y));
    }
    Ok((a, y))
}

fn diffuse_function<R: Rng>(rng: &mut R, space: &Arc<MeasureSpace>, atoms: usize) -> Result<SimpleFunction> {
    let diffuse = space.diffuse_mass().clone();
    let k = rng.random_range(1..=5);
    let pieces = dyadic_masses(rng, k, 16)
        .into_iter()
        .map(|m| Piece::new(small_int(rng), m * &diffuse))
        .collect();
    SimpleFunction::new(space.clone(), (0..atoms).map(|_| small_int(rng)).collect(), pieces)
}

/// A rearrangement of `y`: pieces shuffled, some split in two.
fn rearrangement_of<R: Rng>(y: &SimpleFunction, rng: &mut R) -> Result<SimpleFunction> {
    let mut pieces = Vec::new();
    for p in y.pieces() {
        if rng.random_bool(0.5) {
            let cut = Rational::new(rng.random_range(1..4), 4);
            pieces.push(Piece::new(p.value.clone(), &p.mass * &cut));
            pieces.push(Piece::new(p.value.clone(), &p.mass * (Rational::one() - cut)));
        } else {
            pieces.push(p.clone());
        }
    }
    pieces.shuffle(rng);
    SimpleFunction::new(y.space().clone(), y.atom_values().to_vec(), pieces)
}

/// A purely diffuse pair for criterion 3.
fn diffuse_instance(rng: &mut ChaCha8Rng, case: usize) -> Result<(SimpleFunction, SimpleFunction)> {
    let space = Arc::new(MeasureSpace::atomless());
    let y = diffuse_function(rng, &space, 0)?;
    let x = match case % 3 {
        0 => rearrangement_of(&y, rng)?,
        1 => sample_orbit_with(&crate::measure::refine_diffuse(&y, 2), rng),
        _ => {
            let r = crate::measure::refine_diffuse(&y, rng.random_range(1..=3));
            let cells: Vec<usize> = (0..r.pieces().len()).collect();
            let pick: Vec<usize> = cells.choose_multiple(rng, 2.min(cells.len())).copied().collect();
            partial_average(&r, &pick)?
        }
    };
    Ok((x, y))
}

/// Atoms and diffuse mass together, for criterion 4.
fn mixed_instance(rng: &mut ChaCha8Rng) -> Result<(SimpleFunction, SimpleFunction)> {
    let atoms = rng.random_range(1..=3);
    let masses = dyadic_masses(rng, atoms + 1, 16);
    let space = Arc::new(MeasureSpace::new(
        masses[..atoms]
            .iter()
            .enumerate()
            .map(|(i, w)| Atom { id: format!("e{i}"), weight: w.clone() })
            .collect(),
        masses[atoms].clone(),
    )?);
    let y = diffuse_function(rng, &space, atoms)?;
    let base = if rng.random_bool(0.5) { crate::measure::refine_diffuse(&y, 2) } else { y.clone() };
    Ok((sample_orbit_with(&base, rng), y))
}

// ---------------------------------------------------------------------------
// criteria

fn criterion_oracle(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut r = CriterionResult::new(1, "criterion agrees with the subset-polytope rank oracle");
    r.budget_seconds = Some(60.0);
    for case in 0..cfg.count(1000) {
        let mut rng = cfg.rng(1, case);
        let outcome = atomic_instance(&mut rng, case)
            .and_then(|(x, y)| Ok(cfg.verdict(&x, &y)? == oracle_extreme(&x, &y)?));
        r.check_result(outcome, || format!("instance {case}"));
    }
    r
}

fn multiset_permutations(values: &[Rational]) -> BTreeSet<Vec<Rational>> {
    fn go(rest: &mut Vec<Rational>, cur: &mut Vec<Rational>, out: &mut BTreeSet<Vec<Rational>>) {
        if rest.is_empty() {
            out.insert(cur.clone());
            return;
        }
        for i in 0..rest.len() {
            let v = rest.remove(i);
            cur.push(v.clone());
            go(rest, cur, out);
            cur.pop();
            rest.insert(i, v);
        }
    }
    let mut out = BTreeSet::new();
    go(&mut values.to_vec(), &mut Vec::new(), &mut out);
    out
}

fn partitions(n: usize, max: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn criterion_permutations(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut r = CriterionResult::new(2, "equal weights: extreme points are the multiset permutations");
    for n in 1..=6 {
        let space = Arc::new(MeasureSpace::uniform(n));
        for (p, pattern) in partitions(n, n).into_iter().enumerate() {
            // multiplicities from the partition, values distinct per block
            let mut values: Vec<Rational> = pattern
                .iter()
                .enumerate()
                .flat_map(|(b, &m)| std::iter::repeat_n(Rational::from_int(3 * b as i64 - 4), m))
                .collect();
            values.shuffle(&mut cfg.rng(2, n * 100 + p));
            let expected_count = factorial(n) / pattern.iter().map(|&m| factorial(m)).product::<usize>();
            let outcome = SimpleFunction::on_atoms(space.clone(), values.clone()).and_then(|y| {
                let got: BTreeSet<Vec<Rational>> =
                    enumerate_extreme(&y)?.iter().map(|x| x.atom_values().to_vec()).collect();
                let want = multiset_permutations(&values);
                Ok(got == want && got.len() == expected_count)
            });
            r.check_result(outcome, || format!("n={n}, multiplicities {pattern:?}"));
        }
    }
    r
}

fn criterion_ryff(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut r = CriterionResult::new(3, "diffuse spaces: extreme iff equimeasurable with y");
    for case in 0..cfg.count(500) {
        let mut rng = cfg.rng(3, case);
        let outcome = diffuse_instance(&mut rng, case)
            .and_then(|(x, y)| Ok(cfg.verdict(&x, &y)? == (rearrange(&x) == rearrange(&y))));
        r.check_result(outcome, || format!("instance {case}"));
    }
    r
}

fn witness_sound(cfg: &AcceptanceConfig, x: &SimpleFunction, y: &SimpleFunction) -> Result<Option<bool>> {
    let verdict = check_extreme(x, y)?;
    let flipped = cfg.fault == Some(Fault::FlipVerdict);
    if verdict.is_extreme() != flipped {
        return Ok(None);
    }
    let Some(w) = verdict.witness else { return Ok(Some(false)) };
    let mut ok = verify_witness(x, y, &w);
    // on atomic spaces, membership again through the subset inequalities
    if x.space().is_purely_atomic() {
        ok &= subset_majorises(&w.x_plus, y)? && subset_majorises(&w.x_minus, y)?;
    }
    Ok(Some(ok))
}

fn criterion_witness(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut r = CriterionResult::new(4, "every non-extreme verdict carries a verified witness");
    let target = cfg.count(1000);
    let record = |r: &mut CriterionResult, res: Result<Option<bool>>, what: String| match res {
        Ok(None) => {}
        Ok(Some(ok)) => r.check(ok, || what),
        Err(e) => r.check(false, || format!("{what}: {e}")),
    };
    for case in 0..cfg.count(1000) {
        let mut rng = cfg.rng(1, case);
        let res = atomic_instance(&mut rng, case).and_then(|(x, y)| witness_sound(cfg, &x, &y));
        record(&mut r, res, format!("atomic instance {case}"));
    }
    for case in 0..cfg.count(500) {
        let mut rng = cfg.rng(3, case);
        let res = diffuse_instance(&mut rng, case).and_then(|(x, y)| witness_sound(cfg, &x, &y));
        record(&mut r, res, format!("diffuse instance {case}"));
    }
    let from_pools = r.cases;
    let mut drawn = 0;
    while drawn < 20 * target.max(1) && (drawn < target / 2 || r.cases < target) {
        let mut rng = cfg.rng(4, drawn);
        let res = mixed_instance(&mut rng).and_then(|(x, y)| witness_sound(cfg, &x, &y));
        record(&mut r, res, format!("mixed instance {drawn}"));
        drawn += 1;
    }
    r.notes.push(format!("{from_pools} cases from criteria 1 and 3, {} from {drawn} mixed-space draws", r.cases - from_pools));
    if r.cases < target {
        r.failure_count += 1;
        r.failures.push(format!("only {} non-extreme cases, need {target}", r.cases));
    }
    r
}

/// Random zero-integral directions on the layout of `x`.
fn random_direction<R: Rng>(x: &SimpleFunction, rng: &mut R) -> Result<Option<SimpleFunction>> {
    let atoms: Vec<Rational> = x.atom_values().iter().map(|_| Rational::from_int(rng.random_range(-3..=3))).collect();
    let pieces: Vec<Piece> =
        x.pieces().iter().map(|p| Piece::new(Rational::from_int(rng.random_range(-3..=3)), p.mass.clone())).collect();
    let u = SimpleFunction::new(x.space().clone(), atoms, pieces)?;
    let centred = u.shift(&-u.integral());
    Ok(if centred.is_zero_ae() { None } else { Some(centred) })
}

/// No sampled direction admits a two-sided step inside Ω(y).
fn rigid_under_perturbation(
    x: &SimpleFunction,
    y: &SimpleFunction,
    rng: &mut ChaCha8Rng,
    samples: usize,
) -> Result<bool> {
    let x = if x.space().is_purely_atomic() { x.clone() } else { crate::measure::refine_diffuse(x, 2) };
    for _ in 0..samples {
        if let Some(u) = random_direction(&x, rng)? {
            if admissible_delta(&x, y, &u)?.is_positive() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn null_atom_space() -> Arc<MeasureSpace> {
    Arc::new(
        MeasureSpace::new(vec![Atom { id: "e".into(), weight: rat("1/2") }], rat("1/2")).expect("valid space"),
    )
}

fn criterion_golden(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut r = CriterionResult::new(5, "golden weighted examples");
    let mut rng = cfg.rng(5, 0);

    let abc = Arc::new(
        MeasureSpace::new(
            ["a", "b", "c"]
                .iter()
                .zip(["1/2", "1/4", "1/4"])
                .map(|(id, w)| Atom { id: id.to_string(), weight: rat(w) })
                .collect(),
            Rational::zero(),
        )
        .expect("valid space"),
    );
    let on = |s: &Arc<MeasureSpace>, v: &[&str]| SimpleFunction::on_atoms(s.clone(), v.iter().map(|t| rat(t)).collect());
    let res = (|| -> Result<bool> {
        let (x, y) = (on(&abc, &["3", "4", "0"])?, on(&abc, &["4", "2", "0"])?);
        let conds: Vec<Option<u8>> =
            evaluate_criterion(&x, &rearrange(&y))?.iter().map(|iv| iv.condition.map(Condition::number)).collect();
        let middle = &evaluate_criterion(&x, &rearrange(&y))?[1];
        Ok(cfg.verdict(&x, &y)?
            && conds == vec![Some(1), Some(2), Some(1)]
            && middle.interval.t1 == rat("1/4")
            && middle.interval.t2 == rat("3/4")
            && oracle_extreme(&x, &y)?
            && rigid_under_perturbation(&x, &y, &mut rng, 200)?)
    })();
    r.check_result(res, || "weights (1/2,1/4,1/4), y=(4,2,0), x=(3,4,0)".into());

    let two = Arc::new(MeasureSpace::new(
        vec![Atom { id: "A".into(), weight: rat("2/3") }, Atom { id: "B".into(), weight: rat("1/3") }],
        Rational::zero(),
    )
    .expect("valid space"));
    let res = (|| -> Result<bool> {
        let y = on(&two, &["3", "0"])?;
        let got: Vec<Vec<Rational>> = enumerate_extreme(&y)?.iter().map(|x| x.atom_values().to_vec()).collect();
        let want = vec![vec![rat("3"), rat("0")], vec![rat("3/2"), rat("3")]];
        // exhaustive grid: x_A = k/16 on the line 2x_A/3 + x_B/3 = 2
        let mut grid_extreme = Vec::new();
        for k in -32..=96 {
            let a = Rational::new(k, 16);
            let x = SimpleFunction::on_atoms(two.clone(), vec![a.clone(), Rational::from_int(6) - &a * rat("2")])?;
            if subset_majorises(&x, &y)? && oracle_extreme(&x, &y)? {
                grid_extreme.push(x.atom_values().to_vec());
            }
        }
        grid_extreme.sort_by(|a, b| b.cmp(a));
        Ok(got == want && grid_extreme == want)
    })();
    r.check_result(res, || "weights (2/3,1/3), y=(3,0): extreme set {(3,0),(3/2,3)}".into());

    let space = null_atom_space();
    let res = (|| -> Result<bool> {
        let y = SimpleFunction::new(
            space.clone(),
            vec![Rational::zero()],
            vec![Piece::new(rat("4"), rat("1/4")), Piece::new(rat("2"), rat("1/4"))],
        )?;
        let x = SimpleFunction::new(space.clone(), vec![rat("3")], vec![Piece::new(Rational::zero(), rat("1/2"))])?;
        Ok(cfg.verdict(&x, &y)? && rigid_under_perturbation(&x, &y, &mut rng, 200)?)
    })();
    r.check_result(res, || "diffuse (4,1/4),(2,1/4) with a null atom; x = 0 and 3 on the atom".into());
    r
}

/// `⌊64·4/√(j+1)⌋/64` on `[j/16, (j+1)/16)`, `j < 8`: a dyadic step
/// approximation of `1/√t` on `(0, 1/2)`.
pub fn inverse_root_steps() -> Vec<Rational> {
    (0..8).map(|j| Rational::new((256.0 / ((j + 1) as f64).sqrt()).floor() as i64, 64)).collect()
}

fn criterion_truncations(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut r = CriterionResult::new(6, "truncations f·χ(0,a) with the tail mass on the null atom are extreme");
    let space = null_atom_space();
    let values = inverse_root_steps();
    let len = rat("1/16");
    let mut rng = cfg.rng(6, 0);
    for m in 0..=8usize {
        let res = (|| -> Result<bool> {
            let y = SimpleFunction::new(
                space.clone(),
                vec![Rational::zero()],
                values.iter().map(|v| Piece::new(v.clone(), len.clone())).collect(),
            )?;
            let tail: Rational = values[m..].iter().map(|v| v * &len).sum();
            let pieces = values
                .iter()
                .enumerate()
                .map(|(j, v)| Piece::new(if j < m { v.clone() } else { Rational::zero() }, len.clone()))
                .collect();
            let x = SimpleFunction::new(space.clone(), vec![tail * rat("2")], pieces)?;
            // the atom equals ∫ over the tail once more, through Φ_y
            let a = Rational::new(m as i64, 16);
            let check_tail = (cumulative(&rearrange(&y), &rat("1/2"))? - cumulative(&rearrange(&y), &a)?) * rat("2");
            Ok(x.atom_values()[0] == check_tail
                && cfg.verdict(&x, &y)?
                && rigid_under_perturbation(&x, &y, &mut rng, 50)?)
        })();
        r.check_result(res, || format!("a = {m}/16"));
    }
    r
}

fn criterion_matrix(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut r = CriterionResult::new(7, "matrix model: Schur, diagonal extremality, Birkhoff, T-transforms");
    let count = cfg.count(200);
    for case in 0..count {
        let mut rng = cfg.rng(7, case);
        let n = rng.random_range(1..=8);
        let res = (|| -> Result<bool> {
            let y = HermitianOperator::new(random_hermitian(n, &mut rng), Some(1e-8))?;
            let u = random_unitary(n, &mut rng);
            Ok(schur_horn_check(&y, &u)?.holds)
        })();
        r.check_result(res, || format!("Schur inclusion {case} (n={n})"));
    }
    for case in 0..count {
        let mut rng = cfg.rng(7, count + case);
        let n = rng.random_range(1..=8);
        let res = diag_instance(cfg, &mut rng, n, case);
        r.check_result(res, || format!("diagonal extremality {case} (n={n})"));
    }
    for case in 0..count {
        let mut rng = cfg.rng(7, 2 * count + case);
        let n = rng.random_range(1..=8);
        let res = (|| -> Result<bool> {
            let s = DoublyStochastic::new(random_doubly_stochastic(n, rng.random_range(1..=6), &mut rng), 1e-12)?;
            let d = birkhoff_decompose(&s, 1e-12)?;
            Ok(d.residual <= 1e-10
                && d.terms.len() <= (n - 1) * (n - 1) + 1
                && (d.coefficient_sum() - 1.0).abs() <= 1e-10)
        })();
        r.check_result(res, || format!("Birkhoff {case} (n={n})"));
    }
    for case in 0..count {
        let mut rng = cfg.rng(7, 3 * count + case);
        let n = rng.random_range(1..=8);
        let res = (|| -> Result<bool> {
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let s = DoublyStochastic::new(random_doubly_stochastic(n, rng.random_range(1..=4), &mut rng), 1e-12)?;
            let x = s.apply(&y);
            let chain = t_transform_chain(&x, &y, 1e-12)?;
            let image = chain.matrix.apply(&y);
            let err = image.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok(err <= 1e-10
                && chain.steps.len() < n.max(1)
                && DoublyStochastic::new(chain.matrix.entries.clone(), 1e-10).is_ok())
        })();
        r.check_result(res, || format!("T-transform {case} (n={n})"));
    }
    r
}

/// `y = U diag(v) U*` with small integer `v`, and a diagonal `x` built
/// exactly as a partial average of `v` or a permutation of it. The spectral
/// verdict is compared with the exact verdict on the rational data.
fn diag_instance(cfg: &AcceptanceConfig, rng: &mut ChaCha8Rng, n: usize, case: usize) -> Result<bool> {
    let space = Arc::new(MeasureSpace::uniform(n));
    let v: Vec<Rational> = (0..n).map(|_| Rational::from_int(rng.random_range(-3..=4))).collect();
    let yf = SimpleFunction::on_atoms(space.clone(), v.clone())?;
    let xf = if case % 2 == 0 {
        let mut p = v.clone();
        p.shuffle(rng);
        SimpleFunction::on_atoms(space, p)?
    } else {
        sample_orbit_with(&yf, rng)
    };
    let u = random_unitary(n, rng);
    let vf: Vec<f64> = v.iter().map(Rational::to_f64).collect();
    let ym = u.mul(&CMatrix::from_real_diagonal(&vf)).mul(&u.adjoint());
    let y = HermitianOperator::new(ym, Some(1e-8))?;
    let xv: Vec<f64> = xf.atom_values().iter().map(Rational::to_f64).collect();
    let x = HermitianOperator::diagonal(&xv).with_tol(1e-8);
    let spectral = check_extreme_diag(&x, &y)?;
    let exact = cfg.verdict(&xf, &yf)?;
    Ok(spectral.model_checked && spectral.extreme == exact)
}

fn criterion_identities(cfg: &AcceptanceConfig) -> CriterionResult {
    let mut r = CriterionResult::new(8, "trace identities, supremum, sandwich and midpoint checks");
    let trials = cfg.count(200);
    for n in 1..=6 {
        match identity_suite(cfg.seed.wrapping_add(n as u64), n, trials, 1e-8) {
            Ok(rep) => {
                for (name, t) in [
                    ("trace bounds", &rep.trace_bounds),
                    ("projection supremum", &rep.projection_sup),
                    ("sandwich", &rep.sandwich),
                    ("midpoint", &rep.midpoint),
                ] {
                    for _ in 0..t.passed {
                        r.check(true, String::new);
                    }
                    for _ in 0..t.failed {
                        r.check(false, || format!("n={n} {name}: {:?}", rep.failures));
                    }
                }
            }
            Err(e) => r.check(false, || format!("n={n}: {e}")),
        }
    }
    r
}
