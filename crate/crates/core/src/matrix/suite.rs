//! Seeded randomized checks of trace identities for Hermitian matrices.
//!
//! * `trace_bounds`: `∫λ(x)λ̌(y) ≤ τ(xy) ≤ ∫λ(x)λ(y)`.
//! * `projection_sup`: `τ(xP) ≤ Φ_x(k/n)` for rank-`k` projections, with
//!   equality at the top-`k` spectral projection.
//! * `sandwich`: a rank-`k` projection attaining `Φ_x(k/n)` lies between
//!   the spectral projections `E(λ, ∞)` and `E[λ, ∞)` for `λ = λ(k/n; x)`.
//! * `midpoint`: distinct `x₁, x₂` with equal spectra have a midpoint with
//!   a different spectrum.
//!
//! Trial `i` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `i`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::dense::CMatrix;
use super::eigen::{hermitian_eigen, Eigen};
use super::random::{random_hermitian, random_projection, random_unitary, random_with_spectrum};
use crate::error::{Error, Result};

pub const SUITE_MAX_DIM: usize = 12;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CheckTally {
    pub passed: usize,
    pub failed: usize,
}

impl CheckTally {
    fn record(&mut self, ok: bool) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    pub tol: f64,
    pub trace_bounds: CheckTally,
    pub projection_sup: CheckTally,
    pub sandwich: CheckTally,
    pub midpoint: CheckTally,
    /// First few failures as `trial: check`.
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn violations(&self) -> usize {
        self.trace_bounds.failed + self.projection_sup.failed + self.sandwich.failed + self.midpoint.failed
    }

    fn fail(&mut self, trial: usize, what: &str) {
        if self.failures.len() < 20 {
            self.failures.push(format!("{trial}: {what}"));
        }
    }
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.n();
    let mut s = 0.0;
    for i in 0..n {
        for k in 0..n {
            s += (a[(i, k)] * b[(k, i)]).re;
        }
    }
    s / n as f64
}

/// `Σ_{i<k} λᵢ / n`.
fn top_sum(values: &[f64], k: usize) -> f64 {
    values[..k].iter().sum::<f64>() / values.len() as f64
}

/// Spectral projection onto eigenvalues selected by `keep`.
fn spectral_projection(e: &Eigen, keep: impl Fn(f64) -> bool) -> CMatrix {
    let cols: Vec<usize> = (0..e.values.len()).filter(|&i| keep(e.values[i])).collect();
    e.vectors.column_projection(&cols)
}

/// `p ≤ q` for projections: `q p = p`.
fn below(p: &CMatrix, q: &CMatrix, tol: f64) -> bool {
    q.mul(p).sub(p).max_abs() <= tol
}

fn sandwiched(x: &Eigen, e: &CMatrix, k: usize, tol: f64) -> bool {
    let n = x.values.len();
    let level = x.values[k.min(n - 1)];
    let lower = spectral_projection(x, |v| v > level + tol);
    let upper = spectral_projection(x, |v| v >= level - tol);
    below(&lower, e, tol) && below(e, &upper, tol)
}

/// Runs `trials` seeded trials of all four checks in dimension `n`.
pub fn identity_suite(seed: u64, n: usize, trials: usize, tol: f64) -> Result<SuiteReport> {
    if n == 0 || n > SUITE_MAX_DIM {
        return Err(Error::SizeLimit { size: n, limit: SUITE_MAX_DIM });
    }
    let mut report = SuiteReport { seed, n, trials, tol, ..SuiteReport::default() };
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial as u64);
        run_trial(&mut rng, n, tol, trial, &mut report)?;
    }
    Ok(report)
}

fn run_trial(rng: &mut ChaCha8Rng, n: usize, tol: f64, trial: usize, report: &mut SuiteReport) -> Result<()> {
    let x = random_hermitian(n, rng);
    let y = random_hermitian(n, rng);
    let ex = hermitian_eigen(&x)?;
    let ey = hermitian_eigen(&y)?;
    // trace comparisons are quadratic in the entries, spectral ones linear
    let rho = ex.values.iter().chain(&ey.values).map(|v| v.abs()).fold(0.0, f64::max);
    let eps = tol * (1.0 + rho * rho);
    let eps_spectral = tol * (1.0 + rho);

    // trace bounds
    let t = trace_product(&x, &y);
    let upper: f64 = ex.values.iter().zip(&ey.values).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let lower: f64 = ex.values.iter().zip(ey.values.iter().rev()).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let ok = lower <= t + eps && t <= upper + eps;
    report.trace_bounds.record(ok);
    if !ok {
        report.fail(trial, "trace_bounds");
    }

    // projection supremum
    let k = rng.random_range(1..=n);
    let p = random_projection(n, k, rng);
    let cap = top_sum(&ex.values, k);
    let top = ex.vectors.column_projection(&(0..k).collect::<Vec<_>>());
    let ok = trace_product(&x, &p) <= cap + eps && (trace_product(&x, &top) - cap).abs() <= eps;
    report.projection_sup.record(ok);
    if !ok {
        report.fail(trial, "projection_sup");
    }

    // sandwich: a spectrum with a repeated value straddling k, and a random
    // projection attaining the supremum inside the degenerate eigenspace
    let (xd, e, kd) = degenerate_maximiser(n, rng);
    let ed = hermitian_eigen(&xd)?;
    let attains = (trace_product(&xd, &e) - top_sum(&ed.values, kd)).abs() <= eps;
    let ok = attains && sandwiched(&ed, &e, kd, eps_spectral);
    report.sandwich.record(ok);
    if !ok {
        report.fail(trial, "sandwich");
    }
    // random projections that happen to attain it are checked too
    if (trace_product(&x, &p) - cap).abs() <= eps {
        let ok = sandwiched(&ex, &p, k, eps_spectral);
        report.sandwich.record(ok);
        if !ok {
            report.fail(trial, "sandwich (random projection)");
        }
    }

    // midpoint
    let spectrum = ex.values.clone();
    let x1 = random_with_spectrum(&spectrum, rng);
    let x2 = random_with_spectrum(&spectrum, rng);
    let mid = x1.add(&x2).scale(0.5);
    let em = hermitian_eigen(&mid)?;
    let spread = em.values.iter().zip(&spectrum).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let ok = x1.sub(&x2).max_abs() <= eps || spread > eps;
    report.midpoint.record(ok);
    if !ok {
        report.fail(trial, "midpoint");
    }
    Ok(())
}

/// `x = U diag(λ) U*` whose spectrum repeats a value across positions
/// `k − 1` and `k`, and a rank-`k` projection `e` attaining `Φ_x(k/n)`: the
/// strictly larger eigenvectors plus a random part of the repeated
/// eigenspace.
fn degenerate_maximiser(n: usize, rng: &mut ChaCha8Rng) -> (CMatrix, CMatrix, usize) {
    let mut values: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    let k = if n == 1 { 1 } else { rng.random_range(1..n) };
    let (lo, hi) = if n == 1 { (0, 1) } else { (k - 1, k + 1) };
    let repeated = values[k - 1];
    values[lo..hi].iter_mut().for_each(|v| *v = repeated);
    values.sort_by(|a, b| b.total_cmp(a));
    let first = values.iter().position(|v| *v == repeated).expect("present");
    let count = values.iter().filter(|v| **v == repeated).count();

    let u = random_unitary(n, rng);
    let x = u.mul(&CMatrix::from_real_diagonal(&values)).mul(&u.adjoint());

    let cols: Vec<usize> = (0..first).collect();
    let need = k - first;
    let block = random_unitary(count, rng);
    let mut picks: Vec<usize> = (0..count).collect();
    picks.shuffle(rng);
    let mut basis = CMatrix::zeros(n);
    // columns of u spanning the repeated eigenspace, rotated by `block`
    for (c, &src) in picks.iter().take(need).enumerate() {
        for i in 0..n {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for m in 0..count {
                acc += u[(i, first + m)] * block[(m, src)];
            }
            basis[(i, c)] = acc;
        }
    }
    let e = basis.column_projection(&(0..need).collect::<Vec<_>>()).add(&u.column_projection(&cols));
    (x, e, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_case_passes() {
        let r = identity_suite(1, 1, 20, 1e-8).unwrap();
        assert_eq!(r.violations(), 0, "{:?}", r.failures);
        assert_eq!(r.midpoint.passed, 20);
    }

    #[test]
    fn seeded_runs_pass_and_repeat() {
        let r = identity_suite(7, 5, 200, 1e-8).unwrap();
        assert_eq!(r.violations(), 0, "{:?}", r.failures);
        assert_eq!(r, identity_suite(7, 5, 200, 1e-8).unwrap());
    }

    #[test]
    fn commuting_sorted_pair_attains_upper_bound() {
        let x = CMatrix::from_real_diagonal(&[3.0, 1.0, -2.0]);
        let y = CMatrix::from_real_diagonal(&[5.0, 0.0, -1.0]);
        assert!((trace_product(&x, &y) - (15.0 + 0.0 + 2.0) / 3.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_large_dimension() {
        assert_eq!(identity_suite(1, 13, 1, 1e-8).unwrap_err().code(), "SizeLimit");
    }
}
