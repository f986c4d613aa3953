use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::dense::CMatrix;
use super::eigen::{hermitian_eigen, Eigen};
use crate::error::{Error, Result};
use crate::extremality::is_extreme;
use crate::measure::{MeasureSpace, SimpleFunction};
use crate::rational::Rational;
use crate::scales::{majorises, MajorisationReport, Slack, StepScale};

/// Relative factor in the default comparison tolerance.
pub const DEFAULT_RELATIVE_TOL: f64 = 1e-9;

/// A Hermitian matrix under the normalized trace `τ = trace / n`.
#[derive(Clone, Debug)]
pub struct HermitianOperator {
    matrix: CMatrix,
    tol: f64,
}

/// Largest absolute row sum; bounds the spectral radius.
fn radius_estimate(m: &CMatrix) -> f64 {
    let n = m.n();
    (0..n).map(|i| (0..n).map(|j| m[(i, j)].norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn default_tol(m: &CMatrix) -> f64 {
    DEFAULT_RELATIVE_TOL * (1.0 + radius_estimate(m))
}

impl HermitianOperator {
    /// Checks `‖A − A*‖_max ≤ tol` and stores the Hermitian part.
    pub fn new(matrix: CMatrix, tol: Option<f64>) -> Result<Self> {
        let tol = tol.unwrap_or_else(|| default_tol(&matrix));
        if !(tol >= 0.0) {
            return Err(Error::Schema(format!("tolerance {tol} must be nonnegative")));
        }
        if matrix.data().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Schema("matrix entries must be finite".into()));
        }
        let dev = matrix.hermitian_deviation();
        if dev > tol {
            return Err(Error::NotHermitian(dev));
        }
        let matrix = matrix.add(&matrix.adjoint()).scale(0.5);
        Ok(HermitianOperator { matrix, tol })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::new(CMatrix::from_real_diagonal(values), None).expect("real diagonal is Hermitian")
    }

    pub fn from_real_rows(rows: &[Vec<f64>], tol: Option<f64>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Schema("matrix must be square".into()));
        }
        let data = rows.iter().flatten().map(|v| Complex64::new(*v, 0.0)).collect();
        Self::new(CMatrix::from_vec(n, data), tol)
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re / self.n() as f64
    }

    pub fn eigen(&self) -> Result<Eigen> {
        hermitian_eigen(&self.matrix)
    }

    pub fn to_document(&self) -> MatrixDoc {
        let n = self.n();
        let rows = |f: fn(&Complex64) -> f64| -> Vec<Vec<NumberOrRat>> {
            (0..n).map(|i| (0..n).map(|j| NumberOrRat::Number(f(&self.matrix[(i, j)]))).collect()).collect()
        };
        MatrixDoc { n, re: rows(|z| z.re), im: Some(rows(|z| z.im)), tol: Some(self.tol) }
    }
}

/// A real number given either as a JSON number or as a rational string.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumberOrRat {
    Number(f64),
    Rat(Rational),
}

impl NumberOrRat {
    pub fn value(&self) -> f64 {
        match self {
            NumberOrRat::Number(v) => *v,
            NumberOrRat::Rat(r) => r.to_f64(),
        }
    }
}

/// `{"n": 2, "re": [[..],[..]], "im": [[..],[..]]}`; `im` defaults to zero.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixDoc {
    pub n: usize,
    pub re: Vec<Vec<NumberOrRat>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<NumberOrRat>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

impl MatrixDoc {
    pub fn to_matrix(&self) -> Result<CMatrix> {
        let n = self.n;
        let shape_ok = |m: &Vec<Vec<NumberOrRat>>| m.len() == n && m.iter().all(|r| r.len() == n);
        if !shape_ok(&self.re) || self.im.as_ref().is_some_and(|m| !shape_ok(m)) {
            return Err(Error::Schema(format!("matrix rows must form an {n}x{n} array")));
        }
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let im = self.im.as_ref().map_or(0.0, |m| m[i][j].value());
                data.push(Complex64::new(self.re[i][j].value(), im));
            }
        }
        Ok(CMatrix::from_vec(n, data))
    }

    pub fn hermitian(&self, tol: Option<f64>) -> Result<HermitianOperator> {
        HermitianOperator::new(self.to_matrix()?, tol.or(self.tol))
    }
}

pub fn parse_matrix(document: &str) -> Result<MatrixDoc> {
    serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))
}

/// `λ(A)` for a matrix: descending eigenvalues, each of length `1/n`, with
/// values within `tol` of their neighbour merged into one step carrying
/// the cluster mean.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralScale {
    pub n: usize,
    pub steps: Vec<SpectralStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralStep {
    pub value: f64,
    pub multiplicity: usize,
}

impl SpectralScale {
    pub fn from_values(values: &[f64], tol: f64) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let mut steps: Vec<(f64, usize, f64)> = Vec::new();
        for v in sorted {
            match steps.last_mut() {
                Some((sum, count, last)) if (*last - v).abs() <= tol => {
                    *sum += v;
                    *count += 1;
                    *last = v;
                }
                _ => steps.push((v, 1, v)),
            }
        }
        let steps = steps
            .into_iter()
            .map(|(sum, count, _)| SpectralStep { value: sum / count as f64, multiplicity: count })
            .collect();
        SpectralScale { n: values.len(), steps }
    }

    /// Eigenvalues with multiplicity, descending.
    pub fn values(&self) -> Vec<f64> {
        self.steps.iter().flat_map(|s| std::iter::repeat_n(s.value, s.multiplicity)).collect()
    }

    /// Step ends as counts `k` (the breakpoint is `k/n`).
    fn ends(&self) -> Vec<usize> {
        self.steps
            .iter()
            .scan(0, |acc, s| {
                *acc += s.multiplicity;
                Some(*acc)
            })
            .collect()
    }

    /// `Φ(k/n)` for `k = 0..=n`.
    pub fn partial_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0];
        for v in self.values() {
            out.push(out.last().expect("nonempty") + v / self.n as f64);
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let steps: Vec<_> = self
            .steps
            .iter()
            .map(|s| {
                serde_json::json!({
                    "value": s.value,
                    "length": Rational::new(s.multiplicity as i64, self.n as i64).to_string(),
                })
            })
            .collect();
        serde_json::json!({ "n": self.n, "steps": steps, "eigenvalues": self.values() })
    }

    /// The exact step scale obtained by replacing each value with a nearby
    /// rational, if every value has one within `tol`.
    pub fn snap(&self, tol: f64) -> Option<StepScale> {
        let pairs: Option<Vec<(Rational, Rational)>> = self
            .steps
            .iter()
            .map(|s| Some((snap_rational(s.value, tol)?, Rational::new(s.multiplicity as i64, self.n as i64))))
            .collect();
        StepScale::from_pairs(pairs?).ok()
    }
}

const SNAP_MAX_DENOM: i64 = 1 << 20;

/// The first continued-fraction convergent of `v` within `tol`, with
/// denominator at most 2²⁰.
pub fn snap_rational(v: f64, tol: f64) -> Option<Rational> {
    if !v.is_finite() || v.abs() > 1e12 {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut rest = v;
    for _ in 0..64 {
        let a = rest.floor();
        let (p2, q2) = (a as i64 * p1 + p0, a as i64 * q1 + q0);
        if q2 > SNAP_MAX_DENOM {
            return None;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if (v - p1 as f64 / q1 as f64).abs() <= tol {
            return Some(Rational::new(p1, q1));
        }
        let frac = rest - a;
        if frac == 0.0 {
            return None;
        }
        rest = 1.0 / frac;
    }
    None
}

pub fn eig_scale(a: &HermitianOperator) -> Result<SpectralScale> {
    Ok(SpectralScale::from_values(&a.eigen()?.values, a.tol()))
}

/// `x ≺ y` on spectral scales of equal dimension, with every comparison
/// relaxed by `tol`.
pub fn majorise_spectral(x: &SpectralScale, y: &SpectralScale, tol: f64) -> Result<MajorisationReport<f64>> {
    if x.n != y.n {
        return Err(Error::DimensionMismatch(x.n, y.n));
    }
    let n = x.n;
    let (px, py) = (x.partial_sums(), y.partial_sums());
    let mut ks: Vec<usize> = x.ends().into_iter().chain(y.ends()).filter(|&k| k < n).collect();
    ks.sort_unstable();
    ks.dedup();
    let slacks: Vec<Slack<f64>> =
        ks.into_iter().map(|k| Slack { t: k as f64 / n as f64, slack: py[k] - px[k] }).collect();
    let total_gap = py[n] - px[n];
    let holds = total_gap.abs() <= tol && slacks.iter().all(|s| s.slack >= -tol);
    Ok(MajorisationReport { holds, breakpoint_slacks: slacks, total_gap })
}

pub fn matrix_majorise(x: &HermitianOperator, y: &HermitianOperator) -> Result<MajorisationReport<f64>> {
    if x.n() != y.n() {
        return Err(Error::DimensionMismatch(x.n(), y.n()));
    }
    let tol = x.tol().max(y.tol());
    majorise_spectral(&eig_scale(x)?, &eig_scale(y)?, tol)
}

/// Compression onto the diagonal masa.
pub fn diag_expectation(a: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::diagonal(&a.matrix().real_diagonal()).with_tol(a.tol())
}

/// `diag(U y U*) ≺ λ(y)`.
pub fn schur_horn_check(y: &HermitianOperator, u: &CMatrix) -> Result<MajorisationReport<f64>> {
    if u.n() != y.n() {
        return Err(Error::DimensionMismatch(u.n(), y.n()));
    }
    let dev = u.unitary_deviation();
    if dev > y.tol().max(DEFAULT_RELATIVE_TOL * u.n() as f64) {
        return Err(Error::NotUnitary(dev));
    }
    let conj = u.mul(y.matrix()).mul(&u.adjoint());
    let tol = y.tol();
    let diag = SpectralScale::from_values(&conj.real_diagonal(), tol);
    majorise_spectral(&diag, &eig_scale(y)?, tol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagExtremality {
    pub extreme: bool,
    /// Whether the equal-weight atomic model could be built exactly and was
    /// compared. A disagreement is reported as an invariant violation.
    pub model_checked: bool,
}

/// For diagonal `x ≺ y`: extreme iff `λ(x) = λ(y)` within tolerance.
pub fn check_extreme_diag(x: &HermitianOperator, y: &HermitianOperator) -> Result<DiagExtremality> {
    let off = x.matrix().off_diagonal_max();
    if off > x.tol() {
        return Err(Error::NotDiagonal(off));
    }
    if !matrix_majorise(x, y)?.holds {
        return Err(Error::NotInOrbit);
    }
    let tol = x.tol().max(y.tol());
    let lx = SpectralScale::from_values(&x.matrix().real_diagonal(), tol);
    let ly = eig_scale(y)?;
    let extreme = lx.values().iter().zip(ly.values()).all(|(a, b)| (a - b).abs() <= tol);

    let model = atomic_model(&x.matrix().real_diagonal(), tol)
        .zip(atomic_model(&ly.values(), tol))
        .filter(|(mx, my)| majorises(mx, my));
    let model_checked = model.is_some();
    if let Some((mx, my)) = model {
        let exact = is_extreme(&mx, &my)?;
        if exact != extreme {
            return Err(Error::Invariant(format!(
                "spectral verdict {extreme} disagrees with the atomic model verdict {exact}"
            )));
        }
    }
    Ok(DiagExtremality { extreme, model_checked })
}

/// `v` as a function on `n` atoms of weight `1/n`, if every entry snaps to
/// a rational.
pub fn atomic_model(v: &[f64], tol: f64) -> Option<SimpleFunction> {
    let values: Option<Vec<Rational>> = v.iter().map(|x| snap_rational(*x, tol)).collect();
    let space = Arc::new(MeasureSpace::uniform(v.len()));
    SimpleFunction::on_atoms(space, values?).ok()
}
