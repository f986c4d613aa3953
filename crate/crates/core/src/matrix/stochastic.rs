//! Doubly stochastic matrices: Birkhoff decomposition and T-transform chains.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DoublyStochastic {
    pub n: usize,
    pub entries: Vec<Vec<f64>>,
}

impl DoublyStochastic {
    pub fn new(entries: Vec<Vec<f64>>, tol: f64) -> Result<Self> {
        let n = entries.len();
        if entries.iter().any(|r| r.len() != n) {
            return Err(Error::Schema("matrix must be square".into()));
        }
        for (i, row) in entries.iter().enumerate() {
            if let Some(j) = row.iter().position(|v| !v.is_finite() || *v < -tol) {
                return Err(Error::NotDoublyStochastic(format!("entry ({i},{j}) = {}", row[j])));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::NotDoublyStochastic(format!("row {i} sums to {s}")));
            }
        }
        for j in 0..n {
            let s: f64 = entries.iter().map(|r| r[j]).sum();
            if (s - 1.0).abs() > tol {
                return Err(Error::NotDoublyStochastic(format!("column {j} sums to {s}")));
            }
        }
        Ok(DoublyStochastic { n, entries })
    }

    pub fn identity(n: usize) -> Self {
        let entries = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        DoublyStochastic { n, entries }
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.entries.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
    }

    fn compose(&self, other: &DoublyStochastic) -> DoublyStochastic {
        let n = self.n;
        let entries = (0..n)
            .map(|i| (0..n).map(|j| (0..n).map(|k| self.entries[i][k] * other.entries[k][j]).sum()).collect())
            .collect();
        DoublyStochastic { n, entries }
    }

    fn permutation(perm: &[usize]) -> Self {
        let n = perm.len();
        let mut m = vec![vec![0.0; n]; n];
        for (i, &j) in perm.iter().enumerate() {
            m[i][j] = 1.0;
        }
        DoublyStochastic { n, entries: m }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffTerm {
    pub coefficient: f64,
    /// Row `i` of the permutation matrix has its one in column `permutation[i]`.
    pub permutation: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BirkhoffDecomposition {
    pub terms: Vec<BirkhoffTerm>,
    /// `max |S − Σ cᵢPᵢ|`.
    pub residual: f64,
}

impl BirkhoffDecomposition {
    pub fn reconstruct(&self, n: usize) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; n]; n];
        for t in &self.terms {
            for (i, &j) in t.permutation.iter().enumerate() {
                m[i][j] += t.coefficient;
            }
        }
        m
    }

    pub fn coefficient_sum(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }
}

/// Perfect matching using only entries `> threshold`, by augmenting paths.
fn perfect_matching(m: &[Vec<f64>], threshold: f64) -> Option<Vec<usize>> {
    let n = m.len();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    fn augment(
        m: &[Vec<f64>],
        threshold: f64,
        row: usize,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for col in 0..m.len() {
            if m[row][col] > threshold && !seen[col] {
                seen[col] = true;
                if owner[col].is_none_or(|r| augment(m, threshold, r, seen, owner)) {
                    owner[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }
    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(m, threshold, row, &mut seen, &mut owner) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (col, r) in owner.iter().enumerate() {
        perm[r.expect("perfect")] = col;
    }
    Some(perm)
}

/// Greedy decomposition: repeatedly remove the permutation in the support
/// whose smallest entry is largest.
pub fn birkhoff_decompose(s: &DoublyStochastic, tol: f64) -> Result<BirkhoffDecomposition> {
    let n = s.n;
    let zero = tol.max(f64::EPSILON) * 1e-3;
    let mut rest = s.entries.clone();
    let mut terms = Vec::new();
    let limit = if n == 0 { 0 } else { (n - 1) * (n - 1) + 1 };
    while terms.len() < limit {
        let mut levels: Vec<f64> = rest.iter().flatten().copied().filter(|v| *v > zero).collect();
        if levels.is_empty() {
            break;
        }
        levels.sort_by(|a, b| a.total_cmp(b));
        levels.dedup();
        // the largest threshold that still admits a perfect matching
        let (mut lo, mut hi) = (0usize, levels.len());
        let mut best = None;
        while lo < hi {
            let mid = (lo + hi) / 2;
            let below = if mid == 0 { zero } else { levels[mid - 1] };
            match perfect_matching(&rest, below) {
                Some(p) => {
                    best = Some(p);
                    lo = mid + 1;
                }
                None => hi = mid,
            }
        }
        let Some(perm) = best else { break };
        let c = perm.iter().enumerate().map(|(i, &j)| rest[i][j]).fold(f64::INFINITY, f64::min);
        for (i, &j) in perm.iter().enumerate() {
            rest[i][j] -= c;
            if rest[i][j] <= zero {
                rest[i][j] = 0.0;
            }
        }
        terms.push(BirkhoffTerm { coefficient: c, permutation: perm });
    }
    let mut dec = BirkhoffDecomposition { terms, residual: 0.0 };
    let rebuilt = dec.reconstruct(n);
    dec.residual = s
        .entries
        .iter()
        .flatten()
        .zip(rebuilt.iter().flatten())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if dec.residual > 10.0 * tol.max(1e-12) {
        return Err(Error::Invariant(format!("Birkhoff residual {:e} exceeds tolerance", dec.residual)));
    }
    Ok(dec)
}

/// `t·I + (1 − t)·Q` with `Q` swapping coordinates `i` and `j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TTransform {
    pub i: usize,
    pub j: usize,
    pub t: f64,
}

impl TTransform {
    fn matrix(&self, n: usize) -> DoublyStochastic {
        let mut m = DoublyStochastic::identity(n);
        m.entries[self.i][self.i] = self.t;
        m.entries[self.j][self.j] = self.t;
        m.entries[self.i][self.j] = 1.0 - self.t;
        m.entries[self.j][self.i] = 1.0 - self.t;
        m
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TTransformChain {
    /// Applied in order to `y` sorted decreasingly.
    pub steps: Vec<TTransform>,
    /// `P_xᵀ · T_m ⋯ T_1 · P_y`, so that `matrix · y = x`.
    pub matrix: DoublyStochastic,
}

fn descending_order(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
    idx
}

/// Equal-weight `x ≺ y` with tolerance `tol` on partial sums.
pub fn vector_majorises(x: &[f64], y: &[f64], tol: f64) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let (xs, ys) = (sorted_desc(x), sorted_desc(y));
    let (mut sx, mut sy) = (0.0, 0.0);
    for k in 0..xs.len() {
        sx += xs[k];
        sy += ys[k];
        if sx > sy + tol {
            return false;
        }
    }
    (sx - sy).abs() <= tol
}

fn sorted_desc(v: &[f64]) -> Vec<f64> {
    descending_order(v).into_iter().map(|i| v[i]).collect()
}

/// A doubly stochastic `S` with `S·y = x`, built from at most `n − 1`
/// T-transforms acting between sorting permutations.
pub fn t_transform_chain(x: &[f64], y: &[f64], tol: f64) -> Result<TTransformChain> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    if !vector_majorises(x, y, tol) {
        return Err(Error::NotMajorised);
    }
    let n = x.len();
    let (px, py) = (descending_order(x), descending_order(y));
    let target: Vec<f64> = px.iter().map(|&i| x[i]).collect();
    let mut z: Vec<f64> = py.iter().map(|&i| y[i]).collect();
    let mut steps = Vec::new();
    while steps.len() < n.saturating_sub(1) {
        let Some(j) = (0..n).rev().find(|&j| z[j] > target[j] + tol) else { break };
        let Some(k) = (j + 1..n).find(|&k| z[k] < target[k] - tol) else { break };
        let d = (z[j] - target[j]).min(target[k] - z[k]);
        let t = 1.0 - d / (z[j] - z[k]);
        if z[j] - target[j] <= target[k] - z[k] {
            z[k] += z[j] - target[j];
            z[j] = target[j];
        } else {
            z[j] -= target[k] - z[k];
            z[k] = target[k];
        }
        steps.push(TTransform { i: j, j: k, t });
    }

    let mut matrix = DoublyStochastic::permutation(&py);
    for s in &steps {
        matrix = s.matrix(n).compose(&matrix);
    }
    let mut back = vec![0; n];
    for (row, &orig) in px.iter().enumerate() {
        back[orig] = row;
    }
    matrix = DoublyStochastic::permutation(&back).compose(&matrix);
    Ok(TTransformChain { steps, matrix })
}
