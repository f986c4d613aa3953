//! Hermitian eigensolver: Householder reduction to tridiagonal form, a
//! diagonal phase change making the tridiagonal real, then implicit QL.

use num_complex::Complex64;

use super::dense::CMatrix;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in descending order and the matching unit eigenvectors as
/// columns, so that `A = V diag(λ) V*`.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn hermitian_eigen(a: &CMatrix) -> Result<Eigen> {
    let n = a.n();
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: CMatrix::zeros(0) });
    }
    let (t, q) = tridiagonalize(a);

    // T = D S D* with S real symmetric tridiagonal
    let mut phase = vec![Complex64::new(1.0, 0.0); n];
    let mut diag: Vec<f64> = (0..n).map(|i| t[(i, i)].re).collect();
    let mut sub = vec![0.0; n];
    for i in 1..n {
        let e = t[(i, i - 1)];
        let r = e.norm();
        phase[i] = if r > 0.0 { phase[i - 1] * (e / r) } else { phase[i - 1] };
        sub[i] = r;
    }

    let mut z = vec![vec![0.0; n]; n];
    for (i, row) in z.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    tql2(&mut diag, &mut sub, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].total_cmp(&diag[i]));
    let values = order.iter().map(|&k| diag[k]).collect();
    let mut vectors = CMatrix::zeros(n);
    for (col, &k) in order.iter().enumerate() {
        for i in 0..n {
            // (Q D Z)[i, k]
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..n {
                acc += q[(i, m)] * phase[m] * z[m][k];
            }
            vectors[(i, col)] = acc;
        }
    }
    Ok(Eigen { values, vectors })
}

pub fn hermitian_eigenvalues(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(a)?.values)
}

/// `A = Q T Q*` with `T` Hermitian tridiagonal.
fn tridiagonalize(a: &CMatrix) -> (CMatrix, CMatrix) {
    let n = a.n();
    let mut t = a.add(&a.adjoint()).scale(0.5);
    let mut q = CMatrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let x: Vec<Complex64> = (k + 1..n).map(|i| t[(i, k)]).collect();
        let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let unit = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -unit * norm;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        let mut h = CMatrix::identity(n);
        for (a_i, vi) in v.iter().enumerate() {
            for (b_j, vj) in v.iter().enumerate() {
                h[(k + 1 + a_i, k + 1 + b_j)] -= vi * vj.conj() * (2.0 / vnorm2);
            }
        }
        t = h.mul(&t).mul(&h);
        q = q.mul(&h);
    }
    (t, q)
}

/// Implicit QL on a real symmetric tridiagonal matrix. `e[i]` holds the
/// subdiagonal entry `(i, i−1)`; on return `d` holds the eigenvalues and
/// the columns of `z` the eigenvectors.
fn tql2(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<()> {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_SWEEPS {
                    return Err(Error::Invariant("eigenvalue iteration did not converge".into()));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let (mut c, mut c2, mut c3) = (1.0, 1.0, 1.0);
                let el1 = e[l + 1];
                let (mut s, mut s2) = (0.0, 0.0);
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    for row in z.iter_mut() {
                        h = row[i + 1];
                        row[i + 1] = s * row[i] + c * h;
                        row[i] = c * row[i] - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
