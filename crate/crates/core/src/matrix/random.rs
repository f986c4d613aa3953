//! Seeded random matrices.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::dense::CMatrix;

fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// QR of a complex Gaussian matrix by modified Gram–Schmidt. The triangular
/// factor then has a positive diagonal, which makes the result Haar
/// distributed.
pub fn random_unitary<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    loop {
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|_| (0..n).map(|_| gaussian(rng)).collect()).collect();
        let mut ok = true;
        for j in 0..n {
            for k in 0..j {
                let (done, rest) = cols.split_at_mut(j);
                let proj: Complex64 = done[k].iter().zip(&rest[0]).map(|(q, v)| q.conj() * v).sum();
                for (v, q) in rest[0].iter_mut().zip(&done[k]) {
                    *v -= proj * q;
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            cols[j].iter_mut().for_each(|z| *z /= norm);
        }
        if ok {
            let mut u = CMatrix::zeros(n);
            for (j, col) in cols.iter().enumerate() {
                for (i, z) in col.iter().enumerate() {
                    u[(i, j)] = *z;
                }
            }
            return u;
        }
    }
}

/// `(G + G*)/2` for a complex Gaussian `G`.
pub fn random_hermitian<R: Rng>(n: usize, rng: &mut R) -> CMatrix {
    let g = CMatrix::from_vec(n, (0..n * n).map(|_| gaussian(rng)).collect());
    g.add(&g.adjoint()).scale(0.5)
}

/// `U diag(values) U*` for a random unitary `U`.
pub fn random_with_spectrum<R: Rng>(values: &[f64], rng: &mut R) -> CMatrix {
    let u = random_unitary(values.len(), rng);
    u.mul(&CMatrix::from_real_diagonal(values)).mul(&u.adjoint())
}

/// Orthogonal projection onto a random `k`-dimensional subspace.
pub fn random_projection<R: Rng>(n: usize, k: usize, rng: &mut R) -> CMatrix {
    let u = random_unitary(n, rng);
    u.column_projection(&(0..k).collect::<Vec<_>>())
}

/// A random doubly stochastic matrix as a convex combination of permutations.
pub fn random_doubly_stochastic<R: Rng>(n: usize, terms: usize, rng: &mut R) -> Vec<Vec<f64>> {
    use rand::seq::SliceRandom;
    let mut m = vec![vec![0.0; n]; n];
    let weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    for w in weights {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            m[i][j] += w / total;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unitaries_are_unitary_and_seeded() {
        let mut a = ChaCha8Rng::seed_from_u64(3);
        let mut b = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=8 {
            let u = random_unitary(n, &mut a);
            assert!(u.unitary_deviation() < 1e-12);
            assert_eq!(u, random_unitary(n, &mut b));
        }
    }

    #[test]
    fn projections_have_the_requested_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_projection(5, 2, &mut rng);
        assert!(p.mul(&p).sub(&p).max_abs() < 1e-12);
        assert!((p.trace().re - 2.0).abs() < 1e-12);
    }
}
