use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;
use orbex_core::matrix::{
    birkhoff_decompose, diag_expectation, eig_scale, hermitian_eigen, random_doubly_stochastic, random_hermitian,
    t_transform_chain, DoublyStochastic, HermitianOperator,
};
use orbex_core::measure::{MeasureSpace, SimpleFunction};
use orbex_core::scales::rearrange;
use orbex_core::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Eigenvalues agree with nalgebra's Hermitian solver to 1e-12 relative.
#[test]
fn eigenvalues_match_an_independent_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..200 {
        let n = 1 + trial % 12;
        let a = random_hermitian(n, &mut rng);
        let ours = hermitian_eigen(&a).unwrap();
        let m = DMatrix::from_fn(n, n, |i, j| Complex::new(a[(i, j)].re, a[(i, j)].im));
        let mut theirs: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        theirs.sort_by(|p, q| q.total_cmp(p));
        let scale = 1.0 + theirs.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for (p, q) in ours.values.iter().zip(&theirs) {
            assert!((p - q).abs() <= 1e-12 * scale, "n={n}: {p} vs {q}");
        }
        let d = orbex_core::matrix::CMatrix::from_real_diagonal(&ours.values);
        let back = ours.vectors.mul(&d).mul(&ours.vectors.adjoint());
        assert!(back.sub(&a).max_abs() <= 1e-12 * scale * n as f64);
    }
}

#[test]
fn diagonal_scale_is_the_rearrangement() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let v: Vec<i64> = (0..n).map(|_| rng.random_range(-4..=4)).collect();
        let f = SimpleFunction::on_atoms(Arc::new(MeasureSpace::uniform(n)), v.iter().map(|&k| Rational::new(k, 4)).collect())
            .unwrap();
        let h = HermitianOperator::diagonal(&v.iter().map(|&k| k as f64 / 4.0).collect::<Vec<_>>());
        assert_eq!(eig_scale(&h).unwrap().snap(1e-12).unwrap(), rearrange(&f));
    }
}

#[test]
fn expectation_preserves_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=8 {
        let a = HermitianOperator::new(random_hermitian(n, &mut rng), None).unwrap();
        assert!((diag_expectation(&a).trace() - a.trace()).abs() < 1e-12);
    }
}

#[test]
fn complex_input_is_accepted() {
    let i = Complex64::new(0.0, 1.0);
    let m = orbex_core::matrix::CMatrix::from_vec(2, vec![2.0.into(), i, -i, 2.0.into()]);
    let s = eig_scale(&HermitianOperator::new(m, None).unwrap()).unwrap();
    let v = s.values();
    assert!((v[0] - 3.0).abs() < 1e-12 && (v[1] - 1.0).abs() < 1e-12);
}

#[test]
fn seeded_birkhoff_4x4() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = DoublyStochastic::new(random_doubly_stochastic(4, 5, &mut rng), 1e-12).unwrap();
    let d = birkhoff_decompose(&s, 1e-12).unwrap();
    assert!(d.residual <= 1e-10);
    assert!(d.terms.len() <= 10);
    assert!((d.coefficient_sum() - 1.0).abs() <= 1e-12);
}

#[test]
fn t_transform_maps_y_to_x() {
    let c = t_transform_chain(&[3.0, 2.0, 1.0], &[4.0, 2.0, 0.0], 1e-12).unwrap();
    let img = c.matrix.apply(&[4.0, 2.0, 0.0]);
    for (a, b) in img.iter().zip([3.0, 2.0, 1.0]) {
        assert!((a - b).abs() <= 1e-12);
    }
    let id = t_transform_chain(&[1.0, 2.0], &[1.0, 2.0], 1e-12).unwrap();
    assert_eq!(id.matrix, DoublyStochastic::identity(2));
}
