use h2mmp::linalg::{
    normalized_sum, orthonormality_defect, svd_truncate_gram, FlopCounter, GramGroup,
};
use h2mmp::Complex64;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_real(r: usize, c: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

#[test]
fn identity_keeps_full_space() {
    let t = svd_truncate_gram(&DMatrix::<f64>::identity(4, 4), 1e-2);
    assert_eq!(t.basis.ncols(), 4);
    assert!(orthonormality_defect(&t.basis) < 1e-14);
    assert!(!t.degenerate);
}

#[test]
fn diagonal_threshold_is_strict() {
    let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1e-1, 1e-3, 0.0]));
    let t = svd_truncate_gram(&g, 1e-2);
    assert_eq!(t.basis.ncols(), 2);
    // ties at exactly eps are dropped
    let g = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.5, 0.25]));
    assert_eq!(svd_truncate_gram(&g, 0.5).basis.ncols(), 1);
}

#[test]
fn rank_of_random_factor() {
    let m = random_real(6, 3, 11);
    // independent rank oracle: singular values of M itself
    let sv = m.clone().svd(false, false).singular_values;
    let oracle = sv.iter().filter(|&&s| s / sv[0] > 1e-10).count();
    assert_eq!(oracle, 3);
    let t = svd_truncate_gram(&(&m * m.transpose()), 1e-12);
    assert_eq!(t.basis.ncols(), oracle);
    let proj = &t.basis * t.basis.transpose();
    assert!((&proj * &m - &m).norm() < 1e-12 * m.norm());
}

#[test]
fn zero_gram_is_degenerate() {
    let t = svd_truncate_gram(&DMatrix::<Complex64>::zeros(3, 3), 1e-4);
    assert!(t.degenerate);
    assert_eq!(t.basis.shape(), (3, 1));
    assert_eq!(t.basis[(0, 0)], Complex64::new(1.0, 0.0));
    let t = svd_truncate_gram(&DMatrix::<f64>::zeros(0, 0), 1e-4);
    assert_eq!(t.basis.shape(), (0, 0));
}

#[test]
fn complex_hermitian_gram() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = DMatrix::from_fn(7, 2, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let t = svd_truncate_gram(&(&x * x.adjoint()), 1e-12);
    assert_eq!(t.basis.ncols(), 2);
    assert!(orthonormality_defect(&t.basis) < 1e-13);
    let proj = &t.basis * t.basis.adjoint();
    assert!((&proj * &x - &x).norm() < 1e-12 * x.norm());
}

#[test]
fn groups_are_frobenius_normalized() {
    let mut flops = FlopCounter::new();
    let mut a = GramGroup::new(3);
    let mut b = GramGroup::new(3);
    let empty = GramGroup::<f64>::new(3);
    let (xa, xb) = (random_real(3, 2, 1) * 1e6, random_real(3, 1, 2) * 1e-6);
    a.add_factor(&xa, &mut flops);
    b.add_factor(&xb, &mut flops);
    b.add_factor(&DMatrix::zeros(3, 0), &mut flops);
    assert_eq!((a.terms(), b.terms(), empty.terms()), (1, 1, 0));
    assert!(flops.total() > 0);
    let g = normalized_sum(&[a, b, empty.clone()]).unwrap();
    let (ga, gb) = (&xa * xa.transpose(), &xb * xb.transpose());
    let oracle = &ga / ga.norm() + &gb / gb.norm();
    assert!((&g - &oracle).norm() < 1e-14);
    assert!(normalized_sum(&[empty]).is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn truncation_is_orthonormal_and_captures_range(
        n in 1usize..12, k in 1usize..6, seed in any::<u64>(), eps in 1e-12f64..0.5
    ) {
        let x = random_real(n, k, seed);
        let g = &x * x.transpose();
        let t = svd_truncate_gram(&g, eps);
        let r = t.basis.ncols();
        prop_assert!(r >= 1 && r <= n.min(k));
        prop_assert!(orthonormality_defect(&t.basis) < 1e-12);
        for w in t.singular_values.windows(2) {
            prop_assert!(w[0] >= w[1]);
        }
        // discarded Gram energy is bounded by the threshold
        let resid = &g - &t.basis * (t.basis.transpose() * &g);
        prop_assert!(resid.norm() <= (eps * (n as f64)).max(1e-12) * g.norm() * 4.0);
    }
}
