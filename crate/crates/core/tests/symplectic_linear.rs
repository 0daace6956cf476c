use holocurves::symplectic_linear::*;
use holocurves::Error;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
}

fn random_form(rng: &mut ChaCha8Rng, dim: usize) -> BilinearForm {
    loop {
        let b = random_matrix(rng, dim) + DMatrix::identity(dim, dim);
        let f = BilinearForm::new(b.transpose() * standard_omega(dim) * &b).unwrap();
        if check_nondegenerate(&f).nondegenerate {
            return f;
        }
    }
}

fn random_anticommuting(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> DMatrix<f64> {
    let y = antilinear_part(&random_matrix(rng, dim));
    &y * (scale / y.norm())
}

#[test]
fn nondegeneracy_examples() {
    let c = check_nondegenerate(&BilinearForm::standard(4).unwrap());
    assert!(c.nondegenerate && (c.pfaffian - 1.0).abs() < 1e-15);
    let c = check_nondegenerate(&BilinearForm::new(DMatrix::zeros(2, 2)).unwrap());
    assert!(!c.nondegenerate && c.pfaffian == 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut b = random_matrix(&mut rng, 4);
    b.set_column(3, &(b.column(0) * 2.0 - b.column(1)));
    let null = DVector::from_vec(vec![2.0, -1.0, 0.0, -1.0]);
    assert!((&b * &null).norm() < 1e-14);
    let omega = BilinearForm::new(b.transpose() * standard_omega(4) * &b).unwrap();
    assert!((omega.matrix() * &null).norm() < 1e-12);
    assert!(!check_nondegenerate(&omega).nondegenerate);
}

#[test]
fn pfaffian_squares_to_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for dim in [2, 4, 6, 8] {
        let a = random_matrix(&mut rng, dim);
        let s = &a - a.transpose();
        let pf = pfaffian(&s);
        assert!((pf * pf - s.determinant()).abs() < 1e-10 * s.determinant().abs().max(1.0));
    }
}

#[test]
fn darboux_examples() {
    let b = darboux_basis(&BilinearForm::standard(4).unwrap()).unwrap();
    assert!((b.interleaved_matrix() - DMatrix::identity(4, 4)).norm() < 1e-14);
    let b = darboux_basis(&BilinearForm::standard(2).unwrap().scaled(2.0)).unwrap();
    assert!((&b.x[0] - DVector::from_vec(vec![1.0, 0.0])).norm() < 1e-15);
    assert!((&b.y[0] - DVector::from_vec(vec![0.0, 0.5])).norm() < 1e-15);
    assert!(matches!(darboux_basis(&BilinearForm::new(DMatrix::zeros(2, 2)).unwrap()), Err(Error::Degenerate(_))));
}

#[test]
fn darboux_basis_property_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for dim in [2, 4, 6] {
        for _ in 0..100 {
            let omega = random_form(&mut rng, dim);
            let b = darboux_basis(&omega).unwrap();
            let m = b.interleaved_matrix();
            let pairing = m.transpose() * omega.matrix() * &m;
            assert!((pairing - standard_omega(dim)).norm() < 1e-9);
            let n = dim / 2;
            let blk = b.block_matrix();
            let pairing = blk.transpose() * omega.matrix() * &blk;
            for i in 0..dim {
                for j in 0..dim {
                    let expected = if j == i + n { 1.0 } else if i == j + n { -1.0 } else { 0.0 };
                    assert!((pairing[(i, j)] - expected).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn compatible_from_metric_examples() {
    let j = compatible_from_metric(&BilinearForm::standard(4).unwrap(), &MetricForm::euclidean(4)).unwrap();
    assert!((j.matrix() - standard_j(4)).norm() < 1e-14);

    let omega = BilinearForm::standard(2).unwrap();
    let g = MetricForm::new(DMatrix::from_row_slice(2, 2, &[4.0, 0.0, 0.0, 1.0])).unwrap();
    let j = compatible_from_metric(&omega, &g).unwrap();
    // Direct solve: A = -G⁻¹Ω = [[0, -1/4], [1, 0]], |A| = ½ I, so J = 2A.
    let expected = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 2.0, 0.0]);
    assert!((j.matrix() - expected).norm() < 1e-14);
    assert!(square_defect(j.matrix()) < 1e-14);
    let s = omega.matrix() * j.matrix();
    assert!((&s - s.transpose()).norm() < 1e-14);
    assert!(s.symmetric_eigenvalues().min() > 0.0);
}

#[test]
fn compatible_from_metric_retracts_onto_compatible_structures() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let omega = BilinearForm::standard(4).unwrap();
    for _ in 0..50 {
        // J₀ conjugated by a symplectic map (exponential of a Hamiltonian matrix) is compatible.
        let h = DMatrix::from_fn(4, 4, |_, _| rng.gen_range(-0.3..0.3));
        let h = 0.5 * (&h + h.transpose());
        let a = standard_omega(4).try_inverse().unwrap() * h;
        let mut term = DMatrix::identity(4, 4);
        let mut phi = DMatrix::identity(4, 4);
        for k in 1..40 {
            term = &term * &a / k as f64;
            phi += &term;
        }
        let j: DMatrix<f64> = &phi * standard_j(4) * phi.clone().try_inverse().unwrap();
        let s: DMatrix<f64> = omega.matrix() * &j;
        let g = MetricForm::new(0.5 * (&s + s.transpose())).unwrap();
        let jg = compatible_from_metric(&omega, &g).unwrap();
        assert!((jg.matrix() - &j).norm() < 1e-10);
    }
}

#[test]
fn compatible_from_metric_property() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in [2, 4, 6] {
        for _ in 0..50 {
            let omega = random_form(&mut rng, dim);
            let b = random_matrix(&mut rng, dim);
            let g = MetricForm::new(b.transpose() * &b + DMatrix::identity(dim, dim) * 0.5).unwrap();
            let j = compatible_from_metric(&omega, &g).unwrap();
            assert!(square_defect(j.matrix()) < 1e-10);
            let s = omega.matrix() * j.matrix();
            let s = 0.5 * (&s + s.transpose());
            assert!(s.symmetric_eigenvalues().min() > 0.0);
        }
    }
}

#[test]
fn cayley_examples() {
    assert!(matches!(
        cayley_chart(&DMatrix::identity(2, 2)),
        Err(Error::Precondition(_))
    ));
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let y = random_anticommuting(&mut rng, 4, 0.3);
    let img = cayley_chart(&y).unwrap();
    assert!(square_defect(img.j.matrix()) < 1e-13);
    assert!((cayley_inverse(&img.j).unwrap() - y).norm() < 1e-10);
    assert!(img.condition >= 1.0);
}

#[test]
fn classify_taming_examples() {
    let omega = BilinearForm::standard(2).unwrap();
    let r = classify_taming(&omega, &LinearComplexStructure::standard(2)).unwrap();
    assert_eq!(r.class, TamingClass::Compatible);
    let minus = LinearComplexStructure::new(-standard_j(2)).unwrap();
    assert_eq!(classify_taming(&omega, &minus).unwrap().class, TamingClass::Neither);

    // Conjugation by a map that is not symplectic but close to the identity.
    let omega4 = BilinearForm::standard(4).unwrap();
    let mut a = DMatrix::identity(4, 4);
    a[(0, 2)] = 0.1;
    a[(1, 1)] = 1.05;
    let j = &a * standard_j(4) * a.clone().try_inverse().unwrap();
    let j = LinearComplexStructure::new(j).unwrap();
    let defect = (j.matrix().transpose() * omega4.matrix() * j.matrix() - omega4.matrix()).norm();
    assert!(defect > 1e-3);
    let r = classify_taming(&omega4, &j).unwrap();
    assert_eq!(r.class, TamingClass::TameOnly);
    assert!(r.metric.is_some());
}

fn nonintegrable_field() -> AlmostComplexField {
    AlmostComplexField::from_cayley(4, |p| {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = 0.5 * p[1] * p[1] + 0.3 * p[2];
        m[(1, 3)] = 0.4 * (p[0] * p[3]).sin();
        m[(2, 1)] = 0.3 * p[0] * p[0];
        m[(3, 0)] = 0.2 * p[3];
        antilinear_part(&m)
    })
}

fn random_field_r2(seed: u64) -> AlmostComplexField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.4..0.4)).collect();
    AlmostComplexField::from_cayley(2, move |p| {
        let a = c[0] * (p[0] * 2.0).sin() + c[1] * p[1] * p[1] + c[2] * p[0] * p[1];
        let b = c[3] * (p[1] * 3.0).cos() + c[4] * p[0] + c[5] * p[0] * p[0] * p[1];
        DMatrix::from_row_slice(2, 2, &[a, b, b, -a])
    })
}

#[test]
fn nijenhuis_vanishes_in_dimension_two() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for seed in 0..10 {
        let j = random_field_r2(seed);
        let p = DVector::from_fn(2, |_, _| rng.gen_range(-0.5..0.5));
        let x = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
        let y = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
        assert!(nijenhuis_tensor(&j, &p, &x, &y).unwrap().norm() < 1e-6);
    }
}

#[test]
fn nijenhuis_constant_field_is_zero() {
    let j = AlmostComplexField::constant(LinearComplexStructure::standard(4));
    let p = DVector::from_vec(vec![0.1, 0.2, 0.3, 0.4]);
    let x = DVector::from_vec(vec![1.0, 0.0, 2.0, 0.0]);
    let y = DVector::from_vec(vec![0.0, 1.0, 0.0, -1.0]);
    assert_eq!(nijenhuis_tensor(&j, &p, &x, &y).unwrap().norm(), 0.0);
}

#[test]
fn nijenhuis_nonintegrable_second_order() {
    let p = DVector::from_vec(vec![0.3, -0.2, 0.4, 0.1]);
    let x = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
    let y = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
    let n = |h: f64| nijenhuis_tensor(&nonintegrable_field().with_fd_step(h), &p, &x, &y).unwrap();
    let (n1, n2, n4) = (n(4e-2), n(2e-2), n(1e-2));
    assert!(n(1e-4).norm() > 1e-2);
    let ratio = (&n1 - &n2).norm() / (&n2 - &n4).norm();
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    // Antisymmetry and bilinearity.
    let f = nonintegrable_field();
    let nxy = nijenhuis_tensor(&f, &p, &x, &y).unwrap();
    let nyx = nijenhuis_tensor(&f, &p, &y, &x).unwrap();
    assert!((&nxy + nyx).norm() < 1e-6);
    let n2x = nijenhuis_tensor(&f, &p, &(&x * 2.0), &y).unwrap();
    assert!((n2x - nxy * 2.0).norm() < 1e-6);
}

proptest! {
    #[test]
    fn cayley_round_trip(seed in 0u64..10_000, scale in 0.0f64..0.5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let y = random_anticommuting(&mut rng, 4, scale);
        let j = cayley_chart(&y).unwrap().j;
        prop_assert!((cayley_inverse(&j).unwrap() - y).norm() < 1e-10);
    }
}
