use std::f64::consts::PI;

use holocurves::cr_operators::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `g = (z + 0.3) exp(1 - 1/(1 - |z|²/ρ²))` and its analytic `∂̄g = 2∂g/∂z̄`.
fn bump(z: Complex64, rho: f64) -> (Complex64, Complex64) {
    let s = z.norm_sqr() / (rho * rho);
    if s >= 1.0 {
        return (c(0.0, 0.0), c(0.0, 0.0));
    }
    let e = (1.0 - 1.0 / (1.0 - s)).exp();
    // ∂/∂z̄ of e = e · (-1/(1-s)²) · z/ρ².
    let de = -e / (1.0 - s).powi(2) * z / (rho * rho);
    let g = (z + 0.3) * e;
    (g, 2.0 * (z + 0.3) * de)
}

#[test]
fn cauchy_transform_inverts_dbar_on_bump() {
    let rho = 0.85;
    let f = GridFunctionBall::from_scalar(1.0, 257, rho, |z| bump(z, rho).1).unwrap();
    assert!((f.h() - 1.0 / 128.0).abs() < 1e-15);
    let report = cauchy_transform_checked(&f, 1e-3).unwrap();
    let tf = &report.transform;
    let mut err: f64 = 0.0;
    let mut gmax: f64 = 0.0;
    for j in 0..tf.nodes {
        for i in 0..tf.nodes {
            let g = bump(tf.node(i, j), rho).0;
            err = err.max((tf.get(i, j, 0) - g).norm());
            gmax = gmax.max(g.norm());
        }
    }
    println!("Tf - g = {err:.3e}, |g| = {gmax:.3e}, residual estimate {:.3e}", report.estimated_error);
    assert!(err < 1e-3 * gmax);
    assert!(report.estimated_error < 1e-3);
    assert!(!report.coarse_warning);
}

#[test]
fn cauchy_transform_of_zero_and_linearity() {
    let z = GridFunctionBall::from_scalar(1.0, 65, 1.0, |_| c(0.0, 0.0)).unwrap();
    assert_eq!(cauchy_transform(&z).unwrap().sup_norm(), 0.0);
    let f = GridFunctionBall::from_scalar(1.0, 65, 1.0, |z| bump(z, 0.9).1).unwrap();
    let g = GridFunctionBall::from_scalar(1.0, 65, 1.0, |z| c(1.0, 0.0) - z.norm_sqr()).unwrap();
    let (a, b) = (c(0.7, -1.2), c(-0.4, 2.0));
    let mut h = f.clone();
    for (v, w) in h.values.iter_mut().zip(&g.values) {
        *v = a * *v + b * w;
    }
    let t = CauchyTransform::for_grid(&f).unwrap();
    let (tf, tg, th) = (t.apply(&f).unwrap(), t.apply(&g).unwrap(), t.apply(&h).unwrap());
    let scale = th.sup_norm();
    for p in 0..th.values.len() {
        assert!((th.values[p] - a * tf.values[p] - b * tg.values[p]).norm() < 1e-12 * scale);
    }
}

#[test]
fn cauchy_transform_of_disk_indicator() {
    // For f = 1 on |z| ≤ ρ the polar integral gives Tf(z) = z̄/2 inside and ρ²/(2z) outside.
    let rho = 0.6;
    let f = GridFunctionBall::from_scalar(1.0, 129, rho, |_| c(1.0, 0.0)).unwrap();
    let tf = cauchy_transform(&f).unwrap();
    assert!(tf.at_origin()[0].norm() < 1e-12);
    for z in [c(0.2, 0.1), c(-0.3, 0.25), c(0.85, 0.0), c(-0.5, -0.7)] {
        let exact = if z.norm() < rho { z.conj() / 2.0 } else { rho * rho / (2.0 * z) };
        let got = tf.interpolate(z)[0];
        assert!((got - exact).norm() < 1e-2, "{z}: {got} vs {exact}");
    }
}

#[test]
fn dbar_residual_examples() {
    let n = 129;
    let zero = GridFunctionBall::from_scalar(1.0, n, 1.0, |_| c(0.0, 0.0)).unwrap();
    let poly = GridFunctionBall::from_scalar(1.0, n, 1.0, |z| z * z * z - 2.0 * z).unwrap();
    let r = dbar_residual(&poly, &zero).unwrap();
    assert!(r < 1e-10, "{r}");
    let zbar = GridFunctionBall::from_scalar(1.0, n, 1.0, |z| z.conj()).unwrap();
    let two = GridFunctionBall::from_scalar(1.0, n, 1.0, |_| c(2.0, 0.0)).unwrap();
    assert!(dbar_residual(&zbar, &two).unwrap() < 1e-12);
    // z̄² needs the second-order term: ∂̄ z̄² = 4 z̄ exactly under central differences too.
    let zbar2 = GridFunctionBall::from_scalar(1.0, n, 1.0, |z| z.conj() * z.conj()).unwrap();
    let four_zbar = GridFunctionBall::from_scalar(1.0, n, 1.0, |z| 4.0 * z.conj()).unwrap();
    assert!(dbar_residual(&zbar2, &four_zbar).unwrap() < 1e-12);
}

#[test]
fn conjugate_norms() {
    let bump_z = GridFunctionBall::from_scalar(1.0, 257, 0.9, |z| bump(z, 0.9).0).unwrap();
    let r = conjugate_norm_identity(&bump_z).unwrap();
    assert!(r.relative_gap < 1e-6, "{r:?}");
    let real = GridFunctionBall::from_scalar(1.0, 257, 0.9, |z| c(bump(z, 0.9).0.norm(), 0.0)).unwrap();
    assert!(conjugate_norm_identity(&real).unwrap().relative_gap < 1e-6);
    let zero = GridFunctionBall::from_scalar(1.0, 65, 0.5, |_| c(0.0, 0.0)).unwrap();
    let r = conjugate_norm_identity(&zero).unwrap();
    assert_eq!((r.norm_d, r.norm_dbar), (0.0, 0.0));
    let touching = GridFunctionBall::from_scalar(1.0, 65, 1.0, |_| c(1.0, 0.0)).unwrap();
    assert!(conjugate_norm_identity(&touching).is_err());
    // Gap stays below C h² along a refinement sequence.
    for n in [65, 129, 257] {
        let u = GridFunctionBall::from_scalar(1.0, n, 0.9, |z| bump(z, 0.9).0 * z).unwrap();
        let r = conjugate_norm_identity(&u).unwrap();
        assert!(r.relative_gap < u.h() * u.h(), "n = {n}: {r:?}");
    }
}

fn antilinear(a: Complex64) -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[a.re, a.im, a.im, -a.re])
}

#[test]
fn ivp_trivial_and_antilinear() {
    let zero = |_: Complex64| DMatrix::zeros(2, 2);
    let s = solve_linear_cr_ivp(&zero, &[c(0.3, -0.2)], 0.2, 33).unwrap();
    assert!(s.u.values.iter().all(|v| (*v - c(0.3, -0.2)).norm() < 1e-15));

    let a = |_: Complex64| antilinear(c(0.8, 0.5));
    let s = solve_linear_cr_ivp(&a, &[c(1.0, 0.0)], 0.25, 65).unwrap();
    assert!(s.fixed_point_residual < IVP_TOL);
    assert_eq!(s.u.at_origin()[0], c(1.0, 0.0));
    assert!(s.contraction_factor < 1.0);
    // ∂̄u + aū = 0 up to the finite-difference error of the check.
    assert!(s.pde_residual < 1e-3, "{}", s.pde_residual);
}

#[test]
fn ivp_factors_through_explicit_weight() {
    // A u = -(∂̄φ) u with φ = |z|²/2 + Re z, ∂̄φ = z + 1: every solution is
    // e^{φ} h with h holomorphic, so u e^{-φ} must satisfy ∂̄ = 0.
    let a = |z: Complex64| {
        let w = -(z + 1.0);
        DMatrix::from_row_slice(2, 2, &[w.re, -w.im, w.im, w.re])
    };
    let eps = 0.2;
    let s = solve_linear_cr_ivp(&a, &[c(0.5, 0.5)], eps, 65).unwrap();
    let mut w = s.u.clone();
    for j in 0..w.nodes {
        for i in 0..w.nodes {
            let z = w.node(i, j);
            w.set(i, j, 0, s.u.get(i, j, 0) * (-(0.5 * z.norm_sqr() + z.re)).exp());
        }
    }
    let zero = GridFunctionBall::zeros(eps, 65, 1).unwrap();
    let r = dbar_residual_within(&w, &zero, eps - 4.0 * w.h()).unwrap();
    assert!(r < 1e-3, "{r}");
    assert_eq!(w.at_origin()[0], c(0.5, 0.5));
}

#[test]
fn ivp_contraction_failure() {
    let big = |_: Complex64| antilinear(c(60.0, 0.0));
    match solve_linear_cr_ivp(&big, &[c(1.0, 0.0)], 0.5, 33) {
        Err(holocurves::Error::Contraction { factor }) => assert!(factor >= 1.0),
        other => panic!("expected contraction failure, got {other:?}"),
    }
}

#[test]
fn similarity_frame_basis_run() {
    let a = |z: Complex64| {
        let mut m = DMatrix::zeros(4, 4);
        m.view_mut((0, 0), (2, 2)).copy_from(&antilinear(c(0.5, 0.2 * z.re)));
        m.view_mut((2, 2), (2, 2)).copy_from(&antilinear(c(-0.3, 0.4)));
        m[(0, 2)] = 0.3;
        m[(1, 3)] = 0.3;
        m
    };
    let frame = similarity_frame(&a, 2, 0.2, 33).unwrap();
    assert!(frame.origin_defect < 1e-15);
    assert!(frame.min_abs_det > 0.5, "{}", frame.min_abs_det);
}

#[test]
fn census_examples() {
    let opts = CensusOptions::default();
    let id = |z: Complex64| z;
    let r = zero_census(&id, c(0.0, 0.0), 1.0, &opts).unwrap();
    assert_eq!(r.zeros.len(), 1);
    assert_eq!(r.zeros[0].index, 1);
    assert!(r.zeros[0].location[0].abs() < 1e-5 && r.zeros[0].location[1].abs() < 1e-5);

    let delta = c(0.01, 0.003);
    let f = move |z: Complex64| z * z + delta;
    let r = zero_census(&f, c(0.0, 0.0), 1.0, &opts).unwrap();
    assert_eq!(r.zeros.len(), 2);
    assert!(r.zeros.iter().all(|z| z.index == 1));
    assert_eq!((r.total_index, r.boundary_winding), (2, 2));
    let root = (-delta).sqrt();
    for z in &r.zeros {
        let w = c(z.location[0], z.location[1]);
        assert!((w - root).norm() < 1e-5 || (w + root).norm() < 1e-5);
    }

    let on_circle = |z: Complex64| z - 1.0;
    assert!(!zero_census(&on_circle, c(0.0, 0.0), 1.0, &opts).unwrap().conclusive);
}

#[test]
fn census_random_polynomials() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let opts = CensusOptions::default();
    for _ in 0..30 {
        let deg = rng.gen_range(1..=4);
        let roots: Vec<Complex64> = (0..deg).map(|_| Complex64::from_polar(rng.gen_range(0.0..0.8), rng.gen_range(0.0..2.0 * PI))).collect();
        let far = Complex64::from_polar(rng.gen_range(1.3..3.0), rng.gen_range(0.0..2.0 * PI));
        let f = |z: Complex64| roots.iter().fold(z - far, |acc, r| acc * (z - r));
        let r = zero_census(&f, c(0.0, 0.0), 1.0, &opts).unwrap();
        assert!(r.conclusive, "{roots:?} {r:?}");
        assert_eq!(r.total_index, deg as i64);
        assert_eq!(r.total_index, r.boundary_winding);
        assert!(r.zeros.iter().all(|z| z.index >= 1));
    }
}

#[test]
fn census_of_ivp_solution() {
    // u = z e^{φ} solves ∂̄u - (∂̄φ)u = 0; sample it on a grid.
    let u = GridFunctionBall::from_scalar(0.3, 65, 0.3 * 1.5, |z| z * (0.5 * z.norm_sqr()).exp()).unwrap();
    let r = zero_census_grid(&u, 0, 0.2, &CensusOptions::default()).unwrap();
    assert_eq!(r.zeros.len(), 1);
    assert_eq!((r.total_index, r.boundary_winding), (1, 1));
}

#[test]
fn torus_unperturbed() {
    let op = assemble_torus_dbar(16, 1, &TorusPotential::zero(1)).unwrap();
    let r = kernel_cokernel_dims(&op, RANK_TOL);
    assert_eq!((r.dim_ker, r.dim_coker, r.index), (2, 2, 0));
    assert!(r.gap > 1e6 && r.reliable);
    // Spectrum is |2π(k + il)|, each value twice per mode.
    let sv = op.singular_values();
    assert!((sv[0] - 2.0 * PI * (2.0f64 * 256.0).sqrt()).abs() < 1e-9);
    let nonzero: Vec<f64> = sv.iter().copied().filter(|s| *s > 1e-9).collect();
    assert!((nonzero.last().unwrap() - 2.0 * PI).abs() < 1e-12);
    // Kernel vectors are the constants.
    let k = kernel_basis(&op.matrix, RANK_TOL);
    for col in 0..k.ncols() {
        let f = TorusSpectralFunction::from_real_vector(16, 1, &DVector::from_column_slice(k.column(col).as_slice())).unwrap();
        let (a, b) = (f.eval(0.1, 0.7)[0], f.eval(0.63, 0.2)[0]);
        assert!((a - b).norm() < 1e-10);
    }
}

#[test]
fn torus_conjugation_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..4 {
        let a = Complex64::from_polar(1.0, rng.gen_range(0.0..2.0 * PI));
        let op = assemble_torus_dbar(8, 1, &TorusPotential::conjugation(a)).unwrap();
        let r = kernel_cokernel_dims(&op, RANK_TOL);
        assert!(r.reliable);
        assert_eq!(r.dim_ker, r.dim_coker);
        assert!(!op.complex_linear);
    }
}

#[test]
fn torus_band_violation() {
    let p = DMatrix::from_element(1, 1, c(0.1, 0.0));
    let pot = TorusPotential::zero(1).with_term(3, 0, p.clone(), DMatrix::zeros(1, 1)).unwrap();
    assert!(assemble_torus_dbar(4, 1, &pot).is_err());
    assert!(assemble_torus_dbar(6, 1, &pot).is_ok());
}

#[test]
fn torus_kernel_element_census() {
    // ∂̄ + A with A = -∂̄φ, φ = 0.3 cos 2πs: the kernel is spanned by e^{φ}.
    // ∂̄φ = ∂_s φ = -0.6π sin 2πs = 0.3πi (e^{2πis} - e^{-2πis}).
    let p1 = DMatrix::from_element(1, 1, -c(0.0, 0.3 * PI));
    let p2 = DMatrix::from_element(1, 1, c(0.0, 0.3 * PI));
    let z = DMatrix::zeros(1, 1);
    let pot = TorusPotential::zero(1).with_term(1, 0, p1, z.clone()).unwrap().with_term(-1, 0, p2, z).unwrap();
    let op = assemble_torus_dbar(12, 1, &pot).unwrap();
    let r = kernel_cokernel_dims(&op, RANK_TOL);
    assert_eq!((r.dim_ker, r.dim_coker), (2, 2));
    assert!(r.reliable, "{r:?}");
    let k = kernel_basis(&op.matrix, RANK_TOL);
    let f = TorusSpectralFunction::from_real_vector(12, 1, &DVector::from_column_slice(k.column(0).as_slice())).unwrap();
    let ratio = f.eval(0.2, 0.4)[0] / f.eval(0.7, 0.1)[0];
    let exact = (0.3 * (2.0 * PI * 0.2).cos() - 0.3 * (2.0 * PI * 0.7).cos()).exp();
    assert!((ratio - exact).norm() < 1e-10);
    let g = |z: Complex64| f.eval(0.3 + 0.1 * z.re, 0.5 + 0.1 * z.im)[0];
    let census = zero_census(&g, c(0.0, 0.0), 1.0, &CensusOptions::default()).unwrap();
    assert!(census.zeros.iter().all(|z| z.index >= 1));
    assert_eq!(census.total_index, census.boundary_winding);
}

#[test]
fn sphere_exact_kernels() {
    let k0 = sphere_bundle_kernel(0);
    assert_eq!((k0.dim_ker, k0.dim_coker, k0.index), (2, 0, 2));
    let km1 = sphere_bundle_kernel(-1);
    assert_eq!((km1.dim_ker, km1.dim_coker), (0, 0));
    let k2 = sphere_bundle_kernel(2);
    assert_eq!((k2.dim_ker, k2.dim_coker, k2.index), (6, 0, 6));
    for s in &k2.kernel_basis {
        assert!(s.smooth_at_infinity());
        let z = c(0.4, -1.3);
        assert!((s.eval_chart2(1.0 / z) - (1.0 / z).powi(2) * s.eval_chart1(z)).norm() < 1e-12);
    }
    assert!(!SphereBundleSection::new(1, vec![c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).smooth_at_infinity());
}

#[test]
fn riemann_roch_sweep() {
    for k in -3..=5 {
        let op = assemble_sphere_ek(k, sphere_weight(k)).unwrap();
        let r = kernel_cokernel_dims(&op, RANK_TOL);
        let exact = sphere_bundle_kernel(k);
        assert!(r.reliable, "k = {k}: {r:?}");
        assert_eq!((r.dim_ker, r.dim_coker), (exact.dim_ker, exact.dim_coker), "k = {k}");
        assert_eq!(r.dim_ker as i64 - r.dim_coker as i64, 2 + 2 * k);
        let t = transversality_predict(1, k, 2).unwrap();
        assert!(!t.injective || r.dim_ker == 0);
        assert!(!t.surjective || r.dim_coker == 0);
    }
    for mu in -3..=5 {
        let op = assemble_disk_maslov(mu, 10).unwrap();
        let r = kernel_cokernel_dims(&op, RANK_TOL);
        assert!(r.reliable, "μ = {mu}: {r:?}");
        assert_eq!(r.dim_ker as i64 - r.dim_coker as i64, 1 + mu, "μ = {mu}");
        assert_eq!(r.dim_ker as i64, (1 + mu).max(0));
    }
    let op = assemble_sphere_ek(3, sphere_weight(3)).unwrap();
    let r = kernel_cokernel_dims(&op, RANK_TOL);
    assert_eq!((r.dim_ker, r.dim_coker), (8, 0));
}

#[test]
fn disk_examples() {
    let dims = |mu| {
        let r = kernel_cokernel_dims(&assemble_disk_maslov(mu, 8).unwrap(), RANK_TOL);
        (r.dim_ker, r.dim_coker)
    };
    assert_eq!(dims(0), (1, 0));
    assert_eq!(dims(2), (3, 0));
    assert_eq!(dims(-2), (0, 1));
    assert_eq!(dims(-1), (0, 0));
    assert!(assemble_disk_maslov(9, 8).is_err());
    // The μ = 2 kernel is spanned by a + bz + āz² with a ∈ C, b ∈ R.
    let d = DiskMaslovOperator::new(2, 6).unwrap();
    let k = kernel_basis(&d.assemble().matrix, RANK_TOL);
    for col in 0..k.ncols() {
        let u = |z: Complex64| -> Complex64 {
            d.domain.iter().enumerate().map(|(j, (a, b))| c(k[(2 * j, col)], k[(2 * j + 1, col)]) * z.powu(*a as u32) * z.conj().powu(*b as u32)).sum()
        };
        for theta in [0.3, 1.9, 4.0] {
            let z = Complex64::from_polar(1.0, theta);
            // e^{-iθ} u(e^{iθ}) is real.
            assert!((Complex64::from_polar(1.0, -theta) * u(z)).im.abs() < 1e-10);
        }
    }
}

#[test]
fn transversality_examples() {
    let t = transversality_predict(1, -1, 2).unwrap();
    assert!(t.injective && t.surjective);
    let t = transversality_predict(1, 0, 2).unwrap();
    assert!(t.surjective && !t.injective);
    assert_eq!(transversality_predict(1, 1, -2).unwrap().verdict, Transversality::Indeterminate);
    assert!(transversality_predict(2, 0, 2).is_err());
    for c1 in -5..=5 {
        for chi in [2, 0, -2, -4] {
            let t = transversality_predict(1, c1, chi).unwrap();
            assert_eq!(t.injective, t.index_form_injective);
            assert_eq!(t.surjective, t.index_form_surjective);
        }
    }
}
