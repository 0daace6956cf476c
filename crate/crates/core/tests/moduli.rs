use holocurves::moduli_calc::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn index_examples() {
    for n in 1..=5 {
        assert_eq!(curve_index(&CurveTopology { g: 0, m: 1, n, c1a: 2 }), 2 * n as i64);
    }
    for k in 1..=4 {
        assert_eq!(curve_index(&CurveTopology { g: 0, m: 0, n: 4, c1a: -k }), 2 - 2 * k);
    }
    // c₁(A) = χ(Σ) = -2 for g = 2.
    assert_eq!(curve_index(&CurveTopology { g: 2, m: 0, n: 2, c1a: -2 }), -2);
}

#[test]
fn teichmueller_examples_and_identity() {
    assert_eq!(teichmueller_dimension(0, 4).dim_t, 2);
    assert_eq!(teichmueller_dimension(1, 0).dim_t, 2);
    assert_eq!(teichmueller_dimension(2, 0).dim_t, 6);
    assert_eq!(teichmueller_dimension(0, 0).dim_aut, 6);
    assert_eq!(teichmueller_dimension(0, 1).dim_aut, 4);
    assert_eq!(teichmueller_dimension(0, 2).dim_aut, 2);
    for g in 0..6u32 {
        for m in 0..6u32 {
            let d = teichmueller_dimension(g, m);
            let chi = 2 - 2 * g as i64;
            assert_eq!(d.dim_t - d.dim_aut, -(3 * chi - 2 * m as i64), "g={g} m={m}");
        }
    }
}

#[test]
fn moebius_examples() {
    let (zero, one) = (SpherePoint::finite(0.0, 0.0), SpherePoint::finite(1.0, 0.0));
    let id = moebius_normalize(zero, one, SpherePoint::Infinity).unwrap();
    for z in [c(0.3, 0.2), c(-2.0, 1.0)] {
        assert!((id.apply_finite(z) - z).norm() < 1e-14);
    }
    let inv = moebius_normalize(SpherePoint::Infinity, one, zero).unwrap();
    for z in [c(0.3, 0.2), c(-2.0, 1.0)] {
        assert!((inv.apply_finite(z) - 1.0 / z).norm() < 1e-14);
    }
    assert!(moebius_normalize(one, one, zero).is_err());
}

#[test]
fn moebius_random_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let p: Vec<SpherePoint> = (0..3).map(|_| SpherePoint::finite(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0))).collect();
        let m = moebius_normalize(p[0], p[1], p[2]).unwrap();
        assert!((m.determinant() - 1.0).norm() < 1e-12);
        assert!(m.apply(p[0]).chordal_distance(SpherePoint::finite(0.0, 0.0)) < 1e-10);
        assert!(m.apply(p[1]).chordal_distance(SpherePoint::finite(1.0, 0.0)) < 1e-10);
        assert!(m.apply(p[2]).chordal_distance(SpherePoint::Infinity) < 1e-10);
    }
}

#[test]
fn modulus_reduction_examples() {
    let r = torus_modulus_reduce(c(2.0, 1.0)).unwrap();
    assert!((r.reduced - c(0.0, 1.0)).norm() < 1e-14);
    assert_eq!(r.witness, Sl2Z { a: 1, b: -2, c: 0, d: 1 });
    let l = c(0.1, 0.1);
    let r = torus_modulus_reduce(l).unwrap();
    assert!(r.converged && r.reduced.norm() >= 1.0 - 1e-12 && in_fundamental_domain(r.reduced));
    assert_eq!(r.witness.det(), 1);
    assert!((r.witness.act(l) - r.reduced).norm() < 1e-12);
}

#[test]
fn modulus_reduction_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..500 {
        let l = c(rng.gen_range(-5.0..5.0), rng.gen_range(0.01..3.0));
        let r = torus_modulus_reduce(l).unwrap();
        assert!(in_fundamental_domain(r.reduced), "{l} -> {}", r.reduced);
        assert!((r.witness.act(l) - r.reduced).norm() < 1e-9 * r.reduced.norm().max(1.0));
        let again = torus_modulus_reduce(r.reduced).unwrap();
        assert_eq!(again.witness, Sl2Z::IDENTITY);
        assert_eq!(torus_isotropy_order(r.reduced).unwrap(), 2);
    }
}

#[test]
fn isotropy_orders() {
    let rho = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0);
    assert_eq!(torus_isotropy_order(c(0.3, 1.7)).unwrap(), 2);
    assert_eq!(torus_isotropy_order(c(0.0, 1.0)).unwrap(), 4);
    assert_eq!(torus_isotropy_order(rho).unwrap(), 6);
    // The entry bound 3 is validated against a sweep to 10.
    for l in [c(0.3, 1.7), c(0.0, 1.0), rho, c(0.5, 2.0), c(0.0, 1.3)] {
        assert_eq!(torus_isotropy_order_with_bound(l, 3), torus_isotropy_order_with_bound(l, 10));
    }
    // Translates of special points have conjugate stabilizers.
    let g = Sl2Z { a: 2, b: 1, c: 1, d: 1 };
    let r = torus_modulus_reduce(g.act(c(0.0, 1.0))).unwrap();
    assert_eq!(torus_isotropy_order(r.reduced).unwrap(), 4);
}
