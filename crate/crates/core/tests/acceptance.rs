//! Acceptance suite: one PASS/FAIL line per criterion. Run with
//! `cargo test --test acceptance`; the exit status is nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use holocurves::cr_operators::*;
use holocurves::flows::*;
use holocurves::holomorphic_solver::*;
use holocurves::moduli_calc::*;
use holocurves::nonsqueezing::*;
use holocurves::symplectic_linear::*;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;
type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: holocurves::Error) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let mut min_gap = f64::INFINITY;
    for k in -3..=5i64 {
        let r = kernel_cokernel_dims(&assemble_sphere_ek(k, sphere_weight(k)).map_err(err)?, RANK_TOL);
        let ind = r.dim_ker as i64 - r.dim_coker as i64;
        min_gap = min_gap.min(r.gap);
        if ind != 2 + 2 * k || r.dim_ker as i64 != (2 + 2 * k).max(0) || r.dim_coker as i64 != (-2 - 2 * k).max(0) {
            bad.push(format!("E_{k}: ({}, {})", r.dim_ker, r.dim_coker));
        }
    }
    for mu in -3..=5i64 {
        let r = kernel_cokernel_dims(&assemble_disk_maslov(mu, 10).map_err(err)?, RANK_TOL);
        min_gap = min_gap.min(r.gap);
        if r.dim_ker as i64 - r.dim_coker as i64 != 1 + mu || r.dim_ker as i64 != (1 + mu).max(0) {
            bad.push(format!("disk μ={mu}: ({}, {})", r.dim_ker, r.dim_coker));
        }
    }
    let r = kernel_cokernel_dims(&assemble_torus_dbar(8, 1, &TorusPotential::zero(1)).map_err(err)?, RANK_TOL);
    min_gap = min_gap.min(r.gap);
    if (r.dim_ker, r.dim_coker) != (2, 2) {
        bad.push(format!("torus: ({}, {})", r.dim_ker, r.dim_coker));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        bad.is_empty() && min_gap >= 1e3 && secs < 5.0,
        format!("19 operators, min gap {min_gap:.1e}, {secs:.2} s, mismatches {bad:?}"),
    )
}

/// `g = p(z) e(z)` with `e = exp(1 - 1/(1 - |z - z₀|²/ρ²))`, `p = a + bz + c z̄`,
/// returning `(g, ∂_z g, ∂_z̄ g)`.
#[derive(Clone, Copy)]
struct Bump {
    z0: C,
    rho: f64,
    a: C,
    b: C,
    c: C,
}

impl Bump {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Self::random_in(rng, 0.3..0.6)
    }

    fn random_in(rng: &mut ChaCha8Rng, radii: std::ops::Range<f64>) -> Self {
        let rho = rng.gen_range(radii);
        let z0 = C::from_polar(rng.gen_range(0.0..0.85 - rho), rng.gen_range(0.0..2.0 * PI));
        let mut cz = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        Self { z0, rho, a: cz(), b: cz(), c: cz() }
    }

    fn eval(&self, z: C) -> (C, C, C) {
        let w = z - self.z0;
        let s = w.norm_sqr() / (self.rho * self.rho);
        if s >= 1.0 {
            return (c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        }
        let e = (1.0 - 1.0 / (1.0 - s)).exp();
        let de = -e / ((1.0 - s) * (1.0 - s) * self.rho * self.rho);
        let p = self.a + self.b * z + self.c * z.conj();
        (p * e, self.b * e + p * de * w.conj(), self.c * e + p * de * w)
    }
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut worst, mut worst_exact): (f64, f64) = (0.0, 0.0);
    for _ in 0..20 {
        let bump = Bump::random(&mut rng);
        let u = GridFunctionBall::from_scalar(1.0, 257, 0.9, |z| bump.eval(z).0).map_err(err)?;
        let n = conjugate_norm_identity(&u).map_err(err)?;
        worst = worst.max(n.relative_gap);
        // Oracle: exact derivatives on the same grid with the nodal rule.
        let h = u.h();
        let (mut a, mut b) = (0.0, 0.0);
        for j in 0..u.nodes {
            for i in 0..u.nodes {
                let (_, dz, dzb) = bump.eval(u.node(i, j));
                a += (2.0 * dz).norm_sqr();
                b += (2.0 * dzb).norm_sqr();
            }
        }
        let (nd, ndb) = ((a * h * h).sqrt(), (b * h * h).sqrt());
        worst_exact = worst_exact.max((nd - ndb).abs() / ndb);
        if (n.norm_dbar - ndb).abs() > 1e-2 * ndb {
            return Err(format!("discrete ‖∂̄u‖ {} far from exact {ndb}", n.norm_dbar));
        }
    }
    check(worst < 1e-6 && worst_exact < 1e-6, format!("20 bumps at 256², max relative gap {worst:.2e} (exact derivatives {worst_exact:.2e})"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut worst_right, mut worst_left): (f64, f64) = (0.0, 0.0);
    for _ in 0..5 {
        // Wide bumps: narrower ones are not resolved at h = 1/128 and the
        // stencil's own truncation error passes 1e-3.
        let bump = Bump::random_in(&mut rng, 0.7..0.85);
        let f = GridFunctionBall::from_scalar(1.0, 257, 0.9, |z| 2.0 * bump.eval(z).2).map_err(err)?;
        if (f.h() - 1.0 / 128.0).abs() > 1e-15 {
            return Err("grid spacing is not 1/128".into());
        }
        let checked = cauchy_transform_checked(&f, 1e-3).map_err(err)?;
        let tf = checked.transform;
        // ∂̄Tf by five-point differences at interior nodes.
        let h = f.h();
        let d = |a: C, b: C, c: C, e: C| (a - e + 8.0 * (c - b)) / (12.0 * h);
        let mut r: f64 = 0.0;
        for j in 2..f.nodes - 2 {
            for i in 2..f.nodes - 2 {
                let ds = d(tf.get(i - 2, j, 0), tf.get(i - 1, j, 0), tf.get(i + 1, j, 0), tf.get(i + 2, j, 0));
                let dt = d(tf.get(i, j - 2, 0), tf.get(i, j - 1, 0), tf.get(i, j + 1, 0), tf.get(i, j + 2, 0));
                r = r.max((ds + C::i() * dt - f.get(i, j, 0)).norm());
            }
        }
        worst_right = worst_right.max(r / f.sup_norm()).max(checked.estimated_error);
        // T(∂̄g) against the known g.
        let mut l: f64 = 0.0;
        let mut gmax: f64 = 0.0;
        for j in 0..f.nodes {
            for i in 0..f.nodes {
                let g = bump.eval(f.node(i, j)).0;
                l = l.max((tf.get(i, j, 0) - g).norm());
                gmax = gmax.max(g.norm());
            }
        }
        worst_left = worst_left.max(l / gmax);
    }
    check(
        worst_right < 1e-3 && worst_left < 1e-3,
        format!("5 densities at h = 1/128: ‖∂̄Tf - f‖/‖f‖ ≤ {worst_right:.2e}, ‖T∂̄g - g‖/‖g‖ ≤ {worst_left:.2e}"),
    )
}

fn criterion_4() -> Outcome {
    let h = ScalarHamiltonian::harmonic_oscillator(2);
    let w = BilinearForm::standard(2).map_err(err)?;
    let field = HamiltonianField::new(&h, &w).map_err(err)?;
    let p0 = DVector::from_vec(vec![1.0, 0.0]);
    let r = flow_with_jacobian(&field, &p0, 10.0, 1e-3).map_err(err)?;
    // Oracle: DφᵀΩDφ - Ω from the recorded Jacobians.
    let sympl = r
        .samples
        .iter()
        .map(|s| {
            let d = s.jacobian_matrix();
            (d.transpose() * w.matrix() * &d - w.matrix()).norm()
        })
        .fold(0.0, f64::max);
    let drift = r.samples.iter().map(|s| (0.5 * s.point_vector().norm_squared() - 0.5).abs()).fold(0.0, f64::max);
    let period = upward_crossing_time(&r, 1).ok_or("no return")?;
    let coarse = symplecticity_residual(&flow_with_jacobian(&field, &p0, 10.0, 0.1).map_err(err)?, &w);
    let fine = symplecticity_residual(&flow_with_jacobian(&field, &p0, 10.0, 0.05).map_err(err)?, &w);
    check(
        sympl < 1e-8 && drift < 1e-8 && (period - 2.0 * PI).abs() < 1e-6 && coarse / fine >= 12.0,
        format!(
            "residual {sympl:.2e}, drift {drift:.2e}, period error {:.2e}, halving ratio {:.1} (h = 0.1 → 0.05)",
            (period - 2.0 * PI).abs(),
            coarse / fine
        ),
    )
}

fn criterion_5() -> Outcome {
    let w = FnTwoForm::area_density(|x, y| 1.0 + x * x + y * y);
    let mut pts = vec![DVector::from_vec(vec![0.0, 0.0])];
    for ring in 1..=3 {
        let rho = 0.1 * ring as f64 / 3.0;
        for k in 0..8 {
            let a = 2.0 * PI * k as f64 / 8.0 + 0.1 * ring as f64;
            pts.push(DVector::from_vec(vec![rho * a.cos(), rho * a.sin()]));
        }
    }
    let opts = MoserOptions { radius: 0.2, steps: 40, ..Default::default() };
    let start = Instant::now();
    let r = moser_isotopy(&w, None, &pts, &opts).map_err(err)?;
    let secs = start.elapsed().as_secs_f64();
    // Oracle: pull back with a finite-difference Jacobian of φ₁.
    let phi = |p: &DVector<f64>| -> Result<DVector<f64>, String> {
        let s = moser_isotopy(&w, None, &[p.clone()], &opts).map_err(err)?;
        Ok(DVector::from_vec(s.samples[0].phi.clone()))
    };
    let mut worst: f64 = 0.0;
    for p in &pts {
        let step = 1e-5;
        let mut cols = Vec::new();
        for j in 0..2 {
            let (mut a, mut b) = (p.clone(), p.clone());
            a[j] += step;
            b[j] -= step;
            cols.push((phi(&a)? - phi(&b)?) / (2.0 * step));
        }
        let q = phi(p)?;
        let pulled = DMatrix::from_columns(&cols).determinant() * (1.0 + q[0] * q[0] + q[1] * q[1]);
        worst = worst.max((pulled - 1.0).abs());
    }
    check(
        r.max_residual < 1e-6 && worst < 1e-6 && secs < 5.0,
        format!("25 points: residual {:.2e}, finite-difference pullback {worst:.2e}, {secs:.2} s", r.max_residual),
    )
}

fn criterion_6() -> Outcome {
    let times = vec![0.25, 0.5, 1.0];
    let opts = GrayOptions { steps: 32, record_times: times.clone() };
    let points = torus_grid(16);
    let pulled = PulledBackContact { form: ContactFormT3::new(2).map_err(err)?, amplitude: 0.05 };
    let interp = ContactInterpolation { start: ContactFormT3::new(1).map_err(err)?, end: PhaseShiftedContact { n: 1, phase: 1.0 } };
    let families: [(&str, &dyn TimeDependentOneForm); 2] = [("sheared pullback", &pulled), ("phase interpolation", &interp)];
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, fam) in families {
        let base = gray_isotopy(fam, &points, &opts).map_err(err)?;
        // Oracle: wedge from a finite-difference Jacobian of φ_t.
        let step = 1e-5;
        let mut shifted = Vec::new();
        for j in 0..3 {
            let mut e = Vector3::zeros();
            e[j] = step;
            let plus: Vec<_> = points.iter().map(|p| p + e).collect();
            let minus: Vec<_> = points.iter().map(|p| p - e).collect();
            shifted.push((gray_isotopy(fam, &plus, &opts).map_err(err)?, gray_isotopy(fam, &minus, &opts).map_err(err)?));
        }
        let mut fd: f64 = 0.0;
        for (idx, s) in base.samples.iter().enumerate() {
            let mut d = Matrix3::zeros();
            for j in 0..3 {
                let (a, b) = (&shifted[j].0.samples[idx], &shifted[j].1.samples[idx]);
                d.set_column(j, &((Vector3::from(a.phi) - Vector3::from(b.phi)) / (2.0 * step)));
            }
            let pulled_back = d.transpose() * fam.eval(s.t, &Vector3::from(s.phi));
            fd = fd.max(pulled_back.cross(&fam.eval(0.0, &Vector3::from(s.x))).norm());
        }
        ok &= base.max_wedge_residual < 1e-6 && fd < 1e-6 && base.samples.len() == points.len() * times.len();
        lines.push(format!("{name}: {:.1e} (finite differences {fd:.1e})", base.max_wedge_residual));
    }
    check(ok, format!("16³ grid, t ∈ {{0.25, 0.5, 1}}: {}", lines.join("; ")))
}

fn criterion_7() -> Outcome {
    let mut field_err: f64 = 0.0;
    let (mut closed, mut open, mut wrong) = (0usize, 0usize, Vec::new());
    let grid = torus_grid(32);
    for n in 1..=3u32 {
        let alpha = ContactFormT3::new(n).map_err(err)?;
        for (idx, x) in grid.iter().enumerate() {
            let a = 2.0 * PI * n as f64 * x[2];
            field_err = field_err.max((reeb_field(&alpha, x).map_err(err)? - Vector3::new(a.cos(), a.sin(), 0.0)).norm());
            let o = reeb_orbit_class(&alpha, x, 1.0, 0.1).map_err(err)?;
            // The direction angle is πNk/16 for η = k/32; its slope is rational
            // exactly when Nk ≡ 0 mod 4.
            let k = idx % 32;
            let expect_closed = (n as usize * k) % 4 == 0;
            match o.class {
                OrbitClass::Closed { class, period, .. } => {
                    closed += 1;
                    let lift = [a.cos() * period, a.sin() * period, 0.0];
                    let consistent = (0..3).all(|i| (lift[i] - class[i] as f64).abs() < 1e-9);
                    if class == [0, 0, 0] || !consistent || !expect_closed {
                        wrong.push((n, *x, class));
                    }
                }
                OrbitClass::NonClosed { .. } => {
                    open += 1;
                    if expect_closed {
                        wrong.push((n, *x, [0, 0, 0]));
                    }
                }
            }
        }
    }
    check(
        field_err < 1e-12 && wrong.is_empty() && closed > 0,
        format!("field error {field_err:.1e}; {closed} closed orbits, all with nonzero class, {open} non-closed; {} misclassified", wrong.len()),
    )
}

fn criterion_8() -> Outcome {
    let (z, o) = (c(0.0, 0.0), c(1.0, 0.0));
    let radii: Vec<f64> = (0..50).map(|k| 0.02 + 0.98 * k as f64 / 49.0).collect();
    let cases = [(vec![vec![z, o], vec![z]], PI), (vec![vec![z, o], vec![z, o]], PI), (vec![vec![z, z, o], vec![z]], 2.0 * PI)];
    let (mut value_err, mut flux_err, mut mono): (f64, f64, bool) = (0.0, 0.0, true);
    for (comps, expect) in cases {
        let u = AnalyticCurve::new(comps, 1.5, z).map_err(err)?;
        let p = monotonicity_profile(&u, &radii, (128, 6)).map_err(err)?;
        mono &= p.f.windows(2).all(|w| w[1] >= w[0] - 1e-4);
        value_err = p.f.iter().map(|f| (f - expect).abs()).fold(value_err, f64::max);
        for r in [0.1, 0.5, 0.9] {
            let x = boundary_flux_crosscheck(&u, r, (128, 6)).map_err(err)?;
            if !x.conclusive {
                return Err(format!("flux trace inconclusive at r = {r}"));
            }
            flux_err = flux_err.max(x.difference).max((x.flux - expect).abs());
        }
    }
    check(
        value_err < 1e-3 && mono && flux_err < 1e-3,
        format!("50 radii: max |F - F_exact| {value_err:.1e}, nondecreasing {mono}, flux discrepancy {flux_err:.1e}"),
    )
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = 0;
    for _ in 0..100 {
        let n = rng.gen_range(5..80);
        let pts: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0f64..1.0).powi(4) * 100.0).collect();
        let s = FiniteMetricSample::from_points(&pts, g.clone()).map_err(err)?;
        let x0 = rng.gen_range(0..n);
        let eps0 = rng.gen_range(0.05..1.5);
        let h = hofer_select(&s, x0, eps0).map_err(err)?;
        // Brute-force oracle on Euclidean distances.
        let d = |a: usize, b: usize| ((pts[a][0] - pts[b][0]).powi(2) + (pts[a][1] - pts[b][1]).powi(2)).sqrt();
        let (x, eps) = (h.x, h.eps);
        let ok = eps > 0.0
            && eps <= eps0
            && g[x] * eps >= g[x0] * eps0
            && d(x, x0) <= 2.0 * eps0
            && (0..n).all(|y| d(x, y) > eps || g[y] <= 2.0 * g[x]);
        if !ok {
            failures += 1;
        }
    }
    check(failures == 0, format!("100 instances, {failures} failures"))
}

fn criterion_10() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [8, 12, 16] {
        let t = product_transversality_check(c(0.5, 0.5), n).map_err(err)?;
        ok &= t.kernel_dim == 8 && t.full.gap >= 1e3 && t.reliable;
        parts.push(format!("N={n}: ker {} ({}+{}), gap {:.1e}", t.kernel_dim, t.sphere_block.dim_ker, t.torus_block.dim_ker, t.full.gap));
    }
    check(ok, parts.join("; "))
}

fn product_energies() -> Result<Vec<f64>, String> {
    let form = ProductForm::new(1.0).map_err(err)?;
    [8, 12, 16]
        .iter()
        .map(|&n| {
            let map = DiscreteSphereMap::product(n, c(0.5, 0.5)).map_err(err)?;
            energy(&map, &form, None, &EnergyOptions::default()).map(|e| e.energy).map_err(err)
        })
        .collect()
}

fn criterion_11(energies: &mut Vec<f64>) -> Outcome {
    let target = ProductTarget::new(1.0).map_err(err)?;
    let h = HomotopyJ::cayley(0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut worst_res, mut worst_e, mut worst_time, mut worst_cross): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..5 {
        let p = TargetPoint::new(rng.gen_range(1..=2), C::from_polar(rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0 * PI)), c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)));
        let start = Instant::now();
        let r = continuation_find_sphere(&h, &target, &p, 10, 12, &NewtonOptions::default()).map_err(|e| format!("target {p:?}: {e}"))?;
        worst_time = worst_time.max(start.elapsed().as_secs_f64());
        worst_res = worst_res.max(r.final_residual);
        for s in &r.steps {
            worst_e = worst_e.max((s.energy - 1.0).abs());
            energies.push(s.energy);
        }
        // Cross-check with a different partition of the sphere.
        let j = h.at(1.0);
        let opts = EnergyOptions { partition: Partition::LogSymmetric { width: 0.5 }, ..Default::default() };
        let e2 = energy(&r.map, &target.form, Some(&j), &opts).map_err(err)?.energy;
        worst_cross = worst_cross.max((e2 - 1.0).abs());
    }
    check(
        worst_res < 1e-8 && worst_e < 1e-6 && worst_cross < 1e-6 && worst_time < 60.0,
        format!("5 targets: final residual ≤ {worst_res:.1e}, |E - ℏ| ≤ {worst_e:.1e} (other partition {worst_cross:.1e}), ≤ {worst_time:.1} s per target"),
    )
}

fn criterion_12(energies: &[f64]) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = !energies.is_empty();
    for &e in energies {
        let k = e.round();
        worst = worst.max((e - k).abs());
        ok &= k >= 1.0 && (e - k).abs() < 1e-4 && energy_quantization_check(e, 1.0, 1e-10) == Quantization::Multiple { k: 1 };
    }
    check(ok, format!("{} curves, all E/ℏ = 1 within {worst:.1e}", energies.len()))
}

fn criterion_13() -> Outcome {
    let mut bad = Vec::new();
    for n in 1..=5 {
        if curve_index(&CurveTopology { g: 0, m: 1, n, c1a: 2 }) != 2 * n as i64 {
            bad.push(format!("virdim n={n}"));
        }
    }
    for k in 1..=5 {
        if curve_index(&CurveTopology { g: 0, m: 0, n: 4, c1a: -k }) != 2 - 2 * k {
            bad.push(format!("cover k={k}"));
        }
    }
    for ((g, m), d) in [((0, 4), 2), ((1, 0), 2), ((2, 0), 6)] {
        if teichmueller_dimension(g, m).dim_t != d {
            bad.push(format!("T({g},{m})"));
        }
    }
    let rho = C::from_polar(1.0, PI / 3.0);
    for (l, o) in [(c(0.3, 1.7), 2), (c(0.0, 1.0), 4), (rho, 6)] {
        if torus_isotropy_order(l).map_err(err)? != o {
            bad.push(format!("isotropy {l}"));
        }
    }
    check(bad.is_empty(), format!("virdim, cover index, Teichmüller and isotropy values; mismatches {bad:?}"))
}

fn criterion_14() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let k: Vec<f64> = (0..6).map(|_| rng.gen_range(-0.4..0.4)).collect();
        let j = AlmostComplexField::from_cayley(2, move |p| {
            let a = k[0] * (2.0 * p[0]).sin() + k[1] * p[1] * p[1] + k[2] * p[0] * p[1];
            let b = k[3] * (3.0 * p[1]).cos() + k[4] * p[0] + k[5] * p[0] * p[0] * p[1];
            DMatrix::from_row_slice(2, 2, &[a, b, b, -a])
        })
        .with_fd_step(1e-4);
        let p = DVector::from_fn(2, |_, _| rng.gen_range(-0.5..0.5));
        let x = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
        let y = DVector::from_fn(2, |_, _| rng.gen_range(-1.0..1.0));
        worst = worst.max(nijenhuis_tensor(&j, &p, &x, &y).map_err(err)?.norm());
    }
    let field = || {
        AlmostComplexField::from_cayley(4, |p| {
            let mut m = DMatrix::zeros(4, 4);
            m[(0, 2)] = 0.5 * p[1] * p[1] + 0.3 * p[2];
            m[(1, 3)] = 0.4 * (p[0] * p[3]).sin();
            m[(2, 1)] = 0.3 * p[0] * p[0];
            m[(3, 0)] = 0.2 * p[3];
            antilinear_part(&m)
        })
    };
    let p = DVector::from_vec(vec![0.3, -0.2, 0.4, 0.1]);
    let (x, y) = (DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]), DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]));
    let n = |h: f64| nijenhuis_tensor(&field().with_fd_step(h), &p, &x, &y).map_err(err);
    let big = n(1e-4)?.norm();
    let (n1, n2, n4) = (n(4e-2)?, n(2e-2)?, n(1e-2)?);
    let ratio = (&n1 - &n2).norm() / (&n2 - &n4).norm();
    check(
        worst < 1e-6 && big > 1e-2 && (ratio - 4.0).abs() < 0.2,
        format!("R²: max ‖N_J‖ {worst:.1e}; R⁴: ‖N_J‖ = {big:.3}, step-halving ratio {ratio:.3}"),
    )
}

fn criterion_15() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let mut map = DiscreteSphereMap::product(8, c(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0))).map_err(err)?;
        let x0: Vec<f64> = map.unknowns().iter().map(|v| v + 0.05 * rng.gen_range(-1.0..1.0)).collect();
        map.set_unknowns(&x0).map_err(err)?;
        let j = CayleyPathJ::new(rng.gen_range(0.0..0.2), rng.gen_range(0.0..1.0));
        let colloc = Collocation::new(&map);
        let lin = linearized_operator(&map, &j, &colloc).map_err(err)?;
        let v = DVector::from_fn(x0.len(), |_, _| rng.gen_range(-1.0..1.0)).normalize();
        let step = 1e-6;
        let shifted = |s: f64| -> Result<DVector<f64>, String> {
            let mut m = map.clone();
            let x: Vec<f64> = x0.iter().zip(v.iter()).map(|(a, b)| a + s * b).collect();
            m.set_unknowns(&x).map_err(err)?;
            Ok(cr_residual(&m, &j, &colloc).map_err(err)?.to_vector())
        };
        let fd = (shifted(step)? - shifted(-step)?) / (2.0 * step);
        let action = &lin * &v;
        worst = worst.max((action - &fd).norm() / fd.norm());
    }
    check(worst < 1e-5, format!("20 random pairs, max relative error {worst:.2e}"))
}

fn main() {
    let mut energies = product_energies().unwrap_or_default();
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome + '_>)> = vec![
        ("Riemann-Roch sweep", Box::new(criterion_1)),
        ("L² conjugate-norm identity", Box::new(criterion_2)),
        ("Cauchy transform right inverse", Box::new(criterion_3)),
        ("Hamiltonian symplecticity", Box::new(criterion_4)),
        ("Moser/Darboux", Box::new(criterion_5)),
        ("Gray stability", Box::new(criterion_6)),
        ("Reeb orbits on T³", Box::new(criterion_7)),
        ("Monotonicity", Box::new(criterion_8)),
        ("Hofer lemma", Box::new(criterion_9)),
        ("Product transversality", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    let mut report = |i: usize, name: &str, outcome: Outcome, secs: f64| {
        let (tag, detail) = match outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {i:>2} {tag} {name} [{secs:.1} s]: {detail}");
    };
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let o = f();
        report(i + 1, name, o, t.elapsed().as_secs_f64());
    }
    let t = Instant::now();
    let o = criterion_11(&mut energies);
    report(11, "Continuation pipeline", o, t.elapsed().as_secs_f64());
    let t = Instant::now();
    report(12, "Energy quantization", criterion_12(&energies), t.elapsed().as_secs_f64());
    let rest: [(&str, fn() -> Outcome); 3] =
        [("Index/dimension calculators", criterion_13), ("Nijenhuis tensor", criterion_14), ("Linearization gradient check", criterion_15)];
    for (k, (name, f)) in rest.into_iter().enumerate() {
        let t = Instant::now();
        let o = f();
        report(13 + k, name, o, t.elapsed().as_secs_f64());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
