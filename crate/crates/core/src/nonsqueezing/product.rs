use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cr_operators::{block_singular_values, rank_from_singular_values, RankReport, RANK_TOL};
use crate::error::{Error, Result};
use crate::holomorphic_solver::{
    cr_residual, energy, linearized_operator, newton_solve, CayleyCoefficients, CayleyPathJ, Collocation, DiscreteSphereMap, EnergyOptions,
    MarkedPoint, NewtonOptions, NewtonReport, ProductForm, ProductJ, SphereSolution, TargetAlmostComplexField, TargetPoint,
};
use crate::quadrature::gauss_legendre;

/// `S² × T²` with `Ω = σ ⊕ ω₀`, `σ` the round area form of total area `ℏ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductTarget {
    pub form: ProductForm,
}

impl ProductTarget {
    pub fn new(hbar: f64) -> Result<Self> {
        let t = Self { form: ProductForm::new(hbar)? };
        let q = t.area_by_quadrature();
        if (q - hbar).abs() > 1e-8 * hbar.max(1.0) {
            return Err(Error::Precondition(format!("∫σ = {q} does not match ℏ = {hbar}")));
        }
        Ok(t)
    }

    pub fn hbar(&self) -> f64 {
        self.form.hbar
    }

    /// `∫σ` over both hemispheres by polar Gauss-Legendre quadrature.
    pub fn area_by_quadrature(&self) -> f64 {
        let (r, w) = gauss_legendre(40, 0.0, 1.0);
        let disk: f64 = r.iter().zip(&w).map(|(r, w)| self.form.sigma(Complex64::new(*r, 0.0)) * r * w).sum();
        2.0 * 2.0 * std::f64::consts::PI * disk
    }
}

/// `t ↦ J_t`, a Cayley path from the product structure `J₀ = i ⊕ i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomotopyJ {
    pub amplitude: f64,
    pub coefficients: CayleyCoefficients,
}

impl HomotopyJ {
    pub fn cayley(amplitude: f64) -> Self {
        Self { amplitude, coefficients: CayleyCoefficients::default() }
    }

    pub fn at(&self, t: f64) -> CayleyPathJ {
        CayleyPathJ { amplitude: self.amplitude, t, coefficients: self.coefficients.clone() }
    }

    pub fn descriptor(&self) -> String {
        format!("cayley path, amplitude {}", self.amplitude)
    }

    /// Checks `J_t² = -1` and taming by `Ω` at random `(t, p)`; returns the
    /// smallest taming eigenvalue seen.
    pub fn validate(&self, target: &ProductTarget, samples: usize, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = f64::INFINITY;
        for _ in 0..samples {
            let t = rng.gen_range(0.0..=1.0);
            let p = TargetPoint::new(
                rng.gen_range(1..=2),
                Complex64::from_polar(rng.gen_range(0.0f64..1.0).sqrt(), rng.gen_range(0.0..std::f64::consts::TAU)),
                Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)),
            );
            let j = self.at(t).j(&p)?;
            let sq = (j * j + nalgebra::Matrix4::identity()).amax();
            if sq > 1e-10 {
                return Err(Error::Precondition(format!("J_t² + 1 = {sq:.2e} at t = {t}")));
            }
            let (ok, min) = target.form.tames(&j, &p)?;
            if !ok {
                return Err(Error::Taming(format!("Ω does not tame J_{t} at {p:?} (eigenvalue {min:.3e})")));
            }
            worst = worst.min(min);
        }
        Ok(worst)
    }
}

/// `u_m(z) = (z, m)` and its evaluation at `ζ`.
#[derive(Debug, Clone, Serialize)]
pub struct ProductCurve {
    pub map: DiscreteSphereMap,
    pub ev: TargetPoint,
    pub residual: f64,
}

/// The curve `u_m` at truncation `p`, with `ev(u_m, ζ) = (ζ, m)`; `ζ = None` is ∞.
pub fn product_moduli_curve(m: Complex64, zeta: Option<Complex64>, p: usize) -> Result<ProductCurve> {
    let map = DiscreteSphereMap::product(p, m)?;
    let residual = cr_residual(&map, &ProductJ, &Collocation::new(&map))?.sup;
    let ev = match zeta {
        Some(z) if z.norm() <= 1.0 => map.eval(1, z, Some(1))?.point,
        Some(z) => map.eval(2, 1.0 / z, Some(2))?.point,
        None => map.eval(2, Complex64::new(0.0, 0.0), Some(2))?.point,
    };
    Ok(ProductCurve { map, ev, residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalityCheck {
    pub truncation: usize,
    pub full: RankReport,
    pub sphere_block: RankReport,
    pub torus_block: RankReport,
    pub kernel_dim: usize,
    pub smallest_nonzero: f64,
    pub reliable: bool,
}

/// Kernel of the linearization at `u_m` without gauge fixing. Regularity
/// means a kernel of dimension 8: 6 from the holomorphic vector fields of
/// `S²` and 2 from constant torus directions.
pub fn product_transversality_check(m: Complex64, truncation: usize) -> Result<TransversalityCheck> {
    let map = DiscreteSphereMap::product_gauge_free(truncation, m)?;
    let lin = linearized_operator(&map, &ProductJ, &Collocation::new(&map))?;
    let nh = 2 * map.basis.h_terms.len();
    let sphere_rows: Vec<usize> = (0..lin.nrows()).filter(|r| r % 4 < 2).collect();
    let torus_rows: Vec<usize> = (0..lin.nrows()).filter(|r| r % 4 >= 2).collect();
    let sphere = lin.select_rows(&sphere_rows).columns(0, nh).into_owned();
    let torus = lin.select_rows(&torus_rows).columns(nh, lin.ncols() - nh).into_owned();
    let off = lin.select_rows(&sphere_rows).columns(nh, lin.ncols() - nh).amax().max(lin.select_rows(&torus_rows).columns(0, nh).amax());
    if off != 0.0 {
        return Err(Error::Precondition(format!("linearization at u_m is not block diagonal ({off:.2e})")));
    }
    // Rank is unchanged by column scaling; unit columns undo the binomial
    // spread of the weighted monomials.
    let normalise = |mut m: nalgebra::DMatrix<f64>| {
        for mut c in m.column_iter_mut() {
            let n = c.norm();
            if n > 0.0 {
                c /= n;
            }
        }
        m
    };
    let (sphere, torus) = (normalise(sphere), normalise(torus));
    let sv_s = block_singular_values(&sphere);
    let sv_t = block_singular_values(&torus);
    let mut sv: Vec<f64> = sv_s.iter().chain(&sv_t).copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let full = rank_from_singular_values(&sv, lin.nrows(), lin.ncols(), RANK_TOL);
    let sphere_block = rank_from_singular_values(&sv_s, sphere.nrows(), sphere.ncols(), RANK_TOL);
    let torus_block = rank_from_singular_values(&sv_t, torus.nrows(), torus.ncols(), RANK_TOL);
    let threshold = RANK_TOL * full.sigma_max;
    let smallest_nonzero = sv.iter().copied().filter(|s| *s > threshold).fold(f64::INFINITY, f64::min);
    Ok(TransversalityCheck {
        truncation,
        kernel_dim: full.dim_ker,
        smallest_nonzero,
        reliable: full.reliable && sphere_block.reliable && torus_block.reliable,
        full,
        sphere_block,
        torus_block,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationStep {
    pub t: f64,
    pub report: NewtonReport,
    pub energy: f64,
    pub marked: Option<(u8, Complex64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationResult {
    pub steps: Vec<ContinuationStep>,
    pub map: DiscreteSphereMap,
    pub marked: Option<(u8, Complex64)>,
    /// Distance from `u(z*)` to the requested point at `t = 1`.
    pub ev_defect: f64,
    pub final_residual: f64,
}

fn global(marked: (u8, Complex64)) -> Option<Complex64> {
    match marked {
        (1, z) => Some(z),
        (_, z) if z.norm() == 0.0 => None,
        (_, z) => Some(1.0 / z),
    }
}

/// Follows the sphere through `p` from `u_m` at `t = 0` to `t = 1`, reusing
/// each solution as the predictor for the next `t`.
pub fn continuation_find_sphere(
    h: &HomotopyJ,
    target: &ProductTarget,
    p: &TargetPoint,
    steps: usize,
    truncation: usize,
    opts: &NewtonOptions,
) -> Result<ContinuationResult> {
    if steps == 0 {
        return Err(Error::Precondition("at least one continuation step".into()));
    }
    h.validate(target, 200, 17)?;
    let zeta = p.in_chart(1).ok().map(|q| q.w);
    let mut map = product_moduli_curve(p.x, zeta, truncation)?.map;
    let mut guess = zeta;
    let mut last_good_t = 0.0;
    let mut out = Vec::with_capacity(steps);
    let mut marked = None;
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        let j = h.at(t);
        let mp = MarkedPoint { guess, target: *p };
        let sol: SphereSolution = newton_solve(&map, &j, Some(&mp), opts)
            .map_err(|e| Error::ContinuationStuck { last_good_t, reason: format!("{e}; try more steps") })?;
        let e = energy(&sol.map, &target.form, Some(&j), &EnergyOptions::default())?;
        if !e.taming_warnings.is_empty() {
            return Err(Error::Taming(format!("{} quadrature nodes untamed at t = {t}", e.taming_warnings.len())));
        }
        if (e.energy - target.hbar()).abs() > 1e-6 {
            return Err(Error::ContinuationStuck { last_good_t, reason: format!("energy {} differs from ℏ = {}", e.energy, target.hbar()) });
        }
        map = sol.map;
        marked = sol.marked;
        guess = marked.and_then(global);
        last_good_t = t;
        out.push(ContinuationStep { t, report: sol.report, energy: e.energy, marked });
    }
    let j1 = h.at(1.0);
    let final_residual = cr_residual(&map, &j1, &Collocation::new(&map))?.sup;
    let ev_defect = match marked {
        Some((chart, z)) => map.eval(chart, z, None)?.point.distance(p),
        None => 0.0,
    };
    Ok(ContinuationResult { steps: out, map, marked, ev_defect, final_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Quantization {
    Constant,
    Multiple { k: u64 },
    Inconsistent { ratio: f64 },
}

/// Nonconstant closed spheres have energy in `ℏ·Z_{>0}`.
pub fn energy_quantization_check(e: f64, hbar: f64, constant_tol: f64) -> Quantization {
    if e.abs() < constant_tol {
        return Quantization::Constant;
    }
    let ratio = e / hbar;
    let k = ratio.round();
    if k >= 1.0 && (ratio - k).abs() <= 1e-4 {
        Quantization::Multiple { k: k as u64 }
    } else {
        Quantization::Inconsistent { ratio }
    }
}
