use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{ball_grid, rk4_step, VectorField};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::symplectic_linear::{pfaffian, standard_omega};

/// A closed 2-form on a ball, evaluated as an antisymmetric matrix.
pub trait TwoFormField: Send + Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &DVector<f64>) -> DMatrix<f64>;
}

type FormFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

pub struct FnTwoForm {
    dim: usize,
    f: Box<FormFn>,
}

impl FnTwoForm {
    pub fn new(dim: usize, f: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        Self { dim, f: Box::new(f) }
    }

    /// `ρ(x, y) dx ∧ dy` on `R²`.
    pub fn area_density(rho: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(2, move |x| {
            let r = rho(x[0], x[1]);
            DMatrix::from_row_slice(2, 2, &[0.0, r, -r, 0.0])
        })
    }
}

impl TwoFormField for FnTwoForm {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, x: &DVector<f64>) -> DMatrix<f64> {
        (self.f)(x)
    }
}

type PrimitiveFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;

#[derive(Debug, Clone)]
pub struct MoserOptions {
    pub radius: f64,
    /// RK4 steps over `t ∈ [0, 1]`.
    pub steps: usize,
    /// Grid resolution per axis for the nondegeneracy check.
    pub check_per_axis: usize,
    /// Number of `t` values in the nondegeneracy check.
    pub check_times: usize,
}

impl Default for MoserOptions {
    fn default() -> Self {
        Self { radius: 0.2, steps: 50, check_per_axis: 9, check_times: 21 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MoserSample {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    pub jacobian: Vec<f64>,
    /// `‖Dφᵀ Ω(φ(x)) Dφ - Ω₀‖_F`.
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MoserResult {
    pub samples: Vec<MoserSample>,
    pub max_residual: f64,
    /// Minimum over the `(t, grid)` check of `Pf(ω_t) / ‖ω_t‖ⁿ`.
    pub pfaffian_margin: f64,
}

/// Isotopy vector field `Y_t = Ω_t⁻¹ (λ - λ₀)` with `ω_t = tω + (1-t)ω₀`.
struct MoserField<'a> {
    omega: &'a dyn TwoFormField,
    omega0: DMatrix<f64>,
    primitive: Option<Box<PrimitiveFn>>,
    radius: f64,
}

impl MoserField<'_> {
    fn lambda_dot(&self, x: &DVector<f64>) -> DVector<f64> {
        let lambda = match &self.primitive {
            Some(p) => p(x),
            None => radial_primitive(self.omega, x, RADIAL_NODES),
        };
        lambda - 0.5 * (self.omega0.transpose() * x)
    }
}

const RADIAL_NODES: usize = 16;

impl VectorField for MoserField<'_> {
    fn dim(&self) -> usize {
        self.omega.dim()
    }
    fn eval(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        if x.norm() > self.radius {
            return Err(Error::Domain(x.iter().copied().collect()));
        }
        let omega_t = self.omega.eval(x) * t + &self.omega0 * (1.0 - t);
        let lu = omega_t.lu();
        lu.solve(&self.lambda_dot(x)).ok_or_else(|| Error::Obstruction {
            t,
            point: x.iter().copied().collect(),
            reason: "ω_t is singular".into(),
        })
    }
}

/// Radial homotopy primitive `λ_x = ∫₀¹ t Ω(tx)ᵀ x dt`, exact for polynomial
/// coefficients up to the Gauss-Legendre order.
pub fn radial_primitive(omega: &dyn TwoFormField, x: &DVector<f64>, nodes: usize) -> DVector<f64> {
    let (ts, ws) = gauss_legendre(nodes, 0.0, 1.0);
    let mut acc = DVector::zeros(x.len());
    for (t, w) in ts.iter().zip(&ws) {
        acc += omega.eval(&(x * *t)).transpose() * x * (t * w);
    }
    acc
}

/// Moser isotopy `φ₁` with `φ₁*ω = ω₀`, sampled at the given points of the
/// ball. When `primitive` is absent the radial homotopy primitive is used;
/// a supplied primitive is shifted by a constant so that `λ(0) = λ₀(0) = 0`.
pub fn moser_isotopy(
    omega: &dyn TwoFormField,
    primitive: Option<Box<PrimitiveFn>>,
    samples: &[DVector<f64>],
    opts: &MoserOptions,
) -> Result<MoserResult> {
    let dim = omega.dim();
    let omega0 = standard_omega(dim);
    let zero = DVector::zeros(dim);
    if (omega.eval(&zero) - &omega0).norm() > 1e-10 {
        return Err(Error::Precondition("ω(0) must equal ω₀".into()));
    }
    let pfaffian_margin = nondegeneracy_margin(omega, &omega0, opts)?;
    let primitive = primitive.map(|p| {
        let shift = p(&zero);
        Box::new(move |x: &DVector<f64>| p(x) - &shift) as Box<PrimitiveFn>
    });
    let field = MoserField { omega, omega0: omega0.clone(), primitive, radius: opts.radius };
    integrate(&field, omega, &omega0, samples, opts, pfaffian_margin)
}

fn integrate(
    field: &dyn VectorField,
    omega: &dyn TwoFormField,
    omega0: &DMatrix<f64>,
    samples: &[DVector<f64>],
    opts: &MoserOptions,
    pfaffian_margin: f64,
) -> Result<MoserResult> {
    let dim = omega.dim();
    let h = 1.0 / opts.steps as f64;
    let mut out = Vec::with_capacity(samples.len());
    let mut max_residual: f64 = 0.0;
    for x0 in samples {
        let mut x = x0.clone();
        let mut phi = DMatrix::identity(dim, dim);
        for k in 0..opts.steps {
            let (x1, p1) = rk4_step(field, k as f64 * h, &x, &phi, h)?;
            x = x1;
            phi = p1;
        }
        let residual = (phi.transpose() * omega.eval(&x) * &phi - omega0).norm();
        max_residual = max_residual.max(residual);
        out.push(MoserSample {
            x: x0.iter().copied().collect(),
            phi: x.iter().copied().collect(),
            jacobian: (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| phi[(i, j)]).collect(),
            residual,
        });
    }
    Ok(MoserResult { samples: out, max_residual, pfaffian_margin })
}

fn nondegeneracy_margin(omega: &dyn TwoFormField, omega0: &DMatrix<f64>, opts: &MoserOptions) -> Result<f64> {
    let dim = omega.dim();
    let n = (dim / 2) as i32;
    let mut margin = f64::INFINITY;
    let grid = ball_grid(&DVector::zeros(dim), opts.radius, opts.check_per_axis);
    for i in 0..opts.check_times {
        let t = if opts.check_times == 1 { 1.0 } else { i as f64 / (opts.check_times - 1) as f64 };
        for p in &grid {
            let w = omega.eval(p) * t + omega0 * (1.0 - t);
            let rel = pfaffian(&w) / w.norm().powi(n);
            if rel <= 1e-10 {
                return Err(Error::Obstruction {
                    t,
                    point: p.iter().copied().collect(),
                    reason: format!("ω_t degenerate (relative Pfaffian {rel:.3e})"),
                });
            }
            margin = margin.min(rel);
        }
    }
    Ok(margin)
}
