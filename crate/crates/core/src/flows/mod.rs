//! Flows of time-dependent vector fields: Hamiltonian and Liouville fields,
//! the Moser isotopy, Gray stability on `T³` and Reeb dynamics.

mod gray;
mod moser;
mod reeb;

pub use gray::{gray_isotopy, ContactInterpolation, GrayOptions, GrayResult, GraySample, PulledBackContact, TimeDependentOneForm};
pub use moser::{moser_isotopy, FnTwoForm, MoserOptions, MoserResult, MoserSample, TwoFormField};
pub use reeb::{
    reeb_field, reeb_orbit_class, reeb_vector, torus_grid, ContactFormT3, ExactOneFormT3, OneFormT3, OrbitClass, PhaseShiftedContact, ReebOrbit,
};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic_linear::{check_nondegenerate, BilinearForm};

/// Relative step for central-difference Jacobians.
pub const FD_STEP: f64 = 1e-6;

pub trait VectorField {
    fn dim(&self) -> usize;
    fn eval(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>>;

    /// `∂X_i/∂x_j`; the default uses central differences.
    fn jacobian(&self, t: f64, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        fd_jacobian(|y| self.eval(t, y), x)
    }
}

pub fn fd_jacobian(f: impl Fn(&DVector<f64>) -> Result<DVector<f64>>, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let h = FD_STEP * x[j].abs().max(1.0);
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[j] += h;
        xm[j] -= h;
        cols.push((f(&xp)? - f(&xm)?) / (2.0 * h));
    }
    Ok(DMatrix::from_columns(&cols))
}

type FieldFn = dyn Fn(f64, &DVector<f64>) -> Result<DVector<f64>> + Send + Sync;
type JacFn = dyn Fn(f64, &DVector<f64>) -> Result<DMatrix<f64>> + Send + Sync;

/// Vector field given by closures.
pub struct FnField {
    dim: usize,
    field: Box<FieldFn>,
    jac: Option<Box<JacFn>>,
}

impl FnField {
    pub fn new(dim: usize, field: impl Fn(f64, &DVector<f64>) -> Result<DVector<f64>> + Send + Sync + 'static) -> Self {
        Self { dim, field: Box::new(field), jac: None }
    }

    pub fn with_jacobian(
        mut self,
        jac: impl Fn(f64, &DVector<f64>) -> Result<DMatrix<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.jac = Some(Box::new(jac));
        self
    }

    /// `x ↦ A x`.
    pub fn linear(a: DMatrix<f64>) -> Self {
        let dim = a.nrows();
        let a2 = a.clone();
        Self::new(dim, move |_, x| Ok(&a * x)).with_jacobian(move |_, _| Ok(a2.clone()))
    }
}

impl VectorField for FnField {
    fn dim(&self) -> usize {
        self.dim
    }
    fn eval(&self, t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        (self.field)(t, x)
    }
    fn jacobian(&self, t: f64, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        match &self.jac {
            Some(j) => j(t, x),
            None => fd_jacobian(|y| self.eval(t, y), x),
        }
    }
}

type ScalarFn = dyn Fn(&DVector<f64>) -> f64 + Send + Sync;
type GradFn = dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync;
type HessFn = dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync;

/// Hamiltonian with analytic gradient and optional Hessian.
pub struct ScalarHamiltonian {
    dim: usize,
    h: Box<ScalarFn>,
    grad: Box<GradFn>,
    hess: Option<Box<HessFn>>,
}

impl ScalarHamiltonian {
    pub fn new(
        dim: usize,
        h: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
        grad: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    ) -> Self {
        Self { dim, h: Box::new(h), grad: Box::new(grad), hess: None }
    }

    pub fn with_hessian(mut self, hess: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.hess = Some(Box::new(hess));
        self
    }

    /// `H(x) = ½ xᵀ S x + cᵀ x` for symmetric `S`.
    pub fn quadratic(s: DMatrix<f64>, c: DVector<f64>) -> Self {
        let s = 0.5 * (&s + s.transpose());
        let dim = s.nrows();
        let (s1, s2, s3, c1, c2) = (s.clone(), s.clone(), s, c.clone(), c);
        Self::new(dim, move |x| 0.5 * x.dot(&(&s1 * x)) + c1.dot(x), move |x| &s2 * x + &c2)
            .with_hessian(move |_| s3.clone())
    }

    /// `H = ½ Σ (p_j² + q_j²)`.
    pub fn harmonic_oscillator(dim: usize) -> Self {
        Self::quadratic(DMatrix::identity(dim, dim), DVector::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &DVector<f64>) -> f64 {
        (self.h)(x)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.grad)(x)
    }

    pub fn hessian(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.hess {
            Some(h) => h(x),
            None => fd_jacobian(|y| Ok(self.gradient(y)), x).expect("gradient evaluation is infallible"),
        }
    }

    /// Largest relative mismatch between the analytic gradient and central
    /// differences of `H` at the given points.
    pub fn gradient_consistency(&self, points: &[DVector<f64>]) -> f64 {
        let mut worst: f64 = 0.0;
        for x in points {
            let g = self.gradient(x);
            let fd = DVector::from_fn(self.dim, |j, _| {
                let h = 1e-6 * x[j].abs().max(1.0);
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                (self.value(&xp) - self.value(&xm)) / (2.0 * h)
            });
            worst = worst.max((g - &fd).norm() / fd.norm().max(1.0));
        }
        worst
    }
}

/// The unique `X` with `ω(X, ·) = -dH(p)`, i.e. `Ω X = ∇H`.
pub fn hamiltonian_vector_field(h: &ScalarHamiltonian, omega: &BilinearForm, p: &DVector<f64>) -> Result<DVector<f64>> {
    HamiltonianField::new(h, omega)?.eval(0.0, p)
}

/// `X_H` as a time-independent vector field.
pub struct HamiltonianField<'a> {
    ham: &'a ScalarHamiltonian,
    omega_inv: DMatrix<f64>,
}

impl<'a> HamiltonianField<'a> {
    pub fn new(ham: &'a ScalarHamiltonian, omega: &BilinearForm) -> Result<Self> {
        if omega.dim() != ham.dim() {
            return Err(Error::Dimension("Hamiltonian and form dimensions differ".into()));
        }
        let c = check_nondegenerate(omega);
        if !c.nondegenerate {
            return Err(Error::Degenerate(format!("Pfaffian {:.3e}", c.pfaffian)));
        }
        let omega_inv = omega.matrix().clone().try_inverse().ok_or_else(|| Error::Degenerate("Ω singular".into()))?;
        Ok(Self { ham, omega_inv })
    }
}

impl VectorField for HamiltonianField<'_> {
    fn dim(&self) -> usize {
        self.ham.dim()
    }
    fn eval(&self, _t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(&self.omega_inv * self.ham.gradient(x))
    }
    fn jacobian(&self, _t: f64, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(&self.omega_inv * self.ham.hessian(x))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowSample {
    pub t: f64,
    pub point: Vec<f64>,
    /// Row-major Jacobian of the flow map.
    pub jacobian: Vec<f64>,
}

impl FlowSample {
    pub fn point_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.point)
    }
    pub fn jacobian_matrix(&self) -> DMatrix<f64> {
        let n = self.point.len();
        DMatrix::from_row_slice(n, n, &self.jacobian)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowResult {
    pub samples: Vec<FlowSample>,
    pub step: f64,
    pub integrator: &'static str,
    /// Set when the trajectory left the domain of the field.
    pub truncated: bool,
}

impl FlowResult {
    pub fn last(&self) -> &FlowSample {
        self.samples.last().expect("a flow has at least its initial sample")
    }
}

fn sample(t: f64, x: &DVector<f64>, phi: &DMatrix<f64>) -> FlowSample {
    let n = x.len();
    FlowSample {
        t,
        point: x.iter().copied().collect(),
        jacobian: (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| phi[(i, j)]).collect(),
    }
}

/// One classical RK4 step for the state and its variational equation.
pub fn rk4_step(
    field: &dyn VectorField,
    t: f64,
    x: &DVector<f64>,
    phi: &DMatrix<f64>,
    h: f64,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let f = |t: f64, x: &DVector<f64>, p: &DMatrix<f64>| -> Result<(DVector<f64>, DMatrix<f64>)> {
        Ok((field.eval(t, x)?, field.jacobian(t, x)? * p))
    };
    let (k1, m1) = f(t, x, phi)?;
    let (k2, m2) = f(t + 0.5 * h, &(x + &k1 * (0.5 * h)), &(phi + &m1 * (0.5 * h)))?;
    let (k3, m3) = f(t + 0.5 * h, &(x + &k2 * (0.5 * h)), &(phi + &m2 * (0.5 * h)))?;
    let (k4, m4) = f(t + h, &(x + &k3 * h), &(phi + &m3 * h))?;
    let x1 = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    let p1 = phi + (m1 + m2 * 2.0 + m3 * 2.0 + m4) * (h / 6.0);
    Ok((x1, p1))
}

/// Fixed-step RK4 for the trajectory and its Jacobian over `[0, duration]`.
/// The step is shortened uniformly so that it divides the duration; global
/// error is `O(h⁴ T)`. Every `record_every`-th step is stored.
pub fn flow_with_jacobian_sampled(
    field: &dyn VectorField,
    p0: &DVector<f64>,
    duration: f64,
    h: f64,
    record_every: usize,
) -> Result<FlowResult> {
    if !(h > 0.0) {
        return Err(Error::Precondition("step must be positive".into()));
    }
    if p0.len() != field.dim() {
        return Err(Error::Dimension("initial point has the wrong dimension".into()));
    }
    let n = ((duration.abs() / h) - 1e-9).ceil().max(1.0) as usize;
    let step = duration / n as f64;
    let dim = p0.len();
    let mut x = p0.clone();
    let mut phi = DMatrix::identity(dim, dim);
    let mut samples = vec![sample(0.0, &x, &phi)];
    let mut truncated = false;
    for k in 0..n {
        let t = k as f64 * step;
        match rk4_step(field, t, &x, &phi, step) {
            Ok((x1, p1)) => {
                x = x1;
                phi = p1;
            }
            Err(Error::Domain(_)) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
        if (k + 1) % record_every.max(1) == 0 || k + 1 == n {
            samples.push(sample((k + 1) as f64 * step, &x, &phi));
        }
    }
    Ok(FlowResult { samples, step: step.abs(), integrator: "rk4", truncated })
}

pub fn flow_with_jacobian(field: &dyn VectorField, p0: &DVector<f64>, duration: f64, h: f64) -> Result<FlowResult> {
    flow_with_jacobian_sampled(field, p0, duration, h, 1)
}

/// `max ‖DφᵀΩDφ - Ω‖_F` over the recorded samples.
pub fn symplecticity_residual(result: &FlowResult, omega: &BilinearForm) -> f64 {
    let o = omega.matrix();
    result
        .samples
        .iter()
        .map(|s| {
            let d = s.jacobian_matrix();
            (d.transpose() * o * &d - o).norm()
        })
        .fold(0.0, f64::max)
}

/// First time `t > 0` at which coordinate `k` crosses zero upwards, by
/// linear interpolation between samples.
pub fn upward_crossing_time(result: &FlowResult, k: usize) -> Option<f64> {
    result.samples.windows(2).skip(1).find_map(|w| {
        let (a, b) = (w[0].point[k], w[1].point[k]);
        (a < 0.0 && b >= 0.0).then(|| w[0].t + (w[1].t - w[0].t) * (-a) / (b - a))
    })
}

/// Points of a cubic grid with `per_axis` nodes per axis clipped to the ball.
pub fn ball_grid(center: &DVector<f64>, radius: f64, per_axis: usize) -> Vec<DVector<f64>> {
    let dim = center.len();
    let total = per_axis.pow(dim as u32);
    let coord = |i: usize| {
        if per_axis == 1 {
            0.0
        } else {
            -radius + 2.0 * radius * i as f64 / (per_axis - 1) as f64
        }
    };
    (0..total)
        .filter_map(|mut idx| {
            let mut v = DVector::zeros(dim);
            for d in 0..dim {
                v[d] = coord(idx % per_axis);
                idx /= per_axis;
            }
            (v.norm() <= radius * (1.0 + 1e-12)).then(|| v + center)
        })
        .collect()
}

/// `max ‖DYᵀΩ + ΩDY - Ω‖_F` over a grid in the ball: for constant `ω` the
/// Lie derivative is `d ι_Y ω`, whose matrix is `DYᵀΩ + ΩDY`.
pub fn liouville_residual(
    y: &dyn VectorField,
    omega: &BilinearForm,
    center: &DVector<f64>,
    radius: f64,
    per_axis: usize,
) -> Result<f64> {
    let o = omega.matrix();
    let mut worst: f64 = 0.0;
    for p in ball_grid(center, radius, per_axis) {
        let d = y.jacobian(0.0, &p)?;
        worst = worst.max((d.transpose() * o + o * &d - o).norm());
    }
    Ok(worst)
}

/// The radial field `½ x`.
pub fn radial_liouville(dim: usize) -> FnField {
    FnField::linear(DMatrix::identity(dim, dim) * 0.5)
}
