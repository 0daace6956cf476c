use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::{rk4_step, VectorField};
use crate::error::{Error, Result};

/// A 1-form on `T³` with its coefficient Jacobian `D[(i, j)] = ∂a_i/∂x_j`.
pub trait OneFormT3: Send + Sync {
    fn eval(&self, x: &Vector3<f64>) -> Vector3<f64>;
    fn jacobian(&self, x: &Vector3<f64>) -> Matrix3<f64>;
}

/// `α_N = cos(2πNη) dθ + sin(2πNη) dφ` on `T³ = (R/Z)³`, coordinates `(θ, φ, η)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContactFormT3 {
    pub n: u32,
}

impl ContactFormT3 {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::Precondition("N must be positive".into()));
        }
        Ok(Self { n })
    }

    fn k(&self) -> f64 {
        2.0 * PI * self.n as f64
    }

    /// `α ∧ dα / dθ∧dφ∧dη`, which equals `-2πN` everywhere.
    pub fn volume_density(&self, x: &Vector3<f64>) -> f64 {
        self.eval(x).dot(&curl(&self.jacobian(x)))
    }
}

impl OneFormT3 for ContactFormT3 {
    fn eval(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let (s, c) = (self.k() * x[2]).sin_cos();
        Vector3::new(c, s, 0.0)
    }
    fn jacobian(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let k = self.k();
        let (s, c) = (k * x[2]).sin_cos();
        Matrix3::new(0.0, 0.0, -k * s, 0.0, 0.0, k * c, 0.0, 0.0, 0.0)
    }
}

/// `α_N` rotated in the `(dθ, dφ)` plane: `cos(2πNη + δ) dθ + sin(2πNη + δ) dφ`.
/// Linear interpolation from `α_N` stays contact while `|δ| < π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftedContact {
    pub n: u32,
    pub phase: f64,
}

impl OneFormT3 for PhaseShiftedContact {
    fn eval(&self, x: &Vector3<f64>) -> Vector3<f64> {
        let (s, c) = (2.0 * PI * self.n as f64 * x[2] + self.phase).sin_cos();
        Vector3::new(c, s, 0.0)
    }
    fn jacobian(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        let k = 2.0 * PI * self.n as f64;
        let (s, c) = (k * x[2] + self.phase).sin_cos();
        Matrix3::new(0.0, 0.0, -k * s, 0.0, 0.0, k * c, 0.0, 0.0, 0.0)
    }
}

/// The points `(i, j, k) / n` of `T³`, `k` running fastest.
pub fn torus_grid(n: usize) -> Vec<Vector3<f64>> {
    let h = 1.0 / n as f64;
    (0..n).flat_map(|i| (0..n).flat_map(move |j| (0..n).map(move |k| Vector3::new(i as f64 * h, j as f64 * h, k as f64 * h)))).collect()
}

/// A 1-form given by closures.
pub struct ExactOneFormT3<F, G> {
    pub coefficients: F,
    pub jacobian: G,
}

impl<F, G> OneFormT3 for ExactOneFormT3<F, G>
where
    F: Fn(&Vector3<f64>) -> Vector3<f64> + Send + Sync,
    G: Fn(&Vector3<f64>) -> Matrix3<f64> + Send + Sync,
{
    fn eval(&self, x: &Vector3<f64>) -> Vector3<f64> {
        (self.coefficients)(x)
    }
    fn jacobian(&self, x: &Vector3<f64>) -> Matrix3<f64> {
        (self.jacobian)(x)
    }
}

pub(crate) fn curl(d: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(d[(2, 1)] - d[(1, 2)], d[(0, 2)] - d[(2, 0)], d[(1, 0)] - d[(0, 1)])
}

/// Solves `ι_X dα = 0`, `α(X) = 1` from the coefficients and their Jacobian.
/// `ι_X dα = b × X` with `b = curl a`, so `X = b / (a · b)`.
pub fn reeb_vector(a: &Vector3<f64>, d: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let b = curl(d);
    let s = a.dot(&b);
    if b.norm() == 0.0 || s.abs() <= 1e-12 * a.norm() * b.norm() {
        return Err(Error::ContactCondition("α ∧ dα vanishes".into()));
    }
    Ok(b / s)
}

pub fn reeb_field(alpha: &dyn OneFormT3, p: &Vector3<f64>) -> Result<Vector3<f64>> {
    reeb_vector(&alpha.eval(p), &alpha.jacobian(p))
}

struct ReebFlow<'a>(&'a dyn OneFormT3);

impl VectorField for ReebFlow<'_> {
    fn dim(&self) -> usize {
        3
    }
    fn eval(&self, _t: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let v = reeb_field(self.0, &Vector3::new(x[0], x[1], x[2]))?;
        Ok(DVector::from_column_slice(v.as_slice()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OrbitClass {
    Closed { class: [i64; 3], period: f64, return_defect: f64 },
    NonClosed { rotation: [f64; 3] },
}

#[derive(Debug, Clone, Serialize)]
pub struct ReebOrbit {
    pub trajectory: Vec<[f64; 3]>,
    pub rotation: [f64; 3],
    pub class: OrbitClass,
}

/// Best rational approximation `p/q` to `x` with `q ≤ max_den`, among the
/// continued-fraction convergents that satisfy `|q x - p| ≤ tol`.
pub fn rational_approximation(x: f64, max_den: i64, tol: f64) -> Option<(i64, i64)> {
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let ai = a as i64;
        let (h2, k2) = (ai * h1 + h0, ai * k1 + k0);
        if k2 > max_den {
            return None;
        }
        if (k2 as f64 * x - h2 as f64).abs() <= tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-300 {
            return None;
        }
        r = 1.0 / frac;
    }
    None
}

const CLOSURE_TOL: f64 = 1e-9;
const MAX_DENOMINATOR: i64 = 1_000_000;

/// Integrates the Reeb flow of `α_N` from `p0` for time `duration` and
/// decides closure from the rotation vector. Along orbits `η` is constant,
/// so the direction `(cos 2πNη, sin 2πNη)` is rational iff the orbit closes.
pub fn reeb_orbit_class(alpha: &ContactFormT3, p0: &Vector3<f64>, duration: f64, step: f64) -> Result<ReebOrbit> {
    let field = ReebFlow(alpha);
    let n = (duration / step).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    let mut x = DVector::from_column_slice(p0.as_slice());
    let mut phi = DMatrix::identity(3, 3);
    let mut trajectory = vec![[x[0], x[1], x[2]]];
    for k in 0..n {
        (x, phi) = rk4_step(&field, k as f64 * h, &x, &phi, h)?;
        trajectory.push([x[0], x[1], x[2]]);
    }
    let rot = [(x[0] - p0[0]) / duration, (x[1] - p0[1]) / duration, (x[2] - p0[2]) / duration];
    let class = classify_direction(&field, p0, rot)?;
    Ok(ReebOrbit { trajectory, rotation: rot, class })
}

fn classify_direction(field: &ReebFlow<'_>, p0: &Vector3<f64>, rot: [f64; 3]) -> Result<OrbitClass> {
    let (c, s) = (rot[0], rot[1]);
    let swap = s.abs() > c.abs();
    let (big, small) = if swap { (s, c) } else { (c, s) };
    if big == 0.0 {
        return Ok(OrbitClass::NonClosed { rotation: rot });
    }
    let Some((p, q)) = rational_approximation(small / big, MAX_DENOMINATOR, CLOSURE_TOL) else {
        return Ok(OrbitClass::NonClosed { rotation: rot });
    };
    let sign = big.signum() as i64;
    let (iq, ip) = (sign * q, sign * p);
    let class = if swap { [ip, iq, 0] } else { [iq, ip, 0] };
    // The orbit returns after time q / |big|; verify by integration.
    let period = q as f64 / big.abs();
    let steps = ((period / 1e-2).ceil() as usize).clamp(1, 10_000);
    let h = period / steps as f64;
    let mut x = DVector::from_column_slice(p0.as_slice());
    let mut phi = DMatrix::identity(3, 3);
    for k in 0..steps {
        (x, phi) = rk4_step(field, k as f64 * h, &x, &phi, h)?;
    }
    let return_defect = (0..3).map(|i| (x[i] - p0[i] - class[i] as f64).abs()).fold(0.0, f64::max);
    if return_defect > 1e-6 {
        return Ok(OrbitClass::NonClosed { rotation: rot });
    }
    Ok(OrbitClass::Closed { class, period, return_defect })
}
