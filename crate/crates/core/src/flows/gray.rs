use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use super::reeb::{curl, ContactFormT3, OneFormT3};
use crate::error::{Error, Result};

/// A family `t ↦ α_t` of 1-forms on `T³` (coordinates of period one).
pub trait TimeDependentOneForm: Send + Sync {
    fn eval(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64>;
    fn dt(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64>;

    /// `D[(i, j)] = ∂a_i/∂x_j`; the default uses central differences.
    fn jacobian(&self, t: f64, x: &Vector3<f64>) -> Matrix3<f64> {
        let h = 1e-6;
        let mut d = Matrix3::zeros();
        for j in 0..3 {
            let mut xp = *x;
            let mut xm = *x;
            xp[j] += h;
            xm[j] -= h;
            d.set_column(j, &((self.eval(t, &xp) - self.eval(t, &xm)) / (2.0 * h)));
        }
        d
    }
}

/// Linear interpolation `α_t = (1 - t) α_a + t α_b`.
pub struct ContactInterpolation<A, B> {
    pub start: A,
    pub end: B,
}

impl<A: OneFormT3, B: OneFormT3> TimeDependentOneForm for ContactInterpolation<A, B> {
    fn eval(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        self.start.eval(x) * (1.0 - t) + self.end.eval(x) * t
    }
    fn dt(&self, _t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        self.end.eval(x) - self.start.eval(x)
    }
    fn jacobian(&self, t: f64, x: &Vector3<f64>) -> Matrix3<f64> {
        self.start.jacobian(x) * (1.0 - t) + self.end.jacobian(x) * t
    }
}

/// `α_t = ψ_t* α_N` for the shear `ψ_t(θ, φ, η) = (θ, φ, η - c(θ) t)` with
/// `c(θ) = amplitude · sin 2πθ`. The Gray flow of this family is `ψ_t⁻¹`.
pub struct PulledBackContact {
    pub form: ContactFormT3,
    pub amplitude: f64,
}

impl PulledBackContact {
    fn c(&self, theta: f64) -> f64 {
        self.amplitude * (2.0 * std::f64::consts::PI * theta).sin()
    }

    fn dc(&self, theta: f64) -> f64 {
        self.amplitude * 2.0 * std::f64::consts::PI * (2.0 * std::f64::consts::PI * theta).cos()
    }

    /// The exact Gray flow `(θ, φ, η) ↦ (θ, φ, η + c(θ) t)`.
    pub fn exact_flow(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        Vector3::new(x[0], x[1], x[2] + self.c(x[0]) * t)
    }
}

impl TimeDependentOneForm for PulledBackContact {
    fn eval(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        let k = 2.0 * std::f64::consts::PI * self.form.n as f64;
        let arg = k * (x[2] - self.c(x[0]) * t);
        Vector3::new(arg.cos(), arg.sin(), 0.0)
    }
    fn dt(&self, t: f64, x: &Vector3<f64>) -> Vector3<f64> {
        let k = 2.0 * std::f64::consts::PI * self.form.n as f64;
        let arg = k * (x[2] - self.c(x[0]) * t);
        let darg = -k * self.c(x[0]);
        Vector3::new(-arg.sin() * darg, arg.cos() * darg, 0.0)
    }
    fn jacobian(&self, t: f64, x: &Vector3<f64>) -> Matrix3<f64> {
        let k = 2.0 * std::f64::consts::PI * self.form.n as f64;
        let arg = k * (x[2] - self.c(x[0]) * t);
        let d_theta = -k * self.dc(x[0]) * t;
        let (s, c) = arg.sin_cos();
        Matrix3::new(-s * d_theta, 0.0, -s * k, c * d_theta, 0.0, c * k, 0.0, 0.0, 0.0)
    }
}

#[derive(Debug, Clone)]
pub struct GrayOptions {
    /// RK4 steps over `t ∈ [0, 1]`.
    pub steps: usize,
    /// Times at which samples are recorded (rounded to the step grid).
    pub record_times: Vec<f64>,
}

impl Default for GrayOptions {
    fn default() -> Self {
        Self { steps: 64, record_times: vec![0.25, 0.5, 1.0] }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GraySample {
    pub t: f64,
    pub x: [f64; 3],
    pub phi: [f64; 3],
    pub log_f: f64,
    /// `‖φ_t*α_t - f_t α₀‖`.
    pub pullback_residual: f64,
    /// `‖(φ_t*α_t) ∧ α₀‖`.
    pub wedge_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GrayResult {
    pub samples: Vec<GraySample>,
    pub max_pullback_residual: f64,
    pub max_wedge_residual: f64,
}

struct Pointwise {
    y: Vector3<f64>,
    g: f64,
}

/// `g_t = α̇_t(X_{α_t})` and `Y_t ∈ ker α_t` with `ι_Y dα_t = -α̇_t + g_t α_t`.
/// In three dimensions `ι_Y dα = b × Y` for `b = curl a`, giving
/// `Y = (r × a) / (a · b)` with `r = -α̇ + g a`.
fn gray_field(family: &dyn TimeDependentOneForm, t: f64, x: &Vector3<f64>) -> Result<Pointwise> {
    let a = family.eval(t, x);
    let b = curl(&family.jacobian(t, x));
    let s = a.dot(&b);
    if s.abs() <= 1e-10 * (a.norm() * b.norm()).max(1e-300) || b.norm() == 0.0 {
        return Err(Error::ContactCondition(format!("α_t ∧ dα_t vanishes at t = {t}, x = {x:?}")));
    }
    let reeb = b / s;
    let adot = family.dt(t, x);
    let g = adot.dot(&reeb);
    let r = -adot + a * g;
    Ok(Pointwise { y: r.cross(&a) / s, g })
}

fn gray_jacobian(family: &dyn TimeDependentOneForm, t: f64, x: &Vector3<f64>) -> Result<Matrix3<f64>> {
    let h = 1e-6;
    let mut d = Matrix3::zeros();
    for j in 0..3 {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += h;
        xm[j] -= h;
        d.set_column(j, &((gray_field(family, t, &xp)?.y - gray_field(family, t, &xm)?.y) / (2.0 * h)));
    }
    Ok(d)
}

type State = (Vector3<f64>, Matrix3<f64>, f64);

fn rhs(family: &dyn TimeDependentOneForm, t: f64, s: &State) -> Result<State> {
    let pw = gray_field(family, t, &s.0)?;
    Ok((pw.y, gray_jacobian(family, t, &s.0)? * s.1, pw.g))
}

fn axpy(s: &State, k: &State, h: f64) -> State {
    (s.0 + k.0 * h, s.1 + k.1 * h, s.2 + k.2 * h)
}

/// Integrates the Gray isotopy from each start point; `f_t` comes from
/// `log f_t = ∫ g_s ∘ φ_s ds`.
pub fn gray_isotopy(family: &dyn TimeDependentOneForm, points: &[Vector3<f64>], opts: &GrayOptions) -> Result<GrayResult> {
    let h = 1.0 / opts.steps as f64;
    let record: Vec<usize> = opts.record_times.iter().map(|t| (t / h).round() as usize).collect();
    for p in points {
        for &k in &record {
            gray_field(family, k as f64 * h, p)?;
        }
    }
    let mut samples = Vec::new();
    let (mut max_pb, mut max_w): (f64, f64) = (0.0, 0.0);
    for p in points {
        let mut s: State = (*p, Matrix3::identity(), 0.0);
        let a0 = family.eval(0.0, p);
        let mut emit = |k: usize, s: &State, samples: &mut Vec<GraySample>| {
            if record.contains(&k) {
                let t = k as f64 * h;
                let pulled = s.1.transpose() * family.eval(t, &s.0);
                let f = s.2.exp();
                let pullback_residual = (pulled - a0 * f).norm();
                let wedge_residual = pulled.cross(&a0).norm();
                max_pb = max_pb.max(pullback_residual);
                max_w = max_w.max(wedge_residual);
                samples.push(GraySample {
                    t,
                    x: [p[0], p[1], p[2]],
                    phi: [s.0[0], s.0[1], s.0[2]],
                    log_f: s.2,
                    pullback_residual,
                    wedge_residual,
                });
            }
        };
        emit(0, &s, &mut samples);
        for k in 0..opts.steps {
            let t = k as f64 * h;
            let k1 = rhs(family, t, &s)?;
            let k2 = rhs(family, t + 0.5 * h, &axpy(&s, &k1, 0.5 * h))?;
            let k3 = rhs(family, t + 0.5 * h, &axpy(&s, &k2, 0.5 * h))?;
            let k4 = rhs(family, t + h, &axpy(&s, &k3, h))?;
            s = (
                s.0 + (k1.0 + k2.0 * 2.0 + k3.0 * 2.0 + k4.0) * (h / 6.0),
                s.1 + (k1.1 + k2.1 * 2.0 + k3.1 * 2.0 + k4.1) * (h / 6.0),
                s.2 + (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2) * (h / 6.0),
            );
            emit(k + 1, &s, &mut samples);
        }
    }
    Ok(GrayResult { samples, max_pullback_residual: max_pb, max_wedge_residual: max_w })
}
