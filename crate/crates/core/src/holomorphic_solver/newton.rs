use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::sphere_map::{cr_residual, linearized_operator, vec4, Collocation, DiscreteSphereMap};
use super::target::{TargetAlmostComplexField, TargetPoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    /// Target for the sup norm of the residual.
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Condition estimate of the column-scaled Jacobian above which the
    /// linearization counts as rank deficient.
    pub cond_limit: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 50, max_halvings: 20, cond_limit: 1e8 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NewtonReport {
    pub iterations: usize,
    /// Sup norm of the residual before each step and after the last.
    pub residual_history: Vec<f64>,
    /// Euclidean norm of the residual, strictly decreasing by construction.
    pub l2_history: Vec<f64>,
    pub condition_estimate: f64,
    pub gauge_residuals: [f64; 3],
    pub constraint_residual: f64,
    /// Whether the sup-norm history decreases strictly.
    pub monotone: bool,
}

pub(crate) struct GaussNewton {
    pub x: DVector<f64>,
    pub sup_history: Vec<f64>,
    pub l2_history: Vec<f64>,
    pub condition: f64,
    pub iterations: usize,
}

/// `sqrt(λ_max/λ_min)` of `N = LLᵀ` by power and inverse iteration.
fn condition_from_cholesky(n: &DMatrix<f64>, chol: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> f64 {
    let dim = n.nrows();
    let start = DVector::from_fn(dim, |i, _| 1.0 + 0.37 * ((i * 7919) % 101) as f64 / 101.0);
    let mut v = start.normalize();
    let mut lmax = 0.0;
    for _ in 0..30 {
        let w = n * &v;
        lmax = w.norm();
        v = w / lmax;
    }
    let mut v = start.normalize();
    let mut inv = 0.0;
    for _ in 0..30 {
        let w = chol.solve(&v);
        inv = w.norm();
        v = w / inv;
    }
    (lmax * inv).sqrt()
}

/// Damped Gauss-Newton on `‖R(x)‖₂` with column normalisation and the
/// normal equations solved by Cholesky. A step is halved until the
/// Euclidean residual decreases.
pub(crate) fn gauss_newton(
    x0: DVector<f64>,
    mut residual: impl FnMut(&DVector<f64>) -> Result<DVector<f64>>,
    mut jacobian: impl FnMut(&DVector<f64>) -> Result<DMatrix<f64>>,
    opts: &NewtonOptions,
) -> Result<GaussNewton> {
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut sup_history = vec![r.amax()];
    let mut l2_history = vec![r.norm()];
    let mut condition: f64 = 1.0;
    let mut iterations = 0;
    while r.amax() > opts.tol {
        if iterations == opts.max_iter {
            return Err(Error::NoConvergence { residual: r.amax(), iterations });
        }
        let mut jm = jacobian(&x)?;
        let mut scale = DVector::zeros(jm.ncols());
        for (k, mut col) in jm.column_iter_mut().enumerate() {
            let nrm = col.norm();
            if nrm == 0.0 {
                return Err(Error::TransversalityFailure { condition: f64::INFINITY });
            }
            col /= nrm;
            scale[k] = 1.0 / nrm;
        }
        let jt = jm.transpose();
        let normal = &jt * &jm;
        let rhs = -(&jt * &r);
        let chol = normal.clone().cholesky().ok_or(Error::TransversalityFailure { condition: f64::INFINITY })?;
        condition = condition.max(condition_from_cholesky(&normal, &chol));
        if condition > opts.cond_limit {
            return Err(Error::TransversalityFailure { condition });
        }
        let step = chol.solve(&rhs).component_mul(&scale);
        let current = r.norm();
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial = &x + &step * lambda;
            if let Ok(rt) = residual(&trial) {
                if rt.norm() < current {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((xn, rn)) = accepted else {
            return Err(Error::NoConvergence { residual: r.amax(), iterations });
        };
        x = xn;
        r = rn;
        iterations += 1;
        sup_history.push(r.amax());
        l2_history.push(r.norm());
    }
    Ok(GaussNewton { x, sup_history, l2_history, condition, iterations })
}

/// A marked point constraint `u(z*) = target`, with `z*` an unknown starting
/// from `guess` (a point of the Riemann sphere, `None` for ∞).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarkedPoint {
    pub guess: Option<Complex64>,
    pub target: TargetPoint,
}

#[derive(Debug, Clone, Serialize)]
pub struct SphereSolution {
    pub map: DiscreteSphereMap,
    /// The solved marked point as `(domain chart, chart coordinate)`.
    pub marked: Option<(u8, Complex64)>,
    pub report: NewtonReport,
}

fn domain_chart_of(z: Option<Complex64>) -> (u8, Complex64) {
    match z {
        Some(z) if z.norm() <= 1.0 => (1, z),
        Some(z) => (2, 1.0 / z),
        None => (2, Complex64::new(0.0, 0.0)),
    }
}

struct Constraint {
    chart: u8,
    target_chart: u8,
    target: nalgebra::Vector4<f64>,
}

fn constraint_setup(map: &DiscreteSphereMap, mp: &MarkedPoint) -> Result<(Constraint, Complex64)> {
    let (chart, x) = domain_chart_of(mp.guess);
    let target_chart = if mp.target.w.norm() <= 1.0 { mp.target.chart } else { 3 - mp.target.chart };
    let mut t = mp.target.in_chart(target_chart)?;
    let current = map.eval(chart, x, Some(target_chart))?.point.x;
    let d = current - t.x;
    t.x += Complex64::new(d.re.round(), d.im.round());
    Ok((Constraint { chart, target_chart, target: t.coords() }, x))
}

/// Solves `∂̄_J u = 0` at the collocation nodes by damped Gauss-Newton from
/// `initial`, optionally with a marked point constraint.
pub fn newton_solve(
    initial: &DiscreteSphereMap,
    j: &dyn TargetAlmostComplexField,
    marked: Option<&MarkedPoint>,
    opts: &NewtonOptions,
) -> Result<SphereSolution> {
    if !initial.basis.gauge_fixed() {
        return Err(Error::Precondition("Newton needs the gauge-fixed representation".into()));
    }
    let colloc = Collocation::new(initial);
    let nu = initial.basis.n_unknowns();
    let cons = marked.map(|mp| constraint_setup(initial, mp)).transpose()?;
    let mut x0 = initial.unknowns();
    if let Some((_, z)) = &cons {
        x0 = x0.push(z.re).push(z.im);
    }
    let template = initial.clone();
    let split = |x: &DVector<f64>| -> Result<(DiscreteSphereMap, Complex64)> {
        let mut m = template.clone();
        m.set_unknowns(&x.as_slice()[..nu])?;
        let z = if x.len() > nu { Complex64::new(x[nu], x[nu + 1]) } else { Complex64::new(0.0, 0.0) };
        Ok((m, z))
    };
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let (m, z) = split(x)?;
        let mut r = cr_residual(&m, j, &colloc)?.to_vector();
        if let Some((c, _)) = &cons {
            let s = m.eval(c.chart, z, Some(c.target_chart))?;
            let d = s.point.coords() - c.target;
            r = r.push(d[0]).push(d[1]).push(d[2]).push(d[3]);
        }
        Ok(r)
    };
    let jacobian = |x: &DVector<f64>| -> Result<DMatrix<f64>> {
        let (m, z) = split(x)?;
        let lin = linearized_operator(&m, j, &colloc)?;
        let Some((c, _)) = &cons else { return Ok(lin) };
        let mut full = DMatrix::zeros(lin.nrows() + 4, nu + 2);
        full.view_mut((0, 0), (lin.nrows(), nu)).copy_from(&lin);
        let bv = m.basis.values(c.chart, z);
        let s = m.local_state(&bv, c.chart, z, c.target_chart)?;
        let sens = super::sphere_map::value_sensitivity(&m, &bv, &s);
        full.view_mut((lin.nrows(), 0), (4, nu)).copy_from(&sens);
        full.view_mut((lin.nrows(), nu), (4, 1)).copy_from(&vec4(s.us()));
        full.view_mut((lin.nrows(), nu + 1), (4, 1)).copy_from(&vec4(s.ut()));
        Ok(full)
    };
    let gn = gauss_newton(x0, residual, jacobian, opts)?;
    let (map, z) = split(&gn.x)?;
    let (marked, constraint_residual) = match &cons {
        Some((c, _)) => {
            let s = map.eval(c.chart, z, Some(c.target_chart))?;
            (Some((c.chart, z)), (s.point.coords() - c.target).amax())
        }
        None => (None, 0.0),
    };
    let monotone = gn.sup_history.windows(2).all(|w| w[1] < w[0]);
    let report = NewtonReport {
        iterations: gn.iterations,
        residual_history: gn.sup_history,
        l2_history: gn.l2_history,
        condition_estimate: gn.condition,
        gauge_residuals: map.gauge_residuals()?,
        constraint_residual,
        monotone,
    };
    Ok(SphereSolution { map, marked, report })
}
