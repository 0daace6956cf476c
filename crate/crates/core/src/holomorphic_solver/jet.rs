use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::newton::{gauss_newton, NewtonOptions, NewtonReport};
use super::target::{BallTarget, J_FD_STEP};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

type C = Complex64;
const I: C = C::new(0.0, 1.0);

/// A complex structure on a ball around `0 ∈ R^{2n}` (interleaved coordinates).
pub trait BallComplexStructure: Send + Sync {
    fn dim(&self) -> usize;
    fn j(&self, p: &DVector<f64>) -> Result<DMatrix<f64>>;

    fn dj(&self, p: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
        (0..self.dim())
            .map(|k| {
                let mut e = DVector::zeros(self.dim());
                e[k] = J_FD_STEP;
                Ok((self.j(&(p + &e))? - self.j(&(p - &e))?) / (2.0 * J_FD_STEP))
            })
            .collect()
    }
}

impl BallComplexStructure for BallTarget {
    fn dim(&self) -> usize {
        BallTarget::dim(self)
    }
    fn j(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        BallTarget::j(self, p)
    }
}

/// Prescribed derivatives `∂_z^k u(0) = w_k`, `k = 0..=order`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JetData {
    pub order: usize,
    pub w: Vec<Vec<C>>,
}

impl JetData {
    pub fn new(w: Vec<Vec<C>>) -> Result<Self> {
        if w.len() < 2 {
            return Err(Error::Precondition("jet order must be at least 1".into()));
        }
        let n = w[0].len();
        if n == 0 || w.iter().any(|v| v.len() != n) {
            return Err(Error::Dimension("jet vectors must share a positive dimension".into()));
        }
        Ok(Self { order: w.len() - 1, w })
    }

    pub fn dim(&self) -> usize {
        self.w[0].len()
    }
}

/// `u(z) = Σ_{k≤d} w_k z^k/k! + Σ c_{ab} (z/ε)^a (z̄/ε)^b` on `|z| ≤ ε`, with
/// `b ≥ 1` and `a + b ≤ N` in the correction. Every correction term has
/// vanishing holomorphic jet at 0, so the prescribed jets hold for any `c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BallMap {
    pub jets: JetData,
    pub eps: f64,
    pub degree: usize,
    pub terms: Vec<(usize, usize)>,
    /// `coefficients[t * n + k]` multiplies term `t` in component `k`.
    pub coefficients: Vec<C>,
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

impl BallMap {
    pub fn new(jets: JetData, eps: f64, degree: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::Precondition("ε must be positive".into()));
        }
        let mut terms = Vec::new();
        for total in 1..=degree {
            for b in 1..=total {
                terms.push((total - b, b));
            }
        }
        let coefficients = vec![C::new(0.0, 0.0); terms.len() * jets.dim()];
        Ok(Self { jets, eps, degree, terms, coefficients })
    }

    pub fn dim(&self) -> usize {
        self.jets.dim()
    }

    /// Value and Wirtinger derivatives, one complex entry per component.
    pub fn eval(&self, z: C) -> (Vec<C>, Vec<C>, Vec<C>) {
        let n = self.dim();
        let mut u = vec![C::new(0.0, 0.0); n];
        let mut uz = u.clone();
        let mut uzb = u.clone();
        for (k, w) in self.jets.w.iter().enumerate() {
            let f = factorial(k);
            let zk = z.powu(k as u32) / f;
            let dzk = if k > 0 { z.powu(k as u32 - 1) / factorial(k - 1) } else { C::new(0.0, 0.0) };
            for c in 0..n {
                u[c] += w[c] * zk;
                uz[c] += w[c] * dzk;
            }
        }
        let y = z / self.eps;
        for (t, &(a, b)) in self.terms.iter().enumerate() {
            let (val, dz, dzb) = monomial(y, a, b, self.eps);
            for c in 0..n {
                let k = self.coefficients[t * n + c];
                u[c] += k * val;
                uz[c] += k * dz;
                uzb[c] += k * dzb;
            }
        }
        (u, uz, uzb)
    }

    /// `∂_z^k u(0)` read off from the full expansion.
    pub fn jet(&self, k: usize) -> Vec<C> {
        let n = self.dim();
        let mut out = vec![C::new(0.0, 0.0); n];
        if let Some(w) = self.jets.w.get(k) {
            out.clone_from(w);
        }
        for (t, &(a, b)) in self.terms.iter().enumerate() {
            if a == k && b == 0 {
                for c in 0..n {
                    out[c] += self.coefficients[t * n + c] * factorial(k) / self.eps.powi(k as i32);
                }
            }
        }
        out
    }

    pub fn unknowns(&self) -> DVector<f64> {
        DVector::from_iterator(2 * self.coefficients.len(), self.coefficients.iter().flat_map(|c| [c.re, c.im]))
    }

    fn set_unknowns(&mut self, x: &DVector<f64>) {
        for (k, c) in self.coefficients.iter_mut().enumerate() {
            *c = C::new(x[2 * k], x[2 * k + 1]);
        }
    }

    fn nodes(&self) -> Vec<C> {
        let (r, _) = gauss_legendre(self.degree + 2, 0.0, self.eps);
        let m = 2 * self.degree + 4;
        let mut out = Vec::with_capacity(r.len() * m);
        for (i, &ri) in r.iter().enumerate() {
            for j in 0..m {
                out.push(C::from_polar(ri, 2.0 * PI * (j as f64 + 0.5 * (i % 2) as f64) / m as f64));
            }
        }
        out
    }
}

/// `y^a ȳ^b` with `y = z/ε` and its `z`, `z̄` derivatives.
fn monomial(y: C, a: usize, b: usize, eps: f64) -> (C, C, C) {
    let yb = y.conj();
    let pa = |k: usize| y.powu(k as u32);
    let pb = |k: usize| yb.powu(k as u32);
    let val = pa(a) * pb(b);
    let dz = if a > 0 { pa(a - 1) * pb(b) * (a as f64 / eps) } else { C::new(0.0, 0.0) };
    let dzb = if b > 0 { pa(a) * pb(b - 1) * (b as f64 / eps) } else { C::new(0.0, 0.0) };
    (val, dz, dzb)
}

fn realify(v: &[C]) -> DVector<f64> {
    DVector::from_iterator(2 * v.len(), v.iter().flat_map(|c| [c.re, c.im]))
}

/// `∂_s u + J(u) ∂_t u` at every collocation node, stacked.
pub fn ball_cr_residual(map: &BallMap, j: &dyn BallComplexStructure) -> Result<DVector<f64>> {
    let nodes = map.nodes();
    let n2 = 2 * map.dim();
    let mut out = DVector::zeros(nodes.len() * n2);
    for (i, z) in nodes.iter().enumerate() {
        let (u, uz, uzb) = map.eval(*z);
        let us: Vec<C> = uz.iter().zip(&uzb).map(|(a, b)| a + b).collect();
        let ut: Vec<C> = uz.iter().zip(&uzb).map(|(a, b)| I * (a - b)).collect();
        let r = realify(&us) + j.j(&realify(&u))? * realify(&ut);
        out.rows_mut(i * n2, n2).copy_from(&r);
    }
    Ok(out)
}

/// Derivative of [`ball_cr_residual`] in the correction coefficients.
pub fn ball_linearized_operator(map: &BallMap, j: &dyn BallComplexStructure) -> Result<DMatrix<f64>> {
    let nodes = map.nodes();
    let n = map.dim();
    let n2 = 2 * n;
    let mut m = DMatrix::zeros(nodes.len() * n2, 2 * map.coefficients.len());
    let y_of = |z: C| z / map.eps;
    for (i, z) in nodes.iter().enumerate() {
        let (u, uz, uzb) = map.eval(*z);
        let ut: Vec<C> = uz.iter().zip(&uzb).map(|(a, b)| I * (a - b)).collect();
        let pu = realify(&u);
        let jm = j.j(&pu)?;
        let utr = realify(&ut);
        let g: Vec<DVector<f64>> = j.dj(&pu)?.iter().map(|d| d * &utr).collect();
        for (t, &(a, b)) in map.terms.iter().enumerate() {
            let (val, dz, dzb) = monomial(y_of(*z), a, b, map.eps);
            for c in 0..n {
                for (part, dc) in [C::new(1.0, 0.0), I].into_iter().enumerate() {
                    let du = val * dc;
                    let s = (dz + dzb) * dc;
                    let tt = I * (dz - dzb) * dc;
                    let mut col = DVector::zeros(n2);
                    col[2 * c] = s.re;
                    col[2 * c + 1] = s.im;
                    col += jm.column(2 * c) * tt.re + jm.column(2 * c + 1) * tt.im;
                    col += &g[2 * c] * du.re + &g[2 * c + 1] * du.im;
                    m.view_mut((i * n2, 2 * (t * n + c) + part), (n2, 1)).copy_from(&col);
                }
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct JetSolution {
    pub map: BallMap,
    pub report: NewtonReport,
    /// Sup norm of the residual at the collocation nodes.
    pub residual: f64,
    /// `max_k |∂_z^k u(0) - w_k|`.
    pub jet_defect: f64,
}

/// Solves `∂_s u + J(u) ∂_t u = 0` on `B_ε` with the jets of `u` at 0 fixed.
/// Fails with a contraction error when Newton stalls, carrying the observed
/// ratio of successive residuals; a smaller `ε` is the remedy.
pub fn local_jet_solve(j: &dyn BallComplexStructure, jets: &JetData, eps: f64, degree: usize) -> Result<JetSolution> {
    if j.dim() != 2 * jets.dim() {
        return Err(Error::Dimension(format!("J acts on R^{} but jets live in C^{}", j.dim(), jets.dim())));
    }
    if degree <= jets.order {
        return Err(Error::Truncation(format!("degree {degree} must exceed the jet order {}", jets.order)));
    }
    let template = BallMap::new(jets.clone(), eps, degree)?;
    let build = |x: &DVector<f64>| {
        let mut m = template.clone();
        m.set_unknowns(x);
        m
    };
    let mut seen = Vec::new();
    let opts = NewtonOptions::default();
    let result = gauss_newton(
        template.unknowns(),
        |x| {
            let r = ball_cr_residual(&build(x), j)?;
            seen.push(r.norm());
            Ok(r)
        },
        |x| ball_linearized_operator(&build(x), j),
        &opts,
    );
    let gn = match result {
        Ok(gn) => gn,
        Err(Error::NoConvergence { .. }) => {
            let factor = match seen.len() {
                0 | 1 => f64::INFINITY,
                k => seen[k - 1] / seen[k - 2],
            };
            return Err(Error::Contraction { factor });
        }
        Err(e) => return Err(e),
    };
    let map = build(&gn.x);
    let residual = ball_cr_residual(&map, j)?.amax();
    let mut jet_defect: f64 = 0.0;
    for k in 0..=jets.order {
        for (a, b) in map.jet(k).iter().zip(&jets.w[k]) {
            jet_defect = jet_defect.max((a - b).norm());
        }
    }
    let monotone = gn.sup_history.windows(2).all(|w| w[1] < w[0]);
    let report = NewtonReport {
        iterations: gn.iterations,
        residual_history: gn.sup_history,
        l2_history: gn.l2_history,
        condition_estimate: gn.condition,
        gauge_residuals: [0.0; 3],
        constraint_residual: 0.0,
        monotone,
    };
    Ok(JetSolution { map, report, residual, jet_defect })
}

/// `J̃(y) = Φ⁻¹ J(p + Φy) Φ`, which equals `i` at the origin.
struct Framed<'a> {
    inner: &'a dyn BallComplexStructure,
    origin: DVector<f64>,
    frame: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl BallComplexStructure for Framed<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn j(&self, y: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(&self.inverse * self.inner.j(&(&self.origin + &self.frame * y))? * &self.frame)
    }
}

/// Columns `(v₁, Jv₁, v₂, Jv₂, ...)` with `v₁ = X/|X|` and further `v_k`
/// chosen greedily from the coordinate axes, so that `JΦ = ΦJ₀`.
pub fn complex_frame(j: &DMatrix<f64>, x: &DVector<f64>) -> Result<DMatrix<f64>> {
    let dim = j.nrows();
    let mut cols: Vec<DVector<f64>> = Vec::new();
    let mut candidates: Vec<DVector<f64>> = Vec::new();
    if x.norm() > 0.0 {
        candidates.push(x / x.norm());
    }
    for k in 0..dim {
        let mut e = DVector::zeros(dim);
        e[k] = 1.0;
        candidates.push(e);
    }
    for v in candidates {
        if cols.len() == dim {
            break;
        }
        let mut trial = cols.clone();
        trial.push(v.clone());
        trial.push(j * &v);
        let m = DMatrix::from_columns(&trial);
        let sv = m.clone().svd(false, false).singular_values;
        if sv.min() > 1e-6 * sv.max() {
            cols = trial;
        }
    }
    if cols.len() != dim {
        return Err(Error::Degenerate("no complex frame found".into()));
    }
    Ok(DMatrix::from_columns(&cols))
}

#[derive(Debug, Clone, Serialize)]
pub struct TangentSolution {
    pub solution: JetSolution,
    pub origin: Vec<f64>,
    pub frame: Vec<Vec<f64>>,
    /// `|u(0) - p|` and `|∂_s u(0) - X|` in the original coordinates.
    pub point_defect: f64,
    pub tangent_defect: f64,
}

/// A local holomorphic disc with `u(0) = p` and `∂_s u(0) = X`, solved in the
/// frame where `J(p) = i` and mapped back.
pub fn tangent_prescription(j: &dyn BallComplexStructure, p: &DVector<f64>, x: &DVector<f64>, eps: f64, degree: usize) -> Result<TangentSolution> {
    let jp = j.j(p)?;
    let frame = complex_frame(&jp, x)?;
    let inverse = frame.clone().try_inverse().ok_or_else(|| Error::Degenerate("singular frame".into()))?;
    let framed = Framed { inner: j, origin: p.clone(), frame: frame.clone(), inverse: inverse.clone() };
    let w1 = &inverse * x;
    let n = j.dim() / 2;
    let jets = JetData::new(vec![vec![C::new(0.0, 0.0); n], (0..n).map(|k| C::new(w1[2 * k], w1[2 * k + 1])).collect()])?;
    let solution = local_jet_solve(&framed, &jets, eps, degree)?;
    let (u, uz, uzb) = solution.map.eval(C::new(0.0, 0.0));
    let u0 = p + &frame * realify(&u);
    let us: Vec<C> = uz.iter().zip(&uzb).map(|(a, b)| a + b).collect();
    let xs = &frame * realify(&us);
    Ok(TangentSolution {
        point_defect: (&u0 - p).amax(),
        tangent_defect: (&xs - x).amax(),
        origin: p.iter().copied().collect(),
        frame: frame.row_iter().map(|r| r.iter().copied().collect()).collect(),
        solution,
    })
}
