use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use super::target::{TargetAlmostComplexField, TargetPoint};
use crate::error::{Error, Result};

type C = Complex64;
const I: C = C::new(0.0, 1.0);
const ZERO: C = C::new(0.0, 0.0);

/// Unknown layout of a sphere map `u = (u_S, x): S² → S² × T²` at truncation `p`.
///
/// The sphere component is `u_S = (z + h)/(1 - z̄h)` with
/// `h = Σ c_{ab} z^a z̄^b (1+|z|²)^{-p-1}`, `a ≤ p+2`, `b ≤ p`. In the chart
/// `ζ = 1/z` the inverse coordinate is `(ζ + h₂)/(1 - ζ̄h₂)` with
/// `h₂ = -ζ h/ζ̄`, so every coefficient vector gives a smooth map. The torus
/// lift is `x = m + Σ d_{ab} z^a z̄^b (1+|z|²)^{-p}`, `a, b ≤ p`.
///
/// With the gauge fixed, `(0,0)` and `(p+2,p)` are dropped (so `u_S(0) = 0`
/// and `u_S(∞) = ∞`) and every remaining monomial is taken minus the pivot
/// `(1,0)`, all of which agree at `z = 1`, so `u_S(1) = 1`. The torus
/// monomial `(0,0)` is replaced by the explicit offset `m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereBasis {
    pub truncation: usize,
    pub h_terms: Vec<(usize, usize)>,
    pub pivot: Option<(usize, usize)>,
    pub v_terms: Vec<(usize, usize)>,
    pub offset_unknown: bool,
}

impl SphereBasis {
    pub fn new(truncation: usize, gauge_fixed: bool) -> Result<Self> {
        let p = truncation;
        if p < 2 {
            return Err(Error::Truncation("sphere truncation must be at least 2".into()));
        }
        let mut h_terms = Vec::new();
        for a in 0..=p + 2 {
            for b in 0..=p {
                h_terms.push((a, b));
            }
        }
        let mut v_terms = Vec::new();
        for a in 0..=p {
            for b in 0..=p {
                v_terms.push((a, b));
            }
        }
        if !gauge_fixed {
            return Ok(Self { truncation, h_terms, pivot: None, v_terms, offset_unknown: false });
        }
        let pivot = (1, 0);
        h_terms.retain(|t| *t != (0, 0) && *t != (p + 2, p) && *t != pivot);
        v_terms.retain(|t| *t != (0, 0));
        Ok(Self { truncation, h_terms, pivot: Some(pivot), v_terms, offset_unknown: true })
    }

    pub fn gauge_fixed(&self) -> bool {
        self.pivot.is_some()
    }

    pub fn n_unknowns(&self) -> usize {
        2 * (self.h_terms.len() + self.v_terms.len()) + if self.offset_unknown { 2 } else { 0 }
    }

    /// Values and Wirtinger derivatives `(φ, ∂φ/∂x, ∂φ/∂x̄)` of every basis
    /// function at the chart coordinate `x` of chart `chart`.
    pub fn values(&self, chart: u8, x: C) -> BasisValues {
        let p = self.truncation;
        let top = p + 4;
        let mut xp = vec![C::new(1.0, 0.0); top + 1];
        let mut xbp = vec![C::new(1.0, 0.0); top + 1];
        for k in 1..=top {
            xp[k] = xp[k - 1] * x;
            xbp[k] = xbp[k - 1] * x.conj();
        }
        let rho_inv = 1.0 / (1.0 + x.norm_sqr());
        let wm = |alpha: usize, beta: usize, q: usize| -> [C; 3] {
            let rq = rho_inv.powi(q as i32);
            let rq1 = rq * rho_inv;
            let qf = q as f64;
            let val = xp[alpha] * xbp[beta] * rq;
            let mut dz = -xp[alpha] * xbp[beta + 1] * (qf * rq1);
            if alpha > 0 {
                dz += xp[alpha - 1] * xbp[beta] * (alpha as f64 * rq);
            }
            let mut dzb = -xp[alpha + 1] * xbp[beta] * (qf * rq1);
            if beta > 0 {
                dzb += xp[alpha] * xbp[beta - 1] * (beta as f64 * rq);
            }
            [val, dz, dzb]
        };
        let h_one = |(a, b): (usize, usize)| -> [C; 3] {
            if chart == 1 {
                wm(a, b, p + 1)
            } else {
                let v = wm(p + 2 - a, p - b, p + 1);
                [-v[0], -v[1], -v[2]]
            }
        };
        let pv = self.pivot.map(h_one);
        let h = self
            .h_terms
            .iter()
            .map(|t| {
                let v = h_one(*t);
                match pv {
                    Some(q) => [v[0] - q[0], v[1] - q[1], v[2] - q[2]],
                    None => v,
                }
            })
            .collect();
        let v = self.v_terms.iter().map(|&(a, b)| if chart == 1 { wm(a, b, p) } else { wm(p - a, p - b, p) }).collect();
        BasisValues { h, v }
    }
}

#[derive(Debug, Clone)]
pub struct BasisValues {
    pub h: Vec<[C; 3]>,
    pub v: Vec<[C; 3]>,
}

/// A map `S² → S² × T²` in the representation of [`SphereBasis`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteSphereMap {
    pub basis: SphereBasis,
    pub h: Vec<C>,
    pub v: Vec<C>,
    pub offset: C,
}

/// Map value and first derivatives at a domain point, in a chosen target chart.
#[derive(Debug, Clone, Copy)]
pub struct LocalState {
    pub point: TargetPoint,
    /// `∂U/∂x` and `∂U/∂x̄` for the sphere and torus components.
    pub uz: [C; 2],
    pub uzb: [C; 2],
    /// Sphere-component sensitivities to `δg` (the chart form of `δh`):
    /// `δU = A δg`, `δU_x = Bz δg + Cz δg_x`, `δU_x̄ = Bzb δg + Czb δg_x̄`.
    lin: [C; 5],
}

impl LocalState {
    /// A state from its value and Wirtinger derivatives, for maps outside the basis.
    pub fn from_derivatives(point: TargetPoint, uz: [C; 2], uzb: [C; 2]) -> Self {
        Self { point, uz, uzb, lin: [ZERO; 5] }
    }

    pub fn us(&self) -> [C; 2] {
        [self.uz[0] + self.uzb[0], self.uz[1] + self.uzb[1]]
    }

    pub fn ut(&self) -> [C; 2] {
        [I * (self.uz[0] - self.uzb[0]), I * (self.uz[1] - self.uzb[1])]
    }
}

pub(crate) fn vec4(a: [C; 2]) -> Vector4<f64> {
    Vector4::new(a[0].re, a[0].im, a[1].re, a[1].im)
}

impl DiscreteSphereMap {
    /// `u_m(z) = (z, m)`.
    pub fn product(truncation: usize, m: C) -> Result<Self> {
        let basis = SphereBasis::new(truncation, true)?;
        Ok(Self { h: vec![ZERO; basis.h_terms.len()], v: vec![ZERO; basis.v_terms.len()], basis, offset: m })
    }

    /// `u_m` in the gauge-free representation (no anchors, constant in the torus basis).
    pub fn product_gauge_free(truncation: usize, m: C) -> Result<Self> {
        let basis = SphereBasis::new(truncation, false)?;
        Ok(Self { h: vec![ZERO; basis.h_terms.len()], v: vec![ZERO; basis.v_terms.len()], basis, offset: m })
    }

    pub fn truncation(&self) -> usize {
        self.basis.truncation
    }

    pub fn unknowns(&self) -> DVector<f64> {
        let mut out = Vec::with_capacity(self.basis.n_unknowns());
        for c in self.h.iter().chain(&self.v) {
            out.push(c.re);
            out.push(c.im);
        }
        if self.basis.offset_unknown {
            out.push(self.offset.re);
            out.push(self.offset.im);
        }
        DVector::from_vec(out)
    }

    pub fn set_unknowns(&mut self, x: &[f64]) -> Result<()> {
        if x.len() != self.basis.n_unknowns() {
            return Err(Error::Dimension(format!("expected {} unknowns, got {}", self.basis.n_unknowns(), x.len())));
        }
        let nh = self.h.len();
        for (k, c) in self.h.iter_mut().enumerate() {
            *c = C::new(x[2 * k], x[2 * k + 1]);
        }
        for (k, c) in self.v.iter_mut().enumerate() {
            *c = C::new(x[2 * (nh + k)], x[2 * (nh + k) + 1]);
        }
        if self.basis.offset_unknown {
            let n = x.len();
            self.offset = C::new(x[n - 2], x[n - 1]);
        }
        Ok(())
    }

    /// The natural target chart at a domain point (the domain chart itself)
    /// unless the sphere coordinate there exceeds one in modulus.
    pub fn preferred_target_chart(&self, chart: u8, x: C) -> u8 {
        let bv = self.basis.values(chart, x);
        let g: C = self.h.iter().zip(&bv.h).map(|(c, b)| c * b[0]).sum();
        let f = (x + g) / (1.0 - x.conj() * g);
        if f.norm() <= 1.0 {
            chart
        } else {
            3 - chart
        }
    }

    pub fn local_state(&self, bv: &BasisValues, chart: u8, x: C, target_chart: u8) -> Result<LocalState> {
        let (mut g, mut gz, mut gzb) = (ZERO, ZERO, ZERO);
        for (c, b) in self.h.iter().zip(&bv.h) {
            g += c * b[0];
            gz += c * b[1];
            gzb += c * b[2];
        }
        let (mut t, mut tz, mut tzb) = (self.offset, ZERO, ZERO);
        for (c, b) in self.v.iter().zip(&bv.v) {
            t += c * b[0];
            tz += c * b[1];
            tzb += c * b[2];
        }
        let xb = x.conj();
        let rho = 1.0 + x.norm_sqr();
        let d = 1.0 - xb * g;
        if d.norm() < 1e-12 {
            return Err(Error::ChartDomain(format!("sphere component degenerates at {x} (chart {chart})")));
        }
        let (d2, d3) = (d * d, d * d * d);
        let f = (x + g) / d;
        let fz = 1.0 / d;
        let fzb = (x + g) * g / d2;
        let fh = rho / d2;
        let fzh = xb / d2;
        let fzbh = (x + 2.0 * g) / d2 + 2.0 * xb * (x + g) * g / d3;
        let fhh = 2.0 * xb * rho / d3;
        let mut w = f;
        let mut uz = fz + fh * gz;
        let mut uzb = fzb + fh * gzb;
        let mut lin = [fh, fzh + fhh * gz, fh, fzbh + fhh * gzb, fh];
        if target_chart != chart {
            if f.norm() < 1e-12 {
                return Err(Error::ChartDomain(format!("point {x} maps to the pole of target chart {target_chart}")));
            }
            let (f2, f3) = (f * f, f * f * f);
            let a = lin[0];
            lin = [-a / f2, -lin[1] / f2 + 2.0 * uz * a / f3, -lin[2] / f2, -lin[3] / f2 + 2.0 * uzb * a / f3, -lin[4] / f2];
            w = 1.0 / f;
            uz = -uz / f2;
            uzb = -uzb / f2;
        }
        Ok(LocalState { point: TargetPoint::new(target_chart, w, t), uz: [uz, tz], uzb: [uzb, tzb], lin })
    }

    /// Evaluates the map at a domain point given in chart `chart`.
    pub fn eval(&self, chart: u8, x: C, target_chart: Option<u8>) -> Result<LocalState> {
        let tc = target_chart.unwrap_or_else(|| self.preferred_target_chart(chart, x));
        self.local_state(&self.basis.values(chart, x), chart, x, tc)
    }

    /// `|u_S(0)|`, `|u_S(1) - 1|` and `|1/u_S(∞)|`.
    pub fn gauge_residuals(&self) -> Result<[f64; 3]> {
        let a = self.eval(1, ZERO, Some(1))?.point.w.norm();
        let b = (self.eval(1, C::new(1.0, 0.0), Some(1))?.point.w - 1.0).norm();
        let c = self.eval(2, ZERO, Some(2))?.point.w.norm();
        Ok([a, b, c])
    }

    /// Largest disagreement between the two chart representations on the circle `|z| = 1`.
    pub fn chart_compatibility(&self, samples: usize) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..samples {
            let z = C::from_polar(1.0, 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / samples as f64);
            let a = self.eval(1, z, Some(1))?;
            let b = self.eval(2, 1.0 / z, Some(1))?;
            worst = worst.max((a.point.w - b.point.w).norm()).max((a.point.x - b.point.x).norm());
        }
        Ok(worst)
    }
}

/// Anything that can be evaluated with first derivatives in either domain chart.
pub trait SphereCurve {
    fn state(&self, chart: u8, x: C) -> Result<LocalState>;
}

impl SphereCurve for DiscreteSphereMap {
    fn state(&self, chart: u8, x: C) -> Result<LocalState> {
        self.eval(chart, x, None)
    }
}

/// A curve given by a closure returning its state at `(chart, x)`.
pub struct ClosureCurve<F>(pub F);

impl<F: Fn(u8, C) -> Result<LocalState>> SphereCurve for ClosureCurve<F> {
    fn state(&self, chart: u8, x: C) -> Result<LocalState> {
        (self.0)(chart, x)
    }
}

/// The constant map to `p`.
pub fn constant_curve(p: TargetPoint) -> ClosureCurve<impl Fn(u8, C) -> Result<LocalState>> {
    ClosureCurve(move |_, _| Ok(LocalState::from_derivatives(p, [ZERO; 2], [ZERO; 2])))
}

/// Residual of an arbitrary curve at the given collocation nodes.
pub fn cr_residual_curve(curve: &dyn SphereCurve, j: &dyn TargetAlmostComplexField, colloc: &Collocation) -> Result<ResidualField> {
    let mut values = Vec::with_capacity(colloc.len());
    let mut sup: f64 = 0.0;
    for n in &colloc.nodes {
        let s = curve.state(n.chart, n.x)?;
        let r = residual_at(&s, &j.j(&s.point)?);
        sup = sup.max(r.amax());
        values.push([r[0], r[1], r[2], r[3]]);
    }
    Ok(ResidualField { nodes: colloc.nodes.clone(), values, sup })
}

/// A collocation node: domain chart, chart coordinate, and the target chart used there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereNode {
    pub chart: u8,
    pub x: C,
    pub target_chart: u8,
}

/// Latitude-longitude nodes: `p + 4` latitudes (no poles) and `2p + 8`
/// longitudes, each node in the domain chart where `|x| ≤ 1`, with the
/// target chart chosen from `map`.
#[derive(Debug, Clone)]
pub struct Collocation {
    pub nodes: Vec<SphereNode>,
    values: Vec<BasisValues>,
}

impl Collocation {
    pub fn new(map: &DiscreteSphereMap) -> Self {
        let p = map.truncation();
        let (n_lat, n_lon) = (p + 4, 2 * p + 8);
        let mut nodes = Vec::with_capacity(n_lat * n_lon);
        let mut values = Vec::with_capacity(n_lat * n_lon);
        for i in 0..n_lat {
            let theta = std::f64::consts::PI * (i as f64 + 0.5) / n_lat as f64;
            let r = (0.5 * theta).tan();
            for j in 0..n_lon {
                let phi = 2.0 * std::f64::consts::PI * (j as f64 + 0.25 * (i % 2) as f64) / n_lon as f64;
                let z = C::from_polar(r, phi);
                let (chart, x) = if r <= 1.0 { (1, z) } else { (2, 1.0 / z) };
                let target_chart = map.preferred_target_chart(chart, x);
                values.push(map.basis.values(chart, x));
                nodes.push(SphereNode { chart, x, target_chart });
            }
        }
        Self { nodes, values }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn states(&self, map: &DiscreteSphereMap) -> Result<Vec<LocalState>> {
        self.nodes.iter().zip(&self.values).map(|(n, bv)| map.local_state(bv, n.chart, n.x, n.target_chart)).collect()
    }
}

/// `∂_s u + J(u) ∂_t u` at a local state.
pub fn residual_at(state: &LocalState, j: &Matrix4<f64>) -> Vector4<f64> {
    vec4(state.us()) + j * vec4(state.ut())
}

/// Residual at every collocation node, four real components each.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualField {
    pub nodes: Vec<SphereNode>,
    pub values: Vec<[f64; 4]>,
    pub sup: f64,
}

impl ResidualField {
    pub fn to_vector(&self) -> DVector<f64> {
        DVector::from_iterator(4 * self.values.len(), self.values.iter().flat_map(|v| v.iter().copied()))
    }
}

pub fn cr_residual(map: &DiscreteSphereMap, j: &dyn TargetAlmostComplexField, colloc: &Collocation) -> Result<ResidualField> {
    let states = colloc.states(map)?;
    let mut values = Vec::with_capacity(states.len());
    let mut sup: f64 = 0.0;
    for s in &states {
        let r = residual_at(s, &j.j(&s.point)?);
        sup = sup.max(r.amax());
        values.push([r[0], r[1], r[2], r[3]]);
    }
    Ok(ResidualField { nodes: colloc.nodes.clone(), values, sup })
}

/// Real `4·nodes × unknowns` matrix of the derivative of [`cr_residual`]
/// with respect to the unknowns of `map`, using `∇J` by central differences
/// in target coordinates (the flat connection of the chart).
pub fn linearized_operator(map: &DiscreteSphereMap, j: &dyn TargetAlmostComplexField, colloc: &Collocation) -> Result<DMatrix<f64>> {
    let n = map.basis.n_unknowns();
    let mut m = DMatrix::zeros(4 * colloc.len(), n);
    let states = colloc.states(map)?;
    let constant = j.is_constant();
    for (row, (state, bv)) in states.iter().zip(&colloc.values).enumerate() {
        let jm = j.j(&state.point)?;
        let g: [Vector4<f64>; 4] = if constant {
            [Vector4::zeros(); 4]
        } else {
            let dj = j.dj(&state.point)?;
            let ut = vec4(state.ut());
            [dj[0] * ut, dj[1] * ut, dj[2] * ut, dj[3] * ut]
        };
        let column = |du: [C; 2], duz: [C; 2], duzb: [C; 2]| -> Vector4<f64> {
            let s = [duz[0] + duzb[0], duz[1] + duzb[1]];
            let t = [I * (duz[0] - duzb[0]), I * (duz[1] - duzb[1])];
            let mut r = vec4(s) + jm * vec4(t);
            let dv = vec4(du);
            for k in 0..4 {
                if dv[k] != 0.0 {
                    r += g[k] * dv[k];
                }
            }
            r
        };
        let l = state.lin;
        let mut col = 0;
        for phi in &bv.h {
            for dc in [C::new(1.0, 0.0), I] {
                let du = [l[0] * phi[0] * dc, ZERO];
                let duz = [(l[1] * phi[0] + l[2] * phi[1]) * dc, ZERO];
                let duzb = [(l[3] * phi[0] + l[4] * phi[2]) * dc, ZERO];
                m.fixed_view_mut::<4, 1>(4 * row, col).copy_from(&column(du, duz, duzb));
                col += 1;
            }
        }
        for phi in &bv.v {
            for dc in [C::new(1.0, 0.0), I] {
                let r = column([ZERO, phi[0] * dc], [ZERO, phi[1] * dc], [ZERO, phi[2] * dc]);
                m.fixed_view_mut::<4, 1>(4 * row, col).copy_from(&r);
                col += 1;
            }
        }
        if map.basis.offset_unknown {
            for dc in [C::new(1.0, 0.0), I] {
                let r = column([ZERO, dc], [ZERO; 2], [ZERO; 2]);
                m.fixed_view_mut::<4, 1>(4 * row, col).copy_from(&r);
                col += 1;
            }
        }
    }
    Ok(m)
}

/// Largest relative error between the assembled operator and central
/// differences of the residual along `directions`; above `1e-3` this is an
/// assembly error.
pub fn validate_linearization(
    map: &DiscreteSphereMap,
    j: &dyn TargetAlmostComplexField,
    colloc: &Collocation,
    directions: &[DVector<f64>],
) -> Result<f64> {
    let lin = linearized_operator(map, j, colloc)?;
    let x = map.unknowns();
    let mut worst: f64 = 0.0;
    for d in directions {
        let h = 1e-6 / d.amax().max(1e-300);
        let mut plus = map.clone();
        plus.set_unknowns((&x + d * h).as_slice())?;
        let mut minus = map.clone();
        minus.set_unknowns((&x - d * h).as_slice())?;
        let fd = (cr_residual(&plus, j, colloc)?.to_vector() - cr_residual(&minus, j, colloc)?.to_vector()) / (2.0 * h);
        let exact = &lin * d;
        worst = worst.max((&fd - &exact).norm() / fd.norm().max(exact.norm()).max(1e-300));
    }
    if worst > 1e-3 {
        return Err(Error::Assembly(worst));
    }
    Ok(worst)
}

/// Sensitivity of the map value `U(x)` (4 real coordinates, in the state's
/// target chart) to each unknown.
pub(crate) fn value_sensitivity(map: &DiscreteSphereMap, bv: &BasisValues, state: &LocalState) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, map.basis.n_unknowns());
    let mut col = 0;
    for phi in &bv.h {
        for dc in [C::new(1.0, 0.0), I] {
            m.fixed_view_mut::<4, 1>(0, col).copy_from(&vec4([state.lin[0] * phi[0] * dc, ZERO]));
            col += 1;
        }
    }
    for phi in &bv.v {
        for dc in [C::new(1.0, 0.0), I] {
            m.fixed_view_mut::<4, 1>(0, col).copy_from(&vec4([ZERO, phi[0] * dc]));
            col += 1;
        }
    }
    if map.basis.offset_unknown {
        for dc in [C::new(1.0, 0.0), I] {
            m.fixed_view_mut::<4, 1>(0, col).copy_from(&vec4([ZERO, dc]));
            col += 1;
        }
    }
    m
}

/// Node dump rows `(chart, Re x, Im x, target chart, Re w, Im w, Re x_T, Im x_T)`.
pub fn node_rows(map: &DiscreteSphereMap, colloc: &Collocation) -> Result<Vec<Vec<f64>>> {
    let states = colloc.states(map)?;
    Ok(colloc
        .nodes
        .iter()
        .zip(&states)
        .map(|(n, s)| vec![n.chart as f64, n.x.re, n.x.im, n.target_chart as f64, s.point.w.re, s.point.w.im, s.point.x.re, s.point.x.im])
        .collect())
}

pub const NODE_HEADER: [&str; 8] = ["chart", "re_x", "im_x", "target_chart", "re_w", "im_w", "re_torus", "im_torus"];
