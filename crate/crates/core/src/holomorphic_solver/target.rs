use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic_linear::{cayley_chart, classify_taming, AlmostComplexField, BilinearForm, LinearComplexStructure, TamingClass};

/// A point of `S² × T²`: the sphere coordinate `w` in stereographic chart
/// `chart` (1 at 0, 2 at ∞ with `w₂ = 1/w`) and a lift `x ∈ C ≅ R²` of the
/// torus point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TargetPoint {
    pub chart: u8,
    pub w: Complex64,
    pub x: Complex64,
}

impl TargetPoint {
    pub fn new(chart: u8, w: Complex64, x: Complex64) -> Self {
        Self { chart, w, x }
    }

    /// The same point in the other sphere chart.
    pub fn switch_chart(&self) -> Result<Self> {
        if self.w.norm() == 0.0 {
            return Err(Error::ChartDomain("w = 0 has no image in the other chart".into()));
        }
        Ok(Self { chart: 3 - self.chart, w: 1.0 / self.w, x: self.x })
    }

    pub fn in_chart(&self, chart: u8) -> Result<Self> {
        if chart == self.chart {
            Ok(*self)
        } else {
            self.switch_chart()
        }
    }

    /// Real coordinates `(Re w, Im w, Re x, Im x)`.
    pub fn coords(&self) -> Vector4<f64> {
        Vector4::new(self.w.re, self.w.im, self.x.re, self.x.im)
    }

    fn shifted(&self, j: usize, h: f64) -> Self {
        let mut p = *self;
        match j {
            0 => p.w.re += h,
            1 => p.w.im += h,
            2 => p.x.re += h,
            _ => p.x.im += h,
        }
        p
    }

    /// Chordal distance on the sphere factor plus flat distance mod `Z²` on the torus.
    pub fn distance(&self, other: &Self) -> f64 {
        let (a, b) = (self.in_chart(1).ok(), other.in_chart(1).ok());
        let chordal = |w: Option<Complex64>, v: Option<Complex64>| match (w, v) {
            (Some(w), Some(v)) => 2.0 * (w - v).norm() / ((1.0 + w.norm_sqr()).sqrt() * (1.0 + v.norm_sqr()).sqrt()),
            (None, None) => 0.0,
            (Some(w), None) | (None, Some(w)) => 2.0 / (1.0 + w.norm_sqr()).sqrt(),
        };
        let d = self.x - other.x;
        let wrap = |t: f64| t - t.round();
        chordal(a.map(|p| p.w), b.map(|p| p.w)) + Complex64::new(wrap(d.re), wrap(d.im)).norm()
    }
}

/// Step for the central differences of `J` in target coordinates.
pub const J_FD_STEP: f64 = 1e-5;

/// An almost complex structure on `S² × T²`, given chartwise in the real
/// coordinates `(Re w, Im w, Re x, Im x)`.
pub trait TargetAlmostComplexField: Send + Sync {
    fn j(&self, p: &TargetPoint) -> Result<Matrix4<f64>>;

    fn descriptor(&self) -> String;

    /// `∂J/∂y_k` for the four real coordinates, by central differences.
    fn dj(&self, p: &TargetPoint) -> Result<[Matrix4<f64>; 4]> {
        let mut out = [Matrix4::zeros(); 4];
        for (k, o) in out.iter_mut().enumerate() {
            let plus = self.j(&p.shifted(k, J_FD_STEP))?;
            let minus = self.j(&p.shifted(k, -J_FD_STEP))?;
            *o = (plus - minus) / (2.0 * J_FD_STEP);
        }
        Ok(out)
    }

    /// True when `J` does not depend on the point.
    fn is_constant(&self) -> bool {
        false
    }
}

pub(crate) fn j0_4() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    for b in 0..2 {
        j[(2 * b, 2 * b + 1)] = -1.0;
        j[(2 * b + 1, 2 * b)] = 1.0;
    }
    j
}

/// `J₀ = i ⊕ i`, which is `i` in both sphere charts.
#[derive(Debug, Clone, Copy, Default)]
pub struct ProductJ;

impl TargetAlmostComplexField for ProductJ {
    fn j(&self, _p: &TargetPoint) -> Result<Matrix4<f64>> {
        Ok(j0_4())
    }
    fn descriptor(&self) -> String {
        "product i + J_T2".into()
    }
    fn dj(&self, _p: &TargetPoint) -> Result<[Matrix4<f64>; 4]> {
        Ok([Matrix4::zeros(); 4])
    }
    fn is_constant(&self) -> bool {
        true
    }
}

/// Coefficients of the antilinear field `Y` behind a Cayley path. In sphere
/// chart 1, writing `ρ = 1 + |w|²` and `Y(ξ_S, ξ_T) = (M_SS ξ̄_S + M_ST ξ̄_T,
/// M_TS ξ̄_S + M_TT ξ̄_T)`:
///
/// * `M_SS = cos(2πx₁) (c₀ + c₁w + c₂w²) / ρ²`
/// * `M_ST = sin(2πx₂) (d₀ + d₁w) / ρ`
/// * `M_TS = cos(2π(x₁ + x₂)) (e₀ + e₁w) / ρ²`
/// * `M_TT = sin(2πx₁) (f₀ + f₁/ρ)`
///
/// Each entry is the chart-1 form of a smooth tensor on `S² × T²`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CayleyCoefficients {
    pub c: [Complex64; 3],
    pub d: [Complex64; 2],
    pub e: [Complex64; 2],
    pub f: [Complex64; 2],
}

impl Default for CayleyCoefficients {
    fn default() -> Self {
        let c = Complex64::new;
        Self {
            c: [c(0.6, 0.2), c(-0.3, 0.5), c(0.4, -0.1)],
            d: [c(0.5, 0.0), c(0.0, 0.3)],
            e: [c(-0.4, 0.2), c(0.3, 0.0)],
            f: [c(0.3, -0.2), c(0.0, 0.5)],
        }
    }
}

/// `J_t = Cayley(t · amplitude · Y)` on `S² × T²`; `t = 0` gives `J₀`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CayleyPathJ {
    pub amplitude: f64,
    pub t: f64,
    pub coefficients: CayleyCoefficients,
}

fn antilinear_block(y: &mut Matrix4<f64>, r: usize, c: usize, m: Complex64) {
    y[(2 * r, 2 * c)] = m.re;
    y[(2 * r, 2 * c + 1)] = m.im;
    y[(2 * r + 1, 2 * c)] = m.im;
    y[(2 * r + 1, 2 * c + 1)] = -m.re;
}

impl CayleyPathJ {
    pub fn new(amplitude: f64, t: f64) -> Self {
        Self { amplitude, t, coefficients: CayleyCoefficients::default() }
    }

    pub fn at(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    /// The antilinear field `Y` in the chart of `p` (scaled by `t · amplitude`).
    pub fn y(&self, p: &TargetPoint) -> Matrix4<f64> {
        let s = self.amplitude * self.t;
        let k = &self.coefficients;
        let (x1, x2) = (p.x.re, p.x.im);
        let b_ss = (2.0 * PI * x1).cos();
        let b_st = (2.0 * PI * x2).sin();
        let b_ts = (2.0 * PI * (x1 + x2)).cos();
        let b_tt = (2.0 * PI * x1).sin();
        let w = p.w;
        let rho = 1.0 + w.norm_sqr();
        let (mss, mst, mts, mtt) = if p.chart == 1 {
            (
                (k.c[0] + k.c[1] * w + k.c[2] * w * w) / (rho * rho),
                (k.d[0] + k.d[1] * w) / rho,
                (k.e[0] + k.e[1] * w) / (rho * rho),
                k.f[0] + k.f[1] / rho,
            )
        } else {
            // Chart 2 (ζ = w here): tangent vectors transform by ξ₂ = -ξ/w².
            let z = w;
            let zb = z.conj();
            (
                (k.c[0] * z.powu(4) + k.c[1] * z.powu(3) + k.c[2] * z * z) / (rho * rho),
                -(k.d[0] * z.powu(3) * zb + k.d[1] * z * z * zb) / rho,
                -(k.e[0] * z * z + k.e[1] * z) / (rho * rho),
                k.f[0] + k.f[1] * z.norm_sqr() / rho,
            )
        };
        let mut y = Matrix4::zeros();
        antilinear_block(&mut y, 0, 0, mss * b_ss * s);
        antilinear_block(&mut y, 0, 1, mst * b_st * s);
        antilinear_block(&mut y, 1, 0, mts * b_ts * s);
        antilinear_block(&mut y, 1, 1, mtt * b_tt * s);
        y
    }
}

impl TargetAlmostComplexField for CayleyPathJ {
    fn j(&self, p: &TargetPoint) -> Result<Matrix4<f64>> {
        if self.amplitude * self.t == 0.0 {
            return Ok(j0_4());
        }
        let y = self.y(p);
        let img = cayley_chart(&DMatrix::from_column_slice(4, 4, y.as_slice()))?;
        Ok(Matrix4::from_column_slice(img.j.matrix().as_slice()))
    }
    fn descriptor(&self) -> String {
        format!("cayley path amplitude {} at t = {}", self.amplitude, self.t)
    }
    fn is_constant(&self) -> bool {
        self.amplitude * self.t == 0.0
    }
}

/// The product form `Ω = σ ⊕ ω₀` with `σ = (ℏ/π) (1 + |w|²)^{-2} dA` in either chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProductForm {
    pub hbar: f64,
}

impl ProductForm {
    pub fn new(hbar: f64) -> Result<Self> {
        if !(hbar > 0.0) {
            return Err(Error::Precondition("ℏ must be positive".into()));
        }
        Ok(Self { hbar })
    }

    pub fn sigma(&self, w: Complex64) -> f64 {
        self.hbar / PI / (1.0 + w.norm_sqr()).powi(2)
    }

    pub fn matrix(&self, p: &TargetPoint) -> Matrix4<f64> {
        let s = self.sigma(p.w);
        let mut o = Matrix4::zeros();
        o[(0, 1)] = s;
        o[(1, 0)] = -s;
        o[(2, 3)] = 1.0;
        o[(3, 2)] = -1.0;
        o
    }

    /// Whether `Ω` tames `J(p)`, with the smallest eigenvalue of the symmetric part.
    pub fn tames(&self, j: &Matrix4<f64>, p: &TargetPoint) -> Result<(bool, f64)> {
        let omega = BilinearForm::new(DMatrix::from_column_slice(4, 4, self.matrix(p).as_slice()))?;
        let jj = LinearComplexStructure::new(DMatrix::from_column_slice(4, 4, j.as_slice()))?;
        let r = classify_taming(&omega, &jj)?;
        Ok((r.class != TamingClass::Neither, r.min_eigenvalue))
    }
}

/// A complex structure on a ball in `R^{2n}` with `J(0) = i`.
pub struct BallTarget {
    pub field: AlmostComplexField,
}

impl BallTarget {
    pub fn new(field: AlmostComplexField) -> Result<Self> {
        let j0 = field.eval(&DVector::zeros(field.dim()))?;
        let defect = (&j0 - crate::symplectic_linear::standard_j(field.dim())).norm();
        if defect > 1e-12 {
            return Err(Error::Precondition(format!("J(0) differs from i by {defect:.2e}")));
        }
        Ok(Self { field })
    }

    pub fn dim(&self) -> usize {
        self.field.dim()
    }

    pub fn j(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.field.eval(p)
    }

    pub fn dj(&self, p: &DVector<f64>) -> Result<Vec<DMatrix<f64>>> {
        (0..self.dim())
            .map(|k| {
                let mut e = DVector::zeros(self.dim());
                e[k] = J_FD_STEP;
                Ok((self.field.eval(&(p + &e))? - self.field.eval(&(p - &e))?) / (2.0 * J_FD_STEP))
            })
            .collect()
    }
}

/// Random-point check that `J² = -1` to `tol`.
pub fn check_square(field: &dyn TargetAlmostComplexField, points: &[TargetPoint], tol: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for p in points {
        let j = field.j(p)?;
        worst = worst.max((j * j + Matrix4::identity()).norm());
    }
    if worst > tol {
        return Err(Error::Precondition(format!("J² + 1 reaches {worst:.2e}")));
    }
    Ok(worst)
}
