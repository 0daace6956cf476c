//! Linear symplectic algebra: forms, Darboux bases, compatible and tame
//! complex structures, the Cayley chart and the Nijenhuis tensor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ANTISYMMETRY_TOL: f64 = 1e-12;
const NONDEGENERACY_TOL: f64 = 1e-10;

pub fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Dimension("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// Standard form on `R^{2n}` in interleaved coordinates.
pub fn standard_omega(dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim / 2 {
        m[(2 * j, 2 * j + 1)] = 1.0;
        m[(2 * j + 1, 2 * j)] = -1.0;
    }
    m
}

/// Standard complex structure `J₀`, satisfying `Ω₀ J₀ = I`.
pub fn standard_j(dim: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for j in 0..dim / 2 {
        m[(2 * j, 2 * j + 1)] = -1.0;
        m[(2 * j + 1, 2 * j)] = 1.0;
    }
    m
}

fn frob(m: &DMatrix<f64>) -> f64 {
    m.norm()
}

/// Antisymmetric bilinear form `ω(u, v) = uᵀ Ω v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct BilinearForm {
    entries: DMatrix<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for BilinearForm {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        BilinearForm::new(matrix_from_rows(&rows)?)
    }
}

impl From<BilinearForm> for Vec<Vec<f64>> {
    fn from(f: BilinearForm) -> Self {
        rows_of(&f.entries)
    }
}

impl BilinearForm {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() {
            return Err(Error::Dimension("form matrix is not square".into()));
        }
        if n == 0 || n % 2 == 1 {
            return Err(Error::Dimension(format!("form dimension {n} is not even and positive")));
        }
        let defect = frob(&(&entries + entries.transpose()));
        if defect > ANTISYMMETRY_TOL * frob(&entries).max(1.0) {
            return Err(Error::Precondition(format!("form is not antisymmetric (defect {defect:.2e})")));
        }
        Ok(Self { entries })
    }

    pub fn standard(dim: usize) -> Result<Self> {
        Self::new(standard_omega(dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn eval(&self, u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        u.dot(&(&self.entries * v))
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { entries: &self.entries * s }
    }
}

/// Pfaffian by skew-symmetric Gaussian elimination with pivoting.
pub fn pfaffian(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    if n % 2 == 1 {
        return 0.0;
    }
    let mut m = a.clone();
    let mut pf = 1.0;
    let mut k = 0;
    while k < n {
        let (mut piv, mut best) = (k + 1, 0.0);
        for j in k + 1..n {
            if m[(k, j)].abs() > best {
                best = m[(k, j)].abs();
                piv = j;
            }
        }
        if best == 0.0 {
            return 0.0;
        }
        if piv != k + 1 {
            m.swap_rows(k + 1, piv);
            m.swap_columns(k + 1, piv);
            pf = -pf;
        }
        let d = m[(k, k + 1)];
        pf *= d;
        for i in k + 2..n {
            let f = m[(k, i)] / d;
            if f != 0.0 {
                for r in 0..n {
                    let v = m[(r, k + 1)];
                    m[(r, i)] -= f * v;
                }
                for c in 0..n {
                    let v = m[(k + 1, c)];
                    m[(i, c)] -= f * v;
                }
            }
        }
        k += 2;
    }
    pf
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Nondegeneracy {
    pub nondegenerate: bool,
    pub pfaffian: f64,
}

/// The top power `ω^n` is a volume form iff the Pfaffian is nonzero; the
/// test is relative to `‖Ω‖ⁿ`.
pub fn check_nondegenerate(omega: &BilinearForm) -> Nondegeneracy {
    let n = omega.dim() / 2;
    let pf = pfaffian(omega.matrix());
    let scale = frob(omega.matrix()).powi(n as i32);
    Nondegeneracy { nondegenerate: pf.abs() > NONDEGENERACY_TOL * scale, pfaffian: pf }
}

fn require_nondegenerate(omega: &BilinearForm) -> Result<()> {
    let c = check_nondegenerate(omega);
    if c.nondegenerate {
        Ok(())
    } else {
        Err(Error::Degenerate(format!("Pfaffian {:.3e}", c.pfaffian)))
    }
}

/// Symplectic basis with `Ω(Xᵢ, Yᵢ) = 1` and all other pairings zero.
#[derive(Debug, Clone)]
pub struct DarbouxBasis {
    pub x: Vec<DVector<f64>>,
    pub y: Vec<DVector<f64>>,
}

impl DarbouxBasis {
    /// Columns `(X₁..Xₙ, Y₁..Yₙ)`; `BᵀΩB = [[0, I], [-I, 0]]`.
    pub fn block_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<_> = self.x.iter().chain(&self.y).cloned().collect();
        DMatrix::from_columns(&cols)
    }

    /// Columns `(X₁, Y₁, X₂, Y₂, ...)`; `BᵀΩB` is the interleaved standard form.
    pub fn interleaved_matrix(&self) -> DMatrix<f64> {
        let cols: Vec<_> = self.x.iter().zip(&self.y).flat_map(|(x, y)| [x.clone(), y.clone()]).collect();
        DMatrix::from_columns(&cols)
    }
}

pub fn darboux_basis(omega: &BilinearForm) -> Result<DarbouxBasis> {
    require_nondegenerate(omega)?;
    let dim = omega.dim();
    let scale = frob(omega.matrix());
    let mut xs: Vec<DVector<f64>> = Vec::new();
    let mut ys: Vec<DVector<f64>> = Vec::new();
    let project = |u: &DVector<f64>, xs: &[DVector<f64>], ys: &[DVector<f64>]| {
        let mut p = u.clone();
        for (x, y) in xs.iter().zip(ys) {
            let a = omega.eval(u, y);
            let b = omega.eval(u, x);
            p -= x * a;
            p += y * b;
        }
        p
    };
    for _ in 0..dim / 2 {
        let candidates: Vec<DVector<f64>> =
            (0..dim).map(|j| project(&DVector::from_fn(dim, |i, _| (i == j) as u8 as f64), &xs, &ys)).collect();
        let v = candidates
            .iter()
            .find(|c| c.norm() > 1e-10)
            .cloned()
            .ok_or_else(|| Error::Degenerate("no vector left outside the span".into()))?;
        let (mut best, mut w) = (0.0, None);
        for c in &candidates {
            let pairing = omega.eval(&v, c);
            if pairing.abs() > best {
                best = pairing.abs();
                w = Some(c / pairing);
            }
        }
        let w = w.filter(|_| best > NONDEGENERACY_TOL * scale.max(1.0) * v.norm())
            .ok_or_else(|| Error::Degenerate("no partner vector with nonzero pairing".into()))?;
        xs.push(v);
        ys.push(w);
    }
    Ok(DarbouxBasis { x: xs, y: ys })
}

/// A linear map `J` with `J² = -1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct LinearComplexStructure {
    entries: DMatrix<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for LinearComplexStructure {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        LinearComplexStructure::new(matrix_from_rows(&rows)?)
    }
}

impl From<LinearComplexStructure> for Vec<Vec<f64>> {
    fn from(j: LinearComplexStructure) -> Self {
        rows_of(&j.entries)
    }
}

impl LinearComplexStructure {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() || n == 0 || n % 2 == 1 {
            return Err(Error::Dimension(format!("complex structure must be even square, got {n}x{}", entries.ncols())));
        }
        let defect = square_defect(&entries);
        if defect > 1e-12 * frob(&entries).powi(2).max(1.0) {
            return Err(Error::Precondition(format!("J² ≠ -1 (defect {defect:.2e})")));
        }
        Ok(Self { entries })
    }

    pub fn standard(dim: usize) -> Self {
        Self { entries: standard_j(dim) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }
}

/// `‖J² + 1‖_F`.
pub fn square_defect(j: &DMatrix<f64>) -> f64 {
    let n = j.nrows();
    frob(&(j * j + DMatrix::identity(n, n)))
}

/// Symmetric positive definite metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricForm {
    entries: DMatrix<f64>,
}

impl MetricForm {
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        let n = entries.nrows();
        if n != entries.ncols() || n == 0 {
            return Err(Error::Dimension("metric must be square".into()));
        }
        let sym = 0.5 * (&entries + entries.transpose());
        if frob(&(&entries - &sym)) > 1e-12 * frob(&entries) {
            return Err(Error::Precondition("metric is not symmetric".into()));
        }
        let min = SymmetricEigen::new(sym.clone()).eigenvalues.min();
        if min <= 0.0 {
            return Err(Error::Precondition(format!("metric is not positive definite (min eigenvalue {min:.3e})")));
        }
        Ok(Self { entries: sym })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self { entries: DMatrix::identity(dim, dim) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Polar-decomposition construction `J_g = A (A*A)^{-1/2}` with `ω = g(A·, ·)`.
pub fn compatible_from_metric(omega: &BilinearForm, g: &MetricForm) -> Result<LinearComplexStructure> {
    require_nondegenerate(omega)?;
    let dim = omega.dim();
    if g.matrix().nrows() != dim {
        return Err(Error::Dimension("metric and form dimensions differ".into()));
    }
    let chol = g.matrix().clone().cholesky().ok_or_else(|| Error::Precondition("metric Cholesky failed".into()))?;
    let l = chol.l();
    let l_inv = l.clone().try_inverse().ok_or_else(|| Error::Degenerate("metric factor singular".into()))?;
    // A = -G⁻¹Ω is g-skew, so in the Cholesky frame Ã = Lᵀ A L⁻ᵀ = -L⁻¹ Ω L⁻ᵀ is skew.
    let a_tilde = -(&l_inv * omega.matrix() * l_inv.transpose());
    let p = -(&a_tilde * &a_tilde);
    let p = 0.5 * (&p + p.transpose());
    let eig = SymmetricEigen::new(p);
    if eig.eigenvalues.min() <= 0.0 {
        return Err(Error::Degenerate("A*A is not positive definite".into()));
    }
    let inv_sqrt = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()))
        * eig.eigenvectors.transpose();
    let j_tilde = &a_tilde * inv_sqrt;
    let mut j = l_inv.transpose() * j_tilde * l.transpose();
    // Newton iteration J ← ½(J - J⁻¹) removes roundoff from ill-conditioned frames.
    for _ in 0..3 {
        if square_defect(&j) <= 1e-14 * frob(&j).powi(2) {
            break;
        }
        let inv = j.clone().try_inverse().ok_or_else(|| Error::Degenerate("J is singular".into()))?;
        j = 0.5 * (&j - inv);
    }
    LinearComplexStructure::new(j)
}

#[derive(Debug, Clone)]
pub struct CayleyImage {
    pub j: LinearComplexStructure,
    pub condition: f64,
}

fn anticommutes_with_j0(y: &DMatrix<f64>) -> Result<()> {
    let j0 = standard_j(y.nrows());
    let defect = frob(&(y * &j0 + &j0 * y));
    if defect > 1e-10 * frob(y).max(1.0) {
        return Err(Error::Precondition(format!("Y does not anticommute with J₀ (defect {defect:.2e})")));
    }
    Ok(())
}

/// `J_Y = (1 + ½J₀Y) J₀ (1 + ½J₀Y)^{-1}` for `Y` anticommuting with `J₀`.
pub fn cayley_chart(y: &DMatrix<f64>) -> Result<CayleyImage> {
    let n = y.nrows();
    if n != y.ncols() || n % 2 == 1 || n == 0 {
        return Err(Error::Dimension("Y must be an even square matrix".into()));
    }
    anticommutes_with_j0(y)?;
    let j0 = standard_j(n);
    let m = DMatrix::identity(n, n) + 0.5 * (&j0 * y);
    let sv = m.clone().singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    if smin <= 1e-12 * smax {
        return Err(Error::ChartDomain("1 + ½J₀Y is singular".into()));
    }
    let inv = m.clone().try_inverse().ok_or_else(|| Error::ChartDomain("1 + ½J₀Y is singular".into()))?;
    let j = &m * j0 * inv;
    Ok(CayleyImage { j: LinearComplexStructure { entries: j }, condition: smax / smin })
}

/// Inverse chart: `Z = -(J + J₀)⁻¹(J - J₀)`, `Y = -2J₀Z`.
pub fn cayley_inverse(j: &LinearComplexStructure) -> Result<DMatrix<f64>> {
    let n = j.dim();
    let j0 = standard_j(n);
    let s = j.matrix() + &j0;
    let inv = s.try_inverse().ok_or_else(|| Error::ChartDomain("J + J₀ is singular".into()))?;
    let z = -(inv * (j.matrix() - &j0));
    Ok(-2.0 * (&j0 * z))
}

/// Antilinear matrix `Y` obtained by anticommuting a generic matrix with `J₀`.
pub fn antilinear_part(m: &DMatrix<f64>) -> DMatrix<f64> {
    let j0 = standard_j(m.nrows());
    0.5 * (m + &j0 * m * &j0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TamingClass {
    Compatible,
    TameOnly,
    Neither,
}

#[derive(Debug, Clone)]
pub struct TamingReport {
    pub class: TamingClass,
    pub min_eigenvalue: f64,
    pub invariance_defect: f64,
    pub metric: Option<DMatrix<f64>>,
}

pub fn classify_taming(omega: &BilinearForm, j: &LinearComplexStructure) -> Result<TamingReport> {
    require_nondegenerate(omega)?;
    if omega.dim() != j.dim() {
        return Err(Error::Dimension("form and complex structure dimensions differ".into()));
    }
    let o = omega.matrix();
    let oj = o * j.matrix();
    let s = 0.5 * (&oj + oj.transpose());
    let min_eigenvalue = SymmetricEigen::new(s.clone()).eigenvalues.min();
    let invariance_defect = frob(&(j.matrix().transpose() * o * j.matrix() - o)) / frob(o);
    let tame = min_eigenvalue > 1e-12 * frob(o);
    let class = match (tame, invariance_defect < 1e-10) {
        (true, true) => TamingClass::Compatible,
        (true, false) => TamingClass::TameOnly,
        (false, _) => TamingClass::Neither,
    };
    Ok(TamingReport { class, min_eigenvalue, invariance_defect, metric: tame.then_some(s) })
}

type JEvaluator = dyn Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Send + Sync;

/// A complex structure depending on the point of `R^{dim}`.
pub struct AlmostComplexField {
    dim: usize,
    eval: Box<JEvaluator>,
    pub fd_step: f64,
}

impl std::fmt::Debug for AlmostComplexField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("AlmostComplexField").field("dim", &self.dim).field("fd_step", &self.fd_step).finish()
    }
}

impl AlmostComplexField {
    pub fn new(dim: usize, eval: impl Fn(&DVector<f64>) -> Result<DMatrix<f64>> + Send + Sync + 'static) -> Self {
        Self { dim, eval: Box::new(eval), fd_step: 1e-4 }
    }

    /// Field `p ↦ J_{Y(p)}` through the Cayley chart.
    pub fn from_cayley(dim: usize, y: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        Self::new(dim, move |p| Ok(cayley_chart(&y(p))?.j.into_matrix()))
    }

    pub fn constant(j: LinearComplexStructure) -> Self {
        let dim = j.dim();
        let m = j.into_matrix();
        Self::new(dim, move |_| Ok(m.clone()))
    }

    pub fn with_fd_step(mut self, h: f64) -> Self {
        self.fd_step = h;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, p: &DVector<f64>) -> Result<DMatrix<f64>> {
        if p.len() != self.dim {
            return Err(Error::Dimension(format!("point has dimension {}, field {}", p.len(), self.dim)));
        }
        (self.eval)(p)
    }

    fn directional(&self, p: &DVector<f64>, v: &DVector<f64>) -> Result<DMatrix<f64>> {
        let h = self.fd_step;
        let plus = self.eval(&(p + v * h))?;
        let minus = self.eval(&(p - v * h))?;
        Ok((plus - minus) / (2.0 * h))
    }
}

/// `N_J(X,Y) = [JX,JY] - J[JX,Y] - J[X,JY] - [X,Y]` for the constant
/// extensions of `X` and `Y`, with central differences of step `fd_step`.
pub fn nijenhuis_tensor(
    field: &AlmostComplexField,
    p: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<DVector<f64>> {
    if x.len() != field.dim() || y.len() != field.dim() {
        return Err(Error::Dimension("vector dimension mismatch".into()));
    }
    let j = field.eval(p)?;
    let jx = &j * x;
    let jy = &j * y;
    let d_jx = field.directional(p, &jx)?;
    let d_jy = field.directional(p, &jy)?;
    let d_x = field.directional(p, x)?;
    let d_y = field.directional(p, y)?;
    Ok(d_jx * y - d_jy * x + &j * (d_y * x) - &j * (d_x * y))
}
