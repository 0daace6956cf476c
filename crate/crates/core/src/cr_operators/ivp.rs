use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::cauchy::CauchyTransform;
use super::grid::{dbar_residual_within, GridFunctionBall};
use crate::error::{Error, Result};

/// Fixed-point tolerance in the discrete sup norm.
pub const IVP_TOL: f64 = 1e-8;
const MAX_ITER: usize = 500;

#[derive(Debug, Clone, Serialize)]
pub struct IvpSolution {
    pub u: GridFunctionBall,
    pub contraction_factor: f64,
    pub iterations: usize,
    pub fixed_point_residual: f64,
    /// `max |∂̄u + Au|` by central differences on `|z| ≤ ε - 4h`, away
    /// from the jump of `χA` at the rim.
    pub pde_residual: f64,
}

/// A zeroth-order term `z ↦ A(z)`, a real `2n × 2n` matrix acting on
/// `Cⁿ ≅ R^{2n}` in interleaved coordinates.
pub type MatrixField<'a> = dyn Fn(Complex64) -> DMatrix<f64> + 'a;

fn apply_real(a: &DMatrix<f64>, u: &[Complex64]) -> Vec<Complex64> {
    let x = DVector::from_iterator(2 * u.len(), u.iter().flat_map(|z| [z.re, z.im]));
    let y = a * x;
    (0..u.len()).map(|c| Complex64::new(y[2 * c], y[2 * c + 1])).collect()
}

/// Solves `∂̄u + Au = 0` on `B_ε` with `u(0) = u₀` by iterating
/// `u ↦ u₀ + T(-χAu) - T(-χAu)(0)` on a grid with `nodes` points per side.
pub fn solve_linear_cr_ivp(a: &MatrixField<'_>, u0: &[Complex64], eps: f64, nodes: usize) -> Result<IvpSolution> {
    let n = u0.len();
    let transform = CauchyTransform::new(eps, nodes, eps)?;
    let mut u = GridFunctionBall::from_fn(eps, nodes, n, eps * std::f64::consts::SQRT_2, |_| u0.to_vec())?;
    let mats: Vec<Option<DMatrix<f64>>> = (0..nodes * nodes)
        .map(|p| {
            let z = u.node(p % nodes, p / nodes);
            (z.norm() <= eps).then(|| a(z))
        })
        .collect();
    for m in mats.iter().flatten() {
        if m.shape() != (2 * n, 2 * n) {
            return Err(Error::Dimension(format!("A must be {}×{}", 2 * n, 2 * n)));
        }
    }
    let forcing = |u: &GridFunctionBall| -> GridFunctionBall {
        let mut f = GridFunctionBall::zeros(eps, nodes, n).expect("grid validated");
        f.support_radius = eps;
        for (p, m) in mats.iter().enumerate() {
            if let Some(m) = m {
                let v = apply_real(m, &u.values[p * n..(p + 1) * n]);
                for (c, w) in v.into_iter().enumerate() {
                    f.values[p * n + c] = -w;
                }
            }
        }
        f
    };
    let centre = u.center_index();
    let mut prev_diff = f64::NAN;
    let mut factor: f64 = 0.0;
    for it in 1..=MAX_ITER {
        let tf = transform.apply(&forcing(&u))?;
        let t0 = tf.at_origin();
        let mut next = tf;
        for p in 0..nodes * nodes {
            for c in 0..n {
                next.values[p * n + c] = u0[c] + (next.values[p * n + c] - t0[c]);
            }
        }
        for c in 0..n {
            next.set(centre, centre, c, u0[c]);
        }
        let diff = next.values.iter().zip(&u.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        u = next;
        if prev_diff.is_finite() && prev_diff > 0.0 {
            factor = diff / prev_diff;
            if it > 3 && factor >= 1.0 {
                return Err(Error::Contraction { factor });
            }
        }
        if diff < IVP_TOL {
            let f = forcing(&u);
            let pde_residual = dbar_residual_within(&u, &f, eps - 4.0 * u.h())?;
            return Ok(IvpSolution { u, contraction_factor: factor, iterations: it, fixed_point_residual: diff, pde_residual });
        }
        prev_diff = diff;
    }
    Err(Error::Contraction { factor })
}

#[derive(Debug, Clone, Serialize)]
pub struct SimilarityFrame {
    /// Column `c` solves the problem with `u₀ = e_c`.
    pub columns: Vec<IvpSolution>,
    pub origin_defect: f64,
    /// Smallest `|det Φ|` over grid nodes in `B_ε`.
    pub min_abs_det: f64,
}

/// Solution matrix `Φ` with `Φ(0) = 1` from the basis runs `u₀ = e_1, …, e_n`.
pub fn similarity_frame(a: &MatrixField<'_>, n: usize, eps: f64, nodes: usize) -> Result<SimilarityFrame> {
    let mut columns = Vec::with_capacity(n);
    for c in 0..n {
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        e[c] = Complex64::new(1.0, 0.0);
        columns.push(solve_linear_cr_ivp(a, &e, eps, nodes)?);
    }
    let grid = &columns[0].u;
    let mut origin_defect: f64 = 0.0;
    let mut min_abs_det = f64::INFINITY;
    let m = grid.center_index();
    for j in 0..nodes {
        for i in 0..nodes {
            if grid.node(i, j).norm() > eps {
                continue;
            }
            let phi = DMatrix::from_fn(n, n, |r, c| columns[c].u.get(i, j, r));
            if i == m && j == m {
                origin_defect = (phi.clone() - DMatrix::identity(n, n)).norm();
            }
            min_abs_det = min_abs_det.min(phi.determinant().norm());
        }
    }
    Ok(SimilarityFrame { columns, origin_defect, min_abs_det })
}
