use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::rank::{realify, AssembledOperator};
use crate::error::{Error, Result};

/// A polynomial section of `E_k → S²`: `f` on the chart at 0 and
/// `g(z) = z^k f(1/z)` on the chart at ∞.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereBundleSection {
    pub k: i64,
    /// `f(z) = Σ coefficients[j] z^j`.
    pub coefficients: Vec<Complex64>,
}

impl SphereBundleSection {
    pub fn new(k: i64, coefficients: Vec<Complex64>) -> Self {
        Self { k, coefficients }
    }

    pub fn eval_chart1(&self, z: Complex64) -> Complex64 {
        self.coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }

    /// `g` as a Laurent polynomial: pairs `(power, coefficient)` of `z^k f(1/z)`.
    pub fn chart2_terms(&self) -> Vec<(i64, Complex64)> {
        self.coefficients
            .iter()
            .enumerate()
            .filter(|(_, c)| c.norm() != 0.0)
            .map(|(j, c)| (self.k - j as i64, *c))
            .collect()
    }

    /// `g` extends smoothly over `z = 0` iff no negative powers occur.
    pub fn smooth_at_infinity(&self) -> bool {
        self.chart2_terms().iter().all(|(p, _)| *p >= 0)
    }

    pub fn eval_chart2(&self, z: Complex64) -> Complex64 {
        self.chart2_terms().iter().map(|(p, c)| c * z.powi(*p as i32)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereKernel {
    pub k: i64,
    pub kernel_basis: Vec<SphereBundleSection>,
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
}

/// Exact kernel of `∂̄` on `E_k`: the complex span of `1, z, …, z^k`. The
/// cokernel is the kernel on the dual bundle `E_{-k-2}`.
pub fn sphere_bundle_kernel(k: i64) -> SphereKernel {
    let kernel_basis: Vec<SphereBundleSection> = (0..=k.max(-1))
        .map(|j| {
            let mut c = vec![Complex64::new(0.0, 0.0); j as usize + 1];
            c[j as usize] = Complex64::new(1.0, 0.0);
            SphereBundleSection::new(k, c)
        })
        .collect();
    let dim_ker = 2 * kernel_basis.len();
    let dim_coker = (-2 - 2 * k).max(0) as usize;
    SphereKernel { k, kernel_basis, dim_ker, dim_coker, index: dim_ker as i64 - dim_coker as i64 }
}

/// `∂̄` on `E_k` in the weighted monomial bases
/// `z^a z̄^b (1+|z|²)^{-p}` (sections, `a ≤ k+p`, `b ≤ p`) and
/// `z^a z̄^c (1+|z|²)^{-p-1}` (`(0,1)`-forms, `a ≤ k+p+1`, `c ≤ p-1`).
/// Both families extend smoothly over `∞`, and `∂̄` maps the first into the
/// second exactly.
pub fn assemble_sphere_ek(k: i64, p: i64) -> Result<AssembledOperator> {
    if p < 1 || k + p < 0 {
        return Err(Error::Truncation(format!("weight p = {p} too small for k = {k}")));
    }
    let (amax, bmax) = (k + p, p);
    let (cam, ccm) = (k + p + 1, p - 1);
    let dom = |a: i64, b: i64| (a * (bmax + 1) + b) as usize;
    let cod = |a: i64, c: i64| (a * (ccm + 1) + c) as usize;
    let ncols = ((amax + 1) * (bmax + 1)) as usize;
    let nrows = ((cam + 1) * (ccm + 1)) as usize;
    let mut m = DMatrix::<Complex64>::zeros(nrows, ncols);
    for a in 0..=amax {
        for b in 0..=bmax {
            // ∂̄(z^a z̄^b w^{-p}) = 2 z^a z̄^{b-1} w^{-p-1} (b + (b - p)|z|²), w = 1 + |z|².
            if b >= 1 {
                m[(cod(a, b - 1), dom(a, b))] += Complex64::new(2.0 * b as f64, 0.0);
            }
            if b != p {
                m[(cod(a + 1, b), dom(a, b))] += Complex64::new(2.0 * (b - p) as f64, 0.0);
            }
        }
    }
    Ok(AssembledOperator::new(
        realify(&m),
        &format!("E_{k} sections z^a zbar^b (1+|z|^2)^-{p}"),
        &format!("E_{k} (0,1)-forms z^a zbar^c (1+|z|^2)^-{}", p + 1),
        "A = 0",
        true,
    ))
}

/// Default weight for the sphere assembly.
pub fn sphere_weight(k: i64) -> i64 {
    k.abs() + 2
}
