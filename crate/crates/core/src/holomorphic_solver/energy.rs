use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::sphere_map::{LocalState, SphereCurve};
use super::target::{ProductForm, TargetAlmostComplexField};
use crate::error::Result;
use crate::quadrature::gauss_legendre;

/// How the two domain charts share the sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Partition {
    /// Chart 1 on `|z| ≤ 1`, chart 2 on `|z| ≥ 1`.
    Hemispheres,
    /// `χ(|x|)` in each chart with `χ(r) + χ(1/r) = 1`, switching smoothly
    /// for `|log r| ≤ width`.
    LogSymmetric { width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyOptions {
    pub partition: Partition,
    pub radial: usize,
    pub angular: usize,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self { partition: Partition::Hemispheres, radial: 48, angular: 64 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TamingWarning {
    pub chart: u8,
    pub x: Complex64,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub energy: f64,
    /// Smallest pointwise density of `u*Ω`; nonnegative for holomorphic curves of a tamed `J`.
    pub min_density: f64,
    pub taming_warnings: Vec<TamingWarning>,
    pub nodes: usize,
}

/// `u*Ω (∂_s, ∂_t)` in the chart coordinate.
pub fn energy_density(state: &LocalState, form: &ProductForm) -> f64 {
    let sphere = state.uz[0].norm_sqr() - state.uzb[0].norm_sqr();
    let torus = state.uz[1].norm_sqr() - state.uzb[1].norm_sqr();
    form.sigma(state.point.w) * sphere + torus
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Radial nodes and weights (including the factor `r` and the cutoff).
fn radial_rule(partition: Partition, n: usize) -> Vec<(f64, f64)> {
    match partition {
        Partition::Hemispheres => {
            let (x, w) = gauss_legendre(n, 0.0, 1.0);
            x.into_iter().zip(w).map(|(r, w)| (r, w * r)).collect()
        }
        Partition::LogSymmetric { width } => {
            let r0 = (-width).exp();
            let (xa, wa) = gauss_legendre(n, 0.0, r0);
            let mut out: Vec<(f64, f64)> = xa.into_iter().zip(wa).map(|(r, w)| (r, w * r)).collect();
            // The cutoff is smooth in s = log r; integrate r² ds there.
            let (xs, ws) = gauss_legendre(2 * n, -width, width);
            for (s, w) in xs.into_iter().zip(ws) {
                let r = s.exp();
                let chi = smooth_step((width - s) / (2.0 * width));
                out.push((r, w * r * r * chi));
            }
            out
        }
    }
}

/// `E(u) = ∫ u*Ω` over both domain charts, with a pointwise taming check
/// of `form` against `j` when given.
pub fn energy(curve: &dyn SphereCurve, form: &ProductForm, j: Option<&dyn TargetAlmostComplexField>, opts: &EnergyOptions) -> Result<EnergyReport> {
    let radial = radial_rule(opts.partition, opts.radial);
    let dtheta = 2.0 * PI / opts.angular as f64;
    let mut total = 0.0;
    let mut min_density = f64::INFINITY;
    let mut taming_warnings = Vec::new();
    let mut nodes = 0;
    for chart in [1u8, 2] {
        for &(r, wr) in &radial {
            for k in 0..opts.angular {
                let x = Complex64::from_polar(r, (k as f64 + 0.5) * dtheta);
                let s = curve.state(chart, x)?;
                let d = energy_density(&s, form);
                total += d * wr * dtheta;
                min_density = min_density.min(d);
                nodes += 1;
                if let Some(j) = j {
                    let (ok, min_eigenvalue) = form.tames(&j.j(&s.point)?, &s.point)?;
                    if !ok {
                        taming_warnings.push(TamingWarning { chart, x, min_eigenvalue });
                    }
                }
            }
        }
    }
    Ok(EnergyReport { energy: total, min_density, taming_warnings, nodes })
}
