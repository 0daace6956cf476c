use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::Serialize;

use super::grid::{dbar_residual, keys_weights, GridFunctionBall};
use crate::error::{Error, Result};

/// The Cauchy transform `Tf(z) = ∫ f(ζ) / (2π(z - ζ)) dA(ζ)` on a fixed grid.
///
/// In polar coordinates about the target, `Tf(z) = -(1/2π) ∫∫ f(z + ρe^{iφ})
/// e^{-iφ} dρ dφ`, which has no singularity. The integrand is sampled with
/// the midpoint rule in `ρ` (step `h/2`), the trapezoid rule in `φ` (arc
/// spacing about `h/2`) and bicubic interpolation of `f`. On a uniform grid
/// the resulting weights do not depend on the target node, so the transform
/// is a discrete convolution, applied with FFTs.
pub struct CauchyTransform {
    radius: f64,
    nodes: usize,
    support_radius: f64,
    padded: usize,
    kernel_hat: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CauchyTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CauchyTransform")
            .field("radius", &self.radius)
            .field("nodes", &self.nodes)
            .field("support_radius", &self.support_radius)
            .field("padded", &self.padded)
            .finish()
    }
}

fn smooth_size(n: usize) -> usize {
    (n..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("unbounded search")
}

fn fft2(data: &mut [Complex64], p: usize, fft: &Arc<dyn Fft<f64>>) {
    for row in data.chunks_mut(p) {
        fft.process(row);
    }
    transpose(data, p);
    for row in data.chunks_mut(p) {
        fft.process(row);
    }
    transpose(data, p);
}

fn transpose(data: &mut [Complex64], p: usize) {
    for i in 0..p {
        for j in i + 1..p {
            data.swap(i * p + j, j * p + i);
        }
    }
}

impl CauchyTransform {
    /// Transform for densities supported in `|ζ| ≤ support_radius` on the
    /// grid `[-radius, radius]²` with `nodes` points per side.
    pub fn new(radius: f64, nodes: usize, support_radius: f64) -> Result<Self> {
        let grid = GridFunctionBall::zeros(radius, nodes, 1)?;
        let h = grid.h();
        let reach = support_radius + radius * SQRT_2;
        let k = (reach / h).ceil() as i64 + 3;
        let side = (2 * k + 1) as usize;
        let mut stencil = vec![Complex64::new(0.0, 0.0); side * side];
        let dr = 0.5 * h;
        let rings = (reach / dr).ceil() as usize;
        for r in 0..rings {
            let rho = (r as f64 + 0.5) * dr;
            let m = (4 * ((2.0 * PI * rho / dr / 4.0).ceil() as usize)).max(8);
            let dphi = 2.0 * PI / m as f64;
            let c0 = -dr * dphi / (2.0 * PI);
            for a in 0..m {
                let phi = a as f64 * dphi;
                let (s, c) = phi.sin_cos();
                let w = Complex64::new(c, -s) * c0;
                let (x, y) = (rho * c / h, rho * s / h);
                let (ix, iy) = (x.floor(), y.floor());
                let (wx, wy) = (keys_weights(x - ix), keys_weights(y - iy));
                for (b, wyb) in wy.iter().enumerate() {
                    let oy = iy as i64 - 1 + b as i64 + k;
                    for (a2, wxa) in wx.iter().enumerate() {
                        let ox = ix as i64 - 1 + a2 as i64 + k;
                        stencil[oy as usize * side + ox as usize] += w * (wxa * wyb);
                    }
                }
            }
        }
        let padded = smooth_size(nodes + k as usize + 1);
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(padded);
        let inverse = planner.plan_fft_inverse(padded);
        // Correlation with the stencil is convolution with its reflection.
        let mut g = vec![Complex64::new(0.0, 0.0); padded * padded];
        for oy in -k..=k {
            for ox in -k..=k {
                let v = stencil[(oy + k) as usize * side + (ox + k) as usize];
                let (qx, qy) = ((-ox).rem_euclid(padded as i64) as usize, (-oy).rem_euclid(padded as i64) as usize);
                g[qy * padded + qx] += v;
            }
        }
        fft2(&mut g, padded, &forward);
        Ok(Self { radius, nodes, support_radius, padded, kernel_hat: g, forward, inverse })
    }

    pub fn for_grid(f: &GridFunctionBall) -> Result<Self> {
        Self::new(f.radius, f.nodes, f.support_radius.min(f.radius * SQRT_2))
    }

    pub fn apply(&self, f: &GridFunctionBall) -> Result<GridFunctionBall> {
        if f.nodes != self.nodes || (f.radius - self.radius).abs() > 1e-15 * self.radius {
            return Err(Error::Dimension("grid does not match the transform".into()));
        }
        if f.support_radius > self.support_radius * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!(
                "density support {} exceeds the transform's {}",
                f.support_radius, self.support_radius
            )));
        }
        let (n, p) = (self.nodes, self.padded);
        let mut out = f.clone();
        out.support_radius = self.radius * SQRT_2;
        let scale = 1.0 / (p * p) as f64;
        let mut buf = vec![Complex64::new(0.0, 0.0); p * p];
        for c in 0..f.fiber {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for j in 0..n {
                for i in 0..n {
                    buf[j * p + i] = f.get(i, j, c);
                }
            }
            fft2(&mut buf, p, &self.forward);
            for (b, k) in buf.iter_mut().zip(&self.kernel_hat) {
                *b *= k;
            }
            fft2(&mut buf, p, &self.inverse);
            for j in 0..n {
                for i in 0..n {
                    out.set(i, j, c, buf[j * p + i] * scale);
                }
            }
        }
        Ok(out)
    }
}

pub fn cauchy_transform(f: &GridFunctionBall) -> Result<GridFunctionBall> {
    CauchyTransform::for_grid(f)?.apply(f)
}

#[derive(Debug, Clone, Serialize)]
pub struct CauchyReport {
    pub transform: GridFunctionBall,
    /// `max |∂̄Tf - f| / max |f|` on interior nodes.
    pub estimated_error: f64,
    pub coarse_warning: bool,
}

/// Transform plus an a posteriori check of `∂̄Tf = f`; the warning is raised
/// when the relative residual exceeds `tolerance`.
pub fn cauchy_transform_checked(f: &GridFunctionBall, tolerance: f64) -> Result<CauchyReport> {
    let transform = cauchy_transform(f)?;
    let scale = f.sup_norm();
    let estimated_error = if scale == 0.0 { 0.0 } else { dbar_residual(&transform, f)? / scale };
    Ok(CauchyReport { transform, estimated_error, coarse_warning: estimated_error > tolerance })
}
