use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

type C = Complex64;

/// A polynomial map `u: C → C^n` restricted to the disk `|z| ≤ domain_radius`,
/// with a point `origin_preimage` where `u = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalyticCurve {
    /// Ascending coefficients of each component.
    pub components: Vec<Vec<C>>,
    pub domain_radius: f64,
    pub origin_preimage: C,
}

fn horner(c: &[C], z: C) -> (C, C) {
    let (mut v, mut d) = (C::new(0.0, 0.0), C::new(0.0, 0.0));
    for a in c.iter().rev() {
        d = d * z + v;
        v = v * z + a;
    }
    (v, d)
}

impl AnalyticCurve {
    pub fn new(components: Vec<Vec<C>>, domain_radius: f64, origin_preimage: C) -> Result<Self> {
        if components.is_empty() || components.iter().any(|c| c.is_empty()) {
            return Err(Error::Dimension("curve needs nonempty components".into()));
        }
        let curve = Self { components, domain_radius, origin_preimage };
        let at = curve.norm_sqr(origin_preimage).sqrt();
        if at > 1e-12 {
            return Err(Error::Precondition(format!("u(z₀) has modulus {at:.2e}, not 0")));
        }
        Ok(curve)
    }

    pub fn eval(&self, z: C) -> Vec<C> {
        self.components.iter().map(|c| horner(c, z).0).collect()
    }

    pub fn derivative(&self, z: C) -> Vec<C> {
        self.components.iter().map(|c| horner(c, z).1).collect()
    }

    pub fn norm_sqr(&self, z: C) -> f64 {
        self.eval(z).iter().map(|v| v.norm_sqr()).sum()
    }

    /// `u*ω₀ / dA = Σ |u_k'|²`.
    pub fn density(&self, z: C) -> f64 {
        self.derivative(z).iter().map(|v| v.norm_sqr()).sum()
    }

    /// `|u|` and its real gradient.
    fn level(&self, z: C) -> (f64, [f64; 2]) {
        let (mut g, mut s) = (0.0, C::new(0.0, 0.0));
        for c in &self.components {
            let (v, d) = horner(c, z);
            g += v.norm_sqr();
            s += v.conj() * d;
        }
        let n = g.sqrt();
        if n == 0.0 {
            return (0.0, [0.0, 0.0]);
        }
        (n, [s.re / n, -s.im / n])
    }

    /// Fails unless `|u| > r` on the boundary circle.
    pub fn check_proper(&self, r: f64, samples: usize) -> Result<()> {
        for k in 0..samples {
            let z = C::from_polar(self.domain_radius, 2.0 * PI * k as f64 / samples as f64);
            if self.norm_sqr(z) <= r * r {
                return Err(Error::Precondition(format!("|u| ≤ {r} at boundary point {z}: u is not proper into B_{r}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityProfile {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    /// Grid cells across the domain diameter and refinement depth at the boundary.
    pub resolution: (usize, usize),
    pub nondecreasing: bool,
    pub min_f: f64,
}

/// Slack for "nondecreasing" between adjacent radii.
pub const MONOTONE_SLACK: f64 = 1e-4;

/// Area of `{x : n·x + d ≤ 0}` inside the square of side `s` centred at 0.
fn clipped_square_area(n: [f64; 2], d: f64, s: f64) -> f64 {
    let h = 0.5 * s;
    let square = [[-h, -h], [h, -h], [h, h], [-h, h]];
    let f = |p: [f64; 2]| n[0] * p[0] + n[1] * p[1] + d;
    let mut poly: Vec<[f64; 2]> = Vec::with_capacity(5);
    for i in 0..4 {
        let (a, b) = (square[i], square[(i + 1) % 4]);
        let (fa, fb) = (f(a), f(b));
        if fa <= 0.0 {
            poly.push(a);
        }
        if (fa <= 0.0) != (fb <= 0.0) {
            let t = fa / (fa - fb);
            poly.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        }
    }
    let mut area = 0.0;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        area += a[0] * b[1] - a[1] * b[0];
    }
    0.5 * area.abs()
}

fn cell_integral(u: &AnalyticCurve, centre: C, size: f64, r: f64, depth: usize) -> f64 {
    let r2 = r * r;
    let h = 0.5 * size;
    let corners = [C::new(-h, -h), C::new(h, -h), C::new(h, h), C::new(-h, h)];
    let inside = corners.iter().filter(|c| u.norm_sqr(centre + **c) <= r2).count();
    let in_disk = corners.iter().all(|c| (centre + c).norm() <= u.domain_radius);
    if inside == 4 && in_disk {
        // 2×2 Gauss rule.
        let g = h / 3f64.sqrt();
        let pts = [C::new(-g, -g), C::new(g, -g), C::new(g, g), C::new(-g, g)];
        return pts.iter().map(|p| u.density(centre + p)).sum::<f64>() * size * size / 4.0;
    }
    let (gc, grad) = u.level(centre);
    if inside == 0 {
        // Skip only if the level set cannot reach the cell.
        let gn = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
        if gc - r > gn * size {
            return 0.0;
        }
    }
    if depth == 0 {
        let gn = (grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
        let area = if gn == 0.0 {
            if gc <= r {
                size * size
            } else {
                0.0
            }
        } else {
            clipped_square_area([grad[0] / gn, grad[1] / gn], (gc - r) / gn, size)
        };
        return u.density(centre) * area;
    }
    let q = 0.25 * size;
    [C::new(-q, -q), C::new(q, -q), C::new(q, q), C::new(-q, q)].iter().map(|o| cell_integral(u, centre + o, 0.5 * size, r, depth - 1)).sum()
}

/// Leaf cells near the level set are at most this fraction of `r` wide.
const LEAF_OVER_RADIUS: f64 = 2e-3;

/// `∫_{u⁻¹(B̄_r)} u*ω₀` on a uniform grid over the domain disk, with
/// boundary cells refined `depth` times and the last level cut by the
/// linearised level set. The depth is raised for small `r`, where the
/// clipping error is a fixed area and would otherwise dominate `F(r)`.
pub fn sublevel_area(u: &AnalyticCurve, r: f64, cells: usize, depth: usize) -> f64 {
    let s = 2.0 * u.domain_radius / cells as f64;
    let needed = (s / (r * LEAF_OVER_RADIUS)).log2().ceil().clamp(0.0, 24.0) as usize;
    let depth = depth.max(needed);
    let mut total = 0.0;
    for i in 0..cells {
        for j in 0..cells {
            let centre = C::new(-u.domain_radius + (i as f64 + 0.5) * s, -u.domain_radius + (j as f64 + 0.5) * s);
            total += cell_integral(u, centre, s, r, depth);
        }
    }
    total
}

/// `F(r) = r⁻² ∫_{Σ_r} u*ω₀` on a grid of radii.
pub fn monotonicity_profile(u: &AnalyticCurve, radii: &[f64], resolution: (usize, usize)) -> Result<MonotonicityProfile> {
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    u.check_proper(r_max, 720)?;
    let f: Vec<f64> = radii.iter().map(|&r| sublevel_area(u, r, resolution.0, resolution.1) / (r * r)).collect();
    if f.iter().any(|v| !v.is_finite() || *v <= 0.0) {
        return Err(Error::Precondition("F(r) is not finite and positive".into()));
    }
    let nondecreasing = f.windows(2).all(|w| w[1] >= w[0] - MONOTONE_SLACK);
    let min_f = f.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(MonotonicityProfile { r: radii.to_vec(), f, resolution, nondecreasing, min_f })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxCrosscheck {
    pub r: f64,
    /// `r⁻² ∮_{∂Σ_r} u*λ₀`, `λ₀ = ½ Σ (p dq - q dp)`.
    pub flux: f64,
    pub area: f64,
    pub difference: f64,
    /// False when a ray from the origin preimage crosses `|u| = r` more
    /// than once, so the radial trace does not describe `∂Σ_r`.
    pub conclusive: bool,
}

/// Traces `∂Σ_r` along rays from `origin_preimage` and integrates `u*λ₀`
/// with the trapezoid rule in the angle.
pub fn boundary_flux_crosscheck(u: &AnalyticCurve, r: f64, resolution: (usize, usize)) -> Result<FluxCrosscheck> {
    u.check_proper(r, 720)?;
    let r2 = r * r;
    let z0 = u.origin_preimage;
    let angles = 512;
    let march = 2048;
    let mut flux = 0.0;
    let mut conclusive = true;
    for k in 0..angles {
        let th = 2.0 * PI * k as f64 / angles as f64;
        let e = C::from_polar(1.0, th);
        let reach = u.domain_radius + z0.norm();
        let dr = reach / march as f64;
        let mut crossings = 0;
        let mut root = None;
        let mut prev_inside = true;
        for m in 1..=march {
            let z = z0 + e * (m as f64 * dr);
            if z.norm() > u.domain_radius {
                break;
            }
            let inside = u.norm_sqr(z) <= r2;
            if inside != prev_inside {
                crossings += 1;
                if root.is_none() {
                    let (mut lo, mut hi) = ((m - 1) as f64 * dr, m as f64 * dr);
                    for _ in 0..100 {
                        let mid = 0.5 * (lo + hi);
                        if u.norm_sqr(z0 + e * mid) <= r2 {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    root = Some(0.5 * (lo + hi));
                }
            }
            prev_inside = inside;
        }
        let Some(rho) = root else {
            return Err(Error::Precondition(format!("ray at angle {th} never leaves Σ_{r}")));
        };
        if crossings != 1 {
            conclusive = false;
        }
        let z = z0 + e * rho;
        let (_, grad) = u.level(z);
        // Only the direction of the gradient matters below.
        let dot = |v: C| grad[0] * v.re + grad[1] * v.im;
        let g_rho = dot(e);
        let g_th = dot(C::new(0.0, 1.0) * e * rho);
        let drho = -g_th / g_rho;
        let dz = e * drho + C::new(0.0, 1.0) * e * rho;
        let vals = u.eval(z);
        let ders = u.derivative(z);
        let lam: f64 = vals.iter().zip(&ders).map(|(v, d)| 0.5 * (v.conj() * d * dz).im).sum();
        flux += lam * 2.0 * PI / angles as f64;
    }
    let flux = flux / r2;
    let area = sublevel_area(u, r, resolution.0, resolution.1) / r2;
    Ok(FluxCrosscheck { r, flux, area, difference: (flux - area).abs(), conclusive })
}
