use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::moduli_calc::MoebiusMap;
use crate::quadrature::gauss_legendre;

/// A finite metric space with a function `g ≥ 0` on it.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMetricSample {
    pub distance: DMatrix<f64>,
    pub g: Vec<f64>,
}

/// Up to this many points every triple is checked; beyond it a fixed
/// pseudorandom set of triples.
const EXHAUSTIVE_TRIPLES: usize = 120;
const SAMPLED_TRIPLES: usize = 200_000;

impl FiniteMetricSample {
    pub fn new(distance: DMatrix<f64>, g: Vec<f64>) -> Result<Self> {
        let n = distance.nrows();
        if distance.ncols() != n || g.len() != n || n == 0 {
            return Err(Error::Dimension("distance matrix must be square and match g".into()));
        }
        if g.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Precondition("g must be finite and nonnegative".into()));
        }
        for i in 0..n {
            if distance[(i, i)] != 0.0 {
                return Err(Error::Precondition(format!("d({i},{i}) ≠ 0")));
            }
            for j in 0..i {
                if distance[(i, j)] != distance[(j, i)] || !(distance[(i, j)] >= 0.0) {
                    return Err(Error::Precondition(format!("d({i},{j}) is not symmetric and nonnegative")));
                }
            }
        }
        let violates = |i: usize, j: usize, k: usize| {
            let (a, b, c) = (distance[(i, k)], distance[(i, j)], distance[(j, k)]);
            a > (b + c) * (1.0 + 4.0 * f64::EPSILON)
        };
        if n <= EXHAUSTIVE_TRIPLES {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if violates(i, j, k) {
                            return Err(Error::Precondition(format!("triangle inequality fails for ({i},{j},{k})")));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x7e1a);
            for _ in 0..SAMPLED_TRIPLES {
                let (i, j, k) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if violates(i, j, k) {
                    return Err(Error::Precondition(format!("triangle inequality fails for ({i},{j},{k})")));
                }
            }
        }
        Ok(Self { distance, g })
    }

    /// Euclidean distances between points of `R^d`.
    pub fn from_points(points: &[Vec<f64>], g: Vec<f64>) -> Result<Self> {
        let n = points.len();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                0.0
            } else {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                points[a].iter().zip(&points[b]).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
            }
        });
        Self::new(d, g)
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HoferSelection {
    pub x: usize,
    pub eps: f64,
    /// Indices visited, starting with `x₀`.
    pub trail: Vec<usize>,
    /// Conditions (a)-(d) re-checked by brute force.
    pub conditions: [bool; 4],
}

impl HoferSelection {
    pub fn verified(&self) -> bool {
        self.conditions.iter().all(|c| *c)
    }
}

/// While some `y ∈ B̄_ε(x)` has `g(y) > 2g(x)`, move to such a `y` (the one
/// with the largest `g`, lowest index on ties) and halve `ε`.
pub fn hofer_select(s: &FiniteMetricSample, x0: usize, eps0: f64) -> Result<HoferSelection> {
    if x0 >= s.len() {
        return Err(Error::Dimension(format!("x₀ = {x0} is not a sample index")));
    }
    if !(eps0 > 0.0) {
        return Err(Error::Precondition("ε₀ must be positive".into()));
    }
    let (mut x, mut eps) = (x0, eps0);
    let mut trail = vec![x0];
    loop {
        let mut best: Option<usize> = None;
        for y in 0..s.len() {
            if s.distance[(x, y)] <= eps && s.g[y] > 2.0 * s.g[x] && best.map_or(true, |b| s.g[y] > s.g[b]) {
                best = Some(y);
            }
        }
        let Some(y) = best else { break };
        x = y;
        eps *= 0.5;
        trail.push(y);
    }
    let conditions = hofer_conditions(s, x0, eps0, x, eps);
    Ok(HoferSelection { x, eps, trail, conditions })
}

/// (a) `ε ≤ ε₀`, (b) `g(x)ε ≥ g(x₀)ε₀`, (c) `d(x, x₀) ≤ 2ε₀`,
/// (d) `g(y) ≤ 2g(x)` on `B̄_ε(x)`.
pub fn hofer_conditions(s: &FiniteMetricSample, x0: usize, eps0: f64, x: usize, eps: f64) -> [bool; 4] {
    [
        eps <= eps0,
        s.g[x] * eps >= s.g[x0] * eps0,
        s.distance[(x, x0)] <= 2.0 * eps0,
        (0..s.len()).all(|y| s.distance[(x, y)] > eps || s.g[y] <= 2.0 * s.g[x]),
    ]
}

/// `|du|` for a Möbius map into the round sphere of area `4π` in the chart `w`.
pub fn spherical_gradient(u: &MoebiusMap, z: Complex64) -> f64 {
    let w = u.apply_finite(z);
    2.0 * u.derivative(z).norm() / (1.0 + w.norm_sqr())
}

/// Uniform `n × n` sample of the square of half-width `half_width` about `centre`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleGrid {
    pub centre: Complex64,
    pub half_width: f64,
    pub n: usize,
}

impl SampleGrid {
    pub fn points(&self) -> Vec<Complex64> {
        let h = 2.0 * self.half_width / (self.n - 1) as f64;
        let mut out = Vec::with_capacity(self.n * self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.push(self.centre + Complex64::new(-self.half_width + i as f64 * h, -self.half_width + j as f64 * h));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RescaledMember {
    pub index: usize,
    pub centre: Complex64,
    pub eps: f64,
    /// `R_k = |du_k(z̃_k)|`.
    pub r: f64,
    /// `|dv_k(0)|`.
    pub normalization: f64,
    /// `sup |dv_k|` over sample points in the window.
    pub sup_gradient: f64,
    /// `sup |dv_k|` over a dense polar sampling of the window.
    pub sup_gradient_dense: f64,
    /// `∫_{B_ε(z̃)} u_k*σ`.
    pub window_energy: f64,
    pub hofer_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum BubbleReport {
    NoBubble { gradients: Vec<f64> },
    Bubble { members: Vec<RescaledMember>, total_energy: f64 },
}

/// Blow-up is declared when the gradient at the candidate increases along
/// the family and grows by at least this factor.
pub const BLOWUP_GROWTH: f64 = 10.0;

/// `∫_{B_ρ(c)} σ(u) |u'|² dA` with `σ = (ℏ/π)(1 + |w|²)⁻²`.
pub fn disk_energy(u: &MoebiusMap, centre: Complex64, rho: f64, hbar: f64) -> f64 {
    let (r, w) = gauss_legendre(48, 0.0, rho);
    let m = 96;
    let mut total = 0.0;
    for (ri, wi) in r.iter().zip(&w) {
        for k in 0..m {
            let z = centre + Complex64::from_polar(*ri, 2.0 * PI * (k as f64 + 0.5) / m as f64);
            let val = u.apply_finite(z);
            total += hbar / PI / (1.0 + val.norm_sqr()).powi(2) * u.derivative(z).norm_sqr() * ri * wi;
        }
    }
    total * 2.0 * PI / m as f64
}

/// Rescales each member about a Hofer-adjusted centre: with `g = |du_k|` on
/// the sample grid, `x₀` the sample nearest `candidate` and
/// `ε₀ = g(x₀)^{-1/2}`, Hofer's lemma gives `(z̃_k, ε_k)` and
/// `v_k(z) = u_k(z̃_k + z/R_k)` on `B_{ε_k R_k}`.
pub fn bubble_rescale(family: &[MoebiusMap], grid: &SampleGrid, candidate: Complex64, hbar: f64) -> Result<BubbleReport> {
    if family.len() < 2 {
        return Err(Error::Precondition("need at least two family members".into()));
    }
    let pts = grid.points();
    let coords: Vec<Vec<f64>> = pts.iter().map(|z| vec![z.re, z.im]).collect();
    let x0 = (0..pts.len()).min_by(|a, b| (pts[*a] - candidate).norm().total_cmp(&(pts[*b] - candidate).norm())).unwrap();
    let gradients: Vec<f64> = family.iter().map(|u| spherical_gradient(u, pts[x0])).collect();
    let increasing = gradients.windows(2).all(|w| w[1] > w[0]);
    if !increasing || gradients[gradients.len() - 1] < BLOWUP_GROWTH * gradients[0] {
        return Ok(BubbleReport::NoBubble { gradients });
    }
    let mut members = Vec::with_capacity(family.len());
    for (index, u) in family.iter().enumerate() {
        let g: Vec<f64> = pts.iter().map(|z| spherical_gradient(u, *z)).collect();
        let sample = FiniteMetricSample::from_points(&coords, g)?;
        let eps0 = sample.g[x0].powf(-0.5);
        let sel = hofer_select(&sample, x0, eps0)?;
        if !sel.verified() {
            return Err(Error::Precondition(format!("Hofer conditions fail for member {index}: {:?}", sel.conditions)));
        }
        let centre = pts[sel.x];
        let r = sample.g[sel.x];
        let v_grad = |z: Complex64| spherical_gradient(u, centre + z / r) / r;
        let normalization = v_grad(Complex64::new(0.0, 0.0));
        let sup_gradient = (0..pts.len()).filter(|y| sample.distance[(sel.x, *y)] <= sel.eps).map(|y| sample.g[y] / r).fold(0.0, f64::max);
        let window = sel.eps * r;
        let mut sup_gradient_dense: f64 = 0.0;
        for i in 0..=64 {
            for k in 0..128 {
                let z = Complex64::from_polar(window * i as f64 / 64.0, 2.0 * PI * k as f64 / 128.0);
                sup_gradient_dense = sup_gradient_dense.max(v_grad(z));
            }
        }
        members.push(RescaledMember {
            index,
            centre,
            eps: sel.eps,
            r,
            normalization,
            sup_gradient,
            sup_gradient_dense,
            window_energy: disk_energy(u, centre, sel.eps, hbar),
            hofer_steps: sel.trail.len() - 1,
        });
    }
    Ok(BubbleReport::Bubble { members, total_energy: hbar })
}
