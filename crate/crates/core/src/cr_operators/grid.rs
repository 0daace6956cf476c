use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// `Cⁿ`-valued samples on the square grid `[-R, R]²` with an odd number of
/// nodes per side, so that the origin is a node. Values vanish outside the
/// declared support radius.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunctionBall {
    pub radius: f64,
    pub nodes: usize,
    pub fiber: usize,
    pub support_radius: f64,
    /// `values[(j * nodes + i) * fiber + c]` at `x = -R + i h`, `y = -R + j h`.
    pub values: Vec<Complex64>,
}

impl GridFunctionBall {
    pub fn zeros(radius: f64, nodes: usize, fiber: usize) -> Result<Self> {
        if nodes < 5 || nodes % 2 == 0 {
            return Err(Error::Precondition("node count must be odd and at least 5".into()));
        }
        if !(radius > 0.0) || fiber == 0 {
            return Err(Error::Precondition("radius and fiber dimension must be positive".into()));
        }
        Ok(Self { radius, nodes, fiber, support_radius: radius, values: vec![Complex64::new(0.0, 0.0); nodes * nodes * fiber] })
    }

    /// Grid with mesh `h`; `2R/h` must be an even integer.
    pub fn with_mesh(radius: f64, h: f64, fiber: usize) -> Result<Self> {
        let cells = 2.0 * radius / h;
        let c = cells.round();
        if (cells - c).abs() > 1e-9 * cells || c as usize % 2 != 0 {
            return Err(Error::Precondition(format!("2R/h = {cells} is not an even integer")));
        }
        Self::zeros(radius, c as usize + 1, fiber)
    }

    /// Samples `f` at nodes with `|z| ≤ support`, zero elsewhere.
    pub fn from_fn(radius: f64, nodes: usize, fiber: usize, support: f64, f: impl Fn(Complex64) -> Vec<Complex64>) -> Result<Self> {
        let mut g = Self::zeros(radius, nodes, fiber)?;
        g.support_radius = support;
        for j in 0..nodes {
            for i in 0..nodes {
                let z = g.node(i, j);
                if z.norm() <= support {
                    let v = f(z);
                    if v.len() != fiber {
                        return Err(Error::Dimension(format!("function returned {} components, expected {fiber}", v.len())));
                    }
                    g.values[(j * nodes + i) * fiber..(j * nodes + i + 1) * fiber].copy_from_slice(&v);
                }
            }
        }
        Ok(g)
    }

    /// Scalar convenience form of [`GridFunctionBall::from_fn`].
    pub fn from_scalar(radius: f64, nodes: usize, support: f64, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::from_fn(radius, nodes, 1, support, |z| vec![f(z)])
    }

    pub fn h(&self) -> f64 {
        2.0 * self.radius / (self.nodes - 1) as f64
    }

    pub fn node(&self, i: usize, j: usize) -> Complex64 {
        let h = self.h();
        Complex64::new(-self.radius + i as f64 * h, -self.radius + j as f64 * h)
    }

    pub fn get(&self, i: usize, j: usize, c: usize) -> Complex64 {
        self.values[(j * self.nodes + i) * self.fiber + c]
    }

    pub fn set(&mut self, i: usize, j: usize, c: usize, v: Complex64) {
        self.values[(j * self.nodes + i) * self.fiber + c] = v;
    }

    pub fn center_index(&self) -> usize {
        self.nodes / 2
    }

    pub fn at_origin(&self) -> Vec<Complex64> {
        let m = self.center_index();
        (0..self.fiber).map(|c| self.get(m, m, c)).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        (0..self.nodes * self.nodes)
            .map(|p| self.values[p * self.fiber..(p + 1) * self.fiber].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn component(&self, c: usize) -> Self {
        let mut out = Self { fiber: 1, values: Vec::with_capacity(self.nodes * self.nodes), ..self.clone() };
        out.values = (0..self.nodes * self.nodes).map(|p| self.values[p * self.fiber + c]).collect();
        out
    }

    /// Bicubic (Keys, `a = -1/2`) interpolation; zero outside the grid.
    pub fn interpolate(&self, z: Complex64) -> Vec<Complex64> {
        let h = self.h();
        let (x, y) = ((z.re + self.radius) / h, (z.im + self.radius) / h);
        let (i0, j0) = (x.floor(), y.floor());
        let (wx, wy) = (keys_weights(x - i0), keys_weights(y - j0));
        let mut out = vec![Complex64::new(0.0, 0.0); self.fiber];
        for (b, wyb) in wy.iter().enumerate() {
            let j = j0 as i64 - 1 + b as i64;
            if j < 0 || j >= self.nodes as i64 {
                continue;
            }
            for (a, wxa) in wx.iter().enumerate() {
                let i = i0 as i64 - 1 + a as i64;
                if i < 0 || i >= self.nodes as i64 {
                    continue;
                }
                for (c, o) in out.iter_mut().enumerate() {
                    *o += self.get(i as usize, j as usize, c) * (wxa * wyb);
                }
            }
        }
        out
    }

    /// Rows `(x, y, Re u_0, Im u_0, …)` for export.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        let mut rows = Vec::with_capacity(self.nodes * self.nodes);
        for j in 0..self.nodes {
            for i in 0..self.nodes {
                let z = self.node(i, j);
                let mut r = vec![z.re, z.im];
                for c in 0..self.fiber {
                    let v = self.get(i, j, c);
                    r.push(v.re);
                    r.push(v.im);
                }
                rows.push(r);
            }
        }
        rows
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["x".to_string(), "y".to_string()];
        for c in 0..self.fiber {
            h.push(format!("re_{c}"));
            h.push(format!("im_{c}"));
        }
        h
    }
}

/// Keys cubic convolution weights for nodes `-1, 0, 1, 2` at offset `t ∈ [0, 1)`.
pub(crate) fn keys_weights(t: f64) -> [f64; 4] {
    fn w(x: f64) -> f64 {
        let x = x.abs();
        if x <= 1.0 {
            (1.5 * x - 2.5) * x * x + 1.0
        } else if x < 2.0 {
            ((-0.5 * x + 2.5) * x - 4.0) * x + 2.0
        } else {
            0.0
        }
    }
    [w(1.0 + t), w(t), w(1.0 - t), w(2.0 - t)]
}

/// Fourth-order central difference `∂_s ± i∂_t` at a node two steps from the edge.
fn derivative(u: &GridFunctionBall, i: usize, j: usize, c: usize, sign: f64) -> Complex64 {
    let h12 = 12.0 * u.h();
    let ds = (u.get(i - 2, j, c) - u.get(i - 1, j, c) * 8.0 + u.get(i + 1, j, c) * 8.0 - u.get(i + 2, j, c)) / h12;
    let dt = (u.get(i, j - 2, c) - u.get(i, j - 1, c) * 8.0 + u.get(i, j + 1, c) * 8.0 - u.get(i, j + 2, c)) / h12;
    ds + Complex64::new(0.0, sign) * dt
}

/// `∂̄u = ∂_s u + i∂_t u` by central differences (zero on the two outer rings).
pub fn dbar_grid(u: &GridFunctionBall) -> GridFunctionBall {
    let mut out = u.clone();
    out.support_radius = u.radius * std::f64::consts::SQRT_2;
    out.values.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
    for j in 2..u.nodes - 2 {
        for i in 2..u.nodes - 2 {
            for c in 0..u.fiber {
                out.set(i, j, c, derivative(u, i, j, c, 1.0));
            }
        }
    }
    out
}

/// `max |∂̄u - f|` over nodes with `|z| ≤ R - 2h`.
pub fn dbar_residual(u: &GridFunctionBall, f: &GridFunctionBall) -> Result<f64> {
    dbar_residual_within(u, f, u.radius - 2.0 * u.h())
}

/// `max |∂̄u - f|` over nodes with `|z| ≤ r` (clamped so the stencil stays on the grid).
pub fn dbar_residual_within(u: &GridFunctionBall, f: &GridFunctionBall, r: f64) -> Result<f64> {
    if u.nodes != f.nodes || u.fiber != f.fiber || (u.radius - f.radius).abs() > 1e-15 * u.radius {
        return Err(Error::Dimension("grids differ".into()));
    }
    let reach = r.min(u.radius - 2.0 * u.h()) * (1.0 + 1e-12);
    let mut worst: f64 = 0.0;
    for j in 2..u.nodes - 2 {
        for i in 2..u.nodes - 2 {
            if u.node(i, j).norm() > reach {
                continue;
            }
            let r: f64 = (0..u.fiber).map(|c| (derivative(u, i, j, c, 1.0) - f.get(i, j, c)).norm_sqr()).sum();
            worst = worst.max(r.sqrt());
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConjugateNorms {
    pub norm_d: f64,
    pub norm_dbar: f64,
    pub relative_gap: f64,
}

/// `(‖∂u‖_{L²}, ‖∂̄u‖_{L²})` with `∂ = ∂_s - i∂_t`, both by central
/// differences and the nodal rule. For compactly supported `u` the discrete
/// cross terms cancel by summation by parts.
pub fn conjugate_norm_identity(u: &GridFunctionBall) -> Result<ConjugateNorms> {
    let h = u.h();
    if u.support_radius > u.radius - 3.0 * h {
        return Err(Error::Precondition(format!(
            "support radius {} reaches the boundary band of the grid (R = {}, h = {h})",
            u.support_radius, u.radius
        )));
    }
    let (mut a, mut b) = (0.0, 0.0);
    for j in 2..u.nodes - 2 {
        for i in 2..u.nodes - 2 {
            for c in 0..u.fiber {
                a += derivative(u, i, j, c, -1.0).norm_sqr();
                b += derivative(u, i, j, c, 1.0).norm_sqr();
            }
        }
    }
    let (norm_d, norm_dbar) = ((a * h * h).sqrt(), (b * h * h).sqrt());
    let relative_gap = if norm_dbar == 0.0 { (norm_d - norm_dbar).abs() } else { (norm_d - norm_dbar).abs() / norm_dbar };
    Ok(ConjugateNorms { norm_d, norm_dbar, relative_gap })
}
