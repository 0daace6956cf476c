use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::grid::GridFunctionBall;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CensusZero {
    pub location: [f64; 2],
    pub index: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusResult {
    pub zeros: Vec<CensusZero>,
    pub total_index: i64,
    pub boundary_winding: i64,
    /// False when `|u|` is not bounded below on the test circle or a cell
    /// boundary could not be placed away from a zero.
    pub conclusive: bool,
    pub min_boundary_modulus: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct CensusOptions {
    /// Cells smaller than this fraction of `r` are reported as zeros.
    pub resolution: f64,
    pub circle_samples: usize,
    /// The test is inconclusive when `|u|` on the circle drops below this
    /// fraction of its maximum there.
    pub floor: f64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self { resolution: 1e-6, circle_samples: 512, floor: 1e-9 }
    }
}

struct Winder<'a> {
    f: &'a dyn Fn(Complex64) -> Complex64,
    floor: f64,
}

impl Winder<'_> {
    fn value(&self, z: Complex64) -> Option<Complex64> {
        let v = (self.f)(z);
        (v.norm() > self.floor).then_some(v)
    }

    /// Continuous change of `arg f` along the segment, refined until each
    /// piece turns by less than 0.5 rad.
    fn segment(&self, a: Complex64, b: Complex64, fa: Complex64, fb: Complex64, depth: u32) -> Option<f64> {
        let d = (fb / fa).arg();
        if d.abs() < 0.5 || depth == 0 {
            return Some(d);
        }
        let m = 0.5 * (a + b);
        let fm = self.value(m)?;
        Some(self.segment(a, m, fa, fm, depth - 1)? + self.segment(m, b, fm, fb, depth - 1)?)
    }

    fn polygon(&self, pts: &[Complex64]) -> Option<i64> {
        let vals: Vec<Complex64> = pts.iter().map(|z| self.value(*z)).collect::<Option<_>>()?;
        let mut total = 0.0;
        for i in 0..pts.len() {
            let j = (i + 1) % pts.len();
            total += self.segment(pts[i], pts[j], vals[i], vals[j], 30)?;
        }
        Some((total / (2.0 * PI)).round() as i64)
    }

    fn rect(&self, x0: f64, y0: f64, w: f64, h: f64) -> Option<i64> {
        let per_side = 8;
        let mut pts = Vec::with_capacity(4 * per_side);
        let corners = [Complex64::new(x0, y0), Complex64::new(x0 + w, y0), Complex64::new(x0 + w, y0 + h), Complex64::new(x0, y0 + h)];
        for s in 0..4 {
            let (a, b) = (corners[s], corners[(s + 1) % 4]);
            for k in 0..per_side {
                pts.push(a + (b - a) * (k as f64 / per_side as f64));
            }
        }
        self.polygon(&pts)
    }
}

const SPLITS: [f64; 4] = [0.5123, 0.4871, 0.5371, 0.4627];

/// Locates the zeros of a scalar function in the disk `|z - c| < r` by
/// winding-number subdivision and compares their total index with the
/// winding number of `f` around the circle.
pub fn zero_census(f: &dyn Fn(Complex64) -> Complex64, center: Complex64, r: f64, opts: &CensusOptions) -> Result<CensusResult> {
    if !(r > 0.0) {
        return Err(Error::Precondition("radius must be positive".into()));
    }
    let circle: Vec<Complex64> = (0..opts.circle_samples)
        .map(|k| center + Complex64::from_polar(r, 2.0 * PI * k as f64 / opts.circle_samples as f64))
        .collect();
    let moduli: Vec<f64> = circle.iter().map(|z| f(*z).norm()).collect();
    let scale = moduli.iter().copied().fold(0.0, f64::max);
    let min_boundary_modulus = moduli.iter().copied().fold(f64::INFINITY, f64::min);
    // Cell edges only need to avoid exact zeros; values this small are roundoff.
    let winder = Winder { f, floor: 1e-13 * scale };
    let inconclusive = CensusResult { zeros: vec![], total_index: 0, boundary_winding: 0, conclusive: false, min_boundary_modulus };
    if scale == 0.0 {
        return Ok(inconclusive);
    }
    let Some(boundary_winding) = winder.polygon(&circle) else {
        return Ok(inconclusive);
    };
    if min_boundary_modulus <= opts.floor * scale {
        return Ok(CensusResult { boundary_winding, ..inconclusive });
    }
    let min_cell = opts.resolution * r;
    // Root square slightly larger than the disk so its edges avoid zeros on the circle.
    let half = r * 1.0137;
    let mut stack = vec![(center.re - half, center.im - half, 2.0 * half, 2.0 * half)];
    let Some(root_w) = winder.rect(stack[0].0, stack[0].1, stack[0].2, stack[0].3) else {
        return Ok(CensusResult { boundary_winding, ..inconclusive });
    };
    let mut windings = vec![root_w];
    let mut zeros = Vec::new();
    let mut conclusive = true;
    while let Some((x0, y0, w, h)) = stack.pop() {
        let wn = windings.pop().expect("paired stacks");
        if wn == 0 {
            continue;
        }
        // Skip cells entirely outside the disk.
        let nearest = Complex64::new(center.re.clamp(x0, x0 + w), center.im.clamp(y0, y0 + h));
        if (nearest - center).norm() > r {
            continue;
        }
        if w.max(h) < min_cell {
            let z = Complex64::new(x0 + 0.5 * w, y0 + 0.5 * h);
            if (z - center).norm() < r {
                zeros.push(CensusZero { location: [z.re, z.im], index: wn });
            }
            continue;
        }
        let mut placed = false;
        for s in SPLITS {
            let (w1, h1) = (w * s, h * s);
            let cells = [(x0, y0, w1, h1), (x0 + w1, y0, w - w1, h1), (x0, y0 + h1, w1, h - h1), (x0 + w1, y0 + h1, w - w1, h - h1)];
            let ws: Option<Vec<i64>> = cells.iter().map(|c| winder.rect(c.0, c.1, c.2, c.3)).collect();
            if let Some(ws) = ws {
                stack.extend(cells);
                windings.extend(ws);
                placed = true;
                break;
            }
        }
        if !placed {
            conclusive = false;
        }
    }
    let total_index = zeros.iter().map(|z| z.index).sum();
    Ok(CensusResult { zeros, total_index, boundary_winding, conclusive: conclusive && min_boundary_modulus > opts.floor * scale, min_boundary_modulus })
}

/// Census of one component of a grid function, using bicubic interpolation.
pub fn zero_census_grid(u: &GridFunctionBall, component: usize, r: f64, opts: &CensusOptions) -> Result<CensusResult> {
    if component >= u.fiber {
        return Err(Error::Dimension(format!("component {component} out of range")));
    }
    if r > u.radius - 2.0 * u.h() {
        return Err(Error::Precondition("test circle leaves the grid".into()));
    }
    let f = |z: Complex64| u.interpolate(z)[component];
    zero_census(&f, Complex64::new(0.0, 0.0), r, opts)
}
