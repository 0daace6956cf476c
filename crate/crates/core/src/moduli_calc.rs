//! Integer and closed-form moduli computations: curve indices, Teichmüller
//! dimensions, Möbius normalization and the modular group acting on tori.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveTopology {
    pub g: u32,
    pub m: u32,
    pub n: u32,
    pub c1a: i64,
}

/// `ind(u) = (n - 3)(2 - 2g) + 2 c₁(A) + 2m`.
pub fn curve_index(t: &CurveTopology) -> i64 {
    let (g, m, n) = (t.g as i64, t.m as i64, t.n as i64);
    (n - 3) * (2 - 2 * g) + 2 * t.c1a + 2 * m
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TeichmuellerDimension {
    pub dim_t: i64,
    /// Real dimension of the automorphism group in the unstable cases.
    pub dim_aut: i64,
}

pub fn teichmueller_dimension(g: u32, m: u32) -> TeichmuellerDimension {
    let (gi, mi) = (g as i64, m as i64);
    if 2 * gi + mi >= 3 {
        TeichmuellerDimension { dim_t: 6 * gi - 6 + 2 * mi, dim_aut: 0 }
    } else if g == 1 && m == 0 {
        TeichmuellerDimension { dim_t: 2, dim_aut: 2 }
    } else {
        TeichmuellerDimension { dim_t: 0, dim_aut: 6 - 2 * mi }
    }
}

/// A point of the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SpherePoint {
    Finite(Complex64),
    Infinity,
}

impl SpherePoint {
    pub fn finite(re: f64, im: f64) -> Self {
        SpherePoint::Finite(Complex64::new(re, im))
    }

    fn homogeneous(self) -> (Complex64, Complex64) {
        match self {
            SpherePoint::Finite(z) => (z, Complex64::new(1.0, 0.0)),
            SpherePoint::Infinity => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }

    fn from_homogeneous(x: Complex64, y: Complex64) -> Self {
        if y.norm() <= 1e-300 || (x.norm() > 0.0 && y.norm() / x.norm() < 1e-14) {
            SpherePoint::Infinity
        } else {
            SpherePoint::Finite(x / y)
        }
    }

    /// Chordal distance, used for comparisons that include infinity.
    pub fn chordal_distance(self, other: SpherePoint) -> f64 {
        let (x1, y1) = self.homogeneous();
        let (x2, y2) = other.homogeneous();
        let num = (x1 * y2 - x2 * y1).norm();
        let den = (x1.norm_sqr() + y1.norm_sqr()).sqrt() * (x2.norm_sqr() + y2.norm_sqr()).sqrt();
        num / den
    }
}

/// `z ↦ (az + b)/(cz + d)` with `ad - bc = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoebiusMap {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub d: Complex64,
}

impl MoebiusMap {
    pub fn identity() -> Self {
        let (o, z) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        Self { a: o, b: z, c: z, d: o }
    }

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Result<Self> {
        let det = a * d - b * c;
        if det.norm() == 0.0 {
            return Err(Error::Degenerate("Möbius determinant vanishes".into()));
        }
        let s = det.sqrt();
        Ok(Self { a: a / s, b: b / s, c: c / s, d: d / s })
    }

    pub fn determinant(&self) -> Complex64 {
        self.a * self.d - self.b * self.c
    }

    pub fn apply(&self, p: SpherePoint) -> SpherePoint {
        let (x, y) = p.homogeneous();
        SpherePoint::from_homogeneous(self.a * x + self.b * y, self.c * x + self.d * y)
    }

    pub fn apply_finite(&self, z: Complex64) -> Complex64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// Complex derivative at a finite point.
    pub fn derivative(&self, z: Complex64) -> Complex64 {
        let q = self.c * z + self.d;
        Complex64::new(1.0, 0.0) / (q * q)
    }

    pub fn compose(&self, other: &MoebiusMap) -> MoebiusMap {
        MoebiusMap {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    pub fn inverse(&self) -> MoebiusMap {
        MoebiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }
}

/// The unique Möbius map sending `(z₁, z₂, z₃)` to `(0, 1, ∞)`, built from
/// the cross ratio in homogeneous coordinates.
pub fn moebius_normalize(z1: SpherePoint, z2: SpherePoint, z3: SpherePoint) -> Result<MoebiusMap> {
    let pts = [z1, z2, z3];
    for i in 0..3 {
        for j in i + 1..3 {
            if pts[i].chordal_distance(pts[j]) < 1e-14 {
                return Err(Error::Precondition(format!("points {i} and {j} coincide")));
            }
        }
    }
    let (x1, y1) = z1.homogeneous();
    let (x2, y2) = z2.homogeneous();
    let (x3, y3) = z3.homogeneous();
    // Row r1 annihilates z1, row r2 annihilates z3; scales make z2 ↦ 1.
    let alpha = y3 * x2 - x3 * y2;
    let beta = y1 * x2 - x1 * y2;
    MoebiusMap::new(alpha * y1, -alpha * x1, beta * y3, -beta * x3)
}

/// Integer matrix `[[a, b], [c, d]]` of determinant one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sl2Z {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl Sl2Z {
    pub const IDENTITY: Sl2Z = Sl2Z { a: 1, b: 0, c: 0, d: 1 };

    pub fn mul(&self, o: &Sl2Z) -> Sl2Z {
        Sl2Z {
            a: self.a * o.a + self.b * o.c,
            b: self.a * o.b + self.b * o.d,
            c: self.c * o.a + self.d * o.c,
            d: self.c * o.b + self.d * o.d,
        }
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    /// Modular action `λ ↦ (aλ + b)/(cλ + d)`.
    pub fn act(&self, lambda: Complex64) -> Complex64 {
        (lambda * self.a as f64 + self.b as f64) / (lambda * self.c as f64 + self.d as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusReduction {
    pub reduced: Complex64,
    pub witness: Sl2Z,
    pub steps: usize,
    pub converged: bool,
}

const BOUNDARY_TOL: f64 = 1e-12;

pub fn in_fundamental_domain(l: Complex64) -> bool {
    let r = l.norm();
    l.im > 0.0
        && l.re > -0.5 + BOUNDARY_TOL
        && l.re <= 0.5 + BOUNDARY_TOL
        && r >= 1.0 - BOUNDARY_TOL
        && !((r - 1.0).abs() <= BOUNDARY_TOL && l.re < -BOUNDARY_TOL)
}

/// Gauss reduction into `-½ < Re λ ≤ ½`, `|λ| ≥ 1` (with `Re λ ≥ 0` on the arc).
pub fn torus_modulus_reduce(lambda: Complex64) -> Result<ModulusReduction> {
    if lambda.im <= 0.0 {
        return Err(Error::Precondition("Im λ must be positive".into()));
    }
    let mut l = lambda;
    let mut w = Sl2Z::IDENTITY;
    let cap = 10_000;
    let mut steps = 0;
    while steps < cap {
        let mut k = -(l.re + 0.5).floor() as i64;
        if l.re + (k as f64) <= -0.5 + BOUNDARY_TOL {
            k += 1;
        }
        if k != 0 {
            let t = Sl2Z { a: 1, b: k, c: 0, d: 1 };
            l = t.act(l);
            w = t.mul(&w);
            steps += 1;
            continue;
        }
        let r = l.norm();
        if r < 1.0 - BOUNDARY_TOL || ((r - 1.0).abs() <= BOUNDARY_TOL && l.re < -BOUNDARY_TOL) {
            let s = Sl2Z { a: 0, b: -1, c: 1, d: 0 };
            l = s.act(l);
            w = s.mul(&w);
            steps += 1;
            continue;
        }
        return Ok(ModulusReduction { reduced: l, witness: w, steps, converged: true });
    }
    Ok(ModulusReduction { reduced: l, witness: w, steps, converged: false })
}

/// Order of the stabilizer of `λ` in `SL(2, Z)`, by brute force over
/// matrices with entries bounded by `bound`.
pub fn torus_isotropy_order_with_bound(lambda: Complex64, bound: i64) -> usize {
    let mut count = 0;
    for a in -bound..=bound {
        for b in -bound..=bound {
            for c in -bound..=bound {
                for d in -bound..=bound {
                    let m = Sl2Z { a, b, c, d };
                    if m.det() == 1 && (m.act(lambda) - lambda).norm() < 1e-9 {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}

pub fn torus_isotropy_order(lambda: Complex64) -> Result<usize> {
    if !in_fundamental_domain(lambda) {
        return Err(Error::Precondition("λ is not in the fundamental domain".into()));
    }
    Ok(torus_isotropy_order_with_bound(lambda, 3))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_parity() {
        for g in 0..=5 {
            for m in 0..=5 {
                for n in 1..=4 {
                    for c1a in -10..=10 {
                        assert_eq!(curve_index(&CurveTopology { g, m, n, c1a }) % 2, 0);
                    }
                }
            }
        }
    }

    #[test]
    fn reduction_of_i_is_trivial() {
        let r = torus_modulus_reduce(Complex64::new(0.0, 1.0)).unwrap();
        assert_eq!(r.witness, Sl2Z::IDENTITY);
        assert_eq!(r.steps, 0);
    }
}
