use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use super::rank::AssembledOperator;
use crate::error::{Error, Result};

/// Truncated double Fourier series on `T² = R²/Z²` with values in `Cⁿ`:
/// `u(s, t) = Σ c_{k,l} e^{2πi(ks + lt)}`, `|k|, |l| ≤ N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TorusSpectralFunction {
    pub truncation: usize,
    pub fiber: usize,
    /// `coefficients[mode_index(k, l) * fiber + c]`.
    pub coefficients: Vec<Complex64>,
    pub real_valued: bool,
}

impl TorusSpectralFunction {
    pub fn zeros(truncation: usize, fiber: usize) -> Self {
        let m = (2 * truncation + 1).pow(2);
        Self { truncation, fiber, coefficients: vec![Complex64::new(0.0, 0.0); m * fiber], real_valued: false }
    }

    pub fn new(truncation: usize, fiber: usize, coefficients: Vec<Complex64>, real_valued: bool) -> Result<Self> {
        let f = Self { truncation, fiber, coefficients, real_valued };
        if f.coefficients.len() != (2 * truncation + 1).pow(2) * fiber {
            return Err(Error::Dimension(format!("expected {} coefficients", (2 * truncation + 1).pow(2) * fiber)));
        }
        if real_valued {
            let scale = f.coefficients.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1.0);
            let n = truncation as i64;
            for k in -n..=n {
                for l in -n..=n {
                    for c in 0..fiber {
                        if (f.coeff(k, l, c) - f.coeff(-k, -l, c).conj()).norm() > 1e-12 * scale {
                            return Err(Error::Precondition("real-valued flag needs c_{-k,-l} = conj c_{k,l}".into()));
                        }
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn mode_index(&self, k: i64, l: i64) -> usize {
        mode_index(self.truncation, k, l)
    }

    pub fn coeff(&self, k: i64, l: i64, c: usize) -> Complex64 {
        self.coefficients[self.mode_index(k, l) * self.fiber + c]
    }

    /// Coefficients from the interleaved real vector used by assembled operators.
    pub fn from_real_vector(truncation: usize, fiber: usize, v: &DVector<f64>) -> Result<Self> {
        let len = (2 * truncation + 1).pow(2) * fiber;
        if v.len() != 2 * len {
            return Err(Error::Dimension(format!("expected real vector of length {}", 2 * len)));
        }
        let coefficients = (0..len).map(|i| Complex64::new(v[2 * i], v[2 * i + 1])).collect();
        Ok(Self { truncation, fiber, coefficients, real_valued: false })
    }

    pub fn eval(&self, s: f64, t: f64) -> Vec<Complex64> {
        let n = self.truncation as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.fiber];
        for k in -n..=n {
            for l in -n..=n {
                let e = Complex64::from_polar(1.0, 2.0 * PI * (k as f64 * s + l as f64 * t));
                for (c, o) in out.iter_mut().enumerate() {
                    *o += self.coeff(k, l, c) * e;
                }
            }
        }
        out
    }
}

pub(crate) fn mode_index(n: usize, k: i64, l: i64) -> usize {
    let w = 2 * n as i64 + 1;
    ((k + n as i64) * w + (l + n as i64)) as usize
}

/// One Fourier term `e^{2πi(ks + lt)} (P u + Q ū)` of a zeroth-order term.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialTerm {
    pub k: i64,
    pub l: i64,
    pub p: DMatrix<Complex64>,
    pub q: DMatrix<Complex64>,
}

/// A zeroth-order term with trigonometric-polynomial coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPotential {
    pub fiber: usize,
    pub terms: Vec<PotentialTerm>,
}

impl TorusPotential {
    pub fn zero(fiber: usize) -> Self {
        Self { fiber, terms: Vec::new() }
    }

    /// `A u = a ū` for a constant `a`.
    pub fn conjugation(a: Complex64) -> Self {
        let z = DMatrix::zeros(1, 1);
        Self { fiber: 1, terms: vec![PotentialTerm { k: 0, l: 0, p: z, q: DMatrix::from_element(1, 1, a) }] }
    }

    pub fn with_term(mut self, k: i64, l: i64, p: DMatrix<Complex64>, q: DMatrix<Complex64>) -> Result<Self> {
        if p.shape() != (self.fiber, self.fiber) || q.shape() != (self.fiber, self.fiber) {
            return Err(Error::Dimension("potential blocks must be n×n".into()));
        }
        self.terms.push(PotentialTerm { k, l, p, q });
        Ok(self)
    }

    pub fn bandwidth(&self) -> i64 {
        self.terms.iter().map(|t| t.k.abs().max(t.l.abs())).max().unwrap_or(0)
    }

    pub fn descriptor(&self) -> String {
        if self.terms.is_empty() {
            return "A = 0".into();
        }
        let parts: Vec<String> = self.terms.iter().map(|t| format!("e(({},{}))[P={} Q={}]", t.k, t.l, fmt_block(&t.p), fmt_block(&t.q))).collect();
        format!("A = {}", parts.join(" + "))
    }
}

fn fmt_block(m: &DMatrix<Complex64>) -> String {
    let v: Vec<String> = m.iter().map(|z| format!("{}{:+}i", z.re, z.im)).collect();
    format!("[{}]", v.join(","))
}

/// Real matrix of `∂̄ + A` on the truncated Fourier space. Unknown and
/// equation ordering: mode, then fiber component, then `(Re, Im)`.
pub fn assemble_torus_dbar(truncation: usize, fiber: usize, potential: &TorusPotential) -> Result<AssembledOperator> {
    if fiber == 0 || potential.fiber != fiber {
        return Err(Error::Dimension("potential fiber dimension does not match".into()));
    }
    let n = truncation as i64;
    if 2 * potential.bandwidth() > n {
        return Err(Error::Truncation(format!("potential bandwidth {} exceeds N/2 = {}", potential.bandwidth(), n as f64 / 2.0)));
    }
    let modes = (2 * truncation + 1).pow(2);
    let dim = 2 * modes * fiber;
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    let idx = |k: i64, l: i64, c: usize| 2 * (mode_index(truncation, k, l) * fiber + c);
    // z ↦ w z and z ↦ w z̄ as real 2×2 blocks.
    let add_linear = |m: &mut DMatrix<f64>, r: usize, c: usize, w: Complex64| {
        m[(r, c)] += w.re;
        m[(r, c + 1)] -= w.im;
        m[(r + 1, c)] += w.im;
        m[(r + 1, c + 1)] += w.re;
    };
    let add_antilinear = |m: &mut DMatrix<f64>, r: usize, c: usize, w: Complex64| {
        m[(r, c)] += w.re;
        m[(r, c + 1)] += w.im;
        m[(r + 1, c)] += w.im;
        m[(r + 1, c + 1)] -= w.re;
    };
    for k in -n..=n {
        for l in -n..=n {
            let symbol = Complex64::new(0.0, 2.0 * PI) * Complex64::new(k as f64, l as f64);
            for c in 0..fiber {
                add_linear(&mut m, idx(k, l, c), idx(k, l, c), symbol);
            }
            for term in &potential.terms {
                // P c_{k,l} lands on mode (k + k', l + l').
                let (kp, lp) = (k + term.k, l + term.l);
                if kp.abs() <= n && lp.abs() <= n {
                    for r in 0..fiber {
                        for c in 0..fiber {
                            add_linear(&mut m, idx(kp, lp, r), idx(k, l, c), term.p[(r, c)]);
                        }
                    }
                }
                // Q conj(c_{k,l}) lands on mode (k' - k, l' - l).
                let (kq, lq) = (term.k - k, term.l - l);
                if kq.abs() <= n && lq.abs() <= n {
                    for r in 0..fiber {
                        for c in 0..fiber {
                            add_antilinear(&mut m, idx(kq, lq, r), idx(k, l, c), term.q[(r, c)]);
                        }
                    }
                }
            }
        }
    }
    let complex_linear = potential.terms.iter().all(|t| t.q.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    let space = format!("L2(T2, C^{fiber}) Fourier |k|,|l| <= {truncation}");
    Ok(AssembledOperator::new(m, &space, &space, &potential.descriptor(), complex_linear))
}
