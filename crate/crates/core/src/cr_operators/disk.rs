use nalgebra::DMatrix;
use serde::Serialize;

use super::rank::AssembledOperator;
use crate::error::{Error, Result};

/// `∂̄` on the disk with the boundary condition `u(e^{iθ}) ∈ e^{iμθ/2} R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiskMaslovOperator {
    pub mu: i64,
    pub truncation: usize,
    /// Monomials `z^a z̄^b` of the domain.
    pub domain: Vec<(usize, usize)>,
    /// Monomials of the `∂̄` target.
    pub codomain: Vec<(usize, usize)>,
    /// Boundary frequencies `d = a - b` paired as `F_d = conj F_{μ-d}`.
    pub boundary_modes: Vec<i64>,
}

impl DiskMaslovOperator {
    /// Domain: `z^a z̄^b` with `a + b ≤ N` and boundary frequency `d = a - b`
    /// in `[max(-N, μ-N), min(N, μ+N)]`, a window symmetric about `μ/2`.
    pub fn new(mu: i64, truncation: usize) -> Result<Self> {
        let n = truncation as i64;
        if mu.abs() > n || truncation == 0 {
            return Err(Error::Truncation(format!("|μ| = {} exceeds N = {n}", mu.abs())));
        }
        let (lo, hi) = ((-n).max(mu - n), n.min(mu + n));
        let mut domain = Vec::new();
        for a in 0..=truncation {
            for b in 0..=(truncation - a) {
                let d = a as i64 - b as i64;
                if (lo..=hi).contains(&d) {
                    domain.push((a, b));
                }
            }
        }
        let codomain = domain.iter().filter(|(_, b)| *b >= 1).map(|(a, b)| (*a, b - 1)).collect();
        Ok(Self { mu, truncation, domain, codomain, boundary_modes: (lo..=hi).collect() })
    }

    /// Real matrix: `∂̄(z^a z̄^b) = 2b z^a z̄^{b-1}` rows, followed by the
    /// boundary rows `Re/Im (F_d - conj F_{μ-d})` for `d < μ - d` and
    /// `Im F_d` for `d = μ/2`. `F_d = Σ_{a-b=d} c_{ab}` is the boundary
    /// Fourier coefficient of `u(e^{iθ})` at `e^{idθ}`.
    pub fn assemble(&self) -> AssembledOperator {
        let ncols = 2 * self.domain.len();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
        for (a, c) in &self.codomain {
            let j = self.domain.iter().position(|m| *m == (*a, c + 1)).expect("codomain built from domain");
            let w = 2.0 * (c + 1) as f64;
            rows.push(vec![(2 * j, w)]);
            rows.push(vec![(2 * j + 1, w)]);
        }
        let cols_with = |d: i64| -> Vec<usize> {
            self.domain.iter().enumerate().filter(|(_, (a, b))| *a as i64 - *b as i64 == d).map(|(j, _)| j).collect()
        };
        for &d in &self.boundary_modes {
            let e = self.mu - d;
            if d < e {
                let (pd, pe) = (cols_with(d), cols_with(e));
                // Re: Re F_d - Re F_e; Im: Im F_d + Im F_e.
                let mut re = Vec::new();
                let mut im = Vec::new();
                for j in &pd {
                    re.push((2 * j, 1.0));
                    im.push((2 * j + 1, 1.0));
                }
                for j in &pe {
                    re.push((2 * j, -1.0));
                    im.push((2 * j + 1, 1.0));
                }
                rows.push(re);
                rows.push(im);
            } else if d == e {
                rows.push(cols_with(d).iter().map(|j| (2 * j + 1, 1.0)).collect());
            }
        }
        let mut m = DMatrix::zeros(rows.len(), ncols);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row {
                m[(i, *j)] += v;
            }
        }
        AssembledOperator::new(
            m,
            &format!("disk monomials z^a zbar^b, a+b <= {}", self.truncation),
            &format!("disk monomials of degree <= {} plus boundary constraints (mu = {})", self.truncation - 1, self.mu),
            "A = 0",
            false,
        )
    }
}

pub fn assemble_disk_maslov(mu: i64, truncation: usize) -> Result<AssembledOperator> {
    Ok(DiskMaslovOperator::new(mu, truncation)?.assemble())
}
