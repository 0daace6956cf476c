use std::sync::OnceLock;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

/// Relative singular-value threshold for numerical rank.
pub const RANK_TOL: f64 = 1e-8;
/// Minimum gap between "zero" and "nonzero" singular values for a reliable rank.
pub const MIN_GAP: f64 = 1e3;

/// Real matrix of a (real-linear) operator between truncated spaces.
#[derive(Debug)]
pub struct AssembledOperator {
    pub matrix: DMatrix<f64>,
    pub domain: String,
    pub codomain: String,
    pub potential: String,
    pub complex_linear: bool,
    spectrum: OnceLock<Vec<f64>>,
}

impl Clone for AssembledOperator {
    fn clone(&self) -> Self {
        Self::new(self.matrix.clone(), &self.domain, &self.codomain, &self.potential, self.complex_linear)
    }
}

impl AssembledOperator {
    pub fn new(matrix: DMatrix<f64>, domain: &str, codomain: &str, potential: &str, complex_linear: bool) -> Self {
        Self {
            matrix,
            domain: domain.into(),
            codomain: codomain.into(),
            potential: potential.into(),
            complex_linear,
            spectrum: OnceLock::new(),
        }
    }

    /// Singular values in decreasing order, computed once per operator.
    pub fn singular_values(&self) -> &[f64] {
        self.spectrum.get_or_init(|| block_singular_values(&self.matrix))
    }
}

/// Realification of a complex matrix in interleaved `(Re, Im)` coordinates.
pub fn realify(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    let mut r = DMatrix::zeros(2 * m.nrows(), 2 * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            r[(2 * i, 2 * j)] = z.re;
            r[(2 * i, 2 * j + 1)] = -z.im;
            r[(2 * i + 1, 2 * j)] = z.im;
            r[(2 * i + 1, 2 * j + 1)] = z.re;
        }
    }
    r
}

/// Singular values of a matrix that decouples into independent blocks: the
/// connected components of the row/column sparsity graph are handled
/// separately and the spectra merged. Missing singular values of wide or
/// tall blocks are not zeros and are not listed.
pub fn block_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let (rows, cols) = m.shape();
    // Union-find over rows (0..rows) and columns (rows..rows+cols).
    let mut parent: Vec<usize> = (0..rows + cols).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..cols {
        for i in 0..rows {
            if m[(i, j)] != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, rows + j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, (Vec<usize>, Vec<usize>)> = Default::default();
    for i in 0..rows {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().0.push(i);
    }
    for j in 0..cols {
        let r = find(&mut parent, rows + j);
        groups.entry(r).or_default().1.push(j);
    }
    let mut sv = Vec::with_capacity(rows.min(cols));
    for (ri, ci) in groups.values() {
        if ri.is_empty() || ci.is_empty() {
            continue;
        }
        let block = DMatrix::from_fn(ri.len(), ci.len(), |a, b| m[(ri[a], ci[b])]);
        sv.extend(block.singular_values().iter().copied());
    }
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankReport {
    pub dim_ker: usize,
    pub dim_coker: usize,
    pub index: i64,
    pub gap: f64,
    pub reliable: bool,
    pub sigma_max: f64,
    pub singular_head: Vec<f64>,
    pub singular_tail: Vec<f64>,
}

/// Numerical kernel and cokernel dimensions from singular values with the
/// relative threshold `tau`; the result is reliable only when the gap
/// between the smallest kept and the largest discarded value is at least `MIN_GAP`.
pub fn rank_from_singular_values(sv: &[f64], rows: usize, cols: usize, tau: f64) -> RankReport {
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let threshold = tau * sigma_max;
    let rank = sv.iter().filter(|s| **s > threshold).count();
    let smallest_kept = sv.iter().filter(|s| **s > threshold).fold(f64::INFINITY, |a, b| a.min(*b));
    let largest_dropped = sv.iter().filter(|s| **s <= threshold).fold(-1.0f64, |a, b| a.max(*b));
    let denom = if largest_dropped >= 0.0 { largest_dropped.max(f64::EPSILON * sigma_max) } else { threshold };
    let gap = if rank == 0 || denom == 0.0 { f64::INFINITY } else { smallest_kept / denom };
    let head = sv.iter().take(5).copied().collect();
    let tail = sv.iter().rev().take(5).rev().copied().collect();
    RankReport {
        dim_ker: cols - rank,
        dim_coker: rows - rank,
        index: cols as i64 - rows as i64,
        gap,
        reliable: gap >= MIN_GAP,
        sigma_max,
        singular_head: head,
        singular_tail: tail,
    }
}

pub fn kernel_cokernel_dims(op: &AssembledOperator, tau: f64) -> RankReport {
    let (rows, cols) = op.matrix.shape();
    rank_from_singular_values(op.singular_values(), rows, cols, tau)
}

/// Orthonormal basis of the numerical kernel (columns), from a full SVD.
pub fn kernel_basis(m: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let (rows, cols) = m.shape();
    // Pad to a square matrix so the full right singular basis is available.
    let sq = if rows < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = sq.svd(false, true);
    let vt = svd.v_t.expect("requested V");
    let smax = svd.singular_values.max();
    let idx: Vec<usize> = (0..svd.singular_values.len()).filter(|&i| svd.singular_values[i] <= tau * smax).collect();
    DMatrix::from_fn(cols, idx.len(), |r, c| vt[(idx[c], r)])
}
