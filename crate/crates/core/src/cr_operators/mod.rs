//! Linear Cauchy-Riemann operators: the Cauchy transform on a ball, spectral
//! `∂̄` on the torus, the model bundles `E_k → S²`, the disk with a totally
//! real boundary condition, numerical rank, and zero censuses.

mod cauchy;
mod census;
mod disk;
mod grid;
mod ivp;
mod rank;
mod sphere;
mod torus;

pub use cauchy::{cauchy_transform, cauchy_transform_checked, CauchyReport, CauchyTransform};
pub use census::{zero_census, zero_census_grid, CensusOptions, CensusResult, CensusZero};
pub use disk::{assemble_disk_maslov, DiskMaslovOperator};
pub use grid::{conjugate_norm_identity, dbar_grid, dbar_residual, dbar_residual_within, ConjugateNorms, GridFunctionBall};
pub use ivp::{similarity_frame, solve_linear_cr_ivp, IvpSolution, MatrixField, SimilarityFrame, IVP_TOL};
pub use rank::{
    block_singular_values, kernel_basis, kernel_cokernel_dims, rank_from_singular_values, realify, AssembledOperator, RankReport,
    MIN_GAP, RANK_TOL,
};
pub use sphere::{assemble_sphere_ek, sphere_bundle_kernel, sphere_weight, SphereBundleSection, SphereKernel};
pub use torus::{assemble_torus_dbar, PotentialTerm, TorusPotential, TorusSpectralFunction};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transversality {
    InjectiveAndSurjective,
    Injective,
    Surjective,
    Indeterminate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TransversalityPrediction {
    pub verdict: Transversality,
    pub index: i64,
    pub injective: bool,
    pub surjective: bool,
    /// `ind < χ`, equivalent to `c₁ < 0` for line bundles.
    pub index_form_injective: bool,
    /// `ind > -χ`, equivalent to `c₁ > -χ`.
    pub index_form_surjective: bool,
}

/// Line-bundle criteria: `c₁ < 0` gives injectivity and `c₁ > -χ`
/// surjectivity; the index is `nχ + 2c₁`.
pub fn transversality_predict(rank: u32, c1: i64, chi: i64) -> Result<TransversalityPrediction> {
    if rank != 1 {
        return Err(Error::Unsupported(format!("criteria hold for line bundles only, got rank {rank}")));
    }
    let index = chi + 2 * c1;
    let injective = c1 < 0;
    let surjective = c1 > -chi;
    let verdict = match (injective, surjective) {
        (true, true) => Transversality::InjectiveAndSurjective,
        (true, false) => Transversality::Injective,
        (false, true) => Transversality::Surjective,
        (false, false) => Transversality::Indeterminate,
    };
    Ok(TransversalityPrediction {
        verdict,
        index,
        injective,
        surjective,
        index_form_injective: index < chi,
        index_form_surjective: index > -chi,
    })
}
