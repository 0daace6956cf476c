//! Kernel and cokernel dimensions of ∂̄ on line bundles over the sphere,
//! the disk with Maslov boundary conditions, and the torus.

use holocurves::cr_operators::*;

fn main() -> holocurves::Result<()> {
    println!("  k  ker coker  ind        gap");
    for k in -3..=5 {
        let r = kernel_cokernel_dims(&assemble_sphere_ek(k, sphere_weight(k))?, RANK_TOL);
        println!("{k:>3} {:>4} {:>5} {:>4} {:>10.2e}", r.dim_ker, r.dim_coker, r.dim_ker as i64 - r.dim_coker as i64, r.gap);
    }
    println!(" mu  ker coker");
    for mu in -3..=5 {
        let r = kernel_cokernel_dims(&assemble_disk_maslov(mu, 10)?, RANK_TOL);
        println!("{mu:>3} {:>4} {:>5}", r.dim_ker, r.dim_coker);
    }
    let r = kernel_cokernel_dims(&assemble_torus_dbar(8, 1, &TorusPotential::zero(1))?, RANK_TOL);
    println!("torus: ker {} coker {}", r.dim_ker, r.dim_coker);
    Ok(())
}
