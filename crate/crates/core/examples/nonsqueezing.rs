//! The sphere class of S² × T² for a perturbed J: regularity of the product
//! curves, continuation to a prescribed point, and energy quantization.

use holocurves::holomorphic_solver::{NewtonOptions, TargetPoint};
use holocurves::nonsqueezing::*;
use num_complex::Complex64;

fn main() -> holocurves::Result<()> {
    let m = Complex64::new(0.5, 0.5);
    for n in [8, 12] {
        let t = product_transversality_check(m, n)?;
        println!("N = {n}: kernel {} (sphere {}, torus {}), gap {:.1e}", t.kernel_dim, t.sphere_block.dim_ker, t.torus_block.dim_ker, t.full.gap);
    }
    let target = ProductTarget::new(1.0)?;
    let p = TargetPoint::new(1, Complex64::new(0.4, -0.3), Complex64::new(0.2, 0.7));
    let r = continuation_find_sphere(&HomotopyJ::cayley(0.1), &target, &p, 10, 12, &NewtonOptions::default())?;
    for s in &r.steps {
        println!("t = {:.1}: {} Newton steps, residual {:.1e}, energy {:.12}", s.t, s.report.iterations, s.report.residual_history.last().unwrap(), s.energy);
    }
    println!("final residual {:.1e}, |u(z*) - p| = {:.1e}", r.final_residual, r.ev_defect);
    println!("{:?}", energy_quantization_check(r.steps.last().unwrap().energy, target.hbar(), 1e-10));
    Ok(())
}
