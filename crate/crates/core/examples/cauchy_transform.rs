//! The Cauchy transform as a right inverse of ∂̄, and the L² identity
//! ‖∂u‖ = ‖∂̄u‖ for compactly supported u.

use holocurves::cr_operators::*;
use num_complex::Complex64;

fn main() -> holocurves::Result<()> {
    let rho = 0.85;
    let bump = |z: Complex64| {
        let s = z.norm_sqr() / (rho * rho);
        if s >= 1.0 {
            return Complex64::new(0.0, 0.0);
        }
        (1.0 - 1.0 / (1.0 - s)).exp() * (z + 0.3)
    };
    let g = GridFunctionBall::from_scalar(1.0, 257, rho, bump)?;
    let f = dbar_grid(&g);
    let report = cauchy_transform_checked(&f, 1e-3)?;
    let mut err: f64 = 0.0;
    for (a, b) in report.transform.values.iter().zip(&g.values) {
        err = err.max((a - b).norm());
    }
    println!("h = {}, |T(∂̄g) - g|_∞ = {err:.2e}, |∂̄Tf - f| estimate {:.2e}", f.h(), report.estimated_error);
    let n = conjugate_norm_identity(&g)?;
    println!("‖∂g‖ = {:.8}, ‖∂̄g‖ = {:.8}, relative gap {:.1e}", n.norm_d, n.norm_dbar, n.relative_gap);
    Ok(())
}
