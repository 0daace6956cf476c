//! The monotonicity ratio F(r) = area(u ∩ B_r) / r² for holomorphic curves
//! through the origin of C², with a boundary-flux cross-check.

use holocurves::nonsqueezing::*;
use num_complex::Complex64;

fn main() -> holocurves::Result<()> {
    let (z, o) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let curves = [("(z, 0)", vec![vec![z, o], vec![z]]), ("(z, z)", vec![vec![z, o], vec![z, o]]), ("(z², 0)", vec![vec![z, z, o], vec![z]])];
    let radii = [0.1, 0.3, 0.5, 0.7, 0.9];
    for (name, c) in curves {
        let u = AnalyticCurve::new(c, 1.5, z)?;
        let p = monotonicity_profile(&u, &radii, (128, 6))?;
        let x = boundary_flux_crosscheck(&u, 0.5, (128, 6))?;
        println!("{name:<8} F/π = {:?}  nondecreasing {}  flux/π at 0.5 = {:.8}", p.f.iter().map(|f| (f / std::f64::consts::PI * 1e6).round() / 1e6).collect::<Vec<_>>(), p.nondecreasing, x.flux / std::f64::consts::PI);
    }
    Ok(())
}
