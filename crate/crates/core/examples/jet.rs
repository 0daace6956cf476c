//! A local J-holomorphic disc with prescribed point and tangent vector.

use holocurves::holomorphic_solver::*;
use holocurves::symplectic_linear::AlmostComplexField;
use nalgebra::{DMatrix, DVector};

fn main() -> holocurves::Result<()> {
    let j = BallTarget::new(AlmostComplexField::from_cayley(4, |y: &DVector<f64>| {
        let a = 0.3 * y.norm_squared();
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = a;
        m[(1, 3)] = -a;
        m[(2, 0)] = 0.5 * a;
        m[(3, 1)] = -0.5 * a;
        m
    }))?;
    let p = DVector::from_vec(vec![0.1, -0.05, 0.2, 0.0]);
    let x = DVector::from_vec(vec![0.3, 0.1, -0.2, 0.4]);
    let t = tangent_prescription(&j, &p, &x, 0.3, 14)?;
    println!("residual {:.2e}, |u(0) - p| = {:.1e}, |∂_s u(0) - X| = {:.1e}", t.solution.residual, t.point_defect, t.tangent_defect);
    println!("Newton iterations {}", t.solution.report.iterations);
    Ok(())
}
