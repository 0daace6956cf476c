//! Linear symplectic algebra: Darboux basis, compatible complex structure,
//! taming, and the Nijenhuis tensor of a non-integrable field.

use holocurves::symplectic_linear::*;
use nalgebra::{DMatrix, DVector};

fn main() -> holocurves::Result<()> {
    let b = DMatrix::from_row_slice(4, 4, &[1.0, 0.2, 0.0, 0.3, 0.0, 1.0, 0.5, 0.0, 0.1, 0.0, 1.0, 0.0, 0.0, 0.4, 0.0, 1.0]);
    let omega = BilinearForm::new(b.transpose() * standard_omega(4) * &b)?;
    println!("Pfaffian {:.6}", check_nondegenerate(&omega).pfaffian);

    let basis = darboux_basis(&omega)?.interleaved_matrix();
    let defect = (basis.transpose() * omega.matrix() * &basis - standard_omega(4)).norm();
    println!("|BᵀΩB - Ω₀| = {defect:.2e}");

    let j = compatible_from_metric(&omega, &MetricForm::euclidean(4))?;
    let t = classify_taming(&omega, &j)?;
    println!("J² + 1 = {:.2e}, class {:?}, min eigenvalue {:.4}", square_defect(j.matrix()), t.class, t.min_eigenvalue);

    let field = AlmostComplexField::from_cayley(4, |p| {
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 2)] = 0.5 * p[1] * p[1] + 0.3 * p[2];
        m[(2, 1)] = 0.3 * p[0] * p[0];
        antilinear_part(&m)
    });
    let p = DVector::from_vec(vec![0.3, -0.2, 0.4, 0.1]);
    let (x, y) = (DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]), DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]));
    println!("|N_J(e1, e3)| = {:.4}", nijenhuis_tensor(&field, &p, &x, &y)?.norm());
    Ok(())
}
