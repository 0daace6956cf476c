//! Harmonic oscillator flow with its Jacobian: symplecticity, energy and period.

use holocurves::flows::*;
use holocurves::symplectic_linear::BilinearForm;
use nalgebra::DVector;

fn main() -> holocurves::Result<()> {
    let h = ScalarHamiltonian::harmonic_oscillator(2);
    let omega = BilinearForm::standard(2)?;
    let field = HamiltonianField::new(&h, &omega)?;
    let p0 = DVector::from_vec(vec![1.0, 0.0]);
    for step in [0.1, 0.05, 1e-3] {
        let r = flow_with_jacobian(&field, &p0, 10.0, step)?;
        let drift = r.samples.iter().map(|s| (h.value(&s.point_vector()) - 0.5).abs()).fold(0.0, f64::max);
        println!(
            "h = {step:<6} symplecticity {:.3e}  energy drift {:.3e}  period {:?}",
            symplecticity_residual(&r, &omega),
            drift,
            upward_crossing_time(&r, 1)
        );
    }
    Ok(())
}
