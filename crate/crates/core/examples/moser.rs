//! Moser's trick: a chart pulling `(1 + x² + y²) dx∧dy` back to `dx∧dy`.

use holocurves::flows::*;
use nalgebra::DVector;

fn main() -> holocurves::Result<()> {
    let omega = FnTwoForm::area_density(|x, y| 1.0 + x * x + y * y);
    let pts: Vec<DVector<f64>> = (0..8).map(|k| {
        let a = std::f64::consts::TAU * k as f64 / 8.0;
        DVector::from_vec(vec![0.1 * a.cos(), 0.1 * a.sin()])
    }).collect();
    let r = moser_isotopy(&omega, None, &pts, &MoserOptions { radius: 0.2, steps: 40, ..Default::default() })?;
    for s in &r.samples {
        println!("({:+.3}, {:+.3}) -> ({:+.6}, {:+.6})  residual {:.1e}", s.x[0], s.x[1], s.phi[0], s.phi[1], s.residual);
    }
    println!("max residual {:.2e}, Pfaffian margin {:.3}", r.max_residual, r.pfaffian_margin);
    Ok(())
}
