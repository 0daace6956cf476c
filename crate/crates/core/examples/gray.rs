//! Gray stability on the 3-torus for a sheared family of contact forms.

use holocurves::flows::*;
use nalgebra::Vector3;

fn main() -> holocurves::Result<()> {
    let family = PulledBackContact { form: ContactFormT3::new(2)?, amplitude: 0.05 };
    let points: Vec<Vector3<f64>> = (0..4).flat_map(|i| (0..4).map(move |k| Vector3::new(i as f64 / 4.0, 0.3, k as f64 / 4.0))).collect();
    let r = gray_isotopy(&family, &points, &GrayOptions { steps: 32, record_times: vec![1.0] })?;
    let mut err: f64 = 0.0;
    for s in &r.samples {
        err = err.max((Vector3::from(s.phi) - family.exact_flow(s.t, &Vector3::from(s.x))).norm());
    }
    println!("max |(φ*α_t) ∧ α₀| = {:.2e}", r.max_wedge_residual);
    println!("distance to the exact isotopy {err:.2e}");
    Ok(())
}
