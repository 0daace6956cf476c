//! Reeb orbits of `cos(2πNη) dθ + sin(2πNη) dφ` on the 3-torus.

use holocurves::flows::*;
use nalgebra::Vector3;

fn main() -> holocurves::Result<()> {
    let alpha = ContactFormT3::new(1)?;
    for eta in [0.0, 0.125, 0.25, 0.1234567] {
        let p = Vector3::new(0.0, 0.0, eta);
        let o = reeb_orbit_class(&alpha, &p, 1.0, 0.1)?;
        println!("η = {eta:<10} R = {:?}  {:?}", reeb_field(&alpha, &p)?.as_slice(), o.class);
    }
    Ok(())
}
