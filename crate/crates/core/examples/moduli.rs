//! Index and dimension formulas, Möbius normalization and torus moduli.

use holocurves::moduli_calc::*;
use num_complex::Complex64;

fn main() -> holocurves::Result<()> {
    for n in 1..=3 {
        println!("virdim M_(0,1)(A₀) in dimension {} = {}", 2 * n, curve_index(&CurveTopology { g: 0, m: 1, n, c1a: 2 }));
    }
    for k in 1..=3 {
        println!("k-fold cover, n = 4: index {}", curve_index(&CurveTopology { g: 0, m: 0, n: 4, c1a: -k }));
    }
    for (g, m) in [(0, 4), (1, 0), (2, 0), (0, 1)] {
        let d = teichmueller_dimension(g, m);
        println!("(g, m) = ({g}, {m}): dim T = {}, dim Aut = {}", d.dim_t, d.dim_aut);
    }
    let mob = moebius_normalize(SpherePoint::finite(2.0, 1.0), SpherePoint::finite(-1.0, 0.0), SpherePoint::finite(0.0, 3.0))?;
    println!("normalizing map sends the third point to {:?}", mob.apply(SpherePoint::finite(0.0, 3.0)));
    for l in [Complex64::new(2.3, 0.4), Complex64::new(5.0, 1.0), Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)] {
        let r = torus_modulus_reduce(l)?;
        println!("λ = {l:.3} -> {:.6} via {:?}, isotropy order {}", r.reduced, r.witness, torus_isotropy_order(r.reduced)?);
    }
    Ok(())
}
