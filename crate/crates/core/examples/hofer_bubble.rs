//! Hofer's lemma on a finite sample and bubbling of z ↦ kz at the origin.

use holocurves::moduli_calc::MoebiusMap;
use holocurves::nonsqueezing::*;
use num_complex::Complex64;

fn main() -> holocurves::Result<()> {
    let pts: Vec<Vec<f64>> = (0..40).map(|i| vec![i as f64 * 0.05]).collect();
    let g: Vec<f64> = (0..40).map(|i| 1.0 + 50.0 * (-(i as f64 - 27.0).powi(2)).exp()).collect();
    let s = FiniteMetricSample::from_points(&pts, g)?;
    let h = hofer_select(&s, 20, 0.5)?;
    println!("Hofer: x₀ = 20 -> x = {}, ε = {}, trail {:?}, conditions {:?}", h.x, h.eps, h.trail, h.conditions);

    let c = |re| Complex64::new(re, 0.0);
    let family: Vec<MoebiusMap> = [2.0, 8.0, 32.0, 128.0].iter().map(|k| MoebiusMap::new(c(*k), c(0.0), c(0.0), c(1.0))).collect::<Result<_, _>>()?;
    let grid = SampleGrid { centre: c(0.0), half_width: 1.0, n: 41 };
    match bubble_rescale(&family, &grid, c(0.0), 1.0)? {
        BubbleReport::Bubble { members, total_energy } => {
            for m in members {
                println!("R = {:8.2}  ε = {:.4}  sup|dv| = {:.4}  window energy {:.6} of {total_energy}", m.r, m.eps, m.sup_gradient, m.window_energy);
            }
        }
        BubbleReport::NoBubble { gradients } => println!("no bubble: {gradients:?}"),
    }
    Ok(())
}
