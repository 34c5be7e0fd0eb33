//! The four switch states: circuit impedances against a 50 Ω antenna and
//! the reflection coefficients they produce.

use backscatter_sim::sigcore::Sample;
use backscatter_sim::ssbmod::{quadrature_state_sequence, reflection_coefficient, BackscatterState};

fn main() -> backscatter_sim::Result<()> {
    let z_a = Sample::new(50.0, 0.0);
    for s in BackscatterState::ALL {
        let z_c = s.impedance(z_a);
        let g = reflection_coefficient(z_c, z_a)?;
        println!("{s}: Zc = {:>7.2}{:+7.2}j Ω  Γ = {:+.3}{:+.3}j", z_c.re, z_c.im, g.re, g.im);
    }
    let wf = quadrature_state_sequence(35.75e6, 56e-9, 1)?;
    let seq: String = wf.states.iter().map(|s| s.label()).collect();
    println!("quarter-cycle sequence for +35.75 MHz: {seq}");
    Ok(())
}
