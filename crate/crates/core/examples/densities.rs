use std::f64::consts::{E, PI, SQRT_2};

use freezelab::ensembles::make_law;
use freezelab::freezing::{limit_law, rotated_limit_density_a2};
use freezelab::{Flavor, LimitSystem, MultiplicitySpec};

pub fn run_example() -> freezelab::Result<()> {
    let spec = MultiplicitySpec::a(2, 1.0)?;
    let bessel = make_law(spec, Flavor::Bessel, 1.0)?;
    let cauchy = make_law(spec, Flavor::Cauchy, SQRT_2)?;
    let y = [1.0, -0.5];
    println!("Bessel density at {y:?}: {:.6}", bessel.density(&y)?);
    println!("Cauchy density at {y:?}: {:.6}", cauchy.density(&y)?);

    // the limit density in rotated coordinates at (0, 1) is 2/(pi e)
    let v = rotated_limit_density_a2(0.0, 1.0)?;
    println!("rotated A2 limit density at (0,1): {v:.8} vs {:.8}", 2.0 / (PI * E));

    let law = limit_law(LimitSystem::B, 3, Some(2.0))?;
    let inside = law.center.clone();
    println!("B limit density at its centre: {:.6e}", law.log_density(&inside)?.exp());
    Ok(())
}

fn main() -> freezelab::Result<()> {
    run_example()
}
