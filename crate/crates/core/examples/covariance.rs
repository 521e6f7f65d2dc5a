use freezelab::freezing::sigma_inv;
use freezelab::{Flavor, RootSystem};

/// Frozen inverse covariances for each root system, with their spectra
/// compared to the closed-form eigenvalues.
pub fn run_example() -> freezelab::Result<()> {
    for (system, nu) in [(RootSystem::A, None), (RootSystem::B, Some(2.0)), (RootSystem::D, None)] {
        let c = sigma_inv(system, Flavor::Bessel, 4, nu)?;
        println!("{system}: eigenvalues {:?}", c.eigen.eigenvalues);
        println!("    claimed {:?}, deviation {:.1e}", c.claimed_spectrum(), c.spectrum_deviation());
        assert!(c.spectrum_deviation() < 1e-8);
    }
    let cauchy = sigma_inv(RootSystem::A, Flavor::Cauchy, 2, None)?;
    println!("A Cauchy N=2: det {:.6}", cauchy.determinant());
    Ok(())
}

fn main() -> freezelab::Result<()> {
    run_example()
}
