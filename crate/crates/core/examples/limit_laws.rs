use freezelab::freezing::{limit_law, rescale, Direction};
use freezelab::sampling::{sample_cauchy_bessel, sample_limit};
use freezelab::{LimitSystem, MultiplicitySpec, RngStream};

/// Rescales a frozen Cauchy–Bessel draw and compares projection lengths with
/// draws from the half-space limit law.
pub fn run_example() -> freezelab::Result<()> {
    let k = 500.0;
    let law = limit_law(LimitSystem::A, 3, None)?;
    let spec = MultiplicitySpec::a(3, k)?;
    let mut rng = RngStream::new(11, 0);
    let (mut frozen, mut limit) = (0.0, 0.0);
    let m = 2000;
    for _ in 0..m {
        let y = sample_cauchy_bessel(&spec, std::f64::consts::SQRT_2, &mut rng)?;
        let x = rescale(&y, k, &law.peak.coords, Direction::Forward)?;
        frozen += law.projection_length(&x).min(50.0) / m as f64;
        let z = sample_limit(&law, &mut rng);
        assert!(law.in_support(&z));
        limit += law.projection_length(&z).min(50.0) / m as f64;
    }
    println!("mean clipped projection length: frozen {frozen:.3}, limit {limit:.3}");

    let one_sided = limit_law(LimitSystem::BOneSided, 2, None)?;
    let z = sample_limit(&one_sided, &mut rng);
    println!("one-sided draw {z:?}, last coordinate positive: {}", z[1] > 0.0);
    Ok(())
}

fn main() -> freezelab::Result<()> {
    run_example()
}
