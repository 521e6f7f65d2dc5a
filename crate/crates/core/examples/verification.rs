// The statistical checks on a small scale: a KS test of the subordinator
// and an energy test of the frozen type A law against its limit.

use freezelab::sampling::{sample_subordinator, subordinator_cdf};
use freezelab::stats::ks_one_sample;
use freezelab::verify::bessel_clt;
use freezelab::{LimitSystem, RngStream};

pub fn run_example() -> freezelab::Result<()> {
    let mut rng = RngStream::new(5, 0);
    let s: Vec<f64> = (0..5000).map(|_| sample_subordinator(1.0, &mut rng)).collect();
    let ks = ks_one_sample(&s, |x| if x <= 0.0 { 0.0 } else { subordinator_cdf(1.0, x) })?;
    println!("{}", ks.line());

    let clt = bessel_clt(LimitSystem::A, 2, 100.0, 0.0, 1500, 100, 5, 1)?;
    println!("{}", clt.line());
    Ok(())
}

fn main() -> freezelab::Result<()> {
    run_example()
}
