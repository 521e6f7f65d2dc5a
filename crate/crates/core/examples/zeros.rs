// Hermite and Laguerre zeros and the identities the peak vectors rest on.

use freezelab::orthopoly::{hermite_zeros, laguerre_zeros, zero_identity_report, IdentityFamily};

pub fn run_example() -> freezelab::Result<()> {
    let h = hermite_zeros(5)?;
    println!("H_5 zeros: {:?}", h.zeros);
    println!("largest Newton residual {:.1e}", h.max_residual());

    let l = laguerre_zeros(4, 1.0)?;
    println!("L_4^(1) zeros: {:?}", l.zeros);

    for (family, n) in [(IdentityFamily::Hermite, 8), (IdentityFamily::Laguerre { nu: 2.0 }, 6)] {
        let report = zero_identity_report(family, n)?;
        for e in &report.entries {
            println!("  {:<32} {:>14.8} target {:>14.8}", e.name, e.value, e.target);
        }
        assert!(report.passed());
    }
    Ok(())
}

fn main() -> freezelab::Result<()> {
    run_example()
}
