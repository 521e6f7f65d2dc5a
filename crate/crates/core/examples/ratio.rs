use freezelab::verify::ratio_sweep;

pub fn run_example() -> freezelab::Result<()> {
    for row in ratio_sweep(2, &[10.0, 1e3, 1e6])? {
        println!(
            "k {:>8} point {} ratio {:>10.6} corrected limit {:>10.6}",
            row.k, row.point, row.ratio, row.corrected_limit
        );
    }
    Ok(())
}

fn main() -> freezelab::Result<()> {
    run_example()
}
