// Seeded sampling: the same `(seed, stream)` always gives the same batch.

use freezelab::sampling::{LawDescriptor, Sampler};
use freezelab::{MultiplicitySpec, SampleBatch};

pub fn run_example() -> freezelab::Result<()> {
    let spec = MultiplicitySpec::b(3, 0.5, 2.0)?;
    let sampler = Sampler::new(LawDescriptor::Bessel { spec, t: 1.0 })?;
    let draws = sampler.sample_many(5, 2024, 0)?;
    for y in &draws {
        println!("{y:?}");
        assert!(sampler.in_support(y, 0.0));
    }

    let law = LawDescriptor::Cauchy { spec: MultiplicitySpec::d(2, 1.0)?, t: std::f64::consts::SQRT_2 };
    let a = SampleBatch::generate(law.clone(), 200, 7, 3)?;
    let b = SampleBatch::generate(law, 200, 7, 3)?;
    let mut out = Vec::new();
    a.write_jsonl(&mut out, None)?;
    println!("{} JSONL bytes, first line {}", out.len(), String::from_utf8_lossy(&out).lines().next().unwrap_or(""));
    assert_eq!(a.samples, b.samples);
    Ok(())
}

fn main() -> freezelab::Result<()> {
    run_example()
}
