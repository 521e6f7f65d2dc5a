//! Seeded samplers: the one-sided stable-1/2 subordinator, tridiagonal
//! matrix models for the Bessel ensembles, their subordinated Cauchy–Bessel
//! versions, and the mixture representation of the limit laws.
//!
//! Parallel generation splits work into fixed-size chunks; chunk `c` always
//! draws from the substream derived from `(seed, stream, c)`, so a batch is
//! a pure function of its descriptor, seed, stream and count.

use std::io::Write;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{MultiplicitySpec, RootSystem};
use crate::error::{invalid, Result};
use crate::freezing::{limit_law, LimitLaw, LimitSystem};
use crate::matkernel::{eigvalsh, erfc, Matrix, SymMatrix};

const CHUNK: usize = 1024;

/// A reproducible random stream: ChaCha20 keyed by `seed`, positioned on
/// stream `stream`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha20Rng,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        RngStream { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Independent child stream number `index`, a deterministic function of
    /// this stream's identity only (not of how much it has been used).
    pub fn split(&self, index: u64) -> RngStream {
        RngStream::new(self.seed, splitmix(self.stream ^ splitmix(index)))
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Chi variable with real `df ≥ 0` degrees of freedom; `χ₀ = 0`.
pub fn chi(df: f64, rng: &mut RngStream) -> f64 {
    if df <= 0.0 {
        return 0.0;
    }
    let g = Gamma::new(df / 2.0, 2.0).expect("positive shape");
    g.sample(rng).sqrt()
}

/// The deterministic map behind the subordinator: `S = t²/(2Z²)`.
pub fn subordinator_from_normal(t: f64, z: f64) -> f64 {
    t * t / (2.0 * z * z)
}

/// `P(S ≤ s) = erfc(t/(2√s))`.
pub fn subordinator_cdf(t: f64, s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else {
        erfc(t / (2.0 * s.sqrt()))
    }
}

/// One draw from `μ_t`, density `t/√(4π) · s^{−3/2} e^{−t²/(4s)}` on `(0, ∞)`.
pub fn sample_subordinator(t: f64, rng: &mut RngStream) -> f64 {
    loop {
        let z = rng.normal();
        if z != 0.0 {
            return subordinator_from_normal(t, z);
        }
    }
}

fn hermite_model(n: usize, k: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    let beta = 2.0 * k;
    let diag: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
    let off: Vec<f64> = (1..n)
        .map(|i| chi(beta * (n - i) as f64, rng) / std::f64::consts::SQRT_2)
        .collect();
    let m = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            diag[i]
        } else if j == i + 1 {
            off[i]
        } else {
            0.0
        }
    });
    let mut ev = eigvalsh(&m)?;
    ev.reverse();
    Ok(ev)
}

/// Singular values of the bidiagonal Laguerre model, descending, via the
/// `2N × 2N` Golub–Kahan tridiagonal with zero diagonal.
fn laguerre_model(n: usize, k1: f64, k2: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    let mut off = Vec::with_capacity(2 * n - 1);
    for i in 1..=n {
        let rest = (n - i) as f64;
        off.push(chi(2.0 * k1 + 1.0 + 2.0 * k2 * rest, rng));
        if i < n {
            off.push(chi(2.0 * k2 * rest, rng));
        }
    }
    let m = SymMatrix::from_fn(2 * n, |i, j| if j == i + 1 { off[i] } else { 0.0 });
    let ev = eigvalsh(&m)?;
    Ok(ev.into_iter().rev().take(n).collect())
}

/// One ordered draw from the Bessel law at time `t` (start 0).
pub fn sample_bessel_ensemble(spec: &MultiplicitySpec, t: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("time t must be positive, got {t}")));
    }
    let n = spec.n();
    let mut y = match spec.system() {
        RootSystem::A => hermite_model(n, spec.k(), rng)?,
        RootSystem::B => laguerre_model(n, spec.k1(), spec.k2(), rng)?,
        RootSystem::D => {
            let mut y = laguerre_model(n, 0.0, spec.k(), rng)?;
            if rng.next_u32() & 1 == 1 {
                y[n - 1] = -y[n - 1];
            }
            y
        }
    };
    let s = t.sqrt();
    y.iter_mut().for_each(|v| *v *= s);
    Ok(y)
}

/// One ordered draw from the Cauchy–Bessel law: a Bessel draw at a random
/// time `S ~ μ_t`.
pub fn sample_cauchy_bessel(spec: &MultiplicitySpec, t: f64, rng: &mut RngStream) -> Result<Vec<f64>> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("time t must be positive, got {t}")));
    }
    let s = sample_subordinator(t, rng);
    sample_bessel_ensemble(spec, s, rng)
}

/// `mean + L g` with `g` standard normal.
pub fn sample_mvn(mean: &[f64], factor: &Matrix, rng: &mut RngStream) -> Result<Vec<f64>> {
    if factor.rows() != mean.len() {
        return Err(invalid(format!(
            "factor has {} rows, mean has length {}",
            factor.rows(),
            mean.len()
        )));
    }
    let g: Vec<f64> = (0..factor.cols()).map(|_| rng.normal()).collect();
    let lg = factor.mul_vec(&g)?;
    Ok(mean.iter().zip(lg).map(|(m, v)| m + v).collect())
}

/// One draw from the limit law: `√S·c + √S·L g`, `S ~ μ_√2`, `LLᵀ = AΣA`;
/// the one-sided law reflects the last coordinate onto `y_N ≥ 0`.
pub fn sample_limit(law: &LimitLaw, rng: &mut RngStream) -> Vec<f64> {
    let s = sample_subordinator(std::f64::consts::SQRT_2, rng).sqrt();
    let mean: Vec<f64> = law.center.iter().map(|c| s * c).collect();
    let mut y = sample_mvn(&mean, &law.perp_factor.scaled(s), rng).expect("consistent dimensions");
    if law.system == LimitSystem::BOneSided {
        let last = y.len() - 1;
        y[last] = y[last].abs();
    }
    y
}

/// What a batch was drawn from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LawDescriptor {
    Bessel {
        spec: MultiplicitySpec,
        t: f64,
    },
    Cauchy {
        spec: MultiplicitySpec,
        t: f64,
    },
    Limit {
        system: LimitSystem,
        n: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        nu: Option<f64>,
    },
    Subordinator {
        t: f64,
    },
}

/// A descriptor with any expensive set-up (limit-law factorisation) done.
#[derive(Clone, Debug)]
pub struct Sampler {
    descriptor: LawDescriptor,
    limit: Option<LimitLaw>,
}

impl Sampler {
    pub fn new(descriptor: LawDescriptor) -> Result<Self> {
        let limit = match &descriptor {
            LawDescriptor::Limit { system, n, nu } => Some(limit_law(*system, *n, *nu)?),
            LawDescriptor::Bessel { t, .. }
            | LawDescriptor::Cauchy { t, .. }
            | LawDescriptor::Subordinator { t } => {
                if !(*t > 0.0) || !t.is_finite() {
                    return Err(invalid(format!("time t must be positive, got {t}")));
                }
                None
            }
        };
        Ok(Sampler { descriptor, limit })
    }

    pub fn descriptor(&self) -> &LawDescriptor {
        &self.descriptor
    }

    pub fn dim(&self) -> usize {
        match &self.descriptor {
            LawDescriptor::Bessel { spec, .. } | LawDescriptor::Cauchy { spec, .. } => spec.n(),
            LawDescriptor::Limit { n, .. } => *n,
            LawDescriptor::Subordinator { .. } => 1,
        }
    }

    pub fn draw(&self, rng: &mut RngStream) -> Result<Vec<f64>> {
        match &self.descriptor {
            LawDescriptor::Bessel { spec, t } => sample_bessel_ensemble(spec, *t, rng),
            LawDescriptor::Cauchy { spec, t } => sample_cauchy_bessel(spec, *t, rng),
            LawDescriptor::Limit { .. } => Ok(sample_limit(self.limit.as_ref().expect("prepared"), rng)),
            LawDescriptor::Subordinator { t } => Ok(vec![sample_subordinator(*t, rng)]),
        }
    }

    /// Support check with `slack` allowed on the ordering constraints.
    pub fn in_support(&self, y: &[f64], slack: f64) -> bool {
        let ordered = |v: &[f64]| v.windows(2).all(|w| w[0] >= w[1] - slack);
        match &self.descriptor {
            LawDescriptor::Bessel { spec, .. } | LawDescriptor::Cauchy { spec, .. } => {
                let n = y.len();
                match spec.system() {
                    RootSystem::A => ordered(y),
                    RootSystem::B => ordered(y) && y[n - 1] >= -slack,
                    RootSystem::D => {
                        n < 2 || (ordered(&y[..n - 1]) && y[n - 2] >= y[n - 1].abs() - slack)
                    }
                }
            }
            LawDescriptor::Limit { .. } => self.limit.as_ref().expect("prepared").in_support(y),
            LawDescriptor::Subordinator { .. } => y[0] > 0.0,
        }
    }

    /// `count` draws, chunked over substreams of `(seed, stream)`.
    pub fn sample_many(&self, count: usize, seed: u64, stream: u64) -> Result<Vec<Vec<f64>>> {
        let root = RngStream::new(seed, stream);
        let chunks: Vec<Result<Vec<Vec<f64>>>> = (0..count.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut rng = root.split(c as u64);
                let len = CHUNK.min(count - c * CHUNK);
                (0..len).map(|_| self.draw(&mut rng)).collect()
            })
            .collect();
        let mut out = Vec::with_capacity(count);
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleBatch {
    pub law: LawDescriptor,
    pub seed: u64,
    pub stream: u64,
    pub count: usize,
    pub dim: usize,
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct BatchHeader<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<&'a serde_json::Value>,
    law: &'a LawDescriptor,
    seed: u64,
    stream: u64,
    count: usize,
    dim: usize,
}

impl SampleBatch {
    pub fn generate(law: LawDescriptor, count: usize, seed: u64, stream: u64) -> Result<Self> {
        let sampler = Sampler::new(law)?;
        let samples = sampler.sample_many(count, seed, stream)?;
        Ok(SampleBatch {
            law: sampler.descriptor.clone(),
            seed,
            stream,
            count,
            dim: sampler.dim(),
            samples,
        })
    }

    fn header<'a>(&'a self, config: Option<&'a serde_json::Value>) -> BatchHeader<'a> {
        BatchHeader {
            config,
            law: &self.law,
            seed: self.seed,
            stream: self.stream,
            count: self.count,
            dim: self.dim,
        }
    }

    /// Header object on the first line, then one JSON array per sample.
    pub fn write_jsonl(&self, w: &mut impl Write, config: Option<&serde_json::Value>) -> Result<()> {
        serde_json::to_writer(&mut *w, &self.header(config))?;
        writeln!(w)?;
        for row in &self.samples {
            serde_json::to_writer(&mut *w, row)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// `# {header json}`, a column header row, then `%.17g` rows.
    pub fn write_csv(&self, w: &mut impl Write, config: Option<&serde_json::Value>) -> Result<()> {
        writeln!(w, "# {}", serde_json::to_string(&self.header(config))?)?;
        let cols: Vec<String> = (1..=self.dim).map(|i| format!("y{i}")).collect();
        writeln!(w, "{}", cols.join(","))?;
        for row in &self.samples {
            let cells: Vec<String> = row.iter().map(|&v| format_g17(v)).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// C's `%.17g`: 17 significant digits, trailing zeros removed, scientific
/// notation when the decimal exponent is below −4 or at least 17.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let strip = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", strip(mantissa), sign, exp.abs())
    } else {
        let decimals = (16 - exp).max(0) as usize;
        strip(&format!("{x:.decimals$}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{make_law, Flavor};
    use crate::matkernel::{cholesky, log_gamma};

    fn ks_stat(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
            })
            .fold(0.0, f64::max)
    }

    fn ks_pass(xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> bool {
        let n = xs.len() as f64;
        ks_stat(xs, cdf) <= 1.628 / n.sqrt()
    }

    /// Regularised lower incomplete gamma P(a, x): series below a+1,
    /// continued fraction above.
    fn gamma_p(a: f64, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let lg = log_gamma(a).unwrap();
        if x < a + 1.0 {
            let mut term = 1.0 / a;
            let mut sum = term;
            for n in 1..1000 {
                term *= x / (a + n as f64);
                sum += term;
                if term < sum * 1e-16 {
                    break;
                }
            }
            sum * (-x + a * x.ln() - lg).exp()
        } else {
            let tiny = 1e-300;
            let mut b = x + 1.0 - a;
            let mut c = 1.0 / tiny;
            let mut d = 1.0 / b;
            let mut h = d;
            for i in 1..1000 {
                let an = -(i as f64) * (i as f64 - a);
                b += 2.0;
                d = an * d + b;
                d = if d.abs() < tiny { tiny } else { d };
                c = b + an / c;
                c = if c.abs() < tiny { tiny } else { c };
                d = 1.0 / d;
                let del = d * c;
                h *= del;
                if (del - 1.0).abs() < 1e-16 {
                    break;
                }
            }
            1.0 - (-x + a * x.ln() - lg).exp() * h
        }
    }

    fn normal_cdf(x: f64) -> f64 {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }

    #[test]
    fn streams_are_reproducible() {
        let mut a = RngStream::new(7, 3);
        let mut b = RngStream::new(7, 3);
        let xs: Vec<u64> = (0..20).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..20).map(|_| b.next_u64()).collect();
        assert_eq!(xs, ys);
        let mut c = RngStream::new(7, 4);
        assert_ne!(xs[0], c.next_u64());
        assert_eq!(a.split(5).next_u64(), RngStream::new(7, 3).split(5).next_u64());
    }

    #[test]
    fn subordinator_transform_and_cdf() {
        assert!((subordinator_from_normal(std::f64::consts::SQRT_2, 1.0) - 1.0).abs() < 1e-15);
        let mut rng = RngStream::new(1, 0);
        let t = std::f64::consts::SQRT_2;
        let xs: Vec<f64> = (0..100_000).map(|_| sample_subordinator(t, &mut rng)).collect();
        let frac = xs.iter().filter(|&&s| s <= 1.0).count() as f64 / xs.len() as f64;
        assert!((frac - 0.3173).abs() < 0.01, "{frac}");
        assert!(ks_pass(xs, |s| subordinator_cdf(t, s)));
    }

    #[test]
    fn subordinator_histogram_mode() {
        // mode of s^{-3/2} e^{-t²/(4s)} is t²/6
        let t = std::f64::consts::SQRT_2;
        let mut rng = RngStream::new(11, 0);
        let bins = 60;
        let width = 0.025;
        let mut hist = vec![0usize; bins];
        for _ in 0..400_000 {
            let s = sample_subordinator(t, &mut rng);
            let b = (s / width) as usize;
            if b < bins {
                hist[b] += 1;
            }
        }
        let best = (0..bins).max_by_key(|&b| hist[b]).unwrap();
        let centre = (best as f64 + 0.5) * width;
        assert!((centre - 1.0 / 3.0).abs() < 0.06, "{centre}");
    }

    #[test]
    fn a_one_dimensional_is_normal_with_variance_t() {
        let spec = MultiplicitySpec::a(1, 3.0).unwrap();
        let mut rng = RngStream::new(2, 0);
        let t = 2.5;
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_bessel_ensemble(&spec, t, &mut rng).unwrap()[0])
            .collect();
        let var = xs.iter().map(|v| v * v).sum::<f64>() / xs.len() as f64;
        assert!((var / t - 1.0).abs() < 0.03, "{var}");
    }

    #[test]
    fn a_second_moment() {
        let spec = MultiplicitySpec::a(2, 1.0).unwrap();
        let mut rng = RngStream::new(3, 0);
        let m = 100_000;
        let s: f64 = (0..m)
            .map(|_| {
                let y = sample_bessel_ensemble(&spec, 1.0, &mut rng).unwrap();
                y[0] * y[0] + y[1] * y[1]
            })
            .sum();
        assert!((s / m as f64 / 4.0 - 1.0).abs() < 0.03);
    }

    #[test]
    fn b_one_dimensional_square_is_gamma() {
        for k1 in [0.0, 0.5, 2.0] {
            let spec = MultiplicitySpec::b(1, k1, 1.0).unwrap();
            let mut rng = RngStream::new(4, k1.to_bits());
            let xs: Vec<f64> = (0..50_000)
                .map(|_| sample_bessel_ensemble(&spec, 1.0, &mut rng).unwrap()[0].powi(2))
                .collect();
            assert!(ks_pass(xs, |x| gamma_p(k1 + 0.5, x / 2.0)), "k1={k1}");
        }
    }

    /// For A with N = 2, `(y₁+y₂)/√(2t)` is standard normal and
    /// `(y₁−y₂)/√(2t)` is chi with `2k+1` degrees of freedom; both follow
    /// from the exact density in rotated coordinates.
    #[test]
    fn a_two_rotated_marginals() {
        for k in [0.5, 1.0, 3.0] {
            let spec = MultiplicitySpec::a(2, k).unwrap();
            let t = 1.7;
            let mut rng = RngStream::new(5, (k * 10.0) as u64);
            let draws: Vec<Vec<f64>> = (0..40_000)
                .map(|_| sample_bessel_ensemble(&spec, t, &mut rng).unwrap())
                .collect();
            let s = (2.0 * t).sqrt();
            let x1: Vec<f64> = draws.iter().map(|y| (y[0] + y[1]) / s).collect();
            let x2: Vec<f64> = draws.iter().map(|y| (y[0] - y[1]) / s).collect();
            assert!(ks_pass(x1, normal_cdf));
            assert!(ks_pass(x2, |x| gamma_p(k + 0.5, x * x / 2.0)));
        }
    }

    /// Quadrature oracle: marginal distribution of each coordinate of a
    /// two-dimensional law against the sampler, for B and D.
    #[test]
    fn two_dimensional_marginals_match_quadrature() {
        let cases = [
            MultiplicitySpec::b(2, 0.5, 1.0).unwrap(),
            MultiplicitySpec::b(2, 2.0, 0.5).unwrap(),
            MultiplicitySpec::d(2, 1.0).unwrap(),
        ];
        for spec in cases {
            let law = make_law(spec, Flavor::Bessel, 1.0).unwrap();
            // grid over [-L, L]², density zero outside the chamber
            let l = 7.0;
            let m = 700;
            let h = 2.0 * l / m as f64;
            let mut marg = [vec![0.0; m], vec![0.0; m]];
            for i in 0..m {
                for j in 0..m {
                    let y = [-l + (i as f64 + 0.5) * h, -l + (j as f64 + 0.5) * h];
                    if let Ok(d) = law.density(&y) {
                        marg[0][i] += d * h * h;
                        marg[1][j] += d * h * h;
                    }
                }
            }
            let total: f64 = marg[0].iter().sum();
            assert!((total - 1.0).abs() < 1e-3, "{spec:?}: mass {total}");
            let mut rng = RngStream::new(6, 0);
            let draws: Vec<Vec<f64>> = (0..40_000)
                .map(|_| sample_bessel_ensemble(&spec, 1.0, &mut rng).unwrap())
                .collect();
            for c in 0..2 {
                let mut cdf = vec![0.0; m + 1];
                for i in 0..m {
                    cdf[i + 1] = cdf[i] + marg[c][i];
                }
                let lookup = |x: f64| {
                    let pos = ((x + l) / h).clamp(0.0, m as f64);
                    let i = (pos.floor() as usize).min(m - 1);
                    let frac = pos - i as f64;
                    (cdf[i] + frac * (cdf[i + 1] - cdf[i])) / total
                };
                let xs: Vec<f64> = draws.iter().map(|y| y[c]).collect();
                let d = ks_stat(xs, lookup);
                assert!(d <= 1.628 / 200.0 + 2e-3, "{spec:?} coord {c}: D = {d}");
            }
        }
    }

    #[test]
    fn cauchy_one_dimensional_is_standard_cauchy() {
        let spec = MultiplicitySpec::a(1, 1.0).unwrap();
        let mut rng = RngStream::new(8, 0);
        let xs: Vec<f64> = (0..100_000)
            .map(|_| sample_cauchy_bessel(&spec, std::f64::consts::SQRT_2, &mut rng).unwrap()[0])
            .collect();
        assert!(ks_pass(xs, crate::ensembles::cog_marginal_cdf));
    }

    #[test]
    fn draws_are_in_chamber() {
        let sqrt2 = std::f64::consts::SQRT_2;
        for spec in [
            MultiplicitySpec::a(4, 0.7).unwrap(),
            MultiplicitySpec::b(3, 0.0, 2.0).unwrap(),
            MultiplicitySpec::d(3, 1.0).unwrap(),
        ] {
            let s = Sampler::new(LawDescriptor::Cauchy { spec, t: sqrt2 }).unwrap();
            for y in s.sample_many(2000, 9, 0).unwrap() {
                assert!(s.in_support(&y, 1e-12), "{spec:?}: {y:?}");
            }
        }
    }

    #[test]
    fn mvn_examples() {
        let mut rng = RngStream::new(10, 0);
        let mean = [1.0, -2.0];
        assert_eq!(sample_mvn(&mean, &Matrix::zeros(2, 2), &mut rng).unwrap(), mean.to_vec());
        assert!(sample_mvn(&mean, &Matrix::zeros(3, 3), &mut rng).is_err());

        let cov = SymMatrix::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let l = cholesky(&cov).unwrap();
        let m = 100_000;
        let draws: Vec<Vec<f64>> = (0..m).map(|_| sample_mvn(&[0.0, 0.0], &l, &mut rng).unwrap()).collect();
        let emp = SymMatrix::from_fn(2, |i, j| draws.iter().map(|y| y[i] * y[j]).sum::<f64>() / m as f64);
        assert!(emp.sub(&cov).frobenius_norm() / cov.frobenius_norm() < 0.05);

        let id = Matrix::identity(2);
        let draws: Vec<Vec<f64>> = (0..20_000).map(|_| sample_mvn(&[0.0, 0.0], &id, &mut rng).unwrap()).collect();
        for c in 0..2 {
            assert!(ks_pass(draws.iter().map(|y| y[c]).collect(), normal_cdf));
        }
    }

    #[test]
    fn limit_projection_is_sqrt_subordinator() {
        for (system, n, nu) in [
            (LimitSystem::A, 3, None),
            (LimitSystem::B, 2, Some(2.0)),
            (LimitSystem::D, 3, None),
            (LimitSystem::BOneSided, 2, None),
        ] {
            let law = limit_law(system, n, nu).unwrap();
            let mut rng = RngStream::new(12, 0);
            let draws: Vec<Vec<f64>> = (0..50_000).map(|_| sample_limit(&law, &mut rng)).collect();
            assert!(draws.iter().all(|y| law.in_support(y)));
            let us: Vec<f64> = draws
                .iter()
                .map(|y| crate::matkernel::dot(y, &law.center) / law.center_norm_sq)
                .collect();
            // P(√S ≤ u) = P(S ≤ u²) = erfc(1/(√2 u)) for S ~ μ_√2
            assert!(ks_pass(us, |u| subordinator_cdf(std::f64::consts::SQRT_2, u * u)), "{system:?}");
            if system != LimitSystem::BOneSided {
                // centred Gaussian part: the perpendicular mean of y/√S vanishes
                let mut mean = vec![0.0; n];
                for y in &draws {
                    let s = crate::matkernel::dot(y, &law.center) / law.center_norm_sq;
                    let p = law.projection_perp.mul_vec(y);
                    for i in 0..n {
                        mean[i] += p[i] / s / draws.len() as f64;
                    }
                }
                let sd = law.bessel_cov.sigma.diag().iter().cloned().fold(0.0, f64::max).sqrt();
                let se = sd / (draws.len() as f64).sqrt();
                assert!(mean.iter().all(|m| m.abs() < 4.0 * se), "{system:?}: {mean:?}");
            }
        }
    }

    #[test]
    fn batches_are_deterministic_and_serialise() {
        let law = LawDescriptor::Cauchy {
            spec: MultiplicitySpec::a(2, 1.0).unwrap(),
            t: std::f64::consts::SQRT_2,
        };
        let a = SampleBatch::generate(law.clone(), 3000, 7, 0).unwrap();
        let b = SampleBatch::generate(law, 3000, 7, 0).unwrap();
        assert_eq!(a.samples, b.samples);
        let mut ja = Vec::new();
        let mut jb = Vec::new();
        a.write_jsonl(&mut ja, None).unwrap();
        b.write_jsonl(&mut jb, None).unwrap();
        assert_eq!(ja, jb);
        let text = String::from_utf8(ja).unwrap();
        assert_eq!(text.lines().count(), 3001);
        let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
        assert_eq!(first["count"], 3000);
        assert_eq!(first["law"]["kind"], "cauchy");
        let mut csv = Vec::new();
        a.write_csv(&mut csv, None).unwrap();
        let csv = String::from_utf8(csv).unwrap();
        assert!(csv.starts_with("# {"));
        assert_eq!(csv.lines().nth(1), Some("y1,y2"));
    }

    #[test]
    fn g17_formatting() {
        assert_eq!(format_g17(0.5), "0.5");
        assert_eq!(format_g17(1.0), "1");
        assert_eq!(format_g17(-3.0), "-3");
        assert_eq!(format_g17(0.0), "0");
        assert_eq!(format_g17(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(format_g17(1.5f64.sqrt()), "1.2247448713915889");
        assert_eq!(format_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_g17(1e20), "1e+20");
        assert_eq!(format_g17(123456.0), "123456");
        assert_eq!(format_g17(0.0001), "0.0001");
        for &x in &[0.1, 2.0 / 3.0, 1e300, -7.25e-9, std::f64::consts::PI] {
            assert_eq!(format_g17(x).parse::<f64>().unwrap(), x);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn spec_for(system: u8, n: usize, k: f64) -> MultiplicitySpec {
            match system {
                0 => MultiplicitySpec::a(n, k),
                1 => MultiplicitySpec::b(n, 0.5 * k, k),
                _ => MultiplicitySpec::d(n, k),
            }
            .unwrap()
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn batches_depend_only_on_seed_and_stream(seed in any::<u64>(), stream in any::<u64>(),
                                                      system in 0u8..3, n in 2usize..5, k in 0.1f64..5.0) {
                let s = Sampler::new(LawDescriptor::Cauchy { spec: spec_for(system, n, k), t: 1.0 }).unwrap();
                let a = s.sample_many(40, seed, stream).unwrap();
                let b = s.sample_many(40, seed, stream).unwrap();
                prop_assert_eq!(&a, &b);
                let c = s.sample_many(40, seed, stream.wrapping_add(1)).unwrap();
                prop_assert_ne!(&a, &c);
            }

            #[test]
            fn draws_stay_in_the_chamber(seed in any::<u64>(), system in 0u8..3, n in 1usize..6,
                                         k in 0.0f64..20.0, t in 0.1f64..5.0, cauchy in any::<bool>()) {
                let spec = spec_for(system, n, k);
                let desc = if cauchy { LawDescriptor::Cauchy { spec, t } } else { LawDescriptor::Bessel { spec, t } };
                let s = Sampler::new(desc).unwrap();
                for y in s.sample_many(30, seed, 0).unwrap() {
                    prop_assert_eq!(y.len(), n);
                    prop_assert!(y.iter().all(|v| v.is_finite()));
                    prop_assert!(s.in_support(&y, 0.0), "{:?}", y);
                }
            }

            #[test]
            fn subordinator_draws_are_positive(seed in any::<u64>(), t in 0.01f64..10.0) {
                let mut rng = RngStream::new(seed, 0);
                for _ in 0..50 {
                    let s = sample_subordinator(t, &mut rng);
                    prop_assert!(s > 0.0 && s.is_finite());
                }
            }
        }
    }
}
