//! Goodness-of-fit and two-sample tests, importance-sampling normalisation
//! checks, finite differences and sample moments.

use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView2};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::ensembles::RootSystem;
use crate::error::{domain, invalid, Error, Result};
use crate::freezing::{LimitLaw, LimitSystem};
use crate::matkernel::{dot, eigh, log_gamma, norm_sq, SymMatrix};
use crate::sampling::{sample_subordinator, RngStream};

pub const ALPHA: f64 = 0.01;
/// Asymptotic Kolmogorov critical value at `α = 0.01`.
pub const KS_C_001: f64 = 1.628;

/// Outcome of one check. With a p-value the check passes iff
/// `p > threshold`; otherwise iff `statistic ≤ threshold`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub name: String,
    pub statistic: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    pub sample_sizes: Vec<usize>,
    pub pass: bool,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl TestReport {
    /// A deviation-style check: passes iff `statistic ≤ threshold`.
    pub fn bound(name: impl Into<String>, statistic: f64, threshold: f64) -> Self {
        let mut r = TestReport {
            name: name.into(),
            statistic,
            threshold,
            p_value: None,
            sample_sizes: Vec::new(),
            pass: false,
            metadata: BTreeMap::new(),
        };
        r.pass = r.decision();
        r
    }

    pub fn with_p_value(name: impl Into<String>, statistic: f64, p_value: f64, alpha: f64) -> Self {
        let mut r = TestReport::bound(name, statistic, alpha);
        r.p_value = Some(p_value);
        r.pass = r.decision();
        r
    }

    /// The pass flag this report's numbers imply.
    pub fn decision(&self) -> bool {
        match self.p_value {
            Some(p) => p > self.threshold,
            None => self.statistic <= self.threshold,
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        self.metadata.insert(key.to_string(), v);
        self
    }

    pub fn sizes(mut self, sizes: &[usize]) -> Self {
        self.sample_sizes = sizes.to_vec();
        self
    }

    /// Force a failure whose reason is recorded in the metadata.
    pub fn fail(mut self, reason: &str) -> Self {
        self.pass = false;
        self.with("failure", reason)
    }

    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        match self.p_value {
            Some(p) => format!("{tag} {} (stat {:.4e}, p {:.4}, alpha {})", self.name, self.statistic, p, self.threshold),
            None => format!("{tag} {} ({:.3e} <= {:.1e})", self.name, self.statistic, self.threshold),
        }
    }
}

pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("KS test needs samples"));
    }
    if samples.iter().any(|v| v.is_nan()) {
        return Err(invalid("KS test input contains NaN"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    Ok(xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i as f64 + 1.0) / n - f)
        })
        .fold(0.0, f64::max))
}

pub fn ks_one_sample(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestReport> {
    if samples.len() < 10 {
        return Err(invalid(format!("KS test needs at least 10 samples, got {}", samples.len())));
    }
    let d = ks_statistic(samples, cdf)?;
    let n = samples.len();
    Ok(TestReport::bound("ks_one_sample", d, KS_C_001 / (n as f64).sqrt())
        .sizes(&[n])
        .with("alpha", ALPHA))
}

/// `y ↦ y/√(1+‖y‖²)`, a bijection of ℝᴺ onto the open unit ball. Applied to
/// both samples it leaves "same law" invariant and gives every law the
/// finite first moment the energy statistic needs.
pub fn to_unit_ball(y: &[f64]) -> Vec<f64> {
    let s = (1.0 + norm_sq(y)).sqrt();
    y.iter().map(|v| v / s).collect()
}

const ENERGY_BLOCK: usize = 512;

fn pooled(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Array2<f64>> {
    let dim = a.first().map(Vec::len).unwrap_or(0);
    if a.is_empty() || b.is_empty() {
        return Err(invalid("energy test needs two non-empty samples"));
    }
    if a.iter().chain(b).any(|y| y.len() != dim) {
        return Err(invalid("energy test samples have different dimensions"));
    }
    if a.iter().chain(b).flatten().any(|v| !v.is_finite()) {
        return Err(invalid("energy test input is not finite"));
    }
    let m = a.len() + b.len();
    let flat: Vec<f64> = a.iter().chain(b).flatten().copied().collect();
    Array2::from_shape_vec((m, dim), flat).map_err(|e| invalid(e.to_string()))
}

/// For each column `u` of the 0/1 label matrix, returns `uᵀDu` and `rᵀu`
/// where `D` is the pooled distance matrix and `r = D·1`, plus `1ᵀD1`.
/// `D` is never stored: for each block of rows the strictly upper part of
/// that strip is formed and multiplied against the labels.
fn quadratic_forms(z: ArrayView2<f64>, labels: &Array2<f64>) -> (Vec<f64>, Vec<f64>, f64) {
    let m = z.nrows();
    let dim = z.ncols();
    let flat: Vec<f64> = z.iter().copied().collect();
    let point = |i: usize| &flat[i * dim..(i + 1) * dim];
    let cols = labels.ncols();
    let mut quad = vec![0.0; cols];
    let mut row_sums = vec![0.0; m];
    for i0 in (0..m).step_by(ENERGY_BLOCK) {
        let i1 = (i0 + ENERGY_BLOCK).min(m);
        let width = m - i0;
        let mut strip = vec![0.0; (i1 - i0) * width];
        for i in i0..i1 {
            let zi = point(i);
            let row = &mut strip[(i - i0) * width..(i - i0 + 1) * width];
            let mut sum = 0.0;
            for j in i + 1..m {
                let zj = point(j);
                let mut s = 0.0;
                for c in 0..dim {
                    let d = zi[c] - zj[c];
                    s += d * d;
                }
                let d = s.sqrt();
                row[j - i0] = d;
                sum += d;
                row_sums[j] += d;
            }
            row_sums[i] += sum;
        }
        let strip = Array2::from_shape_vec((i1 - i0, width), strip).expect("strip shape");
        let du = strip.dot(&labels.slice(ndarray::s![i0.., ..]));
        let ui = labels.slice(ndarray::s![i0..i1, ..]);
        for (dr, ur) in du.rows().into_iter().zip(ui.rows()) {
            for ((q, d), u) in quad.iter_mut().zip(dr.iter()).zip(ur.iter()) {
                *q += 2.0 * d * u;
            }
        }
    }
    let total: f64 = row_sums.iter().sum();
    let lin: Vec<f64> = (0..cols)
        .map(|c| labels.column(c).iter().zip(&row_sums).map(|(u, r)| u * r).sum())
        .collect();
    (quad, lin, total)
}

fn energy_from_forms(n: usize, m: usize, quad: f64, lin: f64, total: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let s_aa = quad;
    let s_ab = lin - quad;
    let s_bb = total - 2.0 * lin + quad;
    2.0 * s_ab / (nf * mf) - s_aa / (nf * nf) - s_bb / (mf * mf)
}

/// Energy statistic `2E‖X−Y‖ − E‖X−X′‖ − E‖Y−Y′‖` (V-statistic form) with
/// a permutation p-value `(1 + #{perm ≥ obs})/(1 + P)`.
pub fn energy_two_sample(a: &[Vec<f64>], b: &[Vec<f64>], permutations: usize, rng: &mut RngStream) -> Result<TestReport> {
    if permutations < 100 {
        return Err(invalid(format!("energy test needs at least 100 permutations, got {permutations}")));
    }
    let z = pooled(a, b)?;
    let (n, m) = (a.len(), b.len());
    let total_len = n + m;
    let mut labels = Array2::zeros((total_len, permutations + 1));
    for i in 0..n {
        labels[[i, 0]] = 1.0;
    }
    let mut idx: Vec<usize> = (0..total_len).collect();
    for p in 1..=permutations {
        let mut sub = rng.split(p as u64);
        idx.shuffle(&mut sub);
        for &i in &idx[..n] {
            labels[[i, p]] = 1.0;
        }
    }
    let (quad, lin, total) = quadratic_forms(z.view(), &labels);
    let stats: Vec<f64> = (0..=permutations)
        .map(|c| energy_from_forms(n, m, quad[c], lin[c], total))
        .collect();
    let obs = stats[0];
    let exceed = stats[1..].iter().filter(|&&s| s >= obs).count();
    let p = (1 + exceed) as f64 / (1 + permutations) as f64;
    Ok(TestReport::with_p_value("energy_two_sample", obs, p, ALPHA)
        .sizes(&[n, m])
        .with("permutations", permutations)
        .with("seed", rng.seed())
        .with("stream", rng.stream()))
}

/// An importance-sampling proposal law.
pub trait Proposal: Sync {
    fn dim(&self) -> usize;
    fn sample(&self, rng: &mut RngStream) -> Vec<f64>;
    /// `−∞` where the proposal has no mass.
    fn log_density(&self, y: &[f64]) -> f64;
}

/// Spherical Cauchy law of scale `scale`, folded into a Weyl chamber.
#[derive(Clone, Debug)]
pub struct FoldedCauchy {
    pub system: RootSystem,
    pub dim: usize,
    pub scale: f64,
}

impl Proposal for FoldedCauchy {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let w = loop {
            let w = rng.normal().abs();
            if w > 0.0 {
                break w;
            }
        };
        let x: Vec<f64> = (0..self.dim).map(|_| self.scale * rng.normal() / w).collect();
        self.system.fold(&x)
    }

    fn log_density(&self, y: &[f64]) -> f64 {
        let n = self.dim as f64;
        let a = (n + 1.0) / 2.0;
        let c = log_gamma(a).expect("positive") - log_gamma(0.5).expect("positive")
            - n / 2.0 * std::f64::consts::PI.ln()
            - n * self.scale.ln();
        self.system.group_order(self.dim).ln() + c
            - a * (norm_sq(y) / (self.scale * self.scale)).ln_1p()
    }
}

/// Isotropic Gaussian of the given per-coordinate variance, folded into a
/// Weyl chamber.
#[derive(Clone, Debug)]
pub struct FoldedGaussian {
    pub system: RootSystem,
    pub dim: usize,
    pub variance: f64,
}

impl Proposal for FoldedGaussian {
    fn dim(&self) -> usize {
        self.dim
    }

    fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let s = self.variance.sqrt();
        let x: Vec<f64> = (0..self.dim).map(|_| s * rng.normal()).collect();
        self.system.fold(&x)
    }

    fn log_density(&self, y: &[f64]) -> f64 {
        let n = self.dim as f64;
        self.system.group_order(self.dim).ln()
            - n / 2.0 * (2.0 * std::f64::consts::PI * self.variance).ln()
            - norm_sq(y) / (2.0 * self.variance)
    }
}

/// Product proposal for a limit law: `u = R√S` with `S ~ μ_√2` along the
/// centre direction, and an isotropic Gaussian of variance `u²σ₀²` on the
/// orthogonal complement. Its `u`-marginal coincides with the limit law's.
#[derive(Clone, Debug)]
pub struct LimitProposal {
    pub law: LimitLaw,
    pub sigma0_sq: f64,
    unit: Vec<f64>,
    basis: Vec<Vec<f64>>,
}

impl LimitProposal {
    pub fn new(law: LimitLaw) -> Result<Self> {
        let r = law.center_norm_sq.sqrt();
        let unit: Vec<f64> = law.center.iter().map(|c| c / r).collect();
        let lambda_min = law.bessel_cov.eigen.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        let sigma0_sq = 1.5 / (law.center_norm_sq * lambda_min);
        let e = eigh(&law.projection_perp)?;
        let basis: Vec<Vec<f64>> = (0..law.n)
            .filter(|&i| e.eigenvalues[i] > 0.5)
            .map(|i| e.eigenvector(i))
            .collect();
        if basis.len() + 1 != law.n {
            return Err(Error::Numeric("complement basis has the wrong rank".into()));
        }
        Ok(LimitProposal { law, sigma0_sq, unit, basis })
    }

    fn one_sided(&self) -> bool {
        self.law.system == LimitSystem::BOneSided
    }
}

impl Proposal for LimitProposal {
    fn dim(&self) -> usize {
        self.law.n
    }

    fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
        let r = self.law.center_norm_sq.sqrt();
        let u = r * sample_subordinator(std::f64::consts::SQRT_2, rng).sqrt();
        let sd = u * self.sigma0_sq.sqrt();
        let mut y: Vec<f64> = self.unit.iter().map(|e| u * e).collect();
        for b in &self.basis {
            let g = sd * rng.normal();
            y.iter_mut().zip(b).for_each(|(v, bi)| *v += g * bi);
        }
        if self.one_sided() {
            let last = y.len() - 1;
            y[last] = y[last].abs();
        }
        y
    }

    fn log_density(&self, y: &[f64]) -> f64 {
        let u = dot(y, &self.unit);
        if !(u > 0.0) || (self.one_sided() && y[y.len() - 1] < 0.0) {
            return f64::NEG_INFINITY;
        }
        let r2 = self.law.center_norm_sq;
        // S = u²/R², density √2/√(4π) s^{−3/2} e^{−1/(2s)}, ds/du = 2u/R²
        let s = u * u / r2;
        let log_s_density = 0.5 * (2.0f64).ln() - 0.5 * (4.0 * std::f64::consts::PI).ln() - 1.5 * s.ln() - 1.0 / (2.0 * s);
        let log_u = log_s_density + (2.0 * u / r2).ln();
        let perp_sq = norm_sq(y) - u * u;
        let var = u * u * self.sigma0_sq;
        let k = (self.law.n - 1) as f64;
        let log_perp = -k / 2.0 * (2.0 * std::f64::consts::PI * var).ln() - perp_sq.max(0.0) / (2.0 * var);
        let fold = if self.one_sided() { std::f64::consts::LN_2 } else { 0.0 };
        log_u + log_perp + fold
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub n: usize,
    pub invalid_proposal: bool,
}

impl McEstimate {
    pub fn tolerance(&self) -> f64 {
        (3.0 * self.stderr).max(0.01)
    }

    /// `|estimate − 1| ≤ max(3·stderr, 0.01)` on a valid proposal.
    pub fn report(&self, name: impl Into<String>) -> TestReport {
        let r = TestReport::bound(name, (self.estimate - 1.0).abs(), self.tolerance())
            .sizes(&[self.n])
            .with("estimate", self.estimate)
            .with("stderr", self.stderr);
        if self.invalid_proposal {
            r.fail("proposal has zero density where the target is positive")
        } else {
            r
        }
    }
}

/// Importance-sampling estimate of `∫ exp(log_density)`. A target
/// `Domain` error counts as zero density; any other error aborts.
pub fn mc_normalize(
    log_density: impl Fn(&[f64]) -> Result<f64>,
    proposal: &dyn Proposal,
    n: usize,
    rng: &mut RngStream,
) -> Result<McEstimate> {
    if n < 10_000 {
        return Err(invalid(format!("normalisation needs at least 10^4 points, got {n}")));
    }
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut invalid_proposal = false;
    for _ in 0..n {
        let y = proposal.sample(rng);
        let lf = match log_density(&y) {
            Ok(v) => v,
            Err(Error::Domain(_)) => f64::NEG_INFINITY,
            Err(e) => return Err(e),
        };
        if lf == f64::NEG_INFINITY {
            continue;
        }
        let lq = proposal.log_density(&y);
        if lq == f64::NEG_INFINITY {
            invalid_proposal = true;
            continue;
        }
        let w = (lf - lq).exp();
        sum += w;
        sum_sq += w * w;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok(McEstimate {
        estimate: mean,
        stderr: (var / nf).sqrt(),
        n,
        invalid_proposal,
    })
}

/// Central differences with step `h` in every coordinate.
pub fn fd_gradient(f: impl Fn(&[f64]) -> Result<f64>, x: &[f64], h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) {
        return Err(invalid(format!("step must be positive, got {h}")));
    }
    let eval = |p: &[f64]| -> Result<f64> {
        match f(p) {
            Ok(v) if v.is_finite() => Ok(v),
            Ok(v) => Err(domain(format!("non-finite value {v} at {p:?}"))),
            Err(e) => Err(domain(format!("evaluation failed at {p:?}: {e}"))),
        }
    };
    let mut p = x.to_vec();
    (0..x.len())
        .map(|i| {
            p[i] = x[i] + h;
            let up = eval(&p)?;
            p[i] = x[i] - h;
            let down = eval(&p)?;
            p[i] = x[i];
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

/// Sample mean and unbiased sample covariance.
pub fn empirical_moments(batch: &[Vec<f64>]) -> Result<(Vec<f64>, SymMatrix)> {
    if batch.len() < 2 {
        return Err(invalid(format!("moments need at least 2 samples, got {}", batch.len())));
    }
    let dim = batch[0].len();
    if batch.iter().any(|y| y.len() != dim) {
        return Err(invalid("samples have different dimensions"));
    }
    let n = batch.len() as f64;
    let mut mean = vec![0.0; dim];
    for y in batch {
        mean.iter_mut().zip(y).for_each(|(m, v)| *m += v / n);
    }
    let mut cov = SymMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let s: f64 = batch.iter().map(|y| (y[i] - mean[i]) * (y[j] - mean[j])).sum();
            cov.set(i, j, s / (n - 1.0));
        }
    }
    Ok((mean, cov))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{cog_marginal_cdf, make_law, mode_a, Flavor, MultiplicitySpec};
    use crate::freezing::limit_law;
    use crate::matkernel::{cholesky, erfc};
    use crate::sampling::sample_mvn;

    fn normal_cdf(x: f64) -> f64 {
        0.5 * erfc(-x / std::f64::consts::SQRT_2)
    }

    fn cauchy_draws(n: usize, rng: &mut RngStream) -> Vec<f64> {
        (0..n).map(|_| (std::f64::consts::PI * (rng.uniform() - 0.5)).tan()).collect()
    }

    #[test]
    fn ks_on_exact_quantiles() {
        let n = 500;
        let xs: Vec<f64> = (1..=n)
            .map(|i| (std::f64::consts::PI * ((i as f64 - 0.5) / n as f64 - 0.5)).tan())
            .collect();
        let r = ks_one_sample(&xs, cog_marginal_cdf).unwrap();
        assert!((r.statistic - 0.5 / n as f64).abs() < 1e-12);
        assert!(r.pass && r.decision() == r.pass);
    }

    #[test]
    fn ks_examples() {
        let mut rng = RngStream::new(1, 0);
        let xs = cauchy_draws(100_000, &mut rng);
        assert!(ks_one_sample(&xs, cog_marginal_cdf).unwrap().pass);
        let ns: Vec<f64> = (0..100_000).map(|_| rng.normal()).collect();
        assert!(!ks_one_sample(&ns, cog_marginal_cdf).unwrap().pass);
        assert!(ks_one_sample(&[], normal_cdf).is_err());
        assert!(ks_one_sample(&[0.0; 5], normal_cdf).is_err());
    }

    #[test]
    fn ks_null_calibration() {
        let root = RngStream::new(2, 0);
        let rejections = (0..200)
            .filter(|&i| {
                let mut rng = root.split(i);
                let xs: Vec<f64> = (0..1000).map(|_| rng.normal()).collect();
                !ks_one_sample(&xs, normal_cdf).unwrap().pass
            })
            .count();
        assert!(rejections as f64 / 200.0 <= 0.03, "{rejections}");
    }

    fn normal_batch(n: usize, dim: usize, shift: f64, rng: &mut RngStream) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let mut y: Vec<f64> = (0..dim).map(|_| rng.normal()).collect();
                y[0] += shift;
                y
            })
            .collect()
    }

    /// Direct O(n²) evaluation of the V-statistic.
    fn energy_direct(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
        let d = |x: &Vec<f64>, y: &Vec<f64>| -> f64 {
            x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
        };
        let mean = |u: &[Vec<f64>], v: &[Vec<f64>]| -> f64 {
            u.iter().map(|x| v.iter().map(|y| d(x, y)).sum::<f64>()).sum::<f64>() / (u.len() * v.len()) as f64
        };
        2.0 * mean(a, b) - mean(a, a) - mean(b, b)
    }

    #[test]
    fn energy_matches_direct_formula_across_blocks() {
        let mut rng = RngStream::new(3, 0);
        let a = normal_batch(700, 2, 0.3, &mut rng);
        let b = normal_batch(450, 2, 0.0, &mut rng);
        let r = energy_two_sample(&a, &b, 100, &mut rng).unwrap();
        assert!((r.statistic - energy_direct(&a, &b)).abs() < 1e-10);
    }

    #[test]
    fn energy_examples() {
        let mut rng = RngStream::new(4, 0);
        let a = normal_batch(300, 2, 0.0, &mut rng);
        let r = energy_two_sample(&a, &a, 100, &mut rng).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!(energy_two_sample(&a, &normal_batch(10, 3, 0.0, &mut rng), 100, &mut rng).is_err());
        assert!(energy_two_sample(&a, &a, 50, &mut rng).is_err());

        let a = normal_batch(10_000, 2, 0.0, &mut rng);
        let b = normal_batch(10_000, 2, 1.0, &mut rng);
        let r = energy_two_sample(&a, &b, 100, &mut rng).unwrap();
        assert!(!r.pass && r.decision() == r.pass);
    }

    #[test]
    fn energy_null_calibration() {
        let root = RngStream::new(5, 0);
        let passes = (0..100)
            .filter(|&i| {
                let mut rng = root.split(i);
                let a = normal_batch(150, 2, 0.0, &mut rng);
                let b = normal_batch(150, 2, 0.0, &mut rng);
                energy_two_sample(&a, &b, 199, &mut rng).unwrap().pass
            })
            .count();
        assert!(passes >= 98, "{passes}");
    }

    #[test]
    fn energy_exchangeable_within_batches() {
        let mut rng = RngStream::new(6, 0);
        let a = normal_batch(400, 3, 0.2, &mut rng);
        let b = normal_batch(300, 3, 0.0, &mut rng);
        let s = energy_two_sample(&a, &b, 100, &mut rng).unwrap().statistic;
        let (mut a2, mut b2) = (a.clone(), b.clone());
        a2.shuffle(&mut rng);
        b2.reverse();
        let s2 = energy_two_sample(&a2, &b2, 100, &mut rng).unwrap().statistic;
        assert!((s - s2).abs() < 1e-12 * s.abs().max(1.0));
    }

    #[test]
    fn mc_standard_cauchy_is_exact() {
        let law = make_law(MultiplicitySpec::a(1, 1.0).unwrap(), Flavor::Cauchy, std::f64::consts::SQRT_2).unwrap();
        let prop = FoldedCauchy { system: RootSystem::A, dim: 1, scale: 1.0 };
        let mut rng = RngStream::new(7, 0);
        let e = mc_normalize(|y| law.log_density(y), &prop, 10_000, &mut rng).unwrap();
        assert!((e.estimate - 1.0).abs() < 1e-12, "{e:?}");
        assert!(e.stderr < 1e-12);
    }

    #[test]
    fn mc_cauchy_a2_and_proposal_invariance() {
        let law = make_law(MultiplicitySpec::a(2, 1.0).unwrap(), Flavor::Cauchy, std::f64::consts::SQRT_2).unwrap();
        let mut rng = RngStream::new(8, 0);
        let mut est = Vec::new();
        for scale in [1.0, 2.5] {
            let prop = FoldedCauchy { system: RootSystem::A, dim: 2, scale };
            let e = mc_normalize(|y| law.log_density(y), &prop, 100_000, &mut rng).unwrap();
            assert!(e.report("a2").pass, "{e:?}");
            est.push(e);
        }
        let se = (est[0].stderr.powi(2) + est[1].stderr.powi(2)).sqrt();
        assert!((est[0].estimate - est[1].estimate).abs() <= 4.0 * se);
    }

    #[test]
    fn mc_limit_a2() {
        let law = limit_law(LimitSystem::A, 2, None).unwrap();
        let prop = LimitProposal::new(law.clone()).unwrap();
        let mut rng = RngStream::new(9, 0);
        let e = mc_normalize(|y| law.log_density(y), &prop, 100_000, &mut rng).unwrap();
        assert!((e.estimate - 1.0).abs() <= 0.01, "{e:?}");
    }

    #[test]
    fn mc_flags_invalid_proposal() {
        // proposal confined to the half-line, target on all of ℝ
        struct Half;
        impl Proposal for Half {
            fn dim(&self) -> usize {
                1
            }
            fn sample(&self, rng: &mut RngStream) -> Vec<f64> {
                vec![rng.normal()]
            }
            fn log_density(&self, y: &[f64]) -> f64 {
                if y[0] > 0.0 {
                    (2.0 / (2.0 * std::f64::consts::PI).sqrt()).ln() - y[0] * y[0] / 2.0
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
        let mut rng = RngStream::new(10, 0);
        let e = mc_normalize(|y| Ok(-y[0] * y[0] / 2.0 - 0.5 * (2.0 * std::f64::consts::PI).ln()), &Half, 10_000, &mut rng)
            .unwrap();
        assert!(e.invalid_proposal);
        assert!(!e.report("half").pass);
    }

    #[test]
    fn fd_examples() {
        let x = [0.3, -1.2, 2.0];
        let g = fd_gradient(|y| Ok(norm_sq(y) / 2.0), &x, 1e-3).unwrap();
        for (a, b) in g.iter().zip(&x) {
            assert!((a - b).abs() < 1e-12);
        }
        for x in [[0.0, 0.0], [5.0, -3.0]] {
            let g = fd_gradient(|y| Ok(2.0 * y[0] - 3.0 * y[1] + 1.0), &x, 1e-4).unwrap();
            assert!((g[0] - 2.0).abs() < 1e-9 && (g[1] + 3.0).abs() < 1e-9);
        }
        let e = fd_gradient(|y| if y[0] > 0.0 { Ok(y[0].ln()) } else { Err(domain("log")) }, &[1e-6], 1e-5);
        assert!(matches!(e, Err(Error::Domain(_))));
    }

    #[test]
    fn fd_converges_at_second_order() {
        let f = |y: &[f64]| Ok(y[0].sin() * y[1].exp());
        let x = [0.7, 0.2];
        let exact = [0.7f64.cos() * 0.2f64.exp(), 0.7f64.sin() * 0.2f64.exp()];
        let err = |h: f64| {
            let g = fd_gradient(f, &x, h).unwrap();
            ((g[0] - exact[0]).powi(2) + (g[1] - exact[1]).powi(2)).sqrt()
        };
        let ratio = err(1e-2) / err(5e-3);
        assert!((ratio - 4.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn mode_gradient_vanishes() {
        let law = make_law(MultiplicitySpec::a(3, 5.0).unwrap(), Flavor::Cauchy, std::f64::consts::SQRT_2).unwrap();
        let m = mode_a(3, 5.0).unwrap();
        let g = fd_gradient(|y| law.log_density(y), &m, 1e-5).unwrap();
        let gw = fd_gradient(|y| law.spec.log_weight(y), &m, 1e-5).unwrap();
        assert!(norm_sq(&g).sqrt() <= 1e-6 * norm_sq(&gw).sqrt());
    }

    #[test]
    fn moments_examples() {
        let (mean, cov) = empirical_moments(&vec![vec![1.0, 2.0]; 5]).unwrap();
        assert_eq!(mean, vec![1.0, 2.0]);
        assert_eq!(cov.frobenius_norm(), 0.0);
        let v = [0.5, -1.5];
        let (_, cov) = empirical_moments(&[v.to_vec(), v.iter().map(|x| -x).collect()]).unwrap();
        let expect = SymMatrix::zeros(2).add_outer(2.0, &v);
        assert!(cov.max_abs_diff(&expect) < 1e-15);
        assert!(empirical_moments(&[vec![1.0]]).is_err());

        let sigma = SymMatrix::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let l = cholesky(&sigma).unwrap();
        let mut rng = RngStream::new(11, 0);
        let batch: Vec<Vec<f64>> = (0..100_000).map(|_| sample_mvn(&[0.0, 0.0], &l, &mut rng).unwrap()).collect();
        let (_, cov) = empirical_moments(&batch).unwrap();
        assert!(cov.sub(&sigma).frobenius_norm() / sigma.frobenius_norm() < 0.05);
    }

    #[test]
    fn report_serialises_in_field_order() {
        let r = TestReport::bound("x", 0.5, 1.0).with("seed", 3);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(r#"{"name":"x","statistic":0.5,"threshold":1.0,"sample_sizes":[],"pass":true"#), "{s}");
        let back: TestReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    mod props {
        use super::*;
        use proptest::collection::vec;
        use proptest::prelude::*;

        fn points(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
            vec(vec(-5.0f64..5.0, dim), 2..25)
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn ks_statistic_is_a_sup_distance(xs in vec(-10.0f64..10.0, 1..200), scale in 0.1f64..5.0) {
                let cdf = |x: f64| 0.5 + (x / scale).atan() / std::f64::consts::PI;
                let d = ks_statistic(&xs, cdf).unwrap();
                prop_assert!((0.0..=1.0).contains(&d));
                prop_assert!(d >= 0.5 / xs.len() as f64 - 1e-12);
            }

            #[test]
            fn energy_statistic_is_symmetric_and_nonnegative(a in points(2), b in points(2), seed in any::<u64>()) {
                let ab = energy_two_sample(&a, &b, 100, &mut RngStream::new(seed, 0)).unwrap();
                let ba = energy_two_sample(&b, &a, 100, &mut RngStream::new(seed, 0)).unwrap();
                prop_assert!(ab.statistic >= -1e-9);
                prop_assert!((ab.statistic - ba.statistic).abs() <= 1e-9 * ab.statistic.abs().max(1.0));
                let p = ab.p_value.unwrap();
                prop_assert!(p > 0.0 && p <= 1.0);
            }

            #[test]
            fn energy_statistic_vanishes_on_identical_samples(a in points(3)) {
                let r = energy_two_sample(&a, &a, 100, &mut RngStream::new(1, 0)).unwrap();
                prop_assert!(r.statistic.abs() < 1e-9);
                prop_assert!(r.pass);
            }

            #[test]
            fn unit_ball_map_is_inside_the_ball(y in vec(-1e6f64..1e6, 1..6)) {
                let z = to_unit_ball(&y);
                let norm: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                prop_assert!(norm < 1.0);
            }
        }
    }
}
