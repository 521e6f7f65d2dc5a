//! Hermite (physicists' normalization, `H₁(x) = 2x`) and generalized
//! Laguerre polynomials: evaluation, zeros, and the scalar identities the
//! zeros satisfy.
//!
//! Zeros come from the Golub–Welsch route: eigenvalues of the symmetric
//! Jacobi matrix of the monic recurrence, followed by a few Newton steps
//! on an overflow-safe rescaled recurrence.

use serde::Serialize;

use crate::error::{invalid, numeric, Result};
use crate::matkernel::{eigvalsh, SymMatrix};

pub const MAX_DEGREE: usize = 200;
const NEWTON_STEPS: usize = 5;
const RESCALE_AT: f64 = 1e150;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Hermite,
    Laguerre,
}

/// Zeros of one polynomial, strictly descending.
#[derive(Clone, Debug, Serialize)]
pub struct ZeroSet {
    pub family: Family,
    pub degree: usize,
    /// Laguerre parameter; `None` for Hermite.
    pub alpha: Option<f64>,
    pub zeros: Vec<f64>,
}

impl ZeroSet {
    /// Largest Newton correction |P/P′| over all zeros, relative to
    /// `max(1, |z|)`.
    pub fn max_residual(&self) -> f64 {
        self.zeros
            .iter()
            .map(|&z| {
                let step = match self.family {
                    Family::Hermite => hermite_newton_step(self.degree, z),
                    Family::Laguerre => {
                        laguerre_newton_step(self.degree, self.alpha.unwrap_or(0.0), z)
                    }
                };
                step.abs() / z.abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// `(H_n(x), H_n′(x))` from the three-term recurrence
/// `H_{m+1} = 2x H_m − 2m H_{m−1}`.
pub fn hermite_eval(n: usize, x: f64) -> (f64, f64) {
    let (p, q) = hermite_pair(n, x);
    (p, 2.0 * n as f64 * q)
}

fn hermite_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for m in 0..n {
        let next = 2.0 * x * cur - 2.0 * m as f64 * prev;
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `L_n^{(α)}(x)` from `(m+1)L_{m+1} = (2m+1+α−x)L_m − (m+α)L_{m−1}`.
///
/// Any real α is accepted; α = −1 is used by the D-type identity.
pub fn laguerre_eval(n: usize, alpha: f64, x: f64) -> f64 {
    laguerre_pair(n, alpha, x).0
}

fn laguerre_pair(n: usize, alpha: f64, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for m in 0..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0 + alpha - x) * cur - (m + alpha) * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

/// `H_n(x) / H_n′(x)` using a recurrence that is rescaled whenever it
/// grows large, so the ratio stays finite for all degrees up to the cap.
fn hermite_newton_step(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for m in 0..n {
        let next = 2.0 * x * cur - 2.0 * m as f64 * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            prev /= RESCALE_AT;
            cur /= RESCALE_AT;
        }
    }
    cur / (2.0 * n as f64 * prev)
}

/// `L_n(x) / L_n′(x)` via `x L_n′ = n L_n − (n+α) L_{n−1}`, rescaled.
fn laguerre_newton_step(n: usize, alpha: f64, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for m in 0..n {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0 + alpha - x) * cur - (mf + alpha) * prev) / (mf + 1.0);
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            prev /= RESCALE_AT;
            cur /= RESCALE_AT;
        }
    }
    let nf = n as f64;
    x * cur / (nf * cur - (nf + alpha) * prev)
}

fn polish(zeros: &mut [f64], step: impl Fn(f64) -> f64) {
    let n = zeros.len();
    for i in 0..n {
        // Never let a correction move a zero past half the gap to a neighbour.
        let gap = [i.checked_sub(1), (i + 1 < n).then_some(i + 1)]
            .into_iter()
            .flatten()
            .map(|j| (zeros[i] - zeros[j]).abs())
            .fold(f64::INFINITY, f64::min);
        let mut x = zeros[i];
        for _ in 0..NEWTON_STEPS {
            let dx = step(x);
            if !dx.is_finite() || dx.abs() > 0.5 * gap {
                break;
            }
            x -= dx;
            if dx.abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        zeros[i] = x;
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DEGREE {
        Err(invalid(format!("degree must be in 1..={MAX_DEGREE}, got {n}")))
    } else {
        Ok(())
    }
}

fn check_strictly_descending(z: &[f64]) -> Result<()> {
    if z.windows(2).all(|w| w[0] > w[1]) {
        Ok(())
    } else {
        Err(numeric("computed zeros are not strictly separated"))
    }
}

/// Zeros of `H_n`, descending and exactly antisymmetric.
pub fn hermite_zeros(n: usize) -> Result<ZeroSet> {
    check_degree(n)?;
    let jacobi = SymMatrix::from_fn(n, |i, j| {
        if j == i + 1 {
            (j as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let mut z = eigvalsh(&jacobi)?;
    z.reverse();
    polish(&mut z, |x| hermite_newton_step(n, x));
    for i in 0..n / 2 {
        let m = 0.5 * (z[i] - z[n - 1 - i]);
        z[i] = m;
        z[n - 1 - i] = -m;
    }
    if n % 2 == 1 {
        z[n / 2] = 0.0;
    }
    check_strictly_descending(&z)?;
    Ok(ZeroSet {
        family: Family::Hermite,
        degree: n,
        alpha: None,
        zeros: z,
    })
}

/// Zeros of `L_n^{(α)}`, α > −1, descending and strictly positive.
pub fn laguerre_zeros(n: usize, alpha: f64) -> Result<ZeroSet> {
    check_degree(n)?;
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(invalid(format!("Laguerre parameter must exceed -1, got {alpha}")));
    }
    let jacobi = SymMatrix::from_fn(n, |i, j| {
        if i == j {
            2.0 * i as f64 + alpha + 1.0
        } else if j == i + 1 {
            (j as f64 * (j as f64 + alpha)).sqrt()
        } else {
            0.0
        }
    });
    let mut z = eigvalsh(&jacobi)?;
    z.reverse();
    polish(&mut z, |x| laguerre_newton_step(n, alpha, x));
    check_strictly_descending(&z)?;
    if z[n - 1] <= 0.0 {
        return Err(numeric("Laguerre zero is not positive"));
    }
    Ok(ZeroSet {
        family: Family::Laguerre,
        degree: n,
        alpha: Some(alpha),
        zeros: z,
    })
}

/// Zeros of `L_n^{(−1)} = −(x/n) L_{n−1}^{(1)}`: those of `L_{n−1}^{(1)}`
/// followed by 0.
pub fn laguerre_minus_one_zeros(n: usize) -> Result<Vec<f64>> {
    check_degree(n)?;
    let mut z = if n > 1 {
        laguerre_zeros(n - 1, 1.0)?.zeros
    } else {
        Vec::new()
    };
    z.push(0.0);
    Ok(z)
}

/// `Σ 1/z_l` over the zeros of `L_n^{(α)}`; equals `n/(α+1)`.
pub fn inverse_zero_sum(n: usize, alpha: f64) -> Result<f64> {
    Ok(laguerre_zeros(n, alpha)?.zeros.iter().map(|z| 1.0 / z).sum())
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityEntry {
    pub name: String,
    pub value: f64,
    pub target: f64,
    pub deviation: f64,
    pub tolerance: f64,
    /// Informational entries are reported but never counted as failures.
    pub asserted: bool,
}

impl IdentityEntry {
    fn new(name: &str, value: f64, target: f64, tolerance: f64, asserted: bool) -> Self {
        IdentityEntry {
            name: name.to_string(),
            value,
            target,
            deviation: (value - target).abs(),
            tolerance,
            asserted,
        }
    }

    pub fn holds(&self) -> bool {
        !self.asserted || self.deviation <= self.tolerance
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub family: Family,
    pub degree: usize,
    /// ν for the Laguerre report (the zeros are those of `L_N^{(ν−1)}`).
    pub nu: Option<f64>,
    pub entries: Vec<IdentityEntry>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.entries.iter().all(IdentityEntry::holds)
    }

    pub fn entry(&self, name: &str) -> Option<&IdentityEntry> {
        self.entries.iter().find(|e| e.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IdentityFamily {
    Hermite,
    /// Zeros of `L_N^{(ν−1)}` and the vector `r_i = √(2 z_i)`.
    Laguerre { nu: f64 },
}

fn sum_j_ln_j(n: usize) -> f64 {
    (1..=n).map(|j| j as f64 * (j as f64).ln()).sum()
}

pub fn zero_identity_report(family: IdentityFamily, n: usize) -> Result<IdentityReport> {
    let nf = n as f64;
    match family {
        IdentityFamily::Hermite => {
            let z = hermite_zeros(n)?.zeros;
            let sum_sq: f64 = z.iter().map(|v| v * v).sum();
            let mut potential = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    potential += 2.0 * (z[i] - z[j]).ln();
                }
            }
            let pairs = nf * (nf - 1.0) / 2.0;
            Ok(IdentityReport {
                family: Family::Hermite,
                degree: n,
                nu: None,
                entries: vec![
                    IdentityEntry::new("sum_sq", sum_sq, pairs, 1e-10, true),
                    IdentityEntry::new(
                        "log_potential",
                        potential,
                        -pairs * std::f64::consts::LN_2 + sum_j_ln_j(n),
                        1e-8,
                        true,
                    ),
                    IdentityEntry::new("sum", z.iter().sum(), 0.0, 1e-12, true),
                ],
            })
        }
        IdentityFamily::Laguerre { nu } => {
            if !(nu > 0.0) {
                return Err(invalid(format!("nu must be positive, got {nu}")));
            }
            let alpha = nu - 1.0;
            let z = laguerre_zeros(n, alpha)?.zeros;
            let r_sq: Vec<f64> = z.iter().map(|v| 2.0 * v).collect();
            let norm_sq: f64 = r_sq.iter().sum();
            let mut potential = -norm_sq / 2.0 + nu * r_sq.iter().map(|v| v.ln()).sum::<f64>();
            for i in 0..n {
                for j in i + 1..n {
                    potential += 2.0 * (r_sq[i] - r_sq[j]).ln();
                }
            }
            let m = nf * (nf + nu - 1.0);
            let potential_target = m * (std::f64::consts::LN_2 - 1.0)
                + sum_j_ln_j(n)
                + (1..=n)
                    .map(|j| {
                        let a = nu + j as f64 - 1.0;
                        a * a.ln()
                    })
                    .sum::<f64>();
            let vieta: f64 = z.iter().sum();
            let inv: f64 = z.iter().map(|v| 1.0 / v).sum();
            Ok(IdentityReport {
                family: Family::Laguerre,
                degree: n,
                nu: Some(nu),
                entries: vec![
                    IdentityEntry::new("r_norm_sq", norm_sq, 2.0 * m, 1e-9 * 2.0 * m, true),
                    IdentityEntry::new("r_norm_sq_printed", norm_sq, m, 0.0, false),
                    IdentityEntry::new("log_potential", potential, potential_target, 1e-8, true),
                    IdentityEntry::new("zero_sum", vieta, m, 1e-9 * m, true),
                    IdentityEntry::new("inverse_zero_sum", inv, nf / nu, 1e-10, true),
                ],
            })
        }
    }
}
