//! Objects that appear when the multiplicities freeze: peak vectors,
//! frozen covariance matrices, the anisotropic rescaling maps and the
//! half-space limit laws of the rescaled Cauchy–Bessel variables.
//!
//! The limit laws are assembled from their mixture representation
//! `∫ N(√s·c, s·AΣA) dμ_√2(s)`, where `c` is the centre vector and `A` the
//! projection onto `c⊥`. For type A the centre is `√2·z`, since the Bessel
//! CLT centres at `√(2k)·z`; for types B and D it is `r` itself.
//! Integrating out `s` along the centre direction gives, with
//! `R² = ‖c‖²`, `u = ⟨y,c⟩/R`, `q = yᵀΣ⁻¹y` and `λ` the eigenvalue of
//! `Σ⁻¹` at `c`,
//!
//! ```text
//! f(y) = 2 R^N (2π)^{−N/2} √(det Σ⁻¹ / λ) e^{R²λ/2} · exp(−R²(q+1)/(2u²)) · u^{−(N+1)}
//! ```
//!
//! on `u > 0`. The one-sided B law doubles this on `y_N > 0`.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ensembles::{make_law, Flavor, MultiplicitySpec, RootSystem};
use crate::error::{domain, invalid, numeric, Error, Result};
use crate::matkernel::{cholesky, dot, eigh, invert_spd, norm_sq, EigenDecomp, Matrix, SymMatrix};
use crate::orthopoly::{hermite_zeros, laguerre_zeros};

const STATIONARITY_TOL: f64 = 1e-8;

/// The frozen configuration: zeros of `H_N` (type A) or the vector `r`
/// with `r_i² = 2 z_i^{(ν−1)}` (type B; type D pads the `N−1`, `ν = 2`
/// vector with a zero).
#[derive(Clone, Debug, Serialize)]
pub struct PeakVector {
    pub system: RootSystem,
    pub n: usize,
    pub nu: Option<f64>,
    pub coords: Vec<f64>,
}

fn check_nu(nu: Option<f64>) -> Result<f64> {
    match nu {
        Some(v) if v > 0.0 && v.is_finite() => Ok(v),
        Some(v) => Err(invalid(format!("nu must be positive, got {v}"))),
        None => Err(invalid("type B needs nu")),
    }
}

fn b_peak_coords(n: usize, nu: f64) -> Result<Vec<f64>> {
    Ok(laguerre_zeros(n, nu - 1.0)?
        .zeros
        .into_iter()
        .map(|z| (2.0 * z).sqrt())
        .collect())
}

pub fn peak_vector(system: RootSystem, n: usize, nu: Option<f64>) -> Result<PeakVector> {
    let (coords, nu) = match system {
        RootSystem::A => {
            if n < 2 {
                return Err(invalid("type A peak vector needs N >= 2"));
            }
            (hermite_zeros(n)?.zeros, None)
        }
        RootSystem::B => {
            if n < 1 {
                return Err(invalid("type B peak vector needs N >= 1"));
            }
            let nu = check_nu(nu)?;
            (b_peak_coords(n, nu)?, Some(nu))
        }
        RootSystem::D => {
            if n < 2 {
                return Err(invalid("type D peak vector needs N >= 2"));
            }
            let mut r = b_peak_coords(n - 1, 2.0)?;
            r.push(0.0);
            (r, None)
        }
    };
    let peak = PeakVector {
        system,
        n,
        nu,
        coords,
    };
    let res = peak.stationarity_residual();
    if res > STATIONARITY_TOL {
        return Err(numeric(format!(
            "peak vector violates its fixed-point equations by {res:e}"
        )));
    }
    Ok(peak)
}

impl PeakVector {
    pub fn norm_sq(&self) -> f64 {
        norm_sq(&self.coords)
    }

    /// Largest violation of the maximiser's fixed-point equations, relative
    /// to `max(1, |coordinate|)`:
    /// A: `z_i = Σ_{j≠i} 1/(z_i−z_j)`;
    /// B: `r_i/2 = Σ_{j≠i} 2r_i/(r_i²−r_j²) + ν/r_i`;
    /// D: the B equations with `ν = 2` on the first `N−1` coordinates.
    pub fn stationarity_residual(&self) -> f64 {
        let c = &self.coords;
        let (len, nu) = match self.system {
            RootSystem::A => (self.n, 0.0),
            RootSystem::B => (self.n, self.nu.unwrap_or(0.0)),
            RootSystem::D => (self.n - 1, 2.0),
        };
        (0..len)
            .map(|i| {
                let (lhs, rhs) = match self.system {
                    RootSystem::A => (
                        c[i],
                        (0..len).filter(|&j| j != i).map(|j| 1.0 / (c[i] - c[j])).sum(),
                    ),
                    _ => (
                        c[i] / 2.0,
                        (0..len)
                            .filter(|&j| j != i)
                            .map(|j| 2.0 * c[i] / (c[i] * c[i] - c[j] * c[j]))
                            .sum::<f64>()
                            + nu / c[i],
                    ),
                };
                (lhs - rhs).abs() / c[i].abs().max(1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// The function maximised by the peak vector.
///
/// A: `Σ_{i<j} ln(y_i−y_j) − ‖y‖²/2`;
/// B: `2Σ_{i<j} ln(y_i²−y_j²) + 2νΣ ln y_i − ‖y‖²/2`;
/// D: the B form without the single-coordinate term, on the D chamber.
pub fn w_objective(system: RootSystem, y: &[f64], nu: Option<f64>) -> Result<f64> {
    if !system.in_chamber(y) {
        return Err(domain(format!("{y:?} is not inside the {system} chamber")));
    }
    let n = y.len();
    let mut s = -norm_sq(y) / 2.0;
    match system {
        RootSystem::A => {
            for i in 0..n {
                for j in i + 1..n {
                    s += (y[i] - y[j]).ln();
                }
            }
        }
        RootSystem::B | RootSystem::D => {
            for i in 0..n {
                for j in i + 1..n {
                    s += 2.0 * ((y[i] - y[j]) * (y[i] + y[j])).ln();
                }
            }
            if system == RootSystem::B {
                let nu = check_nu(nu)?;
                s += 2.0 * nu * y.iter().map(|v| v.ln()).sum::<f64>();
            }
        }
    }
    Ok(s)
}

/// Covariance of the Gaussian fluctuations around the peak.
#[derive(Clone, Debug, Serialize)]
pub struct FrozenCovariance {
    pub system: RootSystem,
    pub flavor: Flavor,
    pub n: usize,
    pub nu: Option<f64>,
    pub sigma_inv: SymMatrix,
    pub sigma: SymMatrix,
    pub eigen: EigenDecomp,
}

impl FrozenCovariance {
    /// The eigenvalue multiset of `Σ⁻¹` stated for this case, ascending.
    pub fn claimed_spectrum(&self) -> Vec<f64> {
        let n = self.n;
        let mut v: Vec<f64> = match (self.system, self.flavor) {
            (RootSystem::A, Flavor::Bessel) => (1..=n).map(|i| i as f64).collect(),
            (RootSystem::A, Flavor::Cauchy) => (1..=n)
                .map(|i| if i == 2 { 4.0 } else { i as f64 } * (n as f64 + 1.0))
                .collect(),
            (RootSystem::B, _) => (1..=n).map(|i| 2.0 * i as f64).collect(),
            (RootSystem::D, _) => (1..n)
                .map(|i| 2.0 * i as f64)
                .chain(std::iter::once(n as f64))
                .collect(),
        };
        v.sort_by(f64::total_cmp);
        v
    }

    /// Largest absolute difference between computed and claimed spectra.
    pub fn spectrum_deviation(&self) -> f64 {
        self.eigen
            .eigenvalues
            .iter()
            .zip(self.claimed_spectrum())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> f64 {
        self.eigen.determinant()
    }

    pub fn claimed_determinant(&self) -> f64 {
        self.claimed_spectrum().iter().product()
    }
}

fn a_bessel_inverse(z: &[f64]) -> SymMatrix {
    let n = z.len();
    SymMatrix::from_fn(n, |i, j| {
        if i == j {
            1.0 + (0..n)
                .filter(|&l| l != i)
                .map(|l| (z[i] - z[l]).powi(-2))
                .sum::<f64>()
        } else {
            -(z[i] - z[j]).powi(-2)
        }
    })
}

fn a_cauchy_inverse(z: &[f64]) -> SymMatrix {
    let n = z.len();
    let nf = n as f64;
    let scale = 4.0 / (nf * (nf - 1.0));
    a_bessel_inverse(z)
        .add_outer(scale, z)
        .scaled(nf + 1.0)
}

fn bd_inverse(r: &[f64], nu: f64) -> SymMatrix {
    let n = r.len();
    SymMatrix::from_fn(n, |i, j| {
        if i == j {
            let mut s = 1.0;
            if nu != 0.0 {
                s += 2.0 * nu / (r[i] * r[i]);
            }
            for l in (0..n).filter(|&l| l != i) {
                s += 2.0 * (r[i] - r[l]).powi(-2) + 2.0 * (r[i] + r[l]).powi(-2);
            }
            s
        } else {
            2.0 * (r[i] + r[j]).powi(-2) - 2.0 * (r[i] - r[j]).powi(-2)
        }
    })
}

/// `Σ⁻¹` from its entry display, with `Σ` and the eigen-decomposition.
///
/// The Cauchy flavour exists for type A only.
pub fn sigma_inv(system: RootSystem, flavor: Flavor, n: usize, nu: Option<f64>) -> Result<FrozenCovariance> {
    if system == RootSystem::A && n < 2 {
        return Err(invalid("type A covariance needs N >= 2"));
    }
    if flavor == Flavor::Cauchy && system != RootSystem::A {
        return Err(invalid("the Cauchy covariance is defined for type A only"));
    }
    let peak = peak_vector(system, n, nu)?;
    let m = match (system, flavor) {
        (RootSystem::A, Flavor::Bessel) => a_bessel_inverse(&peak.coords),
        (RootSystem::A, Flavor::Cauchy) => a_cauchy_inverse(&peak.coords),
        (RootSystem::B, _) => bd_inverse(&peak.coords, peak.nu.unwrap_or(0.0)),
        (RootSystem::D, _) => bd_inverse(&peak.coords, 0.0),
    };
    let sigma = invert_spd(&m)?;
    let eigen = eigh(&m)?;
    Ok(FrozenCovariance {
        system,
        flavor,
        n,
        nu: peak.nu,
        sigma_inv: m,
        sigma,
        eigen,
    })
}

/// Normalised Hermite values `h_k(x) = H_k(x)/√(2^k k!)`, `k = 0..n`.
fn normalized_hermite(n: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n);
    h.push(1.0);
    if n > 1 {
        h.push(std::f64::consts::SQRT_2 * x);
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * h[k] - (kf / (kf + 1.0)).sqrt() * h[k - 1];
        h.push(next);
    }
    h
}

/// `Σ` for type A from the dual-orthogonal-polynomial closed form
/// `σ_ij = (−1)^{i+j} Σ_k h_k(z_i)h_k(z_j)/(N−k) / √(Σ_k h_k(z_i)² · Σ_l h_l(z_j)²)`.
pub fn sigma_closed_a(n: usize) -> Result<SymMatrix> {
    if n < 2 {
        return Err(invalid("closed-form covariance needs N >= 2"));
    }
    let z = hermite_zeros(n)?.zeros;
    let h: Vec<Vec<f64>> = z.iter().map(|&x| normalized_hermite(n, x)).collect();
    let norms: Vec<f64> = h.iter().map(|v| norm_sq(v)).collect();
    Ok(SymMatrix::from_fn(n, |i, j| {
        let num: f64 = (0..n).map(|k| h[i][k] * h[j][k] / (n - k) as f64).sum();
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        sign * num / (norms[i] * norms[j]).sqrt()
    }))
}

/// `Σ_Cauchy = (Σ − zzᵀ/(4‖z‖²)) / (N+1)`, the inverse of
/// `(N+1)(Σ⁻¹ + 2zzᵀ/‖z‖²)` by Sherman–Morrison with `Σz = z/2`.
pub fn sigma_cauchy_relation_a(n: usize) -> Result<SymMatrix> {
    let sigma = sigma_closed_a(n)?;
    let z = hermite_zeros(n)?.zeros;
    let zz = norm_sq(&z);
    Ok(sigma.add_outer(-1.0 / (4.0 * zz), &z).scaled(1.0 / (n as f64 + 1.0)))
}

/// The variant with `(−1)^{i+j}` applied to the rank-one correction as
/// well. Differs from [`sigma_cauchy_relation_a`] off the diagonal; kept
/// for comparison only.
pub fn sigma_cauchy_printed_a(n: usize) -> Result<SymMatrix> {
    let sigma = sigma_closed_a(n)?;
    let z = hermite_zeros(n)?.zeros;
    let nf = n as f64;
    Ok(SymMatrix::from_fn(n, |i, j| {
        let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        (sigma.get(i, j) - sign * z[i] * z[j] / (2.0 * nf * (nf - 1.0))) / (nf + 1.0)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Inverse,
}

/// `φ_k(y) = y + (1/√k − 1) p(y)` (forward) or its inverse
/// `y + (√k − 1) p(y)`, with `p` the projection onto the peak direction.
pub fn rescale(y: &[f64], k: f64, peak: &[f64], direction: Direction) -> Result<Vec<f64>> {
    if !(k >= 1.0) || !k.is_finite() {
        return Err(invalid(format!("rescaling needs k >= 1, got {k}")));
    }
    if y.len() != peak.len() {
        return Err(invalid("point and peak have different dimensions"));
    }
    let pn = norm_sq(peak);
    if pn == 0.0 {
        return Err(invalid("peak vector is zero"));
    }
    let factor = match direction {
        Direction::Forward => 1.0 / k.sqrt() - 1.0,
        Direction::Inverse => k.sqrt() - 1.0,
    };
    let c = factor * dot(y, peak) / pn;
    Ok(y.iter().zip(peak).map(|(a, p)| a + c * p).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitSystem {
    A,
    B,
    D,
    /// Type B with `(k₁, k₂)`, `k₂ → ∞` at fixed `k₁`: the D limit folded
    /// onto `y_N ≥ 0`.
    BOneSided,
}

impl FromStr for LimitSystem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "a" => Ok(LimitSystem::A),
            "b" => Ok(LimitSystem::B),
            "d" => Ok(LimitSystem::D),
            "b-one-sided" | "bonesided" => Ok(LimitSystem::BOneSided),
            _ => Err(invalid(format!("unknown limit system '{s}'"))),
        }
    }
}

impl fmt::Display for LimitSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LimitSystem::A => "A",
            LimitSystem::B => "B",
            LimitSystem::D => "D",
            LimitSystem::BOneSided => "B-one-sided",
        })
    }
}

/// Weak limit of the rescaled Cauchy–Bessel variables.
#[derive(Clone, Debug, Serialize)]
pub struct LimitLaw {
    pub system: LimitSystem,
    pub n: usize,
    pub nu: Option<f64>,
    pub peak: PeakVector,
    pub bessel_cov: FrozenCovariance,
    /// `I − peak·peakᵀ/‖peak‖²`.
    pub projection_perp: SymMatrix,
    pub peak_norm_sq: f64,
    /// Mean direction of the mixture: `√2·z` for A, `r` otherwise.
    pub center: Vec<f64>,
    pub center_norm_sq: f64,
    /// Eigenvalue of `Σ⁻¹` belonging to the centre direction.
    pub center_eigenvalue: f64,
    /// Cholesky factor of `AΣA` (rank `N−1`).
    pub perp_factor: Matrix,
    pub log_norm: f64,
}

pub fn limit_law(system: LimitSystem, n: usize, nu: Option<f64>) -> Result<LimitLaw> {
    let (root, center_scale) = match system {
        LimitSystem::A => (RootSystem::A, std::f64::consts::SQRT_2),
        LimitSystem::B => (RootSystem::B, 1.0),
        LimitSystem::D | LimitSystem::BOneSided => (RootSystem::D, 1.0),
    };
    if system == LimitSystem::BOneSided && n < 2 {
        return Err(invalid("the one-sided limit needs N >= 2"));
    }
    let peak = peak_vector(root, n, nu)?;
    let cov = sigma_inv(root, Flavor::Bessel, n, peak.nu)?;
    let peak_norm_sq = peak.norm_sq();
    let projection_perp = SymMatrix::identity(n).add_outer(-1.0 / peak_norm_sq, &peak.coords);
    let center: Vec<f64> = peak.coords.iter().map(|v| center_scale * v).collect();
    let center_norm_sq = center_scale * center_scale * peak_norm_sq;

    let sc = cov.sigma_inv.mul_vec(&center);
    let lambda = dot(&center, &sc) / center_norm_sq;
    let off: f64 = sc
        .iter()
        .zip(&center)
        .map(|(a, c)| (a - lambda * c).abs())
        .fold(0.0, f64::max);
    if off > 1e-8 * lambda * center_norm_sq.sqrt() {
        return Err(numeric("centre is not an eigenvector of the inverse covariance"));
    }

    let perp_cov = cov.sigma.congruence(&projection_perp);
    let perp_factor = cholesky(&perp_cov)?;

    let nf = n as f64;
    let log_det: f64 = cov.eigen.eigenvalues.iter().map(|v| v.ln()).sum();
    let mut log_norm = LN_2 + nf / 2.0 * center_norm_sq.ln() - nf / 2.0 * (2.0 * PI).ln()
        + 0.5 * (log_det - lambda.ln())
        + center_norm_sq * lambda / 2.0;
    if system == LimitSystem::BOneSided {
        log_norm += LN_2;
    }
    Ok(LimitLaw {
        system,
        n,
        nu: peak.nu,
        peak,
        bessel_cov: cov,
        projection_perp,
        peak_norm_sq,
        center,
        center_norm_sq,
        center_eigenvalue: lambda,
        perp_factor,
        log_norm,
    })
}

impl LimitLaw {
    /// Whether `y` is in the open support.
    pub fn in_support(&self, y: &[f64]) -> bool {
        dot(y, &self.peak.coords) > 0.0
            && (self.system != LimitSystem::BOneSided || y[self.n - 1] > 0.0)
    }

    /// `⟨y, c⟩ / ‖c‖`, the length of the projection onto the centre line.
    pub fn projection_length(&self, y: &[f64]) -> f64 {
        dot(y, &self.center) / self.center_norm_sq.sqrt()
    }

    pub fn log_density(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.n {
            return Err(invalid(format!("point has dimension {}, law has {}", y.len(), self.n)));
        }
        if !self.in_support(y) {
            return Err(domain(format!("{y:?} is outside the open support")));
        }
        let u = self.projection_length(y);
        let q = self.bessel_cov.sigma_inv.quad_form(y);
        let r2 = self.center_norm_sq;
        Ok(self.log_norm - r2 * (q + 1.0) / (2.0 * u * u) - (self.n as f64 + 1.0) * u.ln())
    }
}

pub fn limit_density(law: &LimitLaw, y: &[f64]) -> Result<f64> {
    law.log_density(y).map(f64::exp)
}

/// The B and D limit densities in their printed form, which writes `R̃²`
/// for `‖r‖²` with `R̃² = N(N+ν−1)` (B) or `N(N−1)` (D):
///
/// ```text
/// B: √2 √N! R̃^N e^{R̃²} π^{−N/2} · exp(−R̃²(q+1)/(2u²)) · u^{−(N+1)}
/// D:    √N! R̃^N e^{R̃²} π^{−N/2} · exp(−R̃² q/(2u²) − R̃²/u²) · u^{−(N+1)}
/// ```
///
/// Since `‖r‖² = 2R̃²`, neither integrates to one; compare [`limit_density`].
/// Type A has no printed variant here.
pub fn printed_limit_log_density(law: &LimitLaw, y: &[f64]) -> Result<f64> {
    if law.system == LimitSystem::A {
        return Err(invalid("no printed variant for type A"));
    }
    if y.len() != law.n {
        return Err(invalid(format!("point has dimension {}, law has {}", y.len(), law.n)));
    }
    if !law.in_support(y) {
        return Err(domain(format!("{y:?} is outside the open support")));
    }
    let nf = law.n as f64;
    let u = law.projection_length(y);
    let q = law.bessel_cov.sigma_inv.quad_form(y);
    let log_fact: f64 = (1..=law.n).map(|i| (i as f64).ln()).sum();
    let common = 0.5 * log_fact - nf / 2.0 * PI.ln() - (nf + 1.0) * u.ln();
    let v = match law.system {
        LimitSystem::B => {
            let r2 = nf * (nf + law.nu.unwrap_or(1.0) - 1.0);
            common + 0.5 * LN_2 + nf / 2.0 * r2.ln() + r2 - r2 * (q + 1.0) / (2.0 * u * u)
        }
        _ => {
            let r2 = nf * (nf - 1.0);
            let fold = if law.system == LimitSystem::BOneSided { LN_2 } else { 0.0 };
            common + fold + nf / 2.0 * r2.ln() + r2 - r2 * q / (2.0 * u * u) - r2 / (u * u)
        }
    };
    Ok(v)
}

/// The N = 2 type-A limit in the rotated coordinates
/// `x₁ = (y₁+y₂)/√2`, `x̃₂ = (y₁−y₂)/√2`: `(2/π) e^{−(1+x₁²)/x̃₂²} / x̃₂³`.
pub fn rotated_limit_density_a2(x1: f64, x2: f64) -> Result<f64> {
    if !(x2 > 0.0) {
        return Err(domain("rotated coordinate must be positive"));
    }
    Ok(2.0 / PI * (-(1.0 + x1 * x1) / (x2 * x2)).exp() / x2.powi(3))
}

fn gaussian_log_density(sigma_inv: &SymMatrix, x: &[f64]) -> Result<f64> {
    let e = eigh(sigma_inv)?;
    let log_det: f64 = e.eigenvalues.iter().map(|v| v.ln()).sum();
    Ok(-(x.len() as f64) / 2.0 * (2.0 * PI).ln() + 0.5 * log_det - 0.5 * sigma_inv.quad_form(x))
}

/// `f̃_k(x)/f(x) · k^{1/2}(N+1)^{N/2}√(N(N−1)) e^{(N+1)/2}` where `f̃_k` is the
/// type-A Cauchy–Bessel density shifted by its mode and `f` is the
/// `N(0, Σ_Cauchy)` density.
pub fn ratio_constant_a(n: usize, k: f64, x: &[f64]) -> Result<f64> {
    if n < 2 {
        return Err(invalid("the ratio needs N >= 2"));
    }
    if x.len() != n {
        return Err(invalid("offset has the wrong dimension"));
    }
    if !(k > 0.0) {
        return Err(invalid("the ratio needs k > 0"));
    }
    let law = make_law(MultiplicitySpec::a(n, k)?, Flavor::Cauchy, std::f64::consts::SQRT_2)?;
    let z = hermite_zeros(n)?.zeros;
    let s = (2.0 * k / (n as f64 + 1.0)).sqrt();
    let point: Vec<f64> = x.iter().zip(&z).map(|(a, b)| a + s * b).collect();
    let log_shifted = law.log_density(&point)?;
    let log_normal = gaussian_log_density(&a_cauchy_inverse(&z), x)?;
    let nf = n as f64;
    let log_factor =
        0.5 * k.ln() + nf / 2.0 * (nf + 1.0).ln() + 0.5 * (nf * (nf - 1.0)).ln() + (nf + 1.0) / 2.0;
    Ok((log_shifted - log_normal + log_factor).exp())
}

/// The value `ratio_constant_a` actually tends to as `k → ∞`:
/// `(N+1)^{(N+1)/2} exp(2(N+1)⟨x,z⟩²/‖z‖²)`. The limiting quadratic form of
/// the shifted density is `(N+1)(Σ⁻¹ − 2zzᵀ/‖z‖²)`, singular along `z`,
/// rather than `Σ_Cauchy⁻¹`.
pub fn ratio_limit_a(n: usize, x: &[f64]) -> Result<f64> {
    if n < 2 || x.len() != n {
        return Err(invalid("ratio_limit_a needs N >= 2 and an offset of length N"));
    }
    let z = hermite_zeros(n)?.zeros;
    let nf = n as f64;
    let p = dot(x, &z);
    Ok(((nf + 1.0) / 2.0 * (nf + 1.0).ln() + 2.0 * (nf + 1.0) * p * p / norm_sq(&z)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn peak_examples() {
        let a = peak_vector(RootSystem::A, 2, None).unwrap();
        assert!((a.coords[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(a.coords[1], -a.coords[0]);
        let b = peak_vector(RootSystem::B, 1, Some(2.0)).unwrap();
        assert!((b.coords[0] - 2.0).abs() < 1e-15);
        let d = peak_vector(RootSystem::D, 2, None).unwrap();
        assert!((d.coords[0] - 2.0).abs() < 1e-15);
        assert_eq!(d.coords[1], 0.0);
        assert!(peak_vector(RootSystem::A, 1, None).is_err());
        assert!(peak_vector(RootSystem::B, 2, Some(0.0)).is_err());
        assert!(peak_vector(RootSystem::B, 2, None).is_err());
    }

    #[test]
    fn peak_invariants() {
        for n in 2..=30 {
            let a = peak_vector(RootSystem::A, n, None).unwrap();
            let nf = n as f64;
            assert!((a.norm_sq() - nf * (nf - 1.0) / 2.0).abs() < 1e-10 * nf * nf);
            for nu in [0.5, 1.0, 2.0, 5.0] {
                let b = peak_vector(RootSystem::B, n, Some(nu)).unwrap();
                assert!(b.coords.iter().all(|&v| v > 0.0));
                let target = 2.0 * nf * (nf + nu - 1.0);
                assert!((b.norm_sq() - target).abs() < 1e-9 * target);
            }
            let d = peak_vector(RootSystem::D, n, None).unwrap();
            assert!((d.norm_sq() - 2.0 * nf * (nf - 1.0)).abs() < 1e-9 * nf * nf);
        }
    }

    #[test]
    fn w_objective_examples() {
        let z = peak_vector(RootSystem::A, 2, None).unwrap().coords;
        let w = w_objective(RootSystem::A, &z, None).unwrap();
        assert!((w - (0.5 * LN_2 - 0.5)).abs() < 1e-15);
        let w = w_objective(RootSystem::B, &[2.0], Some(2.0)).unwrap();
        assert!((w - (4.0 * LN_2 - 2.0)).abs() < 1e-15);
        assert!(w_objective(RootSystem::A, &[1.0, 1.0], None).is_err());
        assert!(w_objective(RootSystem::B, &[1.0, -1.0], Some(1.0)).is_err());
    }

    #[test]
    fn peaks_maximise_objective() {
        let cases: Vec<(RootSystem, usize, Option<f64>)> = vec![
            (RootSystem::A, 4, None),
            (RootSystem::B, 3, Some(1.5)),
            (RootSystem::D, 3, None),
        ];
        for (sys, n, nu) in cases {
            let p = peak_vector(sys, n, nu).unwrap().coords;
            let w0 = w_objective(sys, &p, nu).unwrap();
            for dir in 0..n {
                for eps in [1e-3, -1e-3] {
                    let mut y = p.clone();
                    y[dir] += eps;
                    y[0] += 0.3 * eps;
                    if let Ok(w) = w_objective(sys, &y, nu) {
                        assert!(w < w0, "{sys:?} dir={dir}");
                    }
                }
            }
        }
    }

    #[test]
    fn sigma_inv_examples() {
        let a = sigma_inv(RootSystem::A, Flavor::Bessel, 2, None).unwrap();
        let expected = SymMatrix::from_rows(&[vec![1.5, -0.5], vec![-0.5, 1.5]]).unwrap();
        assert!(a.sigma_inv.max_abs_diff(&expected) < 1e-15);
        assert!((a.determinant() - 2.0).abs() < 1e-14);

        let c = sigma_inv(RootSystem::A, Flavor::Cauchy, 2, None).unwrap();
        let expected = SymMatrix::from_rows(&[vec![7.5, -4.5], vec![-4.5, 7.5]]).unwrap();
        assert!(c.sigma_inv.max_abs_diff(&expected) < 1e-14);
        assert!((c.eigen.eigenvalues[0] - 3.0).abs() < 1e-13);
        assert!((c.eigen.eigenvalues[1] - 12.0).abs() < 1e-13);

        for nu in [0.5, 2.0, 7.0] {
            let b = sigma_inv(RootSystem::B, Flavor::Bessel, 1, Some(nu)).unwrap();
            assert!((b.sigma_inv.get(0, 0) - 2.0).abs() < 1e-14);
        }

        let d = sigma_inv(RootSystem::D, Flavor::Bessel, 2, None).unwrap();
        assert!(d.sigma_inv.max_abs_diff(&SymMatrix::from_diag(&[2.0, 2.0])) < 1e-14);
        assert!(sigma_inv(RootSystem::B, Flavor::Cauchy, 2, Some(1.0)).is_err());
    }

    #[test]
    fn spectra_match_claims() {
        for n in 2..=30 {
            let nf = n as f64;
            let fact: f64 = (1..=n).map(|i| i as f64).product();
            let a = sigma_inv(RootSystem::A, Flavor::Bessel, n, None).unwrap();
            assert!(a.spectrum_deviation() < 1e-8, "A n={n}");
            assert!((a.determinant() / fact - 1.0).abs() < 1e-10);
            let c = sigma_inv(RootSystem::A, Flavor::Cauchy, n, None).unwrap();
            assert!(c.spectrum_deviation() < 1e-8 * (nf + 1.0), "cauchy n={n}");
            let det = 2.0 * (nf + 1.0).powi(n as i32) * fact;
            assert!((c.determinant() / det - 1.0).abs() < 1e-10);
            for nu in [0.5, 1.0, 2.0, 5.0] {
                let b = sigma_inv(RootSystem::B, Flavor::Bessel, n, Some(nu)).unwrap();
                assert!(b.spectrum_deviation() < 1e-8, "B n={n} ν={nu}");
            }
            let d = sigma_inv(RootSystem::D, Flavor::Bessel, n, None).unwrap();
            assert!((d.sigma_inv.get(n - 1, n - 1) - nf).abs() < 1e-10);
            for i in 0..n - 1 {
                assert!(d.sigma_inv.get(i, n - 1).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn d_block_is_b_with_nu_two() {
        for n in 2..=12 {
            let d = sigma_inv(RootSystem::D, Flavor::Bessel, n, None).unwrap();
            let b = sigma_inv(RootSystem::B, Flavor::Bessel, n - 1, Some(2.0)).unwrap();
            assert!(d.sigma_inv.leading_block(n - 1).max_abs_diff(&b.sigma_inv) < 1e-10);
        }
    }

    #[test]
    fn eigenvector_facts_a() {
        for n in 2..=30 {
            let a = sigma_inv(RootSystem::A, Flavor::Bessel, n, None).unwrap();
            let z = hermite_zeros(n).unwrap().zeros;
            let one = vec![1.0; n];
            let s1 = a.sigma_inv.mul_vec(&one);
            let sz = a.sigma_inv.mul_vec(&z);
            for i in 0..n {
                assert!((s1[i] - 1.0).abs() < 1e-8);
                assert!((sz[i] - 2.0 * z[i]).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn closed_form_sigma() {
        let s = sigma_closed_a(2).unwrap();
        assert!((s.get(0, 0) - 0.75).abs() < 1e-15);
        assert!((s.get(0, 1) - 0.25).abs() < 1e-15);
        for n in 2..=20 {
            let inv = sigma_inv(RootSystem::A, Flavor::Bessel, n, None).unwrap().sigma;
            let closed = sigma_closed_a(n).unwrap();
            assert!(closed.sub(&inv).frobenius_norm() < 1e-8, "n={n}");
        }
    }

    #[test]
    fn cauchy_sigma_forms() {
        let s = sigma_cauchy_relation_a(2).unwrap();
        let expected =
            SymMatrix::from_rows(&[vec![5.0 / 24.0, 1.0 / 8.0], vec![1.0 / 8.0, 5.0 / 24.0]]).unwrap();
        assert!(s.max_abs_diff(&expected) < 1e-15);
        let printed = sigma_cauchy_printed_a(2).unwrap();
        assert!((printed.get(0, 1) - 1.0 / 24.0).abs() < 1e-15);
        assert!((printed.get(0, 0) - 5.0 / 24.0).abs() < 1e-15);
        for n in 2..=20 {
            let direct = sigma_inv(RootSystem::A, Flavor::Cauchy, n, None).unwrap().sigma;
            let rel = sigma_cauchy_relation_a(n).unwrap();
            assert!(rel.sub(&direct).frobenius_norm() < 1e-9, "n={n}");
        }
    }

    #[test]
    fn cauchy_inverse_eigenvectors() {
        for n in 2..=10 {
            let c = sigma_inv(RootSystem::A, Flavor::Cauchy, n, None).unwrap().sigma_inv;
            let z = hermite_zeros(n).unwrap().zeros;
            let nf = n as f64;
            let cz = c.mul_vec(&z);
            let c1 = c.mul_vec(&vec![1.0; n]);
            for i in 0..n {
                assert!((cz[i] - 4.0 * (nf + 1.0) * z[i]).abs() < 1e-9 * nf * nf);
                assert!((c1[i] - (nf + 1.0)).abs() < 1e-9 * nf);
            }
        }
    }

    #[test]
    fn rescale_examples() {
        let p = peak_vector(RootSystem::A, 3, None).unwrap().coords;
        let f = rescale(&p, 4.0, &p, Direction::Forward).unwrap();
        for (a, b) in f.iter().zip(&p) {
            assert!((a - b / 2.0).abs() < 1e-15);
        }
        let perp = vec![1.0, 1.0, 1.0];
        assert_eq!(rescale(&perp, 9.0, &p, Direction::Forward).unwrap(), perp);
        assert!(rescale(&perp, 0.5, &p, Direction::Forward).is_err());
    }

    #[test]
    fn limit_law_examples() {
        let a = limit_law(LimitSystem::A, 2, None).unwrap();
        assert!((a.peak_norm_sq - 1.0).abs() < 1e-15);
        assert!(a.in_support(&[1.0, 0.0]) && !a.in_support(&[0.0, 1.0]));
        let b = limit_law(LimitSystem::B, 1, Some(2.0)).unwrap();
        assert!((b.peak_norm_sq - 4.0).abs() < 1e-14);
        let o = limit_law(LimitSystem::BOneSided, 2, None).unwrap();
        assert!(o.in_support(&[1.0, 0.5]));
        assert!(!o.in_support(&[1.0, -0.5]));
        assert!(!o.in_support(&[-1.0, 0.5]));
        for law in [&a, &b, &o] {
            let p = &law.projection_perp;
            let pp = SymMatrix::symmetrize(&p.mul(p)).unwrap();
            assert!(pp.max_abs_diff(p) < 1e-12);
            assert!(p.mul_vec(&law.peak.coords).iter().all(|v| v.abs() < 1e-12));
            assert_eq!(law.peak_norm_sq, law.peak.norm_sq());
            assert!((law.center_eigenvalue - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn a2_limit_matches_rotated_example() {
        let law = limit_law(LimitSystem::A, 2, None).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for &(x1, x2) in &[(0.0, 1.0), (0.3, 0.7), (-2.0, 3.5), (1.1, 0.2)] {
            let y = [s * (x1 + x2), s * (x1 - x2)];
            let f = limit_density(&law, &y).unwrap();
            let g = rotated_limit_density_a2(x1, x2).unwrap();
            assert!((f - g).abs() <= 1e-10 * g.max(1e-300), "({x1},{x2}): {f} vs {g}");
        }
        let v = rotated_limit_density_a2(0.0, 1.0).unwrap();
        assert!((v - 2.0 / (PI * std::f64::consts::E)).abs() < 1e-15);
    }

    #[test]
    fn one_sided_is_twice_d_on_quarter_space() {
        let d = limit_law(LimitSystem::D, 3, None).unwrap();
        let o = limit_law(LimitSystem::BOneSided, 3, None).unwrap();
        for y in [[2.0, 1.0, 0.3], [1.0, 0.2, 2.0], [0.5, 0.5, 0.1]] {
            let ratio = limit_density(&o, &y).unwrap() / limit_density(&d, &y).unwrap();
            assert!((ratio - 2.0).abs() < 1e-12);
            // the D law is symmetric in the last coordinate
            let flipped = [y[0], y[1], -y[2]];
            let a = limit_density(&d, &y).unwrap();
            assert!((limit_density(&d, &flipped).unwrap() - a).abs() < 1e-12 * a);
        }
    }

    #[test]
    fn density_outside_support_is_error() {
        let law = limit_law(LimitSystem::B, 2, Some(2.0)).unwrap();
        assert!(matches!(law.log_density(&[-1.0, -1.0]), Err(Error::Domain(_))));
        assert!(matches!(law.log_density(&[1.0]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn ratio_is_finite_and_tends_to_corrected_limit() {
        for n in [2, 3] {
            let x = vec![0.0; n];
            let r = ratio_constant_a(n, 1e6, &x).unwrap();
            let lim = ratio_limit_a(n, &x).unwrap();
            assert!((r / lim - 1.0).abs() < 0.02, "n={n}: {r} vs {lim}");
        }
        let x = [0.05, -0.02];
        let r = ratio_constant_a(2, 1e6, &x).unwrap();
        let lim = ratio_limit_a(2, &x).unwrap();
        assert!((r / lim - 1.0).abs() < 0.02, "{r} vs {lim}");
    }

    proptest! {
        #[test]
        fn zero_equation_a(n in 2usize..30, seed in prop::collection::vec(-5.0f64..5.0, 30)) {
            let z = hermite_zeros(n).unwrap().zeros;
            let y = &seed[..n];
            let mut lhs = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    lhs += (y[i] - y[j]) / (z[i] - z[j]);
                }
            }
            let rhs = dot(y, &z);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()).max(1.0));
        }

        #[test]
        fn rescale_round_trip(y in prop::collection::vec(-10.0f64..10.0, 4), k in 1.0f64..1e4) {
            let p = peak_vector(RootSystem::B, 4, Some(1.3)).unwrap().coords;
            let f = rescale(&y, k, &p, Direction::Forward).unwrap();
            let back = rescale(&f, k, &p, Direction::Inverse).unwrap();
            for (a, b) in back.iter().zip(&y) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + k.sqrt()) * 10.0);
            }
            let lhs = dot(&f, &p);
            let rhs = dot(&y, &p) / k.sqrt();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * 100.0 * (1.0 + rhs.abs()));
        }

        #[test]
        fn support_nesting(gaps in prop::collection::vec(0.01f64..3.0, 3), base in -5.0f64..5.0,
                           k1 in 1.0f64..50.0, extra in 0.0f64..500.0) {
            let z = hermite_zeros(4).unwrap().zeros;
            let mut y = vec![base; 4];
            for i in (0..3).rev() {
                y[i] = y[i + 1] + gaps[i];
            }
            let k2 = k1 + extra;
            let f = rescale(&y, k1, &z, Direction::Forward).unwrap();
            let back = rescale(&f, k2, &z, Direction::Inverse).unwrap();
            for w in back.windows(2) {
                prop_assert!(w[0] > w[1] - 1e-12);
            }
        }
    }
}
