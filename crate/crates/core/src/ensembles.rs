//! Exact densities of the Bessel laws at time `t` (start 0) and of the
//! Cauchy–Bessel laws obtained by subordinating them, for the root systems
//! A, B and D.
//!
//! Everything is evaluated in log-space. The Bessel density is
//! `c_k t^{−(γ+N/2)} e^{−‖y‖²/(2t)} w_k(y)` and the Cauchy–Bessel density is
//! `c_k t Γ(a)/√(4π) · (4/(t²+2‖y‖²))^a · w_k(y)` with `a = γ + (N+1)/2`.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, invalid, Error, Result};
use crate::matkernel::{log_gamma, norm_sq};
use crate::orthopoly::hermite_zeros;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RootSystem {
    A,
    B,
    D,
}

impl FromStr for RootSystem {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(RootSystem::A),
            "B" => Ok(RootSystem::B),
            "D" => Ok(RootSystem::D),
            _ => Err(invalid(format!("unknown root system '{s}'"))),
        }
    }
}

impl fmt::Display for RootSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl RootSystem {
    /// Whether `y` lies strictly inside the Weyl chamber.
    pub fn in_chamber(self, y: &[f64]) -> bool {
        let n = y.len();
        let descending = |s: &[f64]| s.windows(2).all(|w| w[0] > w[1]);
        match self {
            RootSystem::A => descending(y),
            RootSystem::B => descending(y) && y.last().is_some_and(|&v| v > 0.0),
            RootSystem::D => n < 2 || (descending(&y[..n - 1]) && y[n - 2] > y[n - 1].abs()),
        }
    }

    /// Order of the Weyl group acting on `ℝ^N`.
    pub fn group_order(self, n: usize) -> f64 {
        let fact: f64 = (1..=n).map(|i| i as f64).product();
        match self {
            RootSystem::A => fact,
            RootSystem::B => fact * 2f64.powi(n as i32),
            RootSystem::D => fact * 2f64.powi(n as i32 - 1),
        }
    }

    /// Representative of the Weyl-group orbit of `y` in the closed chamber.
    pub fn fold(self, y: &[f64]) -> Vec<f64> {
        let desc = |v: &mut Vec<f64>| v.sort_by(|a, b| b.total_cmp(a));
        match self {
            RootSystem::A => {
                let mut v = y.to_vec();
                desc(&mut v);
                v
            }
            RootSystem::B => {
                let mut v: Vec<f64> = y.iter().map(|x| x.abs()).collect();
                desc(&mut v);
                v
            }
            RootSystem::D => {
                let negatives = y.iter().filter(|x| x.is_sign_negative()).count();
                let mut v: Vec<f64> = y.iter().map(|x| x.abs()).collect();
                desc(&mut v);
                if negatives % 2 == 1 {
                    if let Some(last) = v.last_mut() {
                        *last = -*last;
                    }
                }
                v
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    Bessel,
    Cauchy,
}

impl FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bessel" => Ok(Flavor::Bessel),
            "cauchy" => Ok(Flavor::Cauchy),
            _ => Err(invalid(format!("unknown flavor '{s}'"))),
        }
    }
}

/// Root system, dimension and multiplicities. Types A and D carry one
/// multiplicity `k`; type B carries `(k₁, k₂)`, written `(νβ, β)` in the
/// freezing regime.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplicitySpec {
    system: RootSystem,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k2: Option<f64>,
}

fn check_mult(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("multiplicity {name} must be finite and >= 0, got {v}")))
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        Err(invalid("dimension N must be at least 1"))
    } else {
        Ok(())
    }
}

impl MultiplicitySpec {
    pub fn a(n: usize, k: f64) -> Result<Self> {
        check_dim(n)?;
        check_mult("k", k)?;
        Ok(MultiplicitySpec {
            system: RootSystem::A,
            n,
            k: Some(k),
            k1: None,
            k2: None,
        })
    }

    pub fn b(n: usize, k1: f64, k2: f64) -> Result<Self> {
        check_dim(n)?;
        check_mult("k1", k1)?;
        check_mult("k2", k2)?;
        Ok(MultiplicitySpec {
            system: RootSystem::B,
            n,
            k: None,
            k1: Some(k1),
            k2: Some(k2),
        })
    }

    /// Type B with `(k₁, k₂) = (νβ, β)`.
    pub fn b_nu_beta(n: usize, nu: f64, beta: f64) -> Result<Self> {
        Self::b(n, nu * beta, beta)
    }

    pub fn d(n: usize, k: f64) -> Result<Self> {
        check_dim(n)?;
        check_mult("k", k)?;
        Ok(MultiplicitySpec {
            system: RootSystem::D,
            n,
            k: Some(k),
            k1: None,
            k2: None,
        })
    }

    /// Builds a spec from loosely specified parameters, as they arrive from
    /// the command line or a config file.
    pub fn from_parts(
        system: RootSystem,
        n: usize,
        k: Option<f64>,
        k1: Option<f64>,
        k2: Option<f64>,
    ) -> Result<Self> {
        match system {
            RootSystem::A => Self::a(n, k.ok_or_else(|| invalid("type A needs k"))?),
            RootSystem::D => Self::d(n, k.ok_or_else(|| invalid("type D needs k"))?),
            RootSystem::B => match (k1, k2) {
                (Some(a), Some(b)) => Self::b(n, a, b),
                _ => Err(invalid("type B needs k1 and k2 (or nu and beta)")),
            },
        }
    }

    pub fn system(&self) -> RootSystem {
        self.system
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `k` for types A and D, `k₂` for type B (the pair-interaction strength).
    pub fn k(&self) -> f64 {
        self.k.or(self.k2).unwrap_or(0.0)
    }

    /// `k₁` (type B only; zero otherwise).
    pub fn k1(&self) -> f64 {
        self.k1.unwrap_or(0.0)
    }

    pub fn k2(&self) -> f64 {
        self.k()
    }

    /// `ν = k₁/k₂` for type B with `k₂ > 0`.
    pub fn nu(&self) -> Option<f64> {
        match (self.system, self.k1, self.k2) {
            (RootSystem::B, Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        }
    }

    /// Exponent `γ_k`: the weight `w_k` is homogeneous of degree `2γ_k`.
    pub fn gamma(&self) -> f64 {
        let n = self.n as f64;
        match self.system {
            RootSystem::A => self.k() * n * (n - 1.0) / 2.0,
            RootSystem::B => self.k2() * n * (n - 1.0) + self.k1() * n,
            RootSystem::D => self.k() * n * (n - 1.0),
        }
    }

    /// `ln w_k(y)` for `y` strictly inside the chamber.
    pub fn log_weight(&self, y: &[f64]) -> Result<f64> {
        if y.len() != self.n {
            return Err(invalid(format!(
                "point has dimension {}, law has {}",
                y.len(),
                self.n
            )));
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(invalid("point has non-finite coordinates"));
        }
        if !self.system.in_chamber(y) {
            return Err(domain(format!("{y:?} is not inside the {} chamber", self.system)));
        }
        let n = self.n;
        let mut pairs = 0.0;
        match self.system {
            RootSystem::A => {
                for i in 0..n {
                    for j in i + 1..n {
                        pairs += (y[i] - y[j]).ln();
                    }
                }
                Ok(2.0 * self.k() * pairs)
            }
            RootSystem::B | RootSystem::D => {
                for i in 0..n {
                    for j in i + 1..n {
                        pairs += ((y[i] - y[j]) * (y[i] + y[j])).ln();
                    }
                }
                let mut lw = 2.0 * self.k2() * pairs;
                if self.system == RootSystem::B && self.k1() != 0.0 {
                    lw += 2.0 * self.k1() * y.iter().map(|v| v.ln()).sum::<f64>();
                }
                Ok(lw)
            }
        }
    }

    /// `ln c_k`, the Selberg norming constant of the Bessel law at `t = 1`.
    pub fn log_selberg(&self) -> Result<f64> {
        let n = self.n as f64;
        let mut s = log_factorial(self.n);
        match self.system {
            RootSystem::A => {
                let k = self.k();
                s -= n / 2.0 * (2.0 * PI).ln();
                for j in 1..=self.n {
                    s += log_gamma(1.0 + k)? - log_gamma(1.0 + j as f64 * k)?;
                }
            }
            RootSystem::B => {
                let (k1, k2) = (self.k1(), self.k2());
                s -= n * (k1 + (n - 1.0) * k2 - 0.5) * LN_2;
                for j in 1..=self.n {
                    let jf = j as f64;
                    s += log_gamma(1.0 + k2)?
                        - log_gamma(1.0 + jf * k2)?
                        - log_gamma(0.5 + k1 + (jf - 1.0) * k2)?;
                }
            }
            RootSystem::D => {
                let k = self.k();
                s -= (n * (n - 1.0) * k - n / 2.0 + 1.0) * LN_2;
                for j in 1..=self.n {
                    let jf = j as f64;
                    s += log_gamma(1.0 + k)?
                        - log_gamma(1.0 + jf * k)?
                        - log_gamma(0.5 + (jf - 1.0) * k)?;
                }
            }
        }
        Ok(s)
    }

    /// Exponent `a = γ + (N+1)/2` of the Cauchy–Bessel radial factor.
    pub fn cauchy_exponent(&self) -> f64 {
        self.gamma() + (self.n as f64 + 1.0) / 2.0
    }
}

fn log_factorial(n: usize) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// A density evaluator for one ensemble at one time `t`.
#[derive(Clone, Debug, Serialize)]
pub struct EnsembleLaw {
    pub spec: MultiplicitySpec,
    pub flavor: Flavor,
    pub t: f64,
    pub gamma: f64,
    pub log_norm: f64,
}

pub fn make_law(spec: MultiplicitySpec, flavor: Flavor, t: f64) -> Result<EnsembleLaw> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(invalid(format!("time t must be positive, got {t}")));
    }
    let gamma = spec.gamma();
    let n = spec.n() as f64;
    let log_c = spec.log_selberg()?;
    let log_norm = match flavor {
        Flavor::Bessel => log_c - (gamma + n / 2.0) * t.ln(),
        Flavor::Cauchy => {
            let a = spec.cauchy_exponent();
            log_c + t.ln() + log_gamma(a)? - 0.5 * (4.0 * PI).ln() + a * 4f64.ln()
        }
    };
    Ok(EnsembleLaw {
        spec,
        flavor,
        t,
        gamma,
        log_norm,
    })
}

impl EnsembleLaw {
    pub fn dim(&self) -> usize {
        self.spec.n()
    }

    pub fn log_density(&self, y: &[f64]) -> Result<f64> {
        let lw = self.spec.log_weight(y)?;
        let r2 = norm_sq(y);
        let radial = match self.flavor {
            Flavor::Bessel => -r2 / (2.0 * self.t),
            Flavor::Cauchy => {
                -self.spec.cauchy_exponent() * (self.t * self.t + 2.0 * r2).ln()
            }
        };
        Ok(self.log_norm + lw + radial)
    }

    pub fn density(&self, y: &[f64]) -> Result<f64> {
        self.log_density(y).map(f64::exp)
    }
}

/// `ln C` for the Cauchy–Bessel density written as `C (1+‖y‖²)^{−a} w_k(y)`
/// at `t = √2`, from the dedicated constant displays (`C(k,N)`, `C_B`,
/// `C_D`) rather than from the Selberg constant.
pub fn log_cauchy_constant_direct(spec: &MultiplicitySpec) -> Result<f64> {
    let n = spec.n() as f64;
    let a = spec.cauchy_exponent();
    let mut s = log_factorial(spec.n()) + log_gamma(a)?;
    match spec.system() {
        RootSystem::A => {
            let k = spec.k();
            s += spec.gamma() * LN_2 - (n + 1.0) / 2.0 * PI.ln();
            for j in 1..=spec.n() {
                s += log_gamma(1.0 + k)? - log_gamma(1.0 + j as f64 * k)?;
            }
        }
        RootSystem::B => {
            let (k1, k2) = (spec.k1(), spec.k2());
            s += n * LN_2 - 0.5 * PI.ln();
            for j in 1..=spec.n() {
                let jf = j as f64;
                s += log_gamma(1.0 + k2)?
                    - log_gamma(1.0 + jf * k2)?
                    - log_gamma(0.5 + k1 + (jf - 1.0) * k2)?;
            }
        }
        RootSystem::D => {
            let k = spec.k();
            s += (n - 1.0) * LN_2 - 0.5 * PI.ln();
            for j in 1..=spec.n() {
                let jf = j as f64;
                s += log_gamma(1.0 + k)? - log_gamma(1.0 + jf * k)? - log_gamma(0.5 + (jf - 1.0) * k)?;
            }
        }
    }
    Ok(s)
}

/// The same constant obtained from the general subordinated display at
/// `t = √2`: `C = c_k Γ(a) 2^{a−1/2} / √π`.
pub fn log_cauchy_constant_general(spec: &MultiplicitySpec) -> Result<f64> {
    let a = spec.cauchy_exponent();
    Ok(spec.log_selberg()? + log_gamma(a)? + (a - 0.5) * LN_2 - 0.5 * PI.ln())
}

/// Constant of the N = 2 type-A Cauchy–Bessel density in the rotated
/// coordinates `x₁ = (y₁+y₂)/√2`, `x₂ = (y₁−y₂)/√2`:
/// `2^{2k+1} Γ(k+3/2) Γ(k+1) / (π^{3/2} Γ(2k+1))`.
pub fn log_rotated_constant_a2(k: f64) -> Result<f64> {
    Ok((2.0 * k + 1.0) * LN_2 + log_gamma(k + 1.5)? + log_gamma(k + 1.0)?
        - 1.5 * PI.ln()
        - log_gamma(2.0 * k + 1.0)?)
}

/// The maximiser `√(2k/(N+1))·z` of the type-A Cauchy–Bessel density,
/// `z` the zeros of `H_N`.
pub fn mode_a(n: usize, k: f64) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(invalid("mode_a needs N >= 2"));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(invalid(format!("mode_a needs k > 0, got {k}")));
    }
    let s = (2.0 * k / (n as f64 + 1.0)).sqrt();
    Ok(hermite_zeros(n)?.zeros.into_iter().map(|z| s * z).collect())
}

/// Standard Cauchy distribution function, the law of `(Σ y_i)/√N` under
/// every type-A Cauchy–Bessel law at `t = √2`.
pub fn cog_marginal_cdf(x: f64) -> f64 {
    0.5 + x.atan() / PI
}
