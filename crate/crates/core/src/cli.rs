//! The `freezelab` command line: `zeros`, `cov`, `sample`, `verify` and
//! `converge`. Settings come from `--config FILE` (JSON) overlaid by flags;
//! the seed falls back to `FREEZELAB_SEED`, then 0. The effective
//! configuration is echoed at the top of every output.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage, 3 I/O.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::ensembles::{Flavor, MultiplicitySpec, RootSystem};
use crate::error::{invalid, Error, Result};
use crate::freezing::{sigma_inv, LimitSystem};
use crate::orthopoly::{
    hermite_zeros, laguerre_minus_one_zeros, laguerre_zeros, zero_identity_report, IdentityFamily,
};
use crate::sampling::{format_g17, LawDescriptor, SampleBatch};
use crate::verify::{ratio_sweep, run_suite, weak_sweep, Suite, VerifyOptions, PERMUTATIONS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const SEED_ENV: &str = "FREEZELAB_SEED";

/// Every setting any command reads. Unknown keys are rejected.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub system: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stream: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flavor: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub law: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verify: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &PathBuf) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| invalid(format!("config {}: {e}", path.display())))
    }

    /// Fields set in `flags` replace those in `self`.
    pub fn overlay(self, flags: RunConfig) -> RunConfig {
        macro_rules! pick {
            ($($f:ident),*) => { RunConfig { $($f: flags.$f.or(self.$f)),* } };
        }
        pick!(
            command, system, n, k, k1, k2, nu, beta, t, count, seed, stream, k_grid, out, format, family, alpha,
            flavor, law, suite, mode, permutations, verify
        )
    }
}

#[derive(Parser, Debug)]
#[command(name = "freezelab", version, about = "Freezing limits of Bessel and Cauchy–Bessel ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON file with default settings; flags override it
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    format: Option<String>,
}

#[derive(Args, Debug, Default)]
struct Params {
    #[arg(long)]
    system: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    k1: Option<f64>,
    #[arg(long)]
    k2: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    permutations: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Zeros of Hermite or Laguerre polynomials (CSV)
    Zeros {
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Append the zero-identity report and fail if it does not hold
        #[arg(long)]
        verify: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Frozen covariance matrices and their spectra (JSON)
    Cov {
        #[arg(long)]
        flavor: Option<String>,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        common: Common,
    },
    /// Draw a sample batch (JSONL or CSV)
    Sample {
        #[arg(long)]
        law: Option<String>,
        #[arg(long)]
        stream: Option<u64>,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        common: Common,
    },
    /// Run a verification suite (JSON report)
    Verify {
        #[arg(long)]
        suite: Option<String>,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep the freezing parameter (CSV)
    Converge {
        #[arg(long)]
        mode: Option<String>,
        #[arg(long, value_delimiter = ',')]
        k_grid: Option<Vec<f64>>,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        common: Common,
    },
}

impl Params {
    fn into_config(self, c: RunConfig) -> RunConfig {
        RunConfig {
            system: self.system,
            n: self.n,
            k: self.k,
            k1: self.k1,
            k2: self.k2,
            nu: self.nu,
            beta: self.beta,
            t: self.t,
            count: self.count,
            permutations: self.permutations,
            ..c
        }
    }
}

fn flags_of(cmd: Command) -> (RunConfig, Option<PathBuf>) {
    let base = |name: &str, common: &Common| RunConfig {
        command: Some(name.into()),
        seed: common.seed,
        out: common.out.clone(),
        format: common.format.clone(),
        ..Default::default()
    };
    match cmd {
        Command::Zeros { family, n, alpha, verify, common } => (
            RunConfig { family, n, alpha, verify: verify.then_some(true), ..base("zeros", &common) },
            common.config,
        ),
        Command::Cov { flavor, params, common } => {
            (params.into_config(RunConfig { flavor, ..base("cov", &common) }), common.config)
        }
        Command::Sample { law, stream, params, common } => {
            (params.into_config(RunConfig { law, stream, ..base("sample", &common) }), common.config)
        }
        Command::Verify { suite, params, common } => {
            (params.into_config(RunConfig { suite, ..base("verify", &common) }), common.config)
        }
        Command::Converge { mode, k_grid, params, common } => {
            (params.into_config(RunConfig { mode, k_grid, ..base("converge", &common) }), common.config)
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("freezelab: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) => EXIT_IO,
        Error::Numeric(_) => EXIT_FAILED,
        Error::InvalidInput(_) | Error::Domain(_) | Error::Json(_) => EXIT_USAGE,
    }
}

fn execute(cmd: Command) -> Result<i32> {
    let (flags, config_path) = flags_of(cmd);
    let name = flags.command.clone().unwrap_or_default();
    let mut cfg = match &config_path {
        Some(p) => {
            let file = RunConfig::load(p)?;
            if let Some(c) = &file.command {
                if *c != name {
                    return Err(invalid(format!("config is for command '{c}', not '{name}'")));
                }
            }
            file.overlay(flags)
        }
        None => flags,
    };
    if cfg.seed.is_none() {
        cfg.seed = Some(match std::env::var(SEED_ENV) {
            Ok(s) => s
                .trim()
                .parse()
                .map_err(|_| invalid(format!("{SEED_ENV} must be an unsigned integer, got '{s}'")))?,
            Err(_) => 0,
        });
    }
    let mut out = Vec::new();
    let code = match name.as_str() {
        "zeros" => run_zeros(&mut cfg, &mut out)?,
        "cov" => run_cov(&mut cfg, &mut out)?,
        "sample" => run_sample(&mut cfg, &mut out)?,
        "verify" => run_verify(&mut cfg, &mut out)?,
        "converge" => run_converge(&mut cfg, &mut out)?,
        other => return Err(invalid(format!("unknown command '{other}'"))),
    };
    match &cfg.out {
        Some(path) => fs::write(path, &out)?,
        None => std::io::stdout().write_all(&out)?,
    }
    Ok(code)
}

fn require<T: Clone>(v: &Option<T>, name: &str) -> Result<T> {
    v.clone().ok_or_else(|| invalid(format!("--{name} is required")))
}

fn format_or(cfg: &mut RunConfig, default: &str, allowed: &[&str]) -> Result<String> {
    let f = cfg.format.clone().unwrap_or_else(|| default.to_string()).to_ascii_lowercase();
    if !allowed.contains(&f.as_str()) {
        return Err(invalid(format!("format '{f}' is not one of {allowed:?} for this command")));
    }
    cfg.format = Some(f.clone());
    Ok(f)
}

fn config_json(cfg: &RunConfig) -> Result<Value> {
    Ok(serde_json::to_value(cfg)?)
}

fn csv_header(cfg: &RunConfig, out: &mut Vec<u8>) -> Result<()> {
    writeln!(out, "# {}", serde_json::to_string(&json!({ "config": cfg }))?)?;
    Ok(())
}

fn run_zeros(cfg: &mut RunConfig, out: &mut Vec<u8>) -> Result<i32> {
    format_or(cfg, "csv", &["csv"])?;
    let family = require(&cfg.family, "family")?.to_ascii_lowercase();
    let n = require(&cfg.n, "n")?;
    let (zeros, identity) = match family.as_str() {
        "hermite" => {
            cfg.alpha = None;
            (hermite_zeros(n)?.zeros, IdentityFamily::Hermite)
        }
        "laguerre" => {
            let alpha = cfg.alpha.unwrap_or(0.0);
            cfg.alpha = Some(alpha);
            let z = if alpha == -1.0 { laguerre_minus_one_zeros(n)? } else { laguerre_zeros(n, alpha)?.zeros };
            (z, IdentityFamily::Laguerre { nu: alpha + 1.0 })
        }
        other => return Err(invalid(format!("unknown family '{other}' (hermite, laguerre)"))),
    };
    cfg.family = Some(family);
    csv_header(cfg, out)?;
    writeln!(out, "index,zero")?;
    for (i, z) in zeros.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, format_g17(*z))?;
    }
    if cfg.verify == Some(true) {
        let report = zero_identity_report(identity, n)?;
        writeln!(out, "# {}", serde_json::to_string(&json!({ "identities": report }))?)?;
        if !report.passed() {
            return Ok(EXIT_FAILED);
        }
    }
    Ok(EXIT_OK)
}

fn parse<T: std::str::FromStr<Err = Error>>(v: &Option<String>, name: &str) -> Result<T> {
    require(v, name)?.parse()
}

fn run_cov(cfg: &mut RunConfig, out: &mut Vec<u8>) -> Result<i32> {
    format_or(cfg, "json", &["json"])?;
    let system: RootSystem = parse(&cfg.system, "system")?;
    let flavor: Flavor = cfg.flavor.clone().unwrap_or_else(|| "bessel".into()).parse()?;
    cfg.flavor = Some(format!("{flavor:?}").to_lowercase());
    let n = require(&cfg.n, "n")?;
    if system == RootSystem::B && cfg.nu.is_none() {
        return Err(invalid("--nu is required for system B"));
    }
    let nu = if system == RootSystem::B { cfg.nu } else { None };
    let c = sigma_inv(system, flavor, n, nu)?;
    let deviation = c.spectrum_deviation();
    let last = n - 1;
    let doc = json!({
        "config": config_json(cfg)?,
        "system": system.to_string(),
        "flavor": cfg.flavor,
        "n": n,
        "nu": c.nu,
        "sigma_inv": c.sigma_inv.to_rows(),
        "sigma": c.sigma.to_rows(),
        "eigenvalues": c.eigen.eigenvalues,
        "determinant": c.determinant(),
        "claimed_eigenvalues": c.claimed_spectrum(),
        "claimed_determinant": c.claimed_determinant(),
        "deviation": deviation,
        "s_nn": c.sigma_inv.get(last, last),
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(if deviation > 1e-8 { EXIT_FAILED } else { EXIT_OK })
}

fn ensemble_spec(system: RootSystem, cfg: &RunConfig) -> Result<MultiplicitySpec> {
    let n = require(&cfg.n, "n")?;
    match system {
        RootSystem::B => match (cfg.k1, cfg.k2, cfg.nu, cfg.beta) {
            (Some(k1), Some(k2), None, None) => MultiplicitySpec::b(n, k1, k2),
            (None, None, Some(nu), Some(beta)) => MultiplicitySpec::b_nu_beta(n, nu, beta),
            _ => Err(invalid("type B needs either --k1 and --k2, or --nu and --beta")),
        },
        _ => MultiplicitySpec::from_parts(system, n, Some(require(&cfg.k, "k")?), None, None),
    }
}

/// Law names: `bessel-{a,b,d}`, `cauchy-{a,b,d}`, `limit-{a,b,d}`,
/// `limit-b-one-sided`, `subordinator`.
pub fn law_descriptor(name: &str, cfg: &RunConfig) -> Result<LawDescriptor> {
    let name = name.to_ascii_lowercase();
    if name == "subordinator" {
        return Ok(LawDescriptor::Subordinator { t: cfg.t.unwrap_or(std::f64::consts::SQRT_2) });
    }
    let (kind, rest) = name.split_once('-').ok_or_else(|| invalid(format!("unknown law '{name}'")))?;
    match kind {
        "bessel" | "cauchy" => {
            let system: RootSystem = rest.parse()?;
            let spec = ensemble_spec(system, cfg)?;
            Ok(if kind == "bessel" {
                LawDescriptor::Bessel { spec, t: cfg.t.unwrap_or(1.0) }
            } else {
                LawDescriptor::Cauchy { spec, t: cfg.t.unwrap_or(std::f64::consts::SQRT_2) }
            })
        }
        "limit" => {
            let system: LimitSystem = rest.parse()?;
            let nu = match system {
                LimitSystem::B => Some(require(&cfg.nu, "nu")?),
                _ => None,
            };
            Ok(LawDescriptor::Limit { system, n: require(&cfg.n, "n")?, nu })
        }
        _ => Err(invalid(format!("unknown law '{name}'"))),
    }
}

fn run_sample(cfg: &mut RunConfig, out: &mut Vec<u8>) -> Result<i32> {
    let format = format_or(cfg, "jsonl", &["jsonl", "csv"])?;
    let law_name = require(&cfg.law, "law")?;
    let law = law_descriptor(&law_name, cfg)?;
    match &law {
        LawDescriptor::Bessel { t, .. } | LawDescriptor::Cauchy { t, .. } | LawDescriptor::Subordinator { t } => {
            cfg.t = Some(*t)
        }
        LawDescriptor::Limit { .. } => {}
    }
    let count = cfg.count.unwrap_or(1000);
    cfg.count = Some(count);
    let stream = cfg.stream.unwrap_or(0);
    cfg.stream = Some(stream);
    let batch = SampleBatch::generate(law, count, cfg.seed.unwrap_or(0), stream)?;
    let header = config_json(cfg)?;
    if format == "csv" {
        batch.write_csv(out, Some(&header))?;
    } else {
        batch.write_jsonl(out, Some(&header))?;
    }
    Ok(EXIT_OK)
}

fn freeze_parameter(cfg: &RunConfig, system: Option<LimitSystem>) -> Option<f64> {
    match system {
        Some(LimitSystem::B) => cfg.beta.or(cfg.k),
        _ => cfg.k,
    }
}

fn run_verify(cfg: &mut RunConfig, out: &mut Vec<u8>) -> Result<i32> {
    format_or(cfg, "json", &["json"])?;
    let suite: Suite = parse(&cfg.suite, "suite")?;
    let system = cfg.system.as_deref().map(str::parse::<LimitSystem>).transpose()?;
    let opts = VerifyOptions {
        n: cfg.n,
        system,
        k: freeze_parameter(cfg, system),
        nu: cfg.nu,
        count: cfg.count,
        permutations: cfg.permutations,
        seed: cfg.seed.unwrap_or(0),
    };
    let reports = run_suite(suite, &opts)?;
    let failing: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    for r in &reports {
        eprintln!("{}", r.line());
    }
    let doc = json!({
        "config": config_json(cfg)?,
        "suite": suite,
        "pass": failing.is_empty(),
        "failing": failing,
        "reports": reports,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&doc)?)?;
    Ok(if failing.is_empty() { EXIT_OK } else { EXIT_FAILED })
}

fn run_converge(cfg: &mut RunConfig, out: &mut Vec<u8>) -> Result<i32> {
    format_or(cfg, "csv", &["csv"])?;
    let mode = require(&cfg.mode, "mode")?.to_ascii_lowercase();
    let grid = require(&cfg.k_grid, "k-grid")?;
    if grid.is_empty() {
        return Err(invalid("--k-grid is empty"));
    }
    if grid.windows(2).any(|w| !(w[0] < w[1])) || grid.iter().any(|k| !(*k >= 1.0) || !k.is_finite()) {
        return Err(invalid("--k-grid must be strictly ascending values >= 1"));
    }
    let system: LimitSystem = parse(&cfg.system, "system")?;
    let n = require(&cfg.n, "n")?;
    match mode.as_str() {
        "ratio" => {
            if system != LimitSystem::A {
                return Err(invalid("ratio mode is defined for system A only"));
            }
            let rows = ratio_sweep(n, &grid)?;
            csv_header(cfg, out)?;
            let xs: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
            writeln!(out, "k,point,{},ratio,corrected_limit,ratio_over_corrected", xs.join(","))?;
            for r in rows {
                let x: Vec<String> = r.x.iter().map(|v| format_g17(*v)).collect();
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    format_g17(r.k),
                    r.point,
                    x.join(","),
                    format_g17(r.ratio),
                    format_g17(r.corrected_limit),
                    format_g17(r.ratio / r.corrected_limit)
                )?;
            }
        }
        "weak" => {
            let nu = match system {
                LimitSystem::B => Some(require(&cfg.nu, "nu")?),
                _ => None,
            };
            let count = cfg.count.unwrap_or(10_000);
            let perms = cfg.permutations.unwrap_or(PERMUTATIONS);
            cfg.count = Some(count);
            cfg.permutations = Some(perms);
            let rows = weak_sweep(system, n, nu.unwrap_or(0.0), &grid, count, perms, cfg.seed.unwrap_or(0))?;
            csv_header(cfg, out)?;
            writeln!(out, "k,energy_statistic,p_value,pass")?;
            for r in rows {
                writeln!(out, "{},{},{},{}", format_g17(r.k), format_g17(r.statistic), format_g17(r.p_value), r.pass)?;
            }
        }
        other => return Err(invalid(format!("unknown mode '{other}' (ratio, weak)"))),
    }
    Ok(EXIT_OK)
}
