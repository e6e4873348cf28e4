//! `hcm-lab`: command-line access to the CM and HCM checks, the scenario
//! runner and the k-scan.
//!
//! Exit codes: 0 consistent, 1 violated, 2 inconclusive, 3 usage or config
//! error, 4 numeric non-convergence.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use hcm_core::cmcheck::seeded_mixture_atoms;
use hcm_core::hyper::{DENSITY_NAMES, WFORM_NAMES};
use hcm_core::scenarios::{thm3_k_scan, thm3_quad, Kappa1};
use hcm_core::{
    bernstein_mixture, catalog_density, catalog_wform, cm_test, derived_density, hcm_test_1d,
    run_scenario, BasePoint, DerivedKind, GridSpec, Params, ScenarioConfig, Verdict,
    SCENARIO_NAMES,
};

use config::{parse_overrides, read_config_file, resolve, scenario_name, Override};
pub use report::{canonical_json, Format, Payload, Report, VerdictSummary};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or configuration (exit 3).
    Usage(String),
    Core(hcm_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numeric() => 4,
            _ => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<hcm_core::Error> for CliError {
    fn from(e: hcm_core::Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hcm-lab",
    version,
    about = "Complete and hyperbolic complete monotonicity checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config merged over the preset.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Report path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// `key=value` overrides; plain keys go to `params`, dotted keys address
    /// the config (`quad.rel_tol=1e-8`).
    #[arg(long = "set", global = true)]
    pub set: Vec<String>,
    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Include wall time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
    /// Quadrature relative tolerance.
    #[arg(long, global = true)]
    pub rel_tol: Option<f64>,
    /// Quadrature absolute tolerance.
    #[arg(long, global = true)]
    pub abs_tol: Option<f64>,
    /// Relative tolerance of the CM sign test.
    #[arg(long, global = true)]
    pub cm_tol: Option<f64>,
    #[arg(long, global = true)]
    pub max_order: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// CM test of a catalog w-form or a seeded Bernstein mixture.
    CheckCm {
        #[arg(long, conflicts_with = "mixture_seed")]
        wform: Option<String>,
        #[arg(long)]
        mixture_seed: Option<u64>,
        /// Dimension of the mixture.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Base point of the w-form.
        #[arg(long, value_delimiter = ',')]
        u: Vec<f64>,
    },
    /// HCM test of a univariate density, or of a density derived from a
    /// bivariate one.
    #[command(name = "check-hcm-1d")]
    CheckHcm1d {
        #[arg(long)]
        density: String,
        /// `marginal0`, `marginal1`, `quotient` or `conditional=<y>`.
        #[arg(long)]
        derived: Option<String>,
        #[arg(long, value_delimiter = ',')]
        u_grid: Vec<f64>,
    },
    /// Run a named scenario.
    Scenario {
        #[arg(long)]
        name: Option<String>,
    },
    /// Sign scan of the mixed derivative `J13` over `k`.
    Thm3Scan {
        #[arg(long, value_delimiter = ',')]
        k: Vec<f64>,
        #[arg(long)]
        w_eps: Option<f64>,
        #[arg(long, value_parser = parse_kappa1)]
        kappa1: Option<Kappa1>,
    },
    /// Scenario, density and w-form names.
    List,
}

fn parse_kappa1(s: &str) -> Result<Kappa1, String> {
    match s {
        "k_squared" | "k2" => Ok(Kappa1::KSquared),
        "k" => Ok(Kappa1::K),
        _ => Err(format!("unknown kappa1 `{s}`, expected k_squared or k")),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    3
                }
            };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed invocation, writes the report and returns the exit code.
pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    let c = &cli.common;
    let overrides = parse_overrides(&c.set)?;
    let file = c.config.as_deref().map(read_config_file).transpose()?;
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // a second initialization in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let start = Instant::now();
    let mut report = build_report(cli, file.as_ref(), &overrides)?;
    if c.timing {
        report.wall_seconds = Some(start.elapsed().as_secs_f64());
    }
    let text = report.render(c.format)?;
    match &c.out {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display())))?,
        None => print!("{text}"),
    }
    Ok(report.verdict.exit_code())
}

fn flag_patches(c: &Common) -> Result<Vec<(&'static str, Value)>, CliError> {
    let mut p = Vec::new();
    let float = |x: f64, name: &str| {
        serde_json::Number::from_f64(x)
            .map(Value::Number)
            .ok_or_else(|| CliError::Usage(format!("--{name} must be finite")))
    };
    if let Some(x) = c.rel_tol {
        p.push(("quad.rel_tol", float(x, "rel-tol")?));
    }
    if let Some(x) = c.abs_tol {
        p.push(("quad.abs_tol", float(x, "abs-tol")?));
    }
    if let Some(x) = c.cm_tol {
        p.push(("cm.tol_rel", float(x, "cm-tol")?));
    }
    if let Some(n) = c.max_order {
        p.push(("cm.max_order", Value::from(n)));
    }
    if c.format == Format::Csv {
        p.push(("cm.keep_records", Value::Bool(true)));
    }
    Ok(p)
}

fn numeric_error(
    command: &str,
    config: ScenarioConfig,
    e: hcm_core::Error,
) -> Result<Report, CliError> {
    if !e.is_numeric() {
        return Err(e.into());
    }
    Ok(Report {
        command: command.into(),
        config: Some(config),
        payload: Payload::Error {
            message: e.to_string(),
        },
        verdict: VerdictSummary {
            cm_verdict: None,
            outcome: None,
            summary: format!("numeric failure: {e}"),
            numeric_failure: true,
        },
        wall_seconds: None,
    })
}

fn cm_summary(v: Verdict) -> VerdictSummary {
    VerdictSummary {
        cm_verdict: Some(v),
        outcome: None,
        summary: v.to_string(),
        numeric_failure: false,
    }
}

fn build_report(
    cli: &Cli,
    file: Option<&Value>,
    overrides: &[Override],
) -> Result<Report, CliError> {
    let mut patches = flag_patches(&cli.common)?;
    match &cli.command {
        Command::CheckCm {
            wform,
            mixture_seed,
            dim,
            u,
        } => {
            let cfg = resolve(&ScenarioConfig::default(), file, overrides, &patches)?;
            let (target, params, u, handle) = match (wform, mixture_seed) {
                (Some(name), None) => {
                    if !WFORM_NAMES.contains(&name.as_str()) {
                        return Err(hcm_core::Error::UnknownName(name.clone()).into());
                    }
                    let n = if u.is_empty() { 2 } else { u.len() };
                    let base = if u.is_empty() {
                        BasePoint::ones(n)
                    } else {
                        BasePoint::new(u.clone())?
                    };
                    let w = catalog_wform(name, &cfg.params, &base)?;
                    let params = w.params().clone();
                    (w.label(), params, base.as_slice().to_vec(), w.handle())
                }
                (None, Some(seed)) => {
                    let h = bernstein_mixture(&seeded_mixture_atoms(*seed, *dim, 5.0))?;
                    let params =
                        Params::from_pairs(&[("seed", *seed as f64), ("dim", *dim as f64)]);
                    (
                        format!("bernstein_mixture(seed={seed})"),
                        params,
                        Vec::new(),
                        h,
                    )
                }
                _ => {
                    return Err(CliError::Usage(
                        "check-cm needs --wform or --mixture-seed".into(),
                    ))
                }
            };
            let grid = GridSpec::cube(cfg.grid.w_form.clone(), handle.dimension());
            match cm_test(&handle, &grid, &cfg.cm) {
                Ok(report) => Ok(Report {
                    command: "check-cm".into(),
                    verdict: cm_summary(report.verdict),
                    config: Some(cfg),
                    payload: Payload::CheckCm(report::CmCheck {
                        target,
                        params,
                        u,
                        report,
                    }),
                    wall_seconds: None,
                }),
                Err(e) => numeric_error("check-cm", cfg, e),
            }
        }
        Command::CheckHcm1d {
            density,
            derived,
            u_grid,
        } => {
            if !u_grid.is_empty() {
                patches.push(("grid.u", serde_json::to_value(u_grid).expect("floats")));
            }
            let cfg = resolve(&ScenarioConfig::default(), file, overrides, &patches)?;
            let f = catalog_density(density, &cfg.params)?;
            let f = match derived.as_deref() {
                None => f,
                Some(d) => {
                    let kind = match d {
                        "marginal0" => DerivedKind::Marginal { axis: 0 },
                        "marginal1" => DerivedKind::Marginal { axis: 1 },
                        "quotient" => DerivedKind::Quotient,
                        other => match other.strip_prefix("conditional=").map(str::parse::<f64>) {
                            Some(Ok(y)) => DerivedKind::Conditional { axis: 1, fixed: y },
                            _ => {
                                return Err(CliError::Usage(format!("unknown --derived `{other}`")))
                            }
                        },
                    };
                    derived_density(&f, &kind, &cfg.quad)?
                }
            };
            let grid = GridSpec::new(vec![cfg.grid.w.clone()]);
            match hcm_test_1d(&f, &cfg.grid.u, &grid, &cfg.cm) {
                Ok(r) => Ok(Report {
                    command: "check-hcm-1d".into(),
                    verdict: cm_summary(r.verdict),
                    config: Some(cfg),
                    payload: Payload::CheckHcm1d(r),
                    wall_seconds: None,
                }),
                Err(e) => numeric_error("check-hcm-1d", cfg, e),
            }
        }
        Command::Scenario { name } => {
            let name = name
                .clone()
                .or_else(|| file.and_then(scenario_name))
                .ok_or_else(|| {
                    CliError::Usage("scenario needs --name or scenario.name in the config".into())
                })?;
            let preset = ScenarioConfig::preset(&name)?;
            patches.push(("scenario.name", Value::String(name.clone())));
            let cfg = resolve(&preset, file, overrides, &patches)?;
            let r = run_scenario(&name, &cfg)?;
            Ok(Report {
                command: "scenario".into(),
                verdict: VerdictSummary {
                    cm_verdict: Some(r.cm_verdict),
                    outcome: Some(r.outcome),
                    summary: r.summary.clone(),
                    numeric_failure: r.numeric_failure,
                },
                config: Some(r.config.clone()),
                payload: Payload::Scenario(Box::new(r)),
                wall_seconds: None,
            })
        }
        Command::Thm3Scan { k, w_eps, kappa1 } => {
            let mut base = ScenarioConfig::preset("thm3")?;
            base.quad = thm3_quad();
            if !k.is_empty() {
                patches.push(("thm3.k_values", serde_json::to_value(k).expect("floats")));
            }
            if let Some(w) = w_eps {
                patches.push(("thm3.w_eps", serde_json::to_value(w).expect("float")));
            }
            let mut cfg = resolve(&base, file, overrides, &patches)?;
            let kappa1 = kappa1.or(cfg.thm3.kappa1).unwrap_or(Kappa1::KSquared);
            cfg.thm3.kappa1 = Some(kappa1);
            match thm3_k_scan(&cfg.thm3.k_values, cfg.thm3.w_eps, kappa1, &cfg.quad) {
                Ok(scan) => {
                    let (verdict, summary) = if scan.any_negative {
                        let b = scan.coupled.sign_change.or(scan.fixed.sign_change);
                        (
                            Verdict::ViolatedCM,
                            format!("negative J13 found, first sign change {b:?}"),
                        )
                    } else if scan.all_converged {
                        (
                            Verdict::ConsistentCM,
                            "no negative J13 over the scan".to_string(),
                        )
                    } else {
                        (
                            Verdict::Inconclusive,
                            "unconverged scan entries".to_string(),
                        )
                    };
                    Ok(Report {
                        command: "thm3-scan".into(),
                        verdict: VerdictSummary {
                            cm_verdict: Some(verdict),
                            outcome: None,
                            summary,
                            numeric_failure: !scan.all_converged,
                        },
                        config: Some(cfg),
                        payload: Payload::Thm3Scan(scan),
                        wall_seconds: None,
                    })
                }
                Err(e) => numeric_error("thm3-scan", cfg, e),
            }
        }
        Command::List => Ok(Report {
            command: "list".into(),
            config: None,
            payload: Payload::List(report::CatalogListing {
                scenarios: SCENARIO_NAMES.iter().map(|s| s.to_string()).collect(),
                densities: DENSITY_NAMES.iter().map(|s| s.to_string()).collect(),
                wforms: WFORM_NAMES.iter().map(|s| s.to_string()).collect(),
            }),
            verdict: VerdictSummary {
                cm_verdict: None,
                outcome: None,
                summary: "catalog".into(),
                numeric_failure: false,
            },
            wall_seconds: None,
        }),
    }
}
