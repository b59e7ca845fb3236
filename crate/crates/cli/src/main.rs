//! Command-line surface: decompose matrices, run property suites, and run
//! Monte-Carlo convergence scans with machine-readable reports.
//!
//! Exit codes: 0 success, 1 property failure, 2 usage or parse error.

mod config;
mod input;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use config::Config;
use iwasawa_lab::checks::{run_suite, SUITES};
use iwasawa_lab::forms::{GroupSpec, RankOneParams};
use iwasawa_lab::integrate::{radial_scan, DomainTag, IntegrandSpec, Sampler, ScanConfig};
use iwasawa_lab::iwasawa::iwasawa;
use iwasawa_lab::Field;

const EXIT_OK: i32 = 0;
const EXIT_PROPERTY_FAILURE: i32 = 1;
const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "iwasawa-lab",
    version,
    about = "Iwasawa A-projection numerics: decompositions, closed-form checks, convergence scans"
)]
struct Cli {
    /// Key=value config file with flag defaults (else $IWASAWA_LAB_CONFIG).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Iwasawa-decompose a matrix and report the reconstruction residual.
    Decompose(DecomposeArgs),
    /// Run a named property suite and emit a JSON report.
    Check(CheckArgs),
    /// Scan a group integrand over nested truncation radii.
    Scan(ScanArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FieldArg {
    #[value(name = "R", alias = "r")]
    R,
    #[value(name = "C", alias = "c")]
    C,
}

impl From<FieldArg> for Field {
    fn from(f: FieldArg) -> Field {
        match f {
            FieldArg::R => Field::Real,
            FieldArg::C => Field::Complex,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GroupArg {
    Sl,
    Sp4,
    So,
    Rank1,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DomainArg {
    Full,
    Commutator,
    VSlice,
}

impl From<DomainArg> for DomainTag {
    fn from(d: DomainArg) -> DomainTag {
        match d {
            DomainArg::Full => DomainTag::FullN,
            DomainArg::Commutator => DomainTag::Commutator,
            DomainArg::VSlice => DomainTag::VSlice,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SamplerArg {
    Uniform,
    Cauchy,
    Asinh,
}

impl From<SamplerArg> for Sampler {
    fn from(s: SamplerArg) -> Sampler {
        match s {
            SamplerArg::Uniform => Sampler::Uniform,
            SamplerArg::Cauchy => Sampler::Cauchy,
            SamplerArg::Asinh => Sampler::Asinh,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

#[derive(Args)]
struct DecomposeArgs {
    /// Inline JSON matrix: rows of numbers or [re, im] pairs.
    #[arg(long, value_name = "JSON", conflicts_with = "matrix_file")]
    matrix: Option<String>,
    /// File containing the JSON matrix.
    #[arg(long, value_name = "PATH")]
    matrix_file: Option<PathBuf>,
    /// Force the scalar field instead of inferring it from the entries.
    #[arg(long)]
    field: Option<FieldArg>,
    /// Reconstruction tolerance (relative); exit 1 when exceeded.
    #[arg(long)]
    tolerance: Option<f64>,
    /// Write the JSON result here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Suite: iwasawa, closed-forms, inequalities, appendix-a, appendix-b.
    #[arg(long)]
    suite: Option<String>,
    /// RNG seed (mandatory: stochastic commands take no wall-clock default).
    #[arg(long)]
    seed: Option<u64>,
    /// Samples per fuzzed property.
    #[arg(long)]
    samples: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    /// Group family.
    #[arg(long)]
    group: Option<GroupArg>,
    /// Scalar field for sl and sp4.
    #[arg(long)]
    field: Option<FieldArg>,
    /// Dimension parameter: SL(n, F) or SO(n+2, 2).
    #[arg(long)]
    n: Option<usize>,
    /// Integration domain.
    #[arg(long)]
    domain: Option<DomainArg>,
    /// Coefficient of dimF Lambda_{n-1} in the exponent (SL only).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Signed exponent on (1 + rho(log a)).
    #[arg(long, allow_negative_numbers = true)]
    log_power: Option<f64>,
    /// Coefficient of rho in the exponent.
    #[arg(long, allow_negative_numbers = true)]
    rho_coeff: Option<f64>,
    /// Rank-one: dim of the lambda root space.
    #[arg(long)]
    m_lambda: Option<u32>,
    /// Rank-one: dim of the 2 lambda root space.
    #[arg(long)]
    m_2lambda: Option<u32>,
    /// Rank-one: the value lambda(H_lambda).
    #[arg(long = "lamH")]
    lam_h: Option<f64>,
    /// Ascending truncation radii, comma separated.
    #[arg(long, value_name = "R1,R2,...")]
    radii: Option<String>,
    /// Samples per radius shell.
    #[arg(long)]
    samples: Option<u64>,
    /// RNG seed (mandatory: stochastic commands take no wall-clock default).
    #[arg(long)]
    seed: Option<u64>,
    /// Proposal law per coordinate.
    #[arg(long)]
    sampler: Option<SamplerArg>,
    /// Report format.
    #[arg(long)]
    format: Option<FormatArg>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32> {
    let cfg = Config::load(cli.config.as_deref())?;
    match cli.command {
        Command::Decompose(args) => cmd_decompose(args, &cfg),
        Command::Check(args) => cmd_check(args, &cfg),
        Command::Scan(args) => cmd_scan(args, &cfg),
    }
}

/// Write report text to `out` (with a timestamp sidecar) or to stdout.
fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        None => {
            println!("{text}");
            Ok(())
        }
        Some(path) => {
            std::fs::write(path, text)
                .with_context(|| format!("cannot write {}", path.display()))?;
            // timestamps live in a sidecar so the report itself is
            // byte-identical across reruns with the same seed
            let meta = serde_json::json!({
                "created_unix_s": std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                "command": std::env::args().collect::<Vec<_>>(),
            });
            let mut meta_path = path.as_os_str().to_owned();
            meta_path.push(".meta.json");
            let meta_path = PathBuf::from(meta_path);
            std::fs::write(&meta_path, serde_json::to_string_pretty(&meta)?)
                .with_context(|| format!("cannot write {}", meta_path.display()))?;
            Ok(())
        }
    }
}

fn cmd_decompose(args: DecomposeArgs, cfg: &Config) -> Result<i32> {
    let text = match (&args.matrix, &args.matrix_file) {
        (Some(inline), None) => inline.clone(),
        (None, Some(path)) => std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?,
        (None, None) => bail!("provide --matrix or --matrix-file"),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    };
    let tolerance = cfg
        .resolve(args.tolerance, "tolerance")?
        .unwrap_or(iwasawa_lab::matrix::TOL_IDENTITY);
    let m = input::parse_matrix(&text, args.field.map(Field::from))
        .map_err(|e| anyhow!("matrix parse failure: {e:#}"))?;
    let factors = iwasawa(&m).map_err(|e| anyhow!("decomposition failed: {e}"))?;
    let residual = factors.reconstruct().max_abs_diff(&m) / m.max_abs().max(1.0);
    let k_residual = factors.k.unitary_residual();
    let pass = residual <= tolerance && k_residual <= tolerance;
    let report = serde_json::json!({
        "field": m.field().to_string(),
        "n": m.n(),
        "vbar": input::matrix_to_json(&factors.vbar),
        "a": factors.a,
        "k": input::matrix_to_json(&factors.k),
        "reconstruction_residual": residual,
        "k_unitarity_residual": k_residual,
        "tolerance": tolerance,
        "pass": pass,
    });
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(if pass { EXIT_OK } else { EXIT_PROPERTY_FAILURE })
}

fn cmd_check(args: CheckArgs, cfg: &Config) -> Result<i32> {
    let suite = cfg
        .resolve(args.suite, "suite")?
        .ok_or_else(|| anyhow!("--suite is required (one of {})", SUITES.join(", ")))?;
    let seed = cfg
        .resolve(args.seed, "seed")?
        .ok_or_else(|| anyhow!("--seed is required; stochastic runs take no default"))?;
    let samples = cfg.resolve(args.samples, "samples")?.unwrap_or(100_000);
    let report = run_suite(&suite, seed, samples).map_err(|e| anyhow!("{e}"))?;
    for o in &report.outcomes {
        println!(
            "{} {:<24} failures {}/{} worst {:+.3e} at index {} (threshold {:.1e})",
            if o.pass { "PASS" } else { "FAIL" },
            o.name,
            o.failures,
            o.samples,
            o.worst,
            o.worst_index,
            o.threshold,
        );
    }
    emit(args.out.as_deref(), &serde_json::to_string_pretty(&report)?)?;
    Ok(if report.pass {
        EXIT_OK
    } else {
        EXIT_PROPERTY_FAILURE
    })
}

fn parse_radii(raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad radius `{tok}`: {e}"))
        })
        .collect()
}

fn cmd_scan(args: ScanArgs, cfg: &Config) -> Result<i32> {
    let group_arg = cfg
        .resolve(args.group.map(|g| format!("{g:?}").to_lowercase()), "group")?
        .ok_or_else(|| anyhow!("--group is required (sl, sp4, so, rank1)"))?;
    let field: Field = cfg
        .resolve(args.field.map(|f| format!("{f:?}")), "field")?
        .map(|s| match s.to_uppercase().as_str() {
            "R" => Ok(Field::Real),
            "C" => Ok(Field::Complex),
            other => Err(anyhow!("bad field `{other}` (R or C)")),
        })
        .transpose()?
        .unwrap_or(Field::Real);
    let n = cfg.resolve(args.n, "n")?;
    let domain: DomainTag = cfg
        .resolve(
            args.domain.map(|d| match d {
                DomainArg::Full => "full".to_string(),
                DomainArg::Commutator => "commutator".to_string(),
                DomainArg::VSlice => "v-slice".to_string(),
            }),
            "domain",
        )?
        .map(|s| match s.as_str() {
            "full" => Ok(DomainTag::FullN),
            "commutator" => Ok(DomainTag::Commutator),
            "v-slice" | "vslice" => Ok(DomainTag::VSlice),
            other => Err(anyhow!("bad domain `{other}` (full, commutator, v-slice)")),
        })
        .transpose()?
        .unwrap_or(DomainTag::FullN);
    let group = match group_arg.as_str() {
        "sl" => GroupSpec::Sl {
            n: n.ok_or_else(|| anyhow!("--n is required for sl"))?,
            field,
        },
        "sp4" => GroupSpec::Sp4 { field },
        "so" => GroupSpec::So {
            n: n.ok_or_else(|| anyhow!("--n is required for so"))?,
        },
        "rank1" => {
            let m_lambda = cfg
                .resolve(args.m_lambda, "m-lambda")?
                .ok_or_else(|| anyhow!("--m-lambda is required for rank1"))?;
            let m_2lambda = cfg.resolve(args.m_2lambda, "m-2lambda")?.unwrap_or(0);
            let lam_h = cfg.resolve(args.lam_h, "lamH")?.unwrap_or(1.0);
            GroupSpec::RankOne(
                RankOneParams::new(m_lambda, m_2lambda, lam_h).map_err(|e| anyhow!("{e}"))?,
            )
        }
        other => bail!("bad group `{other}` (sl, sp4, so, rank1)"),
    };
    let alpha = cfg.resolve(args.alpha, "alpha")?.unwrap_or(0.0);
    let log_power = cfg.resolve(args.log_power, "log-power")?.unwrap_or(0.0);
    let rho_coeff = cfg.resolve(args.rho_coeff, "rho-coeff")?.unwrap_or(-1.0);
    let spec = IntegrandSpec::new(group, domain, rho_coeff, alpha, log_power)
        .map_err(|e| anyhow!("invalid integrand: {e}"))?;

    let radii_raw = cfg
        .resolve(args.radii, "radii")?
        .ok_or_else(|| anyhow!("--radii is required (e.g. 10,100,1000)"))?;
    let radii = parse_radii(&radii_raw)?;
    let samples = cfg.resolve(args.samples, "samples")?.unwrap_or(100_000);
    let seed = cfg
        .resolve(args.seed, "seed")?
        .ok_or_else(|| anyhow!("--seed is required; stochastic runs take no default"))?;
    let sampler: Sampler = cfg
        .resolve(
            args.sampler.map(|s| format!("{s:?}").to_lowercase()),
            "sampler",
        )?
        .map(|s| match s.as_str() {
            "uniform" => Ok(Sampler::Uniform),
            "cauchy" => Ok(Sampler::Cauchy),
            "asinh" => Ok(Sampler::Asinh),
            other => Err(anyhow!("bad sampler `{other}` (uniform, cauchy, asinh)")),
        })
        .transpose()?
        .unwrap_or(Sampler::Uniform);
    let format = cfg
        .resolve(
            args.format.map(|f| format!("{f:?}").to_lowercase()),
            "format",
        )?
        .unwrap_or_else(|| "json".to_string());

    let scan_cfg = ScanConfig {
        sampler,
        ..ScanConfig::default()
    };
    let report =
        radial_scan(&spec, &radii, samples, seed, &scan_cfg).map_err(|e| anyhow!("scan failed: {e}"))?;
    eprintln!(
        "classification: {} (slope vs log R = {:.6} +- {:.6})",
        report.classification, report.slope_vs_log_r, report.slope_stderr
    );
    let text = match format.as_str() {
        "json" => serde_json::to_string_pretty(&report)?,
        "csv" => report.to_csv(),
        other => bail!("bad format `{other}` (json or csv)"),
    };
    emit(args.out.as_deref(), &text)?;
    Ok(EXIT_OK)
}
