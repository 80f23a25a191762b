//! `cvss-temporal` — score vectors, ingest feeds, analyze corpora and
//! forecast score decay over local files.
//!
//! Output is machine-first: single-item results on stdout, bulk reports
//! as files under the output directory, diagnostics on stderr. Exit code
//! 0 on success, 2 on any user or input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use cvss_temporal::analytics::{self, PlatformFilter};
use cvss_temporal::ingest::{ingest_files, load_corpus, save_corpus};
use cvss_temporal::scoring::{score_classic, score_enhanced, EnhancedVector, VulnScope};
use cvss_temporal::temporal::DEFAULT_LAMBDA_FLOOR;
use cvss_temporal::vector::parse_vector;

const DEFAULT_CONFIG_PATH: &str = "cvss-temporal.conf";
const DEFAULT_CORPUS_PATH: &str = "corpus.txt";
const DEFAULT_OUTPUT_DIR: &str = "reports";
const DEFAULT_HORIZON_MONTHS: u32 = 24;

#[derive(Parser)]
#[command(
    name = "cvss-temporal",
    version,
    about = "CVSS v2 scoring, ingestion, analysis and forecasting over local files"
)]
struct Cli {
    /// Config file (flat key=value). Defaults to ./cvss-temporal.conf
    /// when that file exists; flags always override config values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ScopeArg {
    App,
    Os,
}

impl From<ScopeArg> for VulnScope {
    fn from(scope: ScopeArg) -> Self {
        match scope {
            ScopeArg::App => VulnScope::Application,
            ScopeArg::Os => VulnScope::OperatingSystem,
        }
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum PlatformArg {
    Android,
    Ios,
    All,
}

impl From<PlatformArg> for PlatformFilter {
    fn from(platform: PlatformArg) -> Self {
        match platform {
            PlatformArg::Android => PlatformFilter::Android,
            PlatformArg::Ios => PlatformFilter::Ios,
            PlatformArg::All => PlatformFilter::All,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Score one CVSS v2 base vector string
    Score {
        /// e.g. "AV:N/AC:M/Au:N/C:P/I:P/A:P" (parentheses accepted)
        vector: String,
        /// Use the scope-split Partial impact weights (requires --scope)
        #[arg(long, requires = "scope")]
        enhanced: bool,
        /// Vulnerability scope for the enhanced weights
        #[arg(long, value_enum)]
        scope: Option<ScopeArg>,
    },
    /// Parse NVD/EDB/patch files into a normalized corpus file
    Ingest {
        /// NVD JSON 1.1 feed file (repeatable)
        #[arg(long, required = true)]
        nvd: Vec<PathBuf>,
        /// Exploit-DB CSV export
        #[arg(long)]
        edb: Option<PathBuf>,
        /// Patch/update events CSV (cve_id,date,kind)
        #[arg(long)]
        patches: Option<PathBuf>,
        /// Corpus file to write
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the report files for one platform slice of a corpus
    Analyze {
        /// Corpus file (default from config, then ./corpus.txt)
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        platform: PlatformArg,
        /// Report directory (default from config, then ./reports)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Forecast horizon in months
        #[arg(long)]
        horizon: Option<u32>,
        /// Minimum Poisson rate per month
        #[arg(long)]
        lambda_floor: Option<f64>,
    },
    /// Print the month-by-month forecast series for one CVE
    Forecast {
        #[arg(long)]
        corpus: Option<PathBuf>,
        /// CVE id, e.g. CVE-2015-6602
        #[arg(long)]
        cve: String,
        #[arg(long)]
        horizon: Option<u32>,
        #[arg(long)]
        lambda_floor: Option<f64>,
    },
}

/// Values read from the flat key=value config file.
#[derive(Default)]
struct FileConfig {
    corpus_path: Option<PathBuf>,
    lambda_floor: Option<f64>,
    horizon_months: Option<u32>,
    output_dir: Option<PathBuf>,
}

fn load_config(explicit: Option<&Path>) -> Result<FileConfig> {
    let path = match explicit {
        Some(path) => path.to_path_buf(),
        None => {
            let default = PathBuf::from(DEFAULT_CONFIG_PATH);
            if !default.exists() {
                return Ok(FileConfig::default());
            }
            default
        }
    };
    let text = fs::read_to_string(&path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;

    let mut config = FileConfig::default();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!(
                "{}:{}: expected key=value, got `{line}`",
                path.display(),
                number + 1
            )
        })?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "corpus_path" => config.corpus_path = Some(PathBuf::from(value)),
            "output_dir" => config.output_dir = Some(PathBuf::from(value)),
            "lambda_floor" => {
                config.lambda_floor = Some(value.parse().with_context(|| {
                    format!("{}:{}: lambda_floor `{value}`", path.display(), number + 1)
                })?)
            }
            "horizon_months" => {
                config.horizon_months = Some(value.parse().with_context(|| {
                    format!(
                        "{}:{}: horizon_months `{value}`",
                        path.display(),
                        number + 1
                    )
                })?)
            }
            other => eprintln!(
                "warning: {}:{}: unknown config key `{other}` ignored",
                path.display(),
                number + 1
            ),
        }
    }
    Ok(config)
}

fn validated_floor(floor: f64) -> Result<f64> {
    if !floor.is_finite() || floor <= 0.0 {
        bail!("lambda floor must be finite and > 0, got {floor}");
    }
    Ok(floor)
}

fn validated_horizon(horizon: u32) -> Result<u32> {
    if horizon == 0 {
        bail!("horizon must be at least 1 month");
    }
    Ok(horizon)
}

fn cmd_score(vector: &str, enhanced: bool, scope: Option<ScopeArg>) -> Result<()> {
    let parsed = parse_vector(vector).map_err(|e| anyhow!("{e}"))?;
    let breakdown = if enhanced {
        let scope: VulnScope = scope.expect("clap enforces --scope with --enhanced").into();
        score_enhanced(&EnhancedVector {
            base: parsed,
            scope,
        })
    } else {
        score_classic(&parsed)
    };
    println!(
        "impact={:.1} exploitability={:.1} base={:.1}",
        breakdown.impact, breakdown.exploitability, breakdown.base
    );
    Ok(())
}

fn cmd_ingest(
    nvd: &[PathBuf],
    edb: Option<&Path>,
    patches: Option<&Path>,
    out: &Path,
) -> Result<()> {
    let outcome = ingest_files(nvd, edb, patches)?;
    for diagnostic in &outcome.diagnostics {
        eprintln!("note: {diagnostic}");
    }
    save_corpus(&outcome.corpus, out)
        .with_context(|| format!("cannot write corpus {}", out.display()))?;
    println!(
        "kept={} skipped={} unlinked={}",
        outcome.summary.kept, outcome.summary.skipped, outcome.summary.unlinked
    );
    Ok(())
}

fn cmd_analyze(
    corpus_path: &Path,
    platform: PlatformArg,
    out_dir: &Path,
    horizon: u32,
    lambda_floor: f64,
) -> Result<()> {
    let corpus = load_corpus(corpus_path)
        .with_context(|| format!("cannot load corpus {}", corpus_path.display()))?;
    let bundle = analytics::analyze(&corpus, platform.into(), horizon, lambda_floor)?;
    let written = analytics::write_reports(&bundle, out_dir)?;
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_forecast(corpus_path: &Path, cve: &str, horizon: u32, lambda_floor: f64) -> Result<()> {
    let corpus = load_corpus(corpus_path)
        .with_context(|| format!("cannot load corpus {}", corpus_path.display()))?;
    let record = corpus
        .record(cve)
        .ok_or_else(|| anyhow!("unknown CVE `{cve}`: not present in the corpus"))?;
    let report = analytics::temporal_report(&[record], &corpus, horizon, lambda_floor)?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    analytics::write_forecast_csv(&mut lock, &report)?;
    lock.flush()?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let config = load_config(cli.config.as_deref())?;
    let corpus_default = || {
        config
            .corpus_path
            .clone()
            .unwrap_or_else(|| PathBuf::from(DEFAULT_CORPUS_PATH))
    };
    let floor_default = config.lambda_floor.unwrap_or(DEFAULT_LAMBDA_FLOOR);
    let horizon_default = config.horizon_months.unwrap_or(DEFAULT_HORIZON_MONTHS);

    match cli.command {
        Command::Score {
            vector,
            enhanced,
            scope,
        } => cmd_score(&vector, enhanced, scope),
        Command::Ingest {
            nvd,
            edb,
            patches,
            out,
        } => cmd_ingest(&nvd, edb.as_deref(), patches.as_deref(), &out),
        Command::Analyze {
            corpus,
            platform,
            out,
            horizon,
            lambda_floor,
        } => {
            let out_dir = out
                .or_else(|| config.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
            cmd_analyze(
                &corpus.unwrap_or_else(corpus_default),
                platform,
                &out_dir,
                validated_horizon(horizon.unwrap_or(horizon_default))?,
                validated_floor(lambda_floor.unwrap_or(floor_default))?,
            )
        }
        Command::Forecast {
            corpus,
            cve,
            horizon,
            lambda_floor,
        } => cmd_forecast(
            &corpus.unwrap_or_else(corpus_default),
            &cve,
            validated_horizon(horizon.unwrap_or(horizon_default))?,
            validated_floor(lambda_floor.unwrap_or(floor_default))?,
        ),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error:#}");
        std::process::exit(2);
    }
}
