//! Command-line front end. Every subcommand writes JSON to stdout; the
//! binary turns errors into one line on stderr and a nonzero exit.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use guidepost_core::{Explorer, SketchConfig};
use serde::Serialize;

use crate::build::build_bundle_parallel;
use crate::ingest::IngestOptions;
use crate::params::{self, OverviewParams, RankParams, RelatedParams};
use crate::registry::Registry;
use crate::render::to_json;
use crate::service::ServiceConfig;
use crate::{Error, DEFAULT_MAX_UPLOAD_BYTES};

#[derive(Debug, Parser)]
#[command(name = "guidepost", version, about = "Sketch-backed guidepost recommendations over tabular data")]
pub struct Cli {
    /// Registry directory shared with the service.
    #[arg(long, global = true, env = "GUIDEPOST_REGISTRY", default_value = "guidepost-registry")]
    pub registry: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a CSV/TSV file and store it in the registry.
    Ingest {
        file: PathBuf,
        /// Registry to store into; overrides --registry.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Field delimiter: a single character or `tab`.
        #[arg(long, default_value = ",")]
        delimiter: String,
        /// The first record is data, not column names.
        #[arg(long)]
        no_header: bool,
    },
    /// Build and store the sketch bundle of a dataset.
    Sketch {
        dataset: String,
        #[command(flatten)]
        config: SketchArgs,
    },
    /// Top-k guideposts for one descriptor.
    Rank {
        dataset: String,
        #[arg(long)]
        descriptor: String,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Guideposts related to a focused one.
    Related {
        dataset: String,
        #[arg(long)]
        focus: String,
        #[arg(long)]
        k: Option<usize>,
        #[command(flatten)]
        settings: SettingsArgs,
    },
    /// Strengths over a descriptor's whole instance set.
    Overview {
        dataset: String,
        #[arg(long)]
        descriptor: String,
        #[command(flatten)]
        mode: ModeArgs,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "GUIDEPOST_ADDR", default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "GUIDEPOST_MAX_UPLOAD_BYTES", default_value_t = DEFAULT_MAX_UPLOAD_BYTES)]
        max_upload_bytes: usize,
        #[command(flatten)]
        config: SketchArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SketchArgs {
    #[arg(long, env = "GUIDEPOST_K", default_value_t = SketchConfig::default().k)]
    pub k: usize,
    #[arg(long, env = "GUIDEPOST_EPSILON", default_value_t = SketchConfig::default().epsilon)]
    pub epsilon: f64,
    #[arg(long, env = "GUIDEPOST_SEED", default_value_t = SketchConfig::default().seed)]
    pub seed: u64,
    #[arg(long, env = "GUIDEPOST_S", default_value_t = SketchConfig::default().s)]
    pub s: usize,
    #[arg(long, env = "GUIDEPOST_R", default_value_t = SketchConfig::default().r)]
    pub r: usize,
}

impl SketchArgs {
    pub fn config(&self) -> SketchConfig {
        SketchConfig { k: self.k, epsilon: self.epsilon, seed: self.seed, s: self.s, r: self.r, ..SketchConfig::default() }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ModeArgs {
    /// Compute from the full data (default).
    #[arg(long, conflicts_with = "approx")]
    pub exact: bool,
    /// Compute from the stored sketch bundle.
    #[arg(long)]
    pub approx: bool,
}

impl ModeArgs {
    fn mode(&self) -> Option<String> {
        self.approx.then(|| "approximate".to_owned())
    }
}

#[derive(Debug, Clone, Args)]
pub struct SettingsArgs {
    /// `preferred` or `significance_adjusted`.
    #[arg(long)]
    pub metric: Option<String>,
    /// `ascending` or `descending`.
    #[arg(long)]
    pub order: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub max: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[command(flatten)]
    pub mode: ModeArgs,
}

#[derive(Serialize)]
struct IngestSummary<'a> {
    id: &'a str,
    n: usize,
    d: usize,
    columns: Vec<guidepost_core::ColumnMeta>,
}

#[derive(Serialize)]
struct SketchSummary<'a> {
    id: &'a str,
    bytes: usize,
    seconds: f64,
    path: String,
}

fn delimiter(s: &str) -> anyhow::Result<u8> {
    match s {
        "tab" | "\\t" | "\t" => Ok(b'\t'),
        s if s.len() == 1 => Ok(s.as_bytes()[0]),
        _ => anyhow::bail!("delimiter must be a single byte or `tab`"),
    }
}

/// Loads a dataset and, for approximate queries, its bundle, then runs `f`.
fn with_explorer<T>(
    registry: &Registry,
    id: &str,
    approx: bool,
    f: impl FnOnce(&Explorer<'_>) -> Result<T, Error>,
) -> anyhow::Result<T> {
    let dataset = registry.load_dataset(id)?;
    let bundle = if approx {
        Some(registry.load_bundle(id)?.ok_or_else(|| Error::NoBundle(id.to_owned()))?)
    } else {
        None
    };
    Ok(f(&Explorer::new(&dataset).with_bundle(bundle.as_ref()))?)
}

/// Runs a non-serving command and returns its stdout text.
pub fn run(cli: &Cli) -> anyhow::Result<String> {
    let open = |root: &PathBuf| Registry::open(root).with_context(|| format!("opening registry {}", root.display()));
    match &cli.command {
        Command::Ingest { file, out, delimiter: d, no_header } => {
            let registry = open(out.as_ref().unwrap_or(&cli.registry))?;
            let bytes = std::fs::read(file).with_context(|| format!("reading {}", file.display()))?;
            let options = IngestOptions { delimiter: delimiter(d)?, header: !no_header };
            let (dataset, meta) = registry.ingest(&bytes, options)?;
            tracing::info!(id = %dataset.id(), n = meta.n, d = meta.d, "ingested");
            Ok(to_json(&IngestSummary { id: meta.id.as_str(), n: meta.n, d: meta.d, columns: meta.columns }))
        }
        Command::Sketch { dataset, config } => {
            let registry = open(&cli.registry)?;
            let data = registry.load_dataset(dataset)?;
            let started = Instant::now();
            let bundle = build_bundle_parallel(&data, &config.config())?;
            let seconds = started.elapsed().as_secs_f64();
            let bytes = registry.save_bundle(&bundle)?;
            let path = registry.bundle_path(dataset)?.display().to_string();
            Ok(to_json(&SketchSummary { id: dataset, bytes, seconds, path }))
        }
        Command::Rank { dataset, descriptor, k, settings } => {
            let registry = open(&cli.registry)?;
            let params = RankParams {
                descriptor: Some(descriptor.clone()),
                k: *k,
                metric: settings.metric.clone(),
                order: settings.order.clone(),
                min: settings.min,
                max: settings.max,
                mode: settings.mode.mode(),
                alpha: settings.alpha,
            };
            params.query().map_err(Error::from)?;
            let list = with_explorer(&registry, dataset, settings.mode.approx, |ex| params::rank(ex, &params))?;
            Ok(to_json(&list))
        }
        Command::Related { dataset, focus, k, settings } => {
            let registry = open(&cli.registry)?;
            let params = RelatedParams {
                k: *k,
                metric: settings.metric.clone(),
                order: settings.order.clone(),
                min: settings.min,
                max: settings.max,
                mode: settings.mode.mode(),
                alpha: settings.alpha,
            };
            params.settings().map_err(Error::from)?;
            let n = with_explorer(&registry, dataset, settings.mode.approx, |ex| params::related(ex, focus, &params))?;
            Ok(to_json(&n))
        }
        Command::Overview { dataset, descriptor, mode } => {
            let registry = open(&cli.registry)?;
            let params = OverviewParams { descriptor: Some(descriptor.clone()), mode: mode.mode() };
            params.parsed().map_err(Error::from)?;
            let o = with_explorer(&registry, dataset, mode.approx, |ex| params::overview(ex, &params))?;
            Ok(to_json(&o))
        }
        Command::Serve { .. } => anyhow::bail!("serve is not a batch command"),
    }
}

/// Configuration for `serve`, if that is the command.
pub fn service_config(cli: &Cli) -> Option<(ServiceConfig, SocketAddr)> {
    match &cli.command {
        Command::Serve { addr, max_upload_bytes, config } => {
            let mut c = ServiceConfig::new(&cli.registry);
            c.max_upload_bytes = *max_upload_bytes;
            c.sketch = config.config();
            Some((c, *addr))
        }
        _ => None,
    }
}
