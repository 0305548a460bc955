//! `teichlab`: flat surfaces, conformal limits, train tracks, hyperbolic
//! polygons and harmonic maps from the command line.

mod commands;
mod config;
mod demo;

use clap::{Parser, Subcommand};
use config::{Emit, Overrides, RunConfig};
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use teichlab::json::to_canonical_string;

#[derive(Parser)]
#[command(name = "teichlab", version, about = "Flat surfaces, Teichmüller rays, train tracks and harmonic maps")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, inspect and stretch flat surfaces
    #[command(subcommand)]
    Surface(commands::SurfaceCmd),
    /// Conformal limits: half-plane structures, ends, truncations
    #[command(subcommand)]
    Limit(commands::LimitCmd),
    /// Train tracks: census, weights, splits, recurrence, assembly
    #[command(subcommand)]
    Track(commands::TrackCmd),
    /// Ideal polygons, cross-ratios and crowns in the hyperbolic plane
    #[command(subcommand)]
    Hyp(commands::HypCmd),
    /// Harmonic maps with polynomial Hopf differential
    #[command(subcommand)]
    Harmonic(commands::HarmonicCmd),
    /// Reproducible end-to-end scenarios
    Demo(demo::DemoArgs),
}

#[derive(Debug)]
pub enum CliError {
    /// Bad input: flags, files, schemas, or a failed check. Exit code 1.
    Invalid(String),
    /// A numerical solve did not converge. Exit code 2.
    NotConverged(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "error: {m}"),
            CliError::NotConverged(m) => write!(f, "not converged: {m}"),
        }
    }
}

impl From<teichlab::harmonic::HarmonicError> for CliError {
    fn from(e: teichlab::harmonic::HarmonicError) -> Self {
        match e {
            teichlab::harmonic::HarmonicError::NotConverged { .. } => CliError::NotConverged(e.to_string()),
            other => CliError::Invalid(other.to_string()),
        }
    }
}

pub fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

/// One artifact set: `<stem>.json` plus optional CSV and SVG renderings.
pub struct Report {
    pub stem: String,
    pub json: Value,
    pub csv: Option<String>,
    pub svg: Option<String>,
    /// Printed to stdout.
    pub summary: String,
    /// A checked assertion failed.
    pub failed: bool,
}

impl Report {
    pub fn new(stem: impl Into<String>, json: Value, summary: impl Into<String>) -> Self {
        Report { stem: stem.into(), json, csv: None, svg: None, summary: summary.into(), failed: false }
    }

    pub fn csv(mut self, csv: String) -> Self {
        self.csv = Some(csv);
        self
    }

    pub fn svg(mut self, svg: String) -> Self {
        self.svg = Some(svg);
        self
    }
}

/// Reads a JSON file; syntax errors carry line and column.
pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column())))
}

fn write_reports(cfg: &RunConfig, reports: &[Report]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Invalid(format!("output directory {}: {e}", cfg.out.display())))?;
    let config = cfg.to_json();
    let compact = serde_json::to_string(&config).unwrap_or_default();
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<(), CliError> {
        let path = cfg.out.join(name);
        fs::write(&path, body).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
        written.push(path);
        Ok(())
    };
    for r in reports {
        if cfg.emits(Emit::Json) {
            let mut v = r.json.clone();
            if let Value::Object(m) = &mut v {
                m.insert("config".into(), config.clone());
            }
            put(format!("{}.json", r.stem), to_canonical_string(&v))?;
        }
        if let (true, Some(csv)) = (cfg.emits(Emit::Csv), &r.csv) {
            put(format!("{}.csv", r.stem), format!("# config: {compact}\n{csv}"))?;
        }
        if let (true, Some(svg)) = (cfg.emits(Emit::Svg), &r.svg) {
            let meta = format!("<metadata>{}</metadata>\n", xml_escape(&compact));
            let svg = match svg.find('\n') {
                Some(i) => format!("{}{}{}", &svg[..=i], meta, &svg[i + 1..]),
                None => svg.clone(),
            };
            put(format!("{}.svg", r.stem), svg)?;
        }
    }
    Ok(written)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn threads_from_env() -> Result<Option<usize>, CliError> {
    match std::env::var("TEICHLAB_THREADS") {
        Err(_) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(Some(n)),
            _ => Err(CliError::Invalid(format!("TEICHLAB_THREADS must be a positive integer, got `{s}`"))),
        },
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let threads = threads_from_env()?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(invalid)?;
    }
    let (name, inputs) = match &cli.command {
        Command::Surface(c) => (format!("surface {}", c.name()), c.inputs()),
        Command::Limit(c) => (format!("limit {}", c.name()), c.inputs()),
        Command::Track(c) => (format!("track {}", c.name()), c.inputs()),
        Command::Hyp(c) => (format!("hyp {}", c.name()), c.inputs()),
        Command::Harmonic(c) => (format!("harmonic {}", c.name()), c.inputs()),
        Command::Demo(d) => (format!("demo {}", d.name()), Vec::new()),
    };
    let mut cfg = RunConfig::resolve(name, inputs, &cli.overrides, threads)?;
    let reports = match &cli.command {
        Command::Surface(c) => commands::surface(c, &mut cfg)?,
        Command::Limit(c) => commands::limit(c, &mut cfg)?,
        Command::Track(c) => commands::track(c, &mut cfg)?,
        Command::Hyp(c) => commands::hyp(c, &mut cfg)?,
        Command::Harmonic(c) => commands::harmonic(c, &mut cfg)?,
        Command::Demo(d) => demo::run(d, &mut cfg, &cli.overrides)?,
    };
    for r in &reports {
        println!("{}", r.summary);
    }
    for p in write_reports(&cfg, &reports)? {
        println!("wrote {}", p.display());
    }
    Ok(reports.iter().all(|r| !r.failed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: a checked assertion failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(match e {
                CliError::Invalid(_) => 1,
                CliError::NotConverged(_) => 2,
            })
        }
    }
}
