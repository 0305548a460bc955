//! Resolved run configuration: defaults, then the config file, then flags.

use crate::CliError;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use teichlab::json::{check_schema, num};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Emit {
    Json,
    Csv,
    Svg,
}

impl Emit {
    fn name(self) -> &'static str {
        match self {
            Emit::Json => "json",
            Emit::Csv => "csv",
            Emit::Svg => "svg",
        }
    }
}

/// Numeric and output overrides shared by every subcommand.
#[derive(Clone, Debug, Default, clap::Args)]
pub struct Overrides {
    /// JSON file with default settings; flags take precedence
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Artifacts to write
    #[arg(long, global = true, value_delimiter = ',')]
    pub emit: Option<Vec<Emit>>,
    /// Stretch factor along the ray
    #[arg(long, global = true)]
    pub t: Option<f64>,
    /// Length budget for separatrix tracing
    #[arg(long, global = true)]
    pub budget: Option<f64>,
    /// Half-side of the square domain of the harmonic solve
    #[arg(long, global = true)]
    pub rdom: Option<f64>,
    /// Nodes per side of the harmonic grid
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    /// Residual tolerance of the harmonic solve
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<PathBuf>,
    pub out: PathBuf,
    pub emit: Vec<Emit>,
    pub t: f64,
    pub budget: f64,
    pub rdom: f64,
    pub grid: usize,
    pub tol: f64,
    pub threads: Option<usize>,
    /// Subcommand-specific settings, echoed verbatim.
    pub extra: Value,
}

pub const DEFAULT_T: f64 = 1.0;
pub const DEFAULT_BUDGET: f64 = 50.0;
pub const DEFAULT_RDOM: f64 = 8.0;
pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_TOL: f64 = 1e-9;

impl RunConfig {
    pub fn resolve(subcommand: String, inputs: Vec<PathBuf>, o: &Overrides, threads: Option<usize>) -> Result<Self, CliError> {
        let file = match &o.config {
            Some(p) => read_config(p)?,
            None => FileConfig::default(),
        };
        let c = RunConfig {
            subcommand,
            inputs,
            out: o.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(".")),
            emit: o.emit.clone().or(file.emit).unwrap_or_else(|| vec![Emit::Json]),
            t: o.t.or(file.t).unwrap_or(DEFAULT_T),
            budget: o.budget.or(file.budget).unwrap_or(DEFAULT_BUDGET),
            rdom: o.rdom.or(file.rdom).unwrap_or(DEFAULT_RDOM),
            grid: o.grid.or(file.grid).unwrap_or(DEFAULT_GRID),
            tol: o.tol.or(file.tol).unwrap_or(DEFAULT_TOL),
            threads,
            extra: json!({}),
        };
        c.check()?;
        Ok(c)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |flag: &str, range: &str, v: String| Err(CliError::Invalid(format!("--{flag} must be {range}, got {v}")));
        if !(self.t > 0.0 && self.t.is_finite()) {
            return bad("t", "positive and finite", self.t.to_string());
        }
        if !(self.budget > 0.0 && self.budget <= 1e6) {
            return bad("budget", "in (0, 1e6]", self.budget.to_string());
        }
        if !(self.rdom > 0.0 && self.rdom <= 1e3) {
            return bad("rdom", "in (0, 1000]", self.rdom.to_string());
        }
        if !(8..=4096).contains(&self.grid) {
            return bad("grid", "in [8, 4096]", self.grid.to_string());
        }
        if !(self.tol > 0.0 && self.tol < 1.0) {
            return bad("tol", "in (0, 1)", self.tol.to_string());
        }
        if self.emit.is_empty() {
            return Err(CliError::Invalid("--emit needs at least one of json, csv, svg".into()));
        }
        Ok(())
    }

    pub fn emits(&self, e: Emit) -> bool {
        self.emit.contains(&e)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "teichlab.config/1",
            "subcommand": self.subcommand,
            "inputs": self.inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "out": self.out.display().to_string(),
            "emit": self.emit.iter().map(|e| e.name()).collect::<Vec<_>>(),
            "t": num(self.t),
            "budget": num(self.budget),
            "rdom": num(self.rdom),
            "grid": self.grid,
            "tol": num(self.tol),
            "threads": self.threads,
            "options": self.extra,
        })
    }
}

#[derive(Default)]
struct FileConfig {
    out: Option<PathBuf>,
    emit: Option<Vec<Emit>>,
    t: Option<f64>,
    budget: Option<f64>,
    rdom: Option<f64>,
    grid: Option<usize>,
    tol: Option<f64>,
}

fn read_config(path: &Path) -> Result<FileConfig, CliError> {
    let v = crate::read_json(path)?;
    let at = |m: String| CliError::Invalid(format!("{}: {m}", path.display()));
    check_schema(&v, "teichlab.config").map_err(at)?;
    let obj = v.as_object().ok_or_else(|| at("expected an object".into()))?;
    let mut c = FileConfig::default();
    for (k, x) in obj {
        let float = || x.as_f64().ok_or_else(|| at(format!("field `{k}`: expected a number")));
        match k.as_str() {
            "schema" | "subcommand" | "inputs" | "threads" | "options" => {}
            "out" => c.out = Some(PathBuf::from(x.as_str().ok_or_else(|| at("field `out`: expected a string".into()))?)),
            "emit" => {
                let list = x.as_array().ok_or_else(|| at("field `emit`: expected an array".into()))?;
                let parsed: Result<Vec<Emit>, CliError> = list
                    .iter()
                    .map(|e| match e.as_str() {
                        Some("json") => Ok(Emit::Json),
                        Some("csv") => Ok(Emit::Csv),
                        Some("svg") => Ok(Emit::Svg),
                        _ => Err(at(format!("field `emit`: unknown artifact {e}"))),
                    })
                    .collect();
                c.emit = Some(parsed?);
            }
            "t" => c.t = Some(float()?),
            "budget" => c.budget = Some(float()?),
            "rdom" => c.rdom = Some(float()?),
            "tol" => c.tol = Some(float()?),
            "grid" => c.grid = Some(x.as_u64().ok_or_else(|| at("field `grid`: expected a positive integer".into()))? as usize),
            other => return Err(at(format!("unknown field `{other}`"))),
        }
    }
    Ok(c)
}
