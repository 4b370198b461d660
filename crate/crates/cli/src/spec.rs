//! Run specifications: a command name, its parameters and where the result goes.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, Result};
use crate::params::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandName {
    Energy,
    Stripes,
    Balls,
    Phase,
    Gamma,
    Davila,
    Anneal,
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields, default)]
pub struct OutputArgs {
    /// Output file; standard output when absent
    #[arg(long = "out")]
    pub path: Option<PathBuf>,
    /// Output format (the default depends on the command)
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub command: CommandName,
    #[serde(default = "empty_object")]
    pub parameters: Value,
    #[serde(default)]
    pub output: OutputArgs,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// A run spec whose parameters passed schema validation.
#[derive(Debug, Clone, PartialEq)]
pub enum Job {
    Energy(EnergyParams),
    Stripes(StripesParams),
    Balls(BallsParams),
    Phase(PhaseParams),
    Gamma(GammaParams),
    Davila(DavilaParams),
    Anneal(AnnealParams),
    Verify(VerifyParams),
}

fn typed<T: serde::de::DeserializeOwned>(command: CommandName, value: &Value) -> Result<T> {
    let value = if value.is_null() { empty_object() } else { value.clone() };
    serde_json::from_value(value).map_err(|e| CliError::usage(format!("parameters for {command:?}: {e}")))
}

impl Job {
    pub fn from_spec(spec: &RunSpec) -> Result<Self> {
        let p = &spec.parameters;
        let c = spec.command;
        Ok(match c {
            CommandName::Energy => Job::Energy(typed(c, p)?),
            CommandName::Stripes => Job::Stripes(typed(c, p)?),
            CommandName::Balls => Job::Balls(typed(c, p)?),
            CommandName::Phase => Job::Phase(typed(c, p)?),
            CommandName::Gamma => Job::Gamma(typed(c, p)?),
            CommandName::Davila => Job::Davila(typed(c, p)?),
            CommandName::Anneal => Job::Anneal(typed(c, p)?),
            CommandName::Verify => Job::Verify(typed(c, p)?),
        })
    }

    pub fn command(&self) -> CommandName {
        match self {
            Job::Energy(_) => CommandName::Energy,
            Job::Stripes(_) => CommandName::Stripes,
            Job::Balls(_) => CommandName::Balls,
            Job::Phase(_) => CommandName::Phase,
            Job::Gamma(_) => CommandName::Gamma,
            Job::Davila(_) => CommandName::Davila,
            Job::Anneal(_) => CommandName::Anneal,
            Job::Verify(_) => CommandName::Verify,
        }
    }

    pub fn parameters(&self) -> Value {
        let v = match self {
            Job::Energy(p) => serde_json::to_value(p),
            Job::Stripes(p) => serde_json::to_value(p),
            Job::Balls(p) => serde_json::to_value(p),
            Job::Phase(p) => serde_json::to_value(p),
            Job::Gamma(p) => serde_json::to_value(p),
            Job::Davila(p) => serde_json::to_value(p),
            Job::Anneal(p) => serde_json::to_value(p),
            Job::Verify(p) => serde_json::to_value(p),
        };
        v.expect("parameter structs serialize")
    }

    /// Sweeps default to CSV, everything else to JSON.
    pub fn default_format(&self) -> Format {
        match self {
            Job::Phase(_) | Job::Gamma(_) | Job::Davila(_) => Format::Csv,
            _ => Format::Json,
        }
    }

    pub fn to_spec(&self, output: OutputArgs) -> RunSpec {
        RunSpec { command: self.command(), parameters: self.parameters(), output }
    }
}

/// Reads a run spec, or the spec embedded in a JSON artifact.
pub fn read_spec(path: &Path) -> Result<RunSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut value: Value = serde_json::from_str(&text)?;
    if let Some(obj) = value.as_object_mut() {
        if obj.contains_key("result") {
            value = obj.remove("spec").ok_or_else(|| CliError::usage("artifact has a result but no spec"))?;
        }
    }
    serde_json::from_value(value).map_err(|e| CliError::usage(format!("run spec: {e}")))
}
