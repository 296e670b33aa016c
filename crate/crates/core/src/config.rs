//! JSON configuration loading.
//!
//! A file holding a top-level `"layers"` key is a [`NetworkSpec`];
//! anything else is a single [`ColumnConfig`]. Every invariant is checked at
//! load time, and errors point at the offending line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::column::{ColumnConfig, ColumnError};
use crate::network::{NetworkError, NetworkSpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config file {} not found", path.display())]
    NotFound { path: PathBuf },
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}:{column}: schema error: {message}", path.display())]
    Schema {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{}:{line}: invalid `{field}`: {message}", path.display())]
    Invariant {
        path: PathBuf,
        field: String,
        line: usize,
        message: String,
    },
}

impl ConfigError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ConfigError::Schema { line, .. } | ConfigError::Invariant { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// A parsed and validated configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LoadedConfig {
    Network(NetworkSpec),
    Column(ColumnConfig),
}

impl LoadedConfig {
    /// Single columns are lifted to a one-layer network.
    pub fn into_network(self) -> NetworkSpec {
        match self {
            LoadedConfig::Network(spec) => spec,
            LoadedConfig::Column(cfg) => NetworkSpec::single_column(cfg),
        }
    }

    pub fn synapse_count(&self) -> u64 {
        match self {
            LoadedConfig::Network(spec) => spec.total_synapses(),
            LoadedConfig::Column(cfg) => cfg.synapse_count(),
        }
    }
}

pub fn parse_config(path: impl AsRef<Path>) -> Result<LoadedConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            ConfigError::NotFound { path: path.into() }
        } else {
            ConfigError::Io {
                path: path.into(),
                source,
            }
        }
    })?;
    parse_config_str(&text, path)
}

/// Parses config text; `origin` only labels error messages.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<LoadedConfig, ConfigError> {
    let schema = |e: serde_json::Error| ConfigError::Schema {
        path: origin.into(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    };
    let value: serde_json::Value = serde_json::from_str(text).map_err(schema)?;
    if value.get("layers").is_some() {
        let spec: NetworkSpec = serde_json::from_str(text).map_err(schema)?;
        spec.validate()
            .map_err(|e| network_invariant(text, origin, e))?;
        Ok(LoadedConfig::Network(spec))
    } else {
        let cfg: ColumnConfig = serde_json::from_str(text).map_err(schema)?;
        cfg.validate()
            .map_err(|e| column_invariant(text, origin, 0..text.len(), e))?;
        Ok(LoadedConfig::Column(cfg))
    }
}

fn column_invariant(
    text: &str,
    origin: &Path,
    span: std::ops::Range<usize>,
    e: ColumnError,
) -> ConfigError {
    let field = match &e {
        ColumnError::Invariant { field, .. } => *field,
        _ => "column_config",
    };
    let message = match e {
        ColumnError::Invariant { message, .. } => message,
        other => other.to_string(),
    };
    let offset = find_key(text, span.clone(), field).unwrap_or(span.start);
    ConfigError::Invariant {
        path: origin.into(),
        field: field.into(),
        line: line_of(text, offset),
        message,
    }
}

fn network_invariant(text: &str, origin: &Path, e: NetworkError) -> ConfigError {
    let layer_span = |layer: usize| {
        layer_spans(text)
            .and_then(|spans| spans.get(layer).cloned())
            .unwrap_or(0..text.len())
    };
    match e {
        NetworkError::Column { layer, source } => {
            let span = layer_span(layer);
            match column_invariant(text, origin, span, source) {
                ConfigError::Invariant {
                    path,
                    field,
                    line,
                    message,
                } => ConfigError::Invariant {
                    path,
                    field: format!("layers[{layer}].column_config.{field}"),
                    line,
                    message,
                },
                other => other,
            }
        }
        NetworkError::Spec { layer, message } => ConfigError::Invariant {
            path: origin.into(),
            field: format!("layers[{layer}]"),
            line: line_of(text, layer_span(layer).start),
            message,
        },
        NetworkError::SynapseCount { .. } => ConfigError::Invariant {
            path: origin.into(),
            field: "total_synapses".into(),
            line: line_of(
                text,
                find_key(text, 0..text.len(), "total_synapses").unwrap_or(0),
            ),
            message: e.to_string(),
        },
        NetworkError::Dimension { .. } => ConfigError::Invariant {
            path: origin.into(),
            field: "input_dim".into(),
            line: line_of(
                text,
                find_key(text, 0..text.len(), "input_dim").unwrap_or(0),
            ),
            message: e.to_string(),
        },
    }
}

/// 1-based line of a byte offset.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

/// Byte offset of the first `"key":` inside `span`.
fn find_key(text: &str, span: std::ops::Range<usize>, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let region = &text[span.clone()];
    let mut from = 0;
    while let Some(i) = region[from..].find(&needle) {
        let at = from + i;
        let rest = region[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            return Some(span.start + at);
        }
        from = at + needle.len();
    }
    None
}

/// Byte spans of the elements of the top-level `"layers"` array.
fn layer_spans(text: &str) -> Option<Vec<std::ops::Range<usize>>> {
    let key = find_key(text, 0..text.len(), "layers")?;
    let open = key + text[key..].find('[')?;
    let bytes = text.as_bytes();
    let mut spans = Vec::new();
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    let mut start = None;
    for (i, &b) in bytes.iter().enumerate().skip(open + 1) {
        if in_string {
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match b {
            b'"' => in_string = true,
            b'{' | b'[' => {
                if depth == 0 {
                    start = Some(i);
                }
                depth += 1;
            }
            b'}' | b']' if depth == 0 => break,
            b'}' | b']' => {
                depth -= 1;
                if depth == 0 {
                    spans.push(start.take()?..i + 1);
                }
            }
            _ => {}
        }
    }
    Some(spans)
}

/// Trace output encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Simulate,
    Learn,
    Ppa,
    Bench,
}

/// One command-line invocation after argument parsing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub config_path: Option<PathBuf>,
    pub output_path: Option<PathBuf>,
    pub seed: Option<u64>,
    pub cycles: Option<u64>,
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("`{command:?}` requires {field}")]
pub struct MissingField {
    pub command: Command,
    pub field: &'static str,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), MissingField> {
        let need = |present: bool, field| {
            if present {
                Ok(())
            } else {
                Err(MissingField {
                    command: self.command,
                    field,
                })
            }
        };
        match self.command {
            Command::Simulate | Command::Learn => {
                need(self.config_path.is_some(), "a config path")?;
                need(self.output_path.is_some(), "an output path")?;
                need(self.cycles.is_some(), "a cycle count")
            }
            Command::Ppa => need(self.config_path.is_some(), "a config path"),
            Command::Bench => Ok(()),
        }
    }

    /// The override wins over whatever seed the file carries.
    pub fn effective_seed(&self, file_seed: u64) -> u64 {
        self.seed.unwrap_or(file_seed)
    }
}

/// Replaces every column seed; per-column streams are still derived from
/// it, so distinct columns stay decorrelated.
pub fn apply_seed(spec: &mut NetworkSpec, seed: u64) {
    for layer in &mut spec.layers {
        layer.column_config.seed = seed;
    }
}
