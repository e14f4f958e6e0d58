//! Run configuration: a TOML file, `key=value` overrides and the manifest
//! that echoes the resolved result.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use crate::{Artifacts, CliError, Result};

/// Name of the manifest written next to every run's outputs.
pub const MANIFEST_NAME: &str = "manifest.toml";
const MANIFEST_KEY: &str = "manifest";

/// Identity of a run as recorded in its manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunId {
    pub command: String,
    pub target: Option<String>,
}

/// Parses the value side of an override as TOML, falling back to a bare
/// string so `kind=meander` works without quotes.
fn parse_value(raw: &str) -> Value {
    let doc = format!("v = {raw}");
    match doc.parse::<Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.into())),
        Err(_) => Value::String(raw.into()),
    }
}

/// Sets `dotted.key` in `table`, creating intermediate tables.
pub fn set_path(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Usage(format!("bad override key '{key}'")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = match entry {
            Value::Table(t) => t,
            _ => return Err(CliError::Usage(format!("override '{key}': '{p}' is not a table"))),
        };
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Applies `KEY=VALUE` overrides.
pub fn apply_overrides(table: &mut Table, sets: &[String]) -> Result<()> {
    for s in sets {
        let (k, v) = s.split_once('=').ok_or_else(|| CliError::Usage(format!("override '{s}' is not KEY=VALUE")))?;
        set_path(table, k.trim(), parse_value(v.trim()))?;
    }
    Ok(())
}

/// Reads a config file. A `[manifest]` table, as found in emitted
/// manifests, must name the same run and is dropped.
pub fn read_table(path: &Path, id: &RunId) -> Result<Table> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut table: Table =
        text.parse().map_err(|e: toml::de::Error| CliError::Usage(format!("config {}: {}", path.display(), e.message())))?;
    if let Some(m) = table.remove(MANIFEST_KEY) {
        let m = match m {
            Value::Table(t) => t,
            _ => return Err(CliError::Usage("manifest entry must be a table".into())),
        };
        let command = m.get("command").and_then(Value::as_str);
        if command != Some(id.command.as_str()) {
            return Err(CliError::Usage(format!(
                "config was written by '{}', not '{}'",
                command.unwrap_or("?"),
                id.command
            )));
        }
        let target = m.get("target").and_then(Value::as_str);
        if target.is_some() && target != id.target.as_deref() {
            return Err(CliError::Usage(format!(
                "config was written for target '{}', not '{}'",
                target.unwrap_or("?"),
                id.target.as_deref().unwrap_or("?")
            )));
        }
    }
    Ok(table)
}

/// Typed config from a table; unknown keys are usage errors.
pub fn from_table<C: DeserializeOwned>(table: Table) -> Result<C> {
    Value::Table(table).try_into().map_err(|e: toml::de::Error| CliError::Usage(format!("config: {}", e.message().trim())))
}

/// TOML manifest: the resolved config plus a `[manifest]` table naming
/// the run and its outputs.
pub fn manifest<C: Serialize>(id: &RunId, cfg: &C, outputs: &Artifacts) -> Result<Vec<u8>> {
    let mut table = Table::try_from(cfg).map_err(|e| CliError::Compute(format!("cannot serialize config: {e}")))?;
    let mut m = Table::new();
    m.insert("command".into(), Value::String(id.command.clone()));
    if let Some(t) = &id.target {
        m.insert("target".into(), Value::String(t.clone()));
    }
    m.insert("version".into(), Value::String(env!("CARGO_PKG_VERSION").into()));
    m.insert("outputs".into(), Value::Array(outputs.names().map(|n| Value::String(n.to_string())).collect()));
    table.insert(MANIFEST_KEY.into(), Value::Table(m));
    Ok(toml::to_string(&table).map_err(|e| CliError::Compute(format!("cannot write manifest: {e}")))?.into_bytes())
}
