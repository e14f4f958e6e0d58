//! Command-line front end: config loading, artifact emission and the
//! figure pipelines.

pub mod config;
pub mod plot;

mod circuit_cmd;
mod current_cmd;
mod jitter_cmd;
mod misc_cmd;
mod optics_cmd;
mod output;
mod reproduce;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Component, Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use config::RunId;

/// Failure of a run. Usage errors exit with 2, computation errors with 1.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Usage(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }

    /// One-line JSON record for stderr.
    pub fn to_line(&self) -> String {
        let (kind, msg) = match self {
            CliError::Usage(m) => ("usage", m),
            CliError::Compute(m) => ("compute", m),
        };
        let one_line = msg.split_whitespace().collect::<Vec<_>>().join(" ");
        serde_json::json!({ "error": kind, "message": one_line, "exit_code": self.exit_code() }).to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Compute(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn compute<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Compute(e.to_string())
}

/// In-memory outputs keyed by file name relative to the output directory.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Artifacts {
    files: BTreeMap<String, Vec<u8>>,
}

impl Artifacts {
    pub fn new() -> Self {
        Artifacts::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.insert(name.into(), bytes);
    }

    /// Pretty JSON with sorted keys and a trailing newline.
    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        self.insert(name, output::json_bytes(value)?);
        Ok(())
    }

    pub fn extend(&mut self, other: Artifacts) {
        self.files.extend(other.files);
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.files.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }
}

/// A subcommand backed by a typed config.
pub(crate) trait Command: Serialize + DeserializeOwned + Sync {
    /// Fills derived fields and inlines referenced files, so the echoed
    /// config alone reproduces the run.
    fn resolve(&mut self) -> Result<()> {
        Ok(())
    }

    fn execute(&self) -> Result<Artifacts>;
}

#[derive(Debug, Parser)]
#[command(name = "fracsnap", version, about = "Nanowire detector design and analysis toolkit")]
struct Cli {
    /// Directory receiving all outputs and the manifest.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    /// Worker threads for parallel stages.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Args, Clone, Default)]
struct Common {
    /// TOML config file; an emitted manifest is accepted as well.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one config entry; dotted keys address nested tables.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Random seed, for commands that draw samples.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args, Clone)]
struct CoupleArgs {
    #[command(flatten)]
    common: Common,
    /// Mode-field diameter, µm.
    #[arg(long)]
    mfd: Option<f64>,
    /// Side of the square active area, µm.
    #[arg(long)]
    side: Option<f64>,
    /// Offset `dx,dy` in µm.
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Fig1a,
    Fig1e,
    Fig1f,
    Fig4,
    Jitter,
    All,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Fig1a => "fig1a",
            Target::Fig1e => "fig1e",
            Target::Fig1f => "fig1f",
            Target::Fig4 => "fig4",
            Target::Jitter => "jitter",
            Target::All => "all",
        }
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate a nanowire layout (SVG and layout-json).
    Geometry(Common),
    /// Solve the current distribution of a representative unit.
    SolveCurrent(Common),
    /// TE/TM absorptance spectra of a layer stack.
    Absorptance(Common),
    /// Standing-wave intensity through a layer stack.
    Field(Common),
    /// Fiber-to-detector coupling efficiency.
    Couple(CoupleArgs),
    /// Transient simulation of the avalanche cascade.
    PulseSim(Common),
    /// Fit a timing-jitter histogram.
    FitJitter(Common),
    /// Efficiency, polarization sensitivity and budget arithmetic.
    Sde(Common),
    /// Maximize nanowire absorptance over layer thicknesses.
    Optimize(Common),
    /// Rerun a bundled figure pipeline.
    Reproduce {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `argv` (program name first) and runs the command. Returns the
/// process exit code; errors are reported as one JSON line on stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                let _ = e.print();
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand { 2 } else { 0 };
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            let err = CliError::Usage(first.to_string());
            eprintln!("{}", err.to_line());
            return err.exit_code();
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.to_line());
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(j) = cli.jobs {
            if j == 0 {
                return Err(CliError::Usage("--jobs must be at least 1".into()));
            }
            b = b.num_threads(j);
        }
        b.build().map_err(compute)?
    };
    let out = cli.out_dir;
    let id = |name: &str| RunId { command: name.into(), target: None };
    match cli.command {
        Cmd::Geometry(c) => drive::<current_cmd::GeometryConfig>(&id("geometry"), &c, &[], &out, &pool),
        Cmd::SolveCurrent(c) => drive::<current_cmd::SolveCurrentConfig>(&id("solve-current"), &c, &[], &out, &pool),
        Cmd::Absorptance(c) => drive::<optics_cmd::AbsorptanceConfig>(&id("absorptance"), &c, &[], &out, &pool),
        Cmd::Field(c) => drive::<optics_cmd::FieldConfig>(&id("field"), &c, &[], &out, &pool),
        Cmd::Couple(a) => {
            let mut extra = Vec::new();
            if let Some(m) = a.mfd {
                extra.push(format!("mfd_um={m:?}"));
            }
            if let Some(s) = a.side {
                extra.push(format!("side_um={s:?}"));
            }
            if let Some(o) = &a.offset {
                let parts: Vec<&str> = o.split(',').map(str::trim).collect();
                let vals: Vec<f64> = parts.iter().filter_map(|p| p.parse().ok()).collect();
                if parts.len() != 2 || vals.len() != 2 {
                    return Err(CliError::Usage(format!("--offset expects dx,dy, got '{o}'")));
                }
                extra.push(format!("offset_um=[{:?}, {:?}]", vals[0], vals[1]));
            }
            drive::<misc_cmd::CoupleConfig>(&id("couple"), &a.common, &extra, &out, &pool)
        }
        Cmd::PulseSim(c) => drive::<circuit_cmd::PulseSimConfig>(&id("pulse-sim"), &c, &[], &out, &pool),
        Cmd::FitJitter(c) => drive::<jitter_cmd::FitJitterConfig>(&id("fit-jitter"), &c, &[], &out, &pool),
        Cmd::Sde(c) => drive::<misc_cmd::SdeConfig>(&id("sde"), &c, &[], &out, &pool),
        Cmd::Optimize(c) => drive::<optics_cmd::OptimizeConfig>(&id("optimize"), &c, &[], &out, &pool),
        Cmd::Reproduce { target, common } => {
            let rid = RunId { command: "reproduce".into(), target: Some(target.name().into()) };
            let mut extra = Vec::new();
            extra.push(format!("target=\"{}\"", target.name()));
            drive::<reproduce::ReproduceConfig>(&rid, &common, &extra, &out, &pool)
        }
    }
}

fn drive<C: Command>(id: &RunId, common: &Common, extra: &[String], out: &Path, pool: &rayon::ThreadPool) -> Result<()> {
    let mut table = match &common.config {
        Some(p) => config::read_table(p, id)?,
        None => toml::Table::new(),
    };
    config::apply_overrides(&mut table, &common.set)?;
    // dedicated flags win over generic overrides
    config::apply_overrides(&mut table, extra)?;
    if let Some(seed) = common.seed {
        config::set_path(&mut table, "seed", toml::Value::Integer(seed as i64))?;
    }
    let mut cfg: C = config::from_table(table)?;
    cfg.resolve()?;
    let artifacts = pool.install(|| cfg.execute())?;
    let manifest = config::manifest(id, &cfg, &artifacts)?;
    write_outputs(out, &artifacts, &manifest)
}

fn check_name(name: &str) -> Result<()> {
    let p = Path::new(name);
    let plain = !name.is_empty() && p.components().all(|c| matches!(c, Component::Normal(_)));
    if !plain {
        return Err(CliError::Compute(format!("refusing to write '{name}' outside the output directory")));
    }
    Ok(())
}

/// Writes every artifact, then the manifest, under `out`.
fn write_outputs(out: &Path, artifacts: &Artifacts, manifest: &[u8]) -> Result<()> {
    for name in artifacts.names() {
        check_name(name)?;
    }
    let io = |p: &Path, e: std::io::Error| CliError::Compute(format!("cannot write {}: {e}", p.display()));
    std::fs::create_dir_all(out).map_err(|e| io(out, e))?;
    for (name, bytes) in &artifacts.files {
        let path = out.join(name);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| io(&path, e))?;
    }
    let path = out.join(config::MANIFEST_NAME);
    std::fs::write(&path, manifest).map_err(|e| io(&path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_stay_inside() {
        assert!(check_name("a/b.csv").is_ok());
        for bad in ["", "../x", "/abs", "a/../../x"] {
            assert!(check_name(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn error_line_is_single_json() {
        let e = CliError::Compute("multi\nline  message".into());
        let line = e.to_line();
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["error"], "compute");
        assert_eq!(v["message"], "multi line message");
    }
}
