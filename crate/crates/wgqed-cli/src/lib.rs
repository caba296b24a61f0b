//! Scenario runner for the `wgqed` library: TOML configs in, CSV and JSON
//! out.

pub mod config;
pub mod output;
pub mod scenarios;

use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Schema(String),
    #[error("{op} failed: {source}")]
    Numerical {
        op: &'static str,
        #[source]
        source: wgqed::Error,
    },
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Schema(_) => 2,
            Self::Numerical { .. } => 3,
            Self::Io(_) => 1,
        }
    }
}

/// Bundled configurations reproducing the figures, `(name, toml)`.
pub const PRESETS: &[(&str, &str)] = &[
    ("steady-g2", include_str!("../presets/steady-g2.toml")),
    ("chain-g2-mirror", include_str!("../presets/chain-g2-mirror.toml")),
    ("chain-g2-oscillating", include_str!("../presets/chain-g2-oscillating.toml")),
    ("pulsed-g2", include_str!("../presets/pulsed-g2.toml")),
    ("validate", include_str!("../presets/validate.toml")),
    ("filter-efficiency", include_str!("../presets/filter-efficiency.toml")),
    ("filter-map", include_str!("../presets/filter-map.toml")),
    ("filter-compare", include_str!("../presets/filter-compare.toml")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

/// First comment line of a preset.
pub fn preset_description(text: &str) -> &str {
    text.lines().next().and_then(|l| l.strip_prefix('#')).map(str::trim).unwrap_or("")
}

/// Runs a loaded config on a pool of `threads` workers (config value unless
/// overridden; 0 = one per core) and writes the outputs.
pub fn run(loaded: &config::Loaded, out_dir: Option<&Path>, threads: Option<usize>) -> Result<(PathBuf, scenarios::Outcome), CliError> {
    let dir = out_dir
        .map(Path::to_path_buf)
        .or_else(|| loaded.config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(loaded.config.threads))
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let outcome = pool.install(|| scenarios::run(loaded))?;
    output::write_all(&dir, &loaded.config, &outcome)?;
    Ok((dir, outcome))
}
