//! Scenario configuration: TOML (or the JSON echo in summary.json), strict
//! field checking, and sweeps over dotted parameter paths.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use schemars::JsonSchema;
use serde::{Deserialize, Serialize};
use wgqed::filter::{FilterSpec, FrequencyGrid};
use wgqed::{C64, ChainParams, DriveEnvelope, Geometry, SystemParams, TimeGrid};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Steady-state g²(ζ) of one emitter under constant drive.
    SteadyG2,
    /// Pulsed ⟨n⟩ and g²ₚ of one emitter.
    PulsedG2,
    /// Filtered g²ₚ and η_sp over the bandwidths in `filter.kappa`.
    FilterMap,
    /// Lorentzian against Gaussian filtering over `filter.kappa`.
    FilterCompare,
    /// Steady-state g²(ζ) of the transmitted light of a chain.
    ChainG2,
    /// Pulsed g²ₚ from the amplitudes and from the density-matrix oracle.
    Validate,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Self::SteadyG2 => "steady-g2",
            Self::PulsedG2 => "pulsed-g2",
            Self::FilterMap => "filter-map",
            Self::FilterCompare => "filter-compare",
            Self::ChainG2 => "chain-g2",
            Self::Validate => "validate",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub scenario: Scenario,
    /// Worker threads, 0 = one per core. Results do not depend on it.
    #[serde(default)]
    pub threads: usize,
    pub params: ParamsConfig,
    pub drive: DriveConfig,
    pub grid: GridConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steady: Option<SteadyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub beta_r: f64,
    /// Omitted β_L and β_S share what β_R leaves of 1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta_s: Option<f64>,
    #[serde(default)]
    pub delta: f64,
    /// Chain only: number of emitters with spacing phase `k_dz`, or explicit
    /// phases k₀z_j.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_emitters: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_dz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum DriveShape {
    Constant,
    Gaussian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum GeometryConfig {
    Waveguide,
    Side,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub kind: DriveShape,
    pub geometry: GeometryConfig,
    /// Constant drive: incident field Ẽ (waveguide) or Rabi frequency (side).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
    /// Phase of the constant drive in radians.
    #[serde(default)]
    pub phase: f64,
    /// Gaussian pulse: Ω² has standard deviation `sigma`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    /// Pulse area ∫Ω dζ, π by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default)]
    pub zeta_start: f64,
    /// Required for constant drives; pulses default to the pulse end plus
    /// 12 lifetimes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zeta_end: Option<f64>,
    pub n_steps: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SteadyConfig {
    #[serde(default = "default_branch")]
    pub branch_fraction: f64,
    #[serde(default = "default_tol")]
    pub convergence_tol: f64,
    #[serde(default = "yes")]
    pub substitution: bool,
}

fn default_branch() -> f64 {
    0.4
}

fn default_tol() -> f64 {
    1e-2
}

fn yes() -> bool {
    true
}

impl Default for SteadyConfig {
    fn default() -> Self {
        Self { branch_fraction: default_branch(), convergence_tol: default_tol(), substitution: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum FilterShape {
    Lorentzian,
    Gaussian,
    /// Three-column text file `omega re im`, path relative to the config.
    Table,
    AllPass,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, JsonSchema)]
#[serde(rename_all = "kebab-case")]
pub enum FilterMethod {
    #[default]
    Fft,
    Direct,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct FilterConfig {
    /// Ignored by filter-compare, which runs both analytic shapes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<FilterShape>,
    pub kappa: Vec<f64>,
    #[serde(default)]
    pub omega_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<PathBuf>,
    /// Frequency window; the full band π/h by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(default)]
    pub method: FilterMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Dotted path of a numeric field, e.g. `drive.sigma`.
    pub parameter: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, JsonSchema)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Overridden by `--out`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Dump φ_RR as grid.bin (pulsed-g2 without sweep).
    #[serde(default)]
    pub grid_bin: bool,
}

/// A parsed configuration with the document it came from, so sweeps can
/// rewrite fields by path.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub config: Config,
    pub raw: toml::Table,
    pub base_dir: PathBuf,
}

pub fn schema_json() -> String {
    serde_json::to_string_pretty(&schemars::schema_for!(Config)).expect("schema serializes")
}

fn schema_err(msg: impl Into<String>) -> CliError {
    CliError::Schema(msg.into())
}

/// Parses TOML, or JSON when the file ends in `.json` (the config echo of a
/// previous run).
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let is_json = path.extension().is_some_and(|e| e == "json");
    let mut loaded = if is_json { parse_json(&text)? } else { parse(&text)? };
    loaded.base_dir = base_dir;
    Ok(loaded)
}

pub fn parse(text: &str) -> Result<Loaded, CliError> {
    let raw: toml::Table = toml::from_str(text).map_err(|e| schema_err(e.to_string()))?;
    let config: Config = toml::from_str(text).map_err(|e| schema_err(e.to_string()))?;
    validate(&config)?;
    Ok(Loaded { config, raw, base_dir: PathBuf::new() })
}

fn parse_json(text: &str) -> Result<Loaded, CliError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| schema_err(e.to_string()))?;
    // accept either a bare config or a summary.json with its echo
    let value = value.get("config").cloned().unwrap_or(value);
    let config: Config = serde_json::from_value(value).map_err(|e| schema_err(e.to_string()))?;
    let raw = toml::Table::try_from(&config).map_err(|e| schema_err(e.to_string()))?;
    validate(&config)?;
    Ok(Loaded { config, raw, base_dir: PathBuf::new() })
}

fn finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(schema_err(format!("{name} must be finite, got {v}")))
    }
}

/// Checks that do not need any numerics.
pub fn validate(c: &Config) -> Result<(), CliError> {
    if c.grid.n_steps == 0 {
        return Err(schema_err("grid.n_steps must be at least 1"));
    }
    match c.drive.kind {
        DriveShape::Constant => {
            if c.drive.amplitude.is_none() {
                return Err(schema_err("drive.amplitude is required for a constant drive"));
            }
            if c.grid.zeta_end.is_none() {
                return Err(schema_err("grid.zeta_end is required for a constant drive"));
            }
        }
        DriveShape::Gaussian => {
            if c.drive.sigma.is_none() {
                return Err(schema_err("drive.sigma is required for a gaussian drive"));
            }
        }
    }
    let needs_filter = matches!(c.scenario, Scenario::FilterMap | Scenario::FilterCompare);
    match (&c.filter, needs_filter) {
        (None, true) => return Err(schema_err(format!("scenario {} needs a [filter] section", c.scenario.name()))),
        (Some(f), true) => {
            if f.kappa.is_empty() {
                return Err(schema_err("filter.kappa is empty"));
            }
            for k in &f.kappa {
                finite("filter.kappa", *k)?;
            }
            if c.scenario == Scenario::FilterMap && f.kind == Some(FilterShape::Table) && f.table.is_none() {
                return Err(schema_err("filter.table is required for kind = \"table\""));
            }
        }
        _ => {}
    }
    let constant = c.drive.kind == DriveShape::Constant;
    match c.scenario {
        Scenario::SteadyG2 | Scenario::ChainG2 if !constant => {
            return Err(schema_err(format!("scenario {} needs drive.kind = \"constant\"", c.scenario.name())))
        }
        Scenario::PulsedG2 | Scenario::FilterMap | Scenario::FilterCompare | Scenario::Validate if constant => {
            return Err(schema_err(format!("scenario {} needs a pulsed drive", c.scenario.name())))
        }
        _ => {}
    }
    let chain_fields = c.params.n_emitters.is_some() || c.params.k_dz.is_some() || c.params.phases.is_some();
    if c.scenario != Scenario::ChainG2 && chain_fields {
        return Err(schema_err(format!(
            "params.n_emitters, k_dz and phases belong to chain-g2, not {}",
            c.scenario.name()
        )));
    }
    if let Some(s) = &c.sweep {
        if s.values.is_empty() {
            return Err(schema_err(format!("sweep.values is empty (parameter {})", s.parameter)));
        }
        for v in &s.values {
            finite("sweep.values", *v)?;
        }
        if c.output.grid_bin {
            return Err(schema_err("output.grid_bin cannot be combined with a sweep"));
        }
    }
    if c.output.grid_bin && c.scenario != Scenario::PulsedG2 {
        return Err(schema_err("output.grid_bin is only written by pulsed-g2"));
    }
    Ok(())
}

/// Sets the numeric field at `path` and re-parses; unknown paths are schema
/// errors.
pub fn with_value(loaded: &Loaded, path: &str, value: f64) -> Result<Config, CliError> {
    let mut raw = loaded.raw.clone();
    let parts: Vec<&str> = path.split('.').collect();
    let (last, parents) = parts.split_last().filter(|(l, _)| !l.is_empty()).ok_or_else(|| schema_err("sweep.parameter is empty"))?;
    let mut table = &mut raw;
    for p in parents {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry.as_table_mut().ok_or_else(|| schema_err(format!("sweep.parameter {path}: {p} is not a section")))?;
    }
    let new = match table.get(*last) {
        // list fields (e.g. filter.kappa) sweep as one-element lists
        Some(toml::Value::Array(_)) => toml::Value::Array(vec![toml::Value::Float(value)]),
        Some(toml::Value::Integer(_)) if value.fract() == 0.0 => toml::Value::Integer(value as i64),
        _ => toml::Value::Float(value),
    };
    table.insert(last.to_string(), new);
    raw.remove("sweep");
    let config: Config = raw
        .try_into()
        .map_err(|e: toml::de::Error| schema_err(format!("sweep.parameter {path} = {value}: {}", e.message())))?;
    validate(&config)?;
    Ok(config)
}

impl Config {
    pub fn system_params(&self) -> Result<SystemParams, wgqed::Error> {
        let (bl, bs) = self.side_betas();
        SystemParams::new(self.params.beta_r, bl, bs, self.params.delta)
    }

    fn side_betas(&self) -> (f64, f64) {
        let p = &self.params;
        let rest = 1.0 - p.beta_r;
        match (p.beta_l, p.beta_s) {
            (Some(l), Some(s)) => (l, s),
            (Some(l), None) => (l, rest - l),
            (None, Some(s)) => (rest - s, s),
            (None, None) => (0.5 * rest, 0.5 * rest),
        }
    }

    pub fn chain_params(&self) -> Result<ChainParams, wgqed::Error> {
        let (bl, bs) = self.side_betas();
        let p = &self.params;
        match (&p.phases, p.n_emitters, p.k_dz) {
            (Some(ph), None, None) => ChainParams::new(ph.clone(), p.beta_r, bl, bs, p.delta),
            (None, Some(n), Some(k)) => ChainParams::uniform(n, k, p.beta_r, bl, bs, p.delta),
            (None, Some(1), None) => ChainParams::uniform(1, 0.0, p.beta_r, bl, bs, p.delta),
            _ => Err(wgqed::Error::InvalidParams(
                "give either params.phases or params.n_emitters with params.k_dz".into(),
            )),
        }
    }

    pub fn drive(&self) -> Result<DriveEnvelope, wgqed::Error> {
        let d = &self.drive;
        let geometry = match d.geometry {
            GeometryConfig::Waveguide => Geometry::Waveguide,
            GeometryConfig::Side => Geometry::Side,
        };
        match d.kind {
            DriveShape::Constant => Ok(DriveEnvelope::constant(C64::from_polar(d.amplitude.unwrap_or(0.0), d.phase), geometry)),
            DriveShape::Gaussian => {
                let sigma = d.sigma.unwrap_or(f64::NAN);
                let area = d.area.unwrap_or(PI);
                match d.center {
                    Some(c) => DriveEnvelope::gaussian_centered(sigma, area, c, geometry),
                    None => DriveEnvelope::gaussian(sigma, area, geometry),
                }
            }
        }
    }

    pub fn time_grid(&self, drive: &DriveEnvelope) -> Result<TimeGrid, wgqed::Error> {
        let g = &self.grid;
        match g.zeta_end {
            Some(end) => TimeGrid::new(g.zeta_start, end, g.n_steps),
            None => drive.pulse_grid(g.n_steps),
        }
    }

    pub fn steady_options(&self) -> wgqed::correlations::SteadyOptions {
        let s = self.steady.clone().unwrap_or_default();
        wgqed::correlations::SteadyOptions {
            branch_fraction: s.branch_fraction,
            convergence_tol: s.convergence_tol,
            substitution: s.substitution,
        }
    }
}

impl FilterConfig {
    pub fn spec(&self, shape: FilterShape, kappa: f64, base_dir: &Path) -> Result<FilterSpec, CliError> {
        let mut spec = match shape {
            FilterShape::Lorentzian => FilterSpec::lorentzian(kappa),
            FilterShape::Gaussian => FilterSpec::gaussian(kappa),
            FilterShape::AllPass => FilterSpec::all_pass(f64::MAX.sqrt()),
            FilterShape::Table => {
                let rel = self.table.as_ref().ok_or_else(|| schema_err("filter.table is required for kind = \"table\""))?;
                let path = base_dir.join(rel);
                let text = std::fs::read_to_string(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                Ok(FilterSpec::parse_table(&text, kappa).map_err(|e| schema_err(format!("filter.table {}: {e}", path.display())))?)
            }
        }
        .map_err(|e| schema_err(format!("filter: {e}")))?;
        spec.omega_c = self.omega_c;
        Ok(spec)
    }

    pub fn frequency_grid(&self, grid: &TimeGrid) -> Result<FrequencyGrid, wgqed::Error> {
        let kmin = self.kappa.iter().copied().fold(f64::INFINITY, f64::min);
        FrequencyGrid::resolve(grid, kmin, self.omega_max)
    }
}
