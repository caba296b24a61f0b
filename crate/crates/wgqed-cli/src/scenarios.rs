//! One function per scenario, each producing CSV rows and summary scalars.

use serde_json::{Map, Value, json};
use wgqed::correlations;
use wgqed::dynamics::{self, EmitterOptions};
use wgqed::filter::{self, FilterSpec, FilteredStats};
use wgqed::oracle;
use wgqed::{PhotonAmplitudeSet, TwoPhotonSelection};

use crate::config::{Config, FilterMethod, FilterShape, Loaded, Scenario};
use crate::CliError;

/// CSV header plus rows, and the scalar results for summary.json.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub scalars: Map<String, Value>,
    /// φ_RR as (rows, cols, row-major values) for grid.bin.
    pub grid: Option<(usize, usize, Vec<wgqed::C64>)>,
}

fn numerical(op: &'static str) -> impl Fn(wgqed::Error) -> CliError {
    move |source| CliError::Numerical { op, source }
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Runs the scenario, once or per sweep value. Swept runs prepend the swept
/// field (its last path segment) as the first column.
pub fn run(loaded: &Loaded) -> Result<Outcome, CliError> {
    let Some(sweep) = &loaded.config.sweep else {
        return run_point(&loaded.config, loaded);
    };
    let column = sweep.parameter.rsplit('.').next().unwrap_or(&sweep.parameter).to_string();
    let mut out = Outcome::default();
    let mut points = Vec::with_capacity(sweep.values.len());
    for &v in &sweep.values {
        let config = crate::config::with_value(loaded, &sweep.parameter, v)?;
        let point = run_point(&config, loaded)?;
        if out.header.is_empty() {
            out.header.push(column.clone());
            out.header.extend(point.header.iter().cloned());
        }
        out.rows.extend(point.rows.into_iter().map(|r| std::iter::once(v).chain(r).collect()));
        let mut s = point.scalars;
        s.insert(column.clone(), json!(v));
        points.push(Value::Object(s));
    }
    out.scalars.insert("points".into(), Value::Array(points));
    Ok(out)
}

pub fn run_point(c: &Config, loaded: &Loaded) -> Result<Outcome, CliError> {
    match c.scenario {
        Scenario::SteadyG2 => steady(c),
        Scenario::ChainG2 => chain(c),
        Scenario::PulsedG2 => pulsed(c),
        Scenario::Validate => validate(c),
        Scenario::FilterMap => filter_map(c, loaded),
        Scenario::FilterCompare => filter_compare(c, loaded),
    }
}

fn steady_outcome(s: correlations::SteadyG2) -> Outcome {
    let mut scalars = Map::new();
    scalars.insert("g2_zero".into(), json!(s.g2[0]));
    scalars.insert("g1".into(), json!(s.g1));
    scalars.insert("drift".into(), json!(s.drift));
    Outcome {
        header: header(&["zeta", "g2"]),
        rows: s.delay.iter().zip(&s.g2).map(|(d, g)| vec![*d, *g]).collect(),
        scalars,
        grid: None,
    }
}

fn steady(c: &Config) -> Result<Outcome, CliError> {
    let p = c.system_params().map_err(numerical("params"))?;
    let d = c.drive().map_err(numerical("drive"))?;
    let g = c.time_grid(&d).map_err(numerical("grid"))?;
    let s = correlations::g2_normalized_steady(&p, &d, &g, &c.steady_options()).map_err(numerical("g2_normalized_steady"))?;
    Ok(steady_outcome(s))
}

fn chain(c: &Config) -> Result<Outcome, CliError> {
    let p = c.chain_params().map_err(numerical("params"))?;
    let d = c.drive().map_err(numerical("drive"))?;
    let g = c.time_grid(&d).map_err(numerical("grid"))?;
    let s = correlations::g2_normalized_steady_chain(&p, &d, &g, &c.steady_options())
        .map_err(numerical("g2_normalized_steady_chain"))?;
    let mut out = steady_outcome(s);
    out.scalars.insert("n_emitters".into(), json!(p.n()));
    Ok(out)
}

fn solve_pulsed(c: &Config) -> Result<(wgqed::SystemParams, wgqed::DriveEnvelope, PhotonAmplitudeSet), CliError> {
    let p = c.system_params().map_err(numerical("params"))?;
    let d = c.drive().map_err(numerical("drive"))?;
    let g = c.time_grid(&d).map_err(numerical("grid"))?;
    let opts = EmitterOptions { two_photon: TwoPhotonSelection::Full, ..Default::default() };
    let set = dynamics::solve_emitter(&p, &d, &g, &opts).map_err(numerical("solve_emitter"))?;
    Ok((p, d, set))
}

fn pulsed(c: &Config) -> Result<Outcome, CliError> {
    let (_, _, set) = solve_pulsed(c)?;
    let s = correlations::pulsed_stats(&set).map_err(numerical("pulsed_g2"))?;
    let mut scalars = Map::new();
    scalars.insert("mean_n".into(), json!(s.mean_n));
    scalars.insert("g2_pulsed".into(), json!(s.g2_pulsed));
    scalars.insert("g2p".into(), json!(s.g2p));
    let grid = if c.output.grid_bin {
        let rr = set.two(wgqed::Channel::R, wgqed::Channel::R).map_err(numerical("grid dump"))?;
        let n = rr.n();
        // row e1, column e2: φ(ζ_e2, ζ_e1), zero for e2 < e1
        Some((n, n, (0..n).flat_map(|e1| (0..n).map(move |e2| (e1, e2))).map(|(e1, e2)| rr.get(e2, e1)).collect()))
    } else {
        None
    };
    Ok(Outcome { header: header(&["mean_n", "g2_pulsed", "g2p"]), rows: vec![vec![s.mean_n, s.g2_pulsed, s.g2p]], scalars, grid })
}

fn validate(c: &Config) -> Result<Outcome, CliError> {
    let (p, d, set) = solve_pulsed(c)?;
    let a = correlations::pulsed_stats(&set).map_err(numerical("pulsed_g2"))?;
    let o = oracle::regression_pulsed_g2(&p, &d, &set.grid).map_err(numerical("regression_pulsed_g2"))?;
    let rel = (a.g2p - o.g2p).abs() / o.g2p;
    let mut scalars = Map::new();
    scalars.insert("g2p_ansatz".into(), json!(a.g2p));
    scalars.insert("g2p_oracle".into(), json!(o.g2p));
    scalars.insert("rel_diff".into(), json!(rel));
    scalars.insert("mean_n_ansatz".into(), json!(a.mean_n));
    scalars.insert("mean_n_oracle".into(), json!(o.mean_n));
    Ok(Outcome {
        header: header(&["g2p_ansatz", "g2p_oracle", "rel_diff", "mean_n_ansatz", "mean_n_oracle"]),
        rows: vec![vec![a.g2p, o.g2p, rel, a.mean_n, o.mean_n]],
        scalars,
        grid: None,
    })
}

fn filtered(set: &PhotonAmplitudeSet, specs: &[FilterSpec], c: &Config) -> Result<Vec<FilteredStats>, CliError> {
    let f = c.filter.as_ref().expect("validated");
    let fg = f.frequency_grid(&set.grid).map_err(numerical("frequency grid"))?;
    let kmin = f.kappa.iter().copied().fold(f64::INFINITY, f64::min);
    fg.validate(&set.grid, kmin).map_err(numerical("frequency grid"))?;
    match f.method {
        FilterMethod::Fft => filter::filter_statistics(set, specs, &fg),
        FilterMethod::Direct => filter::direct_filter_statistics(set, specs, &fg),
    }
    .map_err(numerical("filter_statistics"))
}

fn filter_map(c: &Config, loaded: &Loaded) -> Result<Outcome, CliError> {
    let f = c.filter.as_ref().expect("validated");
    let shape = f.kind.unwrap_or(FilterShape::Lorentzian);
    let (_, _, set) = solve_pulsed(c)?;
    let specs = f.kappa.iter().map(|&k| f.spec(shape, k, &loaded.base_dir)).collect::<Result<Vec<_>, _>>()?;
    let stats = filtered(&set, &specs, c)?;
    let mut scalars = Map::new();
    scalars.insert(
        "g2p_unfiltered".into(),
        json!(correlations::pulsed_g2(&set).map_err(numerical("pulsed_g2"))?),
    );
    Ok(Outcome {
        header: header(&["kappa", "g2p", "eta_sp", "mean_n"]),
        rows: f.kappa.iter().zip(&stats).map(|(k, s)| vec![*k, s.g2p, s.eta_sp, s.mean_n]).collect(),
        scalars,
        grid: None,
    })
}

fn filter_compare(c: &Config, loaded: &Loaded) -> Result<Outcome, CliError> {
    let f = c.filter.as_ref().expect("validated");
    let (_, _, set) = solve_pulsed(c)?;
    let mut specs = Vec::with_capacity(2 * f.kappa.len());
    for shape in [FilterShape::Lorentzian, FilterShape::Gaussian] {
        for &k in &f.kappa {
            specs.push(f.spec(shape, k, &loaded.base_dir)?);
        }
    }
    let stats = filtered(&set, &specs, c)?;
    let bare = correlations::pulsed_g2(&set).map_err(numerical("pulsed_g2"))?;
    let (lor, gau) = stats.split_at(f.kappa.len());
    let mut scalars = Map::new();
    scalars.insert("g2p_unfiltered".into(), json!(bare));
    Ok(Outcome {
        header: header(&["kappa", "g2p_lorentzian", "g2p_gaussian", "g2p_unfiltered", "eta_sp_lorentzian", "eta_sp_gaussian"]),
        rows: f
            .kappa
            .iter()
            .zip(lor.iter().zip(gau))
            .map(|(k, (l, g))| vec![*k, l.g2p, g.g2p, bare, l.eta_sp, g.eta_sp])
            .collect(),
        scalars,
        grid: None,
    })
}
