//! N identical emitters at propagation phases k₀z_j along the waveguide.
//!
//! Photon exchange through the waveguide couples the emitters through
//!
//! K_jl = β_R e^{ik₀(z_j − z_l)} for l < j,  K_jl = β_L e^{ik₀(z_l − z_j)} for l > j,
//!
//! so that, with g_j = (Ω_j/2)e^{−iΔ̃ζ},
//!
//! ċ_g  = i Σ_j g_j* c_j
//! ċ_j  = i g_j c_g − c_j/2 − Σ_{l≠j} K_jl c_l + i Σ_{l≠j} g_l* c_jl
//! ċ_jl = i g_l c_j + i g_j c_l − c_jl − Σ_{p∉{j,l}} (K_jp c_pl + K_lp c_jp)
//!
//! After an emission the one-photon amplitudes (φ_g, φ^j_e) follow the
//! single-excitation block of the same equations. Retardation across the
//! chain is neglected; only the propagation phases enter.

use rayon::prelude::*;

use crate::amplitudes::{PhotonAmplitudeSet, SingleSlice, Triangle, TwoPhotonAmplitude, TwoPhotonSelection};
use crate::drive::{DriveEnvelope, Geometry};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::params::{ChainParams, Channel};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct ChainTrajectory {
    pub c_g: Vec<C64>,
    /// `c_e[j][i]`: emitter j excited at node i.
    pub c_e: Vec<Vec<C64>>,
    /// `c_ee[p][i]` for the pair `pairs[p] = (j, l)`, j < l.
    pub c_ee: Vec<Vec<C64>>,
    pub pairs: Vec<(usize, usize)>,
}

/// Pairs (j, l), j < l, in lexicographic order.
pub fn emitter_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|j| (j + 1..n).map(move |l| (j, l))).collect()
}

/// Coefficients of the chain equations on the half-step drive samples.
pub(crate) struct ChainModel {
    n: usize,
    k: Vec<C64>,
    pairs: Vec<(usize, usize)>,
    pair_of: Vec<usize>,
    g: Vec<C64>,
    drive_phase: Vec<C64>,
    h: f64,
    n_steps: usize,
}

impl ChainModel {
    pub(crate) fn new(params: &ChainParams, drive: &DriveEnvelope, grid: &TimeGrid) -> Result<Self> {
        params.validate()?;
        drive.validate()?;
        let n = params.n();
        let mut k = vec![ZERO; n * n];
        for j in 0..n {
            for l in 0..n {
                let dphi = params.phases[j] - params.phases[l];
                k[j * n + l] = if l < j {
                    C64::from_polar(params.beta_r, dphi)
                } else if l > j {
                    C64::from_polar(params.beta_l, -dphi)
                } else {
                    ZERO
                };
            }
        }
        let pairs = emitter_pairs(n);
        let mut pair_of = vec![usize::MAX; n * n];
        for (p, &(a, b)) in pairs.iter().enumerate() {
            pair_of[a * n + b] = p;
            pair_of[b * n + a] = p;
        }
        let drive_phase = params
            .phases
            .iter()
            .map(|&phi| match drive.geometry {
                Geometry::Waveguide => C64::from_polar(1.0, phi),
                Geometry::Side => C64::new(1.0, 0.0),
            })
            .collect();
        Ok(Self {
            n,
            k,
            pairs,
            pair_of,
            g: drive.coupling_samples(grid, params.beta_r, params.delta)?,
            drive_phase,
            h: grid.h(),
            n_steps: grid.n_steps,
        })
    }

    fn full_dim(&self) -> usize {
        1 + self.n + self.pairs.len()
    }

    fn couplings(&self, s: usize, out: &mut [C64]) {
        for (o, p) in out.iter_mut().zip(&self.drive_phase) {
            *o = self.g[s] * p;
        }
    }

    /// Right-hand side of the full (ground, single, double) system.
    fn rhs_full(&self, s: usize, y: &[C64], out: &mut [C64], gj: &mut [C64]) {
        let n = self.n;
        self.couplings(s, gj);
        let pair = |a: usize, b: usize| y[1 + n + self.pair_of[a * n + b]];
        out[0] = I * (0..n).map(|j| gj[j].conj() * y[1 + j]).sum::<C64>();
        for j in 0..n {
            let mut acc = I * gj[j] * y[0] - 0.5 * y[1 + j];
            for l in 0..n {
                if l != j {
                    acc -= self.k[j * n + l] * y[1 + l];
                    acc += I * gj[l].conj() * pair(j, l);
                }
            }
            out[1 + j] = acc;
        }
        for (p, &(a, b)) in self.pairs.iter().enumerate() {
            let mut acc = I * (gj[b] * y[1 + a] + gj[a] * y[1 + b]) - y[1 + n + p];
            for q in 0..n {
                if q != a && q != b {
                    acc -= self.k[a * n + q] * pair(q, b) + self.k[b * n + q] * pair(a, q);
                }
            }
            out[1 + n + p] = acc;
        }
    }

    /// Right-hand side of the single-excitation block (φ_g, φ^j_e).
    fn rhs_single(&self, s: usize, y: &[C64], out: &mut [C64], gj: &mut [C64]) {
        let n = self.n;
        self.couplings(s, gj);
        out[0] = I * (0..n).map(|j| gj[j].conj() * y[1 + j]).sum::<C64>();
        for j in 0..n {
            let mut acc = I * gj[j] * y[0] - 0.5 * y[1 + j];
            for l in 0..n {
                if l != j {
                    acc -= self.k[j * n + l] * y[1 + l];
                }
            }
            out[1 + j] = acc;
        }
    }
}

/// Scratch buffers for one RK4 integration.
struct Rk4 {
    k: [Vec<C64>; 4],
    tmp: Vec<C64>,
    gj: Vec<C64>,
}

impl Rk4 {
    fn new(dim: usize, n: usize) -> Self {
        Self { k: std::array::from_fn(|_| vec![ZERO; dim]), tmp: vec![ZERO; dim], gj: vec![ZERO; n] }
    }

    fn step(
        &mut self,
        h: f64,
        i: usize,
        y: &mut [C64],
        f: impl Fn(usize, &[C64], &mut [C64], &mut [C64]),
    ) {
        let Self { k, tmp, gj } = self;
        let [k1, k2, k3, k4] = k;
        f(2 * i, y, k1, gj);
        for ((t, a), b) in tmp.iter_mut().zip(y.iter()).zip(k1.iter()) {
            *t = a + 0.5 * h * b;
        }
        f(2 * i + 1, tmp, k2, gj);
        for ((t, a), b) in tmp.iter_mut().zip(y.iter()).zip(k2.iter()) {
            *t = a + 0.5 * h * b;
        }
        f(2 * i + 1, tmp, k3, gj);
        for ((t, a), b) in tmp.iter_mut().zip(y.iter()).zip(k3.iter()) {
            *t = a + h * b;
        }
        f(2 * i + 2, tmp, k4, gj);
        let s = h / 6.0;
        for (j, v) in y.iter_mut().enumerate() {
            *v += s * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
}

fn check_finite(y: &[C64], zeta: f64, op: &'static str) -> Result<()> {
    if y.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { op, zeta })
    }
}

/// Before-emission chain amplitudes from the ground state.
pub fn integrate_chain(params: &ChainParams, drive: &DriveEnvelope, grid: &TimeGrid) -> Result<ChainTrajectory> {
    let dim = 1 + params.n() + params.n() * (params.n() - 1) / 2;
    let mut init = vec![ZERO; dim];
    init[0] = C64::new(1.0, 0.0);
    integrate_chain_from(params, drive, grid, &init)
}

/// Before-emission chain amplitudes from an arbitrary state laid out as
/// [c_g, c_e^0..c_e^{N−1}, c_ee in `emitter_pairs` order].
pub fn integrate_chain_from(
    params: &ChainParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    initial: &[C64],
) -> Result<ChainTrajectory> {
    let m = ChainModel::new(params, drive, grid)?;
    let n = m.n;
    let dim = m.full_dim();
    if initial.len() != dim {
        return Err(Error::Shape(format!("initial chain state has {} entries, expected {dim}", initial.len())));
    }
    let mut y = initial.to_vec();
    let mut out = ChainTrajectory {
        c_g: Vec::with_capacity(grid.len()),
        c_e: vec![Vec::with_capacity(grid.len()); n],
        c_ee: vec![Vec::with_capacity(grid.len()); m.pairs.len()],
        pairs: m.pairs.clone(),
    };
    let mut rk = Rk4::new(dim, n);
    for i in 0..grid.len() {
        check_finite(&y, grid.zeta(i), "integrate_chain")?;
        out.c_g.push(y[0]);
        for j in 0..n {
            out.c_e[j].push(y[1 + j]);
        }
        for p in 0..m.pairs.len() {
            out.c_ee[p].push(y[1 + n + p]);
        }
        if i < m.n_steps {
            rk.step(m.h, i, &mut y, |s, a, b, g| m.rhs_full(s, a, b, g));
        }
    }
    Ok(out)
}

/// Per-emitter emission factors of a channel: e^{−ik₀z_j} into R,
/// e^{+ik₀z_j} into L, and δ_jm into the side reservoir of emitter m.
fn emission_factors(params: &ChainParams, channel: Channel) -> Result<Vec<C64>> {
    let n = params.n();
    match channel {
        Channel::R => Ok(params.phases.iter().map(|&p| C64::from_polar(1.0, -p)).collect()),
        Channel::L => Ok(params.phases.iter().map(|&p| C64::from_polar(1.0, p)).collect()),
        Channel::S(m) if m < n => Ok((0..n).map(|j| if j == m { C64::new(1.0, 0.0) } else { ZERO }).collect()),
        Channel::S(m) => Err(Error::InvalidParams(format!("side channel {m} of a chain of {n}"))),
    }
}

fn branch_at(
    traj: &ChainTrajectory,
    params: &ChainParams,
    grid: &TimeGrid,
    em: &[C64],
    channel: Channel,
    e: usize,
) -> (C64, Vec<C64>) {
    let n = params.n();
    let pre = I * params.beta(channel).sqrt() * C64::from_polar(1.0, params.delta * grid.zeta(e));
    let g = pre * (0..n).map(|j| traj.c_e[j][e] * em[j]).sum::<C64>();
    let mut x = vec![ZERO; n];
    for (p, &(a, b)) in traj.pairs.iter().enumerate() {
        let c = traj.c_ee[p][e];
        x[a] += c * em[b];
        x[b] += c * em[a];
    }
    for v in &mut x {
        *v *= pre;
    }
    (g, x)
}

/// Initial (φ_g,ch, φ^j_e,ch) of a photon emitted into `channel` at the node `zeta_e`.
pub fn branch_chain_emission(
    trajectory: &ChainTrajectory,
    params: &ChainParams,
    grid: &TimeGrid,
    channel: Channel,
    zeta_e: f64,
) -> Result<(C64, Vec<C64>)> {
    let e = grid.index_of(zeta_e)?;
    if trajectory.c_g.len() != grid.len() || trajectory.c_e.len() != params.n() {
        return Err(Error::Shape("trajectory does not match grid and chain".into()));
    }
    let em = emission_factors(params, channel)?;
    Ok(branch_at(trajectory, params, grid, &em, channel, e))
}

/// One emission-time column of the chain one-photon amplitudes over the
/// whole grid; zero before the emission node.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainFieldColumn {
    pub channel: Channel,
    pub emission: usize,
    pub phi_g: Vec<C64>,
    /// `phi_e[j][i]`.
    pub phi_e: Vec<Vec<C64>>,
}

fn run_single(
    m: &ChainModel,
    rk: &mut Rk4,
    start: usize,
    init: (C64, &[C64]),
    grid: &TimeGrid,
    mut visit: impl FnMut(usize, &[C64]),
) -> Result<()> {
    let mut y = Vec::with_capacity(1 + m.n);
    y.push(init.0);
    y.extend_from_slice(init.1);
    for i in start..=m.n_steps {
        visit(i, &y);
        if i < m.n_steps {
            rk.step(m.h, i, &mut y, |s, a, b, g| m.rhs_single(s, a, b, g));
        }
    }
    check_finite(&y, grid.zeta_end, "propagate_chain_after_emission")
}

pub fn propagate_chain_after_emission(
    params: &ChainParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    zeta_e: f64,
    init: (C64, &[C64]),
    channel: Channel,
) -> Result<ChainFieldColumn> {
    let e = grid.index_of(zeta_e)?;
    let m = ChainModel::new(params, drive, grid)?;
    if init.1.len() != m.n {
        return Err(Error::Shape(format!("{} excited amplitudes for {} emitters", init.1.len(), m.n)));
    }
    let mut col = ChainFieldColumn {
        channel,
        emission: e,
        phi_g: vec![ZERO; grid.len()],
        phi_e: vec![vec![ZERO; grid.len()]; m.n],
    };
    let mut rk = Rk4::new(1 + m.n, m.n);
    run_single(&m, &mut rk, e, init, grid, |i, y| {
        col.phi_g[i] = y[0];
        for j in 0..m.n {
            col.phi_e[j][i] = y[1 + j];
        }
    })?;
    Ok(col)
}

/// Full (ζ, ζ_e) panes of one channel; row `e` holds ζ_i for i ≥ e.
#[derive(Clone, Debug)]
pub struct ChainPhotonField {
    pub channel: Channel,
    pub phi_g: Triangle,
    pub phi_e: Vec<Triangle>,
}

/// Branches and propagates every emission time of `channel`.
pub fn propagate_chain_field(
    params: &ChainParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    trajectory: &ChainTrajectory,
    channel: Channel,
) -> Result<ChainPhotonField> {
    let m = ChainModel::new(params, drive, grid)?;
    let em = emission_factors(params, channel)?;
    let n = grid.len();
    let rows: Vec<(Vec<C64>, Vec<Vec<C64>>)> = (0..n)
        .into_par_iter()
        .map_init(
            || Rk4::new(1 + m.n, m.n),
            |rk, e| {
                let (g0, x0) = branch_at(trajectory, params, grid, &em, channel, e);
                let mut g = Vec::with_capacity(n - e);
                let mut x = vec![Vec::with_capacity(n - e); m.n];
                run_single(&m, rk, e, (g0, &x0), grid, |_, y| {
                    g.push(y[0]);
                    for j in 0..m.n {
                        x[j].push(y[1 + j]);
                    }
                })?;
                Ok((g, x))
            },
        )
        .collect::<Result<_>>()?;
    let mut g_rows = Vec::with_capacity(n);
    let mut e_rows: Vec<Vec<Vec<C64>>> = vec![Vec::with_capacity(n); m.n];
    for (g, x) in rows {
        g_rows.push(g);
        for (j, r) in x.into_iter().enumerate() {
            e_rows[j].push(r);
        }
    }
    Ok(ChainPhotonField {
        channel,
        phi_g: Triangle::from_rows(n, g_rows)?,
        phi_e: e_rows.into_iter().map(|r| Triangle::from_rows(n, r)).collect::<Result<_>>()?,
    })
}

/// φ_{ch2 ch1}(ζ_e2, ζ_e1) = i√β_ch2 Σ_j φ^j_e,ch1(ζ_e2, ζ_e1) f_j e^{iΔ̃ζ_e2} with
/// f_j the emission factor of emitter j into `channel2`.
pub fn assemble_chain_two_photon(
    field: &ChainPhotonField,
    params: &ChainParams,
    grid: &TimeGrid,
    channel2: Channel,
) -> Result<TwoPhotonAmplitude> {
    let n = grid.len();
    if field.phi_e.len() != params.n() || field.phi_e.iter().any(|t| t.n() != n) {
        return Err(Error::Shape("field does not match grid and chain".into()));
    }
    let em = emission_factors(params, channel2)?;
    let pre = I * params.beta(channel2).sqrt();
    let rows = (0..n)
        .map(|e1| {
            let parts: Option<Vec<&[C64]>> = field.phi_e.iter().map(|t| t.row(e1)).collect();
            match parts {
                Some(parts) => (0..n - e1)
                    .map(|k| {
                        let s: C64 = parts.iter().zip(&em).map(|(r, f)| r[k] * f).sum();
                        pre * s * C64::from_polar(1.0, params.delta * grid.zeta(e1 + k))
                    })
                    .collect(),
                None => Vec::new(),
            }
        })
        .collect();
    Ok(TwoPhotonAmplitude::new(channel2, field.channel, Triangle::from_rows(n, rows)?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainOptions {
    /// First-photon channels to propagate; their ζ_T slices are returned.
    pub channels: Vec<Channel>,
    /// (second, first) channel pairs whose two-photon grids are assembled.
    pub pairs: Vec<(Channel, Channel)>,
    pub two_photon: TwoPhotonSelection,
    /// Initial state in the layout of `integrate_chain_from`; ground state if `None`.
    pub initial: Option<Vec<C64>>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            channels: vec![Channel::R],
            pairs: vec![(Channel::R, Channel::R)],
            two_photon: TwoPhotonSelection::Full,
            initial: None,
        }
    }
}

impl ChainOptions {
    /// Every channel and every channel pair.
    pub fn all(params: &ChainParams, two_photon: TwoPhotonSelection) -> Self {
        let channels = params.channels();
        let pairs = channels.iter().flat_map(|&a| channels.iter().map(move |&b| (a, b))).collect();
        Self { channels, pairs, two_photon, initial: None }
    }
}

/// Full chain pipeline, keeping only the ζ_T slices of the one-photon panes
/// and the selected rows of the requested two-photon grids.
pub fn solve_chain(
    params: &ChainParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    opts: &ChainOptions,
) -> Result<PhotonAmplitudeSet> {
    let m = ChainModel::new(params, drive, grid)?;
    let traj = match &opts.initial {
        Some(init) => integrate_chain_from(params, drive, grid, init)?,
        None => integrate_chain(params, drive, grid)?,
    };
    let n = grid.len();
    let last = n - 1;
    if let TwoPhotonSelection::Row(b) = opts.two_photon {
        if b >= n {
            return Err(Error::Shape(format!("two-photon row {b} outside grid of {n} nodes")));
        }
    }
    let mut channels = opts.channels.clone();
    for &(_, c1) in &opts.pairs {
        if !channels.contains(&c1) {
            channels.push(c1);
        }
    }
    let phase: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, params.delta * grid.zeta(i))).collect();
    let keep = |e: usize| match opts.two_photon {
        TwoPhotonSelection::None => false,
        TwoPhotonSelection::Row(b) => b == e,
        TwoPhotonSelection::Full => true,
    };

    let mut single = Vec::with_capacity(channels.len());
    let mut two = Vec::new();
    for &c1 in &channels {
        let em1 = emission_factors(params, c1)?;
        let seconds: Vec<(Channel, C64, Vec<C64>)> = opts
            .pairs
            .iter()
            .filter(|(_, b)| *b == c1)
            .map(|&(c2, _)| Ok((c2, I * params.beta(c2).sqrt(), emission_factors(params, c2)?)))
            .collect::<Result<_>>()?;
        let store_two = opts.two_photon != TwoPhotonSelection::None;
        let columns: Vec<(C64, Vec<C64>, Vec<Vec<C64>>)> = (0..n)
            .into_par_iter()
            .map_init(
                || Rk4::new(1 + m.n, m.n),
                |rk, e| {
                    let (g0, x0) = branch_at(&traj, params, grid, &em1, c1, e);
                    let store = store_two && keep(e);
                    let mut rows = vec![Vec::with_capacity(if store { n - e } else { 0 }); seconds.len()];
                    let mut fin = (ZERO, vec![ZERO; m.n]);
                    run_single(&m, rk, e, (g0, &x0), grid, |i, y| {
                        if store {
                            for (r, (_, pre, em2)) in rows.iter_mut().zip(&seconds) {
                                let s: C64 = (0..m.n).map(|j| y[1 + j] * em2[j]).sum();
                                r.push(pre * s * phase[i]);
                            }
                        }
                        if i == last {
                            fin = (y[0], y[1..].to_vec());
                        }
                    })?;
                    Ok((fin.0, fin.1, rows))
                },
            )
            .collect::<Result<_>>()?;
        let mut phi_g = Vec::with_capacity(n);
        let mut phi_e = vec![Vec::with_capacity(n); m.n];
        let mut pair_rows: Vec<Vec<Vec<C64>>> = vec![Vec::with_capacity(n); seconds.len()];
        for (g, x, rows) in columns {
            phi_g.push(g);
            for (j, v) in x.into_iter().enumerate() {
                phi_e[j].push(v);
            }
            for (k, r) in rows.into_iter().enumerate() {
                pair_rows[k].push(r);
            }
        }
        single.push(SingleSlice { channel: c1, phi_g, phi_e });
        if store_two {
            for ((c2, _, _), rows) in seconds.iter().zip(pair_rows) {
                two.push(TwoPhotonAmplitude::new(*c2, c1, Triangle::from_rows(n, rows)?));
            }
        }
    }
    single.retain(|s| opts.channels.contains(&s.channel) || opts.pairs.iter().any(|p| p.1 == s.channel));
    Ok(PhotonAmplitudeSet {
        grid: *grid,
        c_g: traj.c_g[last],
        c_e: traj.c_e.iter().map(|c| c[last]).collect(),
        c_ee: traj.c_ee.iter().map(|c| c[last]).collect(),
        single,
        two,
    })
}
