//! Single-emitter dynamics.
//!
//! Before any emission the amplitudes obey
//!
//! ċ_g = i g*(ζ) c_e,  ċ_e = i g(ζ) c_g − c_e/2,  g = (Ω/2)e^{−iΔ̃ζ},
//!
//! and after an emission at ζ_e the pair (φ_g,ch, φ_e,ch) obeys the same
//! equations, starting from φ_g,ch = i√β_ch c_e(ζ_e)e^{iΔ̃ζ_e}, φ_e,ch = 0.
//! A second emission at ζ_e2 freezes i√β_ch2 φ_e,ch1(ζ_e2, ζ_e1)e^{iΔ̃ζ_e2}
//! into the two-photon amplitude.
//!
//! All propagation uses the same fixed-step RK4 on the uniform grid, so every
//! emission time is a grid node and branching needs no interpolation.

use std::sync::Arc;

use rayon::prelude::*;

use crate::amplitudes::{PhotonAmplitudeSet, SingleSlice, Triangle, TwoPhotonAmplitude, TwoPhotonSelection};
use crate::drive::DriveEnvelope;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::params::{Channel, SystemParams};
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub struct EmitterTrajectory {
    pub c_g: Vec<C64>,
    pub c_e: Vec<C64>,
}

/// RK4 stepper for the (ground, excited) pair with the coupling sampled at
/// nodes and midpoints.
pub(crate) struct PairStepper {
    g: Vec<C64>,
    h: f64,
}

impl PairStepper {
    pub(crate) fn new(params: &SystemParams, drive: &DriveEnvelope, grid: &TimeGrid) -> Result<Self> {
        params.validate()?;
        drive.validate()?;
        Ok(Self { g: drive.coupling_samples(grid, params.beta_r, params.delta)?, h: grid.h() })
    }

    #[inline(always)]
    fn rhs(g: C64, y: [C64; 2]) -> [C64; 2] {
        [I * g.conj() * y[1], I * g * y[0] - 0.5 * y[1]]
    }

    /// One step from node `i` to node `i + 1`.
    #[inline]
    pub(crate) fn step(&self, i: usize, y: [C64; 2]) -> [C64; 2] {
        let (g0, gm, g1) = (self.g[2 * i], self.g[2 * i + 1], self.g[2 * i + 2]);
        let h = self.h;
        let k1 = Self::rhs(g0, y);
        let k2 = Self::rhs(gm, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = Self::rhs(gm, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = Self::rhs(g1, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        let s = h / 6.0;
        [
            y[0] + s * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + s * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ]
    }

    fn n_steps(&self) -> usize {
        (self.g.len() - 1) / 2
    }

    /// Propagates `init` from node `start` to the last node, calling `visit`
    /// at every node including the start.
    pub(crate) fn run(&self, start: usize, init: [C64; 2], mut visit: impl FnMut(usize, [C64; 2])) {
        let mut y = init;
        visit(start, y);
        for i in start..self.n_steps() {
            y = self.step(i, y);
            visit(i + 1, y);
        }
    }
}

fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

fn check_finite(values: &[C64], grid: &TimeGrid, offset: usize, op: &'static str) -> Result<()> {
    match values.iter().position(|v| !is_finite(*v)) {
        Some(k) => Err(Error::NonFinite { op, zeta: grid.zeta(offset + k) }),
        None => Ok(()),
    }
}

/// Before-emission amplitudes from the ground state c_g = 1, c_e = 0.
pub fn integrate_emitter(params: &SystemParams, drive: &DriveEnvelope, grid: &TimeGrid) -> Result<EmitterTrajectory> {
    integrate_emitter_from(params, drive, grid, [C64::new(1.0, 0.0), ZERO])
}

/// Before-emission amplitudes from an arbitrary initial (c_g, c_e).
pub fn integrate_emitter_from(
    params: &SystemParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    initial: [C64; 2],
) -> Result<EmitterTrajectory> {
    let stepper = PairStepper::new(params, drive, grid)?;
    let mut c_g = Vec::with_capacity(grid.len());
    let mut c_e = Vec::with_capacity(grid.len());
    stepper.run(0, initial, |_, y| {
        c_g.push(y[0]);
        c_e.push(y[1]);
    });
    check_finite(&c_g, grid, 0, "integrate_emitter")?;
    check_finite(&c_e, grid, 0, "integrate_emitter")?;
    Ok(EmitterTrajectory { c_g, c_e })
}

/// Initial φ_g,ch(ζ_e, ζ_e) = i√β_ch c_e(ζ_e)e^{iΔ̃ζ_e} of a photon emitted at
/// node `zeta_e` into `channel`.
pub fn branch_single_photon(
    trajectory: &EmitterTrajectory,
    params: &SystemParams,
    grid: &TimeGrid,
    channel: Channel,
    zeta_e: f64,
) -> Result<C64> {
    let e = grid.index_of(zeta_e)?;
    let c_e = *trajectory
        .c_e
        .get(e)
        .ok_or_else(|| Error::Shape(format!("trajectory has {} nodes", trajectory.c_e.len())))?;
    Ok(I * params.beta(channel).sqrt() * c_e * C64::from_polar(1.0, params.delta * grid.zeta(e)))
}

/// One emission-time column of the after-emission amplitudes over the whole
/// grid; zero before the emission node.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldColumn {
    pub channel: Channel,
    pub emission: usize,
    pub phi_g: Vec<C64>,
    pub phi_e: Vec<C64>,
}

/// Propagates φ_g,ch(ζ, ζ_e), φ_e,ch(ζ, ζ_e) from `init` at the node `zeta_e`.
pub fn propagate_after_emission(
    params: &SystemParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    zeta_e: f64,
    init: C64,
    channel: Channel,
) -> Result<FieldColumn> {
    let e = grid.index_of(zeta_e)?;
    let stepper = PairStepper::new(params, drive, grid)?;
    let mut phi_g = vec![ZERO; grid.len()];
    let mut phi_e = vec![ZERO; grid.len()];
    stepper.run(e, [init, ZERO], |i, y| {
        phi_g[i] = y[0];
        phi_e[i] = y[1];
    });
    check_finite(&phi_g, grid, 0, "propagate_after_emission")?;
    check_finite(&phi_e, grid, 0, "propagate_after_emission")?;
    Ok(FieldColumn { channel, emission: e, phi_g, phi_e })
}

/// Full (ζ, ζ_e) panes of one channel: row `e` holds ζ_i for i ≥ e.
#[derive(Clone, Debug)]
pub struct SinglePhotonField {
    pub channel: Channel,
    pub phi_g: Triangle,
    pub phi_e: Triangle,
}

impl SinglePhotonField {
    /// φ_g,ch(ζ_i, ζ_e); zero for ζ_i < ζ_e.
    pub fn phi_g(&self, i: usize, e: usize) -> C64 {
        self.phi_g.get(e, i)
    }

    pub fn phi_e(&self, i: usize, e: usize) -> C64 {
        self.phi_e.get(e, i)
    }
}

/// Branches and propagates every emission time of `channel`, keeping the
/// full panes.
pub fn propagate_field(
    params: &SystemParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    trajectory: &EmitterTrajectory,
    channel: Channel,
) -> Result<SinglePhotonField> {
    let stepper = PairStepper::new(params, drive, grid)?;
    let n = grid.len();
    let rows: Vec<(Vec<C64>, Vec<C64>)> = (0..n)
        .into_par_iter()
        .map(|e| {
            let init = branch_single_photon(trajectory, params, grid, channel, grid.zeta(e))?;
            let mut g = Vec::with_capacity(n - e);
            let mut x = Vec::with_capacity(n - e);
            stepper.run(e, [init, ZERO], |_, y| {
                g.push(y[0]);
                x.push(y[1]);
            });
            check_finite(&g, grid, e, "propagate_field")?;
            check_finite(&x, grid, e, "propagate_field")?;
            Ok((g, x))
        })
        .collect::<Result<_>>()?;
    let (g, x): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(SinglePhotonField { channel, phi_g: Triangle::from_rows(n, g)?, phi_e: Triangle::from_rows(n, x)? })
}

/// Two-photon amplitude φ_{ch2 ch1}(ζ_e2, ζ_e1) = i√β_ch2 φ_e,ch1(ζ_e2, ζ_e1)e^{iΔ̃ζ_e2}.
pub fn assemble_two_photon(
    field: &SinglePhotonField,
    params: &SystemParams,
    grid: &TimeGrid,
    channel2: Channel,
) -> Result<TwoPhotonAmplitude> {
    let n = grid.len();
    if field.phi_e.n() != n {
        return Err(Error::Shape(format!("field has {} nodes, grid has {n}", field.phi_e.n())));
    }
    let pre = I * params.beta(channel2).sqrt();
    let rows = (0..n)
        .map(|e1| match field.phi_e.row(e1) {
            Some(r) => {
                r.iter().enumerate().map(|(k, v)| pre * v * C64::from_polar(1.0, params.delta * grid.zeta(e1 + k))).collect()
            }
            None => Vec::new(),
        })
        .collect();
    Ok(TwoPhotonAmplitude::new(channel2, field.channel, Triangle::from_rows(n, rows)?))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EmitterOptions {
    pub two_photon: TwoPhotonSelection,
    /// (c_g, c_e) at the first node.
    pub initial: [C64; 2],
}

impl Default for EmitterOptions {
    fn default() -> Self {
        Self { two_photon: TwoPhotonSelection::Full, initial: [C64::new(1.0, 0.0), ZERO] }
    }
}

/// Full single-emitter pipeline: trajectory, every emission time of every
/// channel, and the selected part of the two-photon grids.
///
/// Channels of a single emitter differ only by their √β prefactors, so one
/// unit-coupling propagation per emission time serves all of them. Only the
/// ζ_T slices of the one-photon panes are kept.
pub fn solve_emitter(
    params: &SystemParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    opts: &EmitterOptions,
) -> Result<PhotonAmplitudeSet> {
    let stepper = PairStepper::new(params, drive, grid)?;
    let trajectory = integrate_emitter_from(params, drive, grid, opts.initial)?;
    let n = grid.len();
    let last = n - 1;
    let phase: Vec<C64> = (0..n).map(|i| C64::from_polar(1.0, params.delta * grid.zeta(i))).collect();
    let keep = |e: usize| match opts.two_photon {
        TwoPhotonSelection::None => false,
        TwoPhotonSelection::Row(b) => b == e,
        TwoPhotonSelection::Full => true,
    };
    if let TwoPhotonSelection::Row(b) = opts.two_photon {
        if b >= n {
            return Err(Error::Shape(format!("two-photon row {b} outside grid of {n} nodes")));
        }
    }

    let columns: Vec<(C64, C64, Vec<C64>)> = (0..n)
        .into_par_iter()
        .map(|e| {
            let init = I * trajectory.c_e[e] * phase[e];
            let store = keep(e);
            let mut row = Vec::with_capacity(if store { n - e } else { 0 });
            let mut fin = [ZERO; 2];
            stepper.run(e, [init, ZERO], |i, y| {
                if store {
                    row.push(I * y[1] * phase[i]);
                }
                if i == last {
                    fin = y;
                }
            });
            (fin[0], fin[1], row)
        })
        .collect();

    let mut unit_g = Vec::with_capacity(n);
    let mut unit_e = Vec::with_capacity(n);
    let mut rows = Vec::with_capacity(n);
    for (g, e, r) in columns {
        unit_g.push(g);
        unit_e.push(e);
        rows.push(r);
    }
    check_finite(&unit_g, grid, 0, "solve_emitter")?;
    check_finite(&unit_e, grid, 0, "solve_emitter")?;
    for (e1, r) in rows.iter().enumerate() {
        check_finite(r, grid, e1, "solve_emitter")?;
    }

    let channels = params.channels();
    let single = channels
        .iter()
        .map(|&ch| {
            let s = params.beta(ch).sqrt();
            SingleSlice {
                channel: ch,
                phi_g: unit_g.iter().map(|v| v * s).collect(),
                phi_e: vec![unit_e.iter().map(|v| v * s).collect()],
            }
        })
        .collect();
    let two = if opts.two_photon == TwoPhotonSelection::None {
        Vec::new()
    } else {
        let shared = Arc::new(Triangle::from_rows(n, rows)?);
        let mut two = Vec::with_capacity(9);
        for &c2 in &channels {
            for &c1 in &channels {
                let s = (params.beta(c2) * params.beta(c1)).sqrt();
                two.push(TwoPhotonAmplitude::scaled(c2, c1, s, Arc::clone(&shared)));
            }
        }
        two
    };
    Ok(PhotonAmplitudeSet {
        grid: *grid,
        c_g: trajectory.c_g[last],
        c_e: vec![trajectory.c_e[last]],
        c_ee: Vec::new(),
        single,
        two,
    })
}
