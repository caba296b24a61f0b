//! Density-matrix reference for a single emitter.
//!
//! ρ̇ = −i[H, ρ] + σ⁻ρσ⁺ − ½{σ⁺σ⁻, ρ},  H = −(g σ⁺ + g* σ⁻),  g = (Ω/2)e^{−iΔ̃ζ},
//!
//! which is the master equation behind the amplitude equations of
//! `dynamics`, integrated with the same RK4 on the same grid. Two-time
//! correlations follow from the quantum regression theorem: the photon
//! detected at ζ leaves σ⁻ρσ⁺ = ρ_ee|g⟩⟨g|, which is propagated forward.
//!
//! Dropping the recycling term σ⁻ρσ⁺ from every propagation counts at most
//! one emission per branch, which reproduces the two-excitation truncation
//! of the amplitude method exactly.

use rayon::prelude::*;

use crate::drive::DriveEnvelope;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::params::SystemParams;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// ρ in the basis {g, e}: [ρ_gg, ρ_ee, ρ_ge, ρ_eg].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityState {
    pub rho: [C64; 4],
}

impl DensityState {
    pub fn ground() -> Self {
        Self { rho: [C64::new(1.0, 0.0), ZERO, ZERO, ZERO] }
    }

    pub fn excited() -> Self {
        Self { rho: [ZERO, C64::new(1.0, 0.0), ZERO, ZERO] }
    }

    /// From populations and the coherence ρ_ge; ρ_eg = ρ_ge*.
    pub fn new(p_g: f64, p_e: f64, rho_ge: C64) -> Result<Self> {
        let s = Self { rho: [C64::new(p_g, 0.0), C64::new(p_e, 0.0), rho_ge, rho_ge.conj()] };
        s.check(0.0)?;
        Ok(s)
    }

    pub fn rho_gg(&self) -> f64 {
        self.rho[0].re
    }

    pub fn rho_ee(&self) -> f64 {
        self.rho[1].re
    }

    pub fn rho_ge(&self) -> C64 {
        self.rho[2]
    }

    pub fn trace(&self) -> C64 {
        self.rho[0] + self.rho[1]
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let [gg, ee, ge, _] = self.rho;
        let half = 0.5 * (gg.re - ee.re);
        0.5 * (gg.re + ee.re) - (half * half + ge.norm_sqr()).sqrt()
    }

    /// Unit trace within 1e-9, Hermitian within 1e-12, eigenvalues ≥ −1e-9.
    pub fn check(&self, zeta: f64) -> Result<()> {
        let [gg, ee, ge, eg] = self.rho;
        let fail = |what: String| Err(Error::Density { zeta, what });
        if !self.rho.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return fail("non-finite entry".into());
        }
        if (self.trace() - 1.0).norm() > 1e-9 {
            return fail(format!("trace {}", self.trace()));
        }
        let herm = gg.im.abs().max(ee.im.abs()).max((ge - eg.conj()).norm());
        if herm > 1e-12 {
            return fail(format!("non-Hermitian by {herm:.3e}"));
        }
        let lam = self.min_eigenvalue();
        if lam < -1e-9 {
            return fail(format!("eigenvalue {lam:.3e}"));
        }
        Ok(())
    }
}

struct Lindblad {
    g: Vec<C64>,
    h: f64,
    recycle: bool,
}

impl Lindblad {
    fn new(params: &SystemParams, drive: &DriveEnvelope, grid: &TimeGrid, recycle: bool) -> Result<Self> {
        params.validate()?;
        drive.validate()?;
        Ok(Self { g: drive.coupling_samples(grid, params.beta_r, params.delta)?, h: grid.h(), recycle })
    }

    #[inline]
    fn rhs(&self, g: C64, r: [C64; 4]) -> [C64; 4] {
        let [gg, ee, ge, eg] = r;
        let (a, b) = (-g.conj(), -g);
        let jump = if self.recycle { ee } else { ZERO };
        [
            -I * (a * eg - b * ge) + jump,
            -I * (b * ge - a * eg) - ee,
            -I * a * (ee - gg) - 0.5 * ge,
            -I * b * (gg - ee) - 0.5 * eg,
        ]
    }

    #[inline]
    fn step(&self, i: usize, y: [C64; 4]) -> [C64; 4] {
        let (g0, gm, g1) = (self.g[2 * i], self.g[2 * i + 1], self.g[2 * i + 2]);
        let h = self.h;
        let add = |y: [C64; 4], k: [C64; 4], s: f64| std::array::from_fn(|j| y[j] + s * k[j]);
        let k1 = self.rhs(g0, y);
        let k2 = self.rhs(gm, add(y, k1, 0.5 * h));
        let k3 = self.rhs(gm, add(y, k2, 0.5 * h));
        let k4 = self.rhs(g1, add(y, k3, h));
        std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]))
    }

    fn n_steps(&self) -> usize {
        (self.g.len() - 1) / 2
    }

    /// ρ_ee from node `start` to the end, given ρ at `start`.
    fn excited_from(&self, start: usize, init: [C64; 4]) -> Vec<f64> {
        let mut y = init;
        let mut out = Vec::with_capacity(self.n_steps() + 1 - start);
        out.push(y[1].re);
        for i in start..self.n_steps() {
            y = self.step(i, y);
            out.push(y[1].re);
        }
        out
    }
}

/// ρ(ζ_i) at every node, checking the state invariants after each step.
pub fn evolve_density(
    params: &SystemParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    initial: DensityState,
) -> Result<Vec<DensityState>> {
    initial.check(grid.zeta_start)?;
    let l = Lindblad::new(params, drive, grid, true)?;
    let mut out = Vec::with_capacity(grid.len());
    let mut y = initial.rho;
    out.push(initial);
    for i in 0..grid.n_steps {
        y = l.step(i, y);
        let s = DensityState { rho: y };
        s.check(grid.zeta(i + 1))?;
        out.push(s);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegressionResult {
    pub g2_pulsed: f64,
    pub mean_n: f64,
    pub g2p: f64,
}

fn pulsed(params: &SystemParams, drive: &DriveEnvelope, grid: &TimeGrid, recycle: bool) -> Result<RegressionResult> {
    let l = Lindblad::new(params, drive, grid, recycle)?;
    let ground = DensityState::ground().rho;
    let ree = l.excited_from(0, ground);
    if let Some(k) = ree.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { op: "regression", zeta: grid.zeta(k) });
    }
    let w = grid.weights();
    let beta = params.beta_r;
    let first = beta * grid.integrate(&ree);
    if !(first > 0.0) {
        return Err(Error::NoPhotons);
    }
    // ∫dt ∫_{τ ≥ 0} ⟨σ⁺(t)σ⁺(t+τ)σ(t+τ)σ(t)⟩, one conditional run per t.
    let inner: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let cond = l.excited_from(j, [C64::new(ree[j], 0.0), ZERO, ZERO, ZERO]);
            cond.iter().zip(&w[j..]).map(|(p, w)| p * w).sum::<f64>()
        })
        .collect();
    let pairs = inner.iter().zip(&w).map(|(a, w)| a * w).sum::<f64>();
    let g2_pulsed = 2.0 * beta * beta * pairs;
    // Without recycling the first run holds only the no-emission branch, so
    // β∫ρ_ee counts first photons; second photons (after a first one in any
    // channel) come from the conditional runs.
    let mean_n = if recycle { first } else { first + beta * pairs };
    Ok(RegressionResult { g2_pulsed, mean_n, g2p: g2_pulsed / (mean_n * mean_n) })
}

/// Pulsed g²ₚ of the photons detected in R from the full master equation.
pub fn regression_pulsed_g2(params: &SystemParams, drive: &DriveEnvelope, grid: &TimeGrid) -> Result<RegressionResult> {
    pulsed(params, drive, grid, true)
}

/// Same without re-excitation after a detected photon: at most two photons
/// per history, as in the amplitude method.
pub fn regression_pulsed_g2_truncated(
    params: &SystemParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
) -> Result<RegressionResult> {
    pulsed(params, drive, grid, false)
}

/// g²(τ) of the emitted light for a photon detected at the node nearest
/// `branch_fraction` of the grid, on the delays τ = ζ_i − ζ_b.
#[derive(Clone, Debug, PartialEq)]
pub struct CwCorrelation {
    pub delay: Vec<f64>,
    pub g2: Vec<f64>,
}

pub fn regression_cw_g2(
    params: &SystemParams,
    drive: &DriveEnvelope,
    grid: &TimeGrid,
    branch_fraction: f64,
) -> Result<CwCorrelation> {
    if !(branch_fraction > 0.0 && branch_fraction < 1.0) {
        return Err(Error::InvalidParams(format!("branch fraction {branch_fraction} must lie in (0, 1)")));
    }
    let states = evolve_density(params, drive, grid, DensityState::ground())?;
    let b = grid.floor_index(grid.zeta_start + branch_fraction * grid.span());
    let p = states[b].rho_ee();
    if !(p > 0.0) {
        return Err(Error::NoPhotons);
    }
    let l = Lindblad::new(params, drive, grid, true)?;
    let cond = l.excited_from(b, [C64::new(p, 0.0), ZERO, ZERO, ZERO]);
    Ok(CwCorrelation {
        delay: (b..grid.len()).map(|k| grid.zeta(k) - grid.zeta(b)).collect(),
        g2: cond.iter().zip(&states[b..]).map(|(c, s)| c / (p * s.rho_ee())).collect(),
    })
}
