//! Coherent drive envelopes.
//!
//! A waveguide drive is a coherent field Ẽ(ζ) entering from the left in the
//! right-going mode. It reaches an emitter at phase k₀z with Rabi frequency
//! Ω = 2√β_R Ẽ e^{ik₀z}, and it interferes with the scattered light at the
//! detector. A side drive addresses the emitters directly with Rabi
//! frequency Ω(ζ) and never reaches the detector.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::C64;

/// Gaussian pulses are sampled out to this many standard deviations of Ω.
const PULSE_HALF_WIDTH: f64 = 6.0;

/// Lifetimes simulated after the end of a pulse by `pulse_grid`.
pub const DEFAULT_TAIL: f64 = 12.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Geometry {
    Waveguide,
    Side,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DriveKind {
    /// Constant amplitude switched on at the start of the grid: Ẽ for a
    /// waveguide drive, Ω for a side drive.
    Constant { amplitude: C64 },
    /// Ω(ζ)² is a Gaussian of standard deviation `sigma`, so Ω itself has
    /// standard deviation √2·sigma; normalized so that ∫Ω dζ = `area`.
    GaussianPulse { sigma: f64, area: f64, center: f64 },
    /// Linearly interpolated samples, undefined outside the table.
    Tabulated { zeta: Vec<f64>, values: Vec<C64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveEnvelope {
    pub kind: DriveKind,
    pub geometry: Geometry,
}

impl DriveEnvelope {
    pub fn constant(amplitude: C64, geometry: Geometry) -> Self {
        Self { kind: DriveKind::Constant { amplitude }, geometry }
    }

    pub fn off() -> Self {
        Self::constant(C64::new(0.0, 0.0), Geometry::Side)
    }

    /// Gaussian pulse whose leading edge sits six widths after ζ = 0.
    pub fn gaussian(sigma: f64, area: f64, geometry: Geometry) -> Result<Self> {
        Self::gaussian_centered(sigma, area, PULSE_HALF_WIDTH * std::f64::consts::SQRT_2 * sigma, geometry)
    }

    pub fn gaussian_centered(sigma: f64, area: f64, center: f64, geometry: Geometry) -> Result<Self> {
        let d = Self { kind: DriveKind::GaussianPulse { sigma, area, center }, geometry };
        d.validate()?;
        Ok(d)
    }

    pub fn tabulated(zeta: Vec<f64>, values: Vec<C64>, geometry: Geometry) -> Result<Self> {
        let d = Self { kind: DriveKind::Tabulated { zeta, values }, geometry };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            DriveKind::Constant { amplitude } => {
                if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
                    return Err(Error::InvalidParams("drive amplitude must be finite".into()));
                }
            }
            DriveKind::GaussianPulse { sigma, area, center } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return Err(Error::InvalidParams(format!("pulse sigma = {sigma} must be positive")));
                }
                if !(area.is_finite() && center.is_finite()) {
                    return Err(Error::InvalidParams("pulse area and center must be finite".into()));
                }
            }
            DriveKind::Tabulated { zeta, values } => {
                if zeta.len() != values.len() || zeta.len() < 2 {
                    return Err(Error::InvalidParams(
                        "tabulated drive needs at least two (zeta, value) samples".into(),
                    ));
                }
                if zeta.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::InvalidParams("tabulated drive zeta must be strictly increasing".into()));
                }
            }
        }
        Ok(())
    }

    fn profile(&self, zeta: f64) -> Option<C64> {
        match &self.kind {
            DriveKind::Constant { amplitude } => Some(*amplitude),
            DriveKind::GaussianPulse { sigma, area, center } => {
                let s = std::f64::consts::SQRT_2 * sigma;
                let x = (zeta - center) / s;
                Some(C64::new(area / (s * (2.0 * PI).sqrt()) * (-0.5 * x * x).exp(), 0.0))
            }
            DriveKind::Tabulated { zeta: z, values } => {
                let (first, last) = (z[0], z[z.len() - 1]);
                if !(zeta >= first && zeta <= last) {
                    return None;
                }
                let k = z.partition_point(|&v| v <= zeta).clamp(1, z.len() - 1);
                let t = (zeta - z[k - 1]) / (z[k] - z[k - 1]);
                Some(values[k - 1] * (1.0 - t) + values[k] * t)
            }
        }
    }

    /// Rabi frequency Ω(ζ) of an emitter at k₀z = 0.
    pub fn rabi(&self, zeta: f64, beta_r: f64) -> Option<C64> {
        let p = self.profile(zeta)?;
        Some(match (self.geometry, &self.kind) {
            (Geometry::Side, _) | (Geometry::Waveguide, DriveKind::GaussianPulse { .. }) => p,
            (Geometry::Waveguide, _) => p * (2.0 * beta_r.sqrt()),
        })
    }

    /// Coherent input field Ẽ(ζ) in the transmitted mode; zero for a side drive.
    pub fn field(&self, zeta: f64, beta_r: f64) -> Option<C64> {
        let p = self.profile(zeta)?;
        Some(match (self.geometry, &self.kind) {
            (Geometry::Side, _) => C64::new(0.0, 0.0),
            (Geometry::Waveguide, DriveKind::GaussianPulse { .. }) => {
                if beta_r > 0.0 {
                    p / (2.0 * beta_r.sqrt())
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            (Geometry::Waveguide, _) => p,
        })
    }

    /// End of the sampled pulse support, if the drive is a pulse.
    pub fn pulse_end(&self) -> Option<f64> {
        match &self.kind {
            DriveKind::GaussianPulse { sigma, center, .. } => {
                Some(center + PULSE_HALF_WIDTH * std::f64::consts::SQRT_2 * sigma)
            }
            _ => None,
        }
    }

    /// Grid from ζ = 0 to the pulse end plus `DEFAULT_TAIL`.
    pub fn pulse_grid(&self, n_steps: usize) -> Result<TimeGrid> {
        let end = self
            .pulse_end()
            .ok_or_else(|| Error::InvalidGrid("only pulses define a default grid end".into()))?;
        TimeGrid::new(0.0, end + DEFAULT_TAIL, n_steps)
    }

    /// Half-step samples of the coupling g(ζ) = (Ω(ζ)/2)e^{−iΔ̃ζ} used by the
    /// RK4 steps: entry 2i is at ζ_i, entry 2i+1 at ζ_i + h/2.
    pub fn coupling_samples(&self, grid: &TimeGrid, beta_r: f64, delta: f64) -> Result<Vec<C64>> {
        grid.validate()?;
        let half = 0.5 * grid.h();
        (0..2 * grid.n_steps + 1)
            .map(|k| {
                let zeta = grid.zeta_start + k as f64 * half;
                let omega = self.rabi(zeta, beta_r).ok_or(Error::DriveUndefined(zeta))?;
                Ok(omega * 0.5 * C64::from_polar(1.0, -delta * zeta))
            })
            .collect()
    }

    /// Ẽ(ζ_i) at every node.
    pub fn field_samples(&self, grid: &TimeGrid, beta_r: f64) -> Result<Vec<C64>> {
        (0..grid.len())
            .map(|i| {
                let zeta = grid.zeta(i);
                self.field(zeta, beta_r).ok_or(Error::DriveUndefined(zeta))
            })
            .collect()
    }

    /// Trapezoid ∫Ω dζ over the grid nodes.
    pub fn pulse_area(&self, grid: &TimeGrid, beta_r: f64) -> Result<C64> {
        let w = grid.weights();
        let mut acc = C64::new(0.0, 0.0);
        for (i, wi) in w.iter().enumerate() {
            let zeta = grid.zeta(i);
            acc += self.rabi(zeta, beta_r).ok_or(Error::DriveUndefined(zeta))? * *wi;
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_area_matches_on_grid() {
        for sigma in [0.05, 0.1, 0.5, 1.0] {
            let d = DriveEnvelope::gaussian(sigma, PI, Geometry::Side).unwrap();
            let g = TimeGrid::new(0.0, d.pulse_end().unwrap() + 12.0, 2000).unwrap();
            let a = d.pulse_area(&g, 1.0).unwrap();
            assert!((a.re - PI).abs() / PI < 1e-6, "sigma {sigma}: {a}");
        }
    }

    #[test]
    fn gaussian_square_has_width_sigma() {
        let sigma = 0.3;
        let d = DriveEnvelope::gaussian_centered(sigma, 1.0, 0.0, Geometry::Side).unwrap();
        let r = (d.rabi(sigma, 1.0).unwrap().norm_sqr() / d.rabi(0.0, 1.0).unwrap().norm_sqr()).ln();
        assert!((r + 0.5).abs() < 1e-12);
    }

    #[test]
    fn waveguide_rabi_carries_two_root_beta() {
        let d = DriveEnvelope::constant(C64::new(0.01, 0.0), Geometry::Waveguide);
        assert!((d.rabi(3.0, 0.25).unwrap() - C64::new(0.01, 0.0)).norm() < 1e-15);
        assert_eq!(d.field(3.0, 0.25).unwrap(), C64::new(0.01, 0.0));
        let s = DriveEnvelope::constant(C64::new(0.01, 0.0), Geometry::Side);
        assert_eq!(s.field(3.0, 0.25).unwrap(), C64::new(0.0, 0.0));
        assert_eq!(s.rabi(3.0, 0.25).unwrap(), C64::new(0.01, 0.0));
    }

    #[test]
    fn tabulated_interpolates_and_is_undefined_outside() {
        let d = DriveEnvelope::tabulated(
            vec![0.0, 1.0, 2.0],
            vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 2.0)],
            Geometry::Side,
        )
        .unwrap();
        assert_eq!(d.rabi(0.5, 1.0).unwrap(), C64::new(0.5, 0.0));
        assert_eq!(d.rabi(1.5, 1.0).unwrap(), C64::new(0.5, 1.0));
        assert_eq!(d.rabi(2.0, 1.0).unwrap(), C64::new(0.0, 2.0));
        assert!(d.rabi(2.1, 1.0).is_none());
        let g = TimeGrid::new(0.0, 3.0, 6).unwrap();
        assert!(matches!(d.coupling_samples(&g, 1.0, 0.0), Err(Error::DriveUndefined(_))));
    }
}
