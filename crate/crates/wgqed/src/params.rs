//! Dimensionless emitter and coupling parameters.

use std::fmt;

use crate::error::{Error, Result};

const BETA_SUM_TOL: f64 = 1e-12;

/// Decay channel of an emitted photon. `S(m)` is the independent loss
/// reservoir of emitter `m` (always `S(0)` for a single emitter).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Channel {
    R,
    L,
    S(usize),
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::R => write!(f, "R"),
            Channel::L => write!(f, "L"),
            Channel::S(m) => write!(f, "S{m}"),
        }
    }
}

fn check_betas(beta_r: f64, beta_l: f64, beta_s: f64, delta: f64) -> Result<()> {
    for (name, b) in [("beta_r", beta_r), ("beta_l", beta_l), ("beta_s", beta_s)] {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::InvalidParams(format!("{name} = {b} is outside [0, 1]")));
        }
    }
    let sum = beta_r + beta_l + beta_s;
    if (sum - 1.0).abs() > BETA_SUM_TOL {
        return Err(Error::InvalidParams(format!(
            "beta_r + beta_l + beta_s = {sum}, expected 1"
        )));
    }
    if !delta.is_finite() {
        return Err(Error::InvalidParams(format!("delta = {delta} is not finite")));
    }
    Ok(())
}

/// Branching ratios into the right, left and side channels and the detuning
/// Δ̃ = Δ/Γ of a single emitter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SystemParams {
    pub beta_r: f64,
    pub beta_l: f64,
    pub beta_s: f64,
    pub delta: f64,
}

impl SystemParams {
    pub fn new(beta_r: f64, beta_l: f64, beta_s: f64, delta: f64) -> Result<Self> {
        check_betas(beta_r, beta_l, beta_s, delta)?;
        Ok(Self { beta_r, beta_l, beta_s, delta })
    }

    /// All emission into the right-going mode, as used for pulsed sources.
    pub fn right_only(delta: f64) -> Result<Self> {
        Self::new(1.0, 0.0, 0.0, delta)
    }

    pub fn validate(&self) -> Result<()> {
        check_betas(self.beta_r, self.beta_l, self.beta_s, self.delta)
    }

    pub fn beta(&self, channel: Channel) -> f64 {
        match channel {
            Channel::R => self.beta_r,
            Channel::L => self.beta_l,
            Channel::S(_) => self.beta_s,
        }
    }

    pub fn channels(&self) -> [Channel; 3] {
        [Channel::R, Channel::L, Channel::S(0)]
    }
}

/// N identical emitters at propagation phases k₀z_j, sorted left to right.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainParams {
    pub phases: Vec<f64>,
    pub beta_r: f64,
    pub beta_l: f64,
    pub beta_s: f64,
    pub delta: f64,
}

impl ChainParams {
    pub fn new(phases: Vec<f64>, beta_r: f64, beta_l: f64, beta_s: f64, delta: f64) -> Result<Self> {
        let p = Self { phases, beta_r, beta_l, beta_s, delta };
        p.validate()?;
        Ok(p)
    }

    /// Equally spaced chain with phase step `k_dz` = k₀Δz.
    pub fn uniform(n: usize, k_dz: f64, beta_r: f64, beta_l: f64, beta_s: f64, delta: f64) -> Result<Self> {
        Self::new((0..n).map(|j| j as f64 * k_dz).collect(), beta_r, beta_l, beta_s, delta)
    }

    pub fn from_single(p: &SystemParams) -> Self {
        Self { phases: vec![0.0], beta_r: p.beta_r, beta_l: p.beta_l, beta_s: p.beta_s, delta: p.delta }
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn validate(&self) -> Result<()> {
        check_betas(self.beta_r, self.beta_l, self.beta_s, self.delta)?;
        if self.phases.is_empty() {
            return Err(Error::InvalidParams("chain needs at least one emitter".into()));
        }
        if self.phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidParams("phases must be finite".into()));
        }
        if self.phases.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParams("phases must be nondecreasing".into()));
        }
        Ok(())
    }

    pub fn beta(&self, channel: Channel) -> f64 {
        match channel {
            Channel::R => self.beta_r,
            Channel::L => self.beta_l,
            Channel::S(_) => self.beta_s,
        }
    }

    /// R, L and one side channel per emitter.
    pub fn channels(&self) -> Vec<Channel> {
        let mut c = vec![Channel::R, Channel::L];
        c.extend((0..self.n()).map(Channel::S));
        c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn betas_must_sum_to_one() {
        assert!(SystemParams::new(0.25, 0.25, 0.5, 0.0).is_ok());
        assert!(SystemParams::new(0.25, 0.25, 0.49, 0.0).is_err());
        assert!(SystemParams::new(1.2, -0.2, 0.0, 0.0).is_err());
    }

    #[test]
    fn unsorted_phases_rejected() {
        assert!(ChainParams::new(vec![0.0, 1.0, 0.5], 0.5, 0.5, 0.0, 0.0).is_err());
        assert!(ChainParams::uniform(4, 0.3, 0.5, 0.5, 0.0, 0.0).is_ok());
    }

    #[test]
    fn chain_channels_include_one_side_reservoir_per_emitter() {
        let p = ChainParams::uniform(3, 1.0, 0.4, 0.4, 0.2, 0.0).unwrap();
        assert_eq!(p.channels(), vec![Channel::R, Channel::L, Channel::S(0), Channel::S(1), Channel::S(2)]);
    }
}
