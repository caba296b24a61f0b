use crate::error::{Error, Result};

/// Uniform grid ζ_i = zeta_start + i·h, i = 0..=n_steps.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub zeta_start: f64,
    pub zeta_end: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(zeta_start: f64, zeta_end: f64, n_steps: usize) -> Result<Self> {
        let g = Self { zeta_start, zeta_end, n_steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_steps < 2 {
            return Err(Error::InvalidGrid(format!("n_steps = {} must be at least 2", self.n_steps)));
        }
        if !(self.zeta_start.is_finite() && self.zeta_end.is_finite()) || self.h() <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "need finite zeta_end > zeta_start, got [{}, {}]",
                self.zeta_start, self.zeta_end
            )));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (self.zeta_end - self.zeta_start) / self.n_steps as f64
    }

    /// Number of nodes, n_steps + 1.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn zeta(&self, i: usize) -> f64 {
        self.zeta_start + i as f64 * self.h()
    }

    pub fn span(&self) -> f64 {
        self.zeta_end - self.zeta_start
    }

    /// Index of the node at `zeta`; anything further than 1e-9·h from a node
    /// is rejected.
    pub fn index_of(&self, zeta: f64) -> Result<usize> {
        let x = (zeta - self.zeta_start) / self.h();
        let i = x.round();
        if !x.is_finite() || (x - i).abs() > 1e-9 || i < 0.0 || i > self.n_steps as f64 {
            return Err(Error::OffGrid(zeta));
        }
        Ok(i as usize)
    }

    /// Nearest node at or before `zeta`, clamped to the grid.
    pub fn floor_index(&self, zeta: f64) -> usize {
        let x = ((zeta - self.zeta_start) / self.h() + 1e-9).floor();
        x.clamp(0.0, self.n_steps as f64) as usize
    }

    /// Trapezoid weights including the factor h.
    pub fn weights(&self) -> Vec<f64> {
        let h = self.h();
        let mut w = vec![h; self.len()];
        w[0] = 0.5 * h;
        w[self.n_steps] = 0.5 * h;
        w
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len());
        self.weights().iter().zip(f).map(|(w, v)| w * v).sum()
    }
}
