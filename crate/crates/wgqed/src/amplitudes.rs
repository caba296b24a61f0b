//! Storage for the emitted-photon amplitudes at the final time ζ_T.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::params::Channel;
use crate::C64;

/// Upper-triangular table over grid nodes: row `i` holds the entries for
/// column indices `j >= i`. Rows that were not computed are empty.
#[derive(Clone, Debug, PartialEq)]
pub struct Triangle {
    n: usize,
    rows: Vec<Vec<C64>>,
}

impl Triangle {
    pub fn from_rows(n: usize, rows: Vec<Vec<C64>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::Shape(format!("triangle with {n} nodes got {} rows", rows.len())));
        }
        for (i, r) in rows.iter().enumerate() {
            if !r.is_empty() && r.len() != n - i {
                return Err(Error::Shape(format!("row {i} has {} entries, expected {}", r.len(), n - i)));
            }
        }
        Ok(Self { n, rows })
    }

    pub fn zeros(n: usize) -> Self {
        Self { n, rows: (0..n).map(|i| vec![C64::new(0.0, 0.0); n - i]).collect() }
    }

    /// Only row `i` present.
    pub fn single_row(n: usize, i: usize, values: Vec<C64>) -> Result<Self> {
        let mut rows = vec![Vec::new(); n];
        rows[i] = values;
        Self::from_rows(n, rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> Option<&[C64]> {
        self.rows.get(i).filter(|r| !r.is_empty()).map(Vec::as_slice)
    }

    pub fn is_full(&self) -> bool {
        self.rows.iter().all(|r| !r.is_empty())
    }

    /// Entry (row `i`, column `j`), zero below the diagonal.
    ///
    /// Panics if row `i` was not computed.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        if j < i {
            return C64::new(0.0, 0.0);
        }
        let r = &self.rows[i];
        assert!(!r.is_empty(), "triangle row {i} was not computed");
        r[j - i]
    }
}

/// Which part of the two-photon grid to keep.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoPhotonSelection {
    None,
    /// Only the first-emission row at this node (steady-state correlations).
    Row(usize),
    Full,
}

/// φ_{ch2 ch1}(ζ_T, ζ_e2, ζ_e1) for ζ_e2 ≥ ζ_e1, frozen after the second
/// emission. Stored by first-emission row: `grid.get(e1, e2)`.
#[derive(Clone, Debug)]
pub struct TwoPhotonAmplitude {
    pub channel2: Channel,
    pub channel1: Channel,
    scale: f64,
    grid: Arc<Triangle>,
}

impl TwoPhotonAmplitude {
    pub fn new(channel2: Channel, channel1: Channel, grid: Triangle) -> Self {
        Self { channel2, channel1, scale: 1.0, grid: Arc::new(grid) }
    }

    /// A real multiple of a shared grid; single-emitter channels differ only
    /// by their √β prefactors.
    pub(crate) fn scaled(channel2: Channel, channel1: Channel, scale: f64, grid: Arc<Triangle>) -> Self {
        Self { channel2, channel1, scale, grid }
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn is_full(&self) -> bool {
        self.grid.is_full()
    }

    pub fn has_row(&self, e1: usize) -> bool {
        self.grid.row(e1).is_some()
    }

    /// φ(ζ_T, ζ_e2, ζ_e1); zero unless e2 ≥ e1.
    pub fn get(&self, e2: usize, e1: usize) -> C64 {
        self.grid.get(e1, e2) * self.scale
    }

    /// Row of first emission `e1`, entries for e2 = e1..n.
    pub fn row(&self, e1: usize) -> Option<Vec<C64>> {
        self.grid.row(e1).map(|r| r.iter().map(|v| v * self.scale).collect())
    }

    /// Sum over both time orderings, φ(a, b) + φ(b, a).
    pub fn ordered_sum(&self, a: usize, b: usize) -> C64 {
        if a >= b {
            self.get(a, b)
        } else {
            self.get(b, a)
        }
    }

    /// ∬_{ζ_e1 ≤ ζ_e2} |φ|²: half of the trapezoid rule over the square for
    /// the symmetric extension, so the diagonal carries half weight.
    pub fn probability(&self, grid: &TimeGrid) -> Result<f64> {
        if !self.is_full() {
            return Err(Error::NotMaterialized(format!("full {}{} grid", self.channel2, self.channel1)));
        }
        let w = grid.weights();
        let s2 = self.scale * self.scale;
        let total: f64 = (0..self.n())
            .map(|e1| {
                let r = self.grid.row(e1).unwrap_or(&[]);
                let off: f64 = r.iter().enumerate().skip(1).map(|(k, v)| w[e1 + k] * v.norm_sqr()).sum();
                (off + 0.5 * w[e1] * r.first().map_or(0.0, |v| v.norm_sqr())) * w[e1]
            })
            .sum();
        Ok(total * s2)
    }
}

/// One-photon amplitudes of one channel at ζ_T as a function of emission time.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleSlice {
    pub channel: Channel,
    /// φ_g,ch(ζ_T, ζ_e).
    pub phi_g: Vec<C64>,
    /// φ^j_e,ch(ζ_T, ζ_e), one sequence per emitter.
    pub phi_e: Vec<Vec<C64>>,
}

/// Everything the correlation and filter stages need: the emitter amplitudes
/// at ζ_T, the one-photon slices per channel and the two-photon grids.
#[derive(Clone, Debug)]
pub struct PhotonAmplitudeSet {
    pub grid: TimeGrid,
    pub c_g: C64,
    pub c_e: Vec<C64>,
    /// Doubly excited amplitudes c^{jl}_ee for j < l, in lexicographic order.
    pub c_ee: Vec<C64>,
    pub single: Vec<SingleSlice>,
    pub two: Vec<TwoPhotonAmplitude>,
}

impl PhotonAmplitudeSet {
    pub fn n_emitters(&self) -> usize {
        self.c_e.len()
    }

    pub fn single(&self, channel: Channel) -> Result<&SingleSlice> {
        self.single
            .iter()
            .find(|s| s.channel == channel)
            .ok_or_else(|| Error::NotMaterialized(format!("channel {channel} one-photon slice")))
    }

    pub fn two(&self, channel2: Channel, channel1: Channel) -> Result<&TwoPhotonAmplitude> {
        self.two
            .iter()
            .find(|t| t.channel2 == channel2 && t.channel1 == channel1)
            .ok_or_else(|| Error::NotMaterialized(format!("two-photon pair {channel2}{channel1}")))
    }

    /// Total probability of the truncated state: emitter sector, one-photon
    /// sector and two-photon sector over every materialized channel.
    pub fn norm(&self) -> Result<f64> {
        let w = self.grid.weights();
        let mut total = self.c_g.norm_sqr()
            + self.c_e.iter().map(|c| c.norm_sqr()).sum::<f64>()
            + self.c_ee.iter().map(|c| c.norm_sqr()).sum::<f64>();
        for s in &self.single {
            for (i, wi) in w.iter().enumerate() {
                let e: f64 = s.phi_e.iter().map(|p| p[i].norm_sqr()).sum();
                total += wi * (s.phi_g[i].norm_sqr() + e);
            }
        }
        for t in &self.two {
            total += t.probability(&self.grid)?;
        }
        Ok(total)
    }
}
