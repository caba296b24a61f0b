//! Spectral filtering of the emitted photons.
//!
//! A filter multiplies each outgoing photon by T(ω) in frequency space, with
//! ω measured in units of Γ from the frame of the stored amplitudes. Spectra
//! are the Riemann sums Φ(ω) = Σ_i h f_i e^{−iω(ζ_i − ζ_0)} on the bin
//! frequencies ω_m = m·dω, dω = 2π/(Mh), so one length-M FFT of the folded
//! series gives every bin at once. Frequency integrals are Σ_m (dω/2π).

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::amplitudes::PhotonAmplitudeSet;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::params::Channel;
use crate::C64;

const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Debug, PartialEq)]
pub enum FilterKind {
    /// T = (κ/2)/(i(ω − ω_c) − κ/2).
    Lorentzian,
    /// T = exp(−(ω − ω_c)²/2κ²).
    Gaussian,
    /// Linear interpolation of complex samples in ω − ω_c, zero outside.
    Tabulated { omega: Vec<f64>, values: Vec<C64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    /// Bandwidth in units of Γ; sets the frequency resolution.
    pub kappa: f64,
    pub omega_c: f64,
}

impl FilterSpec {
    pub fn lorentzian(kappa: f64) -> Result<Self> {
        let f = Self { kind: FilterKind::Lorentzian, kappa, omega_c: 0.0 };
        f.validate()?;
        Ok(f)
    }

    pub fn gaussian(kappa: f64) -> Result<Self> {
        let f = Self { kind: FilterKind::Gaussian, kappa, omega_c: 0.0 };
        f.validate()?;
        Ok(f)
    }

    pub fn tabulated(omega: Vec<f64>, values: Vec<C64>, kappa: f64) -> Result<Self> {
        let f = Self { kind: FilterKind::Tabulated { omega, values }, kappa, omega_c: 0.0 };
        f.validate()?;
        Ok(f)
    }

    /// T ≡ 1 on [−half_range, half_range].
    pub fn all_pass(half_range: f64) -> Result<Self> {
        Self::tabulated(vec![-half_range, half_range], vec![C64::new(1.0, 0.0); 2], 1.0)
    }

    /// Parses whitespace- or comma-separated rows `omega re im`; blank lines
    /// and lines starting with `#` are skipped.
    pub fn parse_table(text: &str, kappa: f64) -> Result<Self> {
        let mut omega = Vec::new();
        let mut values = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 3 {
                return Err(Error::InvalidFilter(format!("line {}: expected 3 columns (omega re im), got {}", k + 1, cols.len())));
            }
            let num = |s: &str| {
                s.parse::<f64>().map_err(|e| Error::InvalidFilter(format!("line {}: {s:?}: {e}", k + 1)))
            };
            omega.push(num(cols[0])?);
            values.push(C64::new(num(cols[1])?, num(cols[2])?));
        }
        Self::tabulated(omega, values, kappa)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidFilter(format!("kappa = {} must be positive", self.kappa)));
        }
        if !self.omega_c.is_finite() {
            return Err(Error::InvalidFilter("omega_c must be finite".into()));
        }
        if let FilterKind::Tabulated { omega, values } = &self.kind {
            if omega.len() != values.len() || omega.len() < 2 {
                return Err(Error::InvalidFilter("table needs at least two (omega, T) rows".into()));
            }
            if let Some(k) = omega.windows(2).position(|w| !(w[1] > w[0])) {
                return Err(Error::InvalidFilter(format!("table omega must be strictly increasing (row {})", k + 2)));
            }
            if let Some(k) = values.iter().position(|v| !(v.norm() <= 1.0 + 1e-12)) {
                return Err(Error::InvalidFilter(format!("|T| = {} > 1 at row {} (filter must be passive)", values[k].norm(), k + 1)));
            }
        }
        Ok(())
    }

    /// T at `omega`; `None` outside a table.
    fn eval(&self, omega: f64) -> Option<C64> {
        let x = omega - self.omega_c;
        match &self.kind {
            FilterKind::Lorentzian => {
                let k = 0.5 * self.kappa;
                Some(C64::new(k, 0.0) / C64::new(-k, x))
            }
            FilterKind::Gaussian => Some(C64::new((-x * x / (2.0 * self.kappa * self.kappa)).exp(), 0.0)),
            FilterKind::Tabulated { omega: w, values } => {
                if !(x >= w[0] && x <= w[w.len() - 1]) {
                    return None;
                }
                let k = w.partition_point(|&v| v <= x).clamp(1, w.len() - 1);
                let t = (x - w[k - 1]) / (w[k] - w[k - 1]);
                Some(values[k - 1] * (1.0 - t) + values[k] * t)
            }
        }
    }

    /// T(ω); zero outside a tabulated range.
    pub fn transmission(&self, omega: f64) -> C64 {
        self.eval(omega).unwrap_or(ZERO)
    }

    /// T on many frequencies, warning once if any fall outside the table.
    pub fn sample(&self, omegas: &[f64]) -> Vec<C64> {
        let mut outside = 0usize;
        let t = omegas
            .iter()
            .map(|&w| {
                self.eval(w).unwrap_or_else(|| {
                    outside += 1;
                    ZERO
                })
            })
            .collect();
        if outside > 0 {
            log::warn!("{outside} of {} frequencies lie outside the filter table; using T = 0 there", omegas.len());
        }
        t
    }
}

/// Bin frequencies ω_m = m·dω for m = −⌊n/2⌋ .. n − ⌊n/2⌋ − 1, so that
/// −omega_max ≤ ω < omega_max for even n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrequencyGrid {
    pub n_freq: usize,
    pub omega_max: f64,
}

impl FrequencyGrid {
    pub fn new(n_freq: usize, omega_max: f64) -> Self {
        Self { n_freq, omega_max }
    }

    pub fn domega(&self) -> f64 {
        2.0 * self.omega_max / self.n_freq as f64
    }

    fn first_bin(&self) -> i64 {
        -((self.n_freq / 2) as i64)
    }

    pub fn omegas(&self) -> Vec<f64> {
        let d = self.domega();
        (0..self.n_freq).map(|k| (self.first_bin() + k as i64) as f64 * d).collect()
    }

    /// Grid of `n_freq` bins with spacing as close to `domega` as the time
    /// step allows.
    pub fn with_spacing(tgrid: &TimeGrid, domega: f64, n_freq: usize) -> Result<Self> {
        tgrid.validate()?;
        if !(domega > 0.0 && domega.is_finite()) || n_freq < 2 {
            return Err(Error::FrequencyGrid(format!("need domega > 0 and n_freq >= 2, got {domega}, {n_freq}")));
        }
        let m = (2.0 * std::f64::consts::PI / (domega * tgrid.h())).round().max(1.0);
        let d = 2.0 * std::f64::consts::PI / (m * tgrid.h());
        Ok(Self { n_freq, omega_max: 0.5 * n_freq as f64 * d })
    }

    /// Default grid for filters down to bandwidth `kappa_min`: spacing
    /// min(κ/20, 0.1) and the full band |ω| < π/h unless `omega_max` is given.
    pub fn resolve(tgrid: &TimeGrid, kappa_min: f64, omega_max: Option<f64>) -> Result<Self> {
        tgrid.validate()?;
        if !(kappa_min > 0.0) {
            return Err(Error::FrequencyGrid(format!("kappa = {kappa_min} must be positive")));
        }
        let target = (kappa_min / 20.0).min(0.1);
        let m = (2.0 * std::f64::consts::PI / (target * tgrid.h())).round().max(2.0) as usize;
        let d = 2.0 * std::f64::consts::PI / (m as f64 * tgrid.h());
        let n = match omega_max {
            None => m,
            Some(w) => {
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::FrequencyGrid(format!("omega_max = {w} must be positive")));
                }
                (2 * (w / d).round() as usize).clamp(2, m)
            }
        };
        Self::with_spacing(tgrid, d, n)
    }

    /// FFT length M with dω = 2π/(Mh).
    pub fn fft_len(&self, tgrid: &TimeGrid) -> Result<usize> {
        let x = 2.0 * std::f64::consts::PI / (self.domega() * tgrid.h());
        let m = x.round();
        if !(x.is_finite() && m >= 1.0) || (x - m).abs() > 1e-6 * m {
            return Err(Error::FrequencyGrid(format!(
                "spacing {:.6e} is not 2π/(M h) for integer M with h = {:.6e}; build the grid with FrequencyGrid::with_spacing",
                self.domega(),
                tgrid.h()
            )));
        }
        Ok(m as usize)
    }

    /// Resolution checks against the time grid and the narrowest filter.
    pub fn validate(&self, tgrid: &TimeGrid, kappa_min: f64) -> Result<()> {
        if self.n_freq < 2 || !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(Error::FrequencyGrid(format!("need n_freq >= 2 and omega_max > 0, got {}, {}", self.n_freq, self.omega_max)));
        }
        let m = self.fft_len(tgrid)?;
        if self.n_freq > m {
            return Err(Error::FrequencyGrid(format!(
                "{} bins exceed the {m} distinct frequencies of the time step; lower omega_max to at most π/h = {:.4}",
                self.n_freq,
                std::f64::consts::PI / tgrid.h()
            )));
        }
        if !(self.domega() < kappa_min / 10.0) {
            return Err(Error::FrequencyGrid(format!(
                "spacing {:.4} does not resolve kappa = {kappa_min}; need domega < kappa/10",
                self.domega()
            )));
        }
        if !(1.0 / tgrid.span() < kappa_min) {
            return Err(Error::FrequencyGrid(format!(
                "time span {:.4} too short for kappa = {kappa_min}; need 1/span < kappa",
                tgrid.span()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilteredStats {
    pub g2_pulsed: f64,
    pub mean_n: f64,
    pub g2p: f64,
    pub eta_sp: f64,
}

/// Spectra of the one-photon slices and the symmetric two-photon amplitude
/// ψ(a, b) = φ_RR(max, min), with the row pass already done.
struct Spectra {
    /// |Φ_g(ω_k)|² + Σ_j|Φ^j_e(ω_k)|².
    single_power: Vec<f64>,
    /// |Φ_g(ω_k)|².
    ground_power: Vec<f64>,
    /// h·Σ_i|φ_g,i|².
    ground_norm: f64,
}

struct Transformer {
    fft: Arc<dyn Fft<f64>>,
    m: usize,
    h: f64,
    bins: Vec<usize>,
}

impl Transformer {
    fn new(tgrid: &TimeGrid, fgrid: &FrequencyGrid) -> Result<Self> {
        let m = fgrid.fft_len(tgrid)?;
        if fgrid.n_freq > m {
            return Err(Error::FrequencyGrid(format!("{} bins exceed FFT length {m}", fgrid.n_freq)));
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let bins = (0..fgrid.n_freq).map(|k| (fgrid.first_bin() + k as i64).rem_euclid(m as i64) as usize).collect();
        Ok(Self { fft, m, h: tgrid.h(), bins })
    }

    /// Σ_i h f_i e^{−iω_k(ζ_i − ζ_0)} on the bins; `buf` has length M.
    fn transform(&self, f: impl Iterator<Item = C64>, buf: &mut [C64], scratch: &mut [C64]) -> Vec<C64> {
        buf.fill(ZERO);
        for (i, v) in f.enumerate() {
            buf[i % self.m] += v * self.h;
        }
        self.fft.process_with_scratch(buf, scratch);
        self.bins.iter().map(|&b| buf[b]).collect()
    }

    fn buffers(&self) -> (Vec<C64>, Vec<C64>) {
        (vec![ZERO; self.m], vec![ZERO; self.fft.get_inplace_scratch_len()])
    }
}

fn single_spectra(set: &PhotonAmplitudeSet, tr: &Transformer) -> Result<Spectra> {
    let r = set.single(Channel::R)?;
    let (mut buf, mut scratch) = tr.buffers();
    let g = tr.transform(r.phi_g.iter().copied(), &mut buf, &mut scratch);
    let ground_power: Vec<f64> = g.iter().map(|v| v.norm_sqr()).collect();
    let mut single_power = ground_power.clone();
    for e in &r.phi_e {
        let s = tr.transform(e.iter().copied(), &mut buf, &mut scratch);
        for (p, v) in single_power.iter_mut().zip(&s) {
            *p += v.norm_sqr();
        }
    }
    let ground_norm = tr.h * r.phi_g.iter().map(|v| v.norm_sqr()).sum::<f64>();
    Ok(Spectra { single_power, ground_power, ground_norm })
}

fn transmissions(specs: &[FilterSpec], fgrid: &FrequencyGrid) -> Result<Vec<Vec<f64>>> {
    let omegas = fgrid.omegas();
    specs
        .iter()
        .map(|s| {
            s.validate()?;
            Ok(s.sample(&omegas).iter().map(|t| t.norm_sqr()).collect())
        })
        .collect()
}

fn efficiency(sp: &Spectra, t2: &[f64], dw: f64) -> Result<f64> {
    if !(sp.ground_norm > 0.0) {
        return Err(Error::NoPhotons);
    }
    let num: f64 = t2.iter().zip(&sp.ground_power).map(|(t, p)| t * p).sum::<f64>() * dw / (2.0 * std::f64::consts::PI);
    Ok(num / sp.ground_norm)
}

fn assemble(
    sp: &Spectra,
    t2: &[Vec<f64>],
    row_power: &[f64],
    g2: &[f64],
    dw: f64,
) -> Result<Vec<FilteredStats>> {
    let c = dw / (2.0 * std::f64::consts::PI);
    t2.iter()
        .zip(g2)
        .map(|(t, &g)| {
            let g2_pulsed = g * c * c;
            let mean_n = t.iter().zip(sp.single_power.iter().zip(row_power)).map(|(t, (s, r))| t * (s + r)).sum::<f64>() * c;
            if !(mean_n > 0.0) {
                return Err(Error::NoPhotons);
            }
            Ok(FilteredStats { g2_pulsed, mean_n, g2p: g2_pulsed / (mean_n * mean_n), eta_sp: efficiency(sp, t, dw)? })
        })
        .collect()
}

fn check_two_photon(set: &PhotonAmplitudeSet) -> Result<&crate::amplitudes::TwoPhotonAmplitude> {
    let rr = set.two(Channel::R, Channel::R)?;
    if !rr.is_full() {
        return Err(Error::NotMaterialized("full RR grid".into()));
    }
    Ok(rr)
}

/// Filtered G²_pulsed, ⟨n⟩, g²ₚ and η_sp for every filter in `specs`, sharing
/// the transforms. The RR grid must be complete.
pub fn filter_statistics(set: &PhotonAmplitudeSet, specs: &[FilterSpec], fgrid: &FrequencyGrid) -> Result<Vec<FilteredStats>> {
    let rr = check_two_photon(set)?;
    let tr = Transformer::new(&set.grid, fgrid)?;
    let t2 = transmissions(specs, fgrid)?;
    let sp = single_spectra(set, &tr)?;
    let n = set.grid.len();
    let k = fgrid.n_freq;

    // Row pass: A[b][k] = Σ_a h ψ(a, b) e^{−iω_k ζ_a}.
    let rows: Vec<Vec<C64>> = (0..n)
        .into_par_iter()
        .map_init(
            || tr.buffers(),
            |(buf, scratch), b| tr.transform((0..n).map(|a| rr.ordered_sum(a, b)), buf, scratch),
        )
        .collect();
    let row_power: Vec<f64> = (0..k).map(|j| tr.h * rows.iter().map(|r| r[j].norm_sqr()).sum::<f64>()).collect();

    // Column pass per ω₁, reduced in a fixed order.
    let partial: Vec<Vec<f64>> = (0..k)
        .into_par_iter()
        .map_init(
            || tr.buffers(),
            |(buf, scratch), k1| {
                let col = tr.transform(rows.iter().map(|r| r[k1]), buf, scratch);
                let p: Vec<f64> = col.iter().map(|v| v.norm_sqr()).collect();
                t2.iter().map(|t| t[k1] * t.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>()).collect()
            },
        )
        .collect();
    let mut g2 = vec![0.0; specs.len()];
    for p in &partial {
        for (acc, v) in g2.iter_mut().zip(p) {
            *acc += v;
        }
    }
    assemble(&sp, &t2, &row_power, &g2, fgrid.domega())
}

/// Same quantities by direct evaluation of the separable double sums; O(n²K).
pub fn direct_filter_statistics(set: &PhotonAmplitudeSet, specs: &[FilterSpec], fgrid: &FrequencyGrid) -> Result<Vec<FilteredStats>> {
    let rr = check_two_photon(set)?;
    let tgrid = &set.grid;
    fgrid.fft_len(tgrid)?;
    let t2 = transmissions(specs, fgrid)?;
    let h = tgrid.h();
    let n = tgrid.len();
    let omegas = fgrid.omegas();
    let kern: Vec<Vec<C64>> =
        omegas.iter().map(|w| (0..n).map(|i| C64::from_polar(h, -w * (tgrid.zeta(i) - tgrid.zeta_start))).collect()).collect();
    let dft = |f: &dyn Fn(usize) -> C64| -> Vec<C64> { kern.iter().map(|k| (0..n).map(|i| k[i] * f(i)).sum()).collect() };

    let r = set.single(Channel::R)?;
    let g = dft(&|i| r.phi_g[i]);
    let ground_power: Vec<f64> = g.iter().map(|v| v.norm_sqr()).collect();
    let mut single_power = ground_power.clone();
    for e in &r.phi_e {
        for (p, v) in single_power.iter_mut().zip(dft(&|i| e[i])) {
            *p += v.norm_sqr();
        }
    }
    let sp = Spectra { single_power, ground_power, ground_norm: h * r.phi_g.iter().map(|v| v.norm_sqr()).sum::<f64>() };

    let rows: Vec<Vec<C64>> = (0..n).into_par_iter().map(|b| dft(&|a| rr.ordered_sum(a, b))).collect();
    let row_power: Vec<f64> = (0..omegas.len()).map(|j| h * rows.iter().map(|r| r[j].norm_sqr()).sum::<f64>()).collect();
    let mut g2 = vec![0.0; specs.len()];
    for k1 in 0..omegas.len() {
        let col = dft(&|b| rows[b][k1]);
        for (acc, t) in g2.iter_mut().zip(&t2) {
            *acc += t[k1] * col.iter().zip(t).map(|(v, t)| t * v.norm_sqr()).sum::<f64>();
        }
    }
    assemble(&sp, &t2, &row_power, &g2, fgrid.domega())
}

pub fn filtered_pulsed_g2(set: &PhotonAmplitudeSet, spec: &FilterSpec, fgrid: &FrequencyGrid) -> Result<f64> {
    Ok(filter_statistics(set, std::slice::from_ref(spec), fgrid)?[0].g2p)
}

pub fn filtered_mean_photons(set: &PhotonAmplitudeSet, spec: &FilterSpec, fgrid: &FrequencyGrid) -> Result<f64> {
    Ok(filter_statistics(set, std::slice::from_ref(spec), fgrid)?[0].mean_n)
}

/// η_sp = (1/2π)∫|T|²|Φ_gR|²dω / ∫|φ_gR|²dζ_e; needs only the R slice.
pub fn single_photon_efficiency(set: &PhotonAmplitudeSet, spec: &FilterSpec, fgrid: &FrequencyGrid) -> Result<f64> {
    let tr = Transformer::new(&set.grid, fgrid)?;
    let t2 = transmissions(std::slice::from_ref(spec), fgrid)?;
    efficiency(&single_spectra(set, &tr)?, &t2[0], fgrid.domega())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::{SingleSlice, Triangle, TwoPhotonAmplitude};
    use proptest::prelude::*;

    #[test]
    fn lorentzian_and_gaussian_values() {
        let l = FilterSpec::lorentzian(2.0).unwrap();
        assert!((l.transmission(0.0) - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!((l.transmission(1.0).norm_sqr() - 0.5).abs() < 1e-15);
        assert!((l.transmission(-1.0).norm_sqr() - 0.5).abs() < 1e-15);
        let g = FilterSpec::gaussian(1.5).unwrap();
        assert!((g.transmission(1.5).norm_sqr() - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn table_parsing_and_validation() {
        let f = FilterSpec::parse_table("# w re im\n-1 0 0\n0, 1, 0\n1 0 1\n", 1.0).unwrap();
        assert_eq!(f.transmission(0.5), C64::new(0.5, 0.5));
        assert_eq!(f.transmission(2.0), ZERO);
        assert_eq!(f.sample(&[-2.0, 0.0]), vec![ZERO, C64::new(1.0, 0.0)]);
        assert!(FilterSpec::parse_table("0 1 0\n0 1 0\n", 1.0).is_err());
        assert!(FilterSpec::parse_table("0 1.5 0\n1 0 0\n", 1.0).is_err());
        assert!(FilterSpec::parse_table("0 1\n", 1.0).is_err());
        assert!(FilterSpec::lorentzian(0.0).is_err());
    }

    #[test]
    fn frequency_grid_alignment_and_checks() {
        let t = TimeGrid::new(0.0, 20.0, 1000).unwrap();
        let f = FrequencyGrid::resolve(&t, 1.0, None).unwrap();
        let m = f.fft_len(&t).unwrap();
        assert_eq!(f.n_freq, m);
        assert!(f.domega() <= 0.05 * 1.01);
        assert!((f.omega_max - std::f64::consts::PI / t.h()).abs() < 1e-9);
        f.validate(&t, 1.0).unwrap();
        assert!(f.validate(&t, 0.3).is_err());
        assert!(FrequencyGrid::new(64, 3.3).validate(&t, 1.0).is_err());
        let short = TimeGrid::new(0.0, 0.5, 100).unwrap();
        let g = FrequencyGrid::resolve(&short, 1.0, None).unwrap();
        assert!(matches!(g.validate(&short, 1.0), Err(Error::FrequencyGrid(_))));
    }

    fn toy_set(n_steps: usize) -> PhotonAmplitudeSet {
        let grid = TimeGrid::new(0.0, 6.0, n_steps).unwrap();
        let n = grid.len();
        let phi: Vec<C64> = (0..n).map(|i| C64::new((-0.5 * grid.zeta(i)).exp() * 0.9, 0.1 * grid.zeta(i).sin())).collect();
        let rows = (0..n)
            .map(|a| {
                (a..n)
                    .map(|b| {
                        let (x, y) = (grid.zeta(a), grid.zeta(b));
                        C64::from_polar(0.3 * (y - x) * (-0.5 * (x + y)).exp(), 0.7 * x - 0.2 * y)
                    })
                    .collect()
            })
            .collect();
        PhotonAmplitudeSet {
            grid,
            c_g: ZERO,
            c_e: vec![ZERO],
            c_ee: vec![],
            single: vec![SingleSlice { channel: Channel::R, phi_g: phi, phi_e: vec![vec![ZERO; n]] }],
            two: vec![TwoPhotonAmplitude::new(Channel::R, Channel::R, Triangle::from_rows(n, rows).unwrap())],
        }
    }

    #[test]
    fn fft_path_matches_direct_sums() {
        let set = toy_set(150);
        let fgrid = FrequencyGrid::with_spacing(&set.grid, 0.4, 64).unwrap();
        let specs = [FilterSpec::lorentzian(2.0).unwrap(), FilterSpec::gaussian(3.0).unwrap(), FilterSpec::all_pass(100.0).unwrap()];
        let a = filter_statistics(&set, &specs, &fgrid).unwrap();
        let b = direct_filter_statistics(&set, &specs, &fgrid).unwrap();
        for (x, y) in a.iter().zip(&b) {
            for (u, v) in [(x.g2_pulsed, y.g2_pulsed), (x.mean_n, y.mean_n), (x.eta_sp, y.eta_sp)] {
                assert!((u - v).abs() <= 1e-6 * v.abs(), "{u} vs {v}");
            }
        }
    }

    #[test]
    fn all_pass_is_parseval_exact_on_the_full_band() {
        let set = toy_set(200);
        let fgrid = FrequencyGrid::resolve(&set.grid, 1.0, None).unwrap();
        let s = filter_statistics(&set, &[FilterSpec::all_pass(fgrid.omega_max + 1.0).unwrap()], &fgrid).unwrap()[0];
        let h = set.grid.h();
        let rr = set.two(Channel::R, Channel::R).unwrap();
        let n = set.grid.len();
        let psi: f64 = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| rr.ordered_sum(a, b).norm_sqr()).sum::<f64>() * h * h;
        let p1: f64 = set.single[0].phi_g.iter().map(|v| v.norm_sqr()).sum::<f64>() * h;
        assert!((s.g2_pulsed - psi).abs() < 1e-10 * psi);
        assert!((s.mean_n - (p1 + psi)).abs() < 1e-10 * (p1 + psi));
        assert!((s.eta_sp - 1.0).abs() < 1e-10);
    }

    #[test]
    fn blocking_filter_removes_everything() {
        let set = toy_set(100);
        let fgrid = FrequencyGrid::resolve(&set.grid, 1.0, None).unwrap();
        let f = FilterSpec::tabulated(vec![-1.0, 1.0], vec![ZERO; 2], 1.0).unwrap();
        assert!(matches!(filter_statistics(&set, std::slice::from_ref(&f), &fgrid), Err(Error::NoPhotons)));
        assert_eq!(single_photon_efficiency(&set, &f, &fgrid).unwrap(), 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn filters_are_passive(kappa in 0.3..30.0f64, gaussian in any::<bool>()) {
            let set = toy_set(120);
            // passivity holds bin by bin, so a short band suffices
            let fgrid = FrequencyGrid::with_spacing(&set.grid, 0.03, 256).unwrap();
            let f = if gaussian { FilterSpec::gaussian(kappa) } else { FilterSpec::lorentzian(kappa) }.unwrap();
            let all = FilterSpec::all_pass(fgrid.omega_max + 1.0).unwrap();
            let s = filter_statistics(&set, &[f, all], &fgrid).unwrap();
            prop_assert!(s[0].mean_n <= s[1].mean_n * (1.0 + 1e-12));
            prop_assert!(s[0].g2_pulsed <= s[1].g2_pulsed * (1.0 + 1e-12));
            prop_assert!(s[0].eta_sp <= 1.0 + 1e-12 && s[0].eta_sp >= 0.0);
        }
    }
}
