use std::f64::consts::PI;

use approx::assert_relative_eq;
use wgqed::correlations;
use wgqed::dynamics::{self, EmitterOptions};
use wgqed::filter::{self, FilterSpec, FrequencyGrid};
use wgqed::{DriveEnvelope, Geometry, PhotonAmplitudeSet, SystemParams};

fn source(n: usize) -> PhotonAmplitudeSet {
    let p = SystemParams::new(1.0, 0.0, 0.0, 0.0).unwrap();
    let d = DriveEnvelope::gaussian(0.1, PI, Geometry::Side).unwrap();
    let g = d.pulse_grid(n).unwrap();
    dynamics::solve_emitter(&p, &d, &g, &EmitterOptions::default()).unwrap()
}

#[test]
fn lorentzian_efficiency_follows_the_emission_line() {
    let set = source(800);
    let kappas = [1.0, 2.0, 5.0, 10.0, 20.0];
    let fg = FrequencyGrid::resolve(&set.grid, 1.0, None).unwrap();
    let eta: Vec<f64> = kappas
        .iter()
        .map(|&k| filter::single_photon_efficiency(&set, &FilterSpec::lorentzian(k).unwrap(), &fg).unwrap())
        .collect();
    // a Lorentzian line of width 1 through a Lorentzian filter of width κ
    // passes κ/(κ + 1)
    assert!((eta[0] - 0.5).abs() < 0.1, "{eta:?}");
    assert!(eta[3] > 0.8, "{eta:?}");
    assert!(eta.windows(2).all(|w| w[1] >= w[0]), "{eta:?}");
}

#[test]
fn narrow_filters_suppress_two_photon_events() {
    let set = source(800);
    let kappas = [1.0, 2.0, 5.0, 10.0];
    let fg = FrequencyGrid::resolve(&set.grid, 1.0, None).unwrap();
    for make in [FilterSpec::lorentzian, FilterSpec::gaussian] {
        let specs: Vec<FilterSpec> = kappas.iter().map(|&k| make(k).unwrap()).collect();
        let g2: Vec<f64> = filter::filter_statistics(&set, &specs, &fg).unwrap().iter().map(|s| s.g2p).collect();
        assert!(g2.windows(2).all(|w| w[1] > w[0]), "{g2:?}");
    }
}

#[test]
fn wide_filters_leave_the_statistics_unchanged() {
    let set = source(800);
    let bare = correlations::pulsed_stats(&set).unwrap();
    let fg = FrequencyGrid::resolve(&set.grid, 100.0, None).unwrap();
    let specs = [FilterSpec::lorentzian(100.0).unwrap(), FilterSpec::gaussian(100.0).unwrap()];
    for s in filter::filter_statistics(&set, &specs, &fg).unwrap() {
        assert_relative_eq!(s.g2p, bare.g2p, max_relative = 0.02);
    }
}

#[test]
fn tabulated_all_pass_is_transparent() {
    let set = source(800);
    let bare = correlations::pulsed_stats(&set).unwrap();
    let fg = FrequencyGrid::resolve(&set.grid, 1.0, None).unwrap();
    let spec = FilterSpec::all_pass(2.0 * fg.omega_max).unwrap();
    let s = filter::filter_statistics(&set, &[spec], &fg).unwrap()[0];
    assert_relative_eq!(s.g2p, bare.g2p, max_relative = 0.01);
    assert_relative_eq!(s.mean_n, bare.mean_n, max_relative = 0.01);
    assert_relative_eq!(s.eta_sp, 1.0, max_relative = 0.01);
}

#[test]
fn table_file_round_trips_through_the_parser() {
    let set = source(400);
    let fg = FrequencyGrid::resolve(&set.grid, 2.0, None).unwrap();
    let lor = FilterSpec::lorentzian(2.0).unwrap();
    let lim = 1.05 * fg.omega_max;
    let text: String = (0..=40000)
        .map(|k| {
            let w = -lim + 2.0 * lim * k as f64 / 40000.0;
            let t = lor.transmission(w);
            format!("{w:.12e} {:.12e} {:.12e}\n", t.re, t.im)
        })
        .collect();
    // linear interpolation error is O(spacing²) near the peak
    let table = FilterSpec::parse_table(&text, 2.0).unwrap();
    let a = filter::filter_statistics(&set, &[lor, table], &fg).unwrap();
    assert_relative_eq!(a[0].eta_sp, a[1].eta_sp, max_relative = 1e-4);
    assert_relative_eq!(a[0].g2p, a[1].g2p, max_relative = 1e-3);
}
