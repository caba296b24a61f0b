use std::f64::consts::PI;

use approx::assert_relative_eq;
use wgqed::correlations;
use wgqed::dynamics::{self, EmitterOptions};
use wgqed::oracle;
use wgqed::{C64, DriveEnvelope, Geometry, PhotonAmplitudeSet, SystemParams, TimeGrid};

fn detect_all() -> SystemParams {
    SystemParams::new(1.0, 0.0, 0.0, 0.0).unwrap()
}

fn pi_pulse(sigma: f64) -> DriveEnvelope {
    DriveEnvelope::gaussian(sigma, PI, Geometry::Side).unwrap()
}

fn solve(p: &SystemParams, d: &DriveEnvelope, n: usize) -> (TimeGrid, PhotonAmplitudeSet) {
    let g = d.pulse_grid(n).unwrap();
    let set = dynamics::solve_emitter(p, d, &g, &EmitterOptions::default()).unwrap();
    (g, set)
}

#[test]
fn short_pi_pulse_emits_about_one_photon() {
    let (_, set) = solve(&detect_all(), &pi_pulse(0.1), 1000);
    let s = correlations::pulsed_stats(&set).unwrap();
    assert!(s.mean_n > 1.0 && s.mean_n < 1.1, "<n> = {}", s.mean_n);
    assert!(s.g2p > 0.0 && s.g2p < 0.2, "g2p = {}", s.g2p);
}

#[test]
fn truncated_oracle_reproduces_the_ansatz() {
    // without re-excitation after a detection both methods hold the same
    // two-photon histories, so only the integrators differ
    for sigma in [0.1, 0.5] {
        let p = detect_all();
        let d = pi_pulse(sigma);
        let (g, set) = solve(&p, &d, 1000);
        let a = correlations::pulsed_stats(&set).unwrap();
        let o = oracle::regression_pulsed_g2_truncated(&p, &d, &g).unwrap();
        assert_relative_eq!(a.mean_n, o.mean_n, max_relative = 1e-6);
        assert_relative_eq!(a.g2p, o.g2p, max_relative = 1e-4);
    }
}

#[test]
fn recycling_gap_is_four_times_the_photon_gap() {
    // the missing three-photon histories, of probability P₃, lower ⟨n⟩ by P₃
    // and the pair count by 3P₃ + P₃
    let p = detect_all();
    let d = pi_pulse(0.1);
    let (g, set) = solve(&p, &d, 1000);
    let a = correlations::pulsed_stats(&set).unwrap();
    let o = oracle::regression_pulsed_g2(&p, &d, &g).unwrap();
    let (dn, dg) = (o.mean_n - a.mean_n, o.g2_pulsed - a.g2_pulsed);
    assert!(dn > 0.0);
    assert_relative_eq!(dg / dn, 4.0, max_relative = 0.05);
}

#[test]
fn purity_degrades_with_pulse_width() {
    let p = detect_all();
    let values: Vec<f64> = [0.05, 0.1, 0.2, 0.5, 1.0]
        .iter()
        .map(|&s| correlations::pulsed_g2(&solve(&p, &pi_pulse(s), 800).1).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0]), "{values:?}");
}

#[test]
fn halving_the_step_keeps_g2p() {
    let p = detect_all();
    let d = pi_pulse(0.1);
    let coarse = correlations::pulsed_g2(&solve(&p, &d, 1000).1).unwrap();
    let fine = correlations::pulsed_g2(&solve(&p, &d, 2000).1).unwrap();
    assert_relative_eq!(coarse, fine, max_relative = 5e-3);
}

#[test]
fn single_emitter_state_keeps_its_norm() {
    let p = SystemParams::new(0.6, 0.3, 0.1, 0.2).unwrap();
    let deficit = |n| solve(&p, &pi_pulse(0.3), n).1.norm().unwrap() - 1.0;
    let (coarse, fine) = (deficit(600), deficit(1200));
    // only the emission-time quadrature is inexact; it converges at least
    // at second order
    assert!(fine.abs() < 1e-7, "deficit {fine}");
    assert!(coarse / fine > 3.5, "{coarse} {fine}");
}

#[test]
fn detected_fraction_scales_with_beta() {
    let d = pi_pulse(0.2);
    let n_all = correlations::mean_photons(&solve(&detect_all(), &d, 600).1).unwrap();
    let half = SystemParams::new(0.5, 0.5, 0.0, 0.0).unwrap();
    let n_half = correlations::mean_photons(&solve(&half, &d, 600).1).unwrap();
    // the emitter dynamics only see the total rate; G² is second order in β
    assert!(n_half < n_all && n_half > 0.45 * n_all, "{n_half} {n_all}");
}

#[test]
fn oracle_matches_the_density_matrix_population() {
    let p = detect_all();
    let d = pi_pulse(0.5);
    let g = d.pulse_grid(800).unwrap();
    let states = oracle::evolve_density(&p, &d, &g, oracle::DensityState::ground()).unwrap();
    let pop: Vec<f64> = states.iter().map(|s| s.rho_ee()).collect();
    let o = oracle::regression_pulsed_g2(&p, &d, &g).unwrap();
    assert_relative_eq!(o.mean_n, g.integrate(&pop), max_relative = 1e-12);
    assert!(states.iter().all(|s| (s.trace() - C64::new(1.0, 0.0)).norm() < 1e-9));
}

#[test]
fn weak_side_drive_matches_regression_g2() {
    let p = detect_all();
    let d = DriveEnvelope::constant(C64::new(0.01, 0.0), Geometry::Side);
    let g = TimeGrid::new(0.0, 26.0, 1300).unwrap();
    let opts = correlations::SteadyOptions { substitution: true, ..Default::default() };
    let a = correlations::g2_normalized_steady(&p, &d, &g, &opts).unwrap();
    let o = oracle::regression_cw_g2(&p, &d, &g, opts.branch_fraction).unwrap();
    assert_eq!(a.g2.len(), o.g2.len());
    for (k, (x, y)) in a.g2.iter().zip(&o.g2).enumerate() {
        assert!((x - y).abs() < 0.02 * y.max(1e-2), "delay {}: {x} vs {y}", a.delay[k]);
    }
}
