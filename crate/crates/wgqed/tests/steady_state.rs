use approx::assert_abs_diff_eq;
use wgqed::correlations::{self, FullOrderOptions, SteadyOptions};
use wgqed::dynamics::{self, EmitterOptions};
use wgqed::{C64, DriveEnvelope, Geometry, SystemParams, TimeGrid, TwoPhotonSelection};

const FIELD: f64 = 0.01;

fn params(beta_r: f64) -> SystemParams {
    let rest = 0.5 * (1.0 - beta_r);
    SystemParams::new(beta_r, rest, rest, 0.0).unwrap()
}

fn waveguide(e: f64) -> DriveEnvelope {
    DriveEnvelope::constant(C64::new(e, 0.0), Geometry::Waveguide)
}

fn steady(beta_r: f64) -> correlations::SteadyG2 {
    let g = TimeGrid::new(0.0, 26.0, 2600).unwrap();
    correlations::g2_normalized_steady(&params(beta_r), &waveguide(FIELD), &g, &SteadyOptions::default()).unwrap()
}

fn tail_deviation(s: &correlations::SteadyG2) -> f64 {
    s.delay.iter().zip(&s.g2).filter(|(d, _)| **d >= 15.0 - 1e-9).map(|(_, g)| (g - 1.0).abs()).fold(0.0, f64::max)
}

#[test]
fn quarter_coupling_is_antibunched_and_relaxes_to_one() {
    let s = steady(0.25);
    assert!(s.g2[0] < 1e-3, "g2(0) = {}", s.g2[0]);
    assert!(tail_deviation(&s) < 0.01);
}

#[test]
fn half_coupling_diverges_at_zero_delay() {
    let s = steady(0.5);
    assert!(s.g2[0] > 100.0, "g2(0) = {}", s.g2[0]);
}

#[test]
fn weak_coupling_is_partially_antibunched() {
    let s = steady(0.1);
    assert!(s.g2[0] > 0.0 && s.g2[0] < 1.0, "g2(0) = {}", s.g2[0]);
    assert!(tail_deviation(&s) < 0.01);
}

#[test]
fn zero_delay_value_orders_with_coupling() {
    // 1 − 2β_R transmission: bunching grows from β_R = 0.25 towards 0.5
    let g0: Vec<f64> = [0.25, 0.35, 0.45].iter().map(|&b| steady(b).g2[0]).collect();
    assert!(g0.windows(2).all(|w| w[1] > w[0]), "{g0:?}");
}

#[test]
fn resonant_half_coupling_blocks_transmission() {
    let p = SystemParams::new(0.5, 0.25, 0.25, 0.0).unwrap();
    let d = waveguide(FIELD);
    let g = TimeGrid::new(0.0, 26.0, 1300).unwrap();
    let opts = EmitterOptions { two_photon: TwoPhotonSelection::None, ..Default::default() };
    let set = dynamics::solve_emitter(&p, &d, &g, &opts).unwrap();
    let g1 = correlations::g1_leading(&set, &d, p.beta_r, true).unwrap();
    assert!(g1[1040] / (FIELD * FIELD) < 1e-3, "{}", g1[1040] / (FIELD * FIELD));
}

/// Linear-response transmission |1 − 2β_R/(1 − 2iΔ̃)|² of one emitter.
fn linear_transmission(beta_r: f64, delta: f64) -> f64 {
    (C64::new(1.0, 0.0) - C64::new(2.0 * beta_r, 0.0) / C64::new(1.0, -2.0 * delta)).norm_sqr()
}

#[test]
fn steady_intensity_matches_linear_response() {
    for (beta_r, delta) in [(0.1, 0.0), (0.25, 0.3), (0.4, -0.7)] {
        let p = SystemParams::new(beta_r, 1.0 - beta_r, 0.0, delta).unwrap();
        let e = 1e-4;
        let d = waveguide(e);
        let g = TimeGrid::new(0.0, 30.0, 1500).unwrap();
        let opts = EmitterOptions { two_photon: TwoPhotonSelection::None, ..Default::default() };
        let set = dynamics::solve_emitter(&p, &d, &g, &opts).unwrap();
        let g1 = correlations::g1_leading(&set, &d, beta_r, true).unwrap();
        assert_abs_diff_eq!(g1[g.n_steps] / (e * e), linear_transmission(beta_r, delta), epsilon = 1e-6);
    }
}

#[test]
fn full_and_leading_intensity_agree_at_weak_drive() {
    let p = params(0.25);
    let d = waveguide(FIELD);
    let g = TimeGrid::new(0.0, 26.0, 1300).unwrap();
    let opts = EmitterOptions { two_photon: TwoPhotonSelection::None, ..Default::default() };
    let set = dynamics::solve_emitter(&p, &d, &g, &opts).unwrap();
    let lead = correlations::g1_leading(&set, &d, p.beta_r, true).unwrap();
    let full = correlations::g1_full(&set, &d, p.beta_r, &FullOrderOptions::default()).unwrap();
    for i in (400..g.len()).step_by(50) {
        assert!((full[i] - lead[i]).abs() <= 1e-3 * lead[i], "node {i}: {} vs {}", full[i], lead[i]);
    }
}

#[test]
fn steady_result_is_reported_on_the_delay_grid() {
    let g = TimeGrid::new(0.0, 26.0, 1300).unwrap();
    let s = correlations::g2_normalized_steady(&params(0.25), &waveguide(FIELD), &g, &SteadyOptions::default()).unwrap();
    assert_eq!(s.delay.len(), s.g2.len());
    assert_eq!(s.delay[0], 0.0);
    assert_abs_diff_eq!(s.delay[1], g.h(), epsilon = 1e-12);
    assert!(s.drift < 1e-2);
}

#[test]
fn halving_the_step_keeps_zero_delay_value() {
    let run = |n| {
        let g = TimeGrid::new(0.0, 26.0, n).unwrap();
        correlations::g2_normalized_steady(&params(0.1), &waveguide(FIELD), &g, &SteadyOptions::default()).unwrap().g2[0]
    };
    let (coarse, fine) = (run(1300), run(2600));
    assert!((coarse - fine).abs() < 5e-3 * fine, "{coarse} {fine}");
}

#[test]
fn short_runs_are_flagged_as_unconverged() {
    let g = TimeGrid::new(0.0, 2.0, 200).unwrap();
    let r = correlations::g2_normalized_steady(&params(0.25), &waveguide(FIELD), &g, &SteadyOptions::default());
    assert!(matches!(r, Err(wgqed::Error::NotConverged { .. })));
}
