//! Discretized-continuum evolution against the closed-form scattering
//! amplitudes.

use wqed::chiral::{self, BoundTerm};
use wqed::model::make_gaussian_packet;
use wqed::oracle::*;
use wqed::two_mode;
use wqed::{FrequencyGrid, SystemParams, TwoPhotonAmplitude, C64};

fn unit() -> SystemParams {
    SystemParams::chiral(0.0, 1.0).unwrap()
}

fn l2(a: &[C64], b: &[C64], weight: f64) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * weight).sqrt()
}

#[test]
fn one_photon_transmission_matches_closed_form() {
    let r = compare_one_photon(&unit(), &preset(Suite::Scatter1)).unwrap();
    assert_eq!(r.n_modes, 400);
    assert!(r.l2_error <= 1e-2, "{}", r.l2_error);
    assert!(r.sup_error <= 1e-2, "{}", r.sup_error);
    assert!(r.phase_error.unwrap() <= 1e-2, "{:?}", r.phase_error);
    assert!(r.converged);
    assert!(r.window.start_level <= ARRIVAL_THRESHOLD);
    assert!(r.norm_drift < 1e-9);
}

#[test]
fn one_photon_error_halves_when_band_doubles() {
    let p = unit();
    let coarse = compare_one_photon(&p, &Preset { n: 400, span: 140.0, width: 1.0, detuning: 0.0 }).unwrap();
    let fine = compare_one_photon(&p, &Preset { n: 800, span: 280.0, width: 1.0, detuning: 0.0 }).unwrap();
    let ratio = coarse.sup_error / fine.sup_error;
    assert!((1.7..=2.3).contains(&ratio), "{ratio}");
}

#[test]
fn errors_fall_under_combined_refinement() {
    // Δω → Δω/2 and span → span·√2 together.
    let p = unit();
    let mut last = f64::INFINITY;
    for &(n, span) in &[(200, 70.0), (566, 99.0), (1600, 140.0)] {
        let r = compare_one_photon(&p, &Preset { n, span, width: 1.0, detuning: 0.0 }).unwrap();
        assert!(r.l2_error < last, "{n}: {}", r.l2_error);
        last = r.l2_error;
    }
}

#[test]
fn detuned_photon_phase_profile() {
    let p = SystemParams::chiral(0.4, 1.3).unwrap();
    let r = compare_one_photon(&p, &Preset { n: 600, span: 200.0, width: 0.8, detuning: 0.7 }).unwrap();
    assert!(r.phase_error.unwrap() <= 1e-2, "{:?}", r.phase_error);
    assert!(r.l2_error <= 1e-2, "{}", r.l2_error);
}

#[test]
fn off_band_modes_stay_empty() {
    let p = unit();
    let grid = FrequencyGrid::centered(0.0, 140.0, 400).unwrap();
    let f = make_gaussian_packet(grid, 0.0, 1.0).unwrap();
    let out = extract_one_photon_smatrix(&DiscreteModel::new(&p, grid), &f).unwrap();
    let peak = f.amplitude().iter().map(|a| a.norm_sqr()).fold(0.0, f64::max);
    let leaked: f64 = f
        .amplitude()
        .iter()
        .zip(out.output.amplitude())
        .filter(|(a, _)| a.norm_sqr() < 1e-12 * peak)
        .map(|(_, b)| b.norm_sqr() * grid.step())
        .sum();
    assert!(leaked <= 1e-6, "{leaked}");
}

#[test]
fn resonant_pair_matches_two_photon_smatrix() {
    let r = compare_two_photon(&unit(), &preset(Suite::Scatter2)).unwrap();
    assert_eq!(r.n_modes, 160);
    assert!(r.relative_l2_error <= 2e-2, "{}", r.relative_l2_error);
    // without its bound term the transform is nowhere near the evolution
    assert!(r.no_bound_relative_l2_error.unwrap() >= 10.0 * r.relative_l2_error);
    assert!(r.norm_drift < 1e-9);
}

fn pair_at(grid: FrequencyGrid, c1: f64, c2: f64) -> TwoPhotonAmplitude {
    let a = make_gaussian_packet(grid, c1, 1.0).unwrap();
    let b = make_gaussian_packet(grid, c2, 1.0).unwrap();
    TwoPhotonAmplitude::product(&a, &b).unwrap()
}

#[test]
fn detuned_pairs() {
    let p = unit();
    let grid = FrequencyGrid::centered(0.0, 76.0, 160).unwrap();
    let model = DiscreteModel::new(&p, grid);
    let w = grid.step() * grid.step();

    // Total energy 2Ω: the bound term survives even far off resonance.
    let f = pair_at(grid, -25.0, 25.0);
    let out = extract_two_photon_smatrix(&model, &f).unwrap();
    let (full, report) = chiral::scatter_two_photon(&f, &p).unwrap();
    assert!(l2(out.output.amplitude(), full.amplitude(), w) <= 1e-3);
    assert!(report.bound_term_norm.sqrt() > 5e-3);

    let f = pair_at(grid, 20.0, 30.0);
    let out = extract_two_photon_smatrix(&model, &f).unwrap();
    let (phase_only, _) = chiral::scatter_two_photon_with(&f, &p, BoundTerm::Omit).unwrap();
    let (_, report) = chiral::scatter_two_photon(&f, &p).unwrap();
    assert!(report.bound_term_norm.sqrt() <= 2e-3);
    assert!(l2(out.output.amplitude(), phase_only.amplitude(), w) <= 5e-3);
}

#[test]
fn two_mode_single_photon_reflection() {
    let p = SystemParams::two_mode(0.0, 1.0).unwrap();
    let grid = FrequencyGrid::centered(0.0, 140.0, 400).unwrap();
    let f = make_gaussian_packet(grid, 0.3, 1.0).unwrap();
    let out = extract_one_photon_two_mode(&DiscreteModel::new(&p, grid), &f).unwrap();
    let (t, r) = two_mode::scatter_one_photon_two_mode(&f, &p);
    assert!(l2(out.output.0.amplitude(), t.amplitude(), grid.step()) <= 2e-2);
    assert!(l2(out.output.1.amplitude(), r.amplitude(), grid.step()) <= 2e-2);
    let total = out.output.0.norm2() + out.output.1.norm2() + out.residual_atom_population;
    assert!((total - 1.0).abs() < 1e-9);
}

#[test]
fn two_mode_channel_norms() {
    let r = compare_two_mode(&unit(), &preset(Suite::TwoMode)).unwrap();
    let (a, o) = (r.analytic_norms.unwrap(), r.oracle_norms.unwrap());
    assert!(a.max_abs_diff(&o) <= 1e-2, "{a:?} {o:?}");
    assert!((a.total() - 1.0).abs() < 1e-2);
    assert!(r.converged);
}

#[test]
fn two_mode_error_falls_with_band() {
    let p = unit();
    let mut last = f64::INFINITY;
    for &(n, span) in &[(120, 60.0), (170, 85.0), (240, 120.0)] {
        let r = compare_two_mode(&p, &Preset { n, span, width: 1.0, detuning: 0.0 }).unwrap();
        assert!(r.headline_error < last, "{n}: {}", r.headline_error);
        last = r.headline_error;
    }
}
