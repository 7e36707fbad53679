//! One function per command, each producing a [`Dataset`].

use num_complex::Complex64 as C64;
use serde_json::{json, Map, Value};

use wqed::chiral::{self, BoundTerm};
use wqed::fluorescence::{self, BlochState, DriveParams};
use wqed::model::make_gaussian_packet;
use wqed::oracle;
use wqed::two_mode;
use wqed::{FrequencyGrid, SystemParams, TwoPhotonAmplitude};

use crate::config::{Command, Settings};

/// Numeric table plus scalar results.
#[derive(Debug, Clone, Default)]
pub struct Dataset {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub summary: Map<String, Value>,
}

impl Dataset {
    fn table(columns: Vec<&'static str>) -> Self {
        Dataset { columns, ..Default::default() }
    }
}

pub fn run(s: &Settings) -> wqed::Result<Dataset> {
    match s.command {
        Command::Spectrum => spectrum(s),
        Command::TwoMode => two_mode_spectrum(s),
        Command::Scatter1 => scatter1(s),
        Command::Scatter2 => scatter2(s),
        Command::Fluorescence => fluorescence(s),
        Command::OracleCompare => oracle_compare(s),
    }
}

fn grid(s: &Settings) -> wqed::Result<FrequencyGrid> {
    let g = s.grid.as_ref().expect("command resolves a grid");
    FrequencyGrid::from_range(g.kmin, g.kmax, g.n)
}

fn spectrum(s: &Settings) -> wqed::Result<Dataset> {
    let params = SystemParams::chiral(s.omega, s.tau)?;
    let mut d = Dataset::table(vec!["k", "re_t", "im_t", "abs2_t", "excitation_probability"]);
    for k in grid(s)?.points() {
        let t = chiral::t_k(k, &params);
        d.rows.push(vec![k, t.re, t.im, t.norm_sqr(), chiral::excitation_probability(k, &params)]);
    }
    Ok(d)
}

/// `t` and the excitation probability are those of the even sector at `τ' = τ/2`.
fn two_mode_spectrum(s: &Settings) -> wqed::Result<Dataset> {
    let params = SystemParams::two_mode(s.omega, s.tau)?;
    let even = params.even_sector();
    let mut d = Dataset::table(vec![
        "k",
        "re_t",
        "im_t",
        "abs2_t",
        "excitation_probability",
        "re_rbar",
        "im_rbar",
        "abs2_rbar",
        "re_tbar",
        "im_tbar",
        "abs2_tbar",
    ]);
    for k in grid(s)?.points() {
        let t = chiral::t_k(k, &even);
        let r = two_mode::r_bar(k, &params);
        let tb = two_mode::t_bar(k, &params);
        d.rows.push(vec![
            k,
            t.re,
            t.im,
            t.norm_sqr(),
            chiral::excitation_probability(k, &even),
            r.re,
            r.im,
            r.norm_sqr(),
            tb.re,
            tb.im,
            tb.norm_sqr(),
        ]);
    }
    d.summary.insert("tau_prime".into(), json!(even.tau()));
    Ok(d)
}

fn scatter1(s: &Settings) -> wqed::Result<Dataset> {
    let params = SystemParams::chiral(s.omega, s.tau)?;
    let p = s.packet.as_ref().expect("command resolves a packet");
    let input = make_gaussian_packet(grid(s)?, p.center, p.width)?;
    let out = chiral::scatter_one_photon(&input, &params);
    let mut d = Dataset::table(vec!["omega", "re_in", "im_in", "re_out", "im_out"]);
    for ((w, a), b) in input.grid().points().zip(input.amplitude()).zip(out.amplitude()) {
        d.rows.push(vec![w, a.re, a.im, b.re, b.im]);
    }
    d.summary.insert("input_norm".into(), json!(input.norm2()));
    d.summary.insert("output_norm".into(), json!(out.norm2()));
    Ok(d)
}

fn scatter2(s: &Settings) -> wqed::Result<Dataset> {
    let params = SystemParams::chiral(s.omega, s.tau)?;
    let p = s.packet.as_ref().expect("command resolves a packet");
    let one = make_gaussian_packet(grid(s)?, p.center, p.width)?;
    let input = TwoPhotonAmplitude::product(&one, &one)?;
    let (out, report) = chiral::scatter_two_photon(&input, &params)?;
    let (_, no_bound) = chiral::scatter_two_photon_with(&input, &params, BoundTerm::Omit)?;
    let g = out.grid();
    let mut d = Dataset::table(vec!["omega1", "omega2", "re", "im"]);
    for i in 0..g.len() {
        for j in 0..g.len() {
            let a = out.get(i, j);
            d.rows.push(vec![g.point(i), g.point(j), a.re, a.im]);
        }
    }
    d.summary.insert("input_norm".into(), json!(report.input_norm));
    d.summary.insert("output_norm".into(), json!(report.output_norm));
    d.summary.insert("bound_term_norm".into(), json!(report.bound_term_norm));
    d.summary.insert("energy_check".into(), json!(report.energy_check));
    d.summary.insert("no_bound_output_norm".into(), json!(no_bound.output_norm));
    Ok(d)
}

fn fluorescence(s: &Settings) -> wqed::Result<Dataset> {
    let params = SystemParams::chiral(s.omega, s.tau)?;
    let dr = s.drive.as_ref().expect("command resolves a drive");
    let drive = DriveParams::new(C64::new(dr.alpha_re, dr.alpha_im), dr.k_drive)?;
    let ss = fluorescence::steady_state(&drive, &params, 0.0);

    let mut d = match dr.t_prime {
        None => {
            let traj = fluorescence::evolve_bloch(&BlochState::ground(0.0), &drive, &params, dr.t_end, dr.dt)?;
            let mut d = Dataset::table(vec!["t", "re_sm", "im_sm", "sz", "excited_population"]);
            for b in &traj {
                d.rows.push(vec![b.t, b.sm.re, b.sm.im, b.sz, 0.5 * (1.0 + b.sz)]);
            }
            d
        }
        Some(tp) => {
            let steps = ((dr.t_end - tp) / dr.dt + 1e-9).floor() as usize;
            let ts: Vec<f64> = (0..=steps).map(|n| tp + n as f64 * dr.dt).collect();
            let trace = fluorescence::regression_g1(&drive, &params, tp, &ts, dr.dt)?;
            let mut d = Dataset::table(vec!["t", "re_g1", "im_g1"]);
            for (t, g) in trace.ts.iter().zip(&trace.g1) {
                d.rows.push(vec![*t, g.re, g.im]);
            }
            d
        }
    };
    d.summary.insert("steady_state_excited_population".into(), json!(0.5 * (1.0 + ss.sz)));
    Ok(d)
}

fn oracle_compare(s: &Settings) -> wqed::Result<Dataset> {
    let suite = s.suite.expect("command resolves a suite").suite();
    let preset = s.preset.expect("command resolves a preset");
    let params = SystemParams::chiral(s.omega, s.tau)?;
    let report = oracle::run_comparison(suite, &params, &preset)?;

    let mut d = Dataset::table(vec![
        "n_modes",
        "l2_error",
        "relative_l2_error",
        "sup_error",
        "headline_error",
        "tolerance",
        "converged",
    ]);
    d.rows.push(vec![
        report.n_modes as f64,
        report.l2_error,
        report.relative_l2_error,
        report.sup_error,
        report.headline_error,
        report.tolerance,
        if report.converged { 1.0 } else { 0.0 },
    ]);
    if let Value::Object(m) = serde_json::to_value(&report).expect("report serializes") {
        d.summary = m;
    }
    if suite == oracle::Suite::TwoMode {
        d.summary.insert("tau_prime".into(), json!(s.tau / 2.0));
    }
    Ok(d)
}
