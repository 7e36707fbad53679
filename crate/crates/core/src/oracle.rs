//! Brute-force check of the analytic scattering results.
//!
//! The waveguide continuum is replaced by `N` modes per direction on a
//! uniform grid, each coupled to the atom with `g = √(Δω/(πτ))`, so that
//! `πg²/Δω = 1/τ`. The Hamiltonian conserves the excitation number, so the
//! one- and two-excitation sectors are built and evolved separately.
//!
//! Basis ordering, with `M` the total number of modes (`N` chiral, `2N`
//! two-mode with right movers first):
//!
//! * sector 1: `[e, 1₀, 1₁, …, 1_{M−1}]`
//! * sector 2: `[e1₀, …, e1_{M−1}]` then photon pairs `(a ≤ b)` in
//!   lexicographic order, `|1_a 1_b⟩` or `|2_a⟩`.
//!
//! A symmetric amplitude `f` maps onto pair coefficients as `√2·f·Δω` for
//! `a < b` and `f·Δω` for `a = b`; a distinguishable right/left amplitude
//! maps as `f·Δω`.
//!
//! Time evolution uses a Chebyshev expansion of `e^{−iHt}` whose spectral
//! interval comes from a rigorous bound on `H`, with Bessel coefficients
//! summed until they drop below `1e-15`.
//!
//! Scattering runs prepare the input at `t₀` and read it out at
//! `t₁ = t₀ + 0.8·2π/Δω`, below the comb revival time. `t₀` is the start of
//! the packet's arrival profile at the atom, taken as the point where
//! `|a(t)|²` first exceeds `1e-8` of its peak; for a Gaussian of width `σ`
//! centred on the atom this is `t₀ ≈ −4.29/σ`.

use rayon::prelude::*;
use serde::Serialize;

use crate::chiral::{self, BoundTerm};
use crate::error::{Error, Result};
use crate::model::{
    make_gaussian_packet, FrequencyGrid, Mode, OnePhotonWavepacket, PairAmplitude,
    SystemParams, TwoPhotonAmplitude, C64,
};
use crate::two_mode::{self, ChannelNorms, DirectionalAmplitudes};

/// Default cap on the working memory of one sector.
pub const DEFAULT_BUDGET_BYTES: usize = 4 << 30;

/// Largest `‖H‖·dt` accepted for one Chebyshev step.
pub const MAX_STEP_PHASE: f64 = 4000.0;

/// Profile level, relative to its peak, that marks the packet's support.
pub const ARRIVAL_THRESHOLD: f64 = 1e-8;

/// Fraction of the revival time `2π/Δω` used as the scattering window.
pub const REVIVAL_FRACTION: f64 = 0.8;

const COEFF_CUTOFF: f64 = 1e-15;

/// Smallest slice of a vector handed to one thread.
const PAR_CHUNK: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteModel {
    grid: FrequencyGrid,
    coupling: f64,
    omega_atom: f64,
    mode: Mode,
}

impl DiscreteModel {
    pub fn new(params: &SystemParams, grid: FrequencyGrid) -> Self {
        Self {
            grid,
            coupling: (grid.step() / (std::f64::consts::PI * params.tau())).sqrt(),
            omega_atom: params.omega_atom(),
            mode: params.mode(),
        }
    }

    /// Same model with the per-mode coupling replaced.
    pub fn with_coupling(mut self, g: f64) -> Self {
        self.coupling = g;
        self
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn omega_atom(&self) -> f64 {
        self.omega_atom
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn directions(&self) -> usize {
        match self.mode {
            Mode::Chiral => 1,
            Mode::TwoMode => 2,
        }
    }

    /// Total mode count over all directions.
    pub fn n_modes(&self) -> usize {
        self.grid.len() * self.directions()
    }

    pub fn mode_energy(&self, m: usize) -> f64 {
        self.grid.point(m % self.grid.len())
    }

    /// Lifetime parameter implied by the coupling, `Δω/(πg²)`.
    pub fn implied_tau(&self) -> f64 {
        self.grid.step() / (std::f64::consts::PI * self.coupling * self.coupling)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Sector {
    One,
    Two,
}

/// Index arithmetic for a sector basis over `modes` photon modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorBasis {
    pub sector: Sector,
    pub modes: usize,
}

impl SectorBasis {
    pub fn new(sector: Sector, modes: usize) -> Self {
        Self { sector, modes }
    }

    pub fn dim(&self) -> usize {
        let m = self.modes;
        match self.sector {
            Sector::One => m + 1,
            Sector::Two => m + m * (m + 1) / 2,
        }
    }

    /// Sector-1 index of a photon in mode `m`; the atom is index 0.
    pub fn photon(&self, m: usize) -> usize {
        1 + m
    }

    /// Sector-2 index of the atom excited with a photon in mode `m`.
    pub fn atom_photon(&self, m: usize) -> usize {
        m
    }

    /// Sector-2 index of the photon pair `{a, b}`.
    pub fn pair(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        // rows before `a` hold Σ_{r<a} (M − r) pairs
        self.modes + a * self.modes - a * a.saturating_sub(1) / 2 + (b - a)
    }
}

/// Amplitudes over one sector's basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorState {
    pub sector: Sector,
    pub amplitudes: Vec<C64>,
}

impl SectorState {
    pub fn norm2(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Real symmetric matrix: diagonal plus off-diagonal entries in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseHamiltonian {
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseHamiltonian {
    fn from_rows(diag: Vec<f64>, rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(diag.len() + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self { diag, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn nnz(&self) -> usize {
        self.diag.len() + self.vals.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[range.clone()].binary_search(&j) {
            Ok(p) => self.vals[range.start + p],
            Err(_) => 0.0,
        }
    }

    /// True when every stored entry has a bit-identical transpose partner.
    pub fn is_symmetric(&self) -> bool {
        (0..self.dim()).all(|i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).all(|p| self.get(self.cols[p], i) == self.vals[p])
        })
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let n = self.dim();
        nalgebra::DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// `y = H x`. Rows are distributed over threads but each row is summed
    /// in a fixed order, so the result does not depend on the thread count.
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        y.par_iter_mut().with_min_len(PAR_CHUNK).enumerate().for_each(|(i, yi)| {
            let mut acc = x[i] * self.diag[i];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += x[self.cols[p]] * self.vals[p];
            }
            *yi = acc;
        });
    }

    /// Interval containing the spectrum.
    ///
    /// The off-diagonal part `A` is bounded by a weighted Schur test,
    /// `‖A‖ ≤ maxᵢ Σⱼ |aᵢⱼ| wⱼ / wᵢ` with `wᵢ = √(Σⱼ |aᵢⱼ|)`, which is tight
    /// for the star-shaped couplings used here.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let row_sum: Vec<f64> = (0..n)
            .map(|i| self.vals[self.row_ptr[i]..self.row_ptr[i + 1]].iter().map(|v| v.abs()).sum())
            .collect();
        let w: Vec<f64> = row_sum.iter().map(|s| s.sqrt()).collect();
        let mut nu: f64 = 0.0;
        for i in 0..n {
            if w[i] == 0.0 {
                continue;
            }
            let mut acc = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[p].abs() * w[self.cols[p]];
            }
            nu = nu.max(acc / w[i]);
        }
        let lo = self.diag.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (lo - nu, hi + nu)
    }
}

/// Rough working-memory estimate for evolving a sector.
fn memory_estimate(dim: usize, offdiag: usize) -> usize {
    // diagonal, CSR arrays and five complex work vectors
    dim * (8 + 8 + 5 * 16) + offdiag * (8 + 8)
}

pub fn build_hamiltonian(model: &DiscreteModel, sector: Sector) -> Result<SparseHamiltonian> {
    build_hamiltonian_with_budget(model, sector, DEFAULT_BUDGET_BYTES)
}

pub fn build_hamiltonian_with_budget(
    model: &DiscreteModel,
    sector: Sector,
    budget_bytes: usize,
) -> Result<SparseHamiltonian> {
    let m = model.n_modes();
    let basis = SectorBasis::new(sector, m);
    let dim = basis.dim();
    let offdiag = match sector {
        Sector::One => 2 * m,
        Sector::Two => 2 * m * m,
    };
    let need = memory_estimate(dim, offdiag);
    if need > budget_bytes {
        return Err(Error::BudgetExceeded(format!(
            "sector of dimension {dim} needs about {need} bytes, budget is {budget_bytes}"
        )));
    }
    let g = model.coupling();
    let om = model.omega_atom();
    let energy: Vec<f64> = (0..m).map(|k| model.mode_energy(k)).collect();
    let sqrt2 = std::f64::consts::SQRT_2;

    let mut diag = vec![0.0; dim];
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
    match sector {
        Sector::One => {
            diag[0] = om;
            for k in 0..m {
                let p = basis.photon(k);
                diag[p] = energy[k];
                rows[0].push((p, g));
                rows[p].push((0, g));
            }
        }
        Sector::Two => {
            for a in 0..m {
                diag[basis.atom_photon(a)] = om + energy[a];
                for b in a..m {
                    diag[basis.pair(a, b)] = energy[a] + energy[b];
                }
            }
            // σ₋ a_b† |e 1_a⟩ = |1_a 1_b⟩ or √2 |2_a⟩
            for a in 0..m {
                let ea = basis.atom_photon(a);
                for b in 0..m {
                    let p = basis.pair(a, b);
                    let v = if a == b { sqrt2 * g } else { g };
                    rows[ea].push((p, v));
                    rows[p].push((ea, v));
                }
            }
        }
    }
    Ok(SparseHamiltonian::from_rows(diag, rows))
}

/// `J₀(x) … J_K(x)` for `x ≥ 0` by Miller's backward recurrence, normalized
/// with `J₀ + 2ΣJ₂ₖ = 1`. `K` is the first order past `x` where `|J_K|`
/// drops below `1e-15`.
pub fn bessel_j_sequence(x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return vec![1.0];
    }
    let mut top = (x + 30.0 + 12.0 * x.cbrt()).ceil() as usize;
    top += top % 2;
    let mut j = vec![0.0; top + 2];
    j[top] = 1e-300;
    for k in (1..=top).rev() {
        j[k - 1] = (2.0 * k as f64 / x) * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in &mut j[k - 1..] {
                *v *= 1e-250;
            }
        }
    }
    let mut norm = j[0];
    for k in (2..=top).step_by(2) {
        norm += 2.0 * j[k];
    }
    let mut out: Vec<f64> = j[..=top].iter().map(|v| v / norm).collect();
    let cut = (0..out.len())
        .find(|&k| k as f64 > x && out[k].abs() < COEFF_CUTOFF)
        .unwrap_or(out.len() - 1);
    out.truncate(cut + 1);
    out
}

/// Fixed-step Chebyshev propagator for `e^{−iH dt}`.
#[derive(Debug, Clone)]
pub struct ChebyshevPropagator<'a> {
    h: &'a SparseHamiltonian,
    center: f64,
    radius: f64,
    phase: C64,
    coeffs: Vec<C64>,
}

impl<'a> ChebyshevPropagator<'a> {
    pub fn new(h: &'a SparseHamiltonian, dt: f64) -> Result<Self> {
        if !dt.is_finite() {
            return Err(Error::InvalidParams(format!("time step {dt} is not finite")));
        }
        let (lo, hi) = h.spectral_bounds();
        let center = 0.5 * (lo + hi);
        let radius = 0.5 * (hi - lo) * (1.0 + 1e-9) + 1e-12;
        let x = radius * dt.abs();
        if x > MAX_STEP_PHASE {
            return Err(Error::StepTooLarge(format!(
                "spectral radius {radius:.4} times dt {dt} exceeds {MAX_STEP_PHASE}"
            )));
        }
        // e^{−iHdt} = e^{−ic dt} [J₀(x) + 2Σ (∓i)^k J_k(x) T_k(Hs)]
        let unit = C64::new(0.0, -dt.signum());
        let mut pow = C64::new(1.0, 0.0);
        let coeffs = bessel_j_sequence(x)
            .iter()
            .enumerate()
            .map(|(k, &jk)| {
                let c = if k == 0 { C64::new(jk, 0.0) } else { pow * (2.0 * jk) };
                pow *= unit;
                c
            })
            .collect();
        Ok(Self {
            h,
            center,
            radius,
            phase: C64::from_polar(1.0, -center * dt),
            coeffs,
        })
    }

    pub fn terms(&self) -> usize {
        self.coeffs.len()
    }

    fn scaled_apply(&self, x: &[C64], y: &mut [C64]) {
        self.h.matvec(x, y);
        let (c, r) = (self.center, 1.0 / self.radius);
        y.par_iter_mut()
            .zip(x.par_iter())
            .with_min_len(PAR_CHUNK)
            .for_each(|(yi, xi)| *yi = (*yi - xi * c) * r);
    }

    /// Advances `psi` by one step in place.
    pub fn step(&self, psi: &mut [C64]) {
        let n = psi.len();
        let mut acc: Vec<C64> = psi.iter().map(|v| v * self.coeffs[0]).collect();
        if self.coeffs.len() > 1 {
            let mut prev = psi.to_vec();
            let mut cur = vec![C64::new(0.0, 0.0); n];
            self.scaled_apply(&prev, &mut cur);
            let a1 = self.coeffs[1];
            acc.par_iter_mut()
                .zip(cur.par_iter())
                .with_min_len(PAR_CHUNK)
                .for_each(|(s, v)| *s += v * a1);
            let mut next = vec![C64::new(0.0, 0.0); n];
            for &ak in &self.coeffs[2..] {
                self.scaled_apply(&cur, &mut next);
                next.par_iter_mut()
                    .zip(prev.par_iter())
                    .zip(acc.par_iter_mut())
                    .with_min_len(PAR_CHUNK)
                    .for_each(|((nx, pv), s)| {
                        *nx = *nx * 2.0 - pv;
                        *s += *nx * ak;
                    });
                std::mem::swap(&mut prev, &mut cur);
                std::mem::swap(&mut cur, &mut next);
            }
        }
        let ph = self.phase;
        psi.par_iter_mut()
            .zip(acc.par_iter())
            .with_min_len(PAR_CHUNK)
            .for_each(|(p, s)| *p = s * ph);
    }
}

/// `e^{−iHt} ψ` using equal steps no longer than `max_dt`. Negative `t`
/// runs backwards.
pub fn evolve(
    h: &SparseHamiltonian,
    state: &SectorState,
    t: f64,
    max_dt: f64,
) -> Result<SectorState> {
    if state.amplitudes.len() != h.dim() {
        return Err(Error::InvalidParams(format!(
            "state has {} amplitudes, Hamiltonian dimension is {}",
            state.amplitudes.len(),
            h.dim()
        )));
    }
    if !(max_dt > 0.0) {
        return Err(Error::InvalidParams(format!("time step {max_dt} must be positive")));
    }
    let steps = (t.abs() / max_dt).ceil().max(1.0) as usize;
    let prop = ChebyshevPropagator::new(h, t / steps as f64)?;
    let mut psi = state.amplitudes.clone();
    for _ in 0..steps {
        prop.step(&mut psi);
    }
    Ok(SectorState { sector: state.sector, amplitudes: psi })
}

/// Single-chunk step size used by the scattering runs.
fn auto_step(h: &SparseHamiltonian, t: f64) -> f64 {
    let (lo, hi) = h.spectral_bounds();
    let radius = 0.5 * (hi - lo);
    let chunks = (radius * t.abs() / 1000.0).ceil().max(1.0);
    t.abs() / chunks * (1.0 + 1e-12)
}

/// Start and end of a scattering run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringWindow {
    pub t0: f64,
    pub t1: f64,
    /// Last time the arrival profile exceeds the threshold.
    pub support_end: f64,
    /// Arrival intensity at `t₀` and `t₁`, relative to the peak.
    pub start_level: f64,
    pub end_level: f64,
}

/// Places the window on a periodic arrival profile sampled at
/// `t_j = −T/2 + j·T/n`.
fn arrival_window(profile: &[f64], period: f64) -> Result<ScatteringWindow> {
    let n = profile.len();
    let h = period / n as f64;
    let peak = profile.iter().cloned().fold(0.0, f64::max);
    let thr = ARRIVAL_THRESHOLD * peak;
    // Longest circular run of quiet samples: the packet occupies the rest.
    let above: Vec<bool> = profile.iter().map(|&p| p > thr).collect();
    let first_loud = above.iter().position(|&a| a).ok_or_else(|| {
        Error::InvalidParams("input packet is identically zero".into())
    })?;
    let (mut best_len, mut best_end) = (0usize, first_loud);
    let mut run = 0usize;
    for s in 1..=n {
        let idx = (first_loud + s) % n;
        if above[idx] {
            if run > best_len {
                best_len = run;
                best_end = idx;
            }
            run = 0;
        } else {
            run += 1;
        }
    }
    let support = n - best_len;
    // t₀ is the last quiet sample before the support.
    let start_idx = (best_end + n - 1) % n;
    let t0 = -0.5 * period + start_idx as f64 * h;
    let support_end = t0 + (support + 1) as f64 * h;
    let t1 = t0 + REVIVAL_FRACTION * period;
    if support_end >= t1 {
        return Err(Error::GridTooNarrow(format!(
            "packet lasts {:.4} but the revival-free window is {:.4}; refine the grid spacing",
            support_end - t0,
            t1 - t0
        )));
    }
    let level = |t: f64| {
        let j = (((t + 0.5 * period) / h).round() as i64).rem_euclid(n as i64) as usize;
        profile[j] / peak
    };
    Ok(ScatteringWindow {
        t0,
        t1,
        support_end,
        start_level: level(t0),
        end_level: level(t1),
    })
}

fn scan_times(grid: &FrequencyGrid) -> (Vec<f64>, f64) {
    let period = 2.0 * std::f64::consts::PI / grid.step();
    let n = 4 * grid.len();
    let h = period / n as f64;
    ((0..n).map(|j| -0.5 * period + j as f64 * h).collect(), period)
}

/// `(2π)^{-1/2} Σₙ cₙ e^{−iωₙt} Δω` for each column `m` of a row-major
/// table `c[n][m]`, evaluated at one time.
fn column_transform(grid: &FrequencyGrid, table: &[C64], cols: usize, t: f64) -> Vec<C64> {
    let scale = grid.step() / (2.0 * std::f64::consts::PI).sqrt();
    let rot = C64::from_polar(1.0, -grid.step() * t);
    let mut ph = C64::from_polar(scale, -grid.start() * t);
    let mut out = vec![C64::new(0.0, 0.0); cols];
    for row in table.chunks(cols) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v * ph;
        }
        ph *= rot;
    }
    out
}

fn one_photon_profile(packet: &OnePhotonWavepacket) -> (Vec<f64>, f64) {
    let grid = *packet.grid();
    let (times, period) = scan_times(&grid);
    let profile = times
        .par_iter()
        .map(|&t| column_transform(&grid, packet.amplitude(), 1, t)[0].norm_sqr())
        .collect();
    (profile, period)
}

/// Arrival profile of either photon: `Σ_m |A(t, m)|²` with `A` the time
/// transform along the first argument.
fn two_photon_profile(grid: &FrequencyGrid, table: &[C64]) -> (Vec<f64>, f64) {
    let (times, period) = scan_times(grid);
    let n = grid.len();
    let profile = times
        .par_iter()
        .map(|&t| column_transform(grid, table, n, t).iter().map(|v| v.norm_sqr()).sum())
        .collect();
    (profile, period)
}

/// A scattering result with the diagnostics of the finite-time run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome<T> {
    pub output: T,
    pub window: ScatteringWindow,
    /// Atom population left at `t₁`.
    pub residual_atom_population: f64,
    /// `|‖ψ(t₁)‖² − ‖ψ(t₀)‖²|`.
    pub norm_drift: f64,
}

fn require_mode(model: &DiscreteModel, mode: Mode) -> Result<()> {
    if model.mode() != mode {
        return Err(Error::InvalidParams(format!(
            "operation needs a {mode:?} model, got {:?}",
            model.mode()
        )));
    }
    Ok(())
}

fn require_grid(model: &DiscreteModel, grid: &FrequencyGrid) -> Result<()> {
    if !model.grid().same_axis(grid) {
        return Err(Error::InvalidGrid("input is not sampled on the model's mode grid".into()));
    }
    Ok(())
}

/// Evolves sector-1 amplitudes prepared from a packet in modes `0..N`.
fn run_one_photon(
    model: &DiscreteModel,
    input: &OnePhotonWavepacket,
) -> Result<(Vec<C64>, ScatteringWindow, f64, f64)> {
    require_grid(model, input.grid())?;
    let (profile, period) = one_photon_profile(input);
    let window = arrival_window(&profile, period)?;
    let h = build_hamiltonian(model, Sector::One)?;
    let basis = SectorBasis::new(Sector::One, model.n_modes());
    let grid = *model.grid();
    let sq = grid.step().sqrt();
    let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
    for (n, (w, f)) in grid.points().zip(input.amplitude()).enumerate() {
        psi[basis.photon(n)] = f * sq * C64::from_polar(1.0, -w * window.t0);
    }
    let state = SectorState { sector: Sector::One, amplitudes: psi };
    let span = window.t1 - window.t0;
    let out = evolve(&h, &state, span, auto_step(&h, span))?;
    let drift = (out.norm2() - state.norm2()).abs();
    let atom = out.amplitudes[0].norm_sqr();
    let modes: Vec<C64> = (0..model.n_modes())
        .map(|m| {
            out.amplitudes[basis.photon(m)] * C64::from_polar(1.0, model.mode_energy(m) * window.t1) / sq
        })
        .collect();
    Ok((modes, window, atom, drift))
}

/// Atom population `(t, |c_e(t)|²)` sampled every `sample_dt` while a
/// one-photon packet passes, from `t₀` to the end of its arrival profile.
pub fn atom_population_trace(
    model: &DiscreteModel,
    input: &OnePhotonWavepacket,
    sample_dt: f64,
) -> Result<Vec<(f64, f64)>> {
    require_grid(model, input.grid())?;
    if !(sample_dt > 0.0) {
        return Err(Error::InvalidParams(format!("sample step {sample_dt} must be positive")));
    }
    let (profile, period) = one_photon_profile(input);
    let window = arrival_window(&profile, period)?;
    let h = build_hamiltonian(model, Sector::One)?;
    let basis = SectorBasis::new(Sector::One, model.n_modes());
    let grid = *model.grid();
    let sq = grid.step().sqrt();
    let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
    for (n, (w, f)) in grid.points().zip(input.amplitude()).enumerate() {
        psi[basis.photon(n)] = f * sq * C64::from_polar(1.0, -w * window.t0);
    }
    let prop = ChebyshevPropagator::new(&h, sample_dt)?;
    let steps = ((window.support_end - window.t0) / sample_dt).ceil() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    out.push((window.t0, psi[0].norm_sqr()));
    for n in 1..=steps {
        prop.step(&mut psi);
        out.push((window.t0 + n as f64 * sample_dt, psi[0].norm_sqr()));
    }
    Ok(out)
}

/// Transmitted spectrum of a one-photon packet in the chiral model.
pub fn extract_one_photon_smatrix(
    model: &DiscreteModel,
    input: &OnePhotonWavepacket,
) -> Result<OracleOutcome<OnePhotonWavepacket>> {
    require_mode(model, Mode::Chiral)?;
    let (modes, window, atom, drift) = run_one_photon(model, input)?;
    Ok(OracleOutcome {
        output: OnePhotonWavepacket::new(*input.grid(), modes)?,
        window,
        residual_atom_population: atom,
        norm_drift: drift,
    })
}

/// `(transmitted, reflected)` spectra of a right-moving packet in the
/// two-mode model.
pub fn extract_one_photon_two_mode(
    model: &DiscreteModel,
    input: &OnePhotonWavepacket,
) -> Result<OracleOutcome<(OnePhotonWavepacket, OnePhotonWavepacket)>> {
    require_mode(model, Mode::TwoMode)?;
    let (modes, window, atom, drift) = run_one_photon(model, input)?;
    let n = input.grid().len();
    let right = OnePhotonWavepacket::new(*input.grid(), modes[..n].to_vec())?;
    let left = OnePhotonWavepacket::new(*input.grid(), modes[n..].to_vec())?;
    Ok(OracleOutcome {
        output: (right, left),
        window,
        residual_atom_population: atom,
        norm_drift: drift,
    })
}

/// Evolves a right-moving photon pair; returns the phase-corrected pair
/// coefficients divided by `Δω` (index by [`SectorBasis::pair`]).
fn run_two_photon(
    model: &DiscreteModel,
    input: &TwoPhotonAmplitude,
) -> Result<(Vec<C64>, ScatteringWindow, f64, f64)> {
    require_grid(model, input.grid())?;
    let grid = *model.grid();
    let n = grid.len();
    let (profile, period) = two_photon_profile(&grid, input.amplitude());
    let window = arrival_window(&profile, period)?;
    let h = build_hamiltonian(model, Sector::Two)?;
    let basis = SectorBasis::new(Sector::Two, model.n_modes());
    let dw = grid.step();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut psi = vec![C64::new(0.0, 0.0); basis.dim()];
    for a in 0..n {
        for b in a..n {
            let e = grid.point(a) + grid.point(b);
            let c = input.get(a, b) * dw * C64::from_polar(1.0, -e * window.t0);
            psi[basis.pair(a, b)] = if a == b { c } else { c * sqrt2 };
        }
    }
    let state = SectorState { sector: Sector::Two, amplitudes: psi };
    let span = window.t1 - window.t0;
    let mut out = evolve(&h, &state, span, auto_step(&h, span))?;
    let drift = (out.norm2() - state.norm2()).abs();
    let m = model.n_modes();
    let atom: f64 = (0..m).map(|k| out.amplitudes[basis.atom_photon(k)].norm_sqr()).sum();
    for a in 0..m {
        for b in a..m {
            let e = model.mode_energy(a) + model.mode_energy(b);
            let p = basis.pair(a, b);
            out.amplitudes[p] *= C64::from_polar(1.0 / dw, e * window.t1);
        }
    }
    Ok((out.amplitudes, window, atom, drift))
}

/// Output amplitude of a photon pair in the chiral model.
pub fn extract_two_photon_smatrix(
    model: &DiscreteModel,
    input: &TwoPhotonAmplitude,
) -> Result<OracleOutcome<TwoPhotonAmplitude>> {
    require_mode(model, Mode::Chiral)?;
    let (coeffs, window, atom, drift) = run_two_photon(model, input)?;
    let n = model.grid().len();
    let basis = SectorBasis::new(Sector::Two, n);
    let output = symmetric_table(&coeffs, &basis, 0, n);
    Ok(OracleOutcome {
        output: TwoPhotonAmplitude::new(*model.grid(), output)?,
        window,
        residual_atom_population: atom,
        norm_drift: drift,
    })
}

/// Symmetric table over modes `offset..offset+n`, undoing the `√2` on
/// distinct-mode pairs.
fn symmetric_table(coeffs: &[C64], basis: &SectorBasis, offset: usize, n: usize) -> Vec<C64> {
    let mut t = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in a..n {
            let c = coeffs[basis.pair(offset + a, offset + b)];
            let v = if a == b { c } else { c / std::f64::consts::SQRT_2 };
            t[a * n + b] = v;
            t[b * n + a] = v;
        }
    }
    t
}

/// Output of two right-moving photons in the two-mode model, by direction.
pub fn extract_two_photon_two_mode(
    model: &DiscreteModel,
    input: &TwoPhotonAmplitude,
) -> Result<OracleOutcome<DirectionalAmplitudes>> {
    require_mode(model, Mode::TwoMode)?;
    let (coeffs, window, atom, drift) = run_two_photon(model, input)?;
    let grid = *model.grid();
    let n = grid.len();
    let basis = SectorBasis::new(Sector::Two, model.n_modes());
    let rr = symmetric_table(&coeffs, &basis, 0, n);
    let ll = symmetric_table(&coeffs, &basis, n, n);
    let mut rl = vec![C64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            rl[a * n + b] = coeffs[basis.pair(a, n + b)];
        }
    }
    Ok(OracleOutcome {
        output: DirectionalAmplitudes {
            rr: TwoPhotonAmplitude::new(grid, rr)?,
            rl: PairAmplitude::new(grid, rl)?,
            ll: TwoPhotonAmplitude::new(grid, ll)?,
        },
        window,
        residual_atom_population: atom,
        norm_drift: drift,
    })
}

/// Built-in comparison setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Scatter1,
    Scatter2,
    TwoMode,
}

impl Suite {
    pub fn name(&self) -> &'static str {
        match self {
            Suite::Scatter1 => "scatter1",
            Suite::Scatter2 => "scatter2",
            Suite::TwoMode => "two-mode",
        }
    }

    /// Pass threshold on the suite's headline error.
    pub fn tolerance(&self) -> f64 {
        match self {
            Suite::Scatter1 => 1e-2,
            Suite::Scatter2 => 2e-2,
            Suite::TwoMode => 1e-2,
        }
    }
}

/// Grid and input for a comparison, in units of `1/τ` around `Ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Preset {
    /// Modes per direction.
    pub n: usize,
    pub span: f64,
    /// Gaussian width of each input photon.
    pub width: f64,
    /// Input centre relative to `Ω`.
    pub detuning: f64,
}

pub fn preset(suite: Suite) -> Preset {
    match suite {
        Suite::Scatter1 => Preset { n: 400, span: 140.0, width: 1.0, detuning: 0.0 },
        Suite::Scatter2 => Preset { n: 160, span: 76.0, width: 1.0, detuning: 0.0 },
        Suite::TwoMode => Preset { n: 240, span: 120.0, width: 1.0, detuning: 0.0 },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub suite: Suite,
    pub n_modes: usize,
    pub span: f64,
    /// `‖oracle − analytic‖` in the amplitude's own L2 norm.
    pub l2_error: f64,
    pub relative_l2_error: f64,
    pub sup_error: f64,
    /// Value compared against `tolerance` to set `converged`.
    pub headline_error: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub window: ScatteringWindow,
    pub residual_atom_population: f64,
    pub norm_drift: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_bound_relative_l2_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_norms: Option<ChannelNorms>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_norms: Option<ChannelNorms>,
}

fn l2_and_sup(a: &[C64], b: &[C64], weight: f64) -> (f64, f64, f64) {
    let mut d2 = 0.0;
    let mut b2 = 0.0;
    let mut sup: f64 = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = (x - y).norm();
        d2 += d * d;
        b2 += y.norm_sqr();
        sup = sup.max(d);
    }
    let l2 = (d2 * weight).sqrt();
    (l2, l2 / (b2 * weight).sqrt(), sup)
}

/// Largest `|arg(out/(t·in))|` over the packet's central 99% of mass.
pub fn phase_error(
    out: &OnePhotonWavepacket,
    input: &OnePhotonWavepacket,
    response: impl Fn(f64) -> C64,
) -> f64 {
    let (lo, hi) = input.mass_band(0.99);
    (lo..=hi)
        .map(|n| {
            let k = input.grid().point(n);
            (out.amplitude()[n] / (input.amplitude()[n] * response(k))).arg().abs()
        })
        .fold(0.0, f64::max)
}

fn preset_grid(params: &SystemParams, p: &Preset) -> Result<FrequencyGrid> {
    FrequencyGrid::centered(params.omega_atom(), p.span / params.tau(), p.n)
}

fn preset_pair(params: &SystemParams, grid: FrequencyGrid, p: &Preset) -> Result<TwoPhotonAmplitude> {
    let c = params.omega_atom() + p.detuning / params.tau();
    let a = make_gaussian_packet(grid, c, p.width / params.tau())?;
    TwoPhotonAmplitude::product(&a, &a)
}

/// One-photon chiral comparison of the oracle against `t_k f`.
pub fn compare_one_photon(params: &SystemParams, p: &Preset) -> Result<ComparisonReport> {
    let params = SystemParams::chiral(params.omega_atom(), params.tau())?;
    let grid = preset_grid(&params, p)?;
    let c = params.omega_atom() + p.detuning / params.tau();
    let input = make_gaussian_packet(grid, c, p.width / params.tau())?;
    let model = DiscreteModel::new(&params, grid);
    let oracle = extract_one_photon_smatrix(&model, &input)?;
    let analytic = chiral::scatter_one_photon(&input, &params);
    let (l2, rel, sup) = l2_and_sup(oracle.output.amplitude(), analytic.amplitude(), grid.step());
    let suite = Suite::Scatter1;
    Ok(ComparisonReport {
        suite,
        n_modes: model.n_modes(),
        span: p.span,
        l2_error: l2,
        relative_l2_error: rel,
        sup_error: sup,
        headline_error: l2,
        tolerance: suite.tolerance(),
        converged: l2 <= suite.tolerance(),
        window: oracle.window,
        residual_atom_population: oracle.residual_atom_population,
        norm_drift: oracle.norm_drift,
        phase_error: Some(phase_error(&oracle.output, &input, |k| chiral::t_k(k, &params))),
        no_bound_relative_l2_error: None,
        analytic_norms: None,
        oracle_norms: None,
    })
}

/// Two-photon chiral comparison, also reporting how far the oracle is from
/// the transform without its bound term.
pub fn compare_two_photon(params: &SystemParams, p: &Preset) -> Result<ComparisonReport> {
    let params = SystemParams::chiral(params.omega_atom(), params.tau())?;
    let grid = preset_grid(&params, p)?;
    let input = preset_pair(&params, grid, p)?;
    let model = DiscreteModel::new(&params, grid);
    let oracle = extract_two_photon_smatrix(&model, &input)?;
    let (analytic, _) = chiral::scatter_two_photon(&input, &params)?;
    let (no_bound, _) = chiral::scatter_two_photon_with(&input, &params, BoundTerm::Omit)?;
    let w = grid.step() * grid.step();
    let (l2, rel, sup) = l2_and_sup(oracle.output.amplitude(), analytic.amplitude(), w);
    let (_, rel_nb, _) = l2_and_sup(oracle.output.amplitude(), no_bound.amplitude(), w);
    let suite = Suite::Scatter2;
    Ok(ComparisonReport {
        suite,
        n_modes: model.n_modes(),
        span: p.span,
        l2_error: l2,
        relative_l2_error: rel,
        sup_error: sup,
        headline_error: rel,
        tolerance: suite.tolerance(),
        converged: rel <= suite.tolerance(),
        window: oracle.window,
        residual_atom_population: oracle.residual_atom_population,
        norm_drift: oracle.norm_drift,
        phase_error: None,
        no_bound_relative_l2_error: Some(rel_nb),
        analytic_norms: None,
        oracle_norms: None,
    })
}

/// Two-mode comparison of the directional channel norms.
pub fn compare_two_mode(params: &SystemParams, p: &Preset) -> Result<ComparisonReport> {
    let params = SystemParams::two_mode(params.omega_atom(), params.tau())?;
    let grid = preset_grid(&params, p)?;
    let input = preset_pair(&params, grid, p)?;
    let model = DiscreteModel::new(&params, grid);
    let oracle = extract_two_photon_two_mode(&model, &input)?;
    let analytic = two_mode::scatter_two_photon_two_mode(&input, &params)?;
    let w = grid.step() * grid.step();
    let mut o = oracle.output.rr.amplitude().to_vec();
    o.extend_from_slice(oracle.output.rl.amplitude());
    o.extend_from_slice(oracle.output.ll.amplitude());
    let mut a = analytic.rr.amplitude().to_vec();
    a.extend_from_slice(analytic.rl.amplitude());
    a.extend_from_slice(analytic.ll.amplitude());
    let (l2, rel, sup) = l2_and_sup(&o, &a, w);
    let (na, no) = (analytic.norms(), oracle.output.norms());
    let headline = na.max_abs_diff(&no);
    let suite = Suite::TwoMode;
    Ok(ComparisonReport {
        suite,
        n_modes: model.n_modes(),
        span: p.span,
        l2_error: l2,
        relative_l2_error: rel,
        sup_error: sup,
        headline_error: headline,
        tolerance: suite.tolerance(),
        converged: headline <= suite.tolerance(),
        window: oracle.window,
        residual_atom_population: oracle.residual_atom_population,
        norm_drift: oracle.norm_drift,
        phase_error: None,
        no_bound_relative_l2_error: None,
        analytic_norms: Some(na),
        oracle_norms: Some(no),
    })
}

pub fn run_comparison(suite: Suite, params: &SystemParams, p: &Preset) -> Result<ComparisonReport> {
    match suite {
        Suite::Scatter1 => compare_one_photon(params, p),
        Suite::Scatter2 => compare_two_photon(params, p),
        Suite::TwoMode => compare_two_mode(params, p),
    }
}
