//! Shared physical parameters, frequency grids and photon amplitude containers.
//!
//! All frequencies are detunings from the linearization point of the
//! waveguide dispersion, so the atom sits at `omega_atom` and a photon of
//! label `k` has energy `k`. Time is measured in the same unit as `tau`.
//!
//! Frequency integrals are rectangle sums `Σ f(ωₙ)·Δω` over the grid.
//! The time-domain convention is
//!
//! ```text
//! a(t) = (2π)^{-1/2} ∫ dk f(k) e^{-ikt}
//! ```
//!
//! and a two-photon state is `(1/√2) ∬ f(k₁,k₂) a†(k₁) a†(k₂) |0⟩` with `f`
//! symmetric and `∬|f|² = 1`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance below which `normalize` leaves an amplitude untouched.
const NORM_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// One-way waveguide.
    Chiral,
    /// Bidirectional waveguide with left- and right-moving branches.
    TwoMode,
}

/// Atom detuning `Ω` and lifetime parameter `τ`; the spontaneous emission
/// rate is `2/τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    omega_atom: f64,
    tau: f64,
    mode: Mode,
}

impl SystemParams {
    pub fn new(omega_atom: f64, tau: f64, mode: Mode) -> Result<Self> {
        if !omega_atom.is_finite() {
            return Err(Error::InvalidParams(format!(
                "atom detuning must be finite, got {omega_atom}"
            )));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tau must be positive and finite, got {tau}"
            )));
        }
        Ok(Self {
            omega_atom,
            tau,
            mode,
        })
    }

    pub fn chiral(omega_atom: f64, tau: f64) -> Result<Self> {
        Self::new(omega_atom, tau, Mode::Chiral)
    }

    pub fn two_mode(omega_atom: f64, tau: f64) -> Result<Self> {
        Self::new(omega_atom, tau, Mode::TwoMode)
    }

    pub fn omega_atom(&self) -> f64 {
        self.omega_atom
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Spontaneous emission rate `2/τ`.
    pub fn decay_rate(&self) -> f64 {
        2.0 / self.tau
    }

    /// The interacting even sector of a bidirectional waveguide: a chiral
    /// problem with `τ' = τ/2` (the atom couples to `√2` times the even
    /// field).
    pub fn even_sector(&self) -> SystemParams {
        SystemParams {
            omega_atom: self.omega_atom,
            tau: self.tau / 2.0,
            mode: Mode::Chiral,
        }
    }
}

/// Uniform frequency axis `ωₙ = start + n·step`, `n = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !start.is_finite() {
            return Err(Error::InvalidGrid(format!("start must be finite, got {start}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if count < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {count}")));
        }
        Ok(Self { start, step, count })
    }

    /// Grid with `count` points spanning `[min, max]` inclusive.
    pub fn from_range(min: f64, max: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {count}")));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::InvalidGrid(format!("bad range [{min}, {max}]")));
        }
        Self::new(min, (max - min) / (count - 1) as f64, count)
    }

    /// Midpoint grid of `count` cells of width `span/count` centred on
    /// `center`. The centre itself is a grid point only for odd `count`.
    pub fn centered(center: f64, span: f64, count: usize) -> Result<Self> {
        if !(span.is_finite() && span > 0.0) {
            return Err(Error::InvalidGrid(format!("span must be positive, got {span}")));
        }
        let step = span / count as f64;
        Self::new(center - 0.5 * span + 0.5 * step, step, count)
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn end(&self) -> f64 {
        self.point(self.count - 1)
    }

    pub fn point(&self, n: usize) -> f64 {
        self.start + n as f64 * self.step
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.count).map(move |n| self.point(n))
    }

    /// Fractional index of `omega`, `None` when outside `[start, end]`.
    pub fn position(&self, omega: f64) -> Option<f64> {
        let pos = (omega - self.start) / self.step;
        let last = (self.count - 1) as f64;
        // Points that are on the grid up to rounding must not be dropped.
        let slack = 1e-9;
        if pos < -slack || pos > last + slack {
            None
        } else {
            Some(pos.clamp(0.0, last))
        }
    }

    /// Index of the grid point closest to `omega` (clamped to the grid).
    pub fn nearest(&self, omega: f64) -> usize {
        let pos = ((omega - self.start) / self.step).round();
        pos.clamp(0.0, (self.count - 1) as f64) as usize
    }

    pub fn same_axis(&self, other: &FrequencyGrid) -> bool {
        self.count == other.count
            && (self.start - other.start).abs() <= 1e-12 * (1.0 + self.start.abs())
            && (self.step - other.step).abs() <= 1e-12 * self.step
    }
}

/// One-photon spectral amplitude `f(k)` sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OnePhotonWavepacket {
    grid: FrequencyGrid,
    amplitude: Vec<C64>,
}

impl OnePhotonWavepacket {
    pub fn new(grid: FrequencyGrid, amplitude: Vec<C64>) -> Result<Self> {
        if amplitude.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "amplitude has {} samples, grid has {}",
                amplitude.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitude })
    }

    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> C64) -> Self {
        let amplitude = grid.points().map(f).collect();
        Self { grid, amplitude }
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[C64] {
        &self.amplitude
    }

    pub fn into_amplitude(self) -> Vec<C64> {
        self.amplitude
    }

    /// `Σ|fₙ|² Δω`.
    pub fn norm2(&self) -> f64 {
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.step
    }

    pub fn normalize(&self) -> Result<Self> {
        let amplitude = normalized(&self.amplitude, self.norm2())?;
        Ok(Self {
            grid: self.grid,
            amplitude,
        })
    }

    /// Pointwise product with a response function of frequency.
    pub fn map_with(&self, response: impl Fn(f64) -> C64) -> Self {
        let amplitude = self
            .grid
            .points()
            .zip(&self.amplitude)
            .map(|(k, a)| response(k) * a)
            .collect();
        Self {
            grid: self.grid,
            amplitude,
        }
    }

    /// Frequency band `[lo, hi]` (grid indices, inclusive) holding the central
    /// `fraction` of the packet's mass.
    pub fn mass_band(&self, fraction: f64) -> (usize, usize) {
        let total: f64 = self.amplitude.iter().map(|a| a.norm_sqr()).sum();
        let tail = 0.5 * (1.0 - fraction) * total;
        let mut acc = 0.0;
        let mut lo = 0;
        for (n, a) in self.amplitude.iter().enumerate() {
            acc += a.norm_sqr();
            if acc > tail {
                lo = n;
                break;
            }
        }
        acc = 0.0;
        let mut hi = self.amplitude.len() - 1;
        for (n, a) in self.amplitude.iter().enumerate().rev() {
            acc += a.norm_sqr();
            if acc > tail {
                hi = n;
                break;
            }
        }
        (lo, hi.max(lo))
    }
}

/// `Σ|fₙ|² Δω` of a one-photon packet.
pub fn norm2_one(packet: &OnePhotonWavepacket) -> f64 {
    packet.norm2()
}

/// `Σ|f|² Δω²` of a two-photon amplitude.
pub fn norm2_two(amplitude: &TwoPhotonAmplitude) -> f64 {
    amplitude.norm2()
}

/// Normalized Gaussian `f(k) ∝ exp(-(k-center)²/(2 width²))`.
///
/// The support `center ± 5·width` must lie inside the grid.
pub fn make_gaussian_packet(
    grid: FrequencyGrid,
    center: f64,
    width: f64,
) -> Result<OnePhotonWavepacket> {
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::InvalidWidth(width));
    }
    if !center.is_finite() {
        return Err(Error::InvalidParams(format!("center must be finite, got {center}")));
    }
    let (lo, hi) = (center - 5.0 * width, center + 5.0 * width);
    if lo < grid.start() || hi > grid.end() {
        return Err(Error::GridTooNarrow(format!(
            "gaussian support [{lo}, {hi}] exceeds grid [{}, {}]",
            grid.start(),
            grid.end()
        )));
    }
    let packet = OnePhotonWavepacket::from_fn(grid, |k| {
        let x = (k - center) / width;
        C64::new((-0.5 * x * x).exp(), 0.0)
    });
    packet.normalize()
}

/// Evaluates `a(t) = (2π)^{-1/2} Σ f(ωₙ) e^{-iωₙt} Δω` at each time.
///
/// Valid for `|t| ≤ π/Δω`; beyond that the sampled spectrum aliases.
pub fn packet_to_time_domain(packet: &OnePhotonWavepacket, times: &[f64]) -> Vec<C64> {
    let grid = packet.grid();
    let scale = grid.step() / (2.0 * PI).sqrt();
    times
        .iter()
        .map(|&t| {
            let mut acc = C64::new(0.0, 0.0);
            for (k, f) in grid.points().zip(packet.amplitude()) {
                acc += f * C64::from_polar(1.0, -k * t);
            }
            acc * scale
        })
        .collect()
}

/// Inverse of [`packet_to_time_domain`] for samples on a uniform time grid:
/// `f(ω) = (2π)^{-1/2} Σ a(tⱼ) e^{iωtⱼ} Δt`.
pub fn time_domain_to_packet(
    grid: FrequencyGrid,
    times: &[f64],
    values: &[C64],
) -> Result<OnePhotonWavepacket> {
    if times.len() != values.len() {
        return Err(Error::InvalidGrid(format!(
            "{} times but {} samples",
            times.len(),
            values.len()
        )));
    }
    if times.len() < 2 {
        return Err(Error::InvalidGrid("need at least 2 time samples".into()));
    }
    let dt = times[1] - times[0];
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt.abs());
    if !(dt > 0.0 && uniform) {
        return Err(Error::InvalidGrid("time samples must be uniform and increasing".into()));
    }
    let scale = dt / (2.0 * PI).sqrt();
    let amplitude = grid
        .points()
        .map(|k| {
            let mut acc = C64::new(0.0, 0.0);
            for (&t, a) in times.iter().zip(values) {
                acc += a * C64::from_polar(1.0, k * t);
            }
            acc * scale
        })
        .collect();
    OnePhotonWavepacket::new(grid, amplitude)
}

/// Symmetric two-photon amplitude `f(k₁,k₂)` on a square grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonAmplitude {
    grid: FrequencyGrid,
    amplitude: Vec<C64>,
}

impl TwoPhotonAmplitude {
    /// Builds from an `N×N` row-major table, symmetrizing it.
    pub fn new(grid: FrequencyGrid, table: Vec<C64>) -> Result<Self> {
        let n = grid.len();
        if table.len() != n * n {
            return Err(Error::InvalidGrid(format!(
                "table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        Ok(Self {
            grid,
            amplitude: symmetrize(&table, n),
        })
    }

    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64, f64) -> C64) -> Self {
        let n = grid.len();
        let mut table = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                table.push(f(grid.point(i), grid.point(j)));
            }
        }
        Self {
            grid,
            amplitude: symmetrize(&table, n),
        }
    }

    /// Normalized symmetrized product `φ(k₁)ψ(k₂) + ψ(k₁)φ(k₂)`.
    pub fn product(a: &OnePhotonWavepacket, b: &OnePhotonWavepacket) -> Result<Self> {
        if !a.grid().same_axis(b.grid()) {
            return Err(Error::InvalidGrid("packets live on different grids".into()));
        }
        let n = a.grid().len();
        let (fa, fb) = (a.amplitude(), b.amplitude());
        let mut table = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                table.push(fa[i] * fb[j] + fb[i] * fa[j]);
            }
        }
        Self::new(*a.grid(), table)?.normalize()
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn amplitude(&self) -> &[C64] {
        &self.amplitude
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.amplitude[i * self.grid.len() + j]
    }

    pub fn row(&self, i: usize) -> &[C64] {
        let n = self.grid.len();
        &self.amplitude[i * n..(i + 1) * n]
    }

    /// `Σ|f|² Δω²`.
    pub fn norm2(&self) -> f64 {
        let dw = self.grid.step();
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * dw * dw
    }

    pub fn normalize(&self) -> Result<Self> {
        let amplitude = normalized(&self.amplitude, self.norm2())?;
        Ok(Self {
            grid: self.grid,
            amplitude,
        })
    }

    /// Fraction of the squared norm carried by the outermost rows and
    /// columns of the table.
    pub fn edge_mass_fraction(&self) -> f64 {
        let n = self.grid.len();
        let total: f64 = self.amplitude.iter().map(|a| a.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    edge += self.get(i, j).norm_sqr();
                }
            }
        }
        edge / total
    }
}

/// General (not necessarily symmetric) amplitude over two distinguishable
/// photons, e.g. one right-moving and one left-moving.
#[derive(Debug, Clone, PartialEq)]
pub struct PairAmplitude {
    grid: FrequencyGrid,
    amplitude: Vec<C64>,
}

impl PairAmplitude {
    pub fn new(grid: FrequencyGrid, table: Vec<C64>) -> Result<Self> {
        let n = grid.len();
        if table.len() != n * n {
            return Err(Error::InvalidGrid(format!(
                "table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        Ok(Self {
            grid,
            amplitude: table,
        })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn amplitude(&self) -> &[C64] {
        &self.amplitude
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.amplitude[i * self.grid.len() + j]
    }

    /// `Σ|f|² Δω²`; no exchange factor since the photons are distinguishable.
    pub fn norm2(&self) -> f64 {
        let dw = self.grid.step();
        self.amplitude.iter().map(|a| a.norm_sqr()).sum::<f64>() * dw * dw
    }
}

/// Exchange-symmetric part `(f + fᵀ)/2` of an `n×n` row-major table.
pub fn symmetrize(table: &[C64], n: usize) -> Vec<C64> {
    let mut out = table.to_vec();
    for i in 0..n {
        for j in (i + 1)..n {
            let s = (table[i * n + j] + table[j * n + i]) * 0.5;
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    out
}

fn normalized(amplitude: &[C64], norm2: f64) -> Result<Vec<C64>> {
    if !(norm2.is_finite() && norm2 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "cannot normalize amplitude with squared norm {norm2}"
        )));
    }
    if (norm2 - 1.0).abs() <= NORM_SLACK {
        return Ok(amplitude.to_vec());
    }
    let scale = 1.0 / norm2.sqrt();
    Ok(amplitude.iter().map(|a| a * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wide_grid() -> FrequencyGrid {
        FrequencyGrid::from_range(-10.0, 10.0, 2001).unwrap()
    }

    #[test]
    fn params_reject_nonpositive_tau() {
        assert!(SystemParams::chiral(0.0, 0.0).is_err());
        assert!(SystemParams::chiral(0.0, -1.0).is_err());
        assert!(SystemParams::chiral(f64::NAN, 1.0).is_err());
        let p = SystemParams::two_mode(0.3, 2.0).unwrap();
        assert_eq!(p.even_sector().tau(), 1.0);
        assert_eq!(p.even_sector().mode(), Mode::Chiral);
    }

    #[test]
    fn grid_validation_and_points() {
        assert!(FrequencyGrid::new(0.0, 0.0, 10).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
        let g = FrequencyGrid::from_range(-5.0, 5.0, 1001).unwrap();
        assert_eq!(g.point(500), 0.0);
        assert_eq!(g.point(0), -5.0);
        assert!((g.end() - 5.0).abs() < 1e-12);
        let pts: Vec<f64> = g.points().collect();
        assert!(pts.windows(2).all(|w| w[1] > w[0]));

        let c = FrequencyGrid::centered(1.0, 40.0, 400).unwrap();
        assert!((c.step() - 0.1).abs() < 1e-15);
        assert!((c.point(199) + c.point(200) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_peak_and_norm() {
        let p = make_gaussian_packet(wide_grid(), 0.0, 1.0).unwrap();
        assert!((p.norm2() - 1.0).abs() < 1e-10);
        let a = p.amplitude();
        let peak = (0..a.len()).max_by(|&i, &j| a[i].re.total_cmp(&a[j].re)).unwrap();
        assert_eq!(p.grid().point(peak), 0.0);
        let ratio = a[1100].re / a[1000].re;
        assert!((ratio - (-0.5f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn gaussian_errors() {
        assert!(matches!(
            make_gaussian_packet(wide_grid(), 8.0, 1.0),
            Err(Error::GridTooNarrow(_))
        ));
        assert!(matches!(
            make_gaussian_packet(wide_grid(), 0.0, 0.0),
            Err(Error::InvalidWidth(_))
        ));
        assert!(matches!(
            make_gaussian_packet(wide_grid(), 0.0, -1.0),
            Err(Error::InvalidWidth(_))
        ));
    }

    #[test]
    fn norms_scale_quadratically() {
        let p = make_gaussian_packet(wide_grid(), 0.0, 1.0).unwrap();
        let doubled = p.map_with(|_| C64::new(2.0, 0.0));
        assert!((doubled.norm2() - 4.0 * p.norm2()).abs() < 1e-12);
        let zero = p.map_with(|_| C64::new(0.0, 0.0));
        assert_eq!(norm2_one(&zero), 0.0);

        let g = FrequencyGrid::from_range(-6.0, 6.0, 121).unwrap();
        let q = make_gaussian_packet(g, 0.0, 1.0).unwrap();
        let f = TwoPhotonAmplitude::product(&q, &q).unwrap();
        assert!((norm2_two(&f) - 1.0).abs() < 1e-10);
        let scaled = TwoPhotonAmplitude::new(g, f.amplitude().iter().map(|a| a * 2.0).collect())
            .unwrap();
        assert!((scaled.norm2() - 4.0).abs() < 1e-10);
        assert!(zero.normalize().is_err());
    }

    #[test]
    fn delta_packet_has_flat_time_profile() {
        let g = wide_grid();
        let mut amp = vec![C64::new(0.0, 0.0); g.len()];
        amp[1300] = C64::new(1.0 / g.step().sqrt(), 0.0);
        let p = OnePhotonWavepacket::new(g, amp).unwrap();
        let times: Vec<f64> = (0..50).map(|i| -20.0 + 0.8 * i as f64).collect();
        let a = packet_to_time_domain(&p, &times);
        let expected = (g.step() / (2.0 * PI)).sqrt();
        for v in a {
            assert!((v.norm() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_time_envelope_width() {
        let sigma = 2.0;
        let g = FrequencyGrid::from_range(-12.0, 12.0, 2401).unwrap();
        let p = make_gaussian_packet(g, 0.0, sigma).unwrap();
        let a = packet_to_time_domain(&p, &[0.0, 1.0 / sigma]);
        let ratio = a[1].norm() / a[0].norm();
        assert!((ratio / (-0.5f64).exp() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn parseval_on_gaussian() {
        let p = make_gaussian_packet(wide_grid(), 0.0, 1.0).unwrap();
        let times: Vec<f64> = (0..2001).map(|i| -10.0 + 0.01 * i as f64).collect();
        let a = packet_to_time_domain(&p, &times);
        let norm: f64 = a.iter().map(|v| v.norm_sqr()).sum::<f64>() * 0.01;
        assert!((norm - 1.0).abs() < 1e-3, "time-domain norm {norm}");
    }

    #[test]
    fn fourier_round_trip() {
        let g = FrequencyGrid::from_range(-8.0, 8.0, 321).unwrap();
        let p = make_gaussian_packet(g, 0.7, 1.1).unwrap().map_with(|k| C64::from_polar(1.0, 0.3 * k));
        // Nyquist: time window within ±π/Δω, time step below π/(frequency span).
        let times: Vec<f64> = (0..1201).map(|i| -30.0 + 0.05 * i as f64).collect();
        let a = packet_to_time_domain(&p, &times);
        let back = time_domain_to_packet(g, &times, &a).unwrap();
        let err: f64 = back
            .amplitude()
            .iter()
            .zip(p.amplitude())
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            * g.step();
        assert!(err.sqrt() < 1e-6, "relative L2 {}", err.sqrt());
    }

    #[test]
    fn symmetrize_keeps_symmetric_tables() {
        let g = FrequencyGrid::from_range(-3.0, 3.0, 7).unwrap();
        let f = TwoPhotonAmplitude::from_fn(g, |a, b| C64::new(a * b, a + b));
        let again = TwoPhotonAmplitude::new(g, f.amplitude().to_vec()).unwrap();
        assert_eq!(f, again);
        let asym = TwoPhotonAmplitude::from_fn(g, |a, b| C64::new(a, 2.0 * b));
        for i in 0..7 {
            for j in 0..7 {
                assert_eq!(asym.get(i, j), asym.get(j, i));
            }
        }
    }

    #[test]
    fn mass_band_brackets_gaussian() {
        let p = make_gaussian_packet(wide_grid(), 0.0, 1.0).unwrap();
        let (lo, hi) = p.mass_band(0.99);
        let g = p.grid();
        // 99% of |f|² (a Gaussian of std 1/√2) lies within ±1.82.
        assert!((g.point(hi) - 1.82).abs() < 0.02, "{}", g.point(hi));
        assert!((g.point(lo) + 1.82).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn normalize_is_idempotent(center in -3.0f64..3.0, width in 0.3f64..1.2, scale in 0.1f64..10.0) {
            let p = make_gaussian_packet(wide_grid(), center, width).unwrap()
                .map_with(|k| C64::from_polar(scale, k));
            let once = p.normalize().unwrap();
            let twice = once.normalize().unwrap();
            prop_assert_eq!(&once, &twice);
            prop_assert!((once.norm2() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn symmetrize_is_idempotent(vals in proptest::collection::vec(-1.0f64..1.0, 32)) {
            let table: Vec<C64> = vals.chunks(2).map(|c| C64::new(c[0], c[1])).collect();
            let once = symmetrize(&table, 4);
            let twice = symmetrize(&once, 4);
            prop_assert_eq!(once, twice);
        }
    }
}
