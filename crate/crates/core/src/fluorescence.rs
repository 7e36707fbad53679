//! Two-level atom under a coherent drive `a_in(t)|α⟩ = α e^{−ikt}|α⟩`.
//!
//! Everything is integrated in the frame rotating at the drive frequency,
//! `σ̃₋ = σ₋ e^{ikt}`, where the expectation-value equations become an
//! autonomous linear-affine system `ẋ = M x + c` with `x = (σ̃₋, σ̃₊, σ_z)`:
//!
//! ```text
//! d σ̃₋ = (i(k−Ω) − 1/τ) σ̃₋ + i α κ σ_z
//! d σ̃₊ = (−i(k−Ω) − 1/τ) σ̃₊ − i α* κ σ_z
//! d σ_z = −2iκ (α σ̃₊ − α* σ̃₋) − κ² (σ_z + 1)
//! ```
//!
//! with `κ = √(2/τ)`. [`BlochState`] values handed out are lab-frame.
//!
//! The density-matrix integrator at the bottom of the file is an
//! independent route to the same dynamics, used to cross-check the above.

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{SystemParams, C64};

const I: C64 = C64::new(0.0, 1.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriveParams {
    pub alpha: C64,
    pub k_drive: f64,
}

impl DriveParams {
    pub fn new(alpha: C64, k_drive: f64) -> Result<Self> {
        if !(alpha.re.is_finite() && alpha.im.is_finite() && k_drive.is_finite()) {
            return Err(Error::InvalidParams("drive must be finite".into()));
        }
        Ok(Self { alpha, k_drive })
    }
}

/// Lab-frame expectation values at time `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlochState {
    pub sm: C64,
    pub sp: C64,
    pub sz: f64,
    pub t: f64,
}

impl BlochState {
    pub fn ground(t: f64) -> Self {
        Self { sm: C64::new(0.0, 0.0), sp: C64::new(0.0, 0.0), sz: -1.0, t }
    }

    pub fn excited(t: f64) -> Self {
        Self { sm: C64::new(0.0, 0.0), sp: C64::new(0.0, 0.0), sz: 1.0, t }
    }

    fn to_rotating(self, k: f64) -> Vector3<C64> {
        let ph = C64::from_polar(1.0, k * self.t);
        Vector3::new(self.sm * ph, self.sp * ph.conj(), C64::new(self.sz, 0.0))
    }

    fn from_rotating(x: &Vector3<C64>, k: f64, t: f64) -> Self {
        let ph = C64::from_polar(1.0, -k * t);
        Self { sm: x[0] * ph, sp: x[1] * ph.conj(), sz: x[2].re, t }
    }

    /// Largest violation of `sp = sm*`, `|sz| ≤ 1` and `|sm|² ≤ (1 − sz²)/4`.
    pub fn physicality_defect(&self) -> f64 {
        let herm = (self.sp - self.sm.conj()).norm();
        let range = (self.sz.abs() - 1.0).max(0.0);
        let purity = (self.sm.norm_sqr() - (1.0 - self.sz * self.sz) / 4.0).max(0.0);
        herm.max(range).max(purity)
    }
}

/// Time derivatives, lab frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochRates {
    pub dsm: C64,
    pub dsp: C64,
    pub dsz: f64,
}

/// The affine generator `(M, c)` in the rotating frame.
fn generator(drive: &DriveParams, params: &SystemParams) -> (Matrix3<C64>, Vector3<C64>) {
    let kappa = (2.0 / params.tau()).sqrt();
    let gamma = 1.0 / params.tau();
    let det = drive.k_drive - params.omega_atom();
    let a = drive.alpha;
    let zero = C64::new(0.0, 0.0);
    let m = Matrix3::new(
        C64::new(-gamma, det),
        zero,
        I * a * kappa,
        zero,
        C64::new(-gamma, -det),
        -I * a.conj() * kappa,
        2.0 * I * kappa * a.conj(),
        -2.0 * I * kappa * a,
        C64::new(-kappa * kappa, 0.0),
    );
    let c = Vector3::new(zero, zero, C64::new(-kappa * kappa, 0.0));
    (m, c)
}

pub fn bloch_rhs(state: &BlochState, drive: &DriveParams, params: &SystemParams) -> BlochRates {
    let kappa = (2.0 / params.tau()).sqrt();
    let om = params.omega_atom();
    let g = 1.0 / params.tau();
    let drive_m = drive.alpha * C64::from_polar(1.0, -drive.k_drive * state.t);
    let dsm = C64::new(-g, -om) * state.sm + I * drive_m * kappa * state.sz;
    let dsp = C64::new(-g, om) * state.sp - I * drive_m.conj() * kappa * state.sz;
    let dsz = (-2.0 * I * kappa * (drive_m * state.sp - drive_m.conj() * state.sm)).re
        - kappa * kappa * (state.sz + 1.0);
    BlochRates { dsm, dsp, dsz }
}

fn check_step(dt: f64, params: &SystemParams) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParams(format!("time step {dt} must be positive")));
    }
    if dt > params.tau() / 20.0 {
        return Err(Error::StepTooLarge(format!(
            "dt = {dt} exceeds tau/20 = {}",
            params.tau() / 20.0
        )));
    }
    Ok(())
}

/// Number of whole steps of size `dt` that cover `span`, tolerating
/// rounding in `span / dt`.
fn step_count(span: f64, dt: f64) -> usize {
    let r = span / dt;
    let n = r.round();
    if (r - n).abs() < 1e-9 * n.max(1.0) {
        n as usize
    } else {
        r.ceil() as usize
    }
}

fn rk4_affine(m: &Matrix3<C64>, c: &Vector3<C64>, x: &Vector3<C64>, h: f64) -> Vector3<C64> {
    let f = |y: &Vector3<C64>| m * y + c;
    let k1 = f(x);
    let k2 = f(&(x + k1 * re(h / 2.0)));
    let k3 = f(&(x + k2 * re(h / 2.0)));
    let k4 = f(&(x + k3 * re(h)));
    x + (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(h / 6.0)
}

/// RK4 trajectory from `initial.t` to `t_end`; the returned sequence starts
/// with `initial`. The last step is shortened to land on `t_end`.
pub fn evolve_bloch(
    initial: &BlochState,
    drive: &DriveParams,
    params: &SystemParams,
    t_end: f64,
    dt: f64,
) -> Result<Vec<BlochState>> {
    check_step(dt, params)?;
    if t_end < initial.t {
        return Err(Error::InvalidWindow(format!(
            "t_end = {t_end} precedes the initial time {}",
            initial.t
        )));
    }
    let (m, c) = generator(drive, params);
    let k = drive.k_drive;
    let steps = step_count(t_end - initial.t, dt);
    let mut x = initial.to_rotating(k);
    let mut out = Vec::with_capacity(steps + 1);
    out.push(*initial);
    for n in 1..=steps {
        let t_prev = initial.t + (n - 1) as f64 * dt;
        let t = if n == steps { t_end } else { initial.t + n as f64 * dt };
        x = rk4_affine(&m, &c, &x, t - t_prev);
        out.push(BlochState::from_rotating(&x, k, t));
    }
    Ok(out)
}

/// Rotating-frame fixed point `(σ̃₋, σ̃₊, σ_z)` of the driven system.
pub fn steady_state_rotating(drive: &DriveParams, params: &SystemParams) -> (C64, C64, f64) {
    let (m, c) = generator(drive, params);
    let x = m.lu().solve(&(-c)).expect("generator is nonsingular for tau > 0");
    (x[0], x[1], x[2].re)
}

/// Lab-frame steady state at time `t`.
pub fn steady_state(drive: &DriveParams, params: &SystemParams, t: f64) -> BlochState {
    let (sm, sp, sz) = steady_state_rotating(drive, params);
    BlochState::from_rotating(&Vector3::new(sm, sp, C64::new(sz, 0.0)), drive.k_drive, t)
}

/// `G⁽¹⁾` samples along one time axis.
///
/// `g1[n] = ⟨a_out†(t′) a_out(ts[n])⟩`; that operator order is what the
/// correlator means regardless of how its arguments are labelled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationTrace {
    pub t_prime: f64,
    pub ts: Vec<f64>,
    pub g1: Vec<C64>,
}

/// `⟨a_out†(x) a_out(y)⟩` from one-time and two-time atomic averages.
fn assemble_g1(drive: &DriveParams, kappa: f64, x: f64, y: f64, sp_x: C64, sm_y: C64, spsm: C64) -> C64 {
    let a = drive.alpha;
    let k = drive.k_drive;
    C64::from_polar(a.norm_sqr(), -k * (y - x))
        + I * a * C64::from_polar(1.0, -k * y) * kappa * sp_x
        - I * a.conj() * C64::from_polar(1.0, k * x) * kappa * sm_y
        + spsm * kappa * kappa
}

fn validate_window(t_prime: f64, ts: &[f64], dt: f64, params: &SystemParams) -> Result<()> {
    check_step(dt, params)?;
    if t_prime < 0.0 {
        return Err(Error::InvalidWindow(format!("t' = {t_prime} is before the drive starts")));
    }
    if let Some(bad) = ts.iter().find(|&&t| !(t >= t_prime)) {
        return Err(Error::InvalidWindow(format!("t = {bad} precedes t' = {t_prime}")));
    }
    if ts.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidWindow("times must be nondecreasing".into()));
    }
    Ok(())
}

/// Propagates a regression vector `y` through the sorted sample times,
/// recording it at each.
fn regress(
    m: &Matrix3<C64>,
    c: &Vector3<C64>,
    mut y: Vector3<C64>,
    t_start: f64,
    ts: &[f64],
    dt: f64,
) -> Vec<Vector3<C64>> {
    let mut t = t_start;
    let mut out = Vec::with_capacity(ts.len());
    for &target in ts {
        let steps = step_count(target - t, dt);
        for n in 1..=steps {
            let next = if n == steps { target } else { t + dt };
            y = rk4_affine(m, c, &y, next - t);
            t = next;
        }
        t = target;
        out.push(y);
    }
    out
}

fn state_at(drive: &DriveParams, params: &SystemParams, t: f64, dt: f64) -> Result<BlochState> {
    Ok(*evolve_bloch(&BlochState::ground(0.0), drive, params, t, dt)?
        .last()
        .expect("trajectory is never empty"))
}

/// `⟨a_out†(t′) a_out(t)⟩` for each `t ≥ t′`, with the drive switched on at
/// time 0 on an atom in its ground state.
///
/// The two-time term `⟨σ₊(t′) σ₋(t)⟩` comes from propagating
/// `(⟨σ₊(t′)σ̃₋(t)⟩, ⟨σ₊(t′)σ̃₊(t)⟩, ⟨σ₊(t′)σ_z(t)⟩)` with the one-time
/// generator, the affine part weighted by `⟨σ₊(t′)⟩`.
pub fn regression_g1(
    drive: &DriveParams,
    params: &SystemParams,
    t_prime: f64,
    ts: &[f64],
    dt: f64,
) -> Result<CorrelationTrace> {
    validate_window(t_prime, ts, dt, params)?;
    let (m, c) = generator(drive, params);
    let kappa = (2.0 / params.tau()).sqrt();
    let k = drive.k_drive;
    let s0 = state_at(drive, params, t_prime, dt)?;

    let y0 = Vector3::new(
        C64::from_polar((s0.sz + 1.0) / 2.0, k * t_prime),
        C64::new(0.0, 0.0),
        -s0.sp,
    );
    let two_time = regress(&m, &(c * s0.sp), y0, t_prime, ts, dt);
    let one_time = regress(&m, &c, s0.to_rotating(k), t_prime, ts, dt);

    let g1 = ts
        .iter()
        .zip(two_time.iter().zip(&one_time))
        .map(|(&t, (y, x))| {
            let spsm = y[0] * C64::from_polar(1.0, -k * t);
            let sm_t = x[0] * C64::from_polar(1.0, -k * t);
            assemble_g1(drive, kappa, t_prime, t, s0.sp, sm_t, spsm)
        })
        .collect();
    Ok(CorrelationTrace { t_prime, ts: ts.to_vec(), g1 })
}

/// `⟨a_out†(t) a_out(t′)⟩` for each `t ≥ t′`: the opposite operator order,
/// built from `(⟨σ̃₋(t)σ₋(t′)⟩, ⟨σ̃₊(t)σ₋(t′)⟩, ⟨σ_z(t)σ₋(t′)⟩)`.
pub fn regression_g1_reversed(
    drive: &DriveParams,
    params: &SystemParams,
    t_prime: f64,
    ts: &[f64],
    dt: f64,
) -> Result<CorrelationTrace> {
    validate_window(t_prime, ts, dt, params)?;
    let (m, c) = generator(drive, params);
    let kappa = (2.0 / params.tau()).sqrt();
    let k = drive.k_drive;
    let s0 = state_at(drive, params, t_prime, dt)?;

    let y0 = Vector3::new(
        C64::new(0.0, 0.0),
        C64::from_polar((s0.sz + 1.0) / 2.0, -k * t_prime),
        -s0.sm,
    );
    let two_time = regress(&m, &(c * s0.sm), y0, t_prime, ts, dt);
    let one_time = regress(&m, &c, s0.to_rotating(k), t_prime, ts, dt);

    let g1 = ts
        .iter()
        .zip(two_time.iter().zip(&one_time))
        .map(|(&t, (y, x))| {
            let spsm = y[1] * C64::from_polar(1.0, k * t);
            let sp_t = x[1] * C64::from_polar(1.0, k * t);
            assemble_g1(drive, kappa, t, t_prime, sp_t, s0.sm, spsm)
        })
        .collect();
    Ok(CorrelationTrace { t_prime, ts: ts.to_vec(), g1 })
}

/// 2×2 density matrix in the rotating frame, basis `(g, e)`.
pub type DensityMatrix = Matrix2<C64>;

pub fn ground_density() -> DensityMatrix {
    DensityMatrix::new(C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
}

pub fn excited_density() -> DensityMatrix {
    DensityMatrix::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0))
}

/// `(⟨σ̃₋⟩, ⟨σ̃₊⟩, ⟨σ_z⟩)` of a rotating-frame density matrix.
pub fn density_expectations(rho: &DensityMatrix) -> (C64, C64, f64) {
    // ⟨σ₋⟩ = Tr(ρ |g⟩⟨e|) = ρ_eg
    (rho[(1, 0)], rho[(0, 1)], (rho[(1, 1)] - rho[(0, 0)]).re)
}

fn sigma_minus() -> DensityMatrix {
    DensityMatrix::new(C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0))
}

/// Master-equation generator for `H̃ = (Ω−k)σ₊σ₋ + g σ₊ + g* σ₋` and
/// collapse operator `√Γ σ₋`, with `g = α√(2/τ)`, `Γ = 2/τ`.
///
/// Linear in its argument, so it also propagates non-density operators
/// such as `ρσ₊`.
pub fn lindblad_rhs(rho: &DensityMatrix, drive: &DriveParams, params: &SystemParams) -> DensityMatrix {
    let gd = drive.alpha * (2.0 / params.tau()).sqrt();
    let rate = 2.0 / params.tau();
    let sm = sigma_minus();
    let sp = sm.adjoint();
    let h = sp * sm * C64::new(params.omega_atom() - drive.k_drive, 0.0) + sp * gd + sm * gd.conj();
    let spsm = sp * sm;
    let comm = h * rho - rho * h;
    -comm * I + (sm * rho * sp - (spsm * rho + rho * spsm) * re(0.5)) * re(rate)
}

fn check_density(rho: &DensityMatrix) -> Result<()> {
    let tol = 1e-10;
    if rho.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(Error::NonPhysicalState("non-finite entry".into()));
    }
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > tol {
        return Err(Error::NonPhysicalState(format!("not Hermitian (defect {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - 1.0).norm() > tol {
        return Err(Error::NonPhysicalState(format!("trace {tr} differs from 1")));
    }
    let (a, b) = (rho[(0, 0)].re, rho[(1, 1)].re);
    let det = a * b - rho[(0, 1)].norm_sqr();
    if a < -tol || b < -tol || det < -tol {
        return Err(Error::NonPhysicalState("not positive semidefinite".into()));
    }
    Ok(())
}

/// One RK4 step of the master equation after validating `rho`.
pub fn lindblad_oracle_step(
    rho: &DensityMatrix,
    drive: &DriveParams,
    params: &SystemParams,
    dt: f64,
) -> Result<DensityMatrix> {
    check_step(dt, params)?;
    check_density(rho)?;
    Ok(lindblad_rk4(rho, drive, params, dt))
}

/// RK4 step without validation.
pub fn lindblad_rk4(rho: &DensityMatrix, drive: &DriveParams, params: &SystemParams, h: f64) -> DensityMatrix {
    let f = |r: &DensityMatrix| lindblad_rhs(r, drive, params);
    let k1 = f(rho);
    let k2 = f(&(rho + k1 * C64::new(h / 2.0, 0.0)));
    let k3 = f(&(rho + k2 * C64::new(h / 2.0, 0.0)));
    let k4 = f(&(rho + k3 * C64::new(h, 0.0)));
    rho + (k1 + k2 * re(2.0) + k3 * re(2.0) + k4) * re(h / 6.0)
}

/// Master-equation trajectory sampled every step, lab-frame expectations.
pub fn evolve_lindblad(
    rho0: &DensityMatrix,
    t0: f64,
    drive: &DriveParams,
    params: &SystemParams,
    t_end: f64,
    dt: f64,
) -> Result<Vec<BlochState>> {
    check_step(dt, params)?;
    check_density(rho0)?;
    let steps = step_count(t_end - t0, dt);
    let k = drive.k_drive;
    let sample = |rho: &DensityMatrix, t: f64| {
        let (sm, sp, sz) = density_expectations(rho);
        BlochState::from_rotating(&Vector3::new(sm, sp, C64::new(sz, 0.0)), k, t)
    };
    let mut rho = *rho0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(sample(&rho, t0));
    for n in 1..=steps {
        let t_prev = t0 + (n - 1) as f64 * dt;
        let t = if n == steps { t_end } else { t0 + n as f64 * dt };
        rho = lindblad_rk4(&rho, drive, params, t - t_prev);
        out.push(sample(&rho, t));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit() -> SystemParams {
        SystemParams::chiral(0.0, 1.0).unwrap()
    }

    fn drive(a: C64, k: f64) -> DriveParams {
        DriveParams::new(a, k).unwrap()
    }

    #[test]
    fn ground_state_is_fixed_in_vacuum() {
        let p = SystemParams::chiral(0.7, 1.3).unwrap();
        let r = bloch_rhs(&BlochState::ground(2.0), &drive(C64::new(0.0, 0.0), 0.3), &p);
        assert_eq!(r.dsm, C64::new(0.0, 0.0));
        assert_eq!(r.dsp, C64::new(0.0, 0.0));
        assert_eq!(r.dsz, 0.0);
    }

    #[test]
    fn free_coherence_decays_at_one_over_tau() {
        let p = SystemParams::chiral(0.7, 1.3).unwrap();
        let s0 = C64::new(0.2, -0.1);
        let st = BlochState { sm: s0, sp: s0.conj(), sz: 0.1, t: 0.0 };
        let r = bloch_rhs(&st, &drive(C64::new(0.0, 0.0), 0.0), &p);
        assert!((r.dsm - C64::new(-1.0 / 1.3, -0.7) * s0).norm() < 1e-15);
    }

    #[test]
    fn rotating_generator_matches_lab_rhs() {
        let p = SystemParams::chiral(0.4, 0.8).unwrap();
        let d = drive(C64::new(0.3, 0.2), 1.1);
        let st = BlochState { sm: C64::new(0.1, 0.2), sp: C64::new(0.1, -0.2), sz: -0.3, t: 0.9 };
        let (m, c) = generator(&d, &p);
        let x = st.to_rotating(d.k_drive);
        let dx = m * x + c;
        let lab = bloch_rhs(&st, &d, &p);
        // d(σ₋) = e^{−ikt}(dσ̃₋ − ik σ̃₋)
        let ph = C64::from_polar(1.0, -d.k_drive * st.t);
        let dsm = (dx[0] - I * d.k_drive * x[0]) * ph;
        assert!((dsm - lab.dsm).norm() < 1e-14);
        assert!((dx[2].re - lab.dsz).abs() < 1e-14);
    }

    #[test]
    fn spontaneous_emission() {
        let p = SystemParams::chiral(0.0, 1.7).unwrap();
        let traj = evolve_bloch(&BlochState::excited(0.0), &drive(C64::new(0.0, 0.0), 0.0), &p, 10.0, 1.7 / 100.0).unwrap();
        for s in &traj {
            let exact = 2.0 * (-2.0 * s.t / 1.7).exp() - 1.0;
            assert!((s.sz - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn step_guard() {
        let p = unit();
        let d = drive(C64::new(0.1, 0.0), 0.0);
        assert!(matches!(evolve_bloch(&BlochState::ground(0.0), &d, &p, 1.0, 0.06), Err(Error::StepTooLarge(_))));
        assert!(evolve_bloch(&BlochState::ground(0.0), &d, &p, 1.0, 0.05).is_ok());
        assert!(matches!(lindblad_oracle_step(&ground_density(), &d, &p, 0.1), Err(Error::StepTooLarge(_))));
    }

    /// Textbook excited-state population for a driven two-level atom with
    /// radiative damping, `|g|²/(Δ² + Γ²/4 + 2|g|²)`.
    fn textbook_population(d: &DriveParams, p: &SystemParams) -> f64 {
        let g2 = d.alpha.norm_sqr() * 2.0 / p.tau();
        let det = d.k_drive - p.omega_atom();
        let gam = 2.0 / p.tau();
        g2 / (det * det + gam * gam / 4.0 + 2.0 * g2)
    }

    #[test]
    fn steady_state_matches_closed_form_and_long_time_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let tau = rng.gen_range(0.5..2.0);
            let p = SystemParams::chiral(rng.gen_range(-1.0..1.0), tau).unwrap();
            let amp: f64 = rng.gen_range(0.0..(10.0f64 / tau).sqrt());
            let d = drive(C64::from_polar(amp, rng.gen_range(0.0..6.28)), rng.gen_range(-3.0..3.0));
            let ss = steady_state(&d, &p, 0.0);
            assert!((ss.sz - (2.0 * textbook_population(&d, &p) - 1.0)).abs() < 1e-12);

            let t_end = 50.0 * tau;
            let dt = tau / 100.0;
            let bloch = evolve_bloch(&BlochState::ground(0.0), &d, &p, t_end, dt).unwrap();
            let lind = evolve_lindblad(&ground_density(), 0.0, &d, &p, t_end, dt).unwrap();
            assert!((bloch.last().unwrap().sz - ss.sz).abs() < 1e-6);
            assert!((lind.last().unwrap().sz - ss.sz).abs() < 1e-8);
        }
    }

    #[test]
    fn weak_drive_response_is_linear() {
        let p = SystemParams::chiral(0.2, 1.0).unwrap();
        let k = 0.9;
        let kappa = 2f64.sqrt();
        let linear = I * kappa / C64::new(-1.0, k - 0.2);
        let mut prev = f64::INFINITY;
        for j in 1..6 {
            let a = 10f64.powi(-j);
            let (sm, _, _) = steady_state_rotating(&drive(C64::new(a, 0.0), k), &p);
            let err = (sm / a - linear).norm();
            assert!(err <= 10.0 * a * a, "{a} {err}");
            assert!(err < prev);
            prev = err;
        }
        // that limit is α s_k
        assert!((linear - crate::chiral::s_k(k, &p)).norm() < 1e-15);
    }

    #[test]
    fn bloch_and_master_equation_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let tau = rng.gen_range(0.5..2.0);
            let p = SystemParams::chiral(rng.gen_range(-1.0..1.0), tau).unwrap();
            // up to |α|²τ = 4, sixteen times the saturation intensity
            let amp = (rng.gen_range(0.0..4.0) / tau).sqrt();
            let d = drive(C64::from_polar(amp, rng.gen_range(0.0..6.3)), rng.gen_range(-3.0..3.0));
            let dt = tau / 100.0;
            let a = evolve_bloch(&BlochState::ground(0.0), &d, &p, 50.0 * tau, dt).unwrap();
            let b = evolve_lindblad(&ground_density(), 0.0, &d, &p, 50.0 * tau, dt).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x.sm - y.sm).norm() < 1e-7);
                assert!((x.sz - y.sz).abs() < 1e-7);
                assert!(x.physicality_defect() < 1e-9);
            }
        }
    }

    #[test]
    fn master_equation_preserves_trace() {
        let p = unit();
        let d = drive(C64::new(0.8, 0.3), 0.4);
        let mut rho = ground_density();
        for _ in 0..100_000 {
            rho = lindblad_oracle_step(&rho, &d, &p, 0.01).unwrap();
        }
        assert!((rho.trace() - 1.0).norm() < 1e-9);
    }

    #[test]
    fn master_equation_fixed_point_and_rejections() {
        let p = unit();
        let d = drive(C64::new(0.0, 0.0), 0.0);
        let rho = lindblad_oracle_step(&ground_density(), &d, &p, 0.01).unwrap();
        assert_eq!(rho, ground_density());

        let mut bad = ground_density();
        bad[(0, 0)] = C64::new(2.0, 0.0);
        assert!(matches!(lindblad_oracle_step(&bad, &d, &p, 0.01), Err(Error::NonPhysicalState(_))));
        let mut bad = (ground_density() + excited_density()) * re(0.5);
        bad[(0, 1)] = C64::new(0.0, 0.6);
        bad[(1, 0)] = C64::new(0.0, -0.6);
        assert!(matches!(lindblad_oracle_step(&bad, &d, &p, 0.01), Err(Error::NonPhysicalState(_))));
    }

    #[test]
    fn undriven_correlation_vanishes() {
        let p = unit();
        let d = drive(C64::new(0.0, 0.0), 0.5);
        let ts: Vec<f64> = (0..50).map(|n| 2.0 + 0.1 * n as f64).collect();
        let tr = regression_g1(&d, &p, 2.0, &ts, 0.01).unwrap();
        assert!(tr.g1.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn window_is_validated() {
        let p = unit();
        let d = drive(C64::new(0.3, 0.0), 0.0);
        assert!(matches!(regression_g1(&d, &p, 2.0, &[1.9, 2.5], 0.01), Err(Error::InvalidWindow(_))));
    }

    /// Equal-time output flux against the master equation:
    /// `⟨a†a⟩ = |α|² + iακ⟨σ̃₊⟩ − iα*κ⟨σ̃₋⟩ + κ²ρ_ee`.
    #[test]
    fn equal_time_g1_matches_master_equation_flux() {
        let p = SystemParams::chiral(0.1, 1.2).unwrap();
        let d = drive(C64::new(0.5, -0.4), 0.6);
        let dt = 0.012;
        for &tp in &[0.0, 0.6, 3.0, 9.0] {
            let tr = regression_g1(&d, &p, tp, &[tp], dt).unwrap();
            let g = tr.g1[0];
            assert!(g.im.abs() < 1e-12 && g.re >= -1e-9);
            let rho = evolve_lindblad_density(&d, &p, tp, dt);
            let (sm, sp, _) = density_expectations(&rho);
            let kappa = (2.0 / p.tau()).sqrt();
            let a = d.alpha;
            let flux = a.norm_sqr() + (I * a * kappa * sp - I * a.conj() * kappa * sm).re + kappa * kappa * rho[(1, 1)].re;
            assert!((g.re - flux).abs() < 1e-7, "{tp}: {} vs {flux}", g.re);
        }
    }

    fn evolve_lindblad_density(d: &DriveParams, p: &SystemParams, t: f64, dt: f64) -> DensityMatrix {
        let mut rho = ground_density();
        let steps = step_count(t, dt);
        for n in 1..=steps {
            let h = if n == steps { t - (n - 1) as f64 * dt } else { dt };
            rho = lindblad_rk4(&rho, d, p, h);
        }
        rho
    }

    /// Two-time correlator from the master equation: propagate `ρ(t′)σ₊`
    /// and read `Tr(σ₋ ·)`, compared with the regression vector.
    #[test]
    fn two_time_term_matches_master_equation() {
        let p = SystemParams::chiral(-0.2, 0.9).unwrap();
        let d = drive(C64::new(0.7, 0.1), 0.3);
        let dt = 0.009;
        let tp = 2.7;
        let ts: Vec<f64> = (0..=300).map(|n| tp + n as f64 * dt).collect();
        let tr = regression_g1(&d, &p, tp, &ts, dt).unwrap();
        let rho = evolve_lindblad_density(&d, &p, tp, dt);
        let sm = sigma_minus();
        let mut x = rho * sm.adjoint();
        let kappa = (2.0 / p.tau()).sqrt();
        let k = d.k_drive;
        let s0 = density_expectations(&rho);
        let sp_tp = s0.1 * C64::from_polar(1.0, k * tp);
        for (n, &t) in ts.iter().enumerate() {
            if n > 0 {
                x = lindblad_rk4(&x, &d, &p, dt);
            }
            // rotating-frame ρ makes Tr(σ₋ ρσ₊) carry e^{ik(t′−t)}
            let spsm = (sm * x).trace() * C64::from_polar(1.0, k * (tp - t));
            let rho_t = evolve_lindblad_density(&d, &p, t, dt);
            let sm_t = density_expectations(&rho_t).0 * C64::from_polar(1.0, -k * t);
            let g = assemble_g1(&d, kappa, tp, t, sp_tp, sm_t, spsm);
            assert!((tr.g1[n] - g).norm() < 1e-8, "{t}");
            if n > 40 {
                break;
            }
        }
    }

    #[test]
    fn g1_is_hermitian() {
        let p = SystemParams::chiral(0.3, 1.1).unwrap();
        let d = drive(C64::new(0.9, 0.2), -0.4);
        let dt = 0.011;
        let tp = 1.1;
        let ts: Vec<f64> = (0..=400).map(|n| tp + n as f64 * dt).collect();
        let fwd = regression_g1(&d, &p, tp, &ts, dt).unwrap();
        let rev = regression_g1_reversed(&d, &p, tp, &ts, dt).unwrap();
        for (a, b) in fwd.g1.iter().zip(&rev.g1) {
            assert!((a - b.conj()).norm() < 1e-8);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn trajectories_stay_physical(re in -2.0..2.0f64, im in -2.0..2.0f64, k in -3.0..3.0f64) {
            let p = unit();
            let traj = evolve_bloch(&BlochState::ground(0.0), &drive(C64::new(re, im), k), &p, 10.0, 0.01).unwrap();
            for s in &traj {
                prop_assert!(s.physicality_defect() < 1e-9);
            }
        }
    }
}
