//! Bidirectional waveguide via the even/odd decomposition.
//!
//! With `e = (R + L)/√2` and `o = (R − L)/√2` (left movers indexed by their
//! energy), only the even field couples to the atom, with `τ' = τ/2`; the
//! odd field is free. Every amplitude here uses the even-sector `t` and `s`
//! functions evaluated at `τ'`.
//!
//! Left-moving photons are stored on the same positive-detuning axis as
//! right movers; the direction is carried by which channel holds them.

use serde::Serialize;

use crate::chiral::{self, bound_part, check_edge_mass};
use crate::error::Result;
use crate::model::{OnePhotonWavepacket, PairAmplitude, SystemParams, TwoPhotonAmplitude, C64};

/// One-photon reflection `(t'_k − 1)/2`.
pub fn r_bar(k: f64, params: &SystemParams) -> C64 {
    (chiral::t_k(k, &params.even_sector()) - 1.0) * 0.5
}

/// One-photon transmission `(t'_k + 1)/2`.
pub fn t_bar(k: f64, params: &SystemParams) -> C64 {
    (chiral::t_k(k, &params.even_sector()) + 1.0) * 0.5
}

/// Splits a right-moving packet into `(transmitted, reflected)`.
pub fn scatter_one_photon_two_mode(
    packet: &OnePhotonWavepacket,
    params: &SystemParams,
) -> (OnePhotonWavepacket, OnePhotonWavepacket) {
    (
        packet.map_with(|k| t_bar(k, params)),
        packet.map_with(|k| r_bar(k, params)),
    )
}

/// Output of two right-moving photons, split by direction.
///
/// `rr` and `ll` follow the symmetric `1/√2` convention; `rl(x, y)` is the
/// amplitude for a right mover at `x` and a left mover at `y`, normalized as
/// `∬|rl|² = P(one each way)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalAmplitudes {
    pub rr: TwoPhotonAmplitude,
    pub rl: PairAmplitude,
    pub ll: TwoPhotonAmplitude,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelNorms {
    pub rr: f64,
    pub rl: f64,
    pub ll: f64,
}

impl ChannelNorms {
    pub fn total(&self) -> f64 {
        self.rr + self.rl + self.ll
    }

    pub fn max_abs_diff(&self, other: &ChannelNorms) -> f64 {
        (self.rr - other.rr)
            .abs()
            .max((self.rl - other.rl).abs())
            .max((self.ll - other.ll).abs())
    }
}

impl DirectionalAmplitudes {
    pub fn norms(&self) -> ChannelNorms {
        ChannelNorms {
            rr: self.rr.norm2(),
            rl: self.rl.norm2(),
            ll: self.ll.norm2(),
        }
    }

    pub fn total_norm2(&self) -> f64 {
        self.norms().total()
    }
}

/// Scatters two right-moving photons.
///
/// Expanding the input in even/odd fields, scattering the `ee` part with the
/// chiral two-photon transform at `τ'`, the `eo` part with `t'`, and
/// projecting back gives
///
/// ```text
/// rr(x,y) = t̄ₓ t̄ᵧ f(x,y) + b(x,y)/4
/// ll(x,y) = r̄ₓ r̄ᵧ f(x,y) + b(x,y)/4
/// rl(x,y) = √2 t̄ₓ r̄ᵧ f(x,y) + b(x,y)/(2√2)
/// ```
///
/// where `b` is the even-sector bound part. In S-matrix language each
/// channel receives a quarter of the bound kernel; the `√2` factors in `rl`
/// come from its photons being distinguishable.
pub fn scatter_two_photon_two_mode(
    f: &TwoPhotonAmplitude,
    params: &SystemParams,
) -> Result<DirectionalAmplitudes> {
    check_edge_mass(f)?;
    let even = params.even_sector();
    let grid = *f.grid();
    let n = grid.len();
    let b = bound_part(f, &even);
    let tb: Vec<C64> = grid.points().map(|k| t_bar(k, params)).collect();
    let rb: Vec<C64> = grid.points().map(|k| r_bar(k, params)).collect();

    let sqrt2 = std::f64::consts::SQRT_2;
    let mut rr = Vec::with_capacity(n * n);
    let mut rl = Vec::with_capacity(n * n);
    let mut ll = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let fij = f.get(i, j);
            let bij = b[i * n + j];
            rr.push(tb[i] * tb[j] * fij + bij * 0.25);
            ll.push(rb[i] * rb[j] * fij + bij * 0.25);
            rl.push(tb[i] * rb[j] * fij * sqrt2 + bij / (2.0 * sqrt2));
        }
    }
    Ok(DirectionalAmplitudes {
        rr: TwoPhotonAmplitude::new(grid, rr)?,
        rl: PairAmplitude::new(grid, rl)?,
        ll: TwoPhotonAmplitude::new(grid, ll)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_gaussian_packet, FrequencyGrid};
    use std::f64::consts::PI;

    fn unit() -> SystemParams {
        SystemParams::two_mode(0.0, 1.0).unwrap()
    }

    #[test]
    fn resonance_reflects_fully() {
        let p = unit();
        assert_eq!(r_bar(0.0, &p), C64::new(-1.0, 0.0));
        assert_eq!(t_bar(0.0, &p).norm(), 0.0);
    }

    #[test]
    fn half_width_splits_evenly() {
        let p = SystemParams::two_mode(0.3, 1.0).unwrap();
        let k = 0.3 + 1.0 / p.even_sector().tau();
        let r = r_bar(k, &p);
        assert!((r - C64::new(-0.5, -0.5)).norm() < 1e-15);
        assert!((r.norm_sqr() - 0.5).abs() < 1e-15);
        assert!((t_bar(k, &p).norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn flux_and_coefficient_relations() {
        let p = SystemParams::two_mode(-0.2, 1.7).unwrap();
        for i in 0..10_000 {
            let k = -50.0 + 0.01 * i as f64;
            let (r, t) = (r_bar(k, &p), t_bar(k, &p));
            assert!((r.norm_sqr() + t.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((t - r - 1.0).norm() < 1e-15);
            assert!((t + r - chiral::t_k(k, &p.even_sector())).norm() < 1e-15);
        }
    }

    #[test]
    fn far_detuning_is_transparent() {
        let p = unit();
        let mut last_r = f64::INFINITY;
        for j in 0..16 {
            let d = 2f64.powi(j);
            let r = r_bar(d, &p).norm();
            assert!(r < last_r);
            last_r = r;
        }
        assert!(last_r < 1e-4);
        assert!((t_bar(1e5, &p) - 1.0).norm() < 1e-4);
    }

    #[test]
    fn one_photon_channel_limits() {
        let p = unit();
        let g = FrequencyGrid::from_range(-1.0, 1.0, 2001).unwrap();
        let f = make_gaussian_packet(g, 0.0, 0.01).unwrap();
        let (t, r) = scatter_one_photon_two_mode(&f, &p);
        assert!(r.norm2() >= 0.999);
        assert!(t.norm2() <= 1e-3);
        assert!((r.norm2() + t.norm2() - 1.0).abs() < 1e-12);

        let g = FrequencyGrid::from_range(90.0, 110.0, 2001).unwrap();
        let f = make_gaussian_packet(g, 100.0, 1.0).unwrap();
        let (t, r) = scatter_one_photon_two_mode(&f, &p);
        assert!(t.norm2() >= 0.999);
        assert!((r.norm2() + t.norm2() - 1.0).abs() < 1e-12);
    }

    fn pair(c1: f64, c2: f64, width: f64, g: FrequencyGrid) -> TwoPhotonAmplitude {
        let a = make_gaussian_packet(g, c1, width).unwrap();
        let b = make_gaussian_packet(g, c2, width).unwrap();
        TwoPhotonAmplitude::product(&a, &b).unwrap()
    }

    #[test]
    fn far_detuned_pair_passes_through() {
        let p = unit();
        let g = FrequencyGrid::from_range(-110.0, 110.0, 881).unwrap();
        let f = pair(-100.0, 100.0, 1.0, g);
        let out = scatter_two_photon_two_mode(&f, &p).unwrap();
        let norms = out.norms();
        assert!(norms.rl <= 1e-3 && norms.ll <= 1e-4, "{norms:?}");
        assert!(norms.rr >= 0.999);
    }

    #[test]
    fn resonant_pair_conserves_total_norm() {
        let p = unit();
        let g = FrequencyGrid::from_range(-12.0, 12.0, 601).unwrap();
        let f = pair(0.0, 0.0, 1.0, g);
        let out = scatter_two_photon_two_mode(&f, &p).unwrap();
        assert!((out.total_norm2() - 1.0).abs() < 1e-2, "{:?}", out.norms());
    }

    /// Even-sector result recovered from the channels reproduces the chiral
    /// transform at `τ' = τ/2`: `g = 2(rr + ll) − f` and
    /// `g = f + √2 (rl + rlᵀ)`.
    #[test]
    fn channels_reconstruct_even_sector() {
        let p = SystemParams::two_mode(0.2, 1.3).unwrap();
        let g = FrequencyGrid::from_range(-10.0, 10.0, 401).unwrap();
        let f = pair(0.0, 0.5, 0.8, g);
        let out = scatter_two_photon_two_mode(&f, &p).unwrap();
        let (chiral_out, _) = chiral::scatter_two_photon(&f, &p.even_sector()).unwrap();
        let n = g.len();
        for i in 0..n {
            for j in 0..n {
                let target = chiral_out.get(i, j);
                let a = (out.rr.get(i, j) + out.ll.get(i, j)) * 2.0 - f.get(i, j);
                let b = f.get(i, j)
                    + (out.rl.get(i, j) + out.rl.get(j, i)) * std::f64::consts::SQRT_2;
                assert!((a - target).norm() < 1e-12);
                assert!((b - target).norm() < 1e-12);
            }
        }
    }

    /// Right/left amplitude written directly from the S-matrix element
    /// `t̄_{k₁} r̄_{k₂} δδ + r̄_{k₁} t̄_{k₂} δδ + (B/4) δ(E)` with
    /// `B = (i/π) √(2/τ') s_{p₁} s_{p₂} (s_{k₁} + s_{k₂})`, integrated against
    /// the `1/√2`-normalized input.
    #[test]
    fn right_left_channel_matches_smatrix_element() {
        let p = SystemParams::two_mode(0.1, 0.9).unwrap();
        let tp = p.tau() / 2.0;
        let s = |k: f64| (2.0 / tp).sqrt() / C64::new(k - 0.1, 1.0 / tp);
        let g = FrequencyGrid::from_range(-8.0, 8.0, 321).unwrap();
        let f = pair(-0.3, 0.4, 0.7, g);
        let out = scatter_two_photon_two_mode(&f, &p).unwrap();
        let dw = g.step();
        let n = g.len();
        let probes = [(40, 200), (160, 160), (170, 150), (100, 230), (230, 100), (155, 171), (10, 300), (161, 162), (120, 140), (180, 181)];
        for &(i, j) in &probes {
            let (p1, p2) = (g.point(i), g.point(j));
            let direct = (t_bar(p1, &p) * r_bar(p2, &p) * f.get(i, j)
                + r_bar(p2, &p) * t_bar(p1, &p) * f.get(j, i))
                / std::f64::consts::SQRT_2;
            let mut integral = C64::new(0.0, 0.0);
            for m in 0..n {
                let e = i + j;
                if e < m || e - m >= n {
                    continue;
                }
                let (k1, k2) = (g.point(m), g.point(e - m));
                let big_b = C64::new(0.0, (2.0 / tp).sqrt() / PI) * s(p1) * s(p2) * (s(k1) + s(k2));
                integral += big_b * f.get(m, e - m);
            }
            let bound = integral * dw / (4.0 * std::f64::consts::SQRT_2);
            let expected = direct + bound;
            assert!((out.rl.get(i, j) - expected).norm() < 1e-12, "{i},{j}");
        }
    }
}
