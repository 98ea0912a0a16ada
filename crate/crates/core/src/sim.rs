// Copyright 2026 The esw-core Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! One-dimensional double-slit realization of the four-mode model.
//!
//! The slit plane is a uniform grid. Each slit carries two orthonormal
//! modes, Hermite-Gauss orders 0 and 1 cut off by the slit aperture, so the
//! abstract basis `ψ₁…ψ₄` becomes four grid wave packets. Far-field
//! (Fraunhofer) propagation is a unitary DFT with 4× zero padding.
//!
//! A composite state over `{ψ-modes} × {ancilla}` is laid out like the
//! abstract model: mode index major, ancilla index minor, ancilla index
//! 0 ↔ `|0⟩`. The screen intensity is the sum over ancilla basis states of
//! the propagated spatial amplitude conditioned on that ancilla state.
//!
//! Screen bins are uniform over a central window; the first and last bins
//! extend to the ends of the computed screen so that every particle lands in
//! some bin and distributions sum to one.
//!
//! All lengths are dimensionless.

use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{Ket, Scalar};
use crate::model::{ancilla_projector, embed_ancilla, ANCILLA_DIM};

/// Number of slit modes in the physical realization.
pub const N_MODES: usize = 4;
/// Zero-padding factor applied before the far-field transform.
pub const PADDING: usize = 4;
/// Central fraction of bins used by [`fringe_visibility`] by default.
pub const DEFAULT_VISIBILITY_WINDOW: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("invalid slit geometry: {0}")]
    Geometry(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("state has dimension {got}, expected {expected}")]
    StateDimension { got: usize, expected: usize },
    #[error("slit mode {0} vanished during orthonormalization")]
    DegenerateMode(usize),
}

pub type Result<T> = std::result::Result<T, SimError>;

/// Uniformly spaced sample positions `x_j = (j - origin) * spacing`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub n_points: usize,
    pub spacing: f64,
    pub origin: usize,
}

impl Axis {
    #[inline]
    pub fn position(&self, j: usize) -> f64 {
        (j as f64 - self.origin as f64) * self.spacing
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.position(j)).collect()
    }
}

/// Slit-plane sampling window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
    extent: f64,
}

impl GridSpec {
    pub fn new(n_points: usize, extent: f64) -> Result<Self> {
        if n_points < 256 || !n_points.is_power_of_two() {
            return Err(SimError::Grid(format!(
                "n_points must be a power of two >= 256, got {}",
                n_points
            )));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(SimError::Grid(format!(
                "extent must be positive, got {}",
                extent
            )));
        }
        Ok(Self { n_points, extent })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn spacing(&self) -> f64 {
        self.extent / self.n_points as f64
    }

    /// Slit-plane axis, centred so that `x = 0` is the sample `n_points / 2`.
    pub fn axis(&self) -> Axis {
        Axis {
            n_points: self.n_points,
            spacing: self.spacing(),
            origin: self.n_points / 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slit {
    /// Centred at `-slit_separation / 2`; carries `ψ₁`, `ψ₂`.
    One,
    /// Centred at `+slit_separation / 2`; carries `ψ₃`, `ψ₄`.
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitGeometry {
    slit_separation: f64,
    slit_width: f64,
    mode_waist: f64,
}

impl SlitGeometry {
    pub fn new(slit_separation: f64, slit_width: f64, mode_waist: f64) -> Result<Self> {
        for (name, v) in [
            ("slit_separation", slit_separation),
            ("slit_width", slit_width),
            ("mode_waist", mode_waist),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::Geometry(format!(
                    "{} must be positive, got {}",
                    name, v
                )));
            }
        }
        if slit_width >= slit_separation {
            return Err(SimError::Geometry(format!(
                "slit_width {} must be below slit_separation {}",
                slit_width, slit_separation
            )));
        }
        if mode_waist > slit_width / 2.0 {
            return Err(SimError::Geometry(format!(
                "mode_waist {} exceeds half the slit width {}",
                mode_waist, slit_width
            )));
        }
        Ok(Self {
            slit_separation,
            slit_width,
            mode_waist,
        })
    }

    pub fn slit_separation(&self) -> f64 {
        self.slit_separation
    }

    pub fn slit_width(&self) -> f64 {
        self.slit_width
    }

    pub fn mode_waist(&self) -> f64 {
        self.mode_waist
    }

    pub fn center(&self, slit: Slit) -> f64 {
        match slit {
            Slit::One => -self.slit_separation / 2.0,
            Slit::Two => self.slit_separation / 2.0,
        }
    }

    /// Whether `x` lies in the aperture of `slit` (edges included).
    pub fn in_aperture(&self, slit: Slit, x: f64) -> bool {
        (x - self.center(slit)).abs() <= self.slit_width / 2.0 * (1.0 + 1e-12)
    }
}

/// Complex amplitudes sampled on an [`Axis`].
#[derive(Debug, Clone, PartialEq)]
pub struct WavePacket {
    pub axis: Axis,
    pub amp: Vec<Complex64>,
}

impl WavePacket {
    pub fn new(axis: Axis, amp: Vec<Complex64>) -> Result<Self> {
        if amp.len() != axis.n_points {
            return Err(SimError::Parameter(format!(
                "{} amplitudes on an axis of {} points",
                amp.len(),
                axis.n_points
            )));
        }
        Ok(Self { axis, amp })
    }

    /// Unit-norm Gaussian `exp(-(x - center)² / waist²)`.
    pub fn gaussian(grid: &GridSpec, center: f64, waist: f64) -> Self {
        let axis = grid.axis();
        let amp = (0..axis.n_points)
            .map(|j| {
                let u = (axis.position(j) - center) / waist;
                Complex64::new((-u * u).exp(), 0.0)
            })
            .collect();
        let mut packet = Self { axis, amp };
        packet.normalize();
        packet
    }

    /// Discrete L² norm `(Σ |a_j|²)^½`.
    pub fn norm(&self) -> f64 {
        self.amp.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &WavePacket) -> Complex64 {
        self.amp
            .iter()
            .zip(&other.amp)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn normalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amp {
                *a /= n;
            }
        }
    }

    /// `Σ_k c_k · packets[k]` on a shared axis.
    pub fn superpose(packets: &[&WavePacket], coeffs: &[Complex64]) -> WavePacket {
        let axis = packets[0].axis;
        let mut amp = vec![Complex64::new(0.0, 0.0); axis.n_points];
        for (p, &c) in packets.iter().zip(coeffs) {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (a, b) in amp.iter_mut().zip(&p.amp) {
                *a += c * b;
            }
        }
        WavePacket { axis, amp }
    }

    /// `|a_j|²` per sample.
    pub fn intensity(&self) -> Vec<f64> {
        self.amp.iter().map(Complex64::norm_sqr).collect()
    }
}

/// Indicator of a slit aperture applied to a packet.
pub fn apply_aperture(geom: &SlitGeometry, slit: Slit, psi: &WavePacket) -> WavePacket {
    let amp = psi
        .amp
        .iter()
        .enumerate()
        .map(|(j, &a)| {
            if geom.in_aperture(slit, psi.axis.position(j)) {
                a
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    WavePacket {
        axis: psi.axis,
        amp,
    }
}

/// Physicists' Hermite polynomial of order 0 or 1.
fn hermite(order: usize, x: f64) -> f64 {
    match order {
        0 => 1.0,
        1 => 2.0 * x,
        _ => unreachable!("only orders 0 and 1 are used"),
    }
}

/// `ψ₁, ψ₂` (orders 0, 1 at slit 1) and `ψ₃, ψ₄` (orders 0, 1 at slit 2).
///
/// Each mode is `H_n(√2 (x−c)/w) exp(−(x−c)²/w²)` restricted to its slit
/// aperture, then the four are orthonormalized by modified Gram-Schmidt.
pub fn make_slit_modes(grid: &GridSpec, geom: &SlitGeometry) -> Result<[WavePacket; N_MODES]> {
    let half_extent = grid.extent() / 2.0;
    let reach = geom.slit_separation() / 2.0 + geom.slit_width() / 2.0 + 2.0 * geom.mode_waist();
    if reach > half_extent {
        return Err(SimError::Geometry(format!(
            "slits reach {} but the grid half-extent is {}",
            reach, half_extent
        )));
    }
    let axis = grid.axis();
    let w = geom.mode_waist();
    let raw: Vec<WavePacket> = [
        (Slit::One, 0),
        (Slit::One, 1),
        (Slit::Two, 0),
        (Slit::Two, 1),
    ]
    .iter()
    .map(|&(slit, order)| {
        let c = geom.center(slit);
        let amp = (0..axis.n_points)
            .map(|j| {
                let x = axis.position(j);
                if !geom.in_aperture(slit, x) {
                    return Complex64::new(0.0, 0.0);
                }
                let u = (x - c) / w;
                Complex64::new(
                    hermite(order, std::f64::consts::SQRT_2 * u) * (-u * u).exp(),
                    0.0,
                )
            })
            .collect();
        WavePacket { axis, amp }
    })
    .collect();

    let mut modes: Vec<WavePacket> = Vec::with_capacity(N_MODES);
    for (k, mut v) in raw.into_iter().enumerate() {
        let scale = v.norm();
        for q in &modes {
            let proj = q.inner(&v);
            for (a, b) in v.amp.iter_mut().zip(&q.amp) {
                *a -= proj * b;
            }
        }
        if scale == 0.0 || v.norm() <= 1e-8 * scale {
            return Err(SimError::DegenerateMode(k + 1));
        }
        v.normalize();
        modes.push(v);
    }
    Ok(modes.try_into().expect("four modes"))
}

/// Unitary DFT plan for the zero-padded far-field transform.
struct FarField {
    fft: Arc<dyn Fft<f64>>,
    len: usize,
}

impl FarField {
    fn new(len: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(len);
        Self { fft, len }
    }

    fn run(&self, psi: &WavePacket, wavelength_scale: f64) -> WavePacket {
        let m = self.len;
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        // x = 0 goes to index 0 so screen phases refer to the optical axis
        for (j, &a) in psi.amp.iter().enumerate() {
            let offset = j as isize - psi.axis.origin as isize;
            buf[offset.rem_euclid(m as isize) as usize] = a;
        }
        self.fft.process(&mut buf);
        let norm = 1.0 / (m as f64).sqrt();
        let half = m / 2;
        let amp = (0..m).map(|i| buf[(i + half) % m] * norm).collect();
        WavePacket {
            axis: Axis {
                n_points: m,
                spacing: wavelength_scale / (m as f64 * psi.axis.spacing),
                origin: half,
            },
            amp,
        }
    }
}

/// Fraunhofer far field of a slit-plane packet.
///
/// The screen amplitude at `X_m = m · λ / (M · dx)` is the unitary DFT of the
/// slit-plane amplitude zero-padded to `M = 4N` samples, with `λ` the
/// `wavelength_scale` (wavelength times screen distance).
pub fn propagate(psi: &WavePacket, wavelength_scale: f64) -> Result<WavePacket> {
    if !(wavelength_scale.is_finite() && wavelength_scale > 0.0) {
        return Err(SimError::Parameter(format!(
            "wavelength_scale must be positive, got {}",
            wavelength_scale
        )));
    }
    Ok(FarField::new(psi.axis.n_points * PADDING).run(psi, wavelength_scale))
}

/// Normalized probabilities over screen bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreenDistribution {
    /// `n_bins + 1` monotone edges; the outer two bins run to the ends of
    /// the computed screen.
    pub bin_edges: Vec<f64>,
    /// Nominal centres on the uniform in-window grid.
    pub bin_centers: Vec<f64>,
    pub prob: Vec<f64>,
}

impl ScreenDistribution {
    pub fn n_bins(&self) -> usize {
        self.prob.len()
    }

    /// Histogram CSV: header `bin_center,probability`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "bin_center,probability")?;
        for (c, p) in self.bin_centers.iter().zip(&self.prob) {
            writeln!(out, "{:.16e},{:.16e}", c, p)?;
        }
        Ok(())
    }
}

/// Half the L¹ distance between two histograms on the same bins.
pub fn total_variation(a: &ScreenDistribution, b: &ScreenDistribution) -> f64 {
    assert_eq!(a.n_bins(), b.n_bins(), "histograms must share bins");
    0.5 * a
        .prob
        .iter()
        .zip(&b.prob)
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

/// `(max − min)/(max + min)` over the central `window` fraction of bins,
/// after a 3-bin moving average. Zero when `max + min = 0`.
pub fn fringe_visibility(dist: &ScreenDistribution, window: f64) -> Result<f64> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(SimError::Parameter(format!(
            "visibility window must lie in (0, 1], got {}",
            window
        )));
    }
    let p = &dist.prob;
    let n = p.len();
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(n - 1);
            p[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64
        })
        .collect();
    let count = ((window * n as f64).round() as usize).clamp(1, n);
    let start = (n - count) / 2;
    let central = &smoothed[start..start + count];
    let max = central.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = central.iter().copied().fold(f64::INFINITY, f64::min);
    if max + min == 0.0 {
        Ok(0.0)
    } else {
        Ok((max - min) / (max + min))
    }
}

/// Everything needed to turn a composite state into screen statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimParams {
    pub grid: GridSpec,
    pub geometry: SlitGeometry,
    pub wavelength_scale: f64,
    pub n_bins: usize,
    /// Half-width of the uniformly binned screen window.
    pub screen_halfwidth: f64,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            grid: GridSpec::new(2048, 16.0).expect("default grid"),
            geometry: SlitGeometry::new(4.0, 1.0, 0.4).expect("default geometry"),
            wavelength_scale: 1.0,
            n_bins: 64,
            screen_halfwidth: 0.5,
        }
    }
}

/// Assignment of screen samples to bins.
#[derive(Debug, Clone, PartialEq)]
struct Binning {
    edges: Vec<f64>,
    centers: Vec<f64>,
    sample_bin: Vec<usize>,
}

impl Binning {
    fn new(screen: &Axis, n_bins: usize, halfwidth: f64) -> Result<Self> {
        if n_bins < 3 {
            return Err(SimError::Parameter(format!(
                "need at least 3 bins, got {}",
                n_bins
            )));
        }
        if !(halfwidth.is_finite() && halfwidth > 0.0) {
            return Err(SimError::Parameter(format!(
                "screen half-width must be positive, got {}",
                halfwidth
            )));
        }
        let dx = screen.spacing;
        let per_bin = ((2.0 * halfwidth / (n_bins as f64 * dx)).round() as usize).max(1);
        let span = per_bin * n_bins;
        if span > screen.n_points {
            return Err(SimError::Parameter(format!(
                "{} bins of {} samples exceed the {} screen samples",
                n_bins, per_bin, screen.n_points
            )));
        }
        let first = screen.origin - span / 2;
        let sample_bin = (0..screen.n_points)
            .map(|j| {
                if j < first {
                    0
                } else {
                    ((j - first) / per_bin).min(n_bins - 1)
                }
            })
            .collect();
        let edge_at = |j: usize| screen.position(j) - dx / 2.0;
        let mut edges = Vec::with_capacity(n_bins + 1);
        edges.push(edge_at(0).min(edge_at(first)));
        for b in 1..n_bins {
            edges.push(edge_at(first + b * per_bin));
        }
        edges.push((screen.position(screen.n_points - 1) + dx / 2.0).max(edge_at(first + span)));
        let centers = (0..n_bins)
            .map(|b| edge_at(first + b * per_bin) + per_bin as f64 * dx / 2.0)
            .collect();
        Ok(Self {
            edges,
            centers,
            sample_bin,
        })
    }

    fn histogram(&self, weights: &[f64]) -> ScreenDistribution {
        let mut prob = vec![0.0; self.centers.len()];
        for (&b, &w) in self.sample_bin.iter().zip(weights) {
            prob[b] += w;
        }
        let total: f64 = prob.iter().sum();
        if total > 0.0 {
            for p in &mut prob {
                *p /= total;
            }
        }
        ScreenDistribution {
            bin_edges: self.edges.clone(),
            bin_centers: self.centers.clone(),
            prob,
        }
    }
}

/// One Lüders branch of a non-selective `T` measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// `1` for `T`, `0` for `1 − T`.
    pub outcome: u8,
    pub weight: f64,
    pub state: Ket,
}

/// Mixture left by measuring `T` without reading the outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DephasedState {
    pub branches: Vec<Branch>,
}

impl DephasedState {
    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.weight).sum()
    }
}

/// Branches `TΨ/‖TΨ‖` and `(1−T)Ψ/‖(1−T)Ψ‖` with Born weights, for
/// `T = 1 ⊗ |1⟩⟨1|`. Zero-weight branches are dropped.
pub fn apply_t_dephasing(state: &Ket) -> Result<DephasedState> {
    if !state.dim().is_multiple_of(ANCILLA_DIM) {
        return Err(SimError::StateDimension {
            got: state.dim(),
            expected: state.dim() + 1,
        });
    }
    let dim_k = state.dim() / ANCILLA_DIM;
    let mut branches = Vec::with_capacity(2);
    for outcome in [1u8, 0u8] {
        let proj = embed_ancilla(&ancilla_projector(outcome), dim_k).expect("2x2 projector");
        let projected = proj.apply(state).expect("matching dimension");
        let weight = projected.norm_sqr();
        if weight > 0.0 {
            if let Some(branch) = projected.normalized() {
                branches.push(Branch {
                    outcome,
                    weight,
                    state: branch,
                });
            }
        }
    }
    Ok(DephasedState { branches })
}

/// The four slit modes with their far-field images and the screen binning.
#[derive(Debug, Clone)]
pub struct DoubleSlit {
    params: SimParams,
    modes: [WavePacket; N_MODES],
    screen_modes: [WavePacket; N_MODES],
    binning: Binning,
}

impl DoubleSlit {
    pub fn new(params: SimParams) -> Result<Self> {
        let modes = make_slit_modes(&params.grid, &params.geometry)?;
        if !(params.wavelength_scale.is_finite() && params.wavelength_scale > 0.0) {
            return Err(SimError::Parameter(format!(
                "wavelength_scale must be positive, got {}",
                params.wavelength_scale
            )));
        }
        let far = FarField::new(params.grid.n_points() * PADDING);
        let screen_modes = modes
            .iter()
            .map(|m| far.run(m, params.wavelength_scale))
            .collect::<Vec<_>>()
            .try_into()
            .expect("four modes");
        let binning = Binning::new(
            &Self::screen_axis_for(&params),
            params.n_bins,
            params.screen_halfwidth,
        )?;
        Ok(Self {
            params,
            modes,
            screen_modes,
            binning,
        })
    }

    fn screen_axis_for(params: &SimParams) -> Axis {
        let m = params.grid.n_points() * PADDING;
        Axis {
            n_points: m,
            spacing: params.wavelength_scale / (m as f64 * params.grid.spacing()),
            origin: m / 2,
        }
    }

    pub fn params(&self) -> &SimParams {
        &self.params
    }

    pub fn modes(&self) -> &[WavePacket; N_MODES] {
        &self.modes
    }

    pub fn screen_modes(&self) -> &[WavePacket; N_MODES] {
        &self.screen_modes
    }

    pub fn screen_axis(&self) -> Axis {
        self.screen_modes[0].axis
    }

    fn check_state(&self, state: &Ket) -> Result<()> {
        let expected = N_MODES * ANCILLA_DIM;
        if state.dim() != expected {
            return Err(SimError::StateDimension {
                got: state.dim(),
                expected,
            });
        }
        Ok(())
    }

    /// Slit-plane amplitude conditioned on ancilla index `a`.
    pub fn spatial_component(&self, state: &Ket, ancilla: usize) -> Result<WavePacket> {
        self.check_state(state)?;
        Ok(self.component(&self.modes, state, ancilla))
    }

    fn component(&self, modes: &[WavePacket; N_MODES], state: &Ket, ancilla: usize) -> WavePacket {
        let coeffs: Vec<Scalar> = (0..N_MODES)
            .map(|k| state.amplitudes()[k * ANCILLA_DIM + ancilla])
            .collect();
        let refs: Vec<&WavePacket> = modes.iter().collect();
        WavePacket::superpose(&refs, &coeffs)
    }

    /// Unbinned screen intensity per screen sample.
    pub fn screen_intensity(&self, state: &Ket) -> Result<Vec<f64>> {
        self.check_state(state)?;
        let mut total = vec![0.0; self.screen_axis().n_points];
        for a in 0..ANCILLA_DIM {
            let field = self.component(&self.screen_modes, state, a);
            for (t, v) in total.iter_mut().zip(field.intensity()) {
                *t += v;
            }
        }
        Ok(total)
    }

    pub fn mixture_intensity(&self, mixture: &DephasedState) -> Result<Vec<f64>> {
        let mut total = vec![0.0; self.screen_axis().n_points];
        for b in &mixture.branches {
            for (t, v) in total.iter_mut().zip(self.screen_intensity(&b.state)?) {
                *t += b.weight * v;
            }
        }
        Ok(total)
    }

    /// Bin per-sample screen weights into a normalized distribution.
    pub fn bin(&self, weights: &[f64]) -> ScreenDistribution {
        self.binning.histogram(weights)
    }

    /// Exact screen distribution of a pure composite state.
    pub fn screen_distribution(&self, state: &Ket) -> Result<ScreenDistribution> {
        Ok(self.bin(&self.screen_intensity(state)?))
    }

    /// Exact screen distribution of a dephased mixture.
    pub fn mixture_distribution(&self, mixture: &DephasedState) -> Result<ScreenDistribution> {
        Ok(self.bin(&self.mixture_intensity(mixture)?))
    }

    /// Bin index of a screen sample.
    pub fn bin_of_sample(&self, sample: usize) -> usize {
        self.binning.sample_bin[sample]
    }
}

/// One simulated particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub trial: u64,
    /// `Some(1)`/`Some(0)` when `T` was measured, `None` otherwise.
    pub t_outcome: Option<u8>,
    pub position: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput {
    pub records: Vec<RunRecord>,
    pub empirical: ScreenDistribution,
}

impl SimulationOutput {
    /// Fraction of runs with `t_outcome == Some(1)` among measured runs.
    pub fn t1_fraction(&self) -> Option<f64> {
        let measured = self
            .records
            .iter()
            .filter(|r| r.t_outcome.is_some())
            .count();
        if measured == 0 {
            return None;
        }
        let ones = self
            .records
            .iter()
            .filter(|r| r.t_outcome == Some(1))
            .count();
        Some(ones as f64 / measured as f64)
    }

    /// Run log: one JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Cumulative table for inverse-CDF sampling of screen samples.
struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cdf }
    }

    fn sample(&self, u: f64) -> usize {
        let total = *self.cdf.last().expect("nonempty screen");
        let target = u * total;
        self.cdf
            .partition_point(|&c| c <= target)
            .min(self.cdf.len() - 1)
    }
}

/// Independent generator for trial `trial`: ChaCha keyed by `seed`, with the
/// trial index as stream id, so draws depend only on `(seed, trial)`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Seeded Monte Carlo of `n_runs` particles.
///
/// With `measure_t`, each run draws the `T` outcome with Born weights,
/// collapses by the Lüders rule and then draws a screen position from the
/// collapsed state; otherwise the position is drawn from the undisturbed
/// state. Runs execute in parallel and are returned in trial order.
pub fn simulate_runs(
    setup: &DoubleSlit,
    state: &Ket,
    measure_t: bool,
    n_runs: u64,
    seed: u64,
) -> Result<SimulationOutput> {
    if n_runs == 0 {
        return Err(SimError::Parameter("n_runs must be at least 1".into()));
    }
    setup.check_state(state)?;
    let screen = setup.screen_axis();

    // (outcome, weight, sampler) per branch; a single undisturbed branch when
    // T is not measured
    let branches: Vec<(Option<u8>, f64, Sampler)> = if measure_t {
        apply_t_dephasing(state)?
            .branches
            .iter()
            .map(|b| {
                Ok((
                    Some(b.outcome),
                    b.weight,
                    Sampler::new(&setup.screen_intensity(&b.state)?),
                ))
            })
            .collect::<Result<_>>()?
    } else {
        vec![(None, 1.0, Sampler::new(&setup.screen_intensity(state)?))]
    };
    let total_weight: f64 = branches.iter().map(|b| b.1).sum();

    let runs: Vec<(RunRecord, usize)> = (0..n_runs)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(seed, trial);
            let branch = if measure_t {
                let u: f64 = rng.gen::<f64>() * total_weight;
                let mut acc = 0.0;
                let mut chosen = branches.len() - 1;
                for (i, b) in branches.iter().enumerate() {
                    acc += b.1;
                    if u < acc {
                        chosen = i;
                        break;
                    }
                }
                &branches[chosen]
            } else {
                &branches[0]
            };
            let sample = branch.2.sample(rng.gen::<f64>());
            let record = RunRecord {
                trial,
                t_outcome: branch.0,
                position: screen.position(sample),
            };
            (record, sample)
        })
        .collect();

    let mut counts = vec![0.0; screen.n_points];
    for &(_, sample) in &runs {
        counts[sample] += 1.0;
    }
    let records = runs.into_iter().map(|(r, _)| r).collect();
    Ok(SimulationOutput {
        empirical: setup.bin(&counts),
        records,
    })
}

/// Named composite states on the four slit modes.
pub mod states {
    use super::*;
    use crate::model::ancilla_ket;

    fn mode(k: usize) -> Ket {
        Ket::basis(N_MODES, k).expect("mode index")
    }

    fn sum(ks: &[usize]) -> Ket {
        ks.iter()
            .map(|&k| mode(k))
            .reduce(|a, b| a.try_add(&b).expect("same dim"))
            .expect("nonempty")
    }

    /// `½[(ψ₁+ψ₂)⊗|1⟩ + (ψ₃+ψ₄)⊗|0⟩]`.
    pub fn entangled() -> Ket {
        sum(&[0, 1])
            .tensor(&ancilla_ket(1))
            .try_add(&sum(&[2, 3]).tensor(&ancilla_ket(0)))
            .expect("same dim")
            .scale(Scalar::new(0.5, 0.0))
    }

    /// `(ψ₁+ψ₃)/√2 ⊗ |1⟩`: one mode per slit, no which-way record.
    pub fn coherent() -> Ket {
        sum(&[0, 2])
            .tensor(&ancilla_ket(1))
            .normalized()
            .expect("nonzero")
    }

    /// `(ψ₁+ψ₂+ψ₃+ψ₄)/2 ⊗ |1⟩`.
    pub fn product() -> Ket {
        sum(&[0, 1, 2, 3])
            .tensor(&ancilla_ket(1))
            .normalized()
            .expect("nonzero")
    }
}
